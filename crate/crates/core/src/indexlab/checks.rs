//! Index identities: deformation of the graph map, matching along a cut and
//! additivity of the index under cutting.

use serde::Serialize;

use super::{
    doubled_aps_coupling, end_coupling, matching_coupling, numerical_index_with, periodic_index, segmented_index,
    CylinderModel, EndRef, IndexOptions, IndexReport, ModeCoupling, Segment,
};
use crate::adapted::{mode_split, BoundaryOperator1D, DEFAULT_REALPART_TOL};
use crate::bconds::{aps, deform, matching, BoundaryCondition, GraphBC};
use crate::error::{config, Result};

#[derive(Debug, Clone, Serialize)]
pub struct DeformationReport {
    pub s_values: Vec<f64>,
    pub indices: Vec<i64>,
    pub reports: Vec<IndexReport>,
    pub constant: bool,
    /// First `s` whose index differs from the previous step.
    pub first_jump: Option<f64>,
    pub aps_index: i64,
    pub dim_wplus: usize,
    pub dim_wminus: usize,
    /// `Ind(D_B) = Ind(D_APS) + dim W_+ - dim W_-` at `s = 1`.
    pub formula_holds: bool,
    pub passed: bool,
}

/// Sweeps `B_s` (graph map `s g`) on the left end of `model` for
/// `s = 0, 1/steps, ..., 1` and compares the end point with the APS index.
pub fn check_deformation(model: &CylinderModel, bc: &GraphBC, steps: usize) -> Result<DeformationReport> {
    if steps == 0 {
        return Err(config("deformation sweep needs at least one step"));
    }
    let splits = mode_split(&model.op, model.cutoff, DEFAULT_REALPART_TOL)?;
    bc.validate(&splits)?;
    let opts = IndexOptions::default();
    let with_left = |left: BoundaryCondition| CylinderModel { bc_left: left, ..model.clone() };

    let s_values: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let reports = s_values
        .iter()
        .map(|&s| numerical_index_with(&with_left(BoundaryCondition::Graph(deform(bc, s))), opts))
        .collect::<Result<Vec<_>>>()?;
    let indices: Vec<i64> = reports.iter().map(|r| r.index).collect();
    let first_jump = indices.windows(2).position(|w| w[0] != w[1]).map(|i| s_values[i + 1]);
    let aps_index = numerical_index_with(&with_left(BoundaryCondition::Aps(aps(&splits)?)), opts)?.index;
    let (dim_wplus, dim_wminus) = (bc.dim_wplus(), bc.dim_wminus());
    let formula_holds = *indices.last().expect("nonempty") == aps_index + dim_wplus as i64 - dim_wminus as i64;
    let constant = first_jump.is_none();
    let reliable = reports.iter().all(|r| !r.unreliable);
    Ok(DeformationReport {
        s_values,
        indices,
        reports,
        constant,
        first_jump,
        aps_index,
        dim_wplus,
        dim_wminus,
        formula_holds,
        passed: constant && formula_holds && reliable,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingReport {
    /// Periodic-in-`t` operator, no cut.
    pub uncut: IndexReport,
    /// Cut cylinder with the matching condition.
    pub matching: IndexReport,
    /// Cut cylinder with `B_APS(A_N (+) -A_N)`.
    pub aps: IndexReport,
    /// Modes whose three per-mode indices differ.
    pub mismatched_modes: Vec<i64>,
    /// `(cut position, index)` for a closed loop cut at two places.
    pub cut_invariance: Vec<(f64, i64)>,
    pub agree: bool,
    pub passed: bool,
}

fn nodes_for(length: f64, h: f64) -> usize {
    ((length / h).round() as usize + 1).max(4)
}

fn zip_couplings(parts: Vec<Vec<ModeCoupling>>, modes: usize) -> Vec<Vec<ModeCoupling>> {
    let mut out = vec![Vec::new(); modes];
    for part in parts {
        for (slot, c) in out.iter_mut().zip(part) {
            slot.push(c);
        }
    }
    out
}

/// Uncut, matching and doubled-APS indices for the cylinder over `a_n`, plus
/// a loop cut at each position in `cuts` (fractions of `length` in `(0, 1)`).
pub fn check_matching(
    a_n: &BoundaryOperator1D,
    length: f64,
    cutoff: usize,
    nodes: usize,
    cuts: &[f64],
) -> Result<MatchingReport> {
    let opts = IndexOptions::default();
    let m = matching(a_n, cutoff)?;
    let seg = Segment::new(length, nodes)?;
    let modes = 2 * cutoff + 1;

    let uncut = periodic_index(a_n, cutoff, length, nodes - 1, opts)?;
    let matched = segmented_index(
        a_n,
        cutoff,
        &[seg],
        &zip_couplings(vec![matching_coupling(&m, EndRef::Start(0), EndRef::End(0))?], modes),
        opts,
    )?;
    let aps_rep = segmented_index(
        a_n,
        cutoff,
        &[seg],
        &zip_couplings(vec![doubled_aps_coupling(a_n, cutoff, EndRef::Start(0), EndRef::End(0))?], modes),
        opts,
    )?;
    let mismatched_modes: Vec<i64> = uncut
        .modes
        .iter()
        .zip(&matched.modes)
        .zip(&aps_rep.modes)
        .filter(|((a, b), c)| a.index != b.index || b.index != c.index)
        .map(|((a, _), _)| a.k)
        .collect();
    let agree = uncut.index == matched.index && matched.index == aps_rep.index;

    let mut cut_invariance = Vec::with_capacity(cuts.len());
    for &frac in cuts {
        if !(frac > 0.0 && frac < 1.0) {
            return Err(config(format!("cut position {frac} must lie in (0, 1)")));
        }
        let c = frac * length;
        let h = seg.h();
        let segs = [Segment::new(c, nodes_for(c, h))?, Segment::new(length - c, nodes_for(length - c, h))?];
        let couplings = zip_couplings(
            vec![
                matching_coupling(&m, EndRef::Start(1), EndRef::End(0))?,
                matching_coupling(&m, EndRef::Start(0), EndRef::End(1))?,
            ],
            modes,
        );
        cut_invariance.push((frac, segmented_index(a_n, cutoff, &segs, &couplings, opts)?.index));
    }
    let cuts_ok = cut_invariance.iter().all(|&(_, i)| i == matched.index);
    let reliable = !matched.unreliable && !aps_rep.unreliable && !uncut.unreliable;
    Ok(MatchingReport {
        passed: agree && cuts_ok && reliable,
        uncut,
        matching: matched,
        aps: aps_rep,
        mismatched_modes,
        cut_invariance,
        agree,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CutReport {
    pub position: f64,
    /// Two segments glued by the matching condition at the cut.
    pub matched: i64,
    /// `[0, c]` with `chi_-(-A)` at the cut.
    pub left: i64,
    /// `[c, L]` with `chi_-(A)` at the cut.
    pub right: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub glued: i64,
    pub cuts: Vec<CutReport>,
    pub passed: bool,
}

/// Cuts `model` at each fraction in `cuts`: the index of the glued model must
/// equal the matched two-piece index and the sum of the two pieces with
/// `B_APS(A (+) -A) = B' (+) B''` imposed at the cut.
pub fn check_additivity(model: &CylinderModel, cuts: &[f64]) -> Result<AdditivityReport> {
    if let BoundaryCondition::Matching(_) = model.bc_left {
        return Err(config("additivity needs outer conditions at both ends"));
    }
    let opts = IndexOptions::default();
    let op = &model.op;
    let k = model.cutoff;
    let modes = 2 * k + 1;
    let glued = numerical_index_with(model, opts)?;
    let m = matching(op, k)?;
    let aps_here = BoundaryCondition::Aps(aps(&mode_split(op, k, DEFAULT_REALPART_TOL)?)?);
    let aps_neg = BoundaryCondition::Aps(aps(&mode_split(&op.negated(), k, DEFAULT_REALPART_TOL)?)?);
    let h = model.h();
    let mut out = Vec::with_capacity(cuts.len());
    for &frac in cuts {
        if !(frac > 0.0 && frac < 1.0) {
            return Err(config(format!("cut position {frac} must lie in (0, 1)")));
        }
        let c = frac * model.length;
        let s1 = Segment::new(c, nodes_for(c, h))?;
        let s2 = Segment::new(model.length - c, nodes_for(model.length - c, h))?;
        let matched = segmented_index(
            op,
            k,
            &[s1, s2],
            &zip_couplings(
                vec![
                    end_coupling(op, &model.bc_left, EndRef::Start(0), k)?,
                    matching_coupling(&m, EndRef::Start(1), EndRef::End(0))?,
                    end_coupling(op, &model.bc_right, EndRef::End(1), k)?,
                ],
                modes,
            ),
            opts,
        )?;
        let left = segmented_index(
            op,
            k,
            &[s1],
            &zip_couplings(
                vec![end_coupling(op, &model.bc_left, EndRef::Start(0), k)?, end_coupling(op, &aps_neg, EndRef::End(0), k)?],
                modes,
            ),
            opts,
        )?;
        let right = segmented_index(
            op,
            k,
            &[s2],
            &zip_couplings(
                vec![end_coupling(op, &aps_here, EndRef::Start(0), k)?, end_coupling(op, &model.bc_right, EndRef::End(0), k)?],
                modes,
            ),
            opts,
        )?;
        out.push(CutReport { position: frac, matched: matched.index, left: left.index, right: right.index });
    }
    let passed = !glued.unreliable && out.iter().all(|c| c.matched == glued.index && c.left + c.right == glued.index);
    Ok(AdditivityReport { glued: glued.index, cuts: out, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re, CMat};

    fn flow(s: f64) -> BoundaryOperator1D {
        BoundaryOperator1D::scalar(c(0.0, 1.0), re(s))
    }

    #[test]
    fn deformation_with_w_offsets() {
        let op = flow(0.5);
        let model = CylinderModel::aps(1.0, 4, 41, op.clone()).unwrap();
        let splits = mode_split(&op, 4, DEFAULT_REALPART_TOL).unwrap();
        // mode 0 has eigenvalue 0.5 (chi_+), mode 1 has -0.5 (chi_-)
        let bc = aps(&splits).unwrap().with_wplus(0, &splits[&0].plus_range()).unwrap();
        let rep = check_deformation(&model, &bc, 10).unwrap();
        assert!(rep.passed, "{:?}", rep.indices);
        assert_eq!(rep.indices[0], rep.aps_index + 1);
        let bc = aps(&splits).unwrap().with_wminus(1, &splits[&1].minus_range()).unwrap();
        let rep = check_deformation(&model, &bc, 4).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.indices[0], rep.aps_index - 1);
    }

    #[test]
    fn deformation_rejects_foreign_graph() {
        let model = CylinderModel::aps(1.0, 2, 21, flow(0.5)).unwrap();
        let other = aps(&mode_split(&flow(1.5), 2, DEFAULT_REALPART_TOL).unwrap()).unwrap();
        assert!(check_deformation(&model, &other, 4).is_err());
        let _ = CMat::zeros(0, 0);
    }

    #[test]
    fn matching_three_ways() {
        let rep = check_matching(&flow(0.4), 1.0, 4, 41, &[0.3, 0.5]).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.mismatched_modes.is_empty());
    }

    #[test]
    fn additivity_with_reference_conditions() {
        let op = flow(0.5);
        let k = 5;
        let left = aps(&mode_split(&flow(2.5), k, DEFAULT_REALPART_TOL).unwrap()).unwrap();
        let right = aps(&mode_split(&flow(-0.5).negated(), k, DEFAULT_REALPART_TOL).unwrap()).unwrap();
        let model = CylinderModel::new(1.0, k, 41, op, BoundaryCondition::Aps(left), BoundaryCondition::Aps(right)).unwrap();
        let rep = check_additivity(&model, &[0.25, 0.5, 0.8]).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_ne!(rep.glued, 0);
    }
}
