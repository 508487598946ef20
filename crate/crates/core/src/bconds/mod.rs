//! Boundary conditions on the circle, stored mode by mode.
//!
//! A graphical condition is `B = W_+ (+) {v + g v : v in V_-}` with
//! `V_+- (+) W_+- = range chi_+-(A)`, finite-dimensional `W_+-` and a map `g`
//! sending `V_-` into `V_+` and vanishing on `V_+ (+) W_+ (+) W_-`. Since the
//! boundary operators here have constant coefficients every piece of data is
//! block diagonal in the Fourier modes `k in [-K, K]`.

mod local;
mod matching;

use std::collections::BTreeMap;

pub use local::{local_interchange_check, ls_check, InterchangeReport, LocalBC, LsFailure, LsReport, LsWitness, PseudoLocalBC};
pub use matching::{doubled_operator, matching, MatchingBC};

use crate::adapted::SpectralSplit;
use crate::error::{config, Error, Result};
use crate::linalg::{
    hcat, identity, max_abs, null_space, null_space_abs, op_norm, range_basis, range_basis_abs, subspace_distance, CMat, C64,
};

pub(crate) const SUBSPACE_TOL: f64 = 1e-10;
const SPAN_CHECK: f64 = 1e-8;
const ABS_TOL: f64 = 1e-9;

/// Graph data of one Fourier mode. Bases are stored as columns; `g` maps
/// `V_-` coordinates to `V_+` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGraph {
    pub vminus: CMat,
    pub vplus: CMat,
    pub wplus: CMat,
    pub wminus: CMat,
    pub g: CMat,
}

impl ModeGraph {
    pub fn rank(&self) -> usize {
        self.vminus.nrows()
    }

    fn from_split(split: &SpectralSplit) -> Self {
        let r = split.dim();
        let vminus = split.minus_range();
        let vplus = split.plus_range();
        let g = CMat::zeros(vplus.ncols(), vminus.ncols());
        Self { vminus, vplus, wplus: CMat::zeros(r, 0), wminus: CMat::zeros(r, 0), g }
    }

    /// `[V_- W_- V_+ W_+]`, invertible when the four spaces are complementary.
    pub fn frame(&self) -> CMat {
        hcat(&[&self.vminus, &self.wminus, &self.vplus, &self.wplus])
    }

    /// `g` as an `r x r` matrix: zero on `W_- (+) V_+ (+) W_+`.
    pub fn g_operator(&self) -> CMat {
        let r = self.rank();
        let p = self.vminus.ncols();
        if p == 0 || self.vplus.ncols() == 0 {
            return CMat::zeros(r, r);
        }
        let inv = self.frame().try_inverse().expect("validated frame is invertible");
        let coords_vminus = inv.rows(0, p).into_owned();
        &self.vplus * &self.g * coords_vminus
    }

    /// Columns spanning `W_+ (+) {v + g v}` (not orthonormalised).
    pub fn graph_columns(&self) -> CMat {
        let graph = &self.vminus + &self.vplus * &self.g;
        hcat(&[&self.wplus, &graph])
    }

    pub fn dim(&self) -> usize {
        self.wplus.ncols() + self.vminus.ncols()
    }

    fn validate(&self, split: Option<&SpectralSplit>) -> Result<()> {
        let r = self.rank();
        for (name, m) in [("V+", &self.vplus), ("W+", &self.wplus), ("W-", &self.wminus)] {
            if m.nrows() != r {
                return Err(config(format!("{name} has {} rows, expected {r}", m.nrows())));
            }
        }
        if self.g.shape() != (self.vplus.ncols(), self.vminus.ncols()) {
            return Err(config(format!(
                "g has shape {:?}, expected ({}, {})",
                self.g.shape(),
                self.vplus.ncols(),
                self.vminus.ncols()
            )));
        }
        let frame = self.frame();
        if frame.ncols() != r || crate::linalg::numerical_rank(&frame, 1e-10).rank != r {
            return Err(Error::Invariant("V-, W-, V+, W+ are not complementary".into()));
        }
        if let Some(split) = split {
            let plus = hcat(&[&self.vplus, &self.wplus]);
            let minus = hcat(&[&self.vminus, &self.wminus]);
            if plus.ncols() != split.plus_count()
                || subspace_distance(&plus, &split.plus_range(), SUBSPACE_TOL) > SPAN_CHECK
            {
                return Err(Error::Invariant("V+ (+) W+ does not span range chi_+".into()));
            }
            if minus.ncols() != split.minus_count()
                || subspace_distance(&minus, &split.minus_range(), SUBSPACE_TOL) > SPAN_CHECK
            {
                return Err(Error::Invariant("V- (+) W- does not span range chi_-".into()));
            }
        }
        Ok(())
    }
}

/// Graphical boundary condition over modes `-cutoff..=cutoff`.
///
/// `trace_map` sends graph coordinates to traces; it is the identity for
/// conditions of `D` and `(sigma_0^*)^{-1}` for adjoint conditions, which are
/// described through their `sigma_0^*`-image.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBC {
    pub cutoff: usize,
    pub modes: Vec<ModeGraph>,
    pub trace_map: CMat,
}

fn check_modes(splits: &BTreeMap<i64, SpectralSplit>) -> Result<usize> {
    let cutoff = splits.keys().next_back().copied().unwrap_or(-1);
    if cutoff < 0 {
        return Err(config("no modes supplied"));
    }
    let expect: Vec<i64> = (-cutoff..=cutoff).collect();
    if splits.keys().copied().collect::<Vec<_>>() != expect {
        return Err(config("mode splits must cover -K..=K without gaps"));
    }
    Ok(cutoff as usize)
}

/// Atiyah-Patodi-Singer condition: `V_- = range chi_-`, `V_+ = range chi_+`,
/// `W_+- = 0`, `g = 0`.
pub fn aps(splits: &BTreeMap<i64, SpectralSplit>) -> Result<GraphBC> {
    let cutoff = check_modes(splits)?;
    let modes: Vec<ModeGraph> = splits.values().map(ModeGraph::from_split).collect();
    let r = modes[0].rank();
    Ok(GraphBC { cutoff, modes, trace_map: identity(r) })
}

/// Graph form of arbitrary per-mode subspaces relative to `splits`:
/// `W_+ = S cap chi_+`, `V_- = chi_- S`, `W_-` its orthogonal complement in
/// `range chi_-`, `V_+` the orthogonal complement of `W_+` in `range chi_+`,
/// and `g v = ` the `V_+` part of the `chi_+` component of a lift of `v` to `S`.
pub fn graph_from_subspaces(splits: &BTreeMap<i64, SpectralSplit>, subspaces: &[CMat]) -> Result<GraphBC> {
    let cutoff = check_modes(splits)?;
    if subspaces.len() != splits.len() {
        return Err(config(format!("expected {} mode subspaces, got {}", splits.len(), subspaces.len())));
    }
    let mut modes = Vec::with_capacity(subspaces.len());
    for (split, sub) in splits.values().zip(subspaces) {
        let r = split.dim();
        if sub.nrows() != r {
            return Err(config(format!("subspace has {} rows, expected {r}", sub.nrows())));
        }
        let s = range_basis(sub, SUBSPACE_TOL);
        let plus_total = split.plus_range();
        let minus_total = split.minus_range();
        let ps = &split.chi_minus * &s;
        // S is orthonormal, so absolute thresholds are meaningful here
        let wplus = range_basis(&(&s * null_space_abs(&ps, ABS_TOL)), SUBSPACE_TOL);
        let vminus = range_basis_abs(&ps, ABS_TOL);
        let wminus = &minus_total * null_space_abs(&(vminus.adjoint() * &minus_total), ABS_TOL);
        let vplus = &plus_total * null_space_abs(&(wplus.adjoint() * &plus_total), ABS_TOL);
        let g = if vminus.ncols() == 0 || vplus.ncols() == 0 {
            CMat::zeros(vplus.ncols(), vminus.ncols())
        } else {
            let lift = crate::linalg::pseudo_inverse(&ps, ABS_TOL);
            vplus.adjoint() * &split.chi_plus * &s * lift * &vminus
        };
        modes.push(ModeGraph { vminus, vplus, wplus, wminus, g });
    }
    let r = modes[0].rank();
    let bc = GraphBC { cutoff, modes, trace_map: identity(r) };
    bc.validate(splits)?;
    Ok(bc)
}

/// `B_s = W_+ (+) {v + s g v}`.
pub fn deform(bc: &GraphBC, s: f64) -> GraphBC {
    let mut out = bc.clone();
    for m in &mut out.modes {
        m.g *= C64::new(s, 0.0);
    }
    out
}

impl GraphBC {
    pub fn rank(&self) -> usize {
        self.trace_map.nrows()
    }

    pub fn modes_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.cutoff as i64)..=self.cutoff as i64
    }

    fn index(&self, k: i64) -> Result<usize> {
        let idx = k + self.cutoff as i64;
        if idx < 0 || idx as usize >= self.modes.len() {
            return Err(config(format!("mode {k} outside cutoff {}", self.cutoff)));
        }
        Ok(idx as usize)
    }

    pub fn mode(&self, k: i64) -> Result<&ModeGraph> {
        Ok(&self.modes[self.index(k)?])
    }

    /// Orthonormal basis of the condition in mode `k`, in trace coordinates.
    pub fn subspace(&self, k: i64) -> Result<CMat> {
        let cols = &self.trace_map * self.mode(k)?.graph_columns();
        Ok(range_basis(&cols, SUBSPACE_TOL))
    }

    pub fn dim_wplus(&self) -> usize {
        self.modes.iter().map(|m| m.wplus.ncols()).sum()
    }

    pub fn dim_wminus(&self) -> usize {
        self.modes.iter().map(|m| m.wminus.ncols()).sum()
    }

    /// `sup_k |g_k|`: the operator norm of `g` on the truncated space.
    pub fn g_bound(&self) -> f64 {
        self.modes.iter().map(|m| op_norm(&m.g_operator())).fold(0.0, f64::max)
    }

    /// Checks every mode against the splits it should refine.
    pub fn validate(&self, splits: &BTreeMap<i64, SpectralSplit>) -> Result<()> {
        if check_modes(splits)? != self.cutoff {
            return Err(config("mode cutoffs differ"));
        }
        for (m, s) in self.modes.iter().zip(splits.values()) {
            m.validate(Some(s))?;
        }
        Ok(())
    }

    /// Adds `vectors` (columns, inside `range chi_+` of mode `k`) to `W_+`,
    /// shrinking `V_+` to the orthogonal complement of `W_+` in that range.
    /// Resets `g` in mode `k`.
    pub fn with_wplus(mut self, k: i64, vectors: &CMat) -> Result<Self> {
        let idx = self.index(k)?;
        let m = &mut self.modes[idx];
        let (v, w) = split_off(&m.vplus, &m.wplus, vectors, "W+", "chi_+")?;
        m.vplus = v;
        m.wplus = w;
        m.g = CMat::zeros(m.vplus.ncols(), m.vminus.ncols());
        Ok(self)
    }

    /// As [`Self::with_wplus`] for `W_-` inside `range chi_-`.
    pub fn with_wminus(mut self, k: i64, vectors: &CMat) -> Result<Self> {
        let idx = self.index(k)?;
        let m = &mut self.modes[idx];
        let (v, w) = split_off(&m.vminus, &m.wminus, vectors, "W-", "chi_-")?;
        m.vminus = v;
        m.wminus = w;
        m.g = CMat::zeros(m.vplus.ncols(), m.vminus.ncols());
        Ok(self)
    }

    /// Sets `g` in mode `k` from coordinates (`dim V_+ x dim V_-`).
    pub fn with_g(mut self, k: i64, coords: CMat) -> Result<Self> {
        let idx = self.index(k)?;
        let m = &mut self.modes[idx];
        if coords.shape() != (m.vplus.ncols(), m.vminus.ncols()) {
            return Err(config(format!(
                "g block for mode {k} must be {}x{}, got {:?}",
                m.vplus.ncols(),
                m.vminus.ncols(),
                coords.shape()
            )));
        }
        m.g = coords;
        Ok(self)
    }
}

/// Moves `vectors` out of `v` (which together with `w` spans a spectral
/// range) into `w`.
fn split_off(v: &CMat, w: &CMat, vectors: &CMat, wname: &str, range: &str) -> Result<(CMat, CMat)> {
    let total = range_basis(&hcat(&[v, w]), SUBSPACE_TOL);
    if vectors.nrows() != total.nrows() {
        return Err(config(format!("{wname} vectors have {} rows, expected {}", vectors.nrows(), total.nrows())));
    }
    let residual = vectors - &total * (total.adjoint() * vectors);
    if max_abs(&residual) > 1e-8 * max_abs(vectors).max(1.0) {
        return Err(config(format!("{wname} vectors do not lie in range {range}")));
    }
    let new_w = range_basis(&hcat(&[w, vectors]), SUBSPACE_TOL);
    if new_w.ncols() != w.ncols() + vectors.ncols() {
        return Err(config(format!("{wname} vectors are dependent or overlap existing {wname}")));
    }
    let coords = null_space(&(new_w.adjoint() * &total), SUBSPACE_TOL);
    let new_v = &total * coords;
    Ok((new_v, new_w))
}

/// Orthonormal basis of `(span of the given blocks)^perp`.
fn perp(blocks: &[&CMat], r: usize) -> CMat {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    if cols == 0 {
        return identity(r);
    }
    crate::linalg::orth_complement(&hcat(blocks), SUBSPACE_TOL)
}

/// Adjoint condition `B^dagger`, in graphical form with respect to the
/// adjoint problem: its `sigma_0^*`-image is
/// `W~_- (+) {u - g^* u : u in V~_+}` with
/// `W~_+- = (V_+ (+) V_- (+) W_-+)^perp` and `V~_+- = (V_-+ (+) W_+ (+) W_-)^perp`.
///
/// The returned data uses the slots of [`ModeGraph`] for the adjoint roles
/// (`wplus <- W~_-`, `vminus <- V~_+`, `vplus <- V~_-`, `wminus <- W~_+`,
/// `g <- -g^*`), i.e. it is graphical with respect to the adapted operator
/// `-A^*` of `D^dagger`. `adjoint_splits` are the splits of `A^*`; the tilde
/// spaces are checked against them.
pub fn adjoint_condition(bc: &GraphBC, sigma0: &CMat, adjoint_splits: &BTreeMap<i64, SpectralSplit>) -> Result<GraphBC> {
    if check_modes(adjoint_splits)? != bc.cutoff {
        return Err(config(format!(
            "adjoint splits cover cutoff {}, condition has {}",
            adjoint_splits.len() / 2,
            bc.cutoff
        )));
    }
    let r = bc.rank();
    if sigma0.shape() != (r, r) {
        return Err(config("sigma_0 has the wrong shape"));
    }
    let sigma0_adj_inv = crate::linalg::checked_inverse(&sigma0.adjoint(), 1e-12)
        .ok_or(Error::SingularConormal { min_sv: 0.0 })?;
    let mut modes = Vec::with_capacity(bc.modes.len());
    for (m, split) in bc.modes.iter().zip(adjoint_splits.values()) {
        // graph data of the condition itself lives in graph coordinates; the
        // adjoint is taken for the identity trace map and composed below
        let wt_plus = perp(&[&m.vplus, &m.vminus, &m.wminus], r);
        let wt_minus = perp(&[&m.vplus, &m.vminus, &m.wplus], r);
        let vt_plus = perp(&[&m.vminus, &m.wplus, &m.wminus], r);
        let vt_minus = perp(&[&m.vplus, &m.wplus, &m.wminus], r);

        let plus = hcat(&[&vt_plus, &wt_plus]);
        let minus = hcat(&[&vt_minus, &wt_minus]);
        if plus.ncols() != split.plus_count()
            || subspace_distance(&plus, &split.plus_range(), SUBSPACE_TOL) > SPAN_CHECK
            || minus.ncols() != split.minus_count()
            || subspace_distance(&minus, &split.minus_range(), SUBSPACE_TOL) > SPAN_CHECK
        {
            return Err(Error::Invariant(
                "adjoint tilde spaces do not match the spectral ranges of A^*".into(),
            ));
        }
        // -g^* from V~_+ to V~_-, in orthonormal coordinates of both
        let g_adj = m.g_operator().adjoint();
        let g_new = -(vt_minus.adjoint() * g_adj * &vt_plus);
        modes.push(ModeGraph { vminus: vt_plus, vplus: vt_minus, wplus: wt_minus, wminus: wt_plus, g: g_new });
    }
    // B = trace_map * G  =>  B^dagger = (sigma_0^*)^{-1} * (trace_map^*)^{-1} * (image of G)
    let tm_adj_inv = crate::linalg::checked_inverse(&bc.trace_map.adjoint(), 1e-12)
        .ok_or_else(|| config("trace map is singular"))?;
    Ok(GraphBC { cutoff: bc.cutoff, modes, trace_map: sigma0_adj_inv * tm_adj_inv })
}

/// `sigma_0^*`-annihilator `{v : <u, sigma_0^* v> = 0 for all u in span(b)}`
/// computed directly from the orthogonal complement.
pub fn annihilator(b: &CMat, sigma0: &CMat) -> CMat {
    let r = sigma0.nrows();
    if b.ncols() == 0 {
        return identity(r);
    }
    null_space(&(b.adjoint() * sigma0.adjoint()), SUBSPACE_TOL)
}

/// Boundary condition at one end of a cylinder (or, for matching, at both).
#[derive(Debug, Clone)]
pub enum BoundaryCondition {
    Aps(GraphBC),
    Graph(GraphBC),
    Local(LocalBC),
    PseudoLocal(PseudoLocalBC),
    Matching(MatchingBC),
}

impl BoundaryCondition {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Aps(_) => "aps",
            Self::Graph(_) => "graph",
            Self::Local(_) => "local",
            Self::PseudoLocal(_) => "pseudo-local",
            Self::Matching(_) => "matching",
        }
    }

    /// Orthonormal basis of the condition in mode `k`.
    pub fn subspace(&self, k: i64) -> Result<CMat> {
        match self {
            Self::Aps(g) | Self::Graph(g) => g.subspace(k),
            Self::Local(l) => Ok(l.subspace()),
            Self::PseudoLocal(p) => p.subspace(k),
            Self::Matching(m) => m.graph.subspace(k),
        }
    }

    /// Adjoint condition in mode `k`. Graphical conditions go through
    /// [`adjoint_condition`]; local and pseudo-local ones through
    /// [`annihilator`].
    pub fn adjoint(&self, sigma0: &CMat, adjoint_splits: &BTreeMap<i64, SpectralSplit>) -> Result<AdjointCondition> {
        Ok(match self {
            Self::Aps(g) | Self::Graph(g) => AdjointCondition::Graph(adjoint_condition(g, sigma0, adjoint_splits)?),
            Self::Matching(m) => AdjointCondition::Graph(adjoint_condition(&m.graph, sigma0, adjoint_splits)?),
            Self::Local(_) | Self::PseudoLocal(_) => {
                let cutoff = check_modes(adjoint_splits)?;
                let mut per_mode = Vec::with_capacity(2 * cutoff + 1);
                for k in -(cutoff as i64)..=cutoff as i64 {
                    per_mode.push(annihilator(&self.subspace(k)?, sigma0));
                }
                AdjointCondition::Direct { cutoff, per_mode }
            }
        })
    }

    /// Finite-rank offset `dim W_+ - dim W_-` relative to APS, when graphical.
    pub fn w_offset(&self) -> Option<i64> {
        match self {
            Self::Aps(g) | Self::Graph(g) => Some(g.dim_wplus() as i64 - g.dim_wminus() as i64),
            Self::Matching(m) => Some(m.graph.dim_wplus() as i64 - m.graph.dim_wminus() as i64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum AdjointCondition {
    Graph(GraphBC),
    Direct { cutoff: usize, per_mode: Vec<CMat> },
}

impl AdjointCondition {
    pub fn subspace(&self, k: i64) -> Result<CMat> {
        match self {
            Self::Graph(g) => g.subspace(k),
            Self::Direct { cutoff, per_mode } => {
                let idx = k + *cutoff as i64;
                if idx < 0 || idx as usize >= per_mode.len() {
                    return Err(config(format!("mode {k} outside cutoff {cutoff}")));
                }
                Ok(per_mode[idx as usize].clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapted::{mode_split, BoundaryOperator1D, DEFAULT_REALPART_TOL};
    use crate::clifford::pauli;
    use crate::linalg::{c, re};

    fn scalar_flow(s: f64, cutoff: usize) -> BTreeMap<i64, SpectralSplit> {
        mode_split(&BoundaryOperator1D::scalar(c(0.0, 1.0), re(s)), cutoff, DEFAULT_REALPART_TOL).unwrap()
    }

    #[test]
    fn aps_selects_modes_by_sign() {
        let bc = aps(&scalar_flow(0.5, 4)).unwrap();
        for k in -4..=4_i64 {
            // eigenvalue -k + 0.5 is non-positive exactly for k >= 1
            assert_eq!(bc.subspace(k).unwrap().ncols(), usize::from(k >= 1), "k={k}");
        }
        assert_eq!(bc.dim_wplus(), 0);
        assert_eq!(bc.dim_wminus(), 0);
    }

    #[test]
    fn aps_of_negated_operator_and_zero_eigenvalue() {
        // eigenvalue -k: k = 0 is zero and stays on the minus side for both A and -A
        let op = BoundaryOperator1D::scalar(c(0.0, 1.0), re(0.0));
        let a = aps(&mode_split(&op, 3, DEFAULT_REALPART_TOL).unwrap()).unwrap();
        let neg = aps(&mode_split(&op.negated(), 3, DEFAULT_REALPART_TOL).unwrap()).unwrap();
        for k in -3..=3_i64 {
            let da = a.subspace(k).unwrap().ncols();
            let dn = neg.subspace(k).unwrap().ncols();
            if k == 0 {
                assert_eq!((da, dn), (1, 1));
            } else {
                assert_eq!(da + dn, 1, "k={k}");
            }
        }
    }

    fn two_by_two() -> BTreeMap<i64, SpectralSplit> {
        // mode eigenvalues -k + 0.3 and k + 0.3 (a = i sigma_z)
        let op = BoundaryOperator1D::new(&pauli()[2] * c(0.0, 1.0), identity(2) * re(0.3)).unwrap();
        mode_split(&op, 2, DEFAULT_REALPART_TOL).unwrap()
    }

    #[test]
    fn deform_scales_g() {
        let splits = two_by_two();
        let bc = aps(&splits).unwrap().with_g(1, CMat::from_element(1, 1, c(0.5, 0.5))).unwrap();
        bc.validate(&splits).unwrap();
        assert_eq!(deform(&bc, 1.0), bc);
        assert!(deform(&bc, 0.0).modes.iter().all(|m| max_abs(&m.g) == 0.0));
        let twice = deform(&deform(&bc, 0.3), 0.5);
        let once = deform(&bc, 0.15);
        for (a, b) in twice.modes.iter().zip(&once.modes) {
            assert!(max_abs(&(&a.g - &b.g)) < 1e-16);
        }
    }

    #[test]
    fn g_is_nilpotent_and_vanishes_off_vminus() {
        let splits = two_by_two();
        let bc = aps(&splits).unwrap().with_g(-1, CMat::from_element(1, 1, re(2.0))).unwrap();
        let m = bc.mode(-1).unwrap();
        let g = m.g_operator();
        assert!(max_abs(&(&g * &g)) < 1e-14);
        assert!(max_abs(&(&g * &m.vplus)) < 1e-14);
        assert!((bc.g_bound() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wplus_moves_dimension() {
        let splits = two_by_two();
        let plus = splits[&1].plus_range();
        let bc = aps(&splits).unwrap().with_wplus(1, &plus).unwrap();
        bc.validate(&splits).unwrap();
        assert_eq!(bc.dim_wplus(), 1);
        assert_eq!(bc.subspace(1).unwrap().ncols(), 2);
        // a vector outside chi_+ is rejected
        let minus = splits[&1].minus_range();
        assert!(aps(&splits).unwrap().with_wplus(1, &minus).is_err());
        // bad g shape is rejected
        assert!(aps(&splits).unwrap().with_g(0, CMat::zeros(2, 2)).is_err());
    }

    #[test]
    fn adjoint_orthogonal_case_keeps_spaces() {
        // self-adjoint A: chi ranges are orthogonal, g = 0, W = 0
        let op = BoundaryOperator1D::new(&pauli()[2] * c(0.0, 1.0), identity(2) * re(0.3)).unwrap();
        let splits = mode_split(&op, 2, DEFAULT_REALPART_TOL).unwrap();
        let adj = mode_split(&op.adjoint(), 2, DEFAULT_REALPART_TOL).unwrap();
        let bc = aps(&splits).unwrap();
        let dag = adjoint_condition(&bc, &identity(2), &adj).unwrap();
        for (m, d) in bc.modes.iter().zip(&dag.modes) {
            assert!(subspace_distance(&m.vminus, &d.vplus, 1e-10) < 1e-10);
            assert!(subspace_distance(&m.vplus, &d.vminus, 1e-10) < 1e-10);
        }
    }

    #[test]
    fn adjoint_rejects_wrong_cutoff() {
        let splits = two_by_two();
        let bc = aps(&splits).unwrap();
        let op = BoundaryOperator1D::new(&pauli()[2] * c(0.0, 1.0), identity(2) * re(0.3)).unwrap();
        let adj = mode_split(&op.adjoint(), 3, DEFAULT_REALPART_TOL).unwrap();
        assert!(matches!(adjoint_condition(&bc, &identity(2), &adj), Err(Error::Config(_))));
    }

    #[test]
    fn graph_form_reproduces_subspaces() {
        let splits = two_by_two();
        let bc = aps(&splits)
            .unwrap()
            .with_g(1, CMat::from_element(1, 1, c(0.7, -0.2)))
            .unwrap()
            .with_wplus(-2, &splits[&-2].plus_range())
            .unwrap();
        let subs: Vec<CMat> = bc.modes_range().map(|k| bc.subspace(k).unwrap()).collect();
        let again = graph_from_subspaces(&splits, &subs).unwrap();
        for k in bc.modes_range() {
            assert!(subspace_distance(&bc.subspace(k).unwrap(), &again.subspace(k).unwrap(), 1e-10) < 1e-10);
        }
        assert_eq!(again.dim_wplus(), 1);
        assert_eq!(again.dim_wminus(), 0);
        assert!((again.g_bound() - bc.g_bound()).abs() < 1e-10);
    }

    #[test]
    fn graph_form_of_foreign_aps_counts_offsets() {
        // APS of the s = 2.5 flow relative to the s = 0.5 flow: modes 1, 2 move from chi_- to chi_+
        let foreign = aps(&scalar_flow(2.5, 4)).unwrap();
        let subs: Vec<CMat> = foreign.modes_range().map(|k| foreign.subspace(k).unwrap()).collect();
        let bc = graph_from_subspaces(&scalar_flow(0.5, 4), &subs).unwrap();
        assert_eq!(bc.dim_wminus(), 2);
        assert_eq!(bc.dim_wplus(), 0);
    }

    #[test]
    fn annihilator_dimension() {
        let b = CMat::from_row_slice(3, 1, &[re(1.0), re(1.0), re(0.0)]);
        let ann = annihilator(&b, &identity(3));
        assert_eq!(ann.ncols(), 2);
        assert!(max_abs(&(b.adjoint() * ann)) < 1e-14);
    }
}
