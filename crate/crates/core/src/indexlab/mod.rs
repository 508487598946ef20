//! Numerical indices of `D' = d/dt + A` on finite cylinders `[0, L] x S^1`.
//!
//! The boundary operator has constant coefficients, so every Fourier mode
//! `k` gives an independent ODE `u' + M_k u = 0` on `[0, L]`. The left end
//! carries a condition relative to `A`, the right end one relative to `-A`
//! (inward normal `-dt`, `sigma_0 = -id`). Kernels come from the primal box
//! scheme, cokernels from the adjoint problem `-v' + M_k^* v = 0` with the
//! adjoint conditions produced by [`crate::bconds::adjoint_condition`].

mod analysis;
mod checks;
mod engine;

use serde::Serialize;

pub use analysis::{
    extension_semigroup_check, greens_convergence, greens_pairing_check, square_function, GreenConvergence,
    SemigroupReport, SquareFunctionReport,
};
pub use checks::{
    check_additivity, check_deformation, check_matching, AdditivityReport, CutReport, DeformationReport, MatchingReport,
};
pub use engine::{mode_systems, EndRef, ModeCoupling, ModeSystem, Segment};

use crate::adapted::{mode_split, BoundaryOperator1D, DEFAULT_REALPART_TOL};
use crate::bconds::{adjoint_condition, aps, doubled_operator, graph_from_subspaces, BoundaryCondition, MatchingBC};
use crate::error::{config, Result};
use crate::linalg::{direct_sum, identity, CMat, C64};
use crate::par_map;

pub const DEFAULT_SVD_TOL: f64 = 1e-8;
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexOptions {
    pub svd_tol: f64,
    pub gap_threshold: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self { svd_tol: DEFAULT_SVD_TOL, gap_threshold: DEFAULT_GAP_THRESHOLD }
    }
}

/// Cylinder `[0, length] x S^1` with modes `-cutoff..=cutoff` and `nodes`
/// time-grid points.
#[derive(Debug, Clone)]
pub struct CylinderModel {
    pub length: f64,
    pub cutoff: usize,
    pub nodes: usize,
    pub op: BoundaryOperator1D,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
}

impl CylinderModel {
    pub fn new(
        length: f64,
        cutoff: usize,
        nodes: usize,
        op: BoundaryOperator1D,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Result<Self> {
        let model = Self { length, cutoff, nodes, op, bc_left, bc_right };
        model.validate()?;
        Ok(model)
    }

    /// APS at both ends: `chi_-(A)` on the left, `chi_-(-A)` on the right.
    pub fn aps(length: f64, cutoff: usize, nodes: usize, op: BoundaryOperator1D) -> Result<Self> {
        let left = aps(&mode_split(&op, cutoff, DEFAULT_REALPART_TOL)?)?;
        let right = aps(&mode_split(&op.negated(), cutoff, DEFAULT_REALPART_TOL)?)?;
        Self::new(length, cutoff, nodes, op, BoundaryCondition::Aps(left), BoundaryCondition::Aps(right))
    }

    pub fn validate(&self) -> Result<()> {
        Segment::new(self.length, self.nodes)?;
        let r = self.op.rank();
        let matching = |bc: &BoundaryCondition| matches!(bc, BoundaryCondition::Matching(_));
        if matching(&self.bc_left) != matching(&self.bc_right) {
            return Err(config("a matching condition couples both ends; use it on both sides"));
        }
        for bc in [&self.bc_left, &self.bc_right] {
            let (cutoff, rank) = match bc {
                BoundaryCondition::Aps(g) | BoundaryCondition::Graph(g) => (Some(g.cutoff), g.rank()),
                BoundaryCondition::Local(l) => (None, l.projector.nrows()),
                BoundaryCondition::PseudoLocal(p) => (Some(p.cutoff), p.blocks[0].nrows()),
                BoundaryCondition::Matching(m) => {
                    if m.a_n != self.op {
                        return Err(config("matching condition built for a different operator"));
                    }
                    (Some(m.cutoff()), m.a_n.rank())
                }
            };
            if cutoff.is_some_and(|c| c != self.cutoff) {
                return Err(config(format!("boundary condition cutoff {cutoff:?} differs from model cutoff {}", self.cutoff)));
            }
            if rank != r {
                return Err(config(format!("boundary condition rank {rank} differs from operator rank {r}")));
            }
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.length / (self.nodes - 1) as f64
    }

    pub fn modes(&self) -> Vec<i64> {
        (-(self.cutoff as i64)..=self.cutoff as i64).collect()
    }

    pub fn segment(&self) -> Segment {
        Segment { length: self.length, nodes: self.nodes }
    }

    /// Per-mode couplings of both ends (outer index = mode).
    pub fn couplings(&self) -> Result<Vec<Vec<ModeCoupling>>> {
        if let BoundaryCondition::Matching(m) = &self.bc_left {
            return matching_coupling(m, EndRef::Start(0), EndRef::End(0)).map(|c| c.into_iter().map(|x| vec![x]).collect());
        }
        let left = end_coupling(&self.op, &self.bc_left, EndRef::Start(0), self.cutoff)?;
        let right = end_coupling(&self.op, &self.bc_right, EndRef::End(0), self.cutoff)?;
        Ok(left.into_iter().zip(right).map(|(l, r)| vec![l, r]).collect())
    }
}

fn sigma0(end: EndRef, r: usize) -> CMat {
    identity(r) * C64::new(end.sigma0_sign(), 0.0)
}

/// Coupling for a single-end condition. `op` is the operator of the model;
/// at an `End` the adapted operator is `-op`. The condition is first put in
/// graph form relative to the adapted operator, then its adjoint is taken.
pub fn end_coupling(op: &BoundaryOperator1D, bc: &BoundaryCondition, end: EndRef, cutoff: usize) -> Result<Vec<ModeCoupling>> {
    if let BoundaryCondition::Matching(_) = bc {
        return Err(config("matching conditions couple two ends"));
    }
    let adapted = match end {
        EndRef::Start(_) => op.clone(),
        EndRef::End(_) => op.negated(),
    };
    let splits = mode_split(&adapted, cutoff, DEFAULT_REALPART_TOL)?;
    let adj_splits = mode_split(&adapted.adjoint(), cutoff, DEFAULT_REALPART_TOL)?;
    let subs: Vec<CMat> = (-(cutoff as i64)..=cutoff as i64).map(|k| bc.subspace(k)).collect::<Result<_>>()?;
    let graph = graph_from_subspaces(&splits, &subs)?;
    let dag = adjoint_condition(&graph, &sigma0(end, op.rank()), &adj_splits)?;
    subs.into_iter()
        .zip(graph.modes_range())
        .map(|(basis, k)| Ok(ModeCoupling { ends: vec![end], basis, adjoint_basis: dag.subspace(k)? }))
        .collect()
}

fn doubled_sigma0(r: usize) -> CMat {
    direct_sum(&identity(r), &(-identity(r)))
}

/// Matching coupling between `n1` (adapted operator `A_N`) and `n2`
/// (adapted operator `-A_N`).
pub fn matching_coupling(m: &MatchingBC, n1: EndRef, n2: EndRef) -> Result<Vec<ModeCoupling>> {
    let adj_splits = mode_split(&m.doubled_operator().adjoint(), m.cutoff(), DEFAULT_REALPART_TOL)?;
    let dag = adjoint_condition(&m.graph, &m.sigma0(), &adj_splits)?;
    m.graph
        .modes_range()
        .map(|k| Ok(ModeCoupling { ends: vec![n1, n2], basis: m.graph.subspace(k)?, adjoint_basis: dag.subspace(k)? }))
        .collect()
}

/// `B_APS(A_N (+) -A_N)` on the pair of ends `n1`, `n2`.
pub fn doubled_aps_coupling(a_n: &BoundaryOperator1D, cutoff: usize, n1: EndRef, n2: EndRef) -> Result<Vec<ModeCoupling>> {
    let d = doubled_operator(a_n);
    let bc = aps(&mode_split(&d, cutoff, DEFAULT_REALPART_TOL)?)?;
    let adj_splits = mode_split(&d.adjoint(), cutoff, DEFAULT_REALPART_TOL)?;
    let dag = adjoint_condition(&bc, &doubled_sigma0(a_n.rank()), &adj_splits)?;
    bc.modes_range()
        .map(|k| Ok(ModeCoupling { ends: vec![n1, n2], basis: bc.subspace(k)?, adjoint_basis: dag.subspace(k)? }))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeIndex {
    pub k: i64,
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// Cokernel from the primal matrix restricted to the boundary subspace.
    pub coker_transpose: usize,
    pub index: i64,
    pub rank_gap: f64,
    /// Smallest singular values of the primal system (ascending tail).
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
    pub coker_transpose: usize,
    /// Worst rank gap over all modes and both systems.
    pub rank_gap: f64,
    pub unreliable: bool,
    pub options: IndexOptions,
    pub modes: Vec<ModeIndex>,
    pub warnings: Vec<String>,
}

impl IndexReport {
    /// Adjoint-system cokernel agrees with the transpose route in every mode.
    pub fn adjoint_consistent(&self) -> bool {
        self.modes.iter().all(|m| m.dim_coker == m.coker_transpose)
    }

    fn from_modes(modes: Vec<ModeIndex>, options: IndexOptions, warnings: Vec<String>) -> Self {
        let dim_ker = modes.iter().map(|m| m.dim_ker).sum();
        let dim_coker = modes.iter().map(|m| m.dim_coker).sum();
        let coker_transpose = modes.iter().map(|m| m.coker_transpose).sum();
        let rank_gap = modes.iter().map(|m| m.rank_gap).fold(f64::INFINITY, f64::min);
        Self {
            dim_ker,
            dim_coker,
            index: dim_ker as i64 - dim_coker as i64,
            coker_transpose,
            rank_gap,
            unreliable: !(rank_gap >= options.gap_threshold),
            options,
            modes,
            warnings,
        }
    }
}

/// Primal systems of every mode, in mode order.
pub fn assemble(model: &CylinderModel) -> Result<Vec<(i64, ModeSystem)>> {
    let couplings = model.couplings()?;
    let seg = [model.segment()];
    model
        .modes()
        .into_iter()
        .zip(&couplings)
        .map(|(k, c)| Ok((k, mode_systems(&model.op.mode_matrix(k), &seg, c)?.0)))
        .collect()
}

/// Index of a chain of segments with arbitrary per-mode couplings.
pub fn segmented_index(
    op: &BoundaryOperator1D,
    cutoff: usize,
    segments: &[Segment],
    couplings: &[Vec<ModeCoupling>],
    options: IndexOptions,
) -> Result<IndexReport> {
    if couplings.len() != 2 * cutoff + 1 {
        return Err(config("one coupling list per mode is required"));
    }
    let modes: Vec<i64> = (-(cutoff as i64)..=cutoff as i64).collect();
    let work: Vec<(i64, &Vec<ModeCoupling>)> = modes.iter().copied().zip(couplings).collect();
    let results = par_map(&work, |(k, c)| -> Result<ModeIndex> {
        let (primal, adjoint) = mode_systems(&op.mode_matrix(*k), segments, c)?;
        let ker = engine::kernel_info(&primal.stacked(), options.svd_tol);
        let coker = engine::kernel_info(&adjoint.stacked(), options.svd_tol);
        Ok(ModeIndex {
            k: *k,
            dim_ker: ker.dim,
            dim_coker: coker.dim,
            coker_transpose: engine::transpose_cokernel(&primal, options.svd_tol),
            index: ker.dim as i64 - coker.dim as i64,
            rank_gap: ker.gap.min(coker.gap),
            singular_values: ker.tail,
        })
    });
    let modes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    for (k, s) in mode_split(op, cutoff, DEFAULT_REALPART_TOL)? {
        if s.has_warnings() {
            warnings.push(format!("mode {k}: eigenvalue with real part within the tolerance of the axis"));
        }
    }
    Ok(IndexReport::from_modes(modes, options, warnings))
}

pub fn numerical_index_with(model: &CylinderModel, options: IndexOptions) -> Result<IndexReport> {
    model.validate()?;
    segmented_index(&model.op, model.cutoff, &[model.segment()], &model.couplings()?, options)
}

/// Index with the default gap threshold.
pub fn numerical_index(model: &CylinderModel, svd_tol: f64) -> Result<IndexReport> {
    numerical_index_with(model, IndexOptions { svd_tol, ..IndexOptions::default() })
}

/// Periodic-in-`t` model (`[0, L]` with its ends identified). The system is
/// square, so the cokernel is the kernel of the adjoint periodic scheme.
pub fn periodic_index(op: &BoundaryOperator1D, cutoff: usize, length: f64, nodes: usize, options: IndexOptions) -> Result<IndexReport> {
    Segment::new(length, nodes)?;
    let modes: Vec<i64> = (-(cutoff as i64)..=cutoff as i64).collect();
    let out = par_map(&modes, |&k| {
        let m = op.mode_matrix(k);
        let prim = engine::kernel_info(&engine::periodic_system(&m, length, nodes), options.svd_tol);
        let adj_sys = engine::periodic_system(&(-m.adjoint()), length, nodes) * C64::new(-1.0, 0.0);
        let adj = engine::kernel_info(&adj_sys, options.svd_tol);
        ModeIndex {
            k,
            dim_ker: prim.dim,
            dim_coker: adj.dim,
            coker_transpose: prim.dim,
            index: prim.dim as i64 - adj.dim as i64,
            rank_gap: prim.gap.min(adj.gap),
            singular_values: prim.tail,
        }
    });
    Ok(IndexReport::from_modes(out, options, Vec::new()))
}
