//! Per-mode box-scheme systems on a chain of time segments.
//!
//! On each segment `u' + M u = 0` is discretised as
//! `(u_{j+1} - u_j)/h + M (u_j + u_{j+1})/2 = 0`: one block row per cell,
//! so a segment with `N` nodes contributes `(N-1) r` rows and `N r` unknowns.
//! The continuous solution space has dimension `r` per segment and the scheme
//! keeps exactly that, which is what makes kernel dimensions comparable with
//! the ODE. Couplings impose `(1 - Pi_S) (traces) = 0` for a subspace `S` of
//! the concatenated traces at a list of segment ends.

use serde::Serialize;

use crate::error::{config, Result};
use crate::linalg::{identity, null_space, numerical_rank, orth_projector, rank_from_singular_values, singular_values, CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub length: f64,
    pub nodes: usize,
}

impl Segment {
    pub fn new(length: f64, nodes: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(config(format!("segment length must be positive, got {length}")));
        }
        if nodes < 4 {
            return Err(config(format!("need at least 4 grid points, got {nodes}")));
        }
        Ok(Self { length, nodes })
    }

    pub fn h(&self) -> f64 {
        self.length / (self.nodes - 1) as f64
    }
}

/// Segment end. `Start` has inward normal `+dt` (`sigma_0 = id`), `End` has
/// inward normal `-dt` (`sigma_0 = -id`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EndRef {
    Start(usize),
    End(usize),
}

impl EndRef {
    pub fn sigma0_sign(self) -> f64 {
        match self {
            Self::Start(_) => 1.0,
            Self::End(_) => -1.0,
        }
    }
}

/// Condition on the traces at `ends` for one mode: `basis` spans the
/// condition, `adjoint_basis` the adjoint condition.
#[derive(Debug, Clone)]
pub struct ModeCoupling {
    pub ends: Vec<EndRef>,
    pub basis: CMat,
    pub adjoint_basis: CMat,
}

/// Linear system of one mode: `dynamics` rows followed by `boundary` rows.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    pub dynamics: CMat,
    pub boundary: CMat,
}

impl ModeSystem {
    pub fn stacked(&self) -> CMat {
        vstack(&self.dynamics, &self.boundary)
    }

    pub fn unknowns(&self) -> usize {
        self.dynamics.ncols()
    }
}

pub(crate) fn vstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

fn offsets(segments: &[Segment], r: usize) -> Vec<usize> {
    let mut off = Vec::with_capacity(segments.len() + 1);
    let mut acc = 0;
    for s in segments {
        off.push(acc);
        acc += s.nodes * r;
    }
    off.push(acc);
    off
}

/// Box-scheme rows for `deriv_sign * u' + m u = 0` on every segment.
pub(crate) fn dynamics(m: &CMat, segments: &[Segment], deriv_sign: f64) -> CMat {
    let r = m.nrows();
    let off = offsets(segments, r);
    let rows: usize = segments.iter().map(|s| (s.nodes - 1) * r).sum();
    let mut out = CMat::zeros(rows, off[segments.len()]);
    let mut row = 0;
    for (s, seg) in segments.iter().enumerate() {
        let h = seg.h();
        let left = identity(r) * C64::new(-deriv_sign / h, 0.0) + m * C64::new(0.5, 0.0);
        let right = identity(r) * C64::new(deriv_sign / h, 0.0) + m * C64::new(0.5, 0.0);
        for j in 0..seg.nodes - 1 {
            let col = off[s] + j * r;
            out.view_mut((row, col), (r, r)).copy_from(&left);
            out.view_mut((row, col + r), (r, r)).copy_from(&right);
            row += r;
        }
    }
    out
}

fn end_column(end: EndRef, segments: &[Segment], off: &[usize], r: usize) -> Result<usize> {
    match end {
        EndRef::Start(s) if s < segments.len() => Ok(off[s]),
        EndRef::End(s) if s < segments.len() => Ok(off[s] + (segments[s].nodes - 1) * r),
        _ => Err(config(format!("{end:?} refers to a missing segment"))),
    }
}

/// `(1 - Pi_S)` applied to the selected traces, scaled by `scale`.
pub(crate) fn coupling_rows(
    couplings: &[(Vec<EndRef>, &CMat)],
    segments: &[Segment],
    r: usize,
    scale: f64,
) -> Result<CMat> {
    let off = offsets(segments, r);
    let rows: usize = couplings.iter().map(|(e, _)| e.len() * r).sum();
    let mut out = CMat::zeros(rows, off[segments.len()]);
    let mut row = 0;
    for (ends, basis) in couplings {
        let dim = ends.len() * r;
        if basis.nrows() != dim {
            return Err(config(format!("coupling basis has {} rows, expected {dim}", basis.nrows())));
        }
        let proj = if basis.ncols() == 0 { CMat::zeros(dim, dim) } else { orth_projector(basis, 1e-10) };
        let rest = (identity(dim) - proj) * C64::new(scale, 0.0);
        for (e, end) in ends.iter().enumerate() {
            let col = end_column(*end, segments, &off, r)?;
            out.view_mut((row, col), (dim, r)).copy_from(&rest.columns(e * r, r));
        }
        row += dim;
    }
    Ok(out)
}

pub(crate) fn boundary_scale(segments: &[Segment]) -> f64 {
    1.0 / segments.iter().map(Segment::h).fold(f64::INFINITY, f64::min)
}

/// Primal (`u' + M u`) and adjoint (`-v' + M^* v`) systems of one mode.
pub fn mode_systems(m: &CMat, segments: &[Segment], couplings: &[ModeCoupling]) -> Result<(ModeSystem, ModeSystem)> {
    let r = m.nrows();
    let scale = boundary_scale(segments);
    let prim: Vec<(Vec<EndRef>, &CMat)> = couplings.iter().map(|c| (c.ends.clone(), &c.basis)).collect();
    let adj: Vec<(Vec<EndRef>, &CMat)> = couplings.iter().map(|c| (c.ends.clone(), &c.adjoint_basis)).collect();
    let primal = ModeSystem { dynamics: dynamics(m, segments, 1.0), boundary: coupling_rows(&prim, segments, r, scale)? };
    let adjoint =
        ModeSystem { dynamics: dynamics(&m.adjoint(), segments, -1.0), boundary: coupling_rows(&adj, segments, r, scale)? };
    Ok((primal, adjoint))
}

/// Kernel dimension with its rank diagnostics.
#[derive(Debug, Clone)]
pub(crate) struct KernelInfo {
    pub dim: usize,
    pub gap: f64,
    pub tail: Vec<f64>,
}

pub(crate) fn kernel_info(system: &CMat, svd_tol: f64) -> KernelInfo {
    let cols = system.ncols();
    let sv = singular_values(system);
    let info = rank_from_singular_values(sv, svd_tol, system.nrows().max(cols));
    let tail: Vec<f64> = info.singular_values.iter().rev().take(3).rev().copied().collect();
    KernelInfo { dim: cols - info.rank, gap: info.gap, tail }
}

/// Cokernel of the operator restricted to the boundary-condition subspace:
/// rows minus rank of `dynamics * Z` with `Z = ker(boundary)`.
pub(crate) fn transpose_cokernel(system: &ModeSystem, svd_tol: f64) -> usize {
    let z = null_space(&system.boundary, 1e-10);
    if z.ncols() == 0 {
        return system.dynamics.nrows();
    }
    system.dynamics.nrows() - numerical_rank(&(&system.dynamics * z), svd_tol).rank
}

/// Periodic box scheme on one loop of length `length` (square system).
pub(crate) fn periodic_system(m: &CMat, length: f64, nodes: usize) -> CMat {
    let r = m.nrows();
    let h = length / nodes as f64;
    let left = identity(r) * C64::new(-1.0 / h, 0.0) + m * C64::new(0.5, 0.0);
    let right = identity(r) * C64::new(1.0 / h, 0.0) + m * C64::new(0.5, 0.0);
    let mut out = CMat::zeros(nodes * r, nodes * r);
    for j in 0..nodes {
        let next = (j + 1) % nodes;
        out.view_mut((j * r, j * r), (r, r)).copy_from(&left);
        out.view_mut((j * r, next * r), (r, r)).copy_from(&right);
    }
    out
}
