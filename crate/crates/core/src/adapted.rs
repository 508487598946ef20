//! Adapted boundary symbols, boundary operators on the circle and the
//! spectral projectors `chi_+` / `chi_-` splitting generalised eigenspaces by
//! the sign of the real part.
//!
//! Projectors are computed from a complex Schur form `M = Q T Q^*`. The
//! diagonal of `T` is reordered by unitary 2x2 swaps so that eigenvalues with
//! `Re > tol` come first; the off-diagonal block is then removed by solving
//! the triangular Sylvester equation `T11 X - X T22 = -T12`, giving
//! `chi_+ = Q [[I, -X], [0, 0]] Q^*`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::linalg::{c, checked_inverse, identity, max_abs, re, singular_values, CMat, C64};
use crate::par_map;
use crate::symbolalg::{sphere_grid, LinearSymbol, Metric};

pub const DEFAULT_REALPART_TOL: f64 = 1e-10;

/// Conormal `tau` with `tau(T) = 1`, the symbol `sigma_0 = sigma_D(tau)` and
/// its inverse.
#[derive(Debug, Clone)]
pub struct ConormalData {
    pub tau: Vec<f64>,
    /// Interior normal vector `T`, the `g`-dual of `tau` scaled so `tau(T) = 1`.
    pub normal: Vec<f64>,
    pub sigma0: CMat,
    pub sigma0_inv: CMat,
}

impl ConormalData {
    pub fn new(symbol: &LinearSymbol, metric: &Metric, tau: &[f64]) -> Result<Self> {
        if !symbol.is_square() {
            return Err(config("adapted operators need a square symbol"));
        }
        if tau.len() != symbol.dim() || metric.dim() != symbol.dim() {
            return Err(config("conormal, metric and symbol dimensions differ"));
        }
        let tt = metric.inner(tau, tau);
        if !(tt > 0.0) {
            return Err(config("conormal must be nonzero"));
        }
        let g_tau = metric.gram() * DVector::from_column_slice(tau);
        let normal: Vec<f64> = g_tau.iter().map(|x| x / tt).collect();
        let sigma0 = symbol.evaluate(tau)?;
        let sigma0_inv = checked_inverse(&sigma0, 1e-12).ok_or_else(|| Error::SingularConormal {
            min_sv: singular_values(&sigma0).last().copied().unwrap_or(0.0),
        })?;
        Ok(Self { tau: tau.to_vec(), normal, sigma0, sigma0_inv })
    }

    /// `xi(T)` for a covector `xi`.
    pub fn normal_component(&self, xi: &[f64]) -> f64 {
        xi.iter().zip(&self.normal).map(|(a, b)| a * b).sum()
    }
}

/// Deterministic `g`-unit covectors with `xi(T) = 0`: a `g`-orthonormal
/// basis of the tangential hyperplane combined with [`sphere_grid`] points.
/// In dimension 2 the hyperplane is a line and both unit covectors are
/// returned.
pub fn tangential_unit_covectors(metric: &Metric, conormal: &ConormalData, count: usize) -> Vec<Vec<f64>> {
    let n = metric.dim();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let t = conormal.normal[j];
        let mut v: Vec<f64> = conormal.tau.iter().enumerate().map(|(i, &x)| if i == j { 1.0 - t * x } else { -t * x }).collect();
        for b in &basis {
            let p = metric.inner(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = metric.norm(&v);
        if norm > 1e-8 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
        if basis.len() + 1 == n {
            break;
        }
    }
    let combine = |u: &[f64]| -> Vec<f64> {
        (0..n).map(|i| basis.iter().zip(u).map(|(b, c)| b[i] * c).sum()).collect()
    };
    match basis.len() {
        0 => Vec::new(),
        1 => vec![basis[0].clone(), basis[0].iter().map(|x| -x).collect()],
        d => sphere_grid(d, count).iter().map(|u| combine(u)).collect(),
    }
}

/// `sigma_A(xi) = sigma_0^{-1} sigma_D(xi)` for tangential `xi` (`xi(T) = 0`).
pub fn adapted_symbol(symbol: &LinearSymbol, conormal: &ConormalData, xi: &[f64]) -> Result<CMat> {
    let scale = xi.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let normal = conormal.normal_component(xi);
    if normal.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::NotTangential(normal));
    }
    Ok(&conormal.sigma0_inv * symbol.evaluate(xi)?)
}

/// First-order operator on the circle with constant coefficients:
/// mode `k` acts by `i k a + b + shift * id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOperator1D {
    #[serde(with = "crate::serde_cmat")]
    pub a: CMat,
    #[serde(with = "crate::serde_cmat")]
    pub b: CMat,
    pub shift: f64,
}

impl BoundaryOperator1D {
    pub fn new(a: CMat, b: CMat) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() || a.nrows() == 0 {
            return Err(config(format!(
                "boundary operator needs equal square a and b, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { a, b, shift: 0.0 })
    }

    /// Scalar operator `a d/dtheta + b`.
    pub fn scalar(a: C64, b: C64) -> Self {
        Self::new(CMat::from_element(1, 1, a), CMat::from_element(1, 1, b)).expect("1x1")
    }

    /// Adapted operator of `symbol` on a circle with tangential unit covector
    /// `e_theta`: `a = sigma_0^{-1} sigma_D(e_theta)`, plus a zeroth-order
    /// part `b`.
    pub fn adapted(symbol: &LinearSymbol, conormal: &ConormalData, e_theta: &[f64], b: CMat) -> Result<Self> {
        let a = adapted_symbol(symbol, conormal, e_theta)?;
        Self::new(a, b)
    }

    pub fn rank(&self) -> usize {
        self.a.nrows()
    }

    pub fn with_shift(&self, r: f64) -> Self {
        Self { shift: self.shift + r, ..self.clone() }
    }

    pub fn negated(&self) -> Self {
        Self { a: -&self.a, b: -&self.b, shift: -self.shift }
    }

    pub fn adjoint(&self) -> Self {
        // (i k a)^* = -i k a^* = i k (-a^*)
        Self { a: -self.a.adjoint(), b: self.b.adjoint(), shift: self.shift }
    }

    pub fn mode_matrix(&self, k: i64) -> CMat {
        &self.a * c(0.0, k as f64) + &self.b + identity(self.rank()) * re(self.shift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub side: Side,
    /// Set when `0 < Re <= realpart_tol`: assigned to the minus side by the
    /// closed-half-plane convention but close enough to flip.
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub chi_plus: CMat,
    pub chi_minus: CMat,
    pub spectrum: Vec<SpectrumEntry>,
    pub realpart_tol: f64,
}

impl SpectralSplit {
    pub fn dim(&self) -> usize {
        self.chi_plus.nrows()
    }

    pub fn plus_count(&self) -> usize {
        self.spectrum.iter().filter(|e| e.side == Side::Plus).map(|e| e.multiplicity).sum()
    }

    pub fn minus_count(&self) -> usize {
        self.dim() - self.plus_count()
    }

    pub fn has_warnings(&self) -> bool {
        self.spectrum.iter().any(|e| e.ambiguous)
    }

    /// Basis of `range(chi_+)` (columns). Nonzero singular values of a
    /// projector are at least 1, so the cut is absolute.
    pub fn plus_range(&self) -> CMat {
        crate::linalg::range_basis_abs(&self.chi_plus, 0.5)
    }

    pub fn minus_range(&self) -> CMat {
        crate::linalg::range_basis_abs(&self.chi_minus, 0.5)
    }

    /// Worst of `|chi_+ + chi_- - id|`, `|chi^2 - chi|`, `|[chi, M]|`.
    pub fn algebra_residual(&self, m: &CMat) -> f64 {
        let n = self.dim();
        let sum = max_abs(&(&self.chi_plus + &self.chi_minus - identity(n)));
        let idp = max_abs(&(&self.chi_plus * &self.chi_plus - &self.chi_plus));
        let idm = max_abs(&(&self.chi_minus * &self.chi_minus - &self.chi_minus));
        let com = max_abs(&(&self.chi_plus * m - m * &self.chi_plus));
        sum.max(idp).max(idm).max(com)
    }
}

/// Swaps the adjacent diagonal entries `k, k+1` of upper-triangular `t` by a
/// unitary rotation, updating `q` so that `q t q^*` is unchanged.
fn swap_adjacent(t: &mut CMat, q: &mut CMat, k: usize) {
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let t12 = t[(k, k + 1)];
    // eigenvector of [[t11, t12], [0, t22]] for t22
    let x0 = t12;
    let x1 = t22 - t11;
    let nx = (x0.norm_sqr() + x1.norm_sqr()).sqrt();
    if nx == 0.0 {
        return;
    }
    let (u0, u1) = (x0 / nx, x1 / nx);
    // rotation G = [[u0, -conj(u1)], [u1, conj(u0)]]
    let g = [[u0, -u1.conj()], [u1, u0.conj()]];
    let n = t.nrows();
    // t <- G^* t on rows k, k+1
    for col in 0..n {
        let a = t[(k, col)];
        let b = t[(k + 1, col)];
        t[(k, col)] = g[0][0].conj() * a + g[1][0].conj() * b;
        t[(k + 1, col)] = g[0][1].conj() * a + g[1][1].conj() * b;
    }
    // t <- t G and q <- q G on columns k, k+1
    for mat in [&mut *t, &mut *q] {
        for row in 0..mat.nrows() {
            let a = mat[(row, k)];
            let b = mat[(row, k + 1)];
            mat[(row, k)] = a * g[0][0] + b * g[1][0];
            mat[(row, k + 1)] = a * g[0][1] + b * g[1][1];
        }
    }
    t[(k + 1, k)] = C64::new(0.0, 0.0);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
}

/// Solves `a x - x b = rhs` for upper-triangular `a` (p x p) and `b`
/// (q x q) with disjoint spectra, column by column.
fn triangular_sylvester(a: &CMat, b: &CMat, rhs: &CMat) -> CMat {
    let p = a.nrows();
    let q = b.nrows();
    let mut x = CMat::zeros(p, q);
    for j in 0..q {
        let mut col: DVector<C64> = rhs.column(j).into_owned();
        for l in 0..j {
            let blj = b[(l, j)];
            if blj != C64::new(0.0, 0.0) {
                col += x.column(l) * blj;
            }
        }
        let shift = b[(j, j)];
        // back substitution with (a - shift I)
        for i in (0..p).rev() {
            let mut s = col[i];
            for l in i + 1..p {
                s -= a[(i, l)] * x[(l, j)];
            }
            x[(i, j)] = s / (a[(i, i)] - shift);
        }
    }
    x
}

fn group_spectrum(diag: &[C64], plus: usize, realpart_tol: f64) -> Vec<SpectrumEntry> {
    let scale = diag.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let cluster = 1e-6 * scale;
    let mut out: Vec<(C64, usize, Side)> = Vec::new();
    for (i, &z) in diag.iter().enumerate() {
        let side = if i < plus { Side::Plus } else { Side::Minus };
        if let Some(entry) = out.iter_mut().find(|(w, _, s)| *s == side && (*w - z).norm() <= cluster) {
            entry.1 += 1;
        } else {
            out.push((z, 1, side));
        }
    }
    out.into_iter()
        .map(|(z, multiplicity, side)| SpectrumEntry {
            re: z.re,
            im: z.im,
            multiplicity,
            side,
            ambiguous: realpart_tol > 0.0 && z.re > 0.0 && z.re <= realpart_tol,
        })
        .collect()
}

pub fn spectral_projectors(m: &CMat, realpart_tol: f64) -> Result<SpectralSplit> {
    if !m.is_square() {
        return Err(config("spectral projectors need a square matrix"));
    }
    if !(realpart_tol >= 0.0) {
        return Err(config("realpart_tol must be nonnegative"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralSplit {
            chi_plus: CMat::zeros(0, 0),
            chi_minus: CMat::zeros(0, 0),
            spectrum: Vec::new(),
            realpart_tol,
        });
    }
    let (mut q, mut t) = m.clone().schur().unpack();
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    let is_plus = |z: C64| z.re > realpart_tol;
    // stable bubble: move plus eigenvalues to the front
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..n - 1 {
            if !is_plus(t[(k, k)]) && is_plus(t[(k + 1, k + 1)]) {
                swap_adjacent(&mut t, &mut q, k);
                changed = true;
            }
        }
    }
    let plus = (0..n).take_while(|&i| is_plus(t[(i, i)])).count();
    let diag: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let spectrum = group_spectrum(&diag, plus, realpart_tol);

    let mut p_schur = CMat::zeros(n, n);
    if plus > 0 {
        for i in 0..plus {
            p_schur[(i, i)] = re(1.0);
        }
        if plus < n {
            let t11 = t.view((0, 0), (plus, plus)).into_owned();
            let t22 = t.view((plus, plus), (n - plus, n - plus)).into_owned();
            let t12 = t.view((0, plus), (plus, n - plus)).into_owned();
            let x = triangular_sylvester(&t11, &t22, &(-t12));
            p_schur.view_mut((0, plus), (plus, n - plus)).copy_from(&(-x));
        }
    }
    let chi_plus = &q * p_schur * q.adjoint();
    let chi_minus = identity(n) - &chi_plus;
    Ok(SpectralSplit { chi_plus, chi_minus, spectrum, realpart_tol })
}

/// Per-mode splits for `k` in `[-cutoff, cutoff]`.
pub fn mode_split(op: &BoundaryOperator1D, cutoff: usize, realpart_tol: f64) -> Result<BTreeMap<i64, SpectralSplit>> {
    let modes: Vec<i64> = (-(cutoff as i64)..=cutoff as i64).collect();
    let splits = par_map(&modes, |&k| spectral_projectors(&op.mode_matrix(k), realpart_tol));
    modes.into_iter().zip(splits).map(|(k, s)| s.map(|s| (k, s))).collect()
}

/// Eigenvalues of mode `k` on the imaginary axis within `tol`, if any
/// (the first one found).
fn axis_eigenvalue(op: &BoundaryOperator1D, k: i64, tol: f64) -> Option<C64> {
    let (_, t) = op.mode_matrix(k).schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).find(|z| z.re.abs() <= tol)
}

/// Finite-truncation stand-in for "invertible and bisectorial": no mode
/// eigenvalue in `[-cutoff, cutoff]` lies on the imaginary axis (which also
/// excludes zero).
pub fn is_invertible_bisectorial_proxy(op: &BoundaryOperator1D, cutoff: usize) -> bool {
    invertibility_witness(op, cutoff).is_none()
}

/// First mode eigenvalue violating the proxy, as an error value.
pub fn invertibility_witness(op: &BoundaryOperator1D, cutoff: usize) -> Option<Error> {
    let tol = DEFAULT_REALPART_TOL;
    (-(cutoff as i64)..=cutoff as i64).find_map(|k| {
        axis_eigenvalue(op, k, tol).map(|z| Error::NotInvertible { mode: k, re: z.re, im: z.im })
    })
}

/// First `r` from a fixed ladder of small shifts that makes `op + r` pass
/// the proxy.
pub fn shift_to_invertible(op: &BoundaryOperator1D, cutoff: usize) -> BoundaryOperator1D {
    for r in [0.0, 0.5, 0.25, 0.125, 0.375, 0.0625] {
        let shifted = op.with_shift(r);
        if is_invertible_bisectorial_proxy(&shifted, cutoff) {
            return shifted;
        }
    }
    op.with_shift(0.5 / std::f64::consts::E)
}
