//! Dense complex linear algebra shared by every module: rank decisions,
//! orthonormal bases, kernels and subspace comparisons.
//!
//! All rank decisions are relative to the largest singular value of the
//! matrix at hand. Bases are returned as matrices whose columns span the
//! subspace; an empty subspace is an `n x 0` matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(re)
}

/// Largest entry modulus; zero for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Thin SVD `m = u diag(s) v_t` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v_t: CMat,
}

impl Svd {
    #[cfg(test)]
    fn residual(&self, m: &CMat) -> f64 {
        let k = self.s.len();
        let us = CMat::from_fn(m.nrows(), k, |i, j| self.u[(i, j)] * self.s[j]);
        max_abs(&(us * &self.v_t - m))
    }
}

/// Thin SVD through faer; the nalgebra complex SVD is not reliable on
/// rank-deficient or moderately sized complex input.
pub fn svd(m: &CMat) -> Svd {
    let (r, c_) = m.shape();
    let k = r.min(c_);
    if k == 0 {
        return Svd { u: CMat::zeros(r, 0), s: Vec::new(), v_t: CMat::zeros(0, c_) };
    }
    let fm = faer::Mat::<C64>::from_fn(r, c_, |i, j| m[(i, j)]);
    let d = fm.thin_svd().expect("SVD converged");
    let (u, sv, v) = (d.U(), d.S().column_vector(), d.V());
    // faer returns singular values in descending order
    Svd {
        u: CMat::from_fn(r, k, |i, j| u[(i, j)]),
        s: (0..k).map(|i| sv[i].re).collect(),
        v_t: CMat::from_fn(k, c_, |i, j| v[(j, i)].conj()),
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    svd(m).s
}

/// Moore-Penrose pseudo-inverse discarding singular values `<= abs_tol`.
pub fn pseudo_inverse(m: &CMat, abs_tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.ncols(), m.nrows());
    }
    let d = svd(m);
    let keep = d.s.iter().take_while(|&&x| x > abs_tol).count();
    let vs = CMat::from_fn(m.ncols(), keep, |i, j| d.v_t[(j, i)].conj() / d.s[j]);
    vs * d.u.columns(0, keep).adjoint()
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Outcome of a relative-threshold rank decision.
#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Descending singular values.
    pub singular_values: Vec<f64>,
    /// Absolute threshold that was applied.
    pub threshold: f64,
    /// Smallest retained over largest discarded singular value. When nothing
    /// is discarded the denominator is the round-off floor
    /// `eps * dim * sigma_max`; when nothing is retained the numerator is the
    /// threshold.
    pub gap: f64,
}

pub fn numerical_rank(m: &CMat, rel_tol: f64) -> RankInfo {
    let sv = singular_values(m);
    rank_from_singular_values(sv, rel_tol, m.nrows().max(m.ncols()))
}

pub fn rank_from_singular_values(sv: Vec<f64>, rel_tol: f64, dim: usize) -> RankInfo {
    let smax = sv.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * smax;
    let rank = sv.iter().filter(|&&s| s > threshold && s > 0.0).count();
    let floor = (f64::EPSILON * dim.max(1) as f64 * smax).max(f64::MIN_POSITIVE);
    let retained = if rank > 0 { sv[rank - 1] } else { threshold.max(f64::MIN_POSITIVE) };
    let discarded = sv.get(rank).copied().unwrap_or(0.0).max(floor);
    let gap = if smax == 0.0 { f64::INFINITY } else { retained / discarded };
    RankInfo { rank, singular_values: sv, threshold, gap }
}

/// Orthonormal basis of the column space.
pub fn range_basis(m: &CMat, rel_tol: f64) -> CMat {
    range_basis_by(m, |smax| rel_tol * smax)
}

/// As [`range_basis`] with an absolute singular-value threshold, for
/// matrices that may be pure round-off.
pub fn range_basis_abs(m: &CMat, abs_tol: f64) -> CMat {
    range_basis_by(m, |_| abs_tol)
}

fn range_basis_by(m: &CMat, threshold: impl Fn(f64) -> f64) -> CMat {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return CMat::zeros(n, 0);
    }
    let d = svd(m);
    let cut = threshold(d.s[0]);
    let keep = d.s.iter().take_while(|&&x| x > cut && x > 0.0).count();
    d.u.columns(0, keep).into_owned()
}

/// Orthonormal basis of the kernel.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    null_space_by(m, |smax| rel_tol * smax)
}

/// As [`null_space`] with an absolute singular-value threshold.
pub fn null_space_abs(m: &CMat, abs_tol: f64) -> CMat {
    null_space_by(m, |_| abs_tol)
}

fn null_space_by(m: &CMat, threshold: impl Fn(f64) -> f64) -> CMat {
    let n = m.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(n);
    }
    // pad to at least square so that V is complete
    let padded = if m.nrows() < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let d = svd(&padded);
    let cut = threshold(d.s[0]);
    let rank = d.s.iter().take_while(|&&x| x > cut && x > 0.0).count();
    // least significant direction first
    let kern = n - rank;
    CMat::from_fn(n, kern, |r, j| d.v_t[(n - 1 - j, r)].conj())
}

/// Orthonormal basis of the orthogonal complement of span(basis) in C^n.
pub fn orth_complement(basis: &CMat, rel_tol: f64) -> CMat {
    if basis.ncols() == 0 {
        return identity(basis.nrows());
    }
    null_space(&basis.adjoint(), rel_tol)
}

/// Orthogonal projector onto span(basis).
pub fn orth_projector(basis: &CMat, rel_tol: f64) -> CMat {
    let q = range_basis(basis, rel_tol);
    &q * q.adjoint()
}

/// Distance between two subspaces as the spectral norm of the difference of
/// their orthogonal projectors. Differing dimensions give distance 1.
pub fn subspace_distance(a: &CMat, b: &CMat, rel_tol: f64) -> f64 {
    let pa = orth_projector(a, rel_tol);
    let pb = orth_projector(b, rel_tol);
    op_norm(&(pa - pb))
}

/// Orthonormal basis of the column space built by column-pivoted
/// Gram-Schmidt with re-orthogonalisation. Pivot = largest residual norm,
/// ties broken by lowest column index, so the basis is reproducible.
pub fn pivoted_orthonormal_basis(m: &CMat, rel_tol: f64) -> CMat {
    let n = m.nrows();
    let mut work: Vec<nalgebra::DVector<C64>> = (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
    let scale = work.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    let mut used = vec![false; work.len()];
    let mut out: Vec<nalgebra::DVector<C64>> = Vec::new();
    if scale == 0.0 {
        return CMat::zeros(n, 0);
    }
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in work.iter().enumerate() {
            if used[j] {
                continue;
            }
            let nv = v.norm();
            match best {
                Some((_, b)) if nv <= b * (1.0 + 1e-12) => {}
                _ => best = Some((j, nv)),
            }
        }
        let Some((j, nv)) = best else { break };
        if nv <= rel_tol * scale {
            break;
        }
        used[j] = true;
        let mut q = work[j].clone();
        for _ in 0..2 {
            for b in &out {
                let p = b.dotc(&q);
                q.axpy(-p, b, C64::new(1.0, 0.0));
            }
        }
        let nq = q.norm();
        if nq <= rel_tol * scale {
            continue;
        }
        q /= C64::new(nq, 0.0);
        for (i, v) in work.iter_mut().enumerate() {
            if !used[i] {
                let p = q.dotc(v);
                v.axpy(-p, &q, C64::new(1.0, 0.0));
            }
        }
        out.push(q);
        if out.len() == n {
            break;
        }
    }
    let mut res = CMat::zeros(n, out.len());
    for (j, q) in out.iter().enumerate() {
        res.set_column(j, q);
    }
    res
}

pub fn hcat(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hcat row mismatch");
        out.view_mut((0, off), (rows, b.ncols())).copy_from(*b);
        off += b.ncols();
    }
    out
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

/// Inverse with a relative singularity check.
pub fn checked_inverse(m: &CMat, rel_tol: f64) -> Option<CMat> {
    if !m.is_square() {
        return None;
    }
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= rel_tol * smax {
        return None;
    }
    m.clone().try_inverse()
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, j| eig.eigenvectors[(r, idx[j])]);
    (vals, vecs)
}

/// Applies a real function to a Hermitian matrix through its eigenvalues.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&l| re(f(l)))));
    &vecs * d * vecs.adjoint()
}
