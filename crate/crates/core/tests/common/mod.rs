//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ellbc::linalg::{c, hcat, identity, numerical_rank, orth_complement, range_basis, CMat, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `dim(span a cap span b)` from `dim a + dim b - rank [a b]`.
pub fn intersection_dim(a: &CMat, b: &CMat) -> usize {
    let a = range_basis(a, 1e-9);
    let b = range_basis(b, 1e-9);
    if a.ncols() == 0 || b.ncols() == 0 {
        return 0;
    }
    a.ncols() + b.ncols() - numerical_rank(&hcat(&[&a, &b]), 1e-9).rank
}

/// Solutions of `u' + M u = 0` on `[0, L]` with `u(0) in B_L`, `u(L) in B_R`:
/// `u(0) in B_L cap e^{LM} B_R`.
pub fn ode_kernel(m: &CMat, length: f64, bl: &CMat, br: &CMat) -> usize {
    let prop = (m * C64::new(length, 0.0)).exp();
    intersection_dim(bl, &(prop * br))
}

/// Solutions of `-v' + M^* v = 0` with `v(0) perp B_L`, `v(L) perp B_R`:
/// `v(L) = e^{L M^*} v(0)`.
pub fn ode_cokernel(m: &CMat, length: f64, bl: &CMat, br: &CMat) -> usize {
    let prop = (m.adjoint() * C64::new(length, 0.0)).exp();
    let bl_perp = orth_complement(&range_basis(bl, 1e-9), 1e-9);
    let br_perp = orth_complement(&range_basis(br, 1e-9), 1e-9);
    // v(0) in bl_perp with e^{L M^*} v(0) in br_perp
    let inv = prop.try_inverse().expect("exponential is invertible");
    intersection_dim(&bl_perp, &(inv * br_perp))
}

/// Number of eigenvalues with positive real part via the inertia theorem:
/// if `M H + H M^* = I` then `H` has as many positive eigenvalues as `M` has
/// eigenvalues in the right half-plane.
pub fn inertia_plus_count(m: &CMat) -> usize {
    let n = m.nrows();
    // vec(M H + H M^*) = (I (x) M + conj(M) (x) I) vec(H)
    let big = identity(n).kronecker(m) + m.conjugate().kronecker(&identity(n));
    let rhs = DMatrix::from_fn(n * n, 1, |i, _| if i % (n + 1) == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let sol = big.lu().solve(&rhs).expect("no eigenvalue pairs mirror across the axis");
    let h = CMat::from_fn(n, n, |i, j| sol[(j * n + i, 0)]);
    let herm = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().filter(|&&x| x > 0.0).count()
}

/// Basis of the eigenspace of `m` for eigenvalue `lambda` from the SVD null
/// space of `m - lambda`.
pub fn eigenspace(m: &CMat, lambda: C64, tol: f64) -> CMat {
    let shifted = m - identity(m.nrows()) * lambda;
    ellbc::linalg::null_space(&shifted, tol)
}
