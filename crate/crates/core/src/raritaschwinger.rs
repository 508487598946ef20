//! Rarita-Schwinger bundle maps and principal symbol built from a Dirac-type
//! seed symbol.
//!
//! `T*M (x) E` is realised in the basis `{e^i (x) b_a}` with flat index
//! `i * m + a`, where `{e^i}` is a `g`-orthonormal coframe and `{b_a}` the
//! standard basis of `E = C^m`. The same convention is used for `F`.
//!
//! The twisted-symbol compression `(id - iota~ gamma~)(id (x) sigma(xi))`
//! restricted to `E^{3/2} = ker gamma` has Gram eigenvalues `|xi|^2` on
//! `E^{3/2}(xi) = {Phi : xi _| Phi = 0}` and `((n-2)/n)^2 |xi|^2` on its
//! complement `{(id - iota gamma)(xi (x) v)}`, of dimensions `(n-2)m` and `m`.

use crate::error::{config, Error, Result};
use crate::linalg::{
    hermitian_eigen, identity, max_abs, null_space, pivoted_orthonormal_basis, re, CMat, RMat,
};
use crate::symbolalg::{require_dirac_type, LinearSymbol, Metric};

const BUILD_TOL: f64 = 1e-12;
const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RSBundleData {
    pub n: usize,
    pub m: usize,
    /// Seed symbol expressed in the orthonormal coframe.
    pub seed: LinearSymbol,
    /// Maps covector components in the input basis to coframe components.
    pub frame: RMat,
    /// `gamma: T*M (x) E -> F`, shape `m x nm`.
    pub gamma: CMat,
    /// `iota: F -> T*M (x) E`, shape `nm x m`.
    pub iota: CMat,
    /// `gamma~: T*M (x) F -> E`.
    pub gamma_tilde: CMat,
    /// `iota~: E -> T*M (x) F`.
    pub iota_tilde: CMat,
    /// Orthogonal projector `id - iota gamma` onto `E^{3/2}`.
    pub p32: CMat,
    /// Orthonormal columns spanning `E^{3/2}`.
    pub basis32: CMat,
    /// Orthogonal projector `id - iota~ gamma~` onto `F^{3/2}`.
    pub p32_f: CMat,
    pub basis32_f: CMat,
}

#[derive(Debug, Clone)]
pub struct RSSymbolEvaluation {
    pub xi: Vec<f64>,
    /// `(n-1)m x (n-1)m` matrix in `basis32` / `basis32_f` coordinates.
    pub matrix: CMat,
    /// Ascending eigenvalues of `matrix^* matrix`.
    pub gram_eigs: Vec<f64>,
}

/// Orthogonal splitting of `E^{3/2}` along a nonzero covector.
#[derive(Debug, Clone)]
pub struct RSDecomposition {
    /// Orthonormal columns spanning `{Phi in E^{3/2} : xi _| Phi = 0}`.
    pub annihilated: CMat,
    /// Orthonormal columns spanning `{(id - iota gamma)(xi (x) v)}`.
    pub complement: CMat,
}

/// Identity deviations recorded at build time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSIdentityResiduals {
    pub gamma_iota: f64,
    pub iota_adjoint: f64,
    pub gamma_iota_tilde: f64,
    pub iota_tilde_adjoint: f64,
    pub p32_idempotent: f64,
    pub p32_selfadjoint: f64,
    pub p32_formula: f64,
    pub p32_rank: usize,
}

fn block_row(blocks: &[CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols = blocks[0].ncols();
    let mut out = CMat::zeros(rows, cols * blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        out.view_mut((0, i * cols), (rows, cols)).copy_from(b);
    }
    out
}

fn block_col(blocks: &[CMat]) -> CMat {
    block_row(&blocks.iter().map(|b| b.transpose()).collect::<Vec<_>>()).transpose()
}

/// `id_{T*M} (x) a` on `n` copies.
fn lift(n: usize, a: &CMat) -> CMat {
    identity(n).kronecker(a)
}

impl RSBundleData {
    pub fn dim_e32(&self) -> usize {
        self.basis32.ncols()
    }

    pub fn to_frame(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.n {
            return Err(config(format!("covector has length {}, expected {}", xi.len(), self.n)));
        }
        Ok((&self.frame * nalgebra::DVector::from_column_slice(xi)).iter().copied().collect())
    }

    pub fn identity_residuals(&self) -> RSIdentityResiduals {
        let n = self.n as f64;
        let m = self.m;
        let nm = self.n * m;
        RSIdentityResiduals {
            gamma_iota: max_abs(&(&self.gamma * &self.iota - identity(m))),
            iota_adjoint: max_abs(&(self.iota.adjoint() - &self.gamma * re(1.0 / n))),
            gamma_iota_tilde: max_abs(&(&self.gamma_tilde * &self.iota_tilde - identity(m))),
            iota_tilde_adjoint: max_abs(&(self.iota_tilde.adjoint() - &self.gamma_tilde * re(1.0 / n))),
            p32_idempotent: max_abs(&(&self.p32 * &self.p32 - &self.p32)),
            p32_selfadjoint: max_abs(&(self.p32.adjoint() - &self.p32)),
            p32_formula: max_abs(&(identity(nm) - &self.iota * &self.gamma - &self.p32)),
            p32_rank: self.basis32.ncols(),
        }
    }

    /// `(id - iota~ gamma~)(id (x) sigma(xi))` applied to `basis32`, as an
    /// `nm x (n-1)m` matrix in the ambient `T*M (x) F` coordinates.
    pub fn symbol_ambient(&self, xi: &[f64]) -> Result<CMat> {
        let eta = self.to_frame(xi)?;
        let s = self.seed.evaluate(&eta)?;
        Ok(&self.p32_f * lift(self.n, &s) * &self.basis32)
    }

    /// Rarita-Schwinger symbol as a linear symbol on `E^{3/2} -> F^{3/2}`
    /// (basis coordinates), with covectors in the input basis.
    pub fn as_linear_symbol(&self) -> Result<LinearSymbol> {
        let coeffs = (0..self.n)
            .map(|i| {
                let mut e = vec![0.0; self.n];
                e[i] = 1.0;
                rs_symbol(self, &e).map(|ev| ev.matrix)
            })
            .collect::<Result<Vec<_>>>()?;
        LinearSymbol::new(coeffs)
    }

    /// Named matrices for export.
    pub fn named_matrices(&self) -> Vec<(&'static str, &CMat)> {
        vec![
            ("gamma", &self.gamma),
            ("iota", &self.iota),
            ("gamma_tilde", &self.gamma_tilde),
            ("iota_tilde", &self.iota_tilde),
            ("p32", &self.p32),
            ("basis32", &self.basis32),
            ("p32_f", &self.p32_f),
            ("basis32_f", &self.basis32_f),
        ]
    }
}

pub fn build_rs(dirac: &LinearSymbol, metric: &Metric) -> Result<RSBundleData> {
    let n = dirac.dim();
    if n < 3 {
        return Err(config(format!("Rarita-Schwinger construction needs dimension n >= 3, got {n}")));
    }
    if metric.dim() != n {
        return Err(config("metric dimension does not match symbol"));
    }
    require_dirac_type(dirac, metric, 1e-10)?;
    let m = dirac.rank_e();

    // orthonormal coframe f^a = sum_i C_ai e^i with C = L^{-1}
    let chol_l = metric.gram().clone().cholesky().expect("metric validated").l();
    let coframe = chol_l.clone().try_inverse().expect("Cholesky factor is invertible");
    let seed_coeffs: Vec<CMat> = (0..n)
        .map(|a| {
            (0..n).fold(CMat::zeros(m, m), |acc, i| {
                let w = coframe[(a, i)];
                if w == 0.0 {
                    acc
                } else {
                    acc + &dirac.coeffs()[i] * re(w)
                }
            })
        })
        .collect();
    let seed = LinearSymbol::new(seed_coeffs)?;
    let frame = chol_l.transpose();

    let sig = seed.coeffs();
    let gamma = block_row(sig);
    let iota = block_col(&sig.iter().map(|s| s.adjoint()).collect::<Vec<_>>()) * re(1.0 / n as f64);
    let gamma_tilde = block_row(&sig.iter().map(|s| s.adjoint()).collect::<Vec<_>>());
    let iota_tilde = block_col(sig) * re(1.0 / n as f64);

    let nm = n * m;
    let p32 = identity(nm) - &iota * &gamma;
    let p32_f = identity(nm) - &iota_tilde * &gamma_tilde;
    let basis32 = pivoted_orthonormal_basis(&p32, BASIS_TOL);
    let basis32_f = pivoted_orthonormal_basis(&p32_f, BASIS_TOL);

    let data = RSBundleData {
        n,
        m,
        seed,
        frame,
        gamma,
        iota,
        gamma_tilde,
        iota_tilde,
        p32,
        basis32,
        p32_f,
        basis32_f,
    };
    let r = data.identity_residuals();
    let worst = [
        r.gamma_iota,
        r.iota_adjoint,
        r.gamma_iota_tilde,
        r.iota_tilde_adjoint,
        r.p32_idempotent,
        r.p32_selfadjoint,
        r.p32_formula,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if worst > BUILD_TOL {
        return Err(Error::Invariant(format!("Rarita-Schwinger identities violated by {worst:.3e}")));
    }
    let expect = (n - 1) * m;
    if r.p32_rank != expect || data.basis32_f.ncols() != expect {
        return Err(Error::Invariant(format!(
            "rank of E^(3/2) projector is {}, expected {expect}",
            r.p32_rank
        )));
    }
    Ok(data)
}

pub fn rs_symbol(data: &RSBundleData, xi: &[f64]) -> Result<RSSymbolEvaluation> {
    let ambient = data.symbol_ambient(xi)?;
    let matrix = data.basis32_f.adjoint() * ambient;
    let (gram_eigs, _) = hermitian_eigen(&(matrix.adjoint() * &matrix));
    Ok(RSSymbolEvaluation { xi: xi.to_vec(), matrix, gram_eigs })
}

pub fn decompose_along_xi(data: &RSBundleData, xi: &[f64]) -> Result<RSDecomposition> {
    let eta = data.to_frame(xi)?;
    if eta.iter().all(|&x| x == 0.0) {
        return Err(config("decomposition along xi needs xi != 0"));
    }
    let m = data.m;
    // xi _| : T*M (x) E -> E,  e^i (x) v -> eta_i v
    let contraction = block_row(&eta.iter().map(|&x| identity(m) * re(x)).collect::<Vec<_>>());
    let coords = null_space(&(&contraction * &data.basis32), BASIS_TOL);
    let annihilated = pivoted_orthonormal_basis(&(&data.basis32 * coords), BASIS_TOL);
    let xi_tensor = contraction.adjoint();
    let complement = pivoted_orthonormal_basis(&(&data.p32 * xi_tensor), BASIS_TOL);
    Ok(RSDecomposition { annihilated, complement })
}

/// `xi _| Phi` for every column of `basis`.
pub fn contract_columns(data: &RSBundleData, xi: &[f64], basis: &CMat) -> Result<CMat> {
    let eta = data.to_frame(xi)?;
    let contraction = block_row(&eta.iter().map(|&x| identity(data.m) * re(x)).collect::<Vec<_>>());
    Ok(contraction * basis)
}

/// The two Gram eigenvalues `(|xi|^2, ((n-2)/n)^2 |xi|^2)` and their
/// multiplicities `((n-2)m, m)`.
pub fn expected_gram_spectrum(n: usize, m: usize, xi_norm_sq: f64) -> [(f64, usize); 2] {
    let ratio = (n as f64 - 2.0) / n as f64;
    [(xi_norm_sq, (n - 2) * m), (ratio * ratio * xi_norm_sq, m)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{dirac_seed, pauli};
    use crate::linalg::{numerical_rank, orth_projector};
    use crate::symbolalg::{check_dirac_type, check_ellipticity, operator_norm_bound};

    fn pauli3() -> RSBundleData {
        let s = LinearSymbol::new(pauli().to_vec()).unwrap();
        build_rs(&s, &Metric::euclidean(3)).unwrap()
    }

    #[test]
    fn pauli_seed_rank() {
        let d = pauli3();
        assert_eq!(d.dim_e32(), 4);
        // independent rank oracle on the projector
        assert_eq!(numerical_rank(&d.p32, 1e-10).rank, 4);
        let r = d.identity_residuals();
        assert!(r.gamma_iota < 1e-12 && r.iota_adjoint < 1e-12);
    }

    #[test]
    fn rejects_low_dimension_and_non_dirac() {
        let two = dirac_seed(2);
        assert!(matches!(build_rs(&two, &Metric::euclidean(2)), Err(Error::Config(_))));
        let bad = LinearSymbol::new(vec![identity(2), identity(2), identity(2)]).unwrap();
        match build_rs(&bad, &Metric::euclidean(3)) {
            Err(Error::NotDiracType { i, j, .. }) => assert!(i < j),
            other => panic!("expected NotDiracType, got {other:?}"),
        }
    }

    #[test]
    fn zero_covector_gives_zero_symbol() {
        let d = pauli3();
        let ev = rs_symbol(&d, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(max_abs(&ev.matrix), 0.0);
        assert!(decompose_along_xi(&d, &[0.0, 0.0, 0.0]).is_err());
    }

    fn assert_spectrum(eigs: &[f64], expected: [(f64, usize); 2], tol: f64) {
        let mut counts = [0usize; 2];
        for &e in eigs {
            let hit = expected.iter().position(|(v, _)| (e - v).abs() < tol);
            counts[hit.unwrap_or_else(|| panic!("eigenvalue {e} not in {expected:?}"))] += 1;
        }
        assert_eq!(counts, [expected[0].1, expected[1].1]);
    }

    #[test]
    fn n3_unit_covector_spectrum() {
        let d = pauli3();
        let xi = [0.6, 0.0, 0.8];
        let ev = rs_symbol(&d, &xi).unwrap();
        assert_eq!(ev.matrix.shape(), (4, 4));
        assert_spectrum(&ev.gram_eigs, [(1.0, 2), (1.0 / 9.0, 2)], 1e-10);
    }

    #[test]
    fn n4_spectrum_at_radius_two() {
        let s = dirac_seed(4);
        let d = build_rs(&s, &Metric::euclidean(4)).unwrap();
        let xi = [1.0, -1.0, 1.0, 1.0];
        let ev = rs_symbol(&d, &xi).unwrap();
        assert_spectrum(&ev.gram_eigs, expected_gram_spectrum(4, 4, 4.0), 1e-10);
    }

    #[test]
    fn decomposition_blocks_diagonalise_gram() {
        let d = build_rs(&dirac_seed(5), &Metric::euclidean(5)).unwrap();
        let xi = [0.3, -1.2, 0.5, 0.0, 2.0];
        let nsq: f64 = xi.iter().map(|x| x * x).sum();
        let dec = decompose_along_xi(&d, &xi).unwrap();
        assert_eq!(dec.complement.ncols(), d.m);
        assert_eq!(dec.annihilated.ncols(), 3 * d.m);
        assert!(max_abs(&(dec.annihilated.adjoint() * &dec.complement)) < 1e-12);
        assert!(max_abs(&contract_columns(&d, &xi, &dec.annihilated).unwrap()) < 1e-12);

        // sigma^* sigma in ambient coordinates: B^* S^* S B with S the ambient map on E^{3/2}
        let amb = d.symbol_ambient(&xi).unwrap();
        let to_basis = |v: &CMat| d.basis32.adjoint() * v;
        let gram = amb.adjoint() * &amb;
        let a = to_basis(&dec.annihilated);
        let c = to_basis(&dec.complement);
        assert!(max_abs(&(&gram * &a - &a * re(nsq))) < 1e-10);
        let small = ((5.0 - 2.0) / 5.0_f64).powi(2) * nsq;
        assert!(max_abs(&(&gram * &c - &c * re(small))) < 1e-10);
        // together they span E^{3/2}
        let both = crate::linalg::hcat(&[&dec.annihilated, &dec.complement]);
        assert!(max_abs(&(orth_projector(&both, 1e-10) - &d.p32)) < 1e-10);
    }

    #[test]
    fn output_lies_in_f32() {
        let d = pauli3();
        let amb = d.symbol_ambient(&[0.2, 0.7, -0.4]).unwrap();
        assert!(max_abs(&(&d.gamma_tilde * amb)) < 1e-12);
    }

    #[test]
    fn rs_symbol_is_elliptic_not_dirac_with_unit_bound() {
        let d = pauli3();
        let s = d.as_linear_symbol().unwrap();
        let g = Metric::euclidean(3);
        let rep = check_ellipticity(&s, &g, 2048, s.default_tolerance()).unwrap();
        assert!(rep.elliptic);
        assert!((rep.min_sv - 1.0 / 3.0).abs() < 1e-9);
        assert!(!check_dirac_type(&s, &g, 1e-10).unwrap());
        let c = operator_norm_bound(&s, &g, 2048).unwrap();
        assert!((c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn general_metric_is_orthonormalised() {
        let gram = RMat::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let g = Metric::new(gram.clone()).unwrap();
        // a Dirac symbol for g: sigma_i = sum_a L_ia gamma_a with G = L L^T
        let l = gram.cholesky().unwrap().l();
        let gam = pauli();
        let coeffs = (0..3)
            .map(|i| (0..3).fold(CMat::zeros(2, 2), |acc, a| acc + &gam[a] * re(l[(i, a)])))
            .collect();
        let s = LinearSymbol::new(coeffs).unwrap();
        assert!(check_dirac_type(&s, &g, 1e-12).unwrap());
        let d = build_rs(&s, &g).unwrap();
        let xi = [0.4, -0.9, 0.25];
        let nsq = g.norm(&xi).powi(2);
        let ev = rs_symbol(&d, &xi).unwrap();
        assert_spectrum(&ev.gram_eigs, expected_gram_spectrum(3, 2, nsq), 1e-10);
    }
}
