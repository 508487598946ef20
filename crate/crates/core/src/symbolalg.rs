//! Linear matrix-valued principal symbols and the pointwise symbol checks:
//! ellipticity, the Clifford relations and the operator-norm bound
//! `|sigma(xi)| <= C |xi|_g`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::linalg::{identity, max_abs, op_norm, re, singular_values, CMat, RMat};
use crate::par_map;

/// Default number of sphere samples for ellipticity and norm checks.
pub const DEFAULT_SPHERE_SAMPLES: usize = 2048;

/// Inner product on covectors: `|xi|_g^2 = xi^T G xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    gram: RMat,
    /// Lower Cholesky factor `L` with `G = L L^T`.
    chol: RMat,
}

impl Metric {
    pub fn new(gram: RMat) -> Result<Self> {
        let n = gram.nrows();
        if !gram.is_square() || n < 2 {
            return Err(config(format!("metric must be square with dimension >= 2, got {}x{}", gram.nrows(), gram.ncols())));
        }
        let asym = (&gram - gram.transpose()).amax();
        if asym > 1e-12 {
            return Err(config(format!("metric is not symmetric (deviation {asym:.3e})")));
        }
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| config("metric is not positive definite"))?
            .l();
        Ok(Self { gram, chol })
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(RMat::identity(n, n)).expect("identity is a metric")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &RMat {
        &self.gram
    }

    pub fn is_euclidean(&self, tol: f64) -> bool {
        (&self.gram - RMat::identity(self.dim(), self.dim())).amax() <= tol
    }

    pub fn inner(&self, xi: &[f64], eta: &[f64]) -> f64 {
        let a = DVector::from_column_slice(xi);
        let b = DVector::from_column_slice(eta);
        a.dot(&(&self.gram * b))
    }

    pub fn norm(&self, xi: &[f64]) -> f64 {
        self.inner(xi, xi).max(0.0).sqrt()
    }

    /// Maps a Euclidean unit vector `u` to a `g`-unit covector `L^{-T} u`.
    pub fn unit_from_euclidean(&self, u: &[f64]) -> Vec<f64> {
        let ut = DVector::from_column_slice(u);
        let xi = self
            .chol
            .transpose()
            .solve_upper_triangular(&ut)
            .expect("Cholesky factor is invertible");
        xi.iter().copied().collect()
    }

    /// Deterministic samples of the `g`-unit sphere.
    pub fn unit_sphere(&self, count: usize) -> Vec<Vec<f64>> {
        sphere_grid(self.dim(), count)
            .iter()
            .map(|u| self.unit_from_euclidean(u))
            .collect()
    }
}

/// Deterministic, low-discrepancy points on the Euclidean unit sphere in R^n:
/// equally spaced angles for n = 2, a Fibonacci lattice for n = 3 and a
/// Kronecker (golden-ratio generalisation) sequence pushed through
/// Box-Muller for n >= 4.
pub fn sphere_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match n {
        0 | 1 => Vec::new(),
        2 => (0..count)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5.0_f64.sqrt());
            (0..count)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * j as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let pairs = n.div_ceil(2);
            let dims = 2 * pairs;
            // root of x^(d+1) = x + 1
            let mut phi = 2.0_f64;
            for _ in 0..64 {
                phi = (1.0 + phi).powf(1.0 / (dims as f64 + 1.0));
            }
            let alpha: Vec<f64> = (1..=dims).map(|k| (1.0 / phi.powi(k as i32)).fract()).collect();
            (0..count)
                .map(|j| {
                    let mut g = Vec::with_capacity(dims);
                    for p in 0..pairs {
                        let u1 = (0.5 + alpha[2 * p] * (j + 1) as f64).fract().max(1e-300);
                        let u2 = (0.5 + alpha[2 * p + 1] * (j + 1) as f64).fract();
                        let r = (-2.0 * u1.ln()).sqrt();
                        g.push(r * (2.0 * PI * u2).cos());
                        g.push(r * (2.0 * PI * u2).sin());
                    }
                    g.truncate(n);
                    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    g.iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

/// `sigma(xi) = sum_i xi_i sigma_i` with coefficient matrices of shape
/// `rank(F) x rank(E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSymbol {
    coeffs: Vec<CMat>,
}

impl LinearSymbol {
    pub fn new(coeffs: Vec<CMat>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(config(format!("symbol needs at least 2 coefficient matrices, got {}", coeffs.len())));
        }
        let shape = coeffs[0].shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(config("symbol coefficient matrices must be non-empty"));
        }
        if let Some((i, m)) = coeffs.iter().enumerate().find(|(_, m)| m.shape() != shape) {
            return Err(config(format!(
                "coefficient {i} has shape {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                shape.0,
                shape.1
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn rank_e(&self) -> usize {
        self.coeffs[0].ncols()
    }

    pub fn rank_f(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn is_square(&self) -> bool {
        self.rank_e() == self.rank_f()
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|m| m * re(factor)).collect() }
    }

    pub fn evaluate(&self, xi: &[f64]) -> Result<CMat> {
        if xi.len() != self.dim() {
            return Err(config(format!("covector has length {}, symbol dimension is {}", xi.len(), self.dim())));
        }
        let mut out = CMat::zeros(self.rank_f(), self.rank_e());
        for (x, m) in xi.iter().zip(&self.coeffs) {
            if *x != 0.0 {
                out += m * re(*x);
            }
        }
        Ok(out)
    }

    /// Adjoint symbol `xi -> sigma(xi)^*`.
    pub fn adjoint(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|m| m.adjoint()).collect() }
    }

    /// Default singular-value tolerance: `1e-9` times the largest
    /// coefficient norm.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * self.coeffs.iter().map(op_norm).fold(0.0, f64::max)
    }

    fn check_metric(&self, metric: &Metric) -> Result<()> {
        if metric.dim() != self.dim() {
            return Err(config(format!("metric dimension {} does not match symbol dimension {}", metric.dim(), self.dim())));
        }
        Ok(())
    }

    /// Worst Clifford-relation violation over pairs `i <= j`:
    /// `sigma_i^* sigma_j + sigma_j^* sigma_i - 2 g_ij id`.
    pub fn clifford_defect(&self, metric: &Metric) -> Result<(usize, usize, f64)> {
        self.check_metric(metric)?;
        if !self.is_square() {
            return Err(config("Clifford relations need a square symbol"));
        }
        let id = identity(self.rank_e());
        let mut worst = (0, 0, 0.0);
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let a = &self.coeffs[i];
                let b = &self.coeffs[j];
                let lhs = a.adjoint() * b + b.adjoint() * a;
                let dev = max_abs(&(lhs - &id * re(2.0 * metric.gram()[(i, j)])));
                if dev > worst.2 {
                    worst = (i, j, dev);
                }
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub elliptic: bool,
    pub dirac_type: bool,
    pub square: bool,
    pub norm_bound_c: f64,
    pub witness_xi: Vec<f64>,
    pub min_sv: f64,
    pub samples: usize,
    pub tol: f64,
}

pub fn evaluate(symbol: &LinearSymbol, xi: &[f64]) -> Result<CMat> {
    symbol.evaluate(xi)
}

/// (min singular value, max singular value) per sample, in sample order.
fn sample_extremes(symbol: &LinearSymbol, samples: &[Vec<f64>]) -> Vec<(f64, f64)> {
    par_map(samples, |xi| {
        let sv = singular_values(&symbol.evaluate(xi).expect("sample has symbol dimension"));
        (sv.last().copied().unwrap_or(0.0), sv.first().copied().unwrap_or(0.0))
    })
}

pub fn check_ellipticity(symbol: &LinearSymbol, metric: &Metric, sphere_samples: usize, tol: f64) -> Result<SymbolReport> {
    symbol.check_metric(metric)?;
    if sphere_samples == 0 {
        return Err(config("sphere_samples must be positive"));
    }
    if !(tol > 0.0) {
        return Err(config("tolerance must be positive"));
    }
    let samples = metric.unit_sphere(sphere_samples);
    let ext = sample_extremes(symbol, &samples);
    let mut min_idx = 0;
    let mut c = 0.0_f64;
    for (i, &(lo, hi)) in ext.iter().enumerate() {
        if lo < ext[min_idx].0 {
            min_idx = i;
        }
        c = c.max(hi);
    }
    let square = symbol.is_square();
    let min_sv = ext[min_idx].0;
    let dirac_type = square && check_dirac_type(symbol, metric, tol.max(1e-10))?;
    Ok(SymbolReport {
        elliptic: square && min_sv > tol,
        dirac_type,
        square,
        norm_bound_c: c,
        witness_xi: samples[min_idx].clone(),
        min_sv,
        samples: sphere_samples,
        tol,
    })
}

pub fn check_dirac_type(symbol: &LinearSymbol, metric: &Metric, tol: f64) -> Result<bool> {
    if !symbol.is_square() {
        return Ok(false);
    }
    Ok(symbol.clifford_defect(metric)?.2 <= tol)
}

/// Smallest sampled `C` with `|sigma(xi)| <= C |xi|_g`.
pub fn operator_norm_bound(symbol: &LinearSymbol, metric: &Metric, sphere_samples: usize) -> Result<f64> {
    symbol.check_metric(metric)?;
    if sphere_samples == 0 {
        return Err(config("sphere_samples must be positive"));
    }
    let samples = metric.unit_sphere(sphere_samples);
    Ok(sample_extremes(symbol, &samples).iter().fold(0.0, |c, &(_, hi)| c.max(hi)))
}

/// Rejects symbols whose Clifford defect exceeds `tol`, naming the pair.
pub fn require_dirac_type(symbol: &LinearSymbol, metric: &Metric, tol: f64) -> Result<()> {
    let (i, j, deviation) = symbol.clifford_defect(metric)?;
    if deviation > tol {
        return Err(Error::NotDiracType { i, j, deviation });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::pauli_symbol;
    use crate::linalg::c;

    #[test]
    fn pauli_basis_covector() {
        let s = pauli_symbol();
        let m = s.evaluate(&[1.0, 0.0]).unwrap();
        assert_eq!(m, CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]));
        assert_eq!(s.evaluate(&[0.0, 0.0]).unwrap(), CMat::zeros(2, 2));
    }

    #[test]
    fn pauli_three_four() {
        let s = pauli_symbol();
        let m = s.evaluate(&[3.0, 4.0]).unwrap();
        // 3 sigma_x + 4 sigma_y
        let expect = CMat::from_row_slice(2, 2, &[re(0.0), c(3.0, -4.0), c(3.0, 4.0), re(0.0)]);
        assert!(max_abs(&(&m - expect)) < 1e-15);
        let sv = singular_values(&m);
        assert!((sv[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        assert!(matches!(pauli_symbol().evaluate(&[1.0]), Err(Error::Config(_))));
    }

    #[test]
    fn pauli_is_elliptic_dirac_with_unit_bound() {
        let s = pauli_symbol();
        let g = Metric::euclidean(2);
        let rep = check_ellipticity(&s, &g, DEFAULT_SPHERE_SAMPLES, s.default_tolerance()).unwrap();
        assert!(rep.elliptic && rep.dirac_type);
        assert!((rep.min_sv - 1.0).abs() < 1e-12);
        assert!((rep.norm_bound_c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_pair_is_degenerate() {
        let s = LinearSymbol::new(vec![identity(2), identity(2)]).unwrap();
        let g = Metric::euclidean(2);
        let rep = check_ellipticity(&s, &g, DEFAULT_SPHERE_SAMPLES, s.default_tolerance()).unwrap();
        assert!(!rep.elliptic);
        assert!(rep.min_sv < 1e-12);
        // witness is the kernel direction (1,-1)/sqrt 2 up to sign
        assert!((rep.witness_xi[0] + rep.witness_xi[1]).abs() < 1e-12);
        assert!(!check_dirac_type(&s, &g, 1e-10).unwrap());
        let (_, _, dev) = s.clifford_defect(&g).unwrap();
        assert!((dev - 2.0).abs() < 1e-15);
    }

    #[test]
    fn non_square_symbol_is_not_elliptic() {
        let a = CMat::from_row_slice(2, 1, &[re(1.0), re(0.0)]);
        let b = CMat::from_row_slice(2, 1, &[re(0.0), re(1.0)]);
        let s = LinearSymbol::new(vec![a, b]).unwrap();
        let rep = check_ellipticity(&s, &Metric::euclidean(2), 64, 1e-9).unwrap();
        assert!(!rep.square && !rep.elliptic && !rep.dirac_type);
    }

    #[test]
    fn zero_samples_rejected() {
        let s = pauli_symbol();
        assert!(check_ellipticity(&s, &Metric::euclidean(2), 0, 1e-9).is_err());
        assert!(operator_norm_bound(&s, &Metric::euclidean(2), 0).is_err());
    }

    #[test]
    fn scaling_doubles_norm_bound() {
        let s = pauli_symbol();
        let g = Metric::euclidean(2);
        let c1 = operator_norm_bound(&s, &g, 256).unwrap();
        let c2 = operator_norm_bound(&s.scaled(2.0), &g, 256).unwrap();
        assert!((c2 - 2.0 * c1).abs() < 1e-12);
    }

    #[test]
    fn non_euclidean_metric_unit_sphere() {
        let gram = RMat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let g = Metric::new(gram).unwrap();
        for xi in g.unit_sphere(37) {
            assert!((g.norm(&xi) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_rejections() {
        assert!(Metric::new(RMat::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0])).is_err());
        assert!(Metric::new(RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(Metric::new(RMat::identity(1, 1)).is_err());
    }

    #[test]
    fn sphere_grids_are_unit() {
        for n in 2..=7 {
            let pts = sphere_grid(n, 100);
            assert_eq!(pts.len(), 100);
            for p in pts {
                assert_eq!(p.len(), n);
                let r: f64 = p.iter().map(|x| x * x).sum();
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }
}
