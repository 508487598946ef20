//! Local and pseudo-local conditions, the Lopatinsky-Schapiro test and the
//! local interchange condition.

use serde::Serialize;

use super::SUBSPACE_TOL;
use crate::adapted::spectral_projectors;
use crate::error::{config, Result};
use crate::linalg::{c, identity, is_hermitian, max_abs, numerical_rank, range_basis, singular_values, CMat};

/// Local condition `B = range Q` for a fixed orthogonal projector `Q`.
#[derive(Debug, Clone)]
pub struct LocalBC {
    pub projector: CMat,
}

fn check_orthogonal_projector(q: &CMat) -> Result<()> {
    if !q.is_square() {
        return Err(config("projector must be square"));
    }
    let scale = max_abs(q).max(1.0);
    if !is_hermitian(q, 1e-10 * scale) || max_abs(&(q * q - q)) > 1e-10 * scale {
        return Err(config("matrix is not an orthogonal projector"));
    }
    Ok(())
}

impl LocalBC {
    pub fn new(projector: CMat) -> Result<Self> {
        check_orthogonal_projector(&projector)?;
        Ok(Self { projector })
    }

    pub fn subspace(&self) -> CMat {
        range_basis(&self.projector, SUBSPACE_TOL)
    }
}

/// Mode-wise projector family `P_k` (not necessarily orthogonal).
#[derive(Debug, Clone)]
pub struct PseudoLocalBC {
    pub cutoff: usize,
    pub blocks: Vec<CMat>,
}

impl PseudoLocalBC {
    pub fn new(cutoff: usize, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != 2 * cutoff + 1 {
            return Err(config(format!("expected {} mode blocks, got {}", 2 * cutoff + 1, blocks.len())));
        }
        let r = blocks[0].nrows();
        for (i, p) in blocks.iter().enumerate() {
            if p.shape() != (r, r) {
                return Err(config(format!("mode block {i} is not {r}x{r}")));
            }
            if max_abs(&(p * p - p)) > 1e-10 * max_abs(p).max(1.0) {
                return Err(config(format!("mode block {i} is not idempotent")));
            }
        }
        Ok(Self { cutoff, blocks })
    }

    pub fn from_fn(cutoff: usize, f: impl Fn(i64) -> CMat) -> Result<Self> {
        Self::new(cutoff, (-(cutoff as i64)..=cutoff as i64).map(f).collect())
    }

    pub fn subspace(&self, k: i64) -> Result<CMat> {
        let idx = k + self.cutoff as i64;
        if idx < 0 || idx as usize >= self.blocks.len() {
            return Err(config(format!("mode {k} outside cutoff {}", self.cutoff)));
        }
        Ok(range_basis(&self.blocks[idx as usize], SUBSPACE_TOL))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsFailure {
    /// `dim N(xi) != rank P(xi)`.
    DimensionMismatch,
    /// `P(xi)` is not injective on `N(xi)`.
    NotInjective,
}

#[derive(Debug, Clone, Serialize)]
pub struct LsWitness {
    pub xi: Vec<f64>,
    /// `"P"` or `"P*"`.
    pub operator: &'static str,
    pub dim_negative: usize,
    pub rank_p: usize,
    pub min_sv: f64,
    pub failure: LsFailure,
}

#[derive(Debug, Clone, Serialize)]
pub struct LsReport {
    pub passed: bool,
    pub samples: usize,
    /// Smallest relative singular value of `P` restricted to `N` seen.
    pub worst_margin: f64,
    pub witnesses: Vec<LsWitness>,
}

/// Lopatinsky-Schapiro test at each sample: with
/// `N(xi) = range chi_-(i sigma_A(xi))`, `P(xi)` must map `N(xi)`
/// isomorphically onto `range P(xi)`; likewise `P(xi)^*` on the space built
/// from `sigma_A(xi)^*`.
pub fn ls_check(
    p: impl Fn(&[f64]) -> CMat,
    sigma_a: impl Fn(&[f64]) -> CMat,
    xi_samples: &[Vec<f64>],
    tol: f64,
) -> Result<LsReport> {
    let mut witnesses = Vec::new();
    let mut worst = f64::INFINITY;
    for xi in xi_samples {
        let pm = p(xi);
        let sa = sigma_a(xi);
        if !pm.is_square() || pm.shape() != sa.shape() {
            return Err(config("P and sigma_A must be square of equal size"));
        }
        for (name, proj, sym) in [("P", pm.clone(), sa.clone()), ("P*", pm.adjoint(), sa.adjoint())] {
            let m = sym * c(0.0, 1.0);
            let split = spectral_projectors(&m, crate::adapted::DEFAULT_REALPART_TOL)?;
            let n = split.minus_range();
            let rank_p = numerical_rank(&proj, 1e-10).rank;
            let dim_negative = n.ncols();
            let restricted = &proj * &n;
            let min_sv = if dim_negative == 0 {
                f64::INFINITY
            } else {
                singular_values(&restricted).last().copied().unwrap_or(0.0) / max_abs(&proj).max(1e-300)
            };
            worst = worst.min(min_sv);
            let failure = if dim_negative != rank_p {
                Some(LsFailure::DimensionMismatch)
            } else if min_sv <= tol {
                Some(LsFailure::NotInjective)
            } else {
                None
            };
            if let Some(failure) = failure {
                witnesses.push(LsWitness { xi: xi.clone(), operator: name, dim_negative, rank_p, min_sv, failure });
            }
        }
    }
    Ok(LsReport { passed: witnesses.is_empty(), samples: xi_samples.len(), worst_margin: worst, witnesses })
}

#[derive(Debug, Clone, Serialize)]
pub struct InterchangeReport {
    pub passed: bool,
    /// Worst of `|Q s Q|` and `|(1-Q) s (1-Q)|` over the samples.
    pub max_defect: f64,
}

/// Checks that `sigma_A(xi)` maps `range Q` into `range(1-Q)` and back.
pub fn local_interchange_check(
    q: &CMat,
    sigma_a: impl Fn(&[f64]) -> CMat,
    xi_samples: &[Vec<f64>],
    tol: f64,
) -> Result<InterchangeReport> {
    check_orthogonal_projector(q)?;
    let comp = identity(q.nrows()) - q;
    let mut worst = 0.0_f64;
    for xi in xi_samples {
        let s = sigma_a(xi);
        if s.shape() != q.shape() {
            return Err(config("sigma_A and Q differ in size"));
        }
        let scale = max_abs(&s).max(1e-300);
        worst = worst.max(max_abs(&(q * &s * q)) / scale).max(max_abs(&(&comp * &s * &comp)) / scale);
    }
    Ok(InterchangeReport { passed: worst <= tol, max_defect: worst })
}
