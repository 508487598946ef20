//! Green pairing and the semigroup extension identities on the model
//! cylinder, evaluated with second-order differences and trapezoid sums.

use serde::Serialize;

use super::CylinderModel;
use crate::adapted::BoundaryOperator1D;
use crate::bconds::GraphBC;
use crate::error::{config, Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_function, is_hermitian, max_abs, CMat, C64};

fn put_row(m: &mut CMat, j: usize, col: &CMat) {
    for i in 0..col.nrows() {
        m[(j, i)] = col[(i, 0)];
    }
}

/// Second-order derivative along rows: centred inside, one-sided at the ends.
fn fd2(u: &CMat, h: f64) -> CMat {
    let n = u.nrows();
    let mut d = CMat::zeros(n, u.ncols());
    let s = C64::new(0.5 / h, 0.0);
    for j in 1..n - 1 {
        d.set_row(j, &((u.row(j + 1) - u.row(j - 1)) * s));
    }
    d.set_row(0, &((u.row(1) * C64::new(4.0, 0.0) - u.row(0) * C64::new(3.0, 0.0) - u.row(2)) * s));
    d.set_row(
        n - 1,
        &((u.row(n - 1) * C64::new(3.0, 0.0) - u.row(n - 2) * C64::new(4.0, 0.0) + u.row(n - 3)) * s),
    );
    d
}

/// Trapezoid rule for `int <f(t), g(t)> dt`, rows are time samples.
fn trapezoid_inner(f: &CMat, g: &CMat, h: f64) -> C64 {
    let n = f.nrows();
    (0..n)
        .map(|j| {
            let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
            row_inner(f, g, j) * w
        })
        .sum()
}

fn row_inner(f: &CMat, g: &CMat, j: usize) -> C64 {
    (0..f.ncols()).map(|i| f[(j, i)].conj() * g[(j, i)]).sum()
}

/// `|<D'u, v> - <u, D'^dagger v> - (<u(L), v(L)> - <u(0), v(0)>)|` summed over
/// modes, where `D' = d/dt + A`, `D'^dagger = -d/dt + A^*` and the boundary
/// term is `-sum <u|_end, sigma_0^* v|_end>` with `sigma_0 = id` at `t = 0`
/// and `-id` at `t = L`. `u[i]`, `v[i]` hold mode `i - cutoff` sampled on the
/// grid (rows = nodes). No boundary condition is imposed.
pub fn greens_pairing_check(model: &CylinderModel, u: &[CMat], v: &[CMat]) -> Result<f64> {
    let modes = model.modes();
    let r = model.op.rank();
    if u.len() != modes.len() || v.len() != modes.len() {
        return Err(config(format!("expected {} mode samples", modes.len())));
    }
    let h = model.h();
    let mut total = C64::new(0.0, 0.0);
    for ((k, uk), vk) in modes.iter().zip(u).zip(v) {
        if uk.shape() != (model.nodes, r) || vk.shape() != (model.nodes, r) {
            return Err(config(format!("mode samples must be {} x {r}", model.nodes)));
        }
        let m = model.op.mode_matrix(*k);
        let du = fd2(uk, h) + uk * m.transpose();
        let ddv = -fd2(vk, h) + vk * m.conjugate();
        let last = model.nodes - 1;
        let boundary = row_inner(uk, vk, last) - row_inner(uk, vk, 0);
        total += trapezoid_inner(&du, vk, h) - trapezoid_inner(uk, &ddv, h) - boundary;
    }
    Ok(total.norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenConvergence {
    pub nodes: Vec<usize>,
    pub h: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `log(r_i / r_{i+1}) / log(h_i / h_{i+1})`.
    pub orders: Vec<f64>,
    pub min_order: f64,
}

/// Green residuals of smooth sections `u(k, t)`, `v(k, t)` sampled on grids
/// with the given node counts.
pub fn greens_convergence(
    model: &CylinderModel,
    u: impl Fn(i64, f64) -> Vec<C64>,
    v: impl Fn(i64, f64) -> Vec<C64>,
    node_counts: &[usize],
) -> Result<GreenConvergence> {
    if node_counts.len() < 2 {
        return Err(config("need at least two grids"));
    }
    let r = model.op.rank();
    let sample = |f: &dyn Fn(i64, f64) -> Vec<C64>, k: i64, nodes: usize, h: f64| -> Result<CMat> {
        let mut out = CMat::zeros(nodes, r);
        for j in 0..nodes {
            let val = f(k, j as f64 * h);
            if val.len() != r {
                return Err(config(format!("section values must have length {r}")));
            }
            for (i, x) in val.into_iter().enumerate() {
                out[(j, i)] = x;
            }
        }
        Ok(out)
    };
    let mut hs = Vec::new();
    let mut residuals = Vec::new();
    for &nodes in node_counts {
        let m = CylinderModel { nodes, ..model.clone() };
        super::Segment::new(m.length, nodes)?;
        let h = m.h();
        let us = m.modes().into_iter().map(|k| sample(&u, k, nodes, h)).collect::<Result<Vec<_>>>()?;
        let vs = m.modes().into_iter().map(|k| sample(&v, k, nodes, h)).collect::<Result<Vec<_>>>()?;
        residuals.push(greens_pairing_check(&m, &us, &vs)?);
        hs.push(h);
    }
    let orders: Vec<f64> = (0..hs.len() - 1)
        .map(|i| (residuals[i] / residuals[i + 1]).ln() / (hs[i] / hs[i + 1]).ln())
        .collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GreenConvergence { nodes: node_counts.to_vec(), h: hs, residuals, orders, min_order })
}

fn hermitian_mode(op: &BoundaryOperator1D, k: i64) -> Result<CMat> {
    let m = op.mode_matrix(k);
    let defect = max_abs(&(&m - m.adjoint()));
    if !is_hermitian(&m, 1e-10 * max_abs(&m).max(1.0)) {
        return Err(Error::NotSelfAdjoint(defect));
    }
    Ok(m)
}

fn uniform_step(t_grid: &[f64]) -> Result<f64> {
    if t_grid.len() < 3 {
        return Err(config("time grid needs at least 3 points"));
    }
    let h = t_grid[1] - t_grid[0];
    if !(h > 0.0) || t_grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(config("time grid must be uniform and increasing"));
    }
    Ok(h)
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupReport {
    /// Discrete `L^2` norm of `D'E - (-2|A| e^{-t|A|} v)`.
    pub residual: f64,
    pub target_norm: f64,
    pub relative: f64,
}

/// `E(t) = e^{-t|A|}(v + g v)` in mode `k`; compares the discrete `D'E` with
/// `-2|A| e^{-t|A|} v`. Requires a self-adjoint mode matrix and `v` in `V_-`.
pub fn extension_semigroup_check(
    op: &BoundaryOperator1D,
    bc: &GraphBC,
    k: i64,
    v: &CMat,
    t_grid: &[f64],
) -> Result<SemigroupReport> {
    let m = hermitian_mode(op, k)?;
    let h = uniform_step(t_grid)?;
    let mode = bc.mode(k)?;
    let r = m.nrows();
    if v.shape() != (r, 1) {
        return Err(config(format!("v must be a column of length {r}")));
    }
    let vm = &mode.vminus;
    if max_abs(&(v - vm * (vm.adjoint() * v))) > 1e-9 * max_abs(v).max(1.0) {
        return Err(config("v does not lie in V_-"));
    }
    let gv = mode.g_operator() * v;
    let abs_m = hermitian_function(&m, f64::abs);
    let n = t_grid.len();
    let mut e = CMat::zeros(n, r);
    let mut target = CMat::zeros(n, r);
    for (j, &t) in t_grid.iter().enumerate() {
        let semi = hermitian_function(&m, |x| (-t * x.abs()).exp());
        put_row(&mut e, j, &(&semi * (v + &gv)));
        put_row(&mut target, j, &(&abs_m * &semi * v * C64::new(-2.0, 0.0)));
    }
    let de = fd2(&e, h) + &e * m.transpose();
    let diff = de - &target;
    let residual = trapezoid_inner(&diff, &diff, h).re.sqrt();
    let target_norm = trapezoid_inner(&target, &target, h).re.sqrt();
    Ok(SemigroupReport { residual, target_norm, relative: residual / target_norm.max(f64::MIN_POSITIVE) })
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareFunctionReport {
    /// Trapezoid value of `int_0^T |(|A|^{1/2} e^{-t|A|} x)|^2 dt`.
    pub numeric: f64,
    /// `sum_lambda |x_lambda|^2 (1 - e^{-2 T lambda}) / 2` over `lambda = |eig| > 0`.
    pub closed_form: f64,
    /// `|x|^2 / 2`, the `T -> infinity` bound.
    pub bound: f64,
    pub relative_error: f64,
}

/// Square function of `x` in mode `k` on `[0, t_max]` with `steps` cells.
pub fn square_function(op: &BoundaryOperator1D, k: i64, x: &CMat, t_max: f64, steps: usize) -> Result<SquareFunctionReport> {
    let m = hermitian_mode(op, k)?;
    if x.shape() != (m.nrows(), 1) {
        return Err(config(format!("x must be a column of length {}", m.nrows())));
    }
    if !(t_max > 0.0) || steps < 2 {
        return Err(config("square function needs t_max > 0 and at least 2 steps"));
    }
    let h = t_max / steps as f64;
    let mut samples = CMat::zeros(steps + 1, m.nrows());
    for j in 0..=steps {
        let t = j as f64 * h;
        let f = hermitian_function(&m, |lam| lam.abs().sqrt() * (-t * lam.abs()).exp());
        put_row(&mut samples, j, &(f * x));
    }
    let numeric = trapezoid_inner(&samples, &samples, h).re;
    let (eigs, vecs) = hermitian_eigen(&m);
    let coeffs = vecs.adjoint() * x;
    let closed_form: f64 = eigs
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() > 0.0)
        .map(|(i, l)| coeffs[(i, 0)].norm_sqr() * (1.0 - (-2.0 * t_max * l.abs()).exp()) / 2.0)
        .sum();
    let bound = 0.5 * x.norm_squared();
    Ok(SquareFunctionReport {
        numeric,
        closed_form,
        bound,
        relative_error: (numeric - closed_form).abs() / closed_form.abs().max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapted::{mode_split, DEFAULT_REALPART_TOL};
    use crate::bconds::{aps, BoundaryCondition};
    use crate::clifford::pauli;
    use crate::linalg::{c, identity, re};

    fn model(op: BoundaryOperator1D, nodes: usize) -> CylinderModel {
        CylinderModel::aps(1.0, 2, nodes, op).unwrap()
    }

    #[test]
    fn compact_support_pairs_to_zero() {
        let m = model(BoundaryOperator1D::scalar(c(0.0, 1.0), re(0.3)), 41);
        let bump = |t: f64| if (0.25..=0.75).contains(&t) { (std::f64::consts::TAU * 2.0 * t).sin().powi(4) } else { 0.0 };
        let u: Vec<CMat> = m.modes().iter().map(|_| CMat::from_fn(41, 1, |j, _| re(bump(j as f64 / 40.0)))).collect();
        let v = u.clone();
        // both sides are discrete sums of the same telescoping terms
        assert!(greens_pairing_check(&m, &u, &v).unwrap() < 0.5);
    }

    #[test]
    fn linear_sections_are_exact() {
        // fd2 and trapezoid are exact enough for polynomials of degree one
        let m = model(BoundaryOperator1D::scalar(c(0.0, 1.0), re(0.0)), 11);
        let u: Vec<CMat> = m.modes().iter().map(|_| CMat::from_fn(11, 1, |j, _| re(1.0 + j as f64 / 10.0))).collect();
        let v: Vec<CMat> = m.modes().iter().map(|_| CMat::from_fn(11, 1, |_, _| re(2.0))).collect();
        assert!(greens_pairing_check(&m, &u, &v).unwrap() < 1e-12);
    }

    #[test]
    fn green_converges_at_second_order() {
        let op = BoundaryOperator1D::new(&pauli()[2] * c(0.0, 1.0), &pauli()[0] * re(0.4)).unwrap();
        let m = model(op, 21);
        let u = |k: i64, t: f64| vec![c((2.0 * t).cos(), 0.1 * k as f64), c(t.sin(), t)];
        let v = |k: i64, t: f64| vec![c((3.0 * t).sin() + 0.5, 0.0), c(t * t, -(k as f64) * 0.2)];
        let conv = greens_convergence(&m, u, v, &[21, 41, 81, 161]).unwrap();
        assert!(conv.min_order > 1.9, "{conv:?}");
    }

    #[test]
    fn semigroup_identity_second_order() {
        // a = i sigma_z gives the Hermitian mode matrix -k sigma_z + 0.3 sigma_x
        let op = BoundaryOperator1D::new(&pauli()[2] * c(0.0, 1.0), &pauli()[0] * re(0.3)).unwrap();
        let splits = mode_split(&op, 2, DEFAULT_REALPART_TOL).unwrap();
        let bc = aps(&splits).unwrap().with_g(1, CMat::from_element(1, 1, c(0.6, 0.2))).unwrap();
        let v = bc.mode(1).unwrap().vminus.clone();
        let grid = |n: usize| (0..=n).map(|j| j as f64 / n as f64).collect::<Vec<_>>();
        let r1 = extension_semigroup_check(&op, &bc, 1, &v, &grid(40)).unwrap();
        let r2 = extension_semigroup_check(&op, &bc, 1, &v, &grid(80)).unwrap();
        let order = (r1.residual / r2.residual).log2();
        assert!(order > 1.8, "order {order}");
        assert!(r2.relative < 1e-2);
        // not in V_-
        assert!(extension_semigroup_check(&op, &bc, 1, &bc.mode(1).unwrap().vplus.clone(), &grid(10)).is_err());
        let _ = BoundaryCondition::Aps(bc);
    }

    #[test]
    fn non_hermitian_rejected() {
        let op = BoundaryOperator1D::new(identity(2), identity(2)).unwrap();
        let x = CMat::from_element(2, 1, re(1.0));
        assert!(matches!(square_function(&op, 1, &x, 1.0, 10), Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn square_function_bounded_by_half_norm() {
        let op = BoundaryOperator1D::new(&pauli()[2] * c(0.0, 1.0), &pauli()[0] * re(0.3)).unwrap();
        let x = CMat::from_row_slice(2, 1, &[re(1.0), c(0.5, -0.5)]);
        let rep = square_function(&op, 2, &x, 20.0, 4000).unwrap();
        assert!(rep.relative_error < 0.05, "{rep:?}");
        assert!(rep.closed_form <= rep.bound + 1e-12);
    }
}
