//! Property tests for algebraic invariants.

mod common;

use ellbc::adapted::{mode_split, spectral_projectors, BoundaryOperator1D, DEFAULT_REALPART_TOL};
use ellbc::bconds::{adjoint_condition, aps, deform};
use ellbc::linalg::{identity, max_abs, re, subspace_distance, CMat};
use ellbc::symbolalg::LinearSymbol;
use proptest::prelude::*;

use common::{random_complex, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let mut r = rng(seed);
        let sym = LinearSymbol::new((0..3).map(|_| random_complex(&mut r, 2, 3)).collect()).unwrap();
        let xi = [0.3, -1.2, 0.7];
        let eta = [1.1, 0.4, -0.5];
        let mix: Vec<f64> = xi.iter().zip(&eta).map(|(x, y)| a * x + b * y).collect();
        let lhs = sym.evaluate(&mix).unwrap();
        let rhs = sym.evaluate(&xi).unwrap() * re(a) + sym.evaluate(&eta).unwrap() * re(b);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn projectors_commute_with_similarity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_complex(&mut r, 4, 4) * re(2.0);
        let t = random_complex(&mut r, 4, 4) + identity(4) * re(2.0);
        let tinv = t.clone().try_inverse().unwrap();
        let split = spectral_projectors(&m, DEFAULT_REALPART_TOL).unwrap();
        // skip draws with an eigenvalue close to the axis
        prop_assume!(split.spectrum.iter().all(|e| e.re.abs() > 1e-2));
        let conj = spectral_projectors(&(&t * &m * &tinv), DEFAULT_REALPART_TOL).unwrap();
        let expected: CMat = &t * &split.chi_plus * &tinv;
        let scale = max_abs(&expected).max(1.0);
        prop_assert!(max_abs(&(conj.chi_plus - expected)) < 1e-8 * scale);
    }

    #[test]
    fn deformations_compose(seed in any::<u64>(), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let mut r = rng(seed);
        let op = BoundaryOperator1D::new(random_complex(&mut r, 2, 2), random_complex(&mut r, 2, 2)).unwrap();
        let splits = mode_split(&op, 2, DEFAULT_REALPART_TOL).unwrap();
        let mut bc = aps(&splits).unwrap();
        for k in bc.modes_range().collect::<Vec<_>>() {
            let m = bc.mode(k).unwrap();
            let shape = (m.vplus.ncols(), m.vminus.ncols());
            bc = bc.with_g(k, random_complex(&mut r, shape.0, shape.1)).unwrap();
        }
        let twice = deform(&deform(&bc, s), t);
        let once = deform(&bc, s * t);
        for k in bc.modes_range() {
            prop_assert!(max_abs(&(&twice.mode(k).unwrap().g - &once.mode(k).unwrap().g)) < 1e-14);
        }
    }

    #[test]
    fn adjoint_condition_is_an_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let op = BoundaryOperator1D::new(random_complex(&mut r, 2, 2), random_complex(&mut r, 2, 2)).unwrap();
        let splits = mode_split(&op, 1, DEFAULT_REALPART_TOL).unwrap();
        let adj_splits = mode_split(&op.adjoint(), 1, DEFAULT_REALPART_TOL).unwrap();
        let mut bc = aps(&splits).unwrap();
        for k in bc.modes_range().collect::<Vec<_>>() {
            let m = bc.mode(k).unwrap();
            let shape = (m.vplus.ncols(), m.vminus.ncols());
            bc = bc.with_g(k, random_complex(&mut r, shape.0, shape.1)).unwrap();
        }
        let id = identity(2);
        let once = adjoint_condition(&bc, &id, &adj_splits).unwrap();
        // `once` refines the splits of -A^*, whose adjoint is -A
        let neg_splits = mode_split(&op.negated(), 1, DEFAULT_REALPART_TOL).unwrap();
        let back = adjoint_condition(&once, &id, &neg_splits).unwrap();
        for k in bc.modes_range() {
            prop_assert!(subspace_distance(&back.subspace(k).unwrap(), &bc.subspace(k).unwrap(), 1e-10) < 1e-9);
        }
    }
}
