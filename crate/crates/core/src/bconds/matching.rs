//! Matching condition `B_M = {(u, u)}` on two copies of a hypersurface.

use super::{aps, GraphBC};
use crate::adapted::{invertibility_witness, mode_split, BoundaryOperator1D, DEFAULT_REALPART_TOL};
use crate::error::{Error, Result};
use crate::linalg::{direct_sum, identity, max_abs, CMat, C64};

/// Matching condition with respect to `A_N (+) -A_N`, stored as graph data.
#[derive(Debug, Clone)]
pub struct MatchingBC {
    pub a_n: BoundaryOperator1D,
    pub graph: GraphBC,
}

impl MatchingBC {
    pub fn cutoff(&self) -> usize {
        self.graph.cutoff
    }

    /// `sigma_0` on the two copies: `id` on the first, `-id` on the second.
    pub fn sigma0(&self) -> CMat {
        let r = self.a_n.rank();
        direct_sum(&identity(r), &(-identity(r)))
    }

    /// `A_N (+) -A_N`.
    pub fn doubled_operator(&self) -> BoundaryOperator1D {
        doubled_operator(&self.a_n)
    }
}

/// `A (+) -A` with the shift folded into the zeroth-order part.
pub fn doubled_operator(a: &BoundaryOperator1D) -> BoundaryOperator1D {
    let neg = a.negated();
    BoundaryOperator1D {
        a: direct_sum(&a.a, &neg.a),
        b: direct_sum(&(&a.b + identity(a.rank()) * C64::new(a.shift, 0.0)), &(&neg.b + identity(a.rank()) * C64::new(neg.shift, 0.0))),
        shift: 0.0,
    }
}

/// Builds `B_M` for an operator passing the invertibility proxy. In each
/// mode `V_- = chi_-(A) (+) chi_+(A)` in the two slots, `W_+- = 0` and `g`
/// swaps the slots, so `v + g v = (u, u)`.
pub fn matching(a_n: &BoundaryOperator1D, cutoff: usize) -> Result<MatchingBC> {
    if let Some(err) = invertibility_witness(a_n, cutoff) {
        return Err(err);
    }
    let d = doubled_operator(a_n);
    let r = a_n.rank();
    let splits = mode_split(&d, cutoff, DEFAULT_REALPART_TOL)?;
    let mut graph = aps(&splits)?;
    let swap = {
        let mut s = CMat::zeros(2 * r, 2 * r);
        for i in 0..r {
            s[(i, r + i)] = C64::new(1.0, 0.0);
            s[(r + i, i)] = C64::new(1.0, 0.0);
        }
        s
    };
    for m in &mut graph.modes {
        let image = &swap * &m.vminus;
        let coords = m.vplus.adjoint() * &image;
        if max_abs(&(&m.vplus * &coords - image)) > 1e-8 {
            return Err(Error::Invariant("slot swap does not map chi_- into chi_+".into()));
        }
        m.g = coords;
    }
    graph.validate(&splits)?;
    Ok(MatchingBC { a_n: a_n.clone(), graph })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::pauli;
    use crate::linalg::{c, hcat, re, subspace_distance};

    #[test]
    fn matching_is_the_diagonal() {
        let a = BoundaryOperator1D::new(&pauli()[2] * c(0.0, 1.0), &pauli()[0] * re(0.4)).unwrap();
        let bc = matching(&a, 3).unwrap();
        let diag = hcat(&[&identity(2), &identity(2)]).transpose();
        let diag = CMat::from_fn(4, 2, |i, j| diag[(i, j)]);
        for k in -3..=3 {
            let s = bc.graph.subspace(k).unwrap();
            assert_eq!(s.ncols(), 2);
            assert!(subspace_distance(&s, &diag, 1e-10) < 1e-10);
        }
    }

    #[test]
    fn matching_requires_invertibility() {
        let a = BoundaryOperator1D::scalar(c(0.0, 1.0), re(0.0));
        assert!(matches!(matching(&a, 2), Err(Error::NotInvertible { mode: 0, .. })));
    }
}
