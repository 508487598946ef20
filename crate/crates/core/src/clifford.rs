//! Concrete Dirac-type seeds: Hermitian anticommuting generators in any
//! dimension and the `d + d^dagger` symbol on complex differential forms.

use crate::linalg::{c, identity, re, CMat};
use crate::symbolalg::LinearSymbol;

fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
}

fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)])
}

fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
}

pub fn pauli() -> [CMat; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// The 2D Dirac symbol `sigma_1 = sigma_x, sigma_2 = sigma_y`.
pub fn pauli_symbol() -> LinearSymbol {
    LinearSymbol::new(vec![pauli_x(), pauli_y()]).expect("valid")
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `n` Hermitian generators with `g_i g_j + g_j g_i = 2 delta_ij`, of size
/// `2^(n/2)` (integer division). Jordan-Wigner construction on `k` qubits:
/// generator `2j` is `Z^{(j)} (x) X (x) I`, generator `2j+1` uses `Y`, and for
/// odd `n` the last one is `Z (x) ... (x) Z`. For `n = 2, 3` these are the
/// Pauli matrices in their usual order.
pub fn clifford_generators(n: usize) -> Vec<CMat> {
    assert!(n >= 1, "need at least one generator");
    let k = (n / 2).max(1);
    let string = |slots: &[CMat]| slots.iter().skip(1).fold(slots[0].clone(), |acc, m| kron(&acc, m));
    let mut out = Vec::with_capacity(n);
    for j in 0..k {
        for last in [pauli_x(), pauli_y()] {
            let slots: Vec<CMat> = (0..k)
                .map(|q| match q.cmp(&j) {
                    std::cmp::Ordering::Less => pauli_z(),
                    std::cmp::Ordering::Equal => last.clone(),
                    std::cmp::Ordering::Greater => identity(2),
                })
                .collect();
            out.push(string(&slots));
        }
    }
    if n % 2 == 1 {
        let slots: Vec<CMat> = (0..k).map(|_| pauli_z()).collect();
        if n == 1 {
            return vec![pauli_z()];
        }
        out.push(string(&slots));
    }
    out.truncate(n);
    out
}

/// Dirac-type seed in dimension `n` built from [`clifford_generators`].
pub fn dirac_seed(n: usize) -> LinearSymbol {
    LinearSymbol::new(clifford_generators(n)).expect("n >= 2")
}

/// Exterior algebra of `R^n` complexified, basis indexed by bitmasks
/// (bit `i` set means `e^i` is a factor, factors in increasing order).
#[derive(Debug, Clone)]
pub struct FormsModel {
    pub n: usize,
}

impl FormsModel {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= 10, "forms model dimension out of range");
        Self { n }
    }

    pub fn rank(&self) -> usize {
        1 << self.n
    }

    /// `e^i /\ .`
    pub fn wedge(&self, i: usize) -> CMat {
        let dim = self.rank();
        let mut m = CMat::zeros(dim, dim);
        for mask in 0..dim {
            if mask & (1 << i) != 0 {
                continue;
            }
            let sign = if (mask & ((1 << i) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(mask | (1 << i), mask)] = re(sign);
        }
        m
    }

    /// `e_i _| .`, the adjoint of [`Self::wedge`] for the Euclidean metric.
    pub fn contract(&self, i: usize) -> CMat {
        self.wedge(i).adjoint()
    }

    /// Symbol of `d + d^dagger`: `sigma(xi) w = xi /\ w + xi _| w`.
    pub fn symbol(&self) -> LinearSymbol {
        LinearSymbol::new((0..self.n).map(|i| self.wedge(i) + self.contract(i)).collect()).expect("n >= 2")
    }

    /// Orthogonal projector onto forms without a factor `e^normal`
    /// (the tangential part, whose vanishing normal part is the absolute
    /// condition).
    pub fn tangential_projector(&self, normal: usize) -> CMat {
        let dim = self.rank();
        CMat::from_fn(dim, dim, |r, col| if r == col && r & (1 << normal) == 0 { re(1.0) } else { re(0.0) })
    }

    /// Orthogonal projector onto `e^normal /\ (...)`.
    pub fn normal_projector(&self, normal: usize) -> CMat {
        identity(self.rank()) - self.tangential_projector(normal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::symbolalg::{check_dirac_type, Metric};

    #[test]
    fn generators_anticommute_and_are_hermitian() {
        for n in 2..=7 {
            let g = clifford_generators(n);
            assert_eq!(g.len(), n);
            let dim = g[0].nrows();
            assert_eq!(dim, 1 << (n / 2));
            for i in 0..n {
                assert!(max_abs(&(&g[i] - g[i].adjoint())) < 1e-15);
                for j in 0..n {
                    let ac = &g[i] * &g[j] + &g[j] * &g[i];
                    let expect = if i == j { identity(dim) * re(2.0) } else { CMat::zeros(dim, dim) };
                    assert!(max_abs(&(ac - expect)) < 1e-15, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn low_dimensions_are_pauli() {
        let p = pauli();
        assert_eq!(clifford_generators(3), p.to_vec());
        assert_eq!(clifford_generators(2), p[..2].to_vec());
    }

    #[test]
    fn forms_symbol_is_dirac_type() {
        for n in 2..=4 {
            let f = FormsModel::new(n);
            assert!(check_dirac_type(&f.symbol(), &Metric::euclidean(n), 1e-12).unwrap());
        }
    }

    #[test]
    fn wedge_squares_to_zero_and_anticommutes() {
        let f = FormsModel::new(3);
        for i in 0..3 {
            assert!(max_abs(&(&f.wedge(i) * &f.wedge(i))) < 1e-15);
            for j in 0..3 {
                let ac = f.wedge(i) * f.contract(j) + f.contract(j) * f.wedge(i);
                let expect = if i == j { identity(8) } else { CMat::zeros(8, 8) };
                assert!(max_abs(&(ac - expect)) < 1e-15);
            }
        }
    }
}
