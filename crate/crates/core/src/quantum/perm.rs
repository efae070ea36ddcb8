use super::{cone, qubits_for_dim, Matrix, QuantumError, Scalar};

/// Bijection on register positions: the qubit at position `j` moves to
/// position `dest[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    dest: Vec<usize>,
}

impl Permutation {
    pub fn new(dest: Vec<usize>) -> Result<Self, QuantumError> {
        let n = dest.len();
        let mut seen = vec![false; n];
        for &d in &dest {
            if d >= n || seen[d] {
                return Err(QuantumError::InvalidPermutation(format!("{dest:?} is not a bijection on 0..{n}")));
            }
            seen[d] = true;
        }
        Ok(Permutation { dest })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { dest: (0..n).collect() }
    }

    /// The permutation whose result has `sources[i]` at position `i`.
    pub fn from_sources(sources: &[usize]) -> Result<Self, QuantumError> {
        Ok(Permutation::new(sources.to_vec())?.inverse())
    }

    pub fn len(&self) -> usize {
        self.dest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dest.is_empty()
    }

    pub fn dest(&self, j: usize) -> usize {
        self.dest[j]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.dest
    }

    pub fn is_identity(&self) -> bool {
        self.dest.iter().enumerate().all(|(i, &d)| i == d)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.dest.len()];
        for (j, &d) in self.dest.iter().enumerate() {
            inv[d] = j;
        }
        Permutation { dest: inv }
    }

    /// Rearranges `items` so that `items[j]` ends up at `dest[j]`.
    pub fn apply_to<X: Clone>(&self, items: &[X]) -> Vec<X> {
        let mut out = items.to_vec();
        for (j, x) in items.iter().enumerate() {
            out[self.dest[j]] = x.clone();
        }
        out
    }

    /// Maps a basis index of the original register to the permuted one.
    pub fn map_index(&self, index: usize) -> usize {
        let n = self.dest.len();
        let mut out = 0;
        for j in 0..n {
            if index & (1 << (n - 1 - j)) != 0 {
                out |= 1 << (n - 1 - self.dest[j]);
            }
        }
        out
    }

    /// The `2^n` unitary sending `|b_0 .. b_{n-1}>` to the basis state whose
    /// bit at `dest[j]` is `b_j`.
    pub fn unitary<T: Scalar>(&self) -> Matrix<T> {
        let dim = 1usize << self.dest.len();
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.set(self.map_index(i), i, cone());
        }
        m
    }

    /// Checks that a matrix dimension fits this permutation.
    pub fn check_dim(&self, dim: usize) -> Result<(), QuantumError> {
        match qubits_for_dim(dim) {
            Some(n) if n == self.dest.len() => Ok(()),
            _ => Err(QuantumError::InvalidPermutation(format!(
                "permutation on {} qubits against dimension {dim}",
                self.dest.len()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn swap_moves_bits() {
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(swap.map_index(0b01), 0b10);
        let u = swap.unitary::<f64>();
        assert!(u.approx_eq(&crate::quantum::Gate::Swap.matrix(), 0.0));
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
    }

    #[test]
    fn from_sources_places_named_positions_first() {
        let p = Permutation::from_sources(&[2, 0, 1]).unwrap();
        assert_eq!(p.apply_to(&["a", "b", "c"]), vec!["c", "a", "b"]);
    }

    fn perm_strategy() -> impl Strategy<Value = Permutation> {
        (1usize..6).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle()).prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn permutation_unitaries_are_unitary_and_invert(p in perm_strategy()) {
            let u = p.unitary::<f64>();
            prop_assert!(u.is_unitary(1e-12));
            let back = p.inverse().unitary::<f64>();
            prop_assert!((&back * &u).approx_eq(&Matrix::identity(u.dim()), 1e-12));
        }
    }
}
