use super::state::check_names;
use super::{apply_on_positions, czero, qubits_for_dim, round_key, Matrix, Permutation, QuantumError, Scalar, StateVector};
use crate::names::natural_cmp;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Operator on a named register. Invariant: the matrix dimension is
/// `2^names.len()` and names are distinct. Positivity is not enforced, so
/// the outputs of signed operators are representable.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    names: Vec<String>,
    matrix: Matrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn new(names: Vec<String>, matrix: Matrix<T>) -> Result<Self, QuantumError> {
        check_names(&names)?;
        if qubits_for_dim(matrix.dim()) != Some(names.len()) {
            return Err(QuantumError::ShapeMismatch(format!(
                "{}x{} matrix for {} qubits",
                matrix.dim(),
                matrix.dim(),
                names.len()
            )));
        }
        Ok(Self { names, matrix })
    }

    pub(crate) fn from_parts_unchecked(names: Vec<String>, matrix: Matrix<T>) -> Self {
        Self { names, matrix }
    }

    /// `sum_i p_i |psi_i><psi_i|`; all states must share one register order.
    pub fn mixture(parts: &[(T, StateVector<T>)]) -> Result<Self, QuantumError> {
        let (_, first) = parts.first().ok_or_else(|| QuantumError::InvalidRegister("empty mixture".into()))?;
        let mut acc = Matrix::zeros(first.amplitudes().len());
        for (p, s) in parts {
            if s.names() != first.names() {
                return Err(QuantumError::ShapeMismatch("mixture components over different registers".into()));
            }
            acc = &acc + &s.outer().matrix.scale_real(*p);
        }
        Ok(Self { names: first.names().to_vec(), matrix: acc })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn qubit_count(&self) -> usize {
        self.names.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Real part of the trace.
    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn scale(&self, k: T) -> Self {
        Self { names: self.names.clone(), matrix: self.matrix.scale_real(k) }
    }

    /// Entrywise sum; `other` is aligned to this register order first.
    pub fn add(&self, other: &Self) -> Result<Self, QuantumError> {
        let other = other.reorder(&self.names)?;
        Ok(Self { names: self.names.clone(), matrix: &self.matrix + &other.matrix })
    }

    /// Applies the register permutation to rows and columns.
    pub fn permute(&self, p: &Permutation) -> Result<Self, QuantumError> {
        if p.len() != self.qubit_count() {
            return Err(QuantumError::InvalidPermutation(format!(
                "permutation on {} qubits for a register of {}",
                p.len(),
                self.qubit_count()
            )));
        }
        let d = self.matrix.dim();
        let mut m = Matrix::zeros(d);
        for r in 0..d {
            let pr = p.map_index(r);
            for c in 0..d {
                m.set(pr, p.map_index(c), self.matrix.get(r, c));
            }
        }
        Ok(Self { names: p.apply_to(&self.names), matrix: m })
    }

    /// The same operator presented in the register order `order`.
    pub fn reorder(&self, order: &[String]) -> Result<Self, QuantumError> {
        if order == self.names.as_slice() {
            return Ok(self.clone());
        }
        if order.len() != self.names.len() {
            return Err(QuantumError::ShapeMismatch(format!("register {order:?} against {:?}", self.names)));
        }
        let mut dest = vec![0; order.len()];
        for (j, n) in self.names.iter().enumerate() {
            dest[j] = order.iter().position(|o| o == n).ok_or_else(|| QuantumError::UnknownQubit(n.clone()))?;
        }
        self.permute(&Permutation::new(dest)?)
    }

    /// Presentation with qubit names in natural order.
    pub fn canonical(&self) -> Self {
        let mut order = self.names.clone();
        order.sort_by(|a, b| natural_cmp(a, b));
        self.reorder(&order).expect("sorting keeps the register")
    }

    /// Equal as operators on the same named qubits, whatever the order.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        match other.reorder(&self.names) {
            Ok(o) => self.matrix.approx_eq(&o.matrix, tol),
            Err(_) => false,
        }
    }

    /// `k rho k^dagger` with `k` acting on `targets` (in that order).
    pub fn conjugate_on(&self, targets: &[String], k: &Matrix<T>) -> Result<Self, QuantumError> {
        if k.dim() != 1 << targets.len() {
            return Err(QuantumError::InvalidArity {
                expected: qubits_for_dim(k.dim()).unwrap_or(0),
                found: targets.len(),
            });
        }
        check_names(targets)?;
        let positions = targets
            .iter()
            .map(|t| self.position(t).ok_or_else(|| QuantumError::UnknownQubit(t.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let n = self.qubit_count();
        let left = apply_columns(&self.matrix, n, &positions, k);
        let right = apply_columns(&left.adjoint(), n, &positions, k).adjoint();
        Ok(Self { names: self.names.clone(), matrix: right })
    }

    /// `rho ⊗ |0><0|` on a fresh qubit.
    pub fn extend_zero(&self, name: &str) -> Result<Self, QuantumError> {
        let mut names = self.names.clone();
        names.push(name.to_string());
        check_names(&names)?;
        let zero = Matrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]);
        Ok(Self { names, matrix: self.matrix.kron(&zero) })
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, QuantumError> {
        let names: Vec<String> = self.names.iter().map(|n| map.get(n).unwrap_or(n).clone()).collect();
        check_names(&names)?;
        Ok(Self { names, matrix: self.matrix.clone() })
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.matrix.is_hermitian(tol)
    }

    /// Hash key of the canonical presentation, entries rounded to `digits`.
    pub fn hash_key(&self, digits: i32) -> String {
        let c = self.canonical();
        let mut s = c.names.join(",");
        s.push('|');
        for a in c.matrix.entries() {
            let _ = write!(s, "{},{};", round_key(a.re, digits), round_key(a.im, digits));
        }
        s
    }
}

fn apply_columns<T: Scalar>(m: &Matrix<T>, n: usize, positions: &[usize], k: &Matrix<T>) -> Matrix<T> {
    let d = m.dim();
    let mut out = m.clone();
    let mut col = vec![czero::<T>(); d];
    for c in 0..d {
        for (r, slot) in col.iter_mut().enumerate() {
            *slot = m.get(r, c);
        }
        apply_on_positions(&mut col, n, positions, k);
        for (r, v) in col.iter().enumerate() {
            out.set(r, c, *v);
        }
    }
    out
}

impl<T: Scalar> From<&StateVector<T>> for DensityMatrix<T> {
    fn from(s: &StateVector<T>) -> Self {
        s.outer()
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Gate;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn conjugation_matches_outer_of_evolved_state() {
        let s = StateVector::<f64>::basis(names(&["a", "b"]), &[true, false]).unwrap();
        let rho = s.outer().conjugate_on(&names(&["a", "b"]), &Gate::Cnot.matrix()).unwrap();
        let t = s.apply_unitary_prefix(&Gate::Cnot.matrix()).unwrap();
        assert!(rho.approx_eq(&t.outer(), 1e-12));
    }

    #[test]
    fn conjugation_on_later_qubit_uses_names() {
        let s = StateVector::<f64>::basis(names(&["a", "b"]), &[false, false]).unwrap();
        let rho = s.outer().conjugate_on(&names(&["b"]), &Gate::X.matrix()).unwrap();
        let expected = StateVector::basis(names(&["a", "b"]), &[false, true]).unwrap().outer();
        assert!(rho.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn reorder_is_presentation_only() {
        let s = StateVector::<f64>::basis(names(&["a", "b"]), &[true, false]).unwrap();
        let rho = s.outer();
        let swapped = rho.reorder(&names(&["b", "a"])).unwrap();
        assert_eq!(swapped.matrix().get(1, 1).re, 1.0);
        assert!(rho.approx_eq(&swapped, 0.0));
        assert_eq!(rho.hash_key(9), swapped.hash_key(9));
    }

    #[test]
    fn extend_zero_appends_ground_state() {
        let s = StateVector::<f64>::basis(names(&["a"]), &[true]).unwrap();
        let ext = s.outer().extend_zero("b").unwrap();
        assert!(ext.approx_eq(&s.append_zero("b").unwrap().outer(), 0.0));
        assert!(s.outer().extend_zero("a").is_err());
    }

    #[test]
    fn mixture_of_basis_states_is_diagonal() {
        let zero = StateVector::<f64>::basis(names(&["q"]), &[false]).unwrap();
        let one = StateVector::<f64>::basis(names(&["q"]), &[true]).unwrap();
        let m = DensityMatrix::mixture(&[(0.5, zero), (0.5, one)]).unwrap();
        assert!(m.matrix().approx_eq(&Matrix::identity(2).scale_real(0.5), 1e-12));
    }
}
