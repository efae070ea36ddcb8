use super::{apply_on_positions, czero, qubits_for_dim, round_key, DensityMatrix, Matrix, Permutation, QuantumError, Scalar};
use num_complex::Complex;
use crate::names::natural_cmp;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

/// Pure state of a named register. Invariant: `amps.len() == 2^names.len()`,
/// names are distinct, and the vector has unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    names: Vec<String>,
    amps: Vec<Complex<T>>,
}

/// One branch of a prefix measurement. `post_state` is `None` when the
/// branch has zero probability.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome<T> {
    pub outcome: usize,
    pub probability: T,
    pub post_state: Option<StateVector<T>>,
}

pub(crate) fn check_names(names: &[String]) -> Result<(), QuantumError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(QuantumError::NoCloningViolation(n.clone()));
        }
    }
    Ok(())
}

impl<T: Scalar> StateVector<T> {
    pub fn new(names: Vec<String>, amps: Vec<Complex<T>>, tol: T) -> Result<Self, QuantumError> {
        check_names(&names)?;
        if amps.len() != 1usize << names.len() {
            return Err(QuantumError::InvalidRegister(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                names.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QuantumError::InvalidRegister("non-finite amplitude".into()));
        }
        let s = Self { names, amps };
        let norm = s.norm_sqr();
        if (norm - T::one()).abs() > tol {
            return Err(QuantumError::InvalidRegister(format!("squared norm {norm} is not 1")));
        }
        Ok(s)
    }

    /// Scales `amps` to unit norm first; fails on the zero vector.
    pub fn normalized(names: Vec<String>, amps: Vec<Complex<T>>) -> Result<Self, QuantumError> {
        let norm: T = amps.iter().fold(T::zero(), |a, x| a + x.norm_sqr()).sqrt();
        if norm == T::zero() {
            return Err(QuantumError::InvalidRegister("zero vector".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Self::new(names, amps, T::lit(1e-6))
    }

    /// Computational basis state; `bits[k]` is the value of `names[k]`.
    pub fn basis(names: Vec<String>, bits: &[bool]) -> Result<Self, QuantumError> {
        if bits.len() != names.len() {
            return Err(QuantumError::InvalidRegister("bit string length differs from register".into()));
        }
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        let mut amps = vec![czero(); 1 << names.len()];
        amps[index] = Complex::new(T::one(), T::zero());
        Self::new(names, amps, T::zero())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn qubit_count(&self) -> usize {
        self.names.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |a, x| a + x.norm_sqr())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `self ⊗ other`; the registers must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self, QuantumError> {
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        check_names(&names)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { names, amps })
    }

    /// Appends a fresh qubit in `|0>`.
    pub fn append_zero(&self, name: &str) -> Result<Self, QuantumError> {
        self.tensor(&Self::basis(vec![name.to_string()], &[false])?)
    }

    /// Applies `u ⊗ I` where `u` acts on the first `log2(dim u)` qubits.
    pub fn apply_unitary_prefix(&self, u: &Matrix<T>) -> Result<Self, QuantumError> {
        let r = qubits_for_dim(u.dim()).ok_or_else(|| QuantumError::ShapeMismatch(format!("dimension {}", u.dim())))?;
        if r > self.qubit_count() {
            return Err(QuantumError::InvalidArity { expected: r, found: self.qubit_count() });
        }
        let positions: Vec<usize> = (0..r).collect();
        let mut amps = self.amps.clone();
        apply_on_positions(&mut amps, self.qubit_count(), &positions, u);
        Ok(Self { names: self.names.clone(), amps })
    }

    /// Applies `u` to the named qubits, in the given order.
    pub fn apply_on(&self, targets: &[String], u: &Matrix<T>) -> Result<Self, QuantumError> {
        if u.dim() != 1 << targets.len() {
            return Err(QuantumError::InvalidArity {
                expected: qubits_for_dim(u.dim()).unwrap_or(0),
                found: targets.len(),
            });
        }
        check_names(targets)?;
        let positions = targets
            .iter()
            .map(|t| self.position(t).ok_or_else(|| QuantumError::UnknownQubit(t.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut amps = self.amps.clone();
        apply_on_positions(&mut amps, self.qubit_count(), &positions, u);
        Ok(Self { names: self.names.clone(), amps })
    }

    /// Reorders the register; names travel with their amplitudes.
    pub fn permute(&self, p: &Permutation) -> Result<Self, QuantumError> {
        if p.len() != self.qubit_count() {
            return Err(QuantumError::InvalidPermutation(format!(
                "permutation on {} qubits for a register of {}",
                p.len(),
                self.qubit_count()
            )));
        }
        let mut amps = vec![czero(); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            amps[p.map_index(i)] = *a;
        }
        Ok(Self { names: p.apply_to(&self.names), amps })
    }

    /// The same state presented in the register order `order`.
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

    /// Measures the first `r` qubits in the computational basis. Outcomes
    /// are listed in increasing order; branches with probability at most
    /// `tol` carry no post-state.
    pub fn measure_prefix(&self, r: usize, tol: T) -> Result<Vec<MeasurementOutcome<T>>, QuantumError> {
        let n = self.qubit_count();
        if r > n {
            return Err(QuantumError::InvalidArity { expected: r, found: n });
        }
        let block = 1usize << (n - r);
        let mut out = Vec::with_capacity(1 << r);
        for m in 0..(1usize << r) {
            let lo = block * m;
            let hi = block * (m + 1);
            let p = self.amps[lo..hi].iter().fold(T::zero(), |a, x| a + x.norm_sqr());
            let post_state = if p > tol {
                let scale = p.sqrt();
                let mut amps = vec![czero(); self.amps.len()];
                for (dst, src) in amps[lo..hi].iter_mut().zip(&self.amps[lo..hi]) {
                    *dst = *src / scale;
                }
                Some(Self { names: self.names.clone(), amps })
            } else {
                None
            };
            out.push(MeasurementOutcome { outcome: m, probability: p, post_state });
        }
        Ok(out)
    }

    pub fn outer(&self) -> DensityMatrix<T> {
        let d = self.amps.len();
        let mut m = Matrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                m.set(r, c, self.amps[r] * self.amps[c].conj());
            }
        }
        DensityMatrix::from_parts_unchecked(self.names.clone(), m)
    }

    /// Same register order and amplitudes within `tol`. Global phase counts.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.names == other.names
            && self.amps.iter().zip(&other.amps).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Renames qubits; the map must keep the register duplicate-free.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, QuantumError> {
        let names: Vec<String> = self.names.iter().map(|n| map.get(n).unwrap_or(n).clone()).collect();
        check_names(&names)?;
        Ok(Self { names, amps: self.amps.clone() })
    }

    /// Hash key with amplitudes rounded to `digits` decimals.
    pub fn hash_key(&self, digits: i32) -> String {
        let mut s = self.names.join(",");
        s.push('|');
        for a in &self.amps {
            let _ = write!(s, "{},{};", round_key(a.re, digits), round_key(a.im, digits));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Gate;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("q{i}")).collect()
    }

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn reorder_moves_names_with_amplitudes() {
        let s = StateVector::<f64>::basis(names(3), &[true, false, false]).unwrap();
        let r = s.reorder(&["q2".into(), "q0".into(), "q1".into()]).unwrap();
        assert_eq!(r.names(), ["q2", "q0", "q1"]);
        assert!(r.approx_eq(&StateVector::basis(r.names().to_vec(), &[false, true, false]).unwrap(), 1e-12));
        assert_eq!(r.canonical(), s);
        assert!(s.reorder(&names(2)).is_err());
    }

    #[test]
    fn rejects_wrong_length_and_norm() {
        assert!(StateVector::new(names(1), vec![c(1.0)], 1e-9).is_err());
        assert!(StateVector::new(names(1), vec![c(1.0), c(1.0)], 1e-9).is_err());
        assert!(StateVector::new(vec!["a".into(), "a".into()], vec![c(1.0), c(0.0), c(0.0), c(0.0)], 1e-9).is_err());
    }

    #[test]
    fn cnot_on_prefix_flips_target() {
        let s = StateVector::<f64>::basis(names(3), &[true, false, false]).unwrap();
        let t = s.apply_unitary_prefix(&Gate::Cnot.matrix()).unwrap();
        assert!(t.approx_eq(&StateVector::basis(names(3), &[true, true, false]).unwrap(), 1e-12));
    }

    #[test]
    fn measuring_plus_gives_halves() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(names(1), vec![c(h), c(h)], 1e-12).unwrap();
        let outs = plus.measure_prefix(1, 1e-12).unwrap();
        assert_eq!(outs.len(), 2);
        for (m, o) in outs.iter().enumerate() {
            assert!((o.probability - 0.5).abs() < 1e-12);
            let expected = StateVector::basis(names(1), &[m == 1]).unwrap();
            assert!(o.post_state.as_ref().unwrap().approx_eq(&expected, 1e-12));
        }
    }

    #[test]
    fn zero_branches_carry_no_post_state() {
        let s = StateVector::<f64>::basis(names(2), &[false, true]).unwrap();
        let outs = s.measure_prefix(1, 1e-12).unwrap();
        assert!(outs[1].post_state.is_none());
        assert_eq!(outs[1].probability, 0.0);
    }

    #[test]
    fn permute_keeps_each_qubit_value() {
        let s = StateVector::<f64>::basis(names(3), &[true, false, false]).unwrap();
        let p = Permutation::from_sources(&[2, 0, 1]).unwrap();
        let t = s.permute(&p).unwrap();
        assert_eq!(t.names(), &["q2", "q0", "q1"]);
        assert!(t.approx_eq(&StateVector::basis(t.names().to_vec(), &[false, true, false]).unwrap(), 0.0));
    }

    #[test]
    fn works_in_single_precision() {
        let s = StateVector::<f32>::basis(names(1), &[false]).unwrap();
        let t = s.apply_unitary_prefix(&Gate::H.matrix()).unwrap();
        assert!((t.amplitudes()[1].re - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    pub(crate) fn random_state() -> impl Strategy<Value = StateVector<f64>> {
        (1usize..4).prop_flat_map(|n| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("nonzero", move |v| {
                let amps = v.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
                StateVector::normalized(names(n), amps).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn measurement_probabilities_sum_to_one(s in random_state(), r in 0usize..4) {
            let r = r.min(s.qubit_count());
            let outs = s.measure_prefix(r, 1e-12).unwrap();
            let total: f64 = outs.iter().map(|o| o.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for o in outs.iter().filter_map(|o| o.post_state.as_ref()) {
                prop_assert!((o.norm_sqr() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn unitaries_preserve_norm(s in random_state(), g in 0usize..9) {
            let gate = Gate::ALL[g];
            prop_assume!(gate.arity() <= s.qubit_count());
            let t = s.apply_unitary_prefix(&gate.matrix()).unwrap();
            prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn permuting_then_inverting_is_identity(s in random_state(), seed in any::<u64>()) {
            let n = s.qubit_count();
            let mut order: Vec<usize> = (0..n).collect();
            order.rotate_left((seed as usize) % n.max(1));
            let p = Permutation::new(order).unwrap();
            let back = s.permute(&p).unwrap().permute(&p.inverse()).unwrap();
            prop_assert!(back.approx_eq(&s, 1e-12));
        }

        #[test]
        fn permute_agrees_with_permutation_unitary(s in random_state(), seed in any::<u64>()) {
            let n = s.qubit_count();
            let mut order: Vec<usize> = (0..n).collect();
            order.rotate_left((seed as usize) % n.max(1));
            let p = Permutation::new(order).unwrap();
            let via_matrix = s.apply_unitary_prefix(&p.unitary()).unwrap();
            let permuted = s.permute(&p).unwrap();
            prop_assert!(via_matrix.amplitudes().iter().zip(permuted.amplitudes()).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }
}
