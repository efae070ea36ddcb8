use super::psd::is_positive_semidefinite;
use super::{cone, qubits_for_dim, DensityMatrix, Gate, Matrix, QuantumError, Scalar};
use num_complex::Complex;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Signed sum of conjugations on the target qubits.
    Kraus,
    /// Extends the register with one fresh qubit in `|0>`.
    NewQubit,
}

/// Advisory findings; none of them blocks application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NotCompletelyPositive,
    TraceIncreasing,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotCompletelyPositive => f.write_str("not completely positive"),
            Violation::TraceIncreasing => f.write_str("not trace non-increasing"),
        }
    }
}

/// `rho -> sum_j sign_j (K_j ⊗ I) rho (K_j ⊗ I)^dagger`, optionally
/// renormalised to unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator<T> {
    name: String,
    arity: usize,
    kind: OperatorKind,
    terms: Vec<(Sign, Matrix<T>)>,
    normalize_after: bool,
}

fn projector<T: Scalar>(dim: usize, i: usize) -> Matrix<T> {
    let mut m = Matrix::zeros(dim);
    m.set(i, i, cone());
    m
}

impl<T: Scalar> SuperOperator<T> {
    pub fn signed_kraus(name: &str, arity: usize, terms: Vec<(Sign, Matrix<T>)>) -> Result<Self, QuantumError> {
        if terms.is_empty() {
            return Err(QuantumError::ShapeMismatch(format!("operator `{name}` has no terms")));
        }
        if let Some((_, m)) = terms.iter().find(|(_, m)| m.dim() != 1 << arity) {
            return Err(QuantumError::InvalidArity {
                expected: arity,
                found: qubits_for_dim(m.dim()).unwrap_or(0),
            });
        }
        Ok(Self { name: name.to_string(), arity, kind: OperatorKind::Kraus, terms, normalize_after: false })
    }

    pub fn from_unitary(name: &str, u: Matrix<T>) -> Result<Self, QuantumError> {
        let arity = qubits_for_dim(u.dim()).ok_or_else(|| QuantumError::ShapeMismatch(format!("dimension {}", u.dim())))?;
        Self::signed_kraus(name, arity, vec![(Sign::Plus, u)])
    }

    pub fn gate(g: Gate) -> Self {
        Self::from_unitary(g.name(), g.matrix()).expect("gate tables are well-formed")
    }

    /// Computational-basis measurement of `r` qubits, outcome forgotten.
    pub fn meas_unknown(r: usize) -> Self {
        let dim = 1 << r;
        let terms = (0..dim).map(|m| (Sign::Plus, projector(dim, m))).collect();
        Self { name: "M".into(), arity: r, kind: OperatorKind::Kraus, terms, normalize_after: false }
    }

    /// Projection onto outcome `i` of `r` qubits, renormalised. With `r = 0`
    /// this is the identity.
    pub fn meas_expected(i: usize, r: usize) -> Result<Self, QuantumError> {
        let dim = 1 << r;
        if i >= dim {
            return Err(QuantumError::InvalidOutcome { outcome: i, qubits: r });
        }
        Ok(Self {
            name: format!("E{{{i}}}"),
            arity: r,
            kind: OperatorKind::Kraus,
            terms: vec![(Sign::Plus, projector(dim, i))],
            normalize_after: true,
        })
    }

    pub fn new_qubit() -> Self {
        Self { name: "new".into(), arity: 1, kind: OperatorKind::NewQubit, terms: Vec::new(), normalize_after: false }
    }

    /// Single-qubit signed operator with terms `+[[1,0],[0,sqrt(1+p)]]` and
    /// `-[[0,sqrt p],[0,0]]`.
    pub fn counterexample(p: T) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let re = |x: T| Complex::new(x, T::zero());
        let plus = Matrix::from_rows(vec![vec![re(T::one()), z], vec![z, re((T::one() + p).sqrt())]]).unwrap();
        let minus = Matrix::from_rows(vec![vec![z, re(p.sqrt())], vec![z, z]]).unwrap();
        Self::signed_kraus("Q", 1, vec![(Sign::Plus, plus), (Sign::Minus, minus)]).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn terms(&self) -> &[(Sign, Matrix<T>)] {
        &self.terms
    }

    pub fn normalize_after(&self) -> bool {
        self.normalize_after
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Applies the operator to the named targets. A renormalising operator
    /// whose unnormalised result has trace within `tol` of zero fails with
    /// [`QuantumError::ZeroBranch`].
    pub fn apply(&self, targets: &[String], rho: &DensityMatrix<T>, tol: T) -> Result<DensityMatrix<T>, QuantumError> {
        if targets.len() != self.arity {
            return Err(QuantumError::InvalidArity { expected: self.arity, found: targets.len() });
        }
        match self.kind {
            OperatorKind::NewQubit => rho.extend_zero(&targets[0]),
            OperatorKind::Kraus => {
                let mut acc: Option<DensityMatrix<T>> = None;
                for (sign, k) in &self.terms {
                    let mut part = rho.conjugate_on(targets, k)?;
                    if *sign == Sign::Minus {
                        part = part.scale(-T::one());
                    }
                    acc = Some(match acc {
                        None => part,
                        Some(a) => a.add(&part)?,
                    });
                }
                let out = acc.expect("terms are non-empty");
                if self.normalize_after {
                    let tr = out.trace();
                    if tr.abs() <= tol {
                        return Err(QuantumError::ZeroBranch(tr.to_f64().unwrap_or(0.0)));
                    }
                    Ok(out.scale(T::one() / tr))
                } else {
                    Ok(out)
                }
            }
        }
    }

    /// Trace of the unnormalised result on the targets.
    pub fn branch_trace(&self, targets: &[String], rho: &DensityMatrix<T>) -> Result<T, QuantumError> {
        let raw = Self { normalize_after: false, ..self.clone() };
        Ok(raw.apply(targets, rho, T::zero())?.trace())
    }

    /// Advisory physicality report: complete positivity via the Choi matrix
    /// and trace non-increase via `I - sum_j sign_j K_j^dagger K_j >= 0`.
    pub fn validate(&self, tol: T) -> Vec<Violation> {
        if self.kind == OperatorKind::NewQubit {
            return Vec::new();
        }
        let d = 1usize << self.arity;
        let mut choi = Matrix::zeros(d * d);
        let mut gram = Matrix::zeros(d);
        for (sign, k) in &self.terms {
            let s = if *sign == Sign::Plus { T::one() } else { -T::one() };
            let v: Vec<Complex<T>> = (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).map(|(r, c)| k.get(r, c)).collect();
            for (i, a) in v.iter().enumerate() {
                for (j, b) in v.iter().enumerate() {
                    let cur = choi.get(i, j);
                    choi.set(i, j, cur + a * b.conj() * s);
                }
            }
            gram = &gram + &(k.adjoint() * k).scale_real(s);
        }
        let mut out = Vec::new();
        if !is_positive_semidefinite(&choi, tol) {
            out.push(Violation::NotCompletelyPositive);
        }
        if !is_positive_semidefinite(&(&Matrix::identity(d) - &gram), tol) {
            out.push(Violation::TraceIncreasing);
        }
        out
    }
}
