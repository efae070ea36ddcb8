use super::{cone, czero, QuantumError, Scalar};
use num_complex::Complex;
use std::ops::{Add, Mul, Sub};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_vec(dim: usize, data: Vec<Complex<T>>) -> Result<Self, QuantumError> {
        if data.len() != dim * dim {
            return Err(QuantumError::ShapeMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Matrix { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self, QuantumError> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(QuantumError::ShapeMismatch(format!(
                "row of length {} in a matrix with {dim} rows",
                bad.len()
            )));
        }
        Ok(Matrix { dim, data: rows.into_iter().flatten().collect() })
    }

    /// Real entries, row-major.
    pub fn from_real(dim: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), dim * dim);
        Matrix { dim, data: data.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect() }
    }

    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![czero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = cone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.dim + c] = v;
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut m = Self::zeros(d);
        for r in 0..d {
            for c in 0..d {
                m.data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        m
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut m = Self::zeros(d);
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.get(r1, c1);
                if x == czero() {
                    continue;
                }
                for r2 in 0..b {
                    for c2 in 0..b {
                        m.data[(r1 * b + r2) * d + c1 * b + c2] = x * other.get(r2, c2);
                    }
                }
            }
        }
        m
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(czero(), |acc, i| acc + self.get(i, i))
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn scale_real(&self, k: T) -> Self {
        self.scale(Complex::new(k, T::zero()))
    }

    /// Largest entrywise modulus of the difference; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> Option<T> {
        if self.dim != other.dim {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).norm())
                .fold(T::zero(), T::max),
        )
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        (self.adjoint() * self).approx_eq(&Self::identity(self.dim), tol)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix product shape");
        let d = self.dim;
        let mut m = Matrix::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let x = self.data[r * d + k];
                if x == czero() {
                    continue;
                }
                for c in 0..d {
                    m.data[r * d + c] = m.data[r * d + c] + x * rhs.data[k * d + c];
                }
            }
        }
        m
    }
}

impl<T: Scalar> Mul<&Matrix<T>> for Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        &self * rhs
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix sum shape");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix difference shape");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = Matrix::<f64>::identity(2);
        assert_eq!(i2.kron(&i2), Matrix::identity(4));
    }

    #[test]
    fn kron_places_blocks_row_major() {
        let x = Matrix::<f64>::from_real(2, &[0.0, 1.0, 1.0, 0.0]);
        let i2 = Matrix::<f64>::identity(2);
        let m = x.kron(&i2);
        // X on the most significant qubit swaps the halves.
        assert_eq!(m.get(0, 2), c(1.0, 0.0));
        assert_eq!(m.get(1, 3), c(1.0, 0.0));
        assert_eq!(m.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let m = Matrix::from_rows(vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(m.adjoint(), m);
        assert!(m.is_unitary(1e-12));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = Matrix::<f64>::from_rows(vec![vec![c(1.0, 0.0)], vec![]]).unwrap_err();
        assert!(matches!(err, QuantumError::ShapeMismatch(_)));
    }
}
