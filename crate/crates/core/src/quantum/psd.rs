use super::{Matrix, Scalar};

/// Positive-semidefiniteness of a Hermitian matrix by pivoted LDL
/// elimination. Pivots within `tol` of zero must have a vanishing column.
pub(crate) fn is_positive_semidefinite<T: Scalar>(m: &Matrix<T>, tol: T) -> bool {
    let n = m.dim();
    let mut a = m.clone();
    for k in 0..n {
        let d = a.get(k, k).re;
        if d < -tol {
            return false;
        }
        if d.abs() <= tol {
            if (k + 1..n).any(|i| a.get(i, k).norm() > tol.sqrt()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            let f = a.get(i, k) / d;
            for j in k + 1..n {
                let v = a.get(i, j) - f * a.get(k, j);
                a.set(i, j, v);
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_small_cases() {
        assert!(is_positive_semidefinite(&Matrix::<f64>::identity(3), 1e-12));
        assert!(is_positive_semidefinite(&Matrix::<f64>::from_real(2, &[1.0, 1.0, 1.0, 1.0]), 1e-12));
        assert!(!is_positive_semidefinite(&Matrix::<f64>::from_real(2, &[1.0, 2.0, 2.0, 1.0]), 1e-12));
        assert!(!is_positive_semidefinite(&Matrix::<f64>::from_real(2, &[-1.0, 0.0, 0.0, 2.0]), 1e-12));
        assert!(!is_positive_semidefinite(&Matrix::<f64>::from_real(2, &[0.0, 1.0, 1.0, 0.0]), 1e-12));
    }
}
