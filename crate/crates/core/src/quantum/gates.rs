use super::{Matrix, Scalar};
use num_complex::Complex;
use std::fmt;
use std::str::FromStr;

/// Named unitaries available in both surface syntaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    Cnot,
    Swap,
}

impl Gate {
    pub const ALL: [Gate; 9] =
        [Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::T, Gate::Cnot, Gate::Swap];

    pub fn arity(self) -> usize {
        match self {
            Gate::Cnot | Gate::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::T => "T",
            Gate::Cnot => "CNOT",
            Gate::Swap => "SWAP",
        }
    }

    pub fn matrix<T: Scalar>(self) -> Matrix<T> {
        let z = T::zero();
        let o = T::one();
        let c = |re: T, im: T| Complex::new(re, im);
        let rows = match self {
            Gate::I => vec![vec![c(o, z), c(z, z)], vec![c(z, z), c(o, z)]],
            Gate::X => vec![vec![c(z, z), c(o, z)], vec![c(o, z), c(z, z)]],
            Gate::Y => vec![vec![c(z, z), c(z, -o)], vec![c(z, o), c(z, z)]],
            Gate::Z => vec![vec![c(o, z), c(z, z)], vec![c(z, z), c(-o, z)]],
            Gate::H => {
                let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
                vec![vec![c(h, z), c(h, z)], vec![c(h, z), c(-h, z)]]
            }
            Gate::S => vec![vec![c(o, z), c(z, z)], vec![c(z, z), c(z, o)]],
            Gate::T => {
                let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
                vec![vec![c(o, z), c(z, z)], vec![c(z, z), c(h, h)]]
            }
            Gate::Cnot => {
                return Matrix::from_real(
                    4,
                    &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.],
                )
            }
            Gate::Swap => {
                return Matrix::from_real(
                    4,
                    &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.],
                )
            }
        };
        Matrix::from_rows(rows).expect("gate tables are square")
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Gate::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown gate `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_gate_is_unitary_with_matching_dimension() {
        for g in Gate::ALL {
            let m = g.matrix::<f64>();
            assert_eq!(m.dim(), 1 << g.arity(), "{g}");
            assert!(m.is_unitary(1e-12), "{g}");
        }
    }

    #[test]
    fn names_round_trip() {
        for g in Gate::ALL {
            assert_eq!(g.name().parse::<Gate>().unwrap(), g);
        }
        assert!("CZ".parse::<Gate>().is_err());
    }

    #[test]
    fn y_equals_i_times_x_times_z() {
        let x = Gate::X.matrix::<f64>();
        let z = Gate::Z.matrix::<f64>();
        let y = Gate::Y.matrix::<f64>();
        let ixz = (&x * &z).scale(Complex::new(0.0, 1.0));
        assert!(y.approx_eq(&ixz, 1e-12));
    }
}
