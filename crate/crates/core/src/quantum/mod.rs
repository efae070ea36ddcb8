//! Finite-dimensional quantum state machinery shared by both calculi.
//!
//! Basis convention: in a register of `n` qubits the first qubit is the most
//! significant bit, so `|100>` has the first qubit set. Every type here is
//! generic over the real scalar; the crate root re-exports `f64` aliases.

mod density;
mod error;
mod gates;
mod matrix;
mod perm;
mod psd;
mod state;
mod superop;

pub use density::DensityMatrix;
pub use error::QuantumError;
pub use gates::Gate;
pub use matrix::Matrix;
pub use perm::Permutation;
pub use state::{MeasurementOutcome, StateVector};
pub use superop::{OperatorKind, Sign, SuperOperator, Violation};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};

/// Real scalar the quantum layer is generic over (`f32` or `f64`).
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {}

pub type Amplitude<T> = Complex<T>;

pub(crate) fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        None
    } else {
        Some(dim.trailing_zeros() as usize)
    }
}

/// Rounds a value to `digits` decimals for hashing; `-0` collapses to `0`.
pub(crate) fn round_key<T: Scalar>(x: T, digits: i32) -> i64 {
    let scale = 10f64.powi(digits);
    let v = (x.to_f64().unwrap_or(0.0) * scale).round();
    if v == 0.0 {
        0
    } else {
        v as i64
    }
}

/// Applies a `2^k x 2^k` operator to the qubits at `positions` of an
/// `n`-qubit vector, in place. `positions[0]` is the operator's most
/// significant qubit.
pub(crate) fn apply_on_positions<T: Scalar>(
    amps: &mut [Complex<T>],
    n: usize,
    positions: &[usize],
    op: &Matrix<T>,
) {
    let k = positions.len();
    debug_assert_eq!(op.dim(), 1 << k);
    let masks: Vec<usize> = positions.iter().map(|&p| 1usize << (n - 1 - p)).collect();
    let all: usize = masks.iter().fold(0, |a, m| a | m);
    let sub = 1usize << k;
    let mut local = vec![czero::<T>(); sub];
    let mut idx = vec![0usize; sub];
    for base in 0..amps.len() {
        if base & all != 0 {
            continue;
        }
        for (s, slot) in idx.iter_mut().enumerate() {
            let mut i = base;
            for (b, m) in masks.iter().enumerate() {
                if s & (1 << (k - 1 - b)) != 0 {
                    i |= m;
                }
            }
            *slot = i;
        }
        for (s, l) in local.iter_mut().enumerate() {
            *l = amps[idx[s]];
        }
        for r in 0..sub {
            let mut acc = czero::<T>();
            for (c, l) in local.iter().enumerate() {
                acc = acc + op.get(r, c) * l;
            }
            amps[idx[r]] = acc;
        }
    }
}
