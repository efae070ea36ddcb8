//! Two quantum process calculi and a translation between them.
//!
//! The source calculus addresses a global register positionally and
//! resolves measurements into explicit probability distributions. The
//! target calculus manipulates a density matrix with super-operators and
//! represents measurement outcomes as guarded choices. [`encode`] maps the
//! former into the latter and [`criteria`] checks the correspondence
//! properties of that map on concrete, bounded instances.

pub mod cqp;
pub mod criteria;
pub mod encode;
pub mod names;
pub mod qccs;
pub mod quantum;
pub mod syntax;

pub use quantum::Scalar;

pub type Matrix = quantum::Matrix<f64>;
pub type StateVector = quantum::StateVector<f64>;
pub type DensityMatrix = quantum::DensityMatrix<f64>;
pub type SuperOperator = quantum::SuperOperator<f64>;
pub type MeasurementOutcome = quantum::MeasurementOutcome<f64>;
pub type Amplitude = quantum::Amplitude<f64>;

pub type MatrixF32 = quantum::Matrix<f32>;
pub type StateVectorF32 = quantum::StateVector<f32>;
pub type DensityMatrixF32 = quantum::DensityMatrix<f32>;
pub type SuperOperatorF32 = quantum::SuperOperator<f32>;

/// Default comparison tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
