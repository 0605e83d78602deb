//! Simulation and verification of the nondiagonal abelian Berry phase picked
//! up by a degenerate entangled pair of two-level systems when one member is
//! driven adiabatically around a closed loop.
//!
//! The numerical core is generic over the real scalar ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`, which is what the
//! command-line front end and the tolerance budget assume.

pub mod berry;
pub mod bloch;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod pairproto;
pub mod scalar;
pub mod tolerance;

pub use error::{Error, Result};
pub use scalar::{phase_distance, reduce_phase, reduce_solid_angle, Complex, Real};

pub type PauliVector = linalg::PauliVector<f64>;
pub type StateVector2 = linalg::StateVector<f64, 2>;
pub type StateVector4 = linalg::StateVector<f64, 4>;
pub type Unitary2 = linalg::UnitaryOperator<f64, 2>;
pub type Unitary4 = linalg::UnitaryOperator<f64, 4>;
pub type Matrix2 = linalg::CMatrix<f64, 2>;
pub type Matrix4 = linalg::CMatrix<f64, 4>;
pub type FieldLoop = bloch::FieldLoop<f64>;
pub type SolidAngle = bloch::SolidAngle<f64>;
pub type HamiltonianSchedule = evolution::HamiltonianSchedule<f64>;
pub type Trajectory2 = evolution::Trajectory<f64, 2>;
pub type Trajectory4 = evolution::Trajectory<f64, 4>;
pub type BerryPhaseResult = berry::BerryPhaseResult<f64>;
pub type PhaseFactor = pairproto::PhaseFactor<f64>;
pub type PairProtocol = pairproto::PairProtocol<f64>;
pub type ProtocolResult = pairproto::ProtocolResult<f64>;
