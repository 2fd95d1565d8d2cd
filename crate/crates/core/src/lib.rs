//! Single-atom cavity-QED quantum-phase-gate model.
//!
//! - [`params`]: rates, detunings, regime and derived constants.
//! - [`qlinalg`]: dense complex linear algebra for states and superoperators.
//! - [`response`]: analytic weak-field transmission and atom-number fitting.
//! - [`masterq`]: truncated Fock-space Lindblad model, saturation and pump-probe phase shifts.
//! - [`qpg`]: two-mode phase ansatz, coherent output state, slope inversion, truth table.
//! - [`entangle`]: concurrence, maximal CHSH violation and coherence damping.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod entangle;
pub mod error;
pub mod lsq;
pub mod masterq;
pub mod params;
pub mod qlinalg;
pub mod qpg;
pub mod response;
pub mod scalar;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;

pub type RateSet64 = params::RateSet<f64>;
pub type Detunings64 = params::Detunings<f64>;
pub type DerivedQuantities64 = params::DerivedQuantities<f64>;
pub type ComplexMatrix64 = qlinalg::ComplexMatrix<f64>;
pub type DensityMatrix64 = qlinalg::DensityMatrix<f64>;
pub type KetState64 = qlinalg::KetState<f64>;
pub type ResponseSample64 = response::ResponseSample<f64>;
pub type FitResult64 = response::FitResult<f64>;
pub type AtomCavityModel64 = masterq::AtomCavityModel<f64>;
pub type PhaseTable64 = qpg::PhaseTable<f64>;
pub type QpgAngles64 = qpg::QpgAngles<f64>;
pub type TwoModeState64 = qpg::TwoModeState<f64>;
pub type DecoherenceMask64 = entangle::DecoherenceMask<f64>;
pub type ChshReport64 = entangle::ChshReport<f64>;

pub type RateSet32 = params::RateSet<f32>;
pub type ComplexMatrix32 = qlinalg::ComplexMatrix<f32>;
pub type DensityMatrix32 = qlinalg::DensityMatrix<f32>;
pub type QpgAngles32 = qpg::QpgAngles<f32>;
