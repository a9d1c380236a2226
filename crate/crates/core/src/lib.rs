//! Simulation of a flux-tunable qubit–resonator circuit whose coupling is
//! switched periodically between longitudinal and transverse form.
//!
//! The modules are generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod band;
pub mod circuit;
pub mod drive;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod propagate;
pub mod scalar;

pub use circuit::{default_constants, Regime};
pub use drive::DriveKind;
pub use error::{Error, Result};
pub use hamiltonian::Qubit;
pub use propagate::Method;
pub use scalar::Real;

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type C64 = num_complex::Complex<f64>;

pub type CircuitConstants = circuit::CircuitConstants<f64>;
pub type InstantParams = circuit::InstantParams<f64>;
pub type DriveWaveform = drive::DriveWaveform<f64>;
pub type HilbertSpace = hamiltonian::HilbertSpace<f64>;
pub type OperatorMatrix = linalg::OperatorMatrix<f64>;
pub type StateVector = linalg::StateVector<f64>;
pub type EvolutionConfig = propagate::EvolutionConfig<f64>;
pub type Trajectory = propagate::Trajectory<f64>;
pub type SweepResult = analysis::SweepResult<f64>;
