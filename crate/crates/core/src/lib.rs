//! Rate and fidelity engine for quantum repeaters built on entangled coherent states.

pub mod analytic;
pub mod chain_sim;
pub mod error;
pub mod fock;
pub mod optimizer;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use fock::{cat_state, coherent_state, DetectionModel, Parity};
pub use scalar::Real;

pub type FockVector64 = fock::FockVector<f64>;
pub type FockVector32 = fock::FockVector<f32>;
pub type DensityOperator64 = fock::DensityOperator<f64>;
pub type DensityOperator32 = fock::DensityOperator<f32>;
pub type LinkParams64 = analytic::LinkParams<f64>;
pub type LinkParams32 = analytic::LinkParams<f32>;
pub type MixedLinkState64 = analytic::MixedLinkState<f64>;
pub type RateReport64 = analytic::RateReport<f64>;
