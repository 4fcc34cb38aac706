//! Emission spectra of a quantum-dot exciton coupled to a structured photonic
//! reservoir and an acoustic-phonon bath.

pub mod analysis_scenarios;
pub mod correlation_expansion;
pub mod cqed_me;
pub mod error;
pub mod linear_susceptibility;
pub mod phonon_bath;
pub mod photonic_reservoir;
pub mod reservoir_me;
pub mod units_numerics;

pub use error::{PolaronError, Result};
