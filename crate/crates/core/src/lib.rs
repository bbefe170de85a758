//! Hourly electricity dependence modelling: AR-GARCH marginals, R-vine
//! copulas and Kendall-scenario tail dependence.

pub mod bicop;
pub mod data;
pub mod error;
pub mod marginals;
pub mod numeric;
pub mod pipeline;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod taildep;
pub mod vine;

pub use error::{Error, Result};
