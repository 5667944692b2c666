//! Free-Kummer and free-Poisson laws, subordination of free multiplicative
//! convolution, Boolean-cumulant oracles and the HV map.

#![forbid(unsafe_code)]

pub mod error;
pub mod partitions;
pub mod series;
pub mod transforms;
pub mod distributions;
pub mod subordination;
pub mod hv;
pub mod cli;

pub use error::{Error, Result};
