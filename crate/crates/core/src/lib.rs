//! Numerics for lower Hessenberg branching processes: extinction
//! probabilities, embedded-process moments, fixed points of the progeny
//! generating vector, regime classification and a Monte Carlo oracle.

pub mod criteria;
pub mod embedded;
pub mod error;
pub mod fixedpoints;
pub mod generating;
pub mod model;
pub mod montecarlo;
pub mod sweep;

pub use error::{ModelError, NumericError};
pub use model::{load_model, LhbpModel};
