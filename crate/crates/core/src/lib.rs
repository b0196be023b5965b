//! Dense weighted networks with sociability structure: generation,
//! estimation, bootstrap replicates and community detection.

pub mod bootstrap;
pub mod community;
pub mod error;
pub mod estimator;
pub mod generator;
pub mod hfunc;
pub mod model;
pub mod numeric;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
