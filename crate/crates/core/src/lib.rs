pub mod error;
pub mod harness;
pub mod numerics;
pub mod problems;
pub mod rng;
pub mod saddle;
pub mod solvers;
pub mod sampling;
pub mod subproblem;

pub use error::{Error, Result};
