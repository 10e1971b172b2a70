//! Moving frames, differential invariants and invariant conservation laws.

mod error;
pub mod groupaction;
pub mod invariantcalc;
pub mod jetspace;
pub mod movingframe;
pub mod noether;
pub mod problem;
pub mod sample;

pub use error::{CoreError, Result};
