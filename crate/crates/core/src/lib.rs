//! Somewhat-homomorphic encryption over the integers and blind applications
//! built from encrypted-bit circuits.

pub mod bigmul;
pub mod circuits;
pub mod error;
pub mod eval;
pub mod lbs;
pub mod meter;
pub mod query;
pub mod rng;
pub mod route;
pub mod she;
pub mod vod;

pub use error::{Error, Result};
pub use eval::Evaluator;
pub use meter::{GateKind, OpCounter};
