//! Fractional-order Bernstein wavelet collocation for variable-order
//! fractional Duffing–Van der Pol oscillators.

pub mod basis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod fracops;
pub mod linalg;
pub mod reference;
pub mod solver;
pub mod verify;
pub mod special;

pub use error::{Error, Result};
