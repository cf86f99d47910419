//! Sparse line-spectral estimation with integrated wideband dictionaries.

pub mod dict;
pub mod error;
pub mod numerics;
pub mod sim;
pub mod solve;
pub mod zoom;

pub use error::{Error, Result};
pub use numerics::{CMatrix, RngSeed, C64};
