//! Numerical laboratory for mass equidistribution of holomorphic Hecke
//! eigenforms on the modular surface.

pub mod eigenforms;
pub mod massmeasure;
pub mod error;
pub mod qseries;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use rug;
