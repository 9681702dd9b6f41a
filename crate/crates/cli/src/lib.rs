//! Command-line front end: argument parsing, the persistent eigenbasis
//! cache and report emission.

mod app;
pub mod cache;
pub mod config;
pub mod emit;

pub use app::{dispatch, CACHE_ENV, EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
