//! File formats, command-line pipeline and benchmark harness around
//! `lcd-core`.

#![deny(missing_docs)]

pub mod bench;
pub mod cli;
mod error;
pub mod formats;
pub mod manifest;
pub mod outputs;

pub use error::{Error, Result, EXIT_BUDGET, EXIT_INTERNAL, EXIT_OK, EXIT_VALIDATION};
