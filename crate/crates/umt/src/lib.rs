//! File formats, generators and the command-line front end for `umt-core`.

pub mod cli;
pub mod error;
pub mod gen;
pub mod io;
pub mod parallel;

pub use error::{Error, Result};
