//! File formats, configuration and pipeline stages of the `emowalk`
//! command-line tool.

pub mod atomic;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod model_io;
pub mod pipeline;
pub mod report;
pub mod results;

pub use error::{Error, ExitKind, Result};
