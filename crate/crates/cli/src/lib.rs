//! Command-line front end for the `qqlearn` library.

pub mod commands;
pub mod config;
pub mod environment;
pub mod error;
pub mod model_file;
pub mod output;
pub mod plot;
pub mod policy_file;

use std::path::Path;

pub use error::{CliError, Result, EXIT_FAILED, EXIT_OK, EXIT_USAGE};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
