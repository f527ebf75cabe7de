//! Front end of the `hybeam` simulator: scenario files, CSV output and SVG
//! plots.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod plot;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid scenario, override or plot request.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed input data, such as a CSV with the wrong schema.
    #[error("invalid input: {0}")]
    Data(String),
    /// Too many realizations failed numerically.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

impl From<hybeam::Error> for CliError {
    fn from(e: hybeam::Error) -> Self {
        use hybeam::Error as E;
        match e {
            E::SingularChannel | E::SingularSubcarrier { .. } | E::SingularNoise { .. } | E::Indefinite { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}
