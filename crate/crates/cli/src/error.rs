//! Errors of the command line driver.

use nframes_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("problem file: {0}")]
    Toml(String),
    #[error("problem: {0}")]
    Problem(#[source] CoreError),
    #[error("unknown task `{0}`")]
    Task(String),
    #[error("task `{task}` needs {what}")]
    Missing { task: String, what: &'static str },
    #[error("requested order {0} exceeds --max-order {1}")]
    Order(u32, u32),
}
