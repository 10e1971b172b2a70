//! Problem files, task execution and report output for the `nframes` binary.

pub mod error;
pub mod file;
pub mod report;
pub mod run;

pub use error::CliError;
pub use file::{ProblemFile, Task};
pub use report::{Format, Report, Status};
pub use run::{run, Options};

/// Directory holding the bundled problem files.
pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
