//! Command-line surface for `hermite-gabor`: configuration, validation and runs.
//!
//! Precedence is total: built-in defaults, then the `--config` JSON file, then
//! flags. The only environment variable consulted is `OUTPUT_DIR`.

pub mod args;
pub mod config;
pub mod run;

pub use config::{validate, Command, Diagnostic, DiagnosticKind, Format, RunConfig};
pub use run::{execute, run, CliError};
