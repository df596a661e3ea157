//! Command-line front end: JSON input specs in, reports and tables out.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

pub use commands::{run, Cli, Command, Format, Outcome, RunConfig};
pub use error::CliError;
pub use report::ReportDoc;
pub use spec::parse_input_spec;
