//! Command-line front end: graph input formats and JSON output.

pub mod app;
pub mod error;
pub mod spec;
pub mod survey;

pub use app::run;
pub use error::CliError;
pub use spec::{graph_to_json, parse_spec};
