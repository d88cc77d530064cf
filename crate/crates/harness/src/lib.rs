//! Command-line harness for `ncsc-core`: instance files, experiment suites,
//! CSV/SVG output and the property suite.

pub mod cli;
pub mod error;
pub mod output;
pub mod spec_file;
pub mod suites;
pub mod svg;
pub mod verify;

pub use cli::cli_main;
pub use error::{HarnessError, HarnessResult};
