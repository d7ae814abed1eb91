//! Scenario runner for turbulent-channel homodyne statistics: configuration
//! files, command dispatch and CSV output on top of `turbhd-core`.

pub mod config;
pub mod output;
pub mod run;
pub mod scenario;
pub mod tabulated;

pub use config::{Diagnostic, RawConfig};
pub use run::{header, run, RunError};
pub use scenario::{resolve, validate, Command, Scenario};
