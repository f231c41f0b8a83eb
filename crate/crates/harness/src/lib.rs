//! Experiment orchestration, the exhaustive verification battery and report
//! output for `treelimit`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod seeding;
pub mod star_demo;
pub mod stats;

pub use error::{HarnessError, Result};
