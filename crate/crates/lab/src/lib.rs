//! I/O, file formats, and command orchestration around the core solver:
//! configuration loading with digests, CSV series, binary checkpoints,
//! run manifests, theorem reports, SVG plots, and the self-test suite.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod digest;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod report;
pub mod selftest;
pub mod series;

pub use error::{LabError, Result};
