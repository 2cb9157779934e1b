//! Operational surface: synthetic data, file formats, run configuration,
//! clustering metrics and timing.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod simulate;
