//! File formats, statistical analysis, the parallel experiment runner and
//! the `mnb` command-line front end for the multi-node-bandit toolkit.
//!
//! Everything algorithmic lives in `mnb-core`; this crate adds the pieces
//! that need an operating system: CSV/JSON artifacts, grid description
//! files, a synthetic feed for the bundled example grid, closed-form
//! regression with significance tables, and rayon-parallel experiment
//! execution with deterministic aggregation.

pub mod cli;
pub mod config;
pub mod costs_io;
pub mod error;
pub mod grid_io;
pub mod protocol;
pub mod regression;
pub mod runner;
pub mod synth;

pub use error::LabError;
