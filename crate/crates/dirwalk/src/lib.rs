//! Simulation, statistics, reports and command-line tooling for
//! oriented-edge reinforced random walks and random walks in Dirichlet
//! environment.
//!
//! The exact model (weights, lattice frames, cylinder graphs, walkers and
//! exact oracles) lives in the `no_std` crate [`dirwalk_core`]; this crate
//! adds parallel Monte Carlo experiments, goodness-of-fit tests, JSON/text
//! reports, TOML run configurations, CSV/edge-list exports and the `dirwalk`
//! binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod export;
pub mod parallel;
pub mod report;
pub mod stats;

pub use dirwalk_core;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dirwalk_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("statistics error: {0}")]
    Stats(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("TOML error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Process exit status: 1 when an experiment could not produce a
    /// meaningful sample, 2 for invalid input or environment problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateSample(_) | Error::Stats(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
