//! Experiment harness around [`expsep_core`]: JSON datasets, TOML
//! experiment configs, CSV/JSON outputs and the subcommands of the
//! `expsep` binary.
//!
//! Seeding is hierarchical. Trial `t` of a run with base seed `b` uses
//! `derive_seed(b, t)`; its synthetic scene (if any) uses slot 0 under that
//! seed and the noise of line `i` at the `s`-th SNR uses slot `i` under slot
//! `s + 1`. Every output is therefore a pure function of the config and the
//! base seed, whatever the number of worker threads.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod pipeline;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use pipeline::Experiment;
