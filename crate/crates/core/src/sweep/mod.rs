//! Experiment grid enumeration and the resumable, parallel sweep runner.
//!
//! Results go to an append-only CSV (columns as in
//! [`crate::train::RESULTS_HEADER`]). A sibling `<results>.manifest` lists the
//! key of every completed job, one per line; a job counts as done only when
//! both files record it. Failed jobs get a row with `ERROR` in the brier
//! column and the message in the percent_correct column.

pub mod config;
mod grid;
mod runner;

pub use config::parse_config;
pub use grid::{
    corpus_seed_for, enumerate_grid, init_seed_for, split_seed_for, JobKey, JobSpec, SweepGrid,
};
pub use runner::{
    error_row, execute_job, is_error_row, manifest_path, prepare_corpus, row_key, run_sweep,
    SweepOptions, SweepReport, ERROR_MARKER,
};
