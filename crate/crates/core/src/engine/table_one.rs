//! All five models at their defaults.

use super::{derive_seed, run, RunResult, RunSpec};
use crate::error::Result;
use crate::models::{CountMode, ModelKind};

/// Default run of `model` in the single-photon regime.
pub fn table_one_spec(model: ModelKind, seed: u64, n_windows: u64) -> RunSpec {
    let mut spec = RunSpec::new(model, seed);
    spec.stream.n_windows = n_windows;
    spec.count_mode = CountMode::Exact;
    spec
}

/// One run per model, in table order, each with its own derived seed.
pub fn table_one(seed: u64, n_windows: u64) -> Result<Vec<RunResult>> {
    ModelKind::ALL
        .into_iter()
        .enumerate()
        .map(|(i, m)| run(&table_one_spec(m, derive_seed(seed, i as u64), n_windows)))
        .collect()
}
