//! Monte Carlo simulation of a two-arm interferometer read out by fibers.
//!
//! Five models of light are run through the same apparatus: classical
//! particles, a classical wave, the quantum single-photon state, a pilot
//! wave, and light quanta that each take one arm but interfere within a
//! detection window. Each run reports which-way and fringe metrics and
//! checks them against the model's predicted row.
//!
//! ```
//! use lightquanta::engine::{run, RunSpec};
//! use lightquanta::models::ModelKind;
//!
//! let mut spec = RunSpec::new(ModelKind::QuantumComplementarity, 1);
//! spec.stream.n_windows = 2_000;
//! let r = run(&spec).unwrap();
//! assert!(r.metrics.w.unwrap() > 0.9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apparatus;
pub mod detection;
pub mod engine;
pub mod error;
pub mod io;
pub mod models;
pub mod numeric;
pub mod optics;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/apparatus.md")]
    mod apparatus {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/light_quanta.md")]
    mod light_quanta {}
    #[doc = include_str!("../../../book/src/runs.md")]
    mod runs {}
    #[doc = include_str!("../../../book/src/experiment_files.md")]
    mod experiment_files {}
}
