//! Detector bank, event accumulation and derived metrics.

pub mod fit;
pub mod metrics;
pub mod summary;

pub use fit::{fit_sinusoid, visibility_fit, FitBasis, SinusoidFit};
pub use metrics::{
    complementarity, contrast_sigma, fringe_w, gra_alpha, p_counts, p_ledger, which_way_p,
    Complementarity, Metrics,
};
pub use summary::{
    accumulate, ArmTally, DetectionSummary, DetectorCounts, HistogramSpec, Pickup, Quadratic,
    WindowOutcome,
};
