//! Sequential change detector.
//!
//! The stream of dissimilarity vectors is cut into non-overlapping windows
//! of `n` observations. Each window yields the Mahalanobis distance `s_w`
//! between its mean and the training mean; the cumulative statistic
//! `S_w = max(0, S_{w-1} + s_w - q)` raises an alarm when it exceeds the
//! tabulated threshold `h_w` and then restarts.

mod baseline;
mod calibration;
mod cusum;

pub use baseline::{fit_baseline, window_statistic, BaselineModel, MAX_CONDITION, SHRINKAGE};
pub use calibration::{
    calibrate_thresholds, calibrate_with, chi_square_quantile, default_horizon, default_offset, empirical_sampler,
    ThresholdTable,
};
pub use cusum::{
    cusum_step, run_detector, run_on_statistics, trace_statistics, window_statistics, DetectorState, TracePoint,
};
