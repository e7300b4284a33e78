//! Scalar topological baselines: a cumulative test on
//! `|phi(g_t) - E[phi]|` for one graph feature, one graph per window.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{calibrate_with, empirical_sampler, run_on_statistics, ThresholdTable};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFeature {
    EdgeDensity,
    SpectralGap,
}

impl ScalarFeature {
    pub fn evaluate<T: Real>(self, g: &AttributedGraph) -> Result<T> {
        match self {
            ScalarFeature::EdgeDensity => edge_density(g),
            ScalarFeature::SpectralGap => spectral_gap(g),
        }
    }
}

/// `|E| / (|V| (|V| - 1))` with undirected edges counted once.
pub fn edge_density<T: Real>(g: &AttributedGraph) -> Result<T> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(Error::DegenerateGraph { vertices: n });
    }
    Ok(T::from_usize_lossy(g.num_edges()) / T::from_usize_lossy(n * (n - 1)))
}

/// `|lambda_1| - |lambda_2|` for the two largest-magnitude Laplacian
/// eigenvalues of the undirected skeleton.
pub fn spectral_gap<T: Real>(g: &AttributedGraph) -> Result<T> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(Error::DegenerateGraph { vertices: n });
    }
    let eig = SymmetricEigen::new(g.laplacian::<T>()).eigenvalues;
    let mut mags: Vec<T> = eig.iter().map(|l| l.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let gap = mags[0] - mags[1];
    Ok(if gap > T::zero() { gap } else { T::zero() })
}

/// Fitted scalar detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarBaselineModel {
    pub feature: ScalarFeature,
    /// Training mean of the feature.
    pub expected: f64,
    pub q_scalar: f64,
    pub thresholds: ThresholdTable,
}

/// Calibration settings for [`fit_scalar_baseline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCalibration {
    pub arl0: usize,
    pub num_sims: usize,
    pub horizon: usize,
    pub seed: u64,
}

/// Fits a scalar detector from training feature values.
///
/// The expected value is the training mean; `q_scalar` is the third
/// quartile of the training residuals `|phi - E[phi]|`, and thresholds are
/// calibrated by resampling those residuals.
pub fn fit_scalar_baseline(
    feature: ScalarFeature,
    training: &[f64],
    calibration: ScalarCalibration,
) -> Result<ScalarBaselineModel> {
    if training.len() < 2 {
        return Err(Error::invalid("scalar baseline needs at least two training values"));
    }
    if training.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("training feature values must be finite"));
    }
    let expected = training.iter().sum::<f64>() / training.len() as f64;
    let mut residuals: Vec<f64> = training.iter().map(|v| (v - expected).abs()).collect();
    residuals.sort_by(f64::total_cmp);
    let q_scalar = quantile_sorted(&residuals, 0.75);
    let sampler = empirical_sampler(residuals)?;
    let thresholds = calibrate_with(
        &sampler,
        1,
        q_scalar,
        calibration.arl0,
        calibration.num_sims,
        calibration.horizon,
        calibration.seed,
    )?;
    Ok(ScalarBaselineModel {
        feature,
        expected,
        q_scalar,
        thresholds,
    })
}

/// Linearly interpolated quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Feature values of a batch, in input order.
pub fn feature_values(feature: ScalarFeature, graphs: &[AttributedGraph]) -> Result<Vec<f64>> {
    graphs.par_iter().map(|g| feature.evaluate::<f64>(g)).collect()
}

/// Runs the scalar detector on precomputed feature values.
pub fn run_scalar_on_values(values: &[f64], model: &ScalarBaselineModel) -> Vec<usize> {
    let stats = values.iter().map(|v| (v - model.expected).abs());
    run_on_statistics(stats, model.q_scalar, &model.thresholds)
}

/// Runs the scalar detector on a graph stream.
pub fn run_scalar_baseline(stream: &[AttributedGraph], model: &ScalarBaselineModel) -> Result<Vec<usize>> {
    if stream.is_empty() {
        return Err(Error::invalid("empty stream"));
    }
    let values = feature_values(model.feature, stream)?;
    Ok(run_scalar_on_values(&values, model))
}
