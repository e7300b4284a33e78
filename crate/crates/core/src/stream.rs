//! Stream simulation and figures of merit.
//!
//! A stream draws graphs uniformly with replacement from the nominal
//! collection before the change time `tau` and from the non-nominal one
//! afterwards. Metrics are computed from alarm indices in window units.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Change time and length of a simulated stream, in graph units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub n: usize,
    pub arl0_target: usize,
    pub tau: usize,
    pub length: usize,
    pub seed: u64,
}

impl StreamConfig {
    /// Change at `12 n ARL0`, stream length `20 n ARL0`.
    pub fn new(n: usize, arl0_target: usize, seed: u64) -> Self {
        Self {
            n,
            arl0_target,
            tau: 12 * n * arl0_target,
            length: 20 * n * arl0_target,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("window size must be at least 1".into()));
        }
        if self.tau == 0 || self.tau > self.length {
            return Err(Error::InvalidConfig(format!(
                "change time {} must lie in (0, {}]",
                self.tau, self.length
            )));
        }
        Ok(())
    }

    /// Last window entirely before the change; `tau` is rounded down to a
    /// window boundary.
    pub fn tau_window(&self) -> usize {
        self.tau / self.n
    }

    /// Number of complete windows in the stream.
    pub fn horizon(&self) -> usize {
        self.length / self.n
    }
}

/// Origin of one stream element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamDraw {
    pub nominal: bool,
    pub index: usize,
}

/// Indices into the two collections for every stream position.
pub fn bootstrap_indices(nominal_len: usize, non_nominal_len: usize, cfg: &StreamConfig) -> Result<Vec<StreamDraw>> {
    cfg.validate()?;
    if nominal_len == 0 || (non_nominal_len == 0 && cfg.tau < cfg.length) {
        return Err(Error::InvalidConfig("stream collections must be nonempty".into()));
    }
    let mut rng = rng_from(cfg.seed);
    Ok((0..cfg.length)
        .map(|t| {
            let nominal = t < cfg.tau;
            let len = if nominal { nominal_len } else { non_nominal_len };
            StreamDraw {
                nominal,
                index: rng.random_range(0..len),
            }
        })
        .collect())
}

/// The stream itself, as references into the collections.
pub fn bootstrap_stream<'a, G>(nominal: &'a [G], non_nominal: &'a [G], cfg: &StreamConfig) -> Result<Vec<&'a G>> {
    Ok(bootstrap_indices(nominal.len(), non_nominal.len(), cfg)?
        .into_iter()
        .map(|d| if d.nominal { &nominal[d.index] } else { &non_nominal[d.index] })
        .collect())
}

/// Figures of merit of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSample {
    /// Alarm windows within the horizon.
    pub alarms: Vec<usize>,
    /// Mean gap between pre-change alarms, starting from window 0.
    pub arl0_observed: Option<f64>,
    /// Mean gap between post-change alarms, the first measured from the
    /// change.
    pub dod: Option<f64>,
    pub detected: bool,
    /// Pre-change alarms per thousand graphs.
    pub fa1000: f64,
}

/// Metrics from sorted 1-based alarm windows. Window `w` is pre-change when
/// `w <= tau_window`; alarms past `horizon` are ignored.
///
/// A run without pre-change alarms has no observed ARL0; its delay is then
/// compared against `tau_window`, a lower bound on that run's ARL0.
pub fn compute_metrics(alarms: &[usize], tau_window: usize, horizon: usize, n: usize) -> RunSample {
    let alarms: Vec<usize> = alarms.iter().copied().filter(|&a| a <= horizon).collect();
    let split = alarms.partition_point(|&a| a <= tau_window);
    let (pre, post) = alarms.split_at(split);

    let arl0_observed = mean_gap(pre, 0);
    let dod = mean_gap(post, tau_window);
    let reference = arl0_observed.unwrap_or(tau_window as f64);
    let detected = dod.is_some_and(|d| d < reference);
    let steps = tau_window * n;
    let fa1000 = if steps == 0 { 0.0 } else { pre.len() as f64 * 1000.0 / steps as f64 };
    RunSample {
        alarms,
        arl0_observed,
        dod,
        detected,
        fa1000,
    }
}

fn mean_gap(alarms: &[usize], start: usize) -> Option<f64> {
    let last = *alarms.last()?;
    Some((last - start) as f64 / alarms.len() as f64)
}

/// Mean with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    /// Replicates that contributed a value.
    pub count: usize,
}

/// Mean with a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Aggregated figures of merit over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub replicates: usize,
    /// Detection rate with a Clopper-Pearson interval.
    pub dcr: Estimate,
    /// Percentile-bootstrap intervals; `None` when no replicate has a value.
    pub arl0: Option<Estimate>,
    pub dod: Option<Estimate>,
    pub fa1000: MeanStd,
}

/// Bootstrap resamples used for ARL0 and DoD intervals.
pub const BOOTSTRAP_RESAMPLES: usize = 10_000;

pub fn aggregate(samples: &[RunSample], seed: u64) -> Result<RunMetrics> {
    if samples.len() < 2 {
        return Err(Error::invalid("aggregation needs at least two replicates"));
    }
    let k = samples.iter().filter(|s| s.detected).count();
    let arl0: Vec<f64> = samples.iter().filter_map(|s| s.arl0_observed).collect();
    let dod: Vec<f64> = samples.iter().filter_map(|s| s.dod).collect();
    let fa: Vec<f64> = samples.iter().map(|s| s.fa1000).collect();
    let fa_mean = mean(&fa);
    let fa_std = (fa.iter().map(|v| (v - fa_mean).powi(2)).sum::<f64>() / (fa.len() - 1) as f64).sqrt();
    Ok(RunMetrics {
        replicates: samples.len(),
        dcr: clopper_pearson(k, samples.len()),
        arl0: bootstrap_mean(&arl0, BOOTSTRAP_RESAMPLES, seed),
        dod: bootstrap_mean(&dod, BOOTSTRAP_RESAMPLES, seed.wrapping_add(1)),
        fa1000: MeanStd {
            mean: fa_mean,
            std: fa_std,
        },
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Exact binomial 95% interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: usize, n: usize) -> Estimate {
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).unwrap().inverse_cdf(0.025)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).unwrap().inverse_cdf(0.975)
    };
    Estimate {
        mean: kf / nf,
        lo,
        hi,
        count: n,
    }
}

/// Percentile-bootstrap 95% interval of the mean.
pub fn bootstrap_mean(values: &[f64], resamples: usize, seed: u64) -> Option<Estimate> {
    if values.is_empty() {
        return None;
    }
    let m = mean(values);
    let mut rng = rng_from(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let s: f64 = (0..values.len()).map(|_| values[rng.random_range(0..values.len())]).sum();
            s / values.len() as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |p: f64| means[((resamples - 1) as f64 * p).round() as usize];
    Some(Estimate {
        mean: m,
        lo: at(0.025).min(m),
        hi: at(0.975).max(m),
        count: values.len(),
    })
}
