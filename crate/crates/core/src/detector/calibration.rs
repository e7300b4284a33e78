use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared as ChiSquaredLaw, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::child_rng;

/// Trajectories are split into this many independently seeded chunks, so
/// the table does not depend on the number of worker threads.
const CHUNKS: usize = 64;

/// Alarm thresholds `h_1, ..., h_W` indexed by windows since the last reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    /// Per-window false-alarm probability, `1 / ARL0`.
    pub alpha: f64,
    /// Number of tabulated windows `W`; later windows reuse `h_W`.
    pub horizon: usize,
    pub num_sims: usize,
    pub seed: u64,
    /// Dimension `M` of the embedding the table was calibrated for.
    pub dims: usize,
    /// Offset `q` used during calibration.
    pub offset: f64,
    pub h: Vec<f64>,
}

impl ThresholdTable {
    /// `h_w` for `w >= 1`.
    pub fn threshold(&self, w: usize) -> f64 {
        let i = w.clamp(1, self.h.len()) - 1;
        self.h[i]
    }

    pub fn target_arl0(&self) -> f64 {
        1.0 / self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.h.is_empty() || self.h.len() != self.horizon {
            return Err(Error::invalid("threshold list must have `horizon` entries"));
        }
        if self.h.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::invalid("thresholds must be finite and nonnegative"));
        }
        if !(self.offset.is_finite() && self.offset >= 0.0) {
            return Err(Error::invalid("offset must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Square root of the third quartile of the chi-square law with `m`
/// degrees of freedom.
pub fn default_offset(m: usize) -> Result<f64> {
    Ok(chi_square_quantile(m, 0.75)?.sqrt())
}

/// Quantile of the chi-square law with `m` degrees of freedom.
pub fn chi_square_quantile(m: usize, p: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("chi-square needs at least one degree of freedom"));
    }
    let law = ChiSquaredLaw::new(m as f64).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(law.inverse_cdf(p))
}

/// Table length used when none is given: twenty times the target ARL0.
pub fn default_horizon(arl0: usize) -> usize {
    20 * arl0
}

/// Monte-Carlo thresholds for the `M`-dimensional detector under the null,
/// where squared window statistics are i.i.d. chi-square with `m` degrees
/// of freedom.
pub fn calibrate_thresholds(m: usize, arl0: usize, num_sims: usize, horizon: usize, seed: u64) -> Result<ThresholdTable> {
    let offset = default_offset(m)?;
    let law = ChiSquared::new(m as f64).map_err(|e| Error::invalid(e.to_string()))?;
    let sampler = move |rng: &mut ChaCha8Rng| law.sample(rng).sqrt();
    calibrate_with(&sampler, m, offset, arl0, num_sims, horizon, seed)
}

/// Calibration against an arbitrary null law of the window statistic.
///
/// All trajectories start at zero and follow the cumulative recursion. At
/// window `w` the threshold is the `1 - alpha` quantile of the current
/// values; trajectories above it are counted as alarms and restarted from
/// zero, keeping the population size fixed.
pub fn calibrate_with<S>(
    sampler: &S,
    dims: usize,
    offset: f64,
    arl0: usize,
    num_sims: usize,
    horizon: usize,
    seed: u64,
) -> Result<ThresholdTable>
where
    S: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if arl0 < 2 {
        return Err(Error::invalid("target ARL0 must be at least 2"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let alpha = 1.0 / arl0 as f64;
    let required = 100 * arl0;
    if num_sims < required {
        return Err(Error::InsufficientSimulations {
            available: num_sims,
            required,
        });
    }

    let chunk_len = num_sims.div_ceil(CHUNKS);
    let mut chunks: Vec<(ChaCha8Rng, Vec<f64>)> = (0..num_sims)
        .step_by(chunk_len)
        .enumerate()
        .map(|(i, start)| {
            let len = chunk_len.min(num_sims - start);
            (child_rng(seed, i as u64), vec![0.0; len])
        })
        .collect();

    let rank = ((num_sims - 1) as f64 * (1.0 - alpha)).ceil() as usize;
    let mut scratch = vec![0.0; num_sims];
    let mut h = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        chunks.par_iter_mut().for_each(|(rng, s)| {
            for v in s.iter_mut() {
                *v = (*v + sampler(rng) - offset).max(0.0);
            }
        });
        let mut at = 0;
        for (_, s) in &chunks {
            scratch[at..at + s.len()].copy_from_slice(s);
            at += s.len();
        }
        let (_, hw, _) = scratch.select_nth_unstable_by(rank, |a, b| a.total_cmp(b));
        let hw = *hw;
        h.push(hw);
        chunks.par_iter_mut().for_each(|(_, s)| {
            for v in s.iter_mut() {
                if *v > hw {
                    *v = 0.0;
                }
            }
        });
    }

    Ok(ThresholdTable {
        alpha,
        horizon,
        num_sims,
        seed,
        dims,
        offset,
        h,
    })
}

/// Sampler drawing uniformly from a finite set of observed statistics.
pub fn empirical_sampler(values: Vec<f64>) -> Result<impl Fn(&mut ChaCha8Rng) -> f64 + Sync> {
    if values.is_empty() {
        return Err(Error::invalid("empirical sampler needs at least one value"));
    }
    Ok(move |rng: &mut ChaCha8Rng| values[rng.random_range(0..values.len())])
}
