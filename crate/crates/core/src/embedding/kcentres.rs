//! k-Centres prototype selection: cover the training graphs with `M` balls
//! of equal radius, restarting from random centres and keeping the restart
//! with the smallest radius.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rayon::prelude::*;

use super::PrototypeSet;
use crate::error::{Error, Result};
use crate::ged::{pairwise_distances, GraphDistance};
use crate::graph::AttributedGraph;
use crate::rng::child_rng;
use crate::scalar::Real;

/// Iteration cap per restart; the fixed point is normally reached in a few
/// steps, the cap only guards against tie-induced cycles.
pub const MAX_KCENTRES_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct KCentresOutcome<T> {
    /// Indices of the selected centres into the training set, in prototype order.
    pub centres: Vec<usize>,
    /// Largest distance from a training point to its nearest centre.
    pub radius: T,
    /// Final radius of every restart.
    pub restart_radii: Vec<T>,
    /// Radius after each assignment step, per restart.
    pub traces: Vec<Vec<T>>,
}

/// Selects `m` prototypes from `training` and returns them with their
/// pairwise distances and covering radius.
pub fn k_centres<T: Real, D: GraphDistance<T> + ?Sized>(
    training: &[AttributedGraph],
    m: usize,
    d: &D,
    repeats: usize,
    seed: u64,
) -> Result<PrototypeSet<T>> {
    check_sizes(training.len(), m, repeats)?;
    let dist = pairwise_distances(training, d)?;
    let outcome = k_centres_on_matrix(&dist, m, repeats, seed)?;
    let prototypes = outcome.centres.iter().map(|&i| training[i].clone()).collect();
    let pairwise = DMatrix::from_fn(m, m, |a, b| dist[(outcome.centres[a], outcome.centres[b])]);
    PrototypeSet::new(prototypes, pairwise, outcome.radius)
}

fn check_sizes(n: usize, m: usize, repeats: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("need at least one prototype"));
    }
    if m > n {
        return Err(Error::invalid(format!("{m} prototypes requested from {n} training graphs")));
    }
    if repeats == 0 {
        return Err(Error::invalid("k-Centres needs at least one restart"));
    }
    Ok(())
}

/// k-Centres on a precomputed symmetric distance matrix.
pub fn k_centres_on_matrix<T: Real>(
    dist: &DMatrix<T>,
    m: usize,
    repeats: usize,
    seed: u64,
) -> Result<KCentresOutcome<T>> {
    if !dist.is_square() {
        return Err(Error::invalid("distance matrix must be square"));
    }
    check_sizes(dist.nrows(), m, repeats)?;
    let runs: Vec<(Vec<usize>, T, Vec<T>)> = (0..repeats)
        .into_par_iter()
        .map(|r| single_restart(dist, m, seed, r as u64))
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.1 < runs[best].1 {
            best = i;
        }
    }
    Ok(KCentresOutcome {
        centres: runs[best].0.clone(),
        radius: runs[best].1,
        restart_radii: runs.iter().map(|r| r.1).collect(),
        traces: runs.into_iter().map(|r| r.2).collect(),
    })
}

fn single_restart<T: Real>(dist: &DMatrix<T>, m: usize, seed: u64, restart: u64) -> (Vec<usize>, T, Vec<T>) {
    let n = dist.nrows();
    let mut rng = child_rng(seed, restart);
    let mut centres: Vec<usize> = sample(&mut rng, n, m).into_vec();
    let mut trace = Vec::new();

    for _ in 0..MAX_KCENTRES_ITERATIONS {
        let mut clusters = assign(dist, &centres);
        if reseed_empty(dist, &mut centres, &clusters) {
            clusters = assign(dist, &centres);
        }
        trace.push(radius(dist, &centres, &clusters));

        let updated: Vec<usize> = centres
            .iter()
            .zip(&clusters)
            .map(|(&c, members)| if members.is_empty() { c } else { minimax_centre(dist, members) })
            .collect();
        if updated == centres {
            break;
        }
        centres = updated;
    }
    let clusters = assign(dist, &centres);
    let r = radius(dist, &centres, &clusters);
    (centres, r, trace)
}

/// Nearest-centre clusters; ties go to the lowest prototype position.
fn assign<T: Real>(dist: &DMatrix<T>, centres: &[usize]) -> Vec<Vec<usize>> {
    let mut clusters = vec![Vec::new(); centres.len()];
    for p in 0..dist.nrows() {
        let mut best = 0;
        for k in 1..centres.len() {
            if dist[(p, centres[k])] < dist[(p, centres[best])] {
                best = k;
            }
        }
        clusters[best].push(p);
    }
    clusters
}

/// Replaces centres that attract no point with the training point farthest
/// from all current centres. Returns whether anything changed.
fn reseed_empty<T: Real>(dist: &DMatrix<T>, centres: &mut [usize], clusters: &[Vec<usize>]) -> bool {
    let mut changed = false;
    for k in 0..centres.len() {
        if !clusters[k].is_empty() {
            continue;
        }
        let mut far = None;
        let mut far_d = T::zero();
        for p in 0..dist.nrows() {
            let near = centres
                .iter()
                .map(|&c| dist[(p, c)])
                .fold(T::infinity(), |a, b| if b < a { b } else { a });
            if near > far_d {
                far_d = near;
                far = Some(p);
            }
        }
        // every point already coincides with a centre: nothing to gain
        if let Some(p) = far {
            centres[k] = p;
            changed = true;
        }
    }
    changed
}

/// Training point minimising the largest distance to `members`; ties go to
/// the lowest training index.
fn minimax_centre<T: Real>(dist: &DMatrix<T>, members: &[usize]) -> usize {
    let mut best = 0;
    let mut best_val = T::infinity();
    for c in 0..dist.nrows() {
        let mut worst = T::zero();
        for &p in members {
            let v = dist[(c, p)];
            if v > worst {
                worst = v;
                if worst >= best_val {
                    break;
                }
            }
        }
        if worst < best_val {
            best_val = worst;
            best = c;
        }
    }
    best
}

fn radius<T: Real>(dist: &DMatrix<T>, centres: &[usize], clusters: &[Vec<usize>]) -> T {
    let mut r = T::zero();
    for (c, members) in centres.iter().zip(clusters) {
        for &p in members {
            let v = dist[(*c, p)];
            if v > r {
                r = v;
            }
        }
    }
    r
}
