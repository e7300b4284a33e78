//! Experiment protocol: sample training sets, select prototypes, fit the
//! nominal model, calibrate thresholds, simulate streams, score alarms.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use graphdrift::baselines::{fit_scalar_baseline, ScalarCalibration, ScalarFeature};
use graphdrift::detector::{
    calibrate_thresholds, default_horizon, fit_baseline, run_on_statistics, trace_statistics, window_statistics,
    TracePoint,
};
use graphdrift::embedding::{embed, k_centres};
use graphdrift::rng::{derive_seed, rng_from};
use graphdrift::stream::{aggregate, bootstrap_indices, compute_metrics, RunMetrics, RunSample, StreamConfig};
use graphdrift::{AttributedGraph, BipartiteGed, DissimilarityVector, Error, ExactGed, GraphDistance, ThresholdTable};
use log::{info, warn};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DatasetSource, DetectorKind, DistanceKind, ExperimentSpec};
use crate::gxl::{load_gxl_collection, DatasetSchema};
use crate::synthetic::{generate_density, generate_synthetic};

/// Seed streams derived from the experiment seed.
const DATA_STREAM: u64 = 0;
const CALIBRATION_STREAM: u64 = 1;
const REPLICATE_STREAM: u64 = 2;
const AGGREGATE_STREAM: u64 = 3;

/// Monte-Carlo trajectories for calibrating each scalar baseline.
pub const BASELINE_NUM_SIMS: usize = 100_000;

/// Where to find data and put artifacts.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub dataset_root: Option<PathBuf>,
    /// Threshold tables are cached here when set.
    pub out_dir: Option<PathBuf>,
}

/// Graph collections on either side of the change.
#[derive(Debug, Clone)]
pub struct Collections {
    pub nominal: Vec<AttributedGraph>,
    pub non_nominal: Vec<AttributedGraph>,
}

pub fn load_classes(spec: &ExperimentSpec, ctx: &RunContext) -> anyhow::Result<BTreeMap<String, Vec<AttributedGraph>>> {
    let seed = derive_seed(spec.seed, DATA_STREAM);
    match &spec.dataset {
        DatasetSource::Iam { path, schema } => {
            let root = ctx
                .dataset_root
                .as_deref()
                .context("IAM datasets need --dataset-root or GRAPHDRIFT_DATA")?;
            let schema = DatasetSchema::resolve(schema)?;
            let dir = root.join(path);
            Ok(load_gxl_collection(&dir, &schema).with_context(|| format!("loading {}", dir.display()))?)
        }
        DatasetSource::Synthetic(s) => generate_synthetic(&s.spec, s.per_class, seed),
        DatasetSource::Density(s) => generate_density(s.vertices, &s.classes, s.per_class, seed),
    }
}

fn union(classes: &BTreeMap<String, Vec<AttributedGraph>>, names: &[String]) -> anyhow::Result<Vec<AttributedGraph>> {
    let mut out = Vec::new();
    for name in names {
        match classes.get(name) {
            Some(g) => out.extend(g.iter().cloned()),
            None => bail!("class {name:?} not in dataset (have {:?})", classes.keys().collect::<Vec<_>>()),
        }
    }
    if out.is_empty() {
        bail!("collection {names:?} is empty");
    }
    Ok(out)
}

pub fn collections(spec: &ExperimentSpec, ctx: &RunContext) -> anyhow::Result<Collections> {
    let classes = load_classes(spec, ctx)?;
    Ok(Collections {
        nominal: union(&classes, &spec.nominal_classes)?,
        non_nominal: union(&classes, &spec.non_nominal_classes)?,
    })
}

/// One replicate's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub run_id: usize,
    pub seed: u64,
    pub sample: RunSample,
    #[serde(skip)]
    pub trace: Option<Vec<TracePoint<f64>>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    pub stream: StreamConfig,
    pub replicates: Vec<ReplicateResult>,
    /// Present with at least two replicates.
    pub metrics: Option<RunMetrics>,
    /// Replicates that failed, with their error.
    pub failures: Vec<(usize, String)>,
}

fn stream_config(spec: &ExperimentSpec, seed: u64) -> StreamConfig {
    StreamConfig::new(spec.effective_n(), spec.arl0_target, seed)
}

/// File name of a cached threshold table.
pub fn thresholds_file(m: usize, arl0: usize) -> String {
    format!("thresholds_{m}_{arl0}.json")
}

/// Loads a cached table matching the request or calibrates and caches it.
pub fn thresholds(m: usize, arl0: usize, num_sims: usize, seed: u64, cache: Option<&Path>) -> anyhow::Result<ThresholdTable> {
    let horizon = default_horizon(arl0);
    let path = cache.map(|d| d.join(thresholds_file(m, arl0)));
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        let text = std::fs::read_to_string(p)?;
        match serde_json::from_str::<ThresholdTable>(&text) {
            Ok(t) if t.num_sims == num_sims && t.seed == seed && t.horizon == horizon && t.dims == m => {
                t.validate()?;
                info!("using cached thresholds {}", p.display());
                return Ok(t);
            }
            _ => info!("cached thresholds {} do not match; recalibrating", p.display()),
        }
    }
    info!("calibrating thresholds for M = {m}, ARL0 = {arl0} with {num_sims} trajectories");
    let table = calibrate_thresholds(m, arl0, num_sims, horizon, seed)?;
    if let Some(p) = path {
        std::fs::create_dir_all(p.parent().unwrap())?;
        std::fs::write(&p, serde_json::to_string_pretty(&table)?)?;
    }
    Ok(table)
}

fn distance(kind: DistanceKind, spec: &ExperimentSpec) -> Box<dyn GraphDistance<f64>> {
    let cost = spec.cost_model.model();
    match kind {
        DistanceKind::Bipartite => Box::new(BipartiteGed::new(cost)),
        DistanceKind::Exact => Box::new(ExactGed::new(cost)),
    }
}

/// Runs every replicate of `spec`.
pub fn run_experiment(spec: &ExperimentSpec, ctx: &RunContext) -> anyhow::Result<ExperimentOutcome> {
    spec.validate()?;
    let data = collections(spec, ctx)?;
    let table = match spec.detector {
        DetectorKind::Main | DetectorKind::M1 => Some(thresholds(
            spec.effective_m(),
            spec.arl0_target,
            spec.num_sims,
            derive_seed(spec.seed, CALIBRATION_STREAM),
            ctx.out_dir.as_deref(),
        )?),
        _ => None,
    };
    let d = distance(spec.distance, spec);
    let base = derive_seed(spec.seed, REPLICATE_STREAM);
    let results: Vec<anyhow::Result<ReplicateResult>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(base, r as u64);
            run_replicate(spec, &data, table.as_ref(), d.as_ref(), r, seed)
                .with_context(|| format!("replicate {r}"))
        })
        .collect();

    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(v) => replicates.push(v),
            Err(e) => failures.push((r, format!("{e:#}"))),
        }
    }
    let samples: Vec<RunSample> = replicates.iter().map(|r| r.sample.clone()).collect();
    let metrics = if samples.len() >= 2 {
        Some(aggregate(&samples, derive_seed(spec.seed, AGGREGATE_STREAM))?)
    } else {
        None
    };
    Ok(ExperimentOutcome {
        spec: spec.clone(),
        stream: stream_config(spec, 0),
        replicates,
        metrics,
        failures,
    })
}

fn draw(rng: &mut impl Rng, len: usize, count: usize) -> Vec<usize> {
    (0..count).map(|_| rng.random_range(0..len)).collect()
}

fn run_replicate(
    spec: &ExperimentSpec,
    data: &Collections,
    table: Option<&ThresholdTable>,
    d: &dyn GraphDistance<f64>,
    run_id: usize,
    seed: u64,
) -> anyhow::Result<ReplicateResult> {
    let mut rng = rng_from(seed);
    let tc = draw(&mut rng, data.nominal.len(), spec.prototype_sample);
    let tp = draw(&mut rng, data.nominal.len(), spec.covariance_sample);
    let cfg = stream_config(spec, derive_seed(seed, 1));
    let stream = bootstrap_indices(data.nominal.len(), data.non_nominal.len(), &cfg)?;
    let keep_trace = run_id == 0;

    let (alarms, trace) = match spec.detector {
        DetectorKind::Main | DetectorKind::M1 => {
            let table = table.expect("main detector has a threshold table");
            let m = spec.effective_m();
            let n = spec.effective_n();
            let mut distinct = tc.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < m {
                bail!("only {} distinct training graphs for {m} prototypes", distinct.len());
            }
            let training: Vec<AttributedGraph> = distinct.iter().map(|&i| data.nominal[i].clone()).collect();
            let prototypes = k_centres(&training, m, d, spec.kcentres_repeats, derive_seed(seed, 2))?;

            let mut need_nom = vec![false; data.nominal.len()];
            let mut need_non = vec![false; data.non_nominal.len()];
            for &i in &tp {
                need_nom[i] = true;
            }
            for s in &stream {
                if s.nominal {
                    need_nom[s.index] = true;
                } else {
                    need_non[s.index] = true;
                }
            }
            let embed_needed = |graphs: &[AttributedGraph], need: &[bool]| -> graphdrift::Result<Vec<Option<DissimilarityVector<f64>>>> {
                graphs
                    .par_iter()
                    .zip(need)
                    .map(|(g, &k)| if k { embed(g, &prototypes, d).map(Some) } else { Ok(None) })
                    .collect()
            };
            let nom = embed_needed(&data.nominal, &need_nom)?;
            let non = embed_needed(&data.non_nominal, &need_non)?;
            let tp_vecs: Vec<&DissimilarityVector<f64>> = tp.iter().map(|&i| nom[i].as_ref().unwrap()).collect();
            let model = fit_baseline(&tp_vecs, n)?;
            let stream_vecs: Vec<&DissimilarityVector<f64>> = stream
                .iter()
                .map(|s| if s.nominal { &nom[s.index] } else { &non[s.index] }.as_ref().unwrap())
                .collect();
            let stats = window_statistics(&stream_vecs, &model, n)?;
            if keep_trace {
                let (a, t) = trace_statistics(stats, table.offset, table);
                (a, Some(t))
            } else {
                (run_on_statistics(stats, table.offset, table), None)
            }
        }
        DetectorKind::Density | DetectorKind::SpectralGap => {
            let feature = if spec.detector == DetectorKind::Density {
                ScalarFeature::EdgeDensity
            } else {
                ScalarFeature::SpectralGap
            };
            let nom = features(feature, &data.nominal);
            let non = features(feature, &data.non_nominal);
            let training: Vec<f64> = tc.iter().chain(&tp).map(|&i| nom[i]).collect();
            let calibration = ScalarCalibration {
                arl0: spec.arl0_target,
                num_sims: BASELINE_NUM_SIMS,
                horizon: default_horizon(spec.arl0_target),
                seed: derive_seed(seed, 3),
            };
            let model = fit_scalar_baseline(feature, &training, calibration)?;
            let stats: Vec<f64> = stream
                .iter()
                .map(|s| {
                    let v = if s.nominal { nom[s.index] } else { non[s.index] };
                    (v - model.expected).abs()
                })
                .collect();
            if keep_trace {
                let (a, t) = trace_statistics(stats, model.q_scalar, &model.thresholds);
                (a, Some(t))
            } else {
                (run_on_statistics(stats, model.q_scalar, &model.thresholds), None)
            }
        }
    };
    let sample = compute_metrics(&alarms, cfg.tau_window(), cfg.horizon(), cfg.n);
    Ok(ReplicateResult {
        run_id,
        seed,
        sample,
        trace,
    })
}

/// Feature values; graphs too small for the feature count as 0.
fn features(feature: ScalarFeature, graphs: &[AttributedGraph]) -> Vec<f64> {
    graphs
        .par_iter()
        .map(|g| match feature.evaluate::<f64>(g) {
            Ok(v) => v,
            Err(Error::DegenerateGraph { vertices }) => {
                warn!("{feature:?} undefined on a graph with {vertices} vertices; using 0");
                0.0
            }
            Err(e) => unreachable!("feature evaluation cannot fail otherwise: {e}"),
        })
        .collect()
}
