//! Empirical checks of the distance bounds on random tiny graphs, written
//! to `bounds.json`.

use graphdrift::detector::fit_baseline;
use graphdrift::embedding::{classical_scaling, embed_identified, frobenius_distance, u_transform};
use graphdrift::ged::{ExactGed, GraphDistance};
use graphdrift::rng::{derive_seed, rng_from};
use graphdrift::theory::{
    check_distance_chain, check_frechet_euclidean, check_lemma2, check_lemma4, estimate_v2, random_identified_graph,
    random_labelled_graph, BoundReport, FrechetReport, Lemma4Constants, V2Report, SLACK,
};
use graphdrift::{AttributedGraph, BipartiteGed, CostModel, IdentifiedGraph, PrototypeSet};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const BOUNDS_FILE: &str = "bounds.json";

const ALPHABET: [&str; 3] = ["A", "B", "C"];
const VERTICES: (usize, usize) = (1, 5);
const EDGE_P: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryOptions {
    pub pairs: usize,
    pub prototypes: usize,
    /// Graphs used to estimate the covariance.
    pub covariance_sample: usize,
    /// Window size entering the covariance scale.
    pub n: usize,
    pub universe: usize,
    pub identified_prototypes: usize,
    pub frechet_trials: usize,
    pub v2_sample: usize,
    pub v2_resample: usize,
    pub v2_resamples: usize,
    pub seed: u64,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        Self {
            pairs: 500,
            prototypes: 4,
            covariance_sample: 300,
            n: 5,
            universe: 6,
            identified_prototypes: 20,
            frechet_trials: 10_000,
            v2_sample: 40,
            v2_resample: 10,
            v2_resamples: 200,
            seed: 1,
        }
    }
}

/// Metric axioms of both distances on random triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GedAudit {
    pub triples: usize,
    pub exact_identity_violations: usize,
    pub exact_symmetry_violations: usize,
    pub exact_triangle_violations: usize,
    pub bipartite_below_exact: usize,
    pub bipartite_triangle_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub options: TheoryOptions,
    pub ged: GedAudit,
    pub lemma2: BoundReport,
    pub distance_chain: BoundReport,
    pub lemma4: BoundReport,
    pub lemma4_homogeneous: BoundReport,
    pub frechet: Vec<FrechetReport>,
    pub v2: V2Report,
}

fn labelled(seed: u64, count: usize) -> Vec<AttributedGraph> {
    let mut rng = rng_from(seed);
    (0..count)
        .map(|_| random_labelled_graph(&mut rng, VERTICES, &ALPHABET, EDGE_P))
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SLACK * (1.0 + a.abs().max(b.abs()))
}

pub fn ged_audit(triples: usize, seed: u64) -> graphdrift::Result<GedAudit> {
    let cost = CostModel::<f64>::default();
    let exact = ExactGed::new(cost);
    let bip = BipartiteGed::new(cost);
    let graphs = labelled(seed, 3 * triples);
    let rows: Vec<[bool; 5]> = graphs
        .par_chunks_exact(3)
        .map(|t| {
            let (a, b, c) = (&t[0], &t[1], &t[2]);
            let e = |x, y| exact.distance(x, y);
            let p = |x, y| bip.distance(x, y);
            let (eab, eba, ebc, eac) = (e(a, b)?, e(b, a)?, e(b, c)?, e(a, c)?);
            let (pab, pbc, pac) = (p(a, b)?, p(b, c)?, p(a, c)?);
            Ok([
                e(a, a)? != 0.0,
                !close(eab, eba),
                eac > eab + ebc + SLACK * (1.0 + eac),
                pab < eab - SLACK * (1.0 + eab) || pbc < ebc - SLACK * (1.0 + ebc),
                pac > pab + pbc + SLACK * (1.0 + pac),
            ])
        })
        .collect::<graphdrift::Result<_>>()?;
    let count = |k: usize| rows.iter().filter(|r| r[k]).count();
    Ok(GedAudit {
        triples: rows.len(),
        exact_identity_violations: count(0),
        exact_symmetry_violations: count(1),
        exact_triangle_violations: count(2),
        bipartite_below_exact: count(3),
        bipartite_triangle_violations: count(4),
    })
}

/// Lower bounds of graph distances by embedding distances, with exact GED.
/// The covariance is the one the detector would fit on embedded random
/// graphs.
pub fn check_attributed_bounds(opts: &TheoryOptions) -> graphdrift::Result<(BoundReport, BoundReport)> {
    let d = ExactGed::new(CostModel::<f64>::default());
    let protos = labelled(derive_seed(opts.seed, 10), opts.prototypes);
    let set = PrototypeSet::from_graphs(protos, &d)?;
    let sample = labelled(derive_seed(opts.seed, 11), opts.covariance_sample);
    let ys: Vec<DVector<f64>> = sample
        .par_iter()
        .map(|g| Ok(graphdrift::embedding::embed(g, &set, &d)?.into_inner()))
        .collect::<graphdrift::Result<_>>()?;
    let model = fit_baseline(&ys, opts.n)?;
    let graphs = labelled(derive_seed(opts.seed, 12), 2 * opts.pairs);
    let pairs: Vec<_> = graphs.chunks_exact(2).map(|p| (p[0].clone(), p[1].clone())).collect();
    Ok((
        check_lemma2(&pairs, &set, model.sigma(), &d)?,
        check_distance_chain(&pairs, &set, &d)?,
    ))
}

/// Two-sided bounds for identified graphs; the covariance of `u` is
/// estimated from random graphs over the same universe.
pub fn check_identified_bounds(
    opts: &TheoryOptions,
    constants: Lemma4Constants,
) -> graphdrift::Result<BoundReport> {
    let mut rng = rng_from(derive_seed(opts.seed, 20));
    let protos: Vec<IdentifiedGraph<f64>> = (0..opts.identified_prototypes)
        .map(|_| random_identified_graph(&mut rng, opts.universe))
        .collect();
    let m = protos.len();
    let mut dist = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            dist[(i, j)] = frobenius_distance(&protos[i], &protos[j])?;
        }
    }
    let model = classical_scaling(&dist, 1e-9)?;
    let us: Vec<DVector<f64>> = (0..opts.covariance_sample)
        .map(|_| {
            let g = random_identified_graph(&mut rng, opts.universe);
            u_transform(&embed_identified(&g, &protos)?, &model)
        })
        .collect::<graphdrift::Result<_>>()?;
    let baseline = fit_baseline(&us, opts.n)?;
    let pairs: Vec<_> = (0..opts.pairs)
        .map(|_| {
            (
                random_identified_graph(&mut rng, opts.universe),
                random_identified_graph(&mut rng, opts.universe),
            )
        })
        .collect();
    check_lemma4(&pairs, &protos, &model, baseline.sigma(), constants)
}

pub fn validate_theory(opts: &TheoryOptions) -> graphdrift::Result<TheoryReport> {
    let ged = ged_audit(opts.pairs, derive_seed(opts.seed, 1))?;
    let (lemma2, distance_chain) = check_attributed_bounds(opts)?;
    let lemma4 = check_identified_bounds(opts, Lemma4Constants::Stated)?;
    let lemma4_homogeneous = check_identified_bounds(opts, Lemma4Constants::Homogeneous)?;
    let frechet = [2, 5, 20]
        .iter()
        .map(|&n| check_frechet_euclidean(n, 3, opts.frechet_trials, derive_seed(opts.seed, 30 + n as u64)))
        .collect::<graphdrift::Result<_>>()?;

    let d = ExactGed::new(CostModel::<f64>::default());
    let sample = labelled(derive_seed(opts.seed, 40), opts.v2_sample);
    let set = PrototypeSet::from_graphs(sample[..opts.prototypes].to_vec(), &d)?;
    let v2 = estimate_v2(
        &sample,
        &set,
        &d,
        opts.v2_resample,
        opts.v2_resamples,
        &[0.5, 1.0, 2.0, 4.0, 8.0],
        derive_seed(opts.seed, 41),
    )?;
    Ok(TheoryReport {
        options: *opts,
        ged,
        lemma2,
        distance_chain,
        lemma4,
        lemma4_homogeneous,
        frechet,
        v2,
    })
}
