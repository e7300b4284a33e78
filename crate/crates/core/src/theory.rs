//! Empirical checks of the distance bounds that relate graph space and the
//! embedding space, plus the Euclidean Fréchet identities.
//!
//! Graph-space Fréchet means are approximated by medoids: the minimiser of
//! the summed squared distance is searched among sample members only.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{embed, embed_identified, u_transform, DissimilarityVector, PrototypeSet, ScalingModel};
use crate::error::{Error, Result};
use crate::ged::GraphDistance;
use crate::graph::{AttributeValue, AttributedGraph, IdentifiedGraph};
use crate::rng::{child_rng, rng_from};
use crate::scalar::Real;

/// Relative slack granted to every inequality for floating-point rounding.
pub const SLACK: f64 = 1e-9;

/// Outcome of checking one inequality over a set of pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub pairs_tested: usize,
    pub violations: usize,
    /// Constants entering the bound (`c`, `C`, eigenvalues, `M`, ...).
    pub constants: BTreeMap<String, f64>,
    /// Smallest `rhs - lhs` over all pairs, before slack.
    pub worst_margin: f64,
}

impl BoundReport {
    fn new(name: &str) -> Self {
        Self {
            bound_name: name.to_string(),
            pairs_tested: 0,
            violations: 0,
            constants: BTreeMap::new(),
            worst_margin: f64::INFINITY,
        }
    }

    /// Records one pair whose inequalities `small <= large` must all hold.
    fn record(&mut self, links: &[(f64, f64)]) {
        self.pairs_tested += 1;
        let mut violated = false;
        for &(small, large) in links {
            let margin = large - small;
            self.worst_margin = self.worst_margin.min(margin);
            violated |= margin < -SLACK * (1.0 + large.abs().max(small.abs()));
        }
        if violated {
            self.violations += 1;
        }
    }

    fn constant(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Mahalanobis distance under an explicit covariance.
struct Metric<T: Real> {
    inverse: DMatrix<T>,
    eigenvalues: Vec<T>,
}

impl<T: Real> Metric<T> {
    fn new(sigma: &DMatrix<T>) -> Result<Self> {
        if !sigma.is_square() || sigma.nrows() == 0 {
            return Err(Error::invalid("covariance must be square and non-empty"));
        }
        let eig = SymmetricEigen::new((sigma + sigma.transpose()) * T::lit(0.5));
        let mut eigenvalues: Vec<T> = eig.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if !(eigenvalues[eigenvalues.len() - 1] > T::zero()) {
            return Err(Error::invalid("covariance is not positive definite"));
        }
        let inv = eig.eigenvalues.map(|l| T::one() / l);
        let inverse = &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose();
        Ok(Self { inverse, eigenvalues })
    }

    fn distance(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        let d = a - b;
        let q = d.dot(&(&self.inverse * &d));
        if q > T::zero() {
            q.sqrt()
        } else {
            T::zero()
        }
    }

    fn largest(&self) -> T {
        self.eigenvalues[0]
    }

    fn smallest(&self) -> T {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }
}

fn embed_pairs<T: Real, D: GraphDistance<T> + ?Sized>(
    pairs: &[(AttributedGraph, AttributedGraph)],
    prototypes: &PrototypeSet<T>,
    d: &D,
) -> Result<Vec<(T, DissimilarityVector<T>, DissimilarityVector<T>)>> {
    pairs
        .par_iter()
        .map(|(g, f)| Ok((d.distance(g, f)?, embed(g, prototypes, d)?, embed(f, prototypes, d)?)))
        .collect()
}

/// `d(g, f) >= sqrt(lambda_min(Sigma) / M) d_Sigma(zeta(g), zeta(f))`.
pub fn check_lemma2<T: Real, D: GraphDistance<T> + ?Sized>(
    pairs: &[(AttributedGraph, AttributedGraph)],
    prototypes: &PrototypeSet<T>,
    sigma: &DMatrix<T>,
    d: &D,
) -> Result<BoundReport> {
    let m = prototypes.len();
    if sigma.shape() != (m, m) {
        return Err(Error::invalid(format!("covariance is {:?}, expected {m}x{m}", sigma.shape())));
    }
    let metric = Metric::new(sigma)?;
    let factor = (metric.smallest() / T::from_usize_lossy(m)).sqrt();
    let mut report = BoundReport::new("lemma2")
        .constant("c", factor.as_f64())
        .constant("lambda_min", metric.smallest().as_f64())
        .constant("lambda_max", metric.largest().as_f64())
        .constant("M", m as f64);
    for (dist, yg, yf) in embed_pairs(pairs, prototypes, d)? {
        let lower = factor * metric.distance(yg.values(), yf.values());
        report.record(&[(lower.as_f64(), dist.as_f64())]);
    }
    Ok(report)
}

/// `d(g, f) >= ||dzeta||_inf >= M^(-1/2) ||dzeta||_2`; each pair counts
/// once and is a violation if either link fails.
pub fn check_distance_chain<T: Real, D: GraphDistance<T> + ?Sized>(
    pairs: &[(AttributedGraph, AttributedGraph)],
    prototypes: &PrototypeSet<T>,
    d: &D,
) -> Result<BoundReport> {
    let m = prototypes.len();
    let mut report = BoundReport::new("distance-chain").constant("M", m as f64);
    for (dist, yg, yf) in embed_pairs(pairs, prototypes, d)? {
        let diff = yg.values() - yf.values();
        let inf = diff.amax().as_f64();
        let two = diff.norm().as_f64() / (m as f64).sqrt();
        report.record(&[(inf, dist.as_f64()), (two, inf)]);
    }
    Ok(report)
}

/// Which constants to test in [`check_lemma4`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma4Constants {
    /// `c = sqrt(lk(S) / (4 l1(XX')))`, `C = sqrt(l1(S) / (4 lk(XX')))`.
    /// These do not scale like the distances, so they can fail for
    /// near-isotropic `Sigma` once `l1(XX') > 1`.
    Stated,
    /// `c = sqrt(lk(S)) / (2 l1(XX'))`, `C = sqrt(l1(S)) / (2 lk(XX'))`:
    /// homogeneous in the scale of the distances.
    Homogeneous,
}

/// `c d_Sigma(u1, u2) <= d_F(g1, g2) <= C d_Sigma(u1, u2)` for graphs over
/// a common vertex universe, with `u = X J y^2`.
pub fn check_lemma4<T: Real>(
    pairs: &[(IdentifiedGraph<T>, IdentifiedGraph<T>)],
    prototypes: &[IdentifiedGraph<T>],
    model: &ScalingModel<T>,
    sigma: &DMatrix<T>,
    constants: Lemma4Constants,
) -> Result<BoundReport> {
    let k = model.dim();
    if prototypes.len() != model.num_prototypes() {
        return Err(Error::invalid("prototype count differs from the scaling model"));
    }
    if sigma.shape() != (k, k) {
        return Err(Error::invalid(format!("covariance is {:?}, expected {k}x{k}", sigma.shape())));
    }
    let gram = SymmetricEigen::new(model.gram()).eigenvalues;
    let g1 = gram.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    let gk = gram.iter().copied().fold(T::infinity(), |a, b| if b < a { b } else { a });
    if !(gk > T::lit(SLACK) * g1) {
        return Err(Error::Geometry("X X^T is singular".into()));
    }
    let metric = Metric::new(sigma)?;
    let (s1, sk) = (metric.largest(), metric.smallest());
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let (c, cc) = match constants {
        Lemma4Constants::Stated => ((sk / (four * g1)).sqrt(), (s1 / (four * gk)).sqrt()),
        Lemma4Constants::Homogeneous => (sk.sqrt() / (two * g1), s1.sqrt() / (two * gk)),
    };
    let name = match constants {
        Lemma4Constants::Stated => "lemma4",
        Lemma4Constants::Homogeneous => "lemma4-homogeneous",
    };
    let mut report = BoundReport::new(name)
        .constant("c", c.as_f64())
        .constant("C", cc.as_f64())
        .constant("lambda_min", sk.as_f64())
        .constant("lambda_max", s1.as_f64())
        .constant("gram_max", g1.as_f64())
        .constant("gram_min", gk.as_f64())
        .constant("k", k as f64)
        .constant("M", prototypes.len() as f64);

    let rows: Vec<(T, T)> = pairs
        .par_iter()
        .map(|(a, b)| {
            let df = crate::embedding::frobenius_distance(a, b)?;
            let ua = u_transform(&embed_identified(a, prototypes)?, model)?;
            let ub = u_transform(&embed_identified(b, prototypes)?, model)?;
            Ok((df, metric.distance(&ua, &ub)))
        })
        .collect::<Result<_>>()?;
    for (df, ds) in rows {
        let (df, ds) = (df.as_f64(), ds.as_f64());
        report.record(&[(c.as_f64() * ds, df), (df, cc.as_f64() * ds)]);
    }
    Ok(report)
}

/// Euclidean Fréchet checks on Gaussian samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrechetReport {
    pub sample_size: usize,
    pub dim: usize,
    pub trials: usize,
    /// Random candidates that beat the sample mean (should be none).
    pub minimizer_violations: usize,
    pub candidates_tested: usize,
    /// Monte-Carlo mean of the sample variation.
    pub mean_variation: f64,
    /// `(1 - 1/n) V[P]`.
    pub expected_variation: f64,
    pub standard_error: f64,
}

impl FrechetReport {
    /// Mean variation within three standard errors of the expectation.
    pub fn within_three_se(&self) -> bool {
        (self.mean_variation - self.expected_variation).abs() <= 3.0 * self.standard_error + 1e-12
    }
}

/// Candidates per trial against which the sample mean is compared.
pub const FRECHET_CANDIDATES: usize = 1000;

/// Draws `trials` samples of `n` standard normal points in `dim`
/// dimensions. Checks that the sample mean minimises the Fréchet function
/// and that the sample variation averages to `(1 - 1/n) dim`.
pub fn check_frechet_euclidean(n: usize, dim: usize, trials: usize, seed: u64) -> Result<FrechetReport> {
    if n == 0 || dim == 0 || trials < 2 {
        return Err(Error::invalid("need n >= 1, dim >= 1 and at least two trials"));
    }
    let per_trial: Vec<(f64, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = child_rng(seed, t as u64);
            let x: Vec<DVector<f64>> = (0..n)
                .map(|_| DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng)))
                .collect();
            let mean = x.iter().fold(DVector::zeros(dim), |a, b| a + b) / n as f64;
            let frechet = |z: &DVector<f64>| x.iter().map(|p| (p - z).norm_squared()).sum::<f64>() / n as f64;
            let variation = frechet(&mean);
            // only candidates near the sample can challenge the minimiser
            let checked = if t < 10 { FRECHET_CANDIDATES } else { 0 };
            let mut beaten = 0;
            for _ in 0..checked {
                let z = &mean + DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
                if frechet(&z) < variation - 1e-12 {
                    beaten += 1;
                }
            }
            (variation, beaten)
        })
        .collect();
    let vals: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    let mean = vals.iter().sum::<f64>() / trials as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok(FrechetReport {
        sample_size: n,
        dim,
        trials,
        minimizer_violations: per_trial.iter().map(|p| p.1).sum(),
        candidates_tested: trials.min(10) * FRECHET_CANDIDATES,
        mean_variation: mean,
        expected_variation: (1.0 - 1.0 / n as f64) * dim as f64,
        standard_error: (var / trials as f64).sqrt(),
    })
}

/// Plug-in estimate of the constant bounding the gap between the embedded
/// sample mean and the embedding of the graph-space mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct V2Report {
    /// `M V[Q] - V[F] / 2`.
    pub v2: f64,
    /// Medoid variation of the graph sample.
    pub var_graphs: f64,
    /// Euclidean variation of the embedded sample.
    pub var_embedded: f64,
    pub resamples: usize,
    /// `(delta, observed P(gap >= delta), v2 / delta)`.
    pub markov: Vec<(f64, f64, f64)>,
    /// Grid points where the observed frequency exceeds `v2 / delta`.
    pub violations: usize,
}

/// Estimates `v2` on `sample` and checks `P(||y_bar - zeta(mu)||^2 >= delta)
/// <= v2 / delta` over bootstrap resamples of `resample_size` graphs.
/// Medoids of resamples are searched over the whole sample.
pub fn estimate_v2<T: Real, D: GraphDistance<T> + ?Sized>(
    sample: &[AttributedGraph],
    prototypes: &PrototypeSet<T>,
    d: &D,
    resample_size: usize,
    resamples: usize,
    deltas: &[f64],
    seed: u64,
) -> Result<V2Report> {
    let s = sample.len();
    if s < 5 {
        return Err(Error::invalid(format!("{s} graphs; at least 5 needed")));
    }
    if resample_size == 0 {
        return Err(Error::invalid("resample size must be at least 1"));
    }
    let m = prototypes.len() as f64;
    let dist = crate::ged::pairwise_distances(sample, d)?.map(|v| v.as_f64());
    let y: Vec<DVector<f64>> = sample
        .par_iter()
        .map(|g| Ok(embed(g, prototypes, d)?.values().map(|v| v.as_f64())))
        .collect::<Result<_>>()?;

    let medoid = |members: &[usize]| -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for c in 0..s {
            let v = members.iter().map(|&i| dist[(i, c)].powi(2)).sum::<f64>() / members.len() as f64;
            if v < best.1 {
                best = (c, v);
            }
        }
        best
    };
    let euclidean_variation = |members: &[usize]| -> (DVector<f64>, f64) {
        let mean = members.iter().fold(DVector::zeros(y[0].len()), |a, &i| a + &y[i]) / members.len() as f64;
        let var = members.iter().map(|&i| (&y[i] - &mean).norm_squared()).sum::<f64>() / members.len() as f64;
        (mean, var)
    };

    let all: Vec<usize> = (0..s).collect();
    let var_graphs = medoid(&all).1;
    let var_embedded = euclidean_variation(&all).1;
    let v2 = m * var_graphs - 0.5 * var_embedded;

    let mut rng = rng_from(seed);
    let gaps: Vec<f64> = (0..resamples)
        .map(|_| {
            let idx: Vec<usize> = (0..resample_size).map(|_| rng.random_range(0..s)).collect();
            let (centre, _) = medoid(&idx);
            let (mean, _) = euclidean_variation(&idx);
            (mean - &y[centre]).norm_squared()
        })
        .collect();
    let mut markov = Vec::with_capacity(deltas.len());
    let mut violations = 0;
    for &delta in deltas {
        if !(delta > 0.0) {
            return Err(Error::invalid("grid values must be positive"));
        }
        let freq = gaps.iter().filter(|&&g| g >= delta).count() as f64 / resamples.max(1) as f64;
        let bound = v2 / delta;
        if freq > bound + 1e-12 {
            violations += 1;
        }
        markov.push((delta, freq, bound));
    }
    Ok(V2Report {
        v2,
        var_graphs,
        var_embedded,
        resamples,
        markov,
        violations,
    })
}

/// Random graph with `vertices_range` vertices, categorical vertex labels
/// drawn from `alphabet` and each undirected edge present with probability
/// `edge_p`.
pub fn random_labelled_graph<R: Rng + ?Sized>(
    rng: &mut R,
    vertices_range: (usize, usize),
    alphabet: &[&str],
    edge_p: f64,
) -> AttributedGraph {
    let n = rng.random_range(vertices_range.0..=vertices_range.1);
    let mut b = AttributedGraph::builder(false);
    for i in 0..n {
        let label = alphabet[rng.random_range(0..alphabet.len())];
        b.add_vertex(i.to_string(), AttributeValue::Categorical(label.to_string()))
            .expect("fresh vertex id");
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(edge_p) {
                b.add_edge_by_index(u, v, AttributeValue::None).expect("fresh edge");
            }
        }
    }
    b.build()
}

/// Random undirected weighted graph over `n` identified vertices; every
/// off-diagonal weight is uniform in [0, 1].
pub fn random_identified_graph<R: Rng + ?Sized>(rng: &mut R, n: usize) -> IdentifiedGraph<f64> {
    let mut w = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in u + 1..n {
            let x: f64 = rng.random_range(0.0..=1.0);
            w[(u, v)] = x;
            w[(v, u)] = x;
        }
    }
    IdentifiedGraph::new(w, false).expect("weights in [0, 1], symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::classical_scaling;
    use crate::ged::{CostModel, ExactGed};

    #[test]
    fn equal_graphs_satisfy_everything() {
        let d = ExactGed::new(CostModel::<f64>::default());
        let mut rng = rng_from(1);
        let protos: Vec<AttributedGraph> = (0..3)
            .map(|_| random_labelled_graph(&mut rng, (2, 3), &["A", "B"], 0.5))
            .collect();
        let set = PrototypeSet::from_graphs(protos, &d).unwrap();
        let g = random_labelled_graph(&mut rng, (2, 3), &["A", "B"], 0.5);
        let pairs = vec![(g.clone(), g)];
        let r = check_lemma2(&pairs, &set, &DMatrix::identity(3, 3), &d).unwrap();
        assert_eq!((r.pairs_tested, r.violations), (1, 0));
        let r = check_distance_chain(&pairs, &set, &d).unwrap();
        assert_eq!((r.pairs_tested, r.violations), (1, 0));
        assert!(check_lemma2(&pairs, &set, &DMatrix::zeros(3, 3), &d).is_err());
    }

    #[test]
    fn lemma4_scales_with_sigma() {
        let mut rng = rng_from(2);
        let protos: Vec<IdentifiedGraph<f64>> = (0..20).map(|_| random_identified_graph(&mut rng, 6)).collect();
        let dist = DMatrix::from_fn(20, 20, |i, j| crate::embedding::frobenius_distance(&protos[i], &protos[j]).unwrap());
        let model = classical_scaling(&dist, 1e-9).unwrap();
        let k = model.dim();
        let pairs: Vec<_> = (0..30)
            .map(|_| (random_identified_graph(&mut rng, 6), random_identified_graph(&mut rng, 6)))
            .collect();
        let sigma = DMatrix::<f64>::identity(k, k) * 0.3;
        let a = check_lemma4(&pairs, &protos, &model, &sigma, Lemma4Constants::Homogeneous).unwrap();
        let b = check_lemma4(&pairs, &protos, &model, &(&sigma * 9.0), Lemma4Constants::Homogeneous).unwrap();
        let stated = check_lemma4(&pairs, &protos, &model, &sigma, Lemma4Constants::Stated).unwrap();
        assert!((stated.constants["c"] / a.constants["c"] - a.constants["gram_max"].sqrt()).abs() < 1e-9);
        assert!((b.constants["c"] / a.constants["c"] - 3.0).abs() < 1e-9);
        assert!((b.constants["C"] / a.constants["C"] - 3.0).abs() < 1e-9);
        assert_eq!(a.pairs_tested, 30);
        assert_eq!(a.violations, 0);
        assert_eq!(b.violations, 0);
        let same = vec![(pairs[0].0.clone(), pairs[0].0.clone())];
        let r = check_lemma4(&same, &protos, &model, &sigma, Lemma4Constants::Stated).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn single_point_samples() {
        let r = check_frechet_euclidean(1, 2, 50, 0).unwrap();
        assert_eq!(r.mean_variation, 0.0);
        assert_eq!(r.expected_variation, 0.0);
        assert!(r.within_three_se());
    }

    #[test]
    fn pairs_of_normals() {
        let r = check_frechet_euclidean(2, 1, 10_000, 4).unwrap();
        assert_eq!(r.minimizer_violations, 0);
        assert!(r.within_three_se(), "{r:?}");
    }

    #[test]
    fn v2_of_identical_sample() {
        let d = ExactGed::new(CostModel::<f64>::default());
        let mut rng = rng_from(3);
        let g = random_labelled_graph(&mut rng, (3, 3), &["A"], 0.5);
        let sample = vec![g.clone(); 6];
        let set = PrototypeSet::from_graphs(vec![g], &d).unwrap();
        let r = estimate_v2(&sample, &set, &d, 6, 20, &[0.5, 1.0], 0).unwrap();
        assert_eq!(r.v2, 0.0);
        assert_eq!(r.violations, 0);
        assert!(estimate_v2(&sample[..4], &set, &d, 4, 20, &[1.0], 0).is_err());
    }
}
