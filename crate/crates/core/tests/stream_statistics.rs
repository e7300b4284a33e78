use graphdrift::rng::child_rng;
use graphdrift::stream::{bootstrap_indices, bootstrap_mean, StreamConfig};
use rand_distr::{Distribution, Exp};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn stream_draws_are_uniform() {
    let cfg = StreamConfig::new(5, 200, 11);
    let (nom, non) = (10, 7);
    let draws = bootstrap_indices(nom, non, &cfg).unwrap();
    assert_eq!(draws.len(), cfg.length);
    let mut counts = vec![vec![0.0; nom], vec![0.0; non]];
    for (i, d) in draws.iter().enumerate() {
        assert_eq!(d.nominal, i < cfg.tau);
        counts[usize::from(!d.nominal)][d.index] += 1.0;
    }
    for c in counts {
        let total: f64 = c.iter().sum();
        let expected = total / c.len() as f64;
        let stat: f64 = c.iter().map(|o| (o - expected).powi(2) / expected).sum();
        let p = 1.0 - ChiSquared::new((c.len() - 1) as f64).unwrap().cdf(stat);
        assert!(p > 1e-3, "chi-square {stat}, p = {p}");
    }
}

#[test]
fn bootstrap_interval_coverage() {
    let exp = Exp::new(1.0).unwrap();
    let trials = 400;
    let mut covered = 0;
    for t in 0..trials {
        let mut rng = child_rng(12, t);
        let sample: Vec<f64> = (0..60).map(|_| exp.sample(&mut rng)).collect();
        let e = bootstrap_mean(&sample, 2000, t).unwrap();
        if e.lo <= 1.0 && 1.0 <= e.hi {
            covered += 1;
        }
    }
    let rate = covered as f64 / trials as f64;
    // percentile intervals undercover slightly for skewed data
    assert!((0.88..=0.98).contains(&rate), "coverage {rate}");
}
