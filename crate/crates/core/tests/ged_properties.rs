use graphdrift::ged::{bipartite_ged, exact_ged, lsap_solve};
use graphdrift::rng::rng_from;
use graphdrift::theory::random_labelled_graph;
use graphdrift::CostModel;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn brute_force(c: &DMatrix<f64>) -> f64 {
    fn go(c: &DMatrix<f64>, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == c.nrows() {
            *best = best.min(acc);
            return;
        }
        for col in 0..c.ncols() {
            if !used[col] {
                used[col] = true;
                go(c, row + 1, used, acc + c[(row, col)], best);
                used[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(c, 0, &mut vec![false; c.ncols()], 0.0, &mut best);
    best
}

#[test]
fn lsap_matches_brute_force() {
    let mut rng = rng_from(1);
    for trial in 0..1000 {
        let k = 1 + trial % 7;
        // integer costs make the comparison exact regardless of summation order
        let c = DMatrix::from_fn(k, k, |_, _| rng.random_range(0..50) as f64);
        let a = lsap_solve(&c).unwrap();
        assert_eq!(a.total_cost, brute_force(&c), "{c}");
        let mut cols = a.row_to_col.clone();
        cols.sort();
        assert_eq!(cols, (0..k).collect::<Vec<_>>());
        let sum: f64 = a.row_to_col.iter().enumerate().map(|(r, &col)| c[(r, col)]).sum();
        assert_eq!(sum, a.total_cost);
    }
}

#[test]
fn lsap_real_costs() {
    let mut rng = rng_from(2);
    for trial in 0..300 {
        let k = 1 + trial % 7;
        let c = DMatrix::from_fn(k, k, |_, _| rng.random_range(0.0..10.0));
        let a = lsap_solve(&c).unwrap();
        assert!((a.total_cost - brute_force(&c)).abs() < 1e-9);
    }
}

const ALPHABET: [&str; 3] = ["A", "B", "C"];

fn cost() -> CostModel<f64> {
    CostModel::default()
}

#[test]
fn bipartite_upper_bounds_exact() {
    let mut rng = rng_from(3);
    for _ in 0..200 {
        let g = random_labelled_graph(&mut rng, (0, 6), &ALPHABET, 0.4);
        let f = random_labelled_graph(&mut rng, (0, 6), &ALPHABET, 0.4);
        let e = exact_ged(&g, &f, &cost()).unwrap();
        let b = bipartite_ged(&g, &f, &cost()).unwrap();
        assert!(b >= e - 1e-9, "bipartite {b} below exact {e}");
    }
}

#[test]
fn exact_ged_is_a_metric() {
    let mut rng = rng_from(4);
    let c = cost();
    for _ in 0..500 {
        let g: Vec<_> = (0..3)
            .map(|_| random_labelled_graph(&mut rng, (1, 4), &ALPHABET, 0.5))
            .collect();
        let d = |i: usize, j: usize| exact_ged(&g[i], &g[j], &c).unwrap();
        assert_eq!(d(0, 0), 0.0);
        assert!((d(0, 1) - d(1, 0)).abs() <= 1e-9);
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distances_are_symmetric_and_vanish_on_identity(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let g = random_labelled_graph(&mut rng, (0, 5), &ALPHABET, 0.4);
        let f = random_labelled_graph(&mut rng, (0, 5), &ALPHABET, 0.4);
        let c = cost();
        prop_assert_eq!(bipartite_ged(&g, &g, &c).unwrap(), 0.0);
        prop_assert_eq!(exact_ged(&g, &g, &c).unwrap(), 0.0);
        prop_assert!((bipartite_ged(&g, &f, &c).unwrap() - bipartite_ged(&f, &g, &c).unwrap()).abs() <= 1e-9);
        prop_assert!((exact_ged(&g, &f, &c).unwrap() - exact_ged(&f, &g, &c).unwrap()).abs() <= 1e-9);
    }
}
