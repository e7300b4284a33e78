//! Linear sum assignment by shortest augmenting paths (Jonker–Volgenant
//! style, with the dual updates of Crouse's formulation).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Perfect matching of rows to columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment<T> {
    /// `row_to_col[i]` is the column assigned to row `i`.
    pub row_to_col: Vec<usize>,
    pub total_cost: T,
}

impl<T: Real> Assignment<T> {
    pub fn len(&self) -> usize {
        self.row_to_col.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_to_col.is_empty()
    }
}

const NONE: usize = usize::MAX;

/// Minimum-cost perfect assignment of a square cost matrix.
///
/// Entries must be finite; encode forbidden cells with a large finite
/// sentinel. Returns the optimal assignment, not an approximation.
pub fn lsap_solve<T: Real>(cost: &DMatrix<T>) -> Result<Assignment<T>> {
    if !cost.is_square() {
        return Err(Error::invalid(format!(
            "cost matrix must be square, got {}x{}",
            cost.nrows(),
            cost.ncols()
        )));
    }
    if let Some(bad) = cost.iter().find(|c| !c.is_finite()) {
        return Err(Error::invalid(format!("non-finite cost entry {bad}")));
    }
    let n = cost.nrows();
    if n == 0 {
        return Ok(Assignment {
            row_to_col: Vec::new(),
            total_cost: T::zero(),
        });
    }

    let mut u = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut col4row = vec![NONE; n];
    let mut row4col = vec![NONE; n];
    let mut path = vec![NONE; n];
    let mut dist = vec![T::infinity(); n];
    let mut scanned_rows = vec![false; n];
    let mut scanned_cols = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        dist.iter_mut().for_each(|d| *d = T::infinity());
        scanned_rows.iter_mut().for_each(|s| *s = false);
        scanned_cols.iter_mut().for_each(|s| *s = false);
        // scanned from the last entry, so lower column indices win ties
        remaining.clear();
        remaining.extend((0..n).rev());

        let mut min_val = T::zero();
        let mut i = cur_row;
        let sink = loop {
            scanned_rows[i] = true;
            let mut lowest = T::infinity();
            let mut pick = NONE;
            for (it, &j) in remaining.iter().enumerate() {
                let reduced = min_val + cost[(i, j)] - u[i] - v[j];
                if reduced < dist[j] {
                    path[j] = i;
                    dist[j] = reduced;
                }
                if dist[j] < lowest || (dist[j] == lowest && row4col[j] == NONE) {
                    lowest = dist[j];
                    pick = it;
                }
            }
            min_val = lowest;
            let j = remaining.swap_remove(pick);
            scanned_cols[j] = true;
            if row4col[j] == NONE {
                break j;
            }
            i = row4col[j];
        };

        u[cur_row] += min_val;
        for r in 0..n {
            if scanned_rows[r] && r != cur_row {
                u[r] += min_val - dist[col4row[r]];
            }
        }
        for c in 0..n {
            if scanned_cols[c] {
                v[c] -= min_val - dist[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }

    let total_cost = col4row
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[(i, j)])
        .fold(T::zero(), |a, b| a + b);
    Ok(Assignment {
        row_to_col: col4row,
        total_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute force over all permutations (Heap's algorithm).
    fn brute_force(c: &DMatrix<f64>) -> f64 {
        let n = c.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        let cost = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum::<f64>();
        let mut best = cost(&perm);
        let mut stack = vec![0usize; n];
        let mut i = 1;
        while i < n {
            if stack[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(stack[i], i);
                }
                best = best.min(cost(&perm));
                stack[i] += 1;
                i = 1;
            } else {
                stack[i] = 0;
                i += 1;
            }
        }
        best
    }

    #[test]
    fn zero_diagonal_gives_identity() {
        let c = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
        let a = lsap_solve(&c).unwrap();
        assert_eq!(a.row_to_col, vec![0, 1, 2, 3]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn single_cell() {
        let a = lsap_solve(&DMatrix::from_element(1, 1, 2.5)).unwrap();
        assert_eq!(a.row_to_col, vec![0]);
        assert_eq!(a.total_cost, 2.5);
    }

    #[test]
    fn empty_matrix() {
        let a = lsap_solve(&DMatrix::<f64>::zeros(0, 0)).unwrap();
        assert!(a.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lsap_solve(&DMatrix::<f64>::zeros(2, 3)).is_err());
        let mut c = DMatrix::<f64>::zeros(2, 2);
        c[(0, 1)] = f64::NAN;
        assert!(lsap_solve(&c).is_err());
        c[(0, 1)] = f64::INFINITY;
        assert!(lsap_solve(&c).is_err());
    }

    #[test]
    fn random_5x5_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let c = DMatrix::from_fn(5, 5, |_, _| rng.random_range(0.0..10.0));
            let a = lsap_solve(&c).unwrap();
            let mut cols = a.row_to_col.clone();
            cols.sort();
            assert_eq!(cols, vec![0, 1, 2, 3, 4]);
            let direct: f64 = a.row_to_col.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum();
            assert_eq!(direct, a.total_cost);
            assert!((a.total_cost - brute_force(&c)).abs() < 1e-12);
        }
    }

    #[test]
    fn f32_solves() {
        let c = DMatrix::<f32>::from_row_slice(3, 3, &[4., 1., 3., 2., 0., 5., 3., 2., 2.]);
        let a = lsap_solve(&c).unwrap();
        assert_eq!(a.total_cost, 5.0);
    }
}
