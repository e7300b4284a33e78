use std::cmp::Ordering;

use super::{edit_path_cost, structural_cmp, CostModel};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::scalar::Real;

/// Default cap on `|V1| + |V2|` for the exhaustive search.
pub const DEFAULT_EXACT_CAP: usize = 12;

/// Exact GED with the default size cap.
pub fn exact_ged<T: Real>(g1: &AttributedGraph, g2: &AttributedGraph, cost: &CostModel<T>) -> Result<T> {
    exact_ged_with_cap(g1, g2, cost, DEFAULT_EXACT_CAP)
}

/// Minimum edit-path cost over all partial injective vertex matchings,
/// found by depth-first branch and bound.
pub fn exact_ged_with_cap<T: Real>(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cost: &CostModel<T>,
    cap: usize,
) -> Result<T> {
    let total = g1.num_vertices() + g2.num_vertices();
    if total > cap {
        return Err(Error::SizeLimit { total, cap });
    }
    g1.check_compatible(g2)?;
    cost.validate()?;
    let (a, b) = match structural_cmp(g1, g2) {
        Ordering::Greater => (g2, g1),
        _ => (g1, g2),
    };
    let mut search = Search {
        g1: a,
        g2: b,
        cost,
        mapping: vec![None; a.num_vertices()],
        used: vec![false; b.num_vertices()],
        best_bound: T::infinity(),
        best: T::infinity(),
    };
    search.descend(0, T::zero());
    Ok(search.best)
}

struct Search<'a, T: Real> {
    g1: &'a AttributedGraph,
    g2: &'a AttributedGraph,
    cost: &'a CostModel<T>,
    mapping: Vec<Option<usize>>,
    used: Vec<bool>,
    /// Lowest incrementally accumulated leaf cost seen so far.
    best_bound: T,
    /// Lowest leaf cost re-evaluated with [`edit_path_cost`].
    best: T,
}

impl<T: Real> Search<'_, T> {
    fn slack(&self) -> T {
        T::lit(1e-9) * (T::one() + self.best_bound.abs())
    }

    fn descend(&mut self, i: usize, partial: T) {
        if partial > self.best_bound + self.slack() {
            return;
        }
        let n1 = self.g1.num_vertices();
        if i == n1 {
            let leaf = partial + self.completion_cost();
            if leaf <= self.best_bound + self.slack() {
                if leaf < self.best_bound {
                    self.best_bound = leaf;
                }
                // near-ties are re-scored by the shared cost function so the
                // result compares exactly with other matchings scored by it
                let exact = edit_path_cost(self.g1, self.g2, &self.mapping, self.cost);
                if exact < self.best {
                    self.best = exact;
                }
            }
            return;
        }
        for j in 0..self.g2.num_vertices() {
            if self.used[j] {
                continue;
            }
            let step = self.step_cost(i, Some(j));
            self.used[j] = true;
            self.mapping[i] = Some(j);
            self.descend(i + 1, partial + step);
            self.mapping[i] = None;
            self.used[j] = false;
        }
        let step = self.step_cost(i, None);
        self.descend(i + 1, partial + step);
    }

    /// Cost added by fixing the image of vertex `i`: its node operation plus
    /// edges to already-placed vertices of `g1` and between their images.
    fn step_cost(&self, i: usize, target: Option<usize>) -> T {
        let (g1, g2, c) = (self.g1, self.g2, self.cost);
        let mut s = match target {
            Some(j) => c.node_subst(g1.vertex_attr(i), g2.vertex_attr(j)),
            None => c.node_delete,
        };
        let image = |k: usize| if k == i { target } else { self.mapping[k] };
        for p in 0..i {
            let pairs: &[(usize, usize)] = if g1.is_directed() {
                &[(p, i), (i, p)]
            } else {
                &[(p, i)]
            };
            for &(a, b) in pairs {
                let e1 = g1.edge(a, b);
                let e2 = match (image(a), image(b)) {
                    (Some(x), Some(y)) => g2.edge(x, y),
                    _ => None,
                };
                s += match (e1, e2) {
                    (Some(x), Some(y)) => c.edge_subst(x, y),
                    (Some(_), None) => c.edge_delete,
                    (None, Some(_)) => c.edge_insert,
                    (None, None) => T::zero(),
                };
            }
        }
        s
    }

    /// Insertions of unmatched `g2` vertices and their incident edges.
    fn completion_cost(&self) -> T {
        let mut s = T::zero();
        for used in &self.used {
            if !used {
                s += self.cost.node_insert;
            }
        }
        for (x, y, _) in self.g2.edges() {
            if !self.used[x] || !self.used[y] {
                s += self.cost.edge_insert;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttributeValue;

    fn labelled(labels: &[&str], edges: &[(usize, usize)]) -> AttributedGraph {
        let mut b = AttributedGraph::builder(false);
        for (i, l) in labels.iter().enumerate() {
            b.add_vertex(i.to_string(), (*l).into()).unwrap();
        }
        for &(u, v) in edges {
            b.add_edge_by_index(u, v, AttributeValue::None).unwrap();
        }
        b.build()
    }

    #[test]
    fn identical_graphs() {
        let g = labelled(&["C", "O", "C"], &[(0, 1), (1, 2)]);
        assert_eq!(exact_ged(&g, &g, &CostModel::<f64>::default()).unwrap(), 0.0);
    }

    #[test]
    fn single_vertex_labels() {
        let a = labelled(&["A"], &[]);
        let b = labelled(&["B"], &[]);
        for scale in [0.5, 1.0, 3.0] {
            let c = CostModel::<f64>::uniform(1.0, scale);
            let want = f64::min(scale, c.node_insert + c.node_delete);
            assert_eq!(exact_ged(&a, &b, &c).unwrap(), want);
        }
    }

    #[test]
    fn empty_vs_single() {
        let e = AttributedGraph::empty(false);
        let s = labelled(&["A"], &[]);
        let c = CostModel::<f64>::uniform(1.5, 1.0);
        assert_eq!(exact_ged(&e, &s, &c).unwrap(), 1.5);
        assert_eq!(exact_ged(&s, &e, &c).unwrap(), 1.5);
    }

    #[test]
    fn relabelled_path_is_free() {
        let a = labelled(&["C", "O", "N"], &[(0, 1), (1, 2)]);
        let b = labelled(&["N", "C", "O"], &[(1, 2), (2, 0)]);
        assert_eq!(exact_ged(&a, &b, &CostModel::<f64>::default()).unwrap(), 0.0);
    }

    #[test]
    fn size_cap() {
        let big = labelled(&["C"; 7], &[]);
        let err = exact_ged(&big, &big, &CostModel::<f64>::default()).unwrap_err();
        assert_eq!(err, Error::SizeLimit { total: 14, cap: 12 });
        assert!(exact_ged_with_cap(&big, &big, &CostModel::<f64>::default(), 14).is_ok());
    }

    #[test]
    fn directed_reversal() {
        let mut b = AttributedGraph::builder(true);
        b.add_vertex("a", "C".into()).unwrap();
        b.add_vertex("b", "N".into()).unwrap();
        b.add_edge("a", "b", AttributeValue::None).unwrap();
        let ab = b.build();
        let mut b = AttributedGraph::builder(true);
        b.add_vertex("a", "C".into()).unwrap();
        b.add_vertex("b", "N".into()).unwrap();
        b.add_edge("b", "a", AttributeValue::None).unwrap();
        let ba = b.build();
        // cheapest: delete arc, insert reversed arc
        assert_eq!(exact_ged(&ab, &ba, &CostModel::<f64>::default()).unwrap(), 2.0);
    }

    #[test]
    fn schema_mismatch() {
        let a = labelled(&["C"], &[]);
        let mut b = AttributedGraph::builder(false);
        b.add_vertex("0", vec![1.0].into()).unwrap();
        assert!(matches!(
            exact_ged(&a, &b.build(), &CostModel::<f64>::default()),
            Err(Error::Schema(_))
        ));
    }
}
