//! Graph edit distance.
//!
//! Two distances share one edit-path cost function: [`exact_ged`], an
//! exhaustive search over vertex matchings for tiny graphs, and
//! [`bipartite_ged`], the polynomial upper bound obtained from a single
//! linear sum assignment over vertices with local edge costs.

mod bipartite;
mod exact;
mod lsap;

use std::cmp::Ordering;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bipartite::{bipartite_cost_matrix, bipartite_ged, bipartite_mapping};
pub use exact::{exact_ged, exact_ged_with_cap, DEFAULT_EXACT_CAP};
pub use lsap::{lsap_solve, Assignment};

use crate::error::{Error, Result};
use crate::graph::{AttributeValue, AttributedGraph};
use crate::scalar::Real;

/// Edit-operation costs.
///
/// Substitution cost is `scale * distance(label_a, label_b)`: Euclidean
/// distance for numeric vectors, 0/1 for categorical symbols, 0 for
/// unlabelled elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct CostModel<T> {
    pub node_insert: T,
    pub node_delete: T,
    pub node_subst_scale: T,
    pub edge_insert: T,
    pub edge_delete: T,
    pub edge_subst_scale: T,
}

impl<T: Real> Default for CostModel<T> {
    fn default() -> Self {
        Self::uniform(T::one(), T::one())
    }
}

impl<T: Real> CostModel<T> {
    /// Insert = delete = `indel` for vertices and edges, both substitution
    /// scales equal to `subst_scale`.
    pub fn uniform(indel: T, subst_scale: T) -> Self {
        Self {
            node_insert: indel,
            node_delete: indel,
            node_subst_scale: subst_scale,
            edge_insert: indel,
            edge_delete: indel,
            edge_subst_scale: subst_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.node_insert,
            self.node_delete,
            self.node_subst_scale,
            self.edge_insert,
            self.edge_delete,
            self.edge_subst_scale,
        ];
        if all.iter().any(|c| !c.is_finite() || *c < T::zero()) {
            return Err(Error::invalid("edit costs must be finite and nonnegative"));
        }
        if self.node_insert != self.node_delete || self.edge_insert != self.edge_delete {
            return Err(Error::invalid("insert and delete costs must match for a symmetric distance"));
        }
        Ok(())
    }

    pub fn node_subst(&self, a: &AttributeValue, b: &AttributeValue) -> T {
        self.node_subst_scale * label_distance(a, b)
    }

    pub fn edge_subst(&self, a: &AttributeValue, b: &AttributeValue) -> T {
        self.edge_subst_scale * label_distance(a, b)
    }
}

/// Callers check schema compatibility first, so mixed kinds never reach here.
fn label_distance<T: Real>(a: &AttributeValue, b: &AttributeValue) -> T {
    match (a, b) {
        (AttributeValue::NumericVector(x), AttributeValue::NumericVector(y)) => {
            let sq: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
            T::lit(sq).sqrt()
        }
        (AttributeValue::Categorical(x), AttributeValue::Categorical(y)) => {
            if x == y {
                T::zero()
            } else {
                T::one()
            }
        }
        _ => T::zero(),
    }
}

/// Cost of the edit path induced by a vertex matching.
///
/// `mapping[i]` is the image of vertex `i` of `g1` in `g2`, `None` for a
/// deletion. Unmatched vertices of `g2` are inserted. Edges follow their
/// endpoints: an edge of `g1` whose endpoints map onto an edge of `g2` is
/// substituted, otherwise deleted; edges of `g2` not hit this way are
/// inserted.
pub fn edit_path_cost<T: Real>(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    mapping: &[Option<usize>],
    cost: &CostModel<T>,
) -> T {
    debug_assert_eq!(mapping.len(), g1.num_vertices());
    let mut inverse = vec![None; g2.num_vertices()];
    for (i, m) in mapping.iter().enumerate() {
        if let Some(j) = *m {
            inverse[j] = Some(i);
        }
    }
    let mut total = T::zero();
    for (i, m) in mapping.iter().enumerate() {
        total += match m {
            Some(j) => cost.node_subst(g1.vertex_attr(i), g2.vertex_attr(*j)),
            None => cost.node_delete,
        };
    }
    for image in &inverse {
        if image.is_none() {
            total += cost.node_insert;
        }
    }
    for (u, v, a) in g1.edges() {
        let target = match (mapping[u], mapping[v]) {
            (Some(x), Some(y)) => g2.edge(x, y),
            _ => None,
        };
        total += match target {
            Some(b) => cost.edge_subst(a, b),
            None => cost.edge_delete,
        };
    }
    for (x, y, _) in g2.edges() {
        let covered = match (inverse[x], inverse[y]) {
            (Some(u), Some(v)) => g1.has_edge(u, v),
            _ => false,
        };
        if !covered {
            total += cost.edge_insert;
        }
    }
    total
}

/// Deterministic total order on graph contents, used to evaluate both
/// argument orders of a distance identically.
pub(crate) fn structural_cmp(a: &AttributedGraph, b: &AttributedGraph) -> Ordering {
    a.num_vertices()
        .cmp(&b.num_vertices())
        .then(a.num_edges().cmp(&b.num_edges()))
        .then_with(|| {
            for (x, y) in a.vertex_attrs().iter().zip(b.vertex_attrs()) {
                let o = attr_cmp(x, y);
                if o != Ordering::Equal {
                    return o;
                }
            }
            for ((u1, v1, x), (u2, v2, y)) in a.edges().zip(b.edges()) {
                let o = (u1, v1).cmp(&(u2, v2)).then_with(|| attr_cmp(x, y));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
}

fn attr_cmp(a: &AttributeValue, b: &AttributeValue) -> Ordering {
    match (a, b) {
        (AttributeValue::NumericVector(x), AttributeValue::NumericVector(y)) => x
            .iter()
            .zip(y)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(x.len().cmp(&y.len())),
        (AttributeValue::Categorical(x), AttributeValue::Categorical(y)) => x.cmp(y),
        _ => Ordering::Equal,
    }
}

/// A dissimilarity between attributed graphs.
pub trait GraphDistance<T: Real>: Sync {
    fn distance(&self, a: &AttributedGraph, b: &AttributedGraph) -> Result<T>;
}

impl<T: Real, F> GraphDistance<T> for F
where
    F: Fn(&AttributedGraph, &AttributedGraph) -> Result<T> + Sync,
{
    fn distance(&self, a: &AttributedGraph, b: &AttributedGraph) -> Result<T> {
        self(a, b)
    }
}

/// Bipartite (assignment-based) GED; the distance used operationally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteGed<T> {
    pub cost: CostModel<T>,
}

impl<T: Real> Default for BipartiteGed<T> {
    fn default() -> Self {
        Self::new(CostModel::default())
    }
}

impl<T: Real> BipartiteGed<T> {
    pub fn new(cost: CostModel<T>) -> Self {
        Self { cost }
    }
}

impl<T: Real> GraphDistance<T> for BipartiteGed<T> {
    fn distance(&self, a: &AttributedGraph, b: &AttributedGraph) -> Result<T> {
        bipartite_ged(a, b, &self.cost)
    }
}

/// Exact GED by exhaustive matching search; only for tiny graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactGed<T> {
    pub cost: CostModel<T>,
    pub cap: usize,
}

impl<T: Real> ExactGed<T> {
    pub fn new(cost: CostModel<T>) -> Self {
        Self {
            cost,
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

impl<T: Real> GraphDistance<T> for ExactGed<T> {
    fn distance(&self, a: &AttributedGraph, b: &AttributedGraph) -> Result<T> {
        exact_ged_with_cap(a, b, &self.cost, self.cap)
    }
}

/// Symmetric matrix of distances among `graphs`, computed in parallel.
pub fn pairwise_distances<T: Real, D: GraphDistance<T> + ?Sized>(
    graphs: &[AttributedGraph],
    d: &D,
) -> Result<DMatrix<T>> {
    let n = graphs.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| d.distance(&graphs[i], &graphs[j]))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// `|rows| x |cols|` matrix of distances, computed in parallel.
pub fn cross_distances<T: Real, D: GraphDistance<T> + ?Sized>(
    rows: &[AttributedGraph],
    cols: &[AttributedGraph],
    d: &D,
) -> Result<DMatrix<T>> {
    let data: Vec<Vec<T>> = rows
        .par_iter()
        .map(|g| cols.iter().map(|r| d.distance(g, r)).collect::<Result<Vec<T>>>())
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| data[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_model_validation() {
        CostModel::<f64>::default().validate().unwrap();
        let mut c = CostModel::<f64>::default();
        c.node_insert = 2.0;
        assert!(c.validate().is_err());
        let mut c = CostModel::<f64>::default();
        c.edge_subst_scale = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn label_distances() {
        let c = CostModel::<f64>::uniform(1.0, 2.0);
        let a = AttributeValue::NumericVector(vec![0.0, 0.0]);
        let b = AttributeValue::NumericVector(vec![3.0, 4.0]);
        assert_eq!(c.node_subst(&a, &b), 10.0);
        assert_eq!(c.node_subst(&a, &a), 0.0);
        assert_eq!(c.edge_subst(&"C".into(), &"N".into()), 2.0);
        assert_eq!(c.edge_subst(&AttributeValue::None, &AttributeValue::None), 0.0);
    }

    #[test]
    fn induced_cost_counts_every_operation() {
        // g1: a-b, g2: x-y-z; map a->x, b->y, insert z and edge y-z
        let g1 = AttributedGraph::builder(false)
            .vertex("a", "C".into())
            .unwrap()
            .vertex("b", "C".into())
            .unwrap()
            .edge("a", "b", AttributeValue::None)
            .unwrap()
            .build();
        let g2 = AttributedGraph::builder(false)
            .vertex("x", "C".into())
            .unwrap()
            .vertex("y", "N".into())
            .unwrap()
            .vertex("z", "C".into())
            .unwrap()
            .edge("x", "y", AttributeValue::None)
            .unwrap()
            .edge("y", "z", AttributeValue::None)
            .unwrap()
            .build();
        let c = CostModel::<f64>::default();
        assert_eq!(edit_path_cost(&g1, &g2, &[Some(0), Some(1)], &c), 3.0);
        assert_eq!(edit_path_cost(&g1, &g2, &[None, None], &c), 2.0 + 1.0 + 3.0 + 2.0);
    }
}
