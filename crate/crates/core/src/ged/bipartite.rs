use std::cmp::Ordering;

use nalgebra::DMatrix;

use super::{edit_path_cost, lsap_solve, structural_cmp, CostModel};
use crate::error::Result;
use crate::graph::{AttributeValue, AttributedGraph};
use crate::scalar::Real;

/// Forbidden cells cost this many times the largest finite entry.
const FORBIDDEN_FACTOR: f64 = 1e6;

/// Bipartite GED: solves one `(n1+n2) x (n1+n2)` assignment over vertices
/// whose substitution cells embed the optimal matching of incident edges,
/// then returns the cost of the edit path induced by that assignment.
///
/// The result is an upper bound on [`super::exact_ged`]. Both argument orders
/// are evaluated on the same canonical ordering, so the value is symmetric.
pub fn bipartite_ged<T: Real>(g1: &AttributedGraph, g2: &AttributedGraph, cost: &CostModel<T>) -> Result<T> {
    g1.check_compatible(g2)?;
    cost.validate()?;
    let (a, b) = match structural_cmp(g1, g2) {
        Ordering::Greater => (g2, g1),
        _ => (g1, g2),
    };
    let mapping = bipartite_mapping(a, b, cost)?;
    Ok(edit_path_cost(a, b, &mapping, cost))
}

/// Vertex matching of `g1` into `g2` chosen by the assignment; `None`
/// marks a deleted vertex.
pub fn bipartite_mapping<T: Real>(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cost: &CostModel<T>,
) -> Result<Vec<Option<usize>>> {
    let n2 = g2.num_vertices();
    let c = bipartite_cost_matrix(g1, g2, cost)?;
    let assignment = lsap_solve(&c)?;
    Ok(assignment.row_to_col[..g1.num_vertices()]
        .iter()
        .map(|&j| if j < n2 { Some(j) } else { None })
        .collect())
}

/// The square node-assignment matrix:
///
/// ```text
///   [ substitution (n1 x n2) | deletion diag (n1 x n1) ]
///   [ insertion diag (n2 x n2) | zeros (n2 x n1)       ]
/// ```
///
/// Each edge touches two vertices, so its local cost enters both endpoint
/// cells at half weight.
pub fn bipartite_cost_matrix<T: Real>(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cost: &CostModel<T>,
) -> Result<DMatrix<T>> {
    let (n1, n2) = (g1.num_vertices(), g2.num_vertices());
    let k = n1 + n2;
    let half = T::lit(0.5);
    let stars1 = stars(g1);
    let stars2 = stars(g2);

    let mut m = DMatrix::<T>::zeros(k, k);
    let mut forbidden = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let mut local = T::zero();
            for (s1, s2) in stars1[i].iter().zip(&stars2[j]) {
                local += edge_matching_cost(s1, s2, cost)?;
            }
            m[(i, j)] = cost.node_subst(g1.vertex_attr(i), g2.vertex_attr(j)) + half * local;
        }
        for l in 0..n1 {
            if l == i {
                let deg = T::from_usize_lossy(stars1[i].iter().map(Vec::len).sum());
                m[(i, n2 + l)] = cost.node_delete + half * deg * cost.edge_delete;
            } else {
                forbidden.push((i, n2 + l));
            }
        }
    }
    for r in 0..n2 {
        for j in 0..n2 {
            if r == j {
                let deg = T::from_usize_lossy(stars2[j].iter().map(Vec::len).sum());
                m[(n1 + r, j)] = cost.node_insert + half * deg * cost.edge_insert;
            } else {
                forbidden.push((n1 + r, j));
            }
        }
    }
    let sentinel = forbidden_cost(&m);
    for cell in forbidden {
        m[cell] = sentinel;
    }
    Ok(m)
}

fn forbidden_cost<T: Real>(m: &DMatrix<T>) -> T {
    let max = m.iter().fold(T::zero(), |a, &b| if b > a { b } else { a });
    let base = if max > T::zero() { max } else { T::one() };
    base * T::lit(FORBIDDEN_FACTOR)
}

/// Edge labels around each vertex; undirected graphs have one group per
/// vertex, directed graphs two (outgoing, incoming).
fn stars(g: &AttributedGraph) -> Vec<Vec<Vec<&AttributeValue>>> {
    (0..g.num_vertices())
        .map(|u| {
            if g.is_directed() {
                vec![
                    g.incident(u, true).into_iter().map(|(_, a)| a).collect(),
                    g.incident(u, false).into_iter().map(|(_, a)| a).collect(),
                ]
            } else {
                vec![g.incident(u, true).into_iter().map(|(_, a)| a).collect()]
            }
        })
        .collect()
}

/// Optimal cost of editing one edge star into another.
fn edge_matching_cost<T: Real>(
    a: &[&AttributeValue],
    b: &[&AttributeValue],
    cost: &CostModel<T>,
) -> Result<T> {
    let (p, q) = (a.len(), b.len());
    if p == 0 {
        return Ok(T::from_usize_lossy(q) * cost.edge_insert);
    }
    if q == 0 {
        return Ok(T::from_usize_lossy(p) * cost.edge_delete);
    }
    let k = p + q;
    let mut m = DMatrix::<T>::zeros(k, k);
    let mut forbidden = Vec::new();
    for i in 0..p {
        for j in 0..q {
            m[(i, j)] = cost.edge_subst(a[i], b[j]);
        }
        for l in 0..p {
            if l == i {
                m[(i, q + l)] = cost.edge_delete;
            } else {
                forbidden.push((i, q + l));
            }
        }
    }
    for r in 0..q {
        for j in 0..q {
            if r == j {
                m[(p + r, j)] = cost.edge_insert;
            } else {
                forbidden.push((p + r, j));
            }
        }
    }
    let sentinel = forbidden_cost(&m);
    for cell in forbidden {
        m[cell] = sentinel;
    }
    Ok(lsap_solve(&m)?.total_cost)
}
