//! Attributed graph data model.
//!
//! Graphs are immutable once built. Vertex identifiers are opaque strings and
//! carry no meaning across graphs; the only setting where vertex identity is
//! shared is [`IdentifiedGraph`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Label attached to a vertex or an edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeValue {
    NumericVector(Vec<f64>),
    Categorical(String),
    None,
}

impl AttributeValue {
    pub fn kind(&self) -> AttributeKind {
        match self {
            AttributeValue::NumericVector(v) => AttributeKind::NumericVector { dim: v.len() },
            AttributeValue::Categorical(_) => AttributeKind::Categorical,
            AttributeValue::None => AttributeKind::None,
        }
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            AttributeValue::NumericVector(v) => Some(v),
            _ => None,
        }
    }
}

impl From<Vec<f64>> for AttributeValue {
    fn from(v: Vec<f64>) -> Self {
        AttributeValue::NumericVector(v)
    }
}

impl From<&str> for AttributeValue {
    fn from(s: &str) -> Self {
        AttributeValue::Categorical(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    NumericVector { dim: usize },
    Categorical,
    None,
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeKind::NumericVector { dim } => write!(f, "numeric[{dim}]"),
            AttributeKind::Categorical => f.write_str("categorical"),
            AttributeKind::None => f.write_str("none"),
        }
    }
}

/// Per-dataset declaration of vertex and edge attribute types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub vertex: AttributeKind,
    pub edge: AttributeKind,
    /// Allowed vertex symbols when `vertex` is categorical; `None` accepts any.
    #[serde(default)]
    pub vertex_alphabet: Option<BTreeSet<String>>,
    #[serde(default)]
    pub edge_alphabet: Option<BTreeSet<String>>,
}

impl AttributeSchema {
    pub fn new(vertex: AttributeKind, edge: AttributeKind) -> Self {
        Self {
            vertex,
            edge,
            vertex_alphabet: None,
            edge_alphabet: None,
        }
    }

    pub fn validate(&self, g: &AttributedGraph) -> Result<()> {
        for (i, a) in g.vertex_attrs.iter().enumerate() {
            check_attr(a, self.vertex, self.vertex_alphabet.as_ref())
                .map_err(|m| Error::Schema(format!("vertex {}: {m}", g.vertex_ids[i])))?;
        }
        for (&(u, v), a) in &g.edges {
            check_attr(a, self.edge, self.edge_alphabet.as_ref()).map_err(|m| {
                Error::Schema(format!("edge ({}, {}): {m}", g.vertex_ids[u], g.vertex_ids[v]))
            })?;
        }
        Ok(())
    }
}

fn check_attr(
    a: &AttributeValue,
    kind: AttributeKind,
    alphabet: Option<&BTreeSet<String>>,
) -> std::result::Result<(), String> {
    if a.kind() != kind {
        return Err(format!("expected {kind}, found {}", a.kind()));
    }
    if let (AttributeValue::Categorical(s), Some(alpha)) = (a, alphabet) {
        if !alpha.contains(s) {
            return Err(format!("symbol {s:?} not in the declared alphabet"));
        }
    }
    Ok(())
}

/// Maps an edge attribute to an adjacency weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightRule {
    /// Every edge weighs 1.
    #[default]
    Unit,
    /// Component `i` of a numeric edge attribute; non-numeric edges weigh 1.
    NumericComponent(usize),
}

/// Directed or undirected graph with labelled vertices and edges.
///
/// Undirected edges are stored once with endpoints in ascending vertex
/// order. Self-loops and parallel edges are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct AttributedGraph {
    directed: bool,
    vertex_ids: Vec<String>,
    vertex_attrs: Vec<AttributeValue>,
    edges: BTreeMap<(usize, usize), AttributeValue>,
}

impl AttributedGraph {
    pub fn builder(directed: bool) -> GraphBuilder {
        GraphBuilder {
            directed,
            index: HashMap::new(),
            graph: AttributedGraph {
                directed,
                vertex_ids: Vec::new(),
                vertex_attrs: Vec::new(),
                edges: BTreeMap::new(),
            },
        }
    }

    pub fn empty(directed: bool) -> Self {
        Self::builder(directed).build()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn vertex_attr(&self, i: usize) -> &AttributeValue {
        &self.vertex_attrs[i]
    }

    pub fn vertex_attrs(&self) -> &[AttributeValue] {
        &self.vertex_attrs
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.vertex_ids.iter().position(|v| v == id)
    }

    /// Edges as `(source, target, attribute)` in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &AttributeValue)> + '_ {
        self.edges.iter().map(|(&(u, v), a)| (u, v, a))
    }

    /// Attribute of the edge between `u` and `v`, honouring direction.
    pub fn edge(&self, u: usize, v: usize) -> Option<&AttributeValue> {
        self.edges.get(&self.canonical(u, v))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge(u, v).is_some()
    }

    fn canonical(&self, u: usize, v: usize) -> (usize, usize) {
        if self.directed || u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Kind of the vertex attributes, `None` for a graph without vertices.
    pub fn vertex_kind(&self) -> Option<AttributeKind> {
        self.vertex_attrs.first().map(AttributeValue::kind)
    }

    pub fn edge_kind(&self) -> Option<AttributeKind> {
        self.edges.values().next().map(AttributeValue::kind)
    }

    /// Checks that both graphs can be compared under one attribute schema.
    pub fn check_compatible(&self, other: &AttributedGraph) -> Result<()> {
        if self.directed != other.directed {
            return Err(Error::Schema("directed and undirected graphs mixed".into()));
        }
        if let (Some(a), Some(b)) = (self.vertex_kind(), other.vertex_kind()) {
            if a != b {
                return Err(Error::Schema(format!("vertex attributes {a} vs {b}")));
            }
        }
        if let (Some(a), Some(b)) = (self.edge_kind(), other.edge_kind()) {
            if a != b {
                return Err(Error::Schema(format!("edge attributes {a} vs {b}")));
            }
        }
        Ok(())
    }

    /// `|V| x |V|` adjacency matrix in vertex order.
    pub fn adjacency_matrix<T: Real>(&self, rule: WeightRule) -> DMatrix<T> {
        let n = self.num_vertices();
        let mut a = DMatrix::<T>::zeros(n, n);
        for (u, v, attr) in self.edges() {
            let w = match (rule, attr) {
                (WeightRule::NumericComponent(i), AttributeValue::NumericVector(x)) => {
                    T::lit(x.get(i).copied().unwrap_or(1.0))
                }
                _ => T::one(),
            };
            a[(u, v)] = w;
            if !self.directed {
                a[(v, u)] = w;
            }
        }
        a
    }

    /// Rebuilds a graph from an adjacency matrix. Nonzero cells become edges
    /// carrying their weight as a one-component numeric attribute; vertices
    /// are named `"0".."n-1"` and carry no attribute.
    pub fn from_adjacency<T: Real>(a: &DMatrix<T>, directed: bool) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid("adjacency matrix must be square"));
        }
        let n = a.nrows();
        let mut b = Self::builder(directed);
        for i in 0..n {
            b.add_vertex(i.to_string(), AttributeValue::None)?;
        }
        for i in 0..n {
            let start = if directed { 0 } else { i };
            for j in start..n {
                let w = a[(i, j)];
                if w == T::zero() {
                    continue;
                }
                if !directed && a[(j, i)] != w {
                    return Err(Error::invalid(format!("asymmetric cell ({i}, {j})")));
                }
                b.add_edge_by_index(i, j, AttributeValue::NumericVector(vec![w.as_f64()]))?;
            }
        }
        Ok(b.build())
    }

    /// Combinatorial Laplacian `D - A` of the unweighted undirected skeleton.
    pub fn laplacian<T: Real>(&self) -> DMatrix<T> {
        let n = self.num_vertices();
        let mut l = DMatrix::<T>::zeros(n, n);
        let mut seen = BTreeSet::new();
        for (u, v, _) in self.edges() {
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                // reciprocal arcs of a directed graph collapse to one edge
                continue;
            }
            l[(u, v)] -= T::one();
            l[(v, u)] -= T::one();
            l[(u, u)] += T::one();
            l[(v, v)] += T::one();
        }
        l
    }

    /// Incident edges of `u` as `(neighbour, attribute)`; for directed graphs
    /// `outgoing` selects arcs leaving `u`, otherwise arcs entering it.
    pub(crate) fn incident(&self, u: usize, outgoing: bool) -> Vec<(usize, &AttributeValue)> {
        self.edges()
            .filter_map(|(a, b, attr)| {
                if !self.directed {
                    if a == u {
                        Some((b, attr))
                    } else if b == u {
                        Some((a, attr))
                    } else {
                        None
                    }
                } else if outgoing && a == u {
                    Some((b, attr))
                } else if !outgoing && b == u {
                    Some((a, attr))
                } else {
                    None
                }
            })
            .collect()
    }
}

pub struct GraphBuilder {
    directed: bool,
    index: HashMap<String, usize>,
    graph: AttributedGraph,
}

impl GraphBuilder {
    pub fn add_vertex(&mut self, id: impl Into<String>, attr: AttributeValue) -> Result<usize> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(Error::Graph(format!("duplicate vertex {id:?}")));
        }
        if let Some(first) = self.graph.vertex_attrs.first() {
            if first.kind() != attr.kind() {
                return Err(Error::Schema(format!(
                    "vertex {id:?} has {} attribute, graph uses {}",
                    attr.kind(),
                    first.kind()
                )));
            }
        }
        let i = self.graph.vertex_ids.len();
        self.index.insert(id.clone(), i);
        self.graph.vertex_ids.push(id);
        self.graph.vertex_attrs.push(attr);
        Ok(i)
    }

    pub fn add_edge(&mut self, source: &str, target: &str, attr: AttributeValue) -> Result<()> {
        let u = *self
            .index
            .get(source)
            .ok_or_else(|| Error::Graph(format!("edge endpoint {source:?} is not a vertex")))?;
        let v = *self
            .index
            .get(target)
            .ok_or_else(|| Error::Graph(format!("edge endpoint {target:?} is not a vertex")))?;
        self.add_edge_by_index(u, v, attr)
    }

    pub fn add_edge_by_index(&mut self, u: usize, v: usize, attr: AttributeValue) -> Result<()> {
        let n = self.graph.vertex_ids.len();
        if u >= n || v >= n {
            return Err(Error::Graph(format!("edge ({u}, {v}) out of range for {n} vertices")));
        }
        if u == v {
            return Err(Error::Graph(format!(
                "self-loop on {:?}",
                self.graph.vertex_ids[u]
            )));
        }
        if let Some(k) = self.graph.edge_kind() {
            if k != attr.kind() {
                return Err(Error::Schema(format!(
                    "edge has {} attribute, graph uses {k}",
                    attr.kind()
                )));
            }
        }
        let key = if self.directed || u < v { (u, v) } else { (v, u) };
        if self.graph.edges.insert(key, attr).is_some() {
            return Err(Error::Graph(format!(
                "duplicate edge ({:?}, {:?})",
                self.graph.vertex_ids[u], self.graph.vertex_ids[v]
            )));
        }
        Ok(())
    }

    pub fn vertex(mut self, id: impl Into<String>, attr: AttributeValue) -> Result<Self> {
        self.add_vertex(id, attr)?;
        Ok(self)
    }

    pub fn edge(mut self, source: &str, target: &str, attr: AttributeValue) -> Result<Self> {
        self.add_edge(source, target, attr)?;
        Ok(self)
    }

    pub fn build(self) -> AttributedGraph {
        self.graph
    }
}

/// Serialized form: vertices and edges by identifier.
#[derive(Serialize, Deserialize)]
struct GraphRecord {
    directed: bool,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: String,
    attr: AttributeValue,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    source: String,
    target: String,
    attr: AttributeValue,
}

impl TryFrom<GraphRecord> for AttributedGraph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        let mut b = AttributedGraph::builder(r.directed);
        for v in r.vertices {
            b.add_vertex(v.id, v.attr)?;
        }
        for e in r.edges {
            b.add_edge(&e.source, &e.target, e.attr)?;
        }
        Ok(b.build())
    }
}

impl From<AttributedGraph> for GraphRecord {
    fn from(g: AttributedGraph) -> Self {
        let edges = g
            .edges
            .iter()
            .map(|(&(u, v), a)| EdgeRecord {
                source: g.vertex_ids[u].clone(),
                target: g.vertex_ids[v].clone(),
                attr: a.clone(),
            })
            .collect();
        GraphRecord {
            directed: g.directed,
            vertices: g
                .vertex_ids
                .into_iter()
                .zip(g.vertex_attrs)
                .map(|(id, attr)| VertexRecord { id, attr })
                .collect(),
            edges,
        }
    }
}

/// Graph over a fixed universe of `N` vertices, represented by its weighted
/// adjacency matrix. Row/column `i` is vertex `i` of the universe in every
/// graph.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedGraph<T: Real> {
    weights: DMatrix<T>,
    directed: bool,
}

impl<T: Real> IdentifiedGraph<T> {
    pub fn new(weights: DMatrix<T>, directed: bool) -> Result<Self> {
        if !weights.is_square() || weights.nrows() == 0 {
            return Err(Error::invalid("identified graph needs a non-empty square matrix"));
        }
        let n = weights.nrows();
        for i in 0..n {
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= T::zero() && w <= T::one()) {
                    return Err(Error::invalid(format!("weight ({i}, {j}) = {w} outside [0, 1]")));
                }
                if !directed && w != weights[(j, i)] {
                    return Err(Error::invalid(format!("undirected weights asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { weights, directed })
    }

    pub fn universe_size(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<T> {
        &self.weights
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }
}
