//! Dissimilarity-space embedding.
//!
//! A graph `g` is represented by its distances to `M` prototype graphs,
//! `[d(g, r_1), ..., d(g, r_M)]`. Prototypes come from [`k_centres`]. For
//! graphs over a fixed vertex universe, [`scaling`] provides the Frobenius
//! distance and the linear map `u = X J y^2` built on classical scaling.

mod kcentres;
pub mod scaling;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use kcentres::{k_centres, k_centres_on_matrix, KCentresOutcome, MAX_KCENTRES_ITERATIONS};
pub use scaling::{classical_scaling, embed_identified, frobenius_distance, u_transform, ScalingModel};

use crate::error::{Error, Result};
use crate::ged::{pairwise_distances, GraphDistance};
use crate::graph::AttributedGraph;
use crate::scalar::Real;

/// Anything the detector can consume as one observation.
pub trait Observation<T: Real> {
    fn vector(&self) -> &DVector<T>;
}

impl<T: Real> Observation<T> for DVector<T> {
    fn vector(&self) -> &DVector<T> {
        self
    }
}

impl<T: Real, O: Observation<T> + ?Sized> Observation<T> for &O {
    fn vector(&self) -> &DVector<T> {
        (**self).vector()
    }
}

/// Distances from one graph to each prototype.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityVector<T: Real>(DVector<T>);

impl<T: Real> DissimilarityVector<T> {
    pub fn new(values: DVector<T>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::invalid("dissimilarities must be nonnegative"));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &DVector<T> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<T> {
        self.0
    }
}

impl<T: Real> Observation<T> for DissimilarityVector<T> {
    fn vector(&self) -> &DVector<T> {
        &self.0
    }
}

/// The prototype graphs and their cached pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet<T: Real> {
    prototypes: Vec<AttributedGraph>,
    pairwise: DMatrix<T>,
    covering_radius: T,
}

impl<T: Real> PrototypeSet<T> {
    pub fn new(prototypes: Vec<AttributedGraph>, pairwise: DMatrix<T>, covering_radius: T) -> Result<Self> {
        let m = prototypes.len();
        if m == 0 {
            return Err(Error::invalid("a prototype set needs at least one graph"));
        }
        if pairwise.shape() != (m, m) {
            return Err(Error::invalid(format!(
                "pairwise matrix is {:?}, expected {m}x{m}",
                pairwise.shape()
            )));
        }
        for i in 0..m {
            if pairwise[(i, i)] != T::zero() {
                return Err(Error::invalid("pairwise matrix needs a zero diagonal"));
            }
            for j in 0..i {
                if pairwise[(i, j)] != pairwise[(j, i)] {
                    return Err(Error::invalid("pairwise matrix must be symmetric"));
                }
            }
        }
        if !(covering_radius >= T::zero()) {
            return Err(Error::invalid("covering radius must be nonnegative"));
        }
        for p in &prototypes[1..] {
            prototypes[0].check_compatible(p)?;
        }
        Ok(Self {
            prototypes,
            pairwise,
            covering_radius,
        })
    }

    /// Prototype set from explicit graphs; the covering radius is left at 0.
    pub fn from_graphs<D: GraphDistance<T> + ?Sized>(prototypes: Vec<AttributedGraph>, d: &D) -> Result<Self> {
        let pairwise = pairwise_distances(&prototypes, d)?;
        Self::new(prototypes, pairwise, T::zero())
    }

    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    pub fn prototypes(&self) -> &[AttributedGraph] {
        &self.prototypes
    }

    pub fn pairwise(&self) -> &DMatrix<T> {
        &self.pairwise
    }

    pub fn covering_radius(&self) -> T {
        self.covering_radius
    }
}

#[derive(Serialize, Deserialize)]
struct PrototypeRecord {
    prototypes: Vec<AttributedGraph>,
    pairwise: Vec<Vec<f64>>,
    covering_radius: f64,
}

impl<T: Real> Serialize for PrototypeSet<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.len();
        PrototypeRecord {
            prototypes: self.prototypes.clone(),
            pairwise: (0..m)
                .map(|i| (0..m).map(|j| self.pairwise[(i, j)].as_f64()).collect())
                .collect(),
            covering_radius: self.covering_radius.as_f64(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for PrototypeSet<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PrototypeRecord::deserialize(d)?;
        let m = r.pairwise.len();
        if r.pairwise.iter().any(|row| row.len() != m) {
            return Err(serde::de::Error::custom("pairwise matrix is not square"));
        }
        let pairwise = DMatrix::from_fn(m, m, |i, j| T::lit(r.pairwise[i][j]));
        PrototypeSet::new(r.prototypes, pairwise, T::lit(r.covering_radius)).map_err(serde::de::Error::custom)
    }
}

/// Dissimilarity representation of `g` against the prototypes.
pub fn embed<T: Real, D: GraphDistance<T> + ?Sized>(
    g: &AttributedGraph,
    prototypes: &PrototypeSet<T>,
    d: &D,
) -> Result<DissimilarityVector<T>> {
    prototypes.prototypes[0].check_compatible(g)?;
    let values = prototypes
        .prototypes
        .iter()
        .map(|r| d.distance(g, r))
        .collect::<Result<Vec<T>>>()?;
    DissimilarityVector::new(DVector::from_vec(values))
}

/// [`embed`] over a batch, in parallel and in input order.
pub fn embed_all<T: Real, D: GraphDistance<T> + ?Sized>(
    graphs: &[AttributedGraph],
    prototypes: &PrototypeSet<T>,
    d: &D,
) -> Result<Vec<DissimilarityVector<T>>> {
    graphs.par_iter().map(|g| embed(g, prototypes, d)).collect()
}
