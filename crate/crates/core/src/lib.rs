//! Change detection in streams of attributed graphs.
//!
//! Graphs are embedded as vectors of graph edit distances to a few
//! prototype graphs; a cumulative Mahalanobis test on windowed means of
//! those vectors raises alarms calibrated to a target average run length.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below name the usual double-precision instantiations.

pub mod baselines;
pub mod detector;
pub mod embedding;
pub mod error;
pub mod ged;
pub mod graph;
pub mod rng;
pub mod scalar;
pub mod stream;
pub mod theory;

pub use detector::{BaselineModel, ThresholdTable};
pub use embedding::{DissimilarityVector, PrototypeSet, ScalingModel};
pub use error::{Error, Result};
pub use ged::{BipartiteGed, CostModel, ExactGed, GraphDistance};
pub use graph::{AttributeKind, AttributeSchema, AttributeValue, AttributedGraph, IdentifiedGraph};
pub use scalar::Real;

pub type CostModelF64 = CostModel<f64>;
pub type BipartiteGedF64 = BipartiteGed<f64>;
pub type ExactGedF64 = ExactGed<f64>;
pub type PrototypeSetF64 = PrototypeSet<f64>;
pub type DissimilarityVectorF64 = DissimilarityVector<f64>;
pub type BaselineModelF64 = BaselineModel<f64>;
pub type ScalingModelF64 = ScalingModel<f64>;
pub type IdentifiedGraphF64 = IdentifiedGraph<f64>;

pub type CostModelF32 = CostModel<f32>;
pub type PrototypeSetF32 = PrototypeSet<f32>;
pub type BaselineModelF32 = BaselineModel<f32>;
