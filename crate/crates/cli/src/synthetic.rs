//! Synthetic graph collections for runs without the IAM data.

use std::collections::BTreeMap;

use anyhow::{bail, ensure};
use graphdrift::rng::{child_rng, derive_seed};
use graphdrift::{AttributeValue, AttributedGraph};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Geometric graphs resembling the Letter dataset: every class has a fixed
/// template of 2-D vertex positions and edges; instances jitter the
/// positions with Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLetterSpec {
    pub num_classes: usize,
    /// Inclusive range of template vertex counts.
    pub vertices_range: (usize, usize),
    pub coordinate_noise: f64,
    /// Horizontal offset between consecutive class templates.
    pub class_separation: f64,
}

/// Templates depend on the class index only, so every seed shares them.
const TEMPLATE_SEED: u64 = 0x5EED_7E3F_1A7E;

pub fn class_name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("C{i}")
    }
}

struct Template {
    points: Vec<[f64; 2]>,
    edges: Vec<(usize, usize)>,
}

fn template(spec: &SyntheticLetterSpec, class: usize) -> Template {
    let mut rng = child_rng(TEMPLATE_SEED, class as u64);
    let (lo, hi) = spec.vertices_range;
    let nv = lo + class % (hi - lo + 1);
    let offset = class as f64 * spec.class_separation;
    let points = (0..nv)
        .map(|_| [offset + rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
        .collect();
    let mut edges: Vec<(usize, usize)> = (1..nv).map(|i| (i - 1, i)).collect();
    for u in 0..nv {
        for v in u + 2..nv {
            if rng.random_bool(0.3) {
                edges.push((u, v));
            }
        }
    }
    Template { points, edges }
}

impl SyntheticLetterSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.num_classes >= 1, "need at least one class");
        let (lo, hi) = self.vertices_range;
        ensure!(lo >= 1 && lo <= hi, "vertices_range must satisfy 1 <= lo <= hi");
        ensure!(
            self.coordinate_noise >= 0.0 && self.coordinate_noise.is_finite(),
            "coordinate_noise must be finite and nonnegative"
        );
        ensure!(self.class_separation > 0.0, "class_separation must be positive");
        Ok(())
    }
}

/// `per_class` graphs for each class, deterministic in `seed`.
pub fn generate_synthetic(
    spec: &SyntheticLetterSpec,
    per_class: usize,
    seed: u64,
) -> anyhow::Result<BTreeMap<String, Vec<AttributedGraph>>> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.coordinate_noise)?;
    let mut out = BTreeMap::new();
    for c in 0..spec.num_classes {
        let t = template(spec, c);
        let mut rng = child_rng(seed, c as u64);
        let graphs = (0..per_class)
            .map(|_| {
                let mut b = AttributedGraph::builder(false);
                for (i, p) in t.points.iter().enumerate() {
                    let x = p[0] + noise.sample(&mut rng);
                    let y = p[1] + noise.sample(&mut rng);
                    b.add_vertex(i.to_string(), AttributeValue::NumericVector(vec![x, y]))?;
                }
                for &(u, v) in &t.edges {
                    b.add_edge_by_index(u, v, AttributeValue::None)?;
                }
                Ok(b.build())
            })
            .collect::<graphdrift::Result<Vec<_>>>()?;
        out.insert(class_name(c), graphs);
    }
    Ok(out)
}

/// Unlabelled Erdős–Rényi graphs on `vertices` vertices, one class per
/// edge probability.
pub fn generate_density(
    vertices: usize,
    classes: &[(String, f64)],
    per_class: usize,
    seed: u64,
) -> anyhow::Result<BTreeMap<String, Vec<AttributedGraph>>> {
    if vertices < 2 {
        bail!("density graphs need at least two vertices");
    }
    let mut out = BTreeMap::new();
    for (c, (name, p)) in classes.iter().enumerate() {
        ensure!((0.0..=1.0).contains(p), "edge probability {p} outside [0, 1]");
        let mut rng = child_rng(derive_seed(seed, 1), c as u64);
        let graphs = (0..per_class)
            .map(|_| {
                let mut b = AttributedGraph::builder(false);
                for i in 0..vertices {
                    b.add_vertex(i.to_string(), AttributeValue::None)?;
                }
                for u in 0..vertices {
                    for v in u + 1..vertices {
                        if rng.random_bool(*p) {
                            b.add_edge_by_index(u, v, AttributeValue::None)?;
                        }
                    }
                }
                Ok(b.build())
            })
            .collect::<graphdrift::Result<Vec<_>>>()?;
        out.insert(name.clone(), graphs);
    }
    Ok(out)
}
