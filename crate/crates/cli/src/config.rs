//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use graphdrift::CostModel;
use serde::{Deserialize, Serialize};

use crate::synthetic::SyntheticLetterSpec;

/// Detector run on the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Main,
    Density,
    SpectralGap,
    /// The main detector with one prototype and windows of 25 graphs.
    M1,
}

/// Graph distance used for prototypes and embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    #[default]
    Bipartite,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    /// IAM-layout directory below the dataset root.
    Iam { path: PathBuf, schema: String },
    Synthetic(SyntheticSource),
    /// Erdős–Rényi graphs; each class is one edge probability.
    Density(DensitySource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    #[serde(flatten)]
    pub spec: SyntheticLetterSpec,
    pub per_class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySource {
    pub vertices: usize,
    /// Class label -> edge probability.
    pub classes: Vec<(String, f64)>,
    pub per_class: usize,
}

/// Edit costs as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub node_indel: f64,
    pub edge_indel: f64,
    #[serde(default = "one")]
    pub node_subst_scale: f64,
    #[serde(default = "one")]
    pub edge_subst_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            node_indel: 1.0,
            edge_indel: 1.0,
            node_subst_scale: 1.0,
            edge_subst_scale: 1.0,
        }
    }
}

impl CostConfig {
    pub fn model(&self) -> CostModel<f64> {
        CostModel {
            node_insert: self.node_indel,
            node_delete: self.node_indel,
            node_subst_scale: self.node_subst_scale,
            edge_insert: self.edge_indel,
            edge_delete: self.edge_indel,
            edge_subst_scale: self.edge_subst_scale,
        }
    }
}

/// One experiment: dataset, collections, detector and protocol sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub id: String,
    pub dataset: DatasetSource,
    pub nominal_classes: Vec<String>,
    pub non_nominal_classes: Vec<String>,
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    #[serde(default = "default_arl0")]
    pub arl0_target: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cost_model: CostConfig,
    #[serde(default = "default_detector")]
    pub detector: DetectorKind,
    #[serde(default)]
    pub distance: DistanceKind,
    /// `|T_c|`, graphs drawn for prototype selection.
    #[serde(default = "default_tc")]
    pub prototype_sample: usize,
    /// `|T_p|`, graphs drawn for the nominal mean and covariance.
    #[serde(default = "default_tp")]
    pub covariance_sample: usize,
    #[serde(default = "default_repeats")]
    pub kcentres_repeats: usize,
    /// Monte-Carlo trajectories for threshold calibration.
    #[serde(default = "default_sims")]
    pub num_sims: usize,
}

fn default_arl0() -> usize {
    200
}
fn default_replicates() -> usize {
    100
}
fn default_detector() -> DetectorKind {
    DetectorKind::Main
}
fn default_tc() -> usize {
    1000
}
fn default_tp() -> usize {
    300
}
fn default_repeats() -> usize {
    20
}
fn default_sims() -> usize {
    1_000_000
}

const PRESETS: &[(&str, &str)] = &[
    ("L-D2", include_str!("../presets/L-D2.toml")),
    ("L-D5", include_str!("../presets/L-D5.toml")),
    ("L-O", include_str!("../presets/L-O.toml")),
    ("L-S", include_str!("../presets/L-S.toml")),
    ("MUT", include_str!("../presets/MUT.toml")),
    ("AIDS", include_str!("../presets/AIDS.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn preset(name: &str) -> anyhow::Result<Self> {
        match PRESETS.iter().find(|p| p.0.eq_ignore_ascii_case(name)) {
            Some((_, text)) => Self::from_toml(text),
            None => bail!("unknown preset {name}"),
        }
    }

    /// Reads a TOML or JSON file; a bare preset name is also accepted.
    pub fn load(path_or_preset: &str) -> anyhow::Result<Self> {
        let path = Path::new(path_or_preset);
        if !path.exists() {
            return Self::preset(path_or_preset)
                .with_context(|| format!("{path_or_preset} is neither a file nor a preset"));
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec = if path.extension().is_some_and(|e| e == "json") {
            let spec: Self = serde_json::from_str(&text)?;
            spec.validate()?;
            spec
        } else {
            Self::from_toml(&text)?
        };
        Ok(spec)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.nominal_classes.is_empty() || self.non_nominal_classes.is_empty() {
            bail!("{}: class lists must be nonempty", self.id);
        }
        if self.replicates == 0 {
            bail!("{}: at least one replicate is required", self.id);
        }
        if self.m == 0 || self.n == 0 {
            bail!("{}: M and n must be positive", self.id);
        }
        if self.arl0_target < 2 {
            bail!("{}: arl0_target must be at least 2", self.id);
        }
        if self.covariance_sample < self.effective_m() + 2 {
            bail!("{}: covariance sample must exceed M + 1", self.id);
        }
        self.cost_model.model().validate()?;
        Ok(())
    }

    /// `M` after applying the detector's overrides.
    pub fn effective_m(&self) -> usize {
        match self.detector {
            DetectorKind::M1 => 1,
            _ => self.m,
        }
    }

    /// Window size after applying the detector's overrides; scalar
    /// baselines look at one graph at a time.
    pub fn effective_n(&self) -> usize {
        match self.detector {
            DetectorKind::M1 => 25,
            DetectorKind::Density | DetectorKind::SpectralGap => 1,
            DetectorKind::Main => self.n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for name in preset_names() {
            let spec = ExperimentSpec::preset(name).unwrap();
            assert_eq!(spec.id, name);
        }
        let ld2 = ExperimentSpec::preset("L-D2").unwrap();
        assert_eq!(ld2.nominal_classes, vec!["A", "E"]);
        assert_eq!(ld2.non_nominal_classes, vec!["F", "H"]);
        assert_eq!((ld2.m, ld2.n, ld2.arl0_target), (4, 5, 200));
    }

    #[test]
    fn m1_overrides() {
        let mut spec = ExperimentSpec::preset("L-D2").unwrap();
        spec.detector = DetectorKind::M1;
        assert_eq!((spec.effective_m(), spec.effective_n()), (1, 25));
        spec.detector = DetectorKind::Density;
        assert_eq!(spec.effective_n(), 1);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = ExperimentSpec::preset("MUT").unwrap();
        spec.nominal_classes.clear();
        assert!(spec.validate().is_err());
        assert!(ExperimentSpec::from_toml("id = \"x\"\nbogus = 1").is_err());
        assert!(ExperimentSpec::load("no-such-preset").is_err());
    }
}
