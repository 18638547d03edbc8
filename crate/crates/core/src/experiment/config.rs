//! Experiment configuration files (JSON) and master-seed derivation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analyze::SpectralOptions;
use crate::error::{Error, Result};
use crate::field::DEFAULT_RESOLUTION;
use crate::grid::GridPlan;
use crate::inference::{MiseConfig, PowerConfig};
use crate::intensity::WeightSpec;
use crate::io;
use crate::rng::derive_seed;
use crate::synth::Population;

/// Master seed used when neither the file nor the command line sets one.
pub const DEFAULT_MASTER_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Fig2,
    Fig4,
    Mise,
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Mise => "mise",
            ExperimentKind::Custom => "custom",
        }
    }

    /// Stochastic stages in derivation order: stage `k` gets
    /// `derive_seed(master, k)` unless the file pins it.
    pub fn stages(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Fig2 | ExperimentKind::Custom => &["clouds", "kmeans", "test"],
            ExperimentKind::Fig4 => &["trials"],
            ExperimentKind::Mise => &["study"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingChoice {
    Mds,
    Spectral,
}

/// Spectral embedding settings: Gaussian similarity scale plus options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    pub scale: f64,
    #[serde(default)]
    pub skip_trivial: bool,
    #[serde(default)]
    pub degree_rescale: bool,
    #[serde(default)]
    pub row_normalize: bool,
}

impl SpectralSection {
    pub fn options(&self) -> SpectralOptions {
        SpectralOptions { skip_trivial: self.skip_trivial, degree_rescale: self.degree_rescale, row_normalize: self.row_normalize }
    }
}

/// Clouds from several populations → intensities → distances → embedding →
/// k-means; optionally a permutation test between exactly two populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(default = "default_populations")]
    pub populations: Vec<Population>,
    pub n_points: usize,
    /// Clouds per population.
    pub n_diagrams: usize,
    pub h: f64,
    pub tau: f64,
    #[serde(default = "default_max_dim")]
    pub max_dim: u8,
    #[serde(default = "default_density_grid")]
    pub density_grid: GridPlan,
    #[serde(default = "default_intensity_grid")]
    pub intensity_grid: GridPlan,
    #[serde(default)]
    pub weights: WeightSpec,
    #[serde(default = "default_embedding")]
    pub embedding: EmbeddingChoice,
    #[serde(default = "default_dims")]
    pub dims: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSection>,
    /// Number of k-means clusters; defaults to the number of populations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    /// Permutation count for a two-population test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_permutations: Option<usize>,
}

fn default_populations() -> Vec<Population> {
    vec![Population::Circle, Population::ThreeCircles, Population::Gauss3]
}
fn default_max_dim() -> u8 {
    1
}
fn default_density_grid() -> GridPlan {
    GridPlan::auto(DEFAULT_RESOLUTION)
}
fn default_intensity_grid() -> GridPlan {
    GridPlan::auto(64)
}
fn default_embedding() -> EmbeddingChoice {
    EmbeddingChoice::Mds
}
fn default_dims() -> usize {
    2
}

impl ClusterConfig {
    /// Full-size run: 500 points, 50 clouds per population.
    pub fn full_scale() -> Self {
        ClusterConfig {
            populations: default_populations(),
            n_points: 500,
            n_diagrams: 50,
            h: 0.07,
            tau: 0.1,
            max_dim: default_max_dim(),
            density_grid: default_density_grid(),
            intensity_grid: default_intensity_grid(),
            weights: WeightSpec::default(),
            embedding: default_embedding(),
            dims: default_dims(),
            spectral: None,
            clusters: None,
            test_permutations: None,
        }
    }

    pub fn desk() -> Self {
        ClusterConfig { n_points: 200, n_diagrams: 20, ..Self::full_scale() }
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.unwrap_or(self.populations.len())
    }

    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut bad = |f: &str, r: String| out.push((f.to_string(), r));
        if self.populations.is_empty() {
            bad("populations", "must not be empty".into());
        }
        for (k, p) in self.populations.iter().enumerate() {
            if let Population::Contaminated { q } = p {
                if !(0.0..=1.0).contains(q) {
                    bad(&format!("populations[{k}].q"), "must lie in [0, 1]".into());
                }
            }
        }
        if self.n_points == 0 {
            bad("n_points", "must be positive".into());
        }
        if self.n_diagrams == 0 {
            bad("n_diagrams", "must be positive".into());
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            bad("h", "must be positive".into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            bad("tau", "must be positive".into());
        }
        if self.max_dim > 1 {
            bad("max_dim", "must be 0 or 1".into());
        }
        if let Err(e) = self.density_grid.validate() {
            bad("density_grid", e.to_string());
        }
        if let Err(e) = self.intensity_grid.validate() {
            bad("intensity_grid", e.to_string());
        }
        if let Err(e) = self.weights.validate() {
            bad("weights", e.to_string());
        }
        let total = self.populations.len() * self.n_diagrams;
        if self.dims == 0 || self.dims > total.max(1) {
            bad("dims", format!("must lie in 1..={total}"));
        }
        match (self.embedding, &self.spectral) {
            (EmbeddingChoice::Spectral, None) => bad("spectral", "required when embedding is spectral".into()),
            (_, Some(s)) if !(s.scale > 0.0 && s.scale.is_finite()) => bad("spectral.scale", "must be positive".into()),
            _ => {}
        }
        let k = self.n_clusters();
        if k == 0 || k > total.max(1) {
            bad("clusters", format!("must lie in 1..={total}"));
        }
        if let Some(b) = self.test_permutations {
            if b == 0 {
                bad("test_permutations", "must be at least 1".into());
            }
            if self.populations.len() != 2 {
                bad("test_permutations", "a two-sample test needs exactly two populations".into());
            }
        }
        out
    }
}

/// One experiment file. Exactly the section named by `kind` is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Master seed; per-stage seeds not listed in `stage_seeds` derive from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stage_seeds: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fig2: Option<ClusterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fig4: Option<PowerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mise: Option<MiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<ClusterConfig>,
}

/// Where a seed came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Config,
    Cli,
    Default,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeed {
    pub seed: u64,
    pub source: SeedSource,
    /// Index `k` in `derive_seed(master, k)` when derived.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedDerivation {
    pub master_seed: u64,
    pub master_source: SeedSource,
    pub rule: String,
    pub stages: BTreeMap<String, StageSeed>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub reason: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "{}: {}", self.path, self.reason)
        }
    }
}

pub fn issues_to_error(issues: &[ConfigIssue]) -> Error {
    Error::InvalidConfig(issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))
}

impl ExperimentConfig {
    pub fn new_fig2(c: ClusterConfig) -> Self {
        ExperimentConfig { kind: ExperimentKind::Fig2, fig2: Some(c), ..Self::empty(ExperimentKind::Fig2) }
    }
    pub fn new_fig4(c: PowerConfig) -> Self {
        ExperimentConfig { fig4: Some(c), ..Self::empty(ExperimentKind::Fig4) }
    }
    pub fn new_mise(c: MiseConfig) -> Self {
        ExperimentConfig { mise: Some(c), ..Self::empty(ExperimentKind::Mise) }
    }
    pub fn new_custom(c: ClusterConfig) -> Self {
        ExperimentConfig { custom: Some(c), ..Self::empty(ExperimentKind::Custom) }
    }

    fn empty(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: None,
            stage_seeds: BTreeMap::new(),
            out_dir: None,
            fig2: None,
            fig4: None,
            mise: None,
            custom: None,
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigIssue> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigIssue { path: if path == "." { String::new() } else { path }, reason: e.into_inner().to_string() }
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        io::write_string(path, &self.to_json())
    }

    /// Every constraint violation, with dotted field paths.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let name = self.kind.name();
        let present = [
            ("fig2", self.fig2.is_some()),
            ("fig4", self.fig4.is_some()),
            ("mise", self.mise.is_some()),
            ("custom", self.custom.is_some()),
        ];
        for (section, is_set) in present {
            if section == name && !is_set {
                out.push(ConfigIssue { path: section.into(), reason: format!("section required for kind `{name}`") });
            }
            if section != name && is_set {
                out.push(ConfigIssue { path: section.into(), reason: format!("unused for kind `{name}`") });
            }
        }
        let stages = self.kind.stages();
        for key in self.stage_seeds.keys() {
            if !stages.contains(&key.as_str()) {
                out.push(ConfigIssue {
                    path: format!("stage_seeds.{key}"),
                    reason: format!("unknown stage; expected one of {stages:?}"),
                });
            }
        }
        let section = match self.kind {
            ExperimentKind::Fig2 => self.fig2.as_ref().map(|c| c.violations()),
            ExperimentKind::Custom => self.custom.as_ref().map(|c| c.violations()),
            ExperimentKind::Fig4 => self.fig4.as_ref().map(|c| c.violations()),
            ExperimentKind::Mise => self.mise.as_ref().map(|c| c.violations()),
        };
        for (field, reason) in section.unwrap_or_default() {
            out.push(ConfigIssue { path: format!("{name}.{field}"), reason });
        }
        out
    }

    /// Fills in every stage seed and returns how each was obtained.
    pub fn resolve_seeds(&mut self, cli_seed: Option<u64>) -> SeedDerivation {
        let (master, master_source) = match (cli_seed, self.seed) {
            (Some(s), _) => (s, SeedSource::Cli),
            (None, Some(s)) => (s, SeedSource::Config),
            (None, None) => (DEFAULT_MASTER_SEED, SeedSource::Default),
        };
        self.seed = Some(master);
        let mut stages = BTreeMap::new();
        for (k, name) in self.kind.stages().iter().enumerate() {
            let entry = match self.stage_seeds.get(*name) {
                Some(&seed) => StageSeed { seed, source: SeedSource::Config, index: None },
                None => StageSeed { seed: derive_seed(master, k as u64), source: SeedSource::Derived, index: Some(k as u64) },
            };
            self.stage_seeds.insert(name.to_string(), entry.seed);
            stages.insert(name.to_string(), entry);
        }
        SeedDerivation {
            master_seed: master,
            master_source,
            rule: "stage k of the kind's stage list: derive_seed(master, k) = splitmix64(master ^ splitmix64(k + 0x9E3779B97F4A7C15))".into(),
            stages,
        }
    }

    pub fn stage_seed(&self, name: &str) -> crate::rng::RngSeed {
        crate::rng::RngSeed(self.stage_seeds.get(name).copied().unwrap_or_else(|| {
            let k = self.kind.stages().iter().position(|s| *s == name).unwrap_or(usize::MAX) as u64;
            derive_seed(self.seed.unwrap_or(DEFAULT_MASTER_SEED), k)
        }))
    }
}

/// Reads and checks a configuration file, reporting every violation.
pub fn validate_config(path: &Path) -> std::result::Result<ExperimentConfig, Vec<ConfigIssue>> {
    let text = io::read_to_string(path).map_err(|e| vec![ConfigIssue { path: String::new(), reason: e.to_string() }])?;
    let cfg = ExperimentConfig::from_json(&text).map_err(|e| vec![e])?;
    let issues = cfg.issues();
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(issues)
    }
}
