//! Orchestration of whole experiments and their output manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{issues_to_error, ClusterConfig, EmbeddingChoice, ExperimentConfig, ExperimentKind, SeedDerivation};
use crate::analyze::{
    best_permutation_purity, classical_mds, confusion_matrix, distance_matrix, kmeans, similarity_from_distance,
    spectral_embed, Embedding,
};
use crate::error::{Error, Result};
use crate::inference::{mise_study, permutation_test, power_study, MiseConfig, PowerConfig};
use crate::intensity::{default_intensity_grid, smooth_diagram};
use crate::io::{self, fmt_f64};
use crate::pipeline::{DensityPipeline, PipelineOutput};
use crate::rng::RngSeed;

/// Record of one run, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub kind: ExperimentKind,
    /// Configuration with every stage seed filled in.
    pub config: ExperimentConfig,
    pub seeds: SeedDerivation,
    /// Output files relative to the output directory, in write order.
    pub outputs: Vec<String>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&io::read_to_string(path)?)?)
    }
}

/// Collects output paths and stage timings.
struct Recorder {
    root: PathBuf,
    outputs: Vec<String>,
    timings: BTreeMap<String, f64>,
    clock: Instant,
}

impl Recorder {
    fn new(root: &Path) -> Self {
        Recorder { root: root.to_path_buf(), outputs: Vec::new(), timings: BTreeMap::new(), clock: Instant::now() }
    }

    fn path(&mut self, rel: &str) -> PathBuf {
        self.outputs.push(rel.to_string());
        self.root.join(rel)
    }

    fn lap(&mut self, stage: &str) {
        self.timings.insert(stage.to_string(), self.clock.elapsed().as_secs_f64());
        self.clock = Instant::now();
    }
}

/// Validates and runs a configuration, writing into `out_dir`.
/// `cli_seed` overrides the file's master seed.
pub fn run_experiment(config: &ExperimentConfig, cli_seed: Option<u64>, out_dir: &Path) -> Result<RunManifest> {
    let issues = config.issues();
    if !issues.is_empty() {
        return Err(issues_to_error(&issues));
    }
    let mut config = config.clone();
    let seeds = config.resolve_seeds(cli_seed);
    let mut rec = Recorder::new(out_dir);
    let summary = match config.kind {
        ExperimentKind::Fig2 => run_clusters(config.fig2.as_ref().expect("checked"), &config, &mut rec)?,
        ExperimentKind::Custom => run_clusters(config.custom.as_ref().expect("checked"), &config, &mut rec)?,
        ExperimentKind::Fig4 => run_power(config.fig4.as_ref().expect("checked"), &config, &mut rec)?,
        ExperimentKind::Mise => run_mise_curve(config.mise.as_ref().expect("checked"), &config, &mut rec)?,
    };
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: config.kind,
        config: config.clone(),
        seeds,
        outputs: Vec::new(),
        timings: BTreeMap::new(),
        summary,
    };
    let resolved = rec.path("config.resolved.json");
    config.write(&resolved)?;
    let manifest_path = rec.path("manifest.json");
    manifest.outputs = rec.outputs.clone();
    manifest.timings = rec.timings.clone();
    io::write_string(&manifest_path, &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(manifest)
}

pub fn run_fig2(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    expect_kind(config, ExperimentKind::Fig2)?;
    run_experiment(config, None, out_dir)
}

pub fn run_fig4(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    expect_kind(config, ExperimentKind::Fig4)?;
    run_experiment(config, None, out_dir)
}

pub fn run_mise(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    expect_kind(config, ExperimentKind::Mise)?;
    run_experiment(config, None, out_dir)
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind == kind {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("kind: expected `{}`, found `{}`", kind.name(), config.kind.name())))
    }
}

/// File stem of item `id`, shared by every intermediate directory.
pub fn item_name(id: usize) -> String {
    format!("{id:04}")
}

fn run_clusters(cfg: &ClusterConfig, config: &ExperimentConfig, rec: &mut Recorder) -> Result<serde_json::Value> {
    let items: Vec<(usize, usize)> =
        (0..cfg.populations.len()).flat_map(|p| (0..cfg.n_diagrams).map(move |i| (p, i))).collect();
    let cloud_seed = config.stage_seed("clouds");
    let outputs: Vec<PipelineOutput> = items
        .par_iter()
        .map(|&(p, i)| {
            let pipe = DensityPipeline {
                population: cfg.populations[p],
                n_points: cfg.n_points,
                h: cfg.h,
                density_grid: cfg.density_grid,
                max_dim: cfg.max_dim,
            };
            pipe.run(cloud_seed.descend(&[p as u64, i as u64]))
                .map_err(|e| e.in_stage(format!("{} cloud {i}", cfg.populations[p].name())))
        })
        .collect::<Result<_>>()?;
    rec.lap("pipeline");

    let diagrams: Vec<_> = outputs.iter().map(|o| o.diagram.clone()).collect();
    let spec = cfg
        .intensity_grid
        .resolve(|r| default_intensity_grid(&diagrams, cfg.tau, r))
        .map_err(|e| e.in_stage(format!("intensity grid tau={}", cfg.tau)))?;
    let grids = diagrams
        .par_iter()
        .map(|d| smooth_diagram(d, cfg.tau, &cfg.weights, &spec))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage(format!("intensity tau={}", cfg.tau)))?;
    rec.lap("intensity");

    for (id, (o, g)) in outputs.iter().zip(&grids).enumerate() {
        let name = item_name(id);
        o.cloud.write_csv(&rec.path(&format!("clouds/{name}.csv")))?;
        o.field.write_csv(&rec.path(&format!("fields/{name}.csv")))?;
        o.diagram.write_csv(&rec.path(&format!("diagrams/{name}.csv")))?;
        g.write_csv(&rec.path(&format!("intensities/{name}.csv")))?;
    }
    rec.lap("write intermediates");

    let delta = distance_matrix(&grids).map_err(|e| e.in_stage("distance matrix"))?;
    delta.write_csv(&rec.path("delta.csv"))?;
    let embedding = embed(cfg, &delta).map_err(|e| e.in_stage("embedding"))?;
    embedding.write_csv(&rec.path("embedding.csv"))?;
    let labels: Vec<usize> = items.iter().map(|&(p, _)| p).collect();
    write_coords(&rec.path("coords.csv"), cfg, &embedding, &labels)?;
    rec.lap("embedding");

    let k = cfg.n_clusters();
    let clusters = kmeans(&embedding, k, config.stage_seed("kmeans")).map_err(|e| e.in_stage(format!("k-means k={k}")))?;
    let mut text = String::from("id,population,cluster\n");
    for (id, (&p, &c)) in labels.iter().zip(&clusters.labels).enumerate() {
        text.push_str(&format!("{id},{},{c}\n", cfg.populations[p].name()));
    }
    io::write_string(&rec.path("clusters.csv"), &text)?;
    let table = confusion_matrix(&labels, &clusters.labels, cfg.populations.len(), k)?;
    let mut text = std::iter::once("population".to_string())
        .chain((0..k).map(|c| format!("cluster{c}")))
        .collect::<Vec<_>>()
        .join(",");
    text.push('\n');
    for (p, row) in table.iter().enumerate() {
        text.push_str(cfg.populations[p].name());
        for v in row {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    io::write_string(&rec.path("confusion.csv"), &text)?;
    let purity = if k <= 8 { Some(best_permutation_purity(&table)?) } else { None };
    rec.lap("clustering");

    let mut summary = json!({
        "items": items.len(),
        "intensity_grid": spec,
        "purity": purity,
        "kmeans_inertia": clusters.inertia,
        "eigenvalues": embedding.eigenvalues,
    });
    if let Some(b) = cfg.test_permutations {
        let n = cfg.n_diagrams;
        let result = permutation_test(&grids[..n], &grids[n..], b, config.stage_seed("test"))
            .map_err(|e| e.in_stage("permutation test"))?;
        io::write_string(&rec.path("test.json"), &(serde_json::to_string_pretty(&result)? + "\n"))?;
        summary["test"] = serde_json::to_value(&result)?;
        rec.lap("test");
    }
    Ok(summary)
}

fn embed(cfg: &ClusterConfig, delta: &crate::analyze::DistanceMatrix) -> Result<Embedding> {
    match cfg.embedding {
        EmbeddingChoice::Mds => classical_mds(delta, cfg.dims),
        EmbeddingChoice::Spectral => {
            let s = cfg.spectral.expect("validated");
            spectral_embed(&similarity_from_distance(delta, s.scale)?, cfg.dims, s.options())
        }
    }
}

fn write_coords(path: &Path, cfg: &ClusterConfig, e: &Embedding, labels: &[usize]) -> Result<()> {
    let mut text = String::from("id,population");
    for c in 1..=e.coords.first().map_or(0, |r| r.len()) {
        text.push_str(&format!(",c{c}"));
    }
    text.push('\n');
    for (id, (row, &p)) in e.coords.iter().zip(labels).enumerate() {
        text.push_str(&format!("{id},{}", cfg.populations[p].name()));
        for v in row {
            text.push(',');
            text.push_str(&fmt_f64(*v));
        }
        text.push('\n');
    }
    io::write_string(path, &text)
}

/// `q,rate@α...` rows of a power curve.
pub fn power_curve_csv(curve: &crate::inference::PowerCurve) -> String {
    let mut text = String::from("q");
    for a in &curve.alphas {
        text.push_str(&format!(",rate@{}", fmt_f64(*a)));
    }
    text.push('\n');
    for (q, rates) in curve.q_values.iter().zip(&curve.rates) {
        text.push_str(&fmt_f64(*q));
        for r in rates {
            text.push(',');
            text.push_str(&fmt_f64(*r));
        }
        text.push('\n');
    }
    text
}

pub fn power_pvalues_csv(curve: &crate::inference::PowerCurve) -> String {
    let mut text = String::from("q,trial,p\n");
    for (q, ps) in curve.q_values.iter().zip(&curve.p_values) {
        for (t, p) in ps.iter().enumerate() {
            text.push_str(&format!("{},{t},{}\n", fmt_f64(*q), fmt_f64(*p)));
        }
    }
    text
}

pub fn mise_curve_csv(curve: &crate::inference::MiseCurve) -> String {
    let mut text = String::from("N,tau,mise,se\n");
    for k in 0..curve.n_values.len() {
        text.push_str(&format!(
            "{},{},{},{}\n",
            curve.n_values[k],
            fmt_f64(curve.taus[k]),
            fmt_f64(curve.mise[k]),
            fmt_f64(curve.std_errors[k])
        ));
    }
    text
}

fn run_power(cfg: &PowerConfig, config: &ExperimentConfig, rec: &mut Recorder) -> Result<serde_json::Value> {
    let seed: RngSeed = config.stage_seed("trials");
    let curve = power_study(cfg, seed).map_err(|e| e.in_stage("power study"))?;
    rec.lap("power study");
    io::write_string(&rec.path("curve.csv"), &power_curve_csv(&curve))?;
    io::write_string(&rec.path("pvalues.csv"), &power_pvalues_csv(&curve))?;
    Ok(json!({ "trials_per_q": curve.trials, "q_values": curve.q_values, "alphas": curve.alphas, "rates": curve.rates }))
}

fn run_mise_curve(cfg: &MiseConfig, config: &ExperimentConfig, rec: &mut Recorder) -> Result<serde_json::Value> {
    let curve = mise_study(cfg, config.stage_seed("study")).map_err(|e| e.in_stage("mise study"))?;
    rec.lap("mise study");
    io::write_string(&rec.path("curve.csv"), &mise_curve_csv(&curve))?;
    let fit = json!({ "slope": curve.slope, "n_ref": curve.n_ref, "tau_ref": curve.tau_ref, "tau_rule": curve.tau_rule });
    io::write_string(&rec.path("fit.json"), &(serde_json::to_string_pretty(&fit)? + "\n"))?;
    Ok(fit)
}
