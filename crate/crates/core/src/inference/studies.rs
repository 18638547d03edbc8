//! Monte Carlo studies of the intensity estimators and the two-sample test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::generator::{DiagramGenerator, SyntheticProcess};
use super::two_sample::permutation_test;
use crate::error::{Error, Result};
use crate::grid::{gaussian, GridPlan, GridSpec};
use crate::intensity::{default_intensity_grid, smooth_diagram, smooth_points, weight_eval, IntensityGrid, WeightSpec};
use crate::persistence::PersistenceDiagram;
use crate::pipeline::DensityPipeline;
use crate::rng::RngSeed;
use crate::synth::Population;

/// `κ̂_N(x, y)` for the given diagrams, evaluated directly at one point.
pub fn intensity_at(diagrams: &[PersistenceDiagram], tau: f64, weights: &WeightSpec, x: f64, y: f64) -> Result<f64> {
    if diagrams.is_empty() {
        return Err(Error::InvalidInput("no diagrams".into()));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", "smoothing bandwidth must be positive"));
    }
    let inv = 1.0 / (tau * tau);
    let mut total = 0.0;
    for d in diagrams {
        for p in &d.pairs {
            let w = weight_eval(weights, p.dim, p.lifetime())?;
            total += w * inv * gaussian((x - p.birth) / tau) * gaussian((y - p.death) / tau);
        }
    }
    Ok(total / diagrams.len() as f64)
}

/// `κ̂_N` as one smoothing pass over the union of all pairs, each weighted by
/// `1/N`. Equal to the mean of the single-diagram intensities up to rounding.
pub fn pooled_intensity(diagrams: &[PersistenceDiagram], tau: f64, weights: &WeightSpec, spec: &GridSpec) -> Result<IntensityGrid> {
    if diagrams.is_empty() {
        return Err(Error::InvalidInput("no diagrams".into()));
    }
    weights.validate()?;
    let scale = 1.0 / diagrams.len() as f64;
    let atoms = diagrams
        .iter()
        .flat_map(|d| &d.pairs)
        .map(|p| Ok((p.birth, p.death, scale * weight_eval(weights, p.dim, p.lifetime())?)))
        .collect::<Result<Vec<_>>>()?;
    smooth_points(atoms, tau, *weights, spec)
}

/// Draws `count` diagrams with seeds `seed.child(0..count)`.
pub fn sample_diagrams(generator: &DiagramGenerator, count: usize, seed: RngSeed) -> Result<Vec<PersistenceDiagram>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| generator.sample(seed.child(i)).map_err(|e| e.in_stage(format!("diagram {i}"))))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

// ---------------------------------------------------------------------------
// Power of the permutation test

/// Uniform square against circle contamination, swept over `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub q_values: Vec<f64>,
    /// Points per cloud.
    pub n_points: usize,
    /// Clouds per group.
    pub n_diagrams: usize,
    pub h: f64,
    pub tau: f64,
    pub permutations: usize,
    pub trials: usize,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_density_grid")]
    pub density_grid: GridPlan,
    #[serde(default = "default_intensity_resolution")]
    pub intensity_resolution: usize,
    #[serde(default)]
    pub weights: WeightSpec,
}

fn default_alphas() -> Vec<f64> {
    vec![0.05, 0.01]
}

fn default_density_grid() -> GridPlan {
    GridPlan::auto(64)
}

fn default_intensity_resolution() -> usize {
    64
}

impl PowerConfig {
    /// Desk-scale sweep: 200 points, 20 clouds per group, 200 permutations, 50 trials.
    pub fn desk() -> Self {
        PowerConfig {
            q_values: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.10],
            n_points: 200,
            n_diagrams: 20,
            h: 0.1,
            tau: 0.025,
            permutations: 200,
            trials: 50,
            alphas: default_alphas(),
            density_grid: default_density_grid(),
            intensity_resolution: default_intensity_resolution(),
            weights: WeightSpec::default(),
        }
    }

    /// Full-size sweep: 500 points, 50 clouds per group, 1000 permutations.
    pub fn full_scale() -> Self {
        PowerConfig { n_points: 500, n_diagrams: 50, permutations: 1000, ..Self::desk() }
    }

    /// Every violated constraint as `(field, reason)`.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut bad = |f: &str, r: &str| out.push((f.to_string(), r.to_string()));
        if self.q_values.is_empty() {
            bad("q_values", "must not be empty");
        }
        if self.q_values.iter().any(|q| !(0.0..=1.0).contains(q)) {
            bad("q_values", "every q must lie in [0, 1]");
        }
        if self.n_points == 0 {
            bad("n_points", "must be positive");
        }
        if self.n_diagrams == 0 {
            bad("n_diagrams", "must be positive");
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            bad("h", "must be positive");
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            bad("tau", "must be positive");
        }
        if self.permutations == 0 {
            bad("permutations", "must be at least 1");
        }
        if self.trials == 0 {
            bad("trials", "must be at least 1");
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            bad("alphas", "each level must lie in (0, 1)");
        }
        if let Err(e) = self.density_grid.validate() {
            bad("density_grid", &e.to_string());
        }
        if self.intensity_resolution < 2 {
            bad("intensity_resolution", "must be at least 2");
        }
        if let Err(e) = self.weights.validate() {
            bad("weights", &e.to_string());
        }
        out
    }

    fn pipeline(&self, population: Population) -> DensityPipeline {
        DensityPipeline { population, n_points: self.n_points, h: self.h, density_grid: self.density_grid, max_dim: 0 }
    }
}

fn config_error(v: Vec<(String, String)>) -> Result<()> {
    if v.is_empty() {
        Ok(())
    } else {
        let msg: Vec<String> = v.into_iter().map(|(f, r)| format!("{f}: {r}")).collect();
        Err(Error::InvalidConfig(msg.join("; ")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub q_values: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `rates[k][a]`: rejection fraction at `q_values[k]` and `alphas[a]`.
    pub rates: Vec<Vec<f64>>,
    pub trials: usize,
    /// `p_values[k][t]` for trial `t` at `q_values[k]`.
    pub p_values: Vec<Vec<f64>>,
}

impl PowerCurve {
    pub fn rate(&self, q_index: usize, alpha: f64) -> Option<f64> {
        let a = self.alphas.iter().position(|x| *x == alpha)?;
        Some(self.rates[q_index][a])
    }
}

/// One full trial: `2N` clouds → KDE → dimension-0 superlevel diagrams →
/// intensities on a shared grid → permutation test. Returns the p-value.
pub fn power_trial(cfg: &PowerConfig, q: f64, seed: RngSeed) -> Result<f64> {
    let groups = [cfg.pipeline(Population::Uniform), cfg.pipeline(Population::Contaminated { q })];
    let mut diagrams: Vec<Vec<PersistenceDiagram>> = Vec::with_capacity(2);
    for (g, pipe) in groups.iter().enumerate() {
        let d = (0..cfg.n_diagrams as u64)
            .map(|i| pipe.diagram(seed.descend(&[g as u64, i])).map_err(|e| e.in_stage(format!("group {} cloud {i}", g + 1))))
            .collect::<Result<Vec<_>>>()?;
        diagrams.push(d);
    }
    let spec = default_intensity_grid(diagrams.iter().flatten(), cfg.tau, cfg.intensity_resolution)?;
    let smooth = |ds: &[PersistenceDiagram]| {
        ds.iter().map(|d| smooth_diagram(d, cfg.tau, &cfg.weights, &spec)).collect::<Result<Vec<_>>>()
    };
    let (a, b) = (smooth(&diagrams[0])?, smooth(&diagrams[1])?);
    Ok(permutation_test(&a, &b, cfg.permutations, seed.child(2))?.p_value)
}

/// Rejection rates over the `q` sweep. Trial `t` at sweep index `k` uses seed
/// `seed.descend([k, t])`; results are collected in trial order.
pub fn power_study(cfg: &PowerConfig, seed: RngSeed) -> Result<PowerCurve> {
    config_error(cfg.violations())?;
    let mut rates = Vec::new();
    let mut p_values = Vec::new();
    for (k, &q) in cfg.q_values.iter().enumerate() {
        let ps = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| power_trial(cfg, q, seed.descend(&[k as u64, t])).map_err(|e| e.in_stage(format!("q={q} trial {t}"))))
            .collect::<Result<Vec<f64>>>()?;
        rates.push(
            cfg.alphas
                .iter()
                .map(|&a| ps.iter().filter(|&&p| p <= a).count() as f64 / cfg.trials as f64)
                .collect(),
        );
        p_values.push(ps);
    }
    Ok(PowerCurve { q_values: cfg.q_values.clone(), alphas: cfg.alphas.clone(), rates, trials: cfg.trials, p_values })
}

// ---------------------------------------------------------------------------
// Integrated squared error against a reference intensity

/// `τ = c · N^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauRule {
    pub c: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
}

fn default_exponent() -> f64 {
    -1.0 / 6.0
}

impl TauRule {
    pub fn tau(&self, n: usize) -> f64 {
        self.c * (n as f64).powf(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiseConfig {
    pub n_values: Vec<usize>,
    pub tau_rule: TauRule,
    pub generator: DiagramGenerator,
    /// Reference sample size; defaults to 20 × the largest `N`.
    #[serde(default)]
    pub n_ref: Option<usize>,
    /// Reference bandwidth; defaults to half the smallest sweep `τ`.
    #[serde(default)]
    pub tau_ref: Option<f64>,
    pub reps: usize,
    /// Grid resolution per axis when the grid is placed automatically around
    /// the reference diagrams.
    pub grid: GridPlan,
    #[serde(default)]
    pub weights: WeightSpec,
}

impl MiseConfig {
    pub fn desk() -> Self {
        MiseConfig {
            n_values: vec![8, 16, 32, 64, 128],
            tau_rule: TauRule { c: 0.2, exponent: default_exponent() },
            generator: DiagramGenerator::Synthetic(SyntheticProcess::reference()),
            n_ref: None,
            tau_ref: None,
            reps: 40,
            grid: GridPlan::auto(160),
            weights: WeightSpec::default(),
        }
    }

    pub fn n_ref(&self) -> usize {
        self.n_ref.unwrap_or(20 * self.n_values.iter().copied().max().unwrap_or(0))
    }

    pub fn tau_ref(&self) -> f64 {
        self.tau_ref.unwrap_or_else(|| {
            0.5 * self.n_values.iter().map(|&n| self.tau_rule.tau(n)).fold(f64::INFINITY, f64::min)
        })
    }

    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut bad = |f: &str, r: String| out.push((f.to_string(), r));
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            bad("n_values", "must be a nonempty list of positive counts".into());
        }
        if !(self.tau_rule.c > 0.0 && self.tau_rule.c.is_finite() && self.tau_rule.exponent.is_finite()) {
            bad("tau_rule.c", "must be positive".into());
        }
        if let Err(e) = self.generator.validate() {
            bad("generator", e.to_string());
        }
        let max_n = self.n_values.iter().copied().max().unwrap_or(0);
        if self.n_ref() <= max_n {
            bad("n_ref", format!("must exceed the largest N ({max_n})"));
        }
        if let Some(t) = self.tau_ref {
            if !(t > 0.0 && t.is_finite()) {
                bad("tau_ref", "must be positive".into());
            }
        }
        if self.reps == 0 {
            bad("reps", "must be at least 1".into());
        }
        if let Err(e) = self.grid.validate() {
            bad("grid", e.to_string());
        }
        if let Err(e) = self.weights.validate() {
            bad("weights", e.to_string());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiseCurve {
    pub n_values: Vec<usize>,
    pub taus: Vec<f64>,
    pub mise: Vec<f64>,
    /// Monte Carlo standard error of each MISE estimate.
    pub std_errors: Vec<f64>,
    pub tau_rule: TauRule,
    pub n_ref: usize,
    pub tau_ref: f64,
    /// Log-log slope of MISE against N; `None` for a single-N sweep.
    pub slope: Option<f64>,
}

/// Reference intensity for the MISE study. The generator's seed stream
/// `seed.child(0)` is reserved for it.
pub struct MiseReference {
    pub grid: IntensityGrid,
}

impl MiseReference {
    pub fn build(cfg: &MiseConfig, max_tau: f64, seed: RngSeed) -> Result<Self> {
        let diagrams = sample_diagrams(&cfg.generator, cfg.n_ref(), seed.child(0))?;
        let tau_ref = cfg.tau_ref();
        let spec = cfg.grid.resolve(|r| default_intensity_grid(&diagrams, max_tau, r))?;
        Ok(MiseReference { grid: pooled_intensity(&diagrams, tau_ref, &cfg.weights, &spec)? })
    }

    /// `∫ (κ̂_N − κ̂_ref)²` for one draw of `n` diagrams smoothed at `tau`.
    pub fn ise(&self, cfg: &MiseConfig, n: usize, tau: f64, seed: RngSeed) -> Result<f64> {
        let diagrams = sample_diagrams(&cfg.generator, n, seed)?;
        let est = pooled_intensity(&diagrams, tau, &cfg.weights, &self.grid.spec)?;
        let ss: f64 = est.values.iter().zip(&self.grid.values).map(|(a, b)| (a - b).powi(2)).sum();
        Ok(ss * self.grid.spec.cell_area())
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Repetition `r` at sweep index `k` draws its diagrams from
/// `seed.descend([1, k, r])`; the ISE values are averaged in `r` order.
fn mise_at(reference: &MiseReference, cfg: &MiseConfig, k: usize, n: usize, tau: f64, seed: RngSeed) -> Result<(f64, f64)> {
    let ises = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| reference.ise(cfg, n, tau, seed.descend(&[1, k as u64, r])))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_se(&ises))
}

/// MISE of `κ̂_N` at `τ = c·N^exponent` over the `N` sweep.
pub fn mise_study(cfg: &MiseConfig, seed: RngSeed) -> Result<MiseCurve> {
    config_error(cfg.violations())?;
    let taus: Vec<f64> = cfg.n_values.iter().map(|&n| cfg.tau_rule.tau(n)).collect();
    let max_tau = taus.iter().copied().fold(0.0, f64::max);
    let reference = MiseReference::build(cfg, max_tau, seed).map_err(|e| e.in_stage("reference intensity"))?;
    let mut mise = Vec::new();
    let mut std_errors = Vec::new();
    for (k, (&n, &tau)) in cfg.n_values.iter().zip(&taus).enumerate() {
        let (m, se) = mise_at(&reference, cfg, k, n, tau, seed).map_err(|e| e.in_stage(format!("N={n}")))?;
        mise.push(m);
        std_errors.push(se);
    }
    let ns: Vec<f64> = cfg.n_values.iter().map(|&n| n as f64).collect();
    Ok(MiseCurve {
        n_values: cfg.n_values.clone(),
        taus,
        slope: loglog_slope(&ns, &mise),
        mise,
        std_errors,
        tau_rule: cfg.tau_rule,
        n_ref: cfg.n_ref(),
        tau_ref: cfg.tau_ref(),
    })
}

/// MISE at a fixed `N` over a list of bandwidths, against a reference at half
/// the smallest one.
pub fn mise_tau_sweep(cfg: &MiseConfig, n: usize, taus: &[f64], seed: RngSeed) -> Result<Vec<(f64, f64)>> {
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::param("taus", "need a nonempty list of positive bandwidths"));
    }
    let min_tau = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let max_tau = taus.iter().copied().fold(0.0, f64::max);
    let cfg = MiseConfig { n_values: vec![n], tau_ref: Some(cfg.tau_ref.unwrap_or(0.5 * min_tau)), ..cfg.clone() };
    config_error(cfg.violations())?;
    let reference = MiseReference::build(&cfg, max_tau, seed)?;
    taus.iter()
        .enumerate()
        .map(|(k, &tau)| mise_at(&reference, &cfg, k, n, tau, seed))
        .collect()
}

// ---------------------------------------------------------------------------
// Asymptotic normality of κ̂_N at a point

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub ks_distance: f64,
    pub mean: f64,
    pub sd: f64,
    pub reps: usize,
}

/// Kolmogorov–Smirnov distance between the empirical law of `sample` and the
/// standard normal.
pub fn ks_standard_normal(sample: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut z = sample.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// `reps` independent copies of `κ̂_N(x, y)`, standardized by their own
/// mean and standard deviation, compared to N(0, 1). Replicate `r` uses
/// diagrams `seed.child(r).child(0..N)`.
pub fn normality_check(
    generator: &DiagramGenerator,
    n: usize,
    tau: f64,
    weights: &WeightSpec,
    point: (f64, f64),
    reps: usize,
    seed: RngSeed,
) -> Result<NormalityReport> {
    if reps < 100 {
        return Err(Error::param("reps", "need at least 100 replicates"));
    }
    if n == 0 {
        return Err(Error::param("N", "must be positive"));
    }
    generator.validate()?;
    let values = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let ds = sample_diagrams(generator, n, seed.child(r))?;
            intensity_at(&ds, tau, weights, point.0, point.1)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = values.iter().sum::<f64>() / reps as f64;
    let sd = (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    if !(sd > 1e-12 * m.abs()) || !sd.is_finite() {
        return Err(Error::DegenerateStatistic(format!("replicates of the intensity at {point:?} have sd {sd}")));
    }
    let z: Vec<f64> = values.iter().map(|v| (v - m) / sd).collect();
    Ok(NormalityReport { ks_distance: ks_standard_normal(&z), mean: m, sd, reps })
}

// ---------------------------------------------------------------------------
// Bias of κ̂_τ as τ → 0

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCurve {
    pub taus: Vec<f64>,
    /// `∫ |E κ̂_τ − E κ̂_τref|` at each τ.
    pub deviations: Vec<f64>,
    pub tau_ref: f64,
    pub slope: Option<f64>,
}

/// L1 deviation of the exact expectation `E κ̂_τ` from the reference
/// `E κ̂_τref` for a synthetic process, with `τ_ref = 0` meaning `κ` itself.
/// `step` is the lattice step of the mean measure; keep it at most half the
/// smallest bandwidth.
pub fn bias_study(
    process: &SyntheticProcess,
    taus: &[f64],
    tau_ref: f64,
    weights: &WeightSpec,
    spec: &GridSpec,
    step: f64,
) -> Result<BiasCurve> {
    if taus.is_empty() || taus.iter().any(|t| !(*t > tau_ref && t.is_finite())) {
        return Err(Error::param("taus", "bandwidths must exceed the reference bandwidth"));
    }
    let reference = if tau_ref > 0.0 {
        process.expected_intensity(tau_ref, weights, spec, step)?.values
    } else {
        process.intensity_grid(weights, spec)?
    };
    let mut deviations = Vec::new();
    for &tau in taus {
        let e = process.expected_intensity(tau, weights, spec, step)?;
        let sum: f64 = e.values.iter().zip(&reference).map(|(a, b)| (a - b).abs()).sum();
        deviations.push(sum * spec.cell_area());
    }
    Ok(BiasCurve { taus: taus.to_vec(), slope: loglog_slope(taus, &deviations), deviations, tau_ref })
}

// ---------------------------------------------------------------------------
// Monte Carlo identities

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureIdentityReport {
    /// `∫ |κ̄_A − κ̄_B|`.
    pub l1: f64,
    /// `∫ se(x, y)` with `se² = se_A² + se_B²` pointwise.
    pub integrated_se: f64,
    pub mass_difference: f64,
    pub mass_se: f64,
}

impl MixtureIdentityReport {
    pub fn within(&self, k: f64) -> bool {
        self.l1 <= k * self.integrated_se && self.mass_difference.abs() <= k * self.mass_se
    }
}

struct Moments {
    mean: Vec<f64>,
    /// Variance of the mean.
    var: Vec<f64>,
    mass: f64,
    mass_var: f64,
}

fn moments(grids: &[IntensityGrid]) -> Moments {
    let n = grids.len() as f64;
    let len = grids[0].values.len();
    let mut mean = vec![0.0; len];
    for g in grids {
        mean.iter_mut().zip(&g.values).for_each(|(m, v)| *m += v / n);
    }
    let mut var = vec![0.0; len];
    for g in grids {
        var.iter_mut().zip(g.values.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m).powi(2));
    }
    var.iter_mut().for_each(|s| *s /= (n - 1.0) * n);
    let masses: Vec<f64> = grids.iter().map(|g| g.mass()).collect();
    let mass = masses.iter().sum::<f64>() / n;
    let mass_var = masses.iter().map(|m| (m - mass).powi(2)).sum::<f64>() / ((n - 1.0) * n);
    Moments { mean, var, mass, mass_var }
}

fn smooth_all(diagrams: &[PersistenceDiagram], tau: f64, weights: &WeightSpec, spec: &GridSpec) -> Result<Vec<IntensityGrid>> {
    diagrams.par_iter().map(|d| smooth_diagram(d, tau, weights, spec)).collect()
}

/// Compares the component-weighted mean intensity (each component sampled
/// `m` times, means combined with the mixture weights) with the mean
/// intensity of `m` diagrams drawn from the mixture generator itself.
pub fn mixture_identity_check(
    components: &[(f64, DiagramGenerator)],
    m: usize,
    tau: f64,
    weights: &WeightSpec,
    resolution: usize,
    seed: RngSeed,
) -> Result<MixtureIdentityReport> {
    if components.is_empty() || m < 2 {
        return Err(Error::param("components", "need components and at least two diagrams per route"));
    }
    let total: f64 = components.iter().map(|c| c.0).sum();
    let mixture = DiagramGenerator::Mixture {
        components: components
            .iter()
            .map(|(w, g)| super::generator::MixtureComponent { weight: *w, generator: g.clone() })
            .collect(),
    };
    mixture.validate()?;
    let per_component = components
        .iter()
        .enumerate()
        .map(|(c, (_, g))| sample_diagrams(g, m, seed.descend(&[0, c as u64])))
        .collect::<Result<Vec<_>>>()?;
    let mixed = sample_diagrams(&mixture, m, seed.child(1))?;
    let spec = default_intensity_grid(per_component.iter().flatten().chain(&mixed), tau, resolution)?;

    let b = moments(&smooth_all(&mixed, tau, weights, &spec)?);
    let mut a_mean = vec![0.0; spec.len()];
    let mut a_var = vec![0.0; spec.len()];
    let (mut a_mass, mut a_mass_var) = (0.0, 0.0);
    for ((w, _), ds) in components.iter().zip(&per_component) {
        let p = w / total;
        let mo = moments(&smooth_all(ds, tau, weights, &spec)?);
        a_mean.iter_mut().zip(&mo.mean).for_each(|(s, v)| *s += p * v);
        a_var.iter_mut().zip(&mo.var).for_each(|(s, v)| *s += p * p * v);
        a_mass += p * mo.mass;
        a_mass_var += p * p * mo.mass_var;
    }
    let cell = spec.cell_area();
    let l1: f64 = a_mean.iter().zip(&b.mean).map(|(x, y)| (x - y).abs()).sum::<f64>() * cell;
    let integrated_se: f64 = a_var.iter().zip(&b.var).map(|(x, y)| (x + y).sqrt()).sum::<f64>() * cell;
    Ok(MixtureIdentityReport {
        l1,
        integrated_se,
        mass_difference: a_mass - b.mass,
        mass_se: (a_mass_var + b.mass_var).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    /// Mean of `Σ w·h(b, d)` over the diagrams.
    pub pairing: f64,
    /// Mean of `∫ h κ̂_τ` over an independent set of diagrams.
    pub smoothed: f64,
    pub se: f64,
}

impl PairingReport {
    pub fn z(&self) -> f64 {
        (self.pairing - self.smoothed) / self.se
    }
}

/// `E ⟨h, Φ⟩` against `∫ h · κ̂` from independent samples of `m` diagrams
/// each. Intensities live on a grid extending `6τ` past every pair.
pub fn pairing_identity_check(
    generator: &DiagramGenerator,
    h: impl Fn(f64, f64) -> f64 + Sync,
    m: usize,
    tau: f64,
    weights: &WeightSpec,
    resolution: usize,
    seed: RngSeed,
) -> Result<PairingReport> {
    if m < 2 {
        return Err(Error::param("m", "need at least two diagrams"));
    }
    weights.validate()?;
    let direct = sample_diagrams(generator, m, seed.child(0))?;
    let smoothed = sample_diagrams(generator, m, seed.child(1))?;
    let pairings = direct
        .iter()
        .map(|d| d.pairs.iter().map(|p| Ok(weight_eval(weights, p.dim, p.lifetime())? * h(p.birth, p.death))).sum())
        .collect::<Result<Vec<f64>>>()?;
    let bbox = smoothed
        .iter()
        .filter_map(|d| d.bounding_box())
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3)))
        .ok_or_else(|| Error::InvalidInput("no pairs to place a grid around".into()))?;
    let spec = GridSpec::around(bbox, 6.0 * tau, resolution, resolution)?;
    let integrals = smoothed
        .par_iter()
        .map(|d| Ok(smooth_diagram(d, tau, weights, &spec)?.integrate_against(&h)))
        .collect::<Result<Vec<f64>>>()?;
    let (p, p_se) = mean_se(&pairings);
    let (s, s_se) = mean_se(&integrals);
    Ok(PairingReport { pairing: p, smoothed: s, se: (p_se * p_se + s_se * s_se).sqrt() })
}
