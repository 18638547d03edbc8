//! Kernel-smoothed persistence intensities.
//!
//! A diagram `{(b_j, d_j)}` with weights `w_j` becomes the grid function
//!
//! ```text
//! κ̂_τ(x, y) = Σ_j w_j τ⁻² K((x - b_j)/τ) K((y - d_j)/τ)
//! ```
//!
//! with `K` the standard normal density. Several diagrams are summarized by
//! the pointwise mean of their intensities.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{rows_of, separable_gaussian_sum, values_from_rows, GridSpec};
use crate::io::{fmt_f64, MatrixFile};
use crate::persistence::PersistenceDiagram;

/// Monotone transform of a lifetime with `L(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum LifetimeTransform {
    Identity,
    /// `L(x) = x^exponent`, `exponent > 0`.
    Power { exponent: f64 },
}

impl LifetimeTransform {
    pub fn apply(&self, lifetime: f64) -> f64 {
        match *self {
            LifetimeTransform::Identity => lifetime,
            LifetimeTransform::Power { exponent } => lifetime.powf(exponent),
        }
    }

    pub fn label(&self) -> String {
        match self {
            LifetimeTransform::Identity => "identity".into(),
            LifetimeTransform::Power { exponent } => format!("power:{}", fmt_f64(*exponent)),
        }
    }

    /// Inverse of the `identity` / `power:EXP` labels.
    pub fn parse(s: &str) -> Option<Self> {
        if s == "identity" {
            return Some(LifetimeTransform::Identity);
        }
        let e: f64 = s.strip_prefix("power:")?.parse().ok()?;
        Some(LifetimeTransform::Power { exponent: e })
    }
}

/// Feature weights `w = g(dim) · L_dim(lifetime)` for dimensions 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub g: [f64; 2],
    pub lifetime: [LifetimeTransform; 2],
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec { g: [1.0, 1.0], lifetime: [LifetimeTransform::Identity; 2] }
    }
}

impl WeightSpec {
    pub fn with_g(g0: f64, g1: f64) -> Result<Self> {
        let w = WeightSpec { g: [g0, g1], ..Default::default() };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.g.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::param("g", "multipliers must be finite and nonnegative"));
        }
        for l in &self.lifetime {
            if let LifetimeTransform::Power { exponent } = l {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::param("lifetime", "power exponent must be positive so that L(0) = 0"));
                }
            }
            if l.apply(0.0) != 0.0 {
                return Err(Error::param("lifetime", "transform must satisfy L(0) = 0"));
            }
        }
        Ok(())
    }
}

/// `g(dim) · L_dim(lifetime)`.
pub fn weight_eval(w: &WeightSpec, dim: u8, lifetime: f64) -> Result<f64> {
    if !(lifetime >= 0.0) {
        return Err(Error::InvalidInput(format!("lifetime must be nonnegative, got {lifetime}")));
    }
    let d = dim as usize;
    if d > 1 {
        return Err(Error::param("dim", "weights are defined for dimensions 0 and 1"));
    }
    Ok(w.g[d] * w.lifetime[d].apply(lifetime))
}

/// A smoothed intensity on a grid over the (birth, death) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub tau: f64,
    pub weights: WeightSpec,
}

impl IntensityGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    /// Riemann-sum mass `Σ values · Δx · Δy`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// Riemann sum of `h · κ̂` over the grid.
    pub fn integrate_against(&self, h: impl Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.spec.nx {
            let x = self.spec.x(i);
            for j in 0..self.spec.ny {
                total += h(x, self.spec.y(j)) * self.at(i, j);
            }
        }
        total * self.spec.cell_area()
    }

    pub fn is_compatible(&self, other: &IntensityGrid) -> bool {
        self.spec == other.spec && self.tau == other.tau && self.weights == other.weights
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut meta = self.spec.to_meta();
        meta.push(("tau".into(), fmt_f64(self.tau)));
        meta.push(("g0".into(), fmt_f64(self.weights.g[0])));
        meta.push(("g1".into(), fmt_f64(self.weights.g[1])));
        meta.push(("L0".into(), self.weights.lifetime[0].label()));
        meta.push(("L1".into(), self.weights.lifetime[1].label()));
        MatrixFile { meta, rows: rows_of(&self.spec, &self.values) }.write(path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = MatrixFile::read(path)?;
        let spec = GridSpec::from_meta(&file, path)?;
        let tau = file.require_f64(path, "tau")?;
        let mut weights = WeightSpec::with_g(file.require_f64(path, "g0")?, file.require_f64(path, "g1")?)?;
        for (k, key) in ["L0", "L1"].iter().enumerate() {
            let raw = file.require(path, key)?;
            weights.lifetime[k] = LifetimeTransform::parse(raw).ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: 1,
                reason: format!("unknown lifetime transform `{raw}`"),
            })?;
        }
        let values = values_from_rows(&spec, file.rows, path)?;
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidInput("intensity values must be nonnegative".into()));
        }
        Ok(IntensityGrid { spec, values, tau, weights })
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tau", format!("smoothing bandwidth must be positive, got {tau}")))
    }
}

/// Default intensity grid: bounding box of all pairs expanded by `4τ`.
pub fn default_intensity_grid<'a>(
    diagrams: impl IntoIterator<Item = &'a PersistenceDiagram>,
    tau: f64,
    resolution: usize,
) -> Result<GridSpec> {
    check_tau(tau)?;
    let bbox = diagrams
        .into_iter()
        .filter_map(|d| d.bounding_box())
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3)))
        .ok_or_else(|| Error::InvalidInput("no persistence pairs to place an intensity grid around".into()))?;
    GridSpec::around(bbox, 4.0 * tau, resolution, resolution)
}

/// Smooths weighted atoms `(birth, death, weight)` with a product Gaussian of
/// bandwidth `tau`. Building block of [`smooth_diagram`].
pub fn smooth_points(
    atoms: impl IntoIterator<Item = (f64, f64, f64)>,
    tau: f64,
    weights: WeightSpec,
    spec: &GridSpec,
) -> Result<IntensityGrid> {
    check_tau(tau)?;
    spec.validate()?;
    let inv = 1.0 / (tau * tau);
    let values = separable_gaussian_sum(
        &spec.xs(),
        &spec.ys(),
        atoms.into_iter().map(|(b, d, w)| (b, d, w * inv)),
        tau,
    );
    Ok(IntensityGrid { spec: *spec, values, tau, weights })
}

/// κ̂_τ of one diagram on `spec`.
pub fn smooth_diagram(
    diagram: &PersistenceDiagram,
    tau: f64,
    weights: &WeightSpec,
    spec: &GridSpec,
) -> Result<IntensityGrid> {
    weights.validate()?;
    let atoms = diagram
        .pairs
        .iter()
        .map(|p| Ok((p.birth, p.death, weight_eval(weights, p.dim, p.lifetime())?)))
        .collect::<Result<Vec<_>>>()?;
    smooth_points(atoms, tau, *weights, spec)
}

/// Pointwise mean of compatible intensity grids.
pub fn average_intensity(grids: &[IntensityGrid]) -> Result<IntensityGrid> {
    let first = grids
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot average an empty list of intensities".into()))?;
    if let Some(k) = grids.iter().position(|g| !g.is_compatible(first)) {
        return Err(Error::IncompatibleGrids(format!(
            "grid {k} differs from grid 0 in spec, tau or weights"
        )));
    }
    let mut values = vec![0.0; first.values.len()];
    for g in grids {
        for (v, x) in values.iter_mut().zip(&g.values) {
            *v += x;
        }
    }
    let n = grids.len() as f64;
    values.iter_mut().for_each(|v| *v /= n);
    Ok(IntensityGrid { values, ..first.clone() })
}
