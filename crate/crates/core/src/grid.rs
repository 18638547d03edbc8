use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, MatrixFile};

/// A regular grid of `nx × ny` nodes spanning `[x_lo, x_hi] × [y_lo, y_hi]`,
/// endpoints included. Node `(i, j)` is stored at flat index `i * ny + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, nx: usize, ny: usize) -> Result<Self> {
        let spec = GridSpec { x_lo, x_hi, y_lo, y_hi, nx, ny };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_lo, self.x_hi, self.y_lo, self.y_hi].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("grid", "bounds must be finite"));
        }
        if !(self.x_lo < self.x_hi) || !(self.y_lo < self.y_hi) {
            return Err(Error::param("grid", "need x_lo < x_hi and y_lo < y_hi"));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::param("grid", "need at least 2 nodes per axis"));
        }
        Ok(())
    }

    /// Grid covering a bounding box expanded by `margin` on every side.
    pub fn around(bbox: (f64, f64, f64, f64), margin: f64, nx: usize, ny: usize) -> Result<Self> {
        let (xl, xh, yl, yh) = bbox;
        GridSpec::new(xl - margin, xh + margin, yl - margin, yh + margin, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_hi - self.y_lo) / (self.ny - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * (self.x_hi - self.x_lo) / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_lo + j as f64 * (self.y_hi - self.y_lo) / (self.ny - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub(crate) fn to_meta(self) -> Vec<(String, String)> {
        vec![
            ("x_lo".into(), fmt_f64(self.x_lo)),
            ("x_hi".into(), fmt_f64(self.x_hi)),
            ("y_lo".into(), fmt_f64(self.y_lo)),
            ("y_hi".into(), fmt_f64(self.y_hi)),
            ("nx".into(), self.nx.to_string()),
            ("ny".into(), self.ny.to_string()),
        ]
    }

    pub(crate) fn from_meta(file: &MatrixFile, path: &std::path::Path) -> Result<Self> {
        GridSpec::new(
            file.require_f64(path, "x_lo")?,
            file.require_f64(path, "x_hi")?,
            file.require_f64(path, "y_lo")?,
            file.require_f64(path, "y_hi")?,
            file.require_usize(path, "nx")?,
            file.require_usize(path, "ny")?,
        )
    }
}

/// Flattens `nx` rows of `ny` values, checking the shape against `spec`.
pub(crate) fn values_from_rows(spec: &GridSpec, rows: Vec<Vec<f64>>, path: &std::path::Path) -> Result<Vec<f64>> {
    if rows.len() != spec.nx || rows.iter().any(|r| r.len() != spec.ny) {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: format!("expected {} rows of {} values", spec.nx, spec.ny),
        });
    }
    Ok(rows.into_iter().flatten().collect())
}

pub(crate) fn rows_of(spec: &GridSpec, values: &[f64]) -> Vec<Vec<f64>> {
    values.chunks(spec.ny).map(|r| r.to_vec()).collect()
}

/// Standard normal density.
pub(crate) fn gaussian(u: f64) -> f64 {
    const INV_SQRT_TAU: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_TAU * (-0.5 * u * u).exp()
}

/// `Σ_p w_p · kx_p(i) · ky_p(j)` accumulated in point order, where
/// `kx_p(i) = K((xs[i] - a_p) / s)` and `ky_p(j) = K((ys[j] - b_p) / s)`.
/// Returns the flat `xs.len() × ys.len()` grid.
pub(crate) fn separable_gaussian_sum(
    xs: &[f64],
    ys: &[f64],
    points: impl IntoIterator<Item = (f64, f64, f64)>,
    scale: f64,
) -> Vec<f64> {
    let ny = ys.len();
    let mut out = vec![0.0; xs.len() * ny];
    let mut kx = vec![0.0; xs.len()];
    let mut ky = vec![0.0; ny];
    for (a, b, w) in points {
        for (k, &x) in kx.iter_mut().zip(xs) {
            *k = w * gaussian((x - a) / scale);
        }
        for (k, &y) in ky.iter_mut().zip(ys) {
            *k = gaussian((y - b) / scale);
        }
        for (row, &kxi) in out.chunks_mut(ny).zip(&kx) {
            if kxi == 0.0 {
                continue;
            }
            for (o, &kyj) in row.iter_mut().zip(&ky) {
                *o += kxi * kyj;
            }
        }
    }
    out
}


/// How a stage chooses its grid: a fixed spec, or a data-driven box at the
/// given resolution per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridPlan {
    Fixed { spec: GridSpec },
    Auto { resolution: usize },
}

impl GridPlan {
    pub fn auto(resolution: usize) -> Self {
        GridPlan::Auto { resolution }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GridPlan::Fixed { spec } => spec.validate(),
            GridPlan::Auto { resolution } if *resolution < 2 => {
                Err(Error::param("grid", "resolution must be at least 2"))
            }
            GridPlan::Auto { .. } => Ok(()),
        }
    }

    /// The fixed spec, or `auto(resolution)` for a data-driven one.
    pub fn resolve(&self, auto: impl FnOnce(usize) -> Result<GridSpec>) -> Result<GridSpec> {
        match *self {
            GridPlan::Fixed { spec } => Ok(spec),
            GridPlan::Auto { resolution } => auto(resolution),
        }
    }
}
