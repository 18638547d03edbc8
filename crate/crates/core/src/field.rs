//! Summary functions sampled on a grid: Gaussian KDE and distance function.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{rows_of, separable_gaussian_sum, values_from_rows, GridSpec};
use crate::io::MatrixFile;
use crate::synth::PointCloud;

/// Default resolution per axis when no grid is configured.
pub const DEFAULT_RESOLUTION: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Density,
    Distance,
}

impl FieldKind {
    fn as_str(self) -> &'static str {
        match self {
            FieldKind::Density => "density",
            FieldKind::Distance => "distance",
        }
    }
}

/// A scalar function sampled at the nodes of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    /// Row-major, `values[spec.index(i, j)]`.
    pub values: Vec<f64>,
    pub kind: FieldKind,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                spec.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "{} field values must be finite and nonnegative, found {v}",
                kind.as_str()
            )));
        }
        Ok(GridField { spec, values, kind })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    /// Riemann sum of the field with node-centred cells.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut meta = vec![("kind".to_string(), self.kind.as_str().to_string())];
        meta.extend(self.spec.to_meta());
        MatrixFile { meta, rows: rows_of(&self.spec, &self.values) }.write(path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = MatrixFile::read(path)?;
        let kind = match file.require(path, "kind")? {
            "density" => FieldKind::Density,
            "distance" => FieldKind::Distance,
            other => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    reason: format!("unknown field kind `{other}`"),
                })
            }
        };
        let spec = GridSpec::from_meta(&file, path)?;
        let values = values_from_rows(&spec, file.rows, path)?;
        GridField::new(spec, values, kind)
    }
}

/// Default density grid: the cloud's bounding box expanded by `4h`.
pub fn default_density_grid(cloud: &PointCloud, h: f64, resolution: usize) -> Result<GridSpec> {
    let bbox = cloud
        .bounding_box()
        .ok_or_else(|| Error::InvalidInput("empty point cloud".into()))?;
    GridSpec::around(bbox, 4.0 * h, resolution, resolution)
}

/// Gaussian kernel density estimate `(n h²)⁻¹ Σᵢ K((Xᵢ - x)/h)` at every node,
/// with `K` the product of two standard normal densities. No truncation.
pub fn kde_grid(cloud: &PointCloud, h: f64, spec: &GridSpec) -> Result<GridField> {
    if cloud.is_empty() {
        return Err(Error::InvalidInput("density of an empty point cloud is undefined".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", "bandwidth must be positive and finite"));
    }
    spec.validate()?;
    let norm = 1.0 / (cloud.len() as f64 * h * h);
    let values = separable_gaussian_sum(
        &spec.xs(),
        &spec.ys(),
        cloud.points.iter().map(|&(x, y)| (x, y, norm)),
        h,
    );
    Ok(GridField { spec: *spec, values, kind: FieldKind::Density })
}

/// Euclidean distance from each node to the nearest cloud point.
pub fn distance_grid(cloud: &PointCloud, spec: &GridSpec) -> Result<GridField> {
    if cloud.is_empty() {
        return Err(Error::InvalidInput("distance to an empty point cloud is undefined".into()));
    }
    spec.validate()?;
    let xs = spec.xs();
    let ys = spec.ys();
    let mut values = Vec::with_capacity(spec.len());
    for &x in &xs {
        for &y in &ys {
            let d2 = cloud
                .points
                .iter()
                .map(|&(px, py)| (x - px) * (x - px) + (y - py) * (y - py))
                .fold(f64::INFINITY, f64::min);
            values.push(d2.sqrt());
        }
    }
    Ok(GridField { spec: *spec, values, kind: FieldKind::Distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use crate::synth;

    #[test]
    fn kde_single_point_at_node() {
        let cloud = PointCloud::new(vec![(0.0, 0.0)]).unwrap();
        let spec = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 3, 3).unwrap();
        let f = kde_grid(&cloud, 1.0, &spec).unwrap();
        assert!((f.at(1, 1) - 1.0 / std::f64::consts::TAU).abs() < 1e-15);
    }

    #[test]
    fn kde_integrates_to_one() {
        let cloud = synth::gen_gaussian_mixture(200, &synth::THREE_CENTERS, 0.2, RngSeed(1)).unwrap();
        let h = 0.07;
        let (xl, xh, yl, yh) = cloud.bounding_box().unwrap();
        let spec = GridSpec::new(xl - 5.0 * h, xh + 5.0 * h, yl - 5.0 * h, yh + 5.0 * h, 200, 200).unwrap();
        let f = kde_grid(&cloud, h, &spec).unwrap();
        assert!((f.integral() - 1.0).abs() < 0.01, "{}", f.integral());
    }

    #[test]
    fn kde_linear_in_empirical_measure() {
        let a = synth::gen_uniform_square(30, -1.0, 1.0, RngSeed(2)).unwrap();
        let b = synth::gen_uniform_square(30, -1.0, 1.0, RngSeed(3)).unwrap();
        let mut ab = a.clone();
        ab.points.extend(&b.points);
        let spec = GridSpec::new(-1.5, 1.5, -1.5, 1.5, 20, 25).unwrap();
        let fa = kde_grid(&a, 0.2, &spec).unwrap();
        let fb = kde_grid(&b, 0.2, &spec).unwrap();
        let fab = kde_grid(&ab, 0.2, &spec).unwrap();
        for k in 0..spec.len() {
            let avg = 0.5 * (fa.values[k] + fb.values[k]);
            assert!((fab.values[k] - avg).abs() <= 1e-12 * avg.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn empty_cloud_errors() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        assert!(kde_grid(&PointCloud::default(), 0.1, &spec).is_err());
        assert!(distance_grid(&PointCloud::default(), &spec).is_err());
        let one = PointCloud::new(vec![(0.0, 0.0)]).unwrap();
        assert!(kde_grid(&one, 0.0, &spec).is_err());
    }

    #[test]
    fn distance_examples() {
        let cloud = PointCloud::new(vec![(0.0, 0.0)]).unwrap();
        let spec = GridSpec::new(0.0, 3.0, 0.0, 4.0, 4, 5).unwrap();
        let f = distance_grid(&cloud, &spec).unwrap();
        assert_eq!(f.at(3, 4), 5.0);
        assert_eq!(f.at(0, 0), 0.0);
    }

    #[test]
    fn distance_matches_brute_force_and_is_lipschitz() {
        let cloud = synth::gen_uniform_square(50, -1.0, 1.0, RngSeed(4)).unwrap();
        let spec = GridSpec::new(-1.2, 1.2, -1.1, 1.3, 17, 23).unwrap();
        let f = distance_grid(&cloud, &spec).unwrap();
        for i in 0..spec.nx {
            for j in 0..spec.ny {
                let (x, y) = (spec.x(i), spec.y(j));
                let mut best = f64::INFINITY;
                for &(px, py) in &cloud.points {
                    best = best.min((x - px).hypot(y - py));
                }
                assert!((f.at(i, j) - best).abs() <= 1e-15);
                if i + 1 < spec.nx {
                    assert!((f.at(i, j) - f.at(i + 1, j)).abs() <= spec.dx() + 1e-12);
                }
                if j + 1 < spec.ny {
                    assert!((f.at(i, j) - f.at(i, j + 1)).abs() <= spec.dy() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let cloud = synth::gen_uniform_square(20, -1.0, 1.0, RngSeed(5)).unwrap();
        let spec = default_density_grid(&cloud, 0.1, 16).unwrap();
        let f = kde_grid(&cloud, 0.1, &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        f.write_csv(&p).unwrap();
        assert_eq!(GridField::read_csv(&p).unwrap(), f);
    }
}
