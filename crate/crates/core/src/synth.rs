//! Synthetic point-cloud populations.
//!
//! Draw protocols (all uniforms and normals come from [`Stream`]):
//!
//! - noisy circles: per point `center = index(m)`, `angle = 2π·u`, then two
//!   Box–Muller normals for the x and y noise.
//! - Gaussian mixture: per point `center = index(m)`, then two normals.
//! - uniform square and circle contamination share one protocol: every point
//!   consumes exactly three uniforms `(u0, u1, u2)`. `u0 < q` selects the
//!   circle component (angle `2π·u1`, `u2` unused); otherwise the point is
//!   `(lo + (hi-lo)·u1, lo + (hi-lo)·u2)`. The square generator ignores `u0`,
//!   so contamination with `q = 0` reproduces it exactly.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::rng::RngSeed;

/// Centers shared by the three-circle and three-Gaussian populations.
pub const THREE_CENTERS: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (1.5, 0.5)];

/// A finite set of points in the plane.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<(f64, f64)>,
}

impl PointCloud {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidInput("point cloud has a non-finite coordinate".into()));
        }
        Ok(PointCloud { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounding box `(x_lo, x_hi, y_lo, y_hi)`, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold(
            (first.0, first.0, first.1, first.1),
            |(xl, xh, yl, yh), &(x, y)| (xl.min(x), xh.max(x), yl.min(y), yh.max(y)),
        ))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = io::read_numeric_csv(path, &["x", "y"])?;
        PointCloud::new(rows.into_iter().map(|r| (r[0], r[1])).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self.points.iter().map(|&(x, y)| vec![x, y]);
        io::write_numeric_csv(path, &["x", "y"], rows)
    }
}

fn check_centers(centers: &[(f64, f64)]) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::param("centers", "must be nonempty"));
    }
    if centers.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::param("centers", "must be finite"));
    }
    Ok(())
}

/// Points on circles of a common radius, with isotropic Gaussian noise.
pub fn gen_noisy_circles(
    n: usize,
    centers: &[(f64, f64)],
    radius: f64,
    noise_sd: f64,
    seed: RngSeed,
) -> Result<PointCloud> {
    check_centers(centers)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("radius", "must be positive and finite"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::param("noise_sd", "must be nonnegative and finite"));
    }
    let mut rng = seed.stream();
    let points = (0..n)
        .map(|_| {
            let (cx, cy) = centers[rng.index(centers.len())];
            let angle = TAU * rng.uniform();
            let ex = noise_sd * rng.normal();
            let ey = noise_sd * rng.normal();
            (cx + radius * angle.cos() + ex, cy + radius * angle.sin() + ey)
        })
        .collect();
    Ok(PointCloud { points })
}

/// Equal-weight mixture of isotropic Gaussians.
pub fn gen_gaussian_mixture(
    n: usize,
    centers: &[(f64, f64)],
    sd: f64,
    seed: RngSeed,
) -> Result<PointCloud> {
    check_centers(centers)?;
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::param("sd", "must be positive and finite"));
    }
    let mut rng = seed.stream();
    let points = (0..n)
        .map(|_| {
            let (cx, cy) = centers[rng.index(centers.len())];
            let x = cx + sd * rng.normal();
            let y = cy + sd * rng.normal();
            (x, y)
        })
        .collect();
    Ok(PointCloud { points })
}

/// I.i.d. uniform points on `[lo, hi]²`.
pub fn gen_uniform_square(n: usize, lo: f64, hi: f64, seed: RngSeed) -> Result<PointCloud> {
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::param("lo/hi", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    let mut rng = seed.stream();
    let width = hi - lo;
    let points = (0..n)
        .map(|_| {
            let _selector = rng.uniform();
            let u1 = rng.uniform();
            let u2 = rng.uniform();
            (lo + width * u1, lo + width * u2)
        })
        .collect();
    Ok(PointCloud { points })
}

/// `(1-q)·Unif[-1,1]² + q·Unif(unit circle)`, drawn independently per point.
pub fn gen_circle_contamination(n: usize, q: f64, seed: RngSeed) -> Result<PointCloud> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("q", format!("must lie in [0, 1], got {q}")));
    }
    let mut rng = seed.stream();
    let points = (0..n)
        .map(|_| {
            let u0 = rng.uniform();
            let u1 = rng.uniform();
            let u2 = rng.uniform();
            if u0 < q {
                let angle = TAU * u1;
                (angle.cos(), angle.sin())
            } else {
                (-1.0 + 2.0 * u1, -1.0 + 2.0 * u2)
            }
        })
        .collect();
    Ok(PointCloud { points })
}

/// The named populations used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "pop")]
pub enum Population {
    /// One unit circle at the origin with noise sd 0.1.
    Circle,
    /// Three circles of radius 0.25 at [`THREE_CENTERS`] with noise sd 0.05.
    ThreeCircles,
    /// Three Gaussians at [`THREE_CENTERS`] with sd 0.2.
    Gauss3,
    /// Uniform on `[-1, 1]²`.
    Uniform,
    /// Uniform square contaminated by the unit circle with probability `q`.
    Contaminated { q: f64 },
}

impl Population {
    pub fn sample(&self, n: usize, seed: RngSeed) -> Result<PointCloud> {
        match *self {
            Population::Circle => gen_noisy_circles(n, &[(0.0, 0.0)], 1.0, 0.1, seed),
            Population::ThreeCircles => gen_noisy_circles(n, &THREE_CENTERS, 0.25, 0.05, seed),
            Population::Gauss3 => gen_gaussian_mixture(n, &THREE_CENTERS, 0.2, seed),
            Population::Uniform => gen_uniform_square(n, -1.0, 1.0, seed),
            Population::Contaminated { q } => gen_circle_contamination(n, q, seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Population::Circle => "circle",
            Population::ThreeCircles => "three-circles",
            Population::Gauss3 => "gauss3",
            Population::Uniform => "uniform",
            Population::Contaminated { .. } => "contaminated",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_xy(c: &PointCloud) -> (f64, f64) {
        let n = c.len() as f64;
        let (sx, sy) = c.points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        (sx / n, sy / n)
    }

    #[test]
    fn empty_clouds() {
        let s = RngSeed(1);
        assert!(gen_noisy_circles(0, &[(0.0, 0.0)], 1.0, 0.1, s).unwrap().is_empty());
        assert!(gen_gaussian_mixture(0, &[(0.0, 0.0)], 0.2, s).unwrap().is_empty());
        assert!(gen_uniform_square(0, -1.0, 1.0, s).unwrap().is_empty());
        assert!(gen_circle_contamination(0, 0.5, s).unwrap().is_empty());
    }

    #[test]
    fn parameter_errors() {
        let s = RngSeed(1);
        assert!(gen_noisy_circles(5, &[], 1.0, 0.1, s).is_err());
        assert!(gen_noisy_circles(5, &[(0.0, 0.0)], 0.0, 0.1, s).is_err());
        assert!(gen_noisy_circles(5, &[(0.0, 0.0)], 1.0, -0.1, s).is_err());
        assert!(gen_gaussian_mixture(5, &[], 0.2, s).is_err());
        assert!(gen_gaussian_mixture(5, &[(0.0, 0.0)], 0.0, s).is_err());
        assert!(gen_uniform_square(5, 1.0, 1.0, s).is_err());
        assert!(gen_circle_contamination(5, 1.5, s).is_err());
        assert!(gen_circle_contamination(5, -0.1, s).is_err());
    }

    #[test]
    fn noiseless_circle_radius() {
        let c = gen_noisy_circles(10_000, &[(0.5, -0.5)], 1.0, 0.0, RngSeed(3)).unwrap();
        assert_eq!(c.len(), 10_000);
        let mut total = 0.0;
        for &(x, y) in &c.points {
            let r = ((x - 0.5).powi(2) + (y + 0.5).powi(2)).sqrt();
            assert!((r - 1.0).abs() < 1e-9);
            total += r;
        }
        assert!((total / 10_000.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_mean_within_clt_bound() {
        let c = gen_gaussian_mixture(10_000, &[(1.0, 0.0)], 0.2, RngSeed(4)).unwrap();
        let (mx, my) = mean_xy(&c);
        let bound = 3.0 * 0.2 / 100.0;
        assert!((mx - 1.0).abs() < bound, "mx = {mx}");
        assert!(my.abs() < bound, "my = {my}");
    }

    #[test]
    fn uniform_half_plane_fraction() {
        let c = gen_uniform_square(10_000, -1.0, 1.0, RngSeed(5)).unwrap();
        assert!(c.points.iter().all(|&(x, y)| (-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y)));
        let frac = c.points.iter().filter(|p| p.0 > 0.0).count() as f64 / 10_000.0;
        assert!((frac - 0.5).abs() < 3.0 / (2.0 * 100.0));
    }

    #[test]
    fn contamination_q0_matches_uniform_stream() {
        for seed in 0..5 {
            let a = gen_circle_contamination(300, 0.0, RngSeed(seed)).unwrap();
            let b = gen_uniform_square(300, -1.0, 1.0, RngSeed(seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn contamination_q1_is_on_circle() {
        let c = gen_circle_contamination(10_000, 1.0, RngSeed(6)).unwrap();
        for &(x, y) in &c.points {
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn determinism() {
        let a = Population::Gauss3.sample(200, RngSeed(9)).unwrap();
        let b = Population::Gauss3.sample(200, RngSeed(9)).unwrap();
        assert_eq!(a, b);
        let c = Population::Gauss3.sample(200, RngSeed(10)).unwrap();
        assert_ne!(a, c);
    }

    // Moments at n = 1e5 against analytic values, 4-sigma CLT bounds.
    #[test]
    fn moment_sanity() {
        let n = 100_000usize;
        let nf = n as f64;
        let check = |c: &PointCloud, mean: (f64, f64), var: (f64, f64), m4: (f64, f64)| {
            let (mx, my) = mean_xy(c);
            assert!((mx - mean.0).abs() < 4.0 * (var.0 / nf).sqrt(), "mean x {mx}");
            assert!((my - mean.1).abs() < 4.0 * (var.1 / nf).sqrt(), "mean y {my}");
            let vx = c.points.iter().map(|p| (p.0 - mean.0).powi(2)).sum::<f64>() / nf;
            let vy = c.points.iter().map(|p| (p.1 - mean.1).powi(2)).sum::<f64>() / nf;
            // sd of the sample second moment is sqrt((m4 - var^2)/n)
            assert!((vx - var.0).abs() < 4.0 * ((m4.0 - var.0 * var.0) / nf).sqrt(), "var x {vx}");
            assert!((vy - var.1).abs() < 4.0 * ((m4.1 - var.1 * var.1) / nf).sqrt(), "var y {vy}");
        };
        // Uniform[-1,1]: var 1/3, fourth central moment 1/5.
        let u = gen_uniform_square(n, -1.0, 1.0, RngSeed(11)).unwrap();
        check(&u, (0.0, 0.0), (1.0 / 3.0, 1.0 / 3.0), (0.2, 0.2));
        // Noisy unit circle, sd s: x = cos θ + e, var = 1/2 + s², m4 = 3/8 + 6·(1/2)·s² + 3s⁴.
        let s: f64 = 0.1;
        let c = gen_noisy_circles(n, &[(0.0, 0.0)], 1.0, s, RngSeed(12)).unwrap();
        let v = 0.5 + s * s;
        let m4 = 0.375 + 3.0 * s * s + 3.0 * s.powi(4);
        check(&c, (0.0, 0.0), (v, v), (m4, m4));
        // Single Gaussian, sd 0.2.
        let g = gen_gaussian_mixture(n, &[(1.0, -1.0)], 0.2, RngSeed(13)).unwrap();
        let v = 0.04;
        check(&g, (1.0, -1.0), (v, v), (3.0 * v * v, 3.0 * v * v));
    }
}
