//! Random diagram generators for the estimator studies.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{gaussian, GridSpec};
use crate::intensity::{weight_eval, IntensityGrid, WeightSpec};
use crate::persistence::{PersistenceDiagram, PersistencePair};
use crate::pipeline::DensityPipeline;
use crate::rng::{RngSeed, Stream};

/// One component of a [`SyntheticProcess`]: births are normal, lifetimes are
/// Gamma with an integer shape, so `death = birth + lifetime > birth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairComponent {
    pub weight: f64,
    pub birth_mean: f64,
    pub birth_sd: f64,
    pub lifetime_shape: u32,
    pub lifetime_scale: f64,
}

impl PairComponent {
    fn density(&self, birth: f64, lifetime: f64) -> f64 {
        if lifetime <= 0.0 {
            return 0.0;
        }
        let z = (birth - self.birth_mean) / self.birth_sd;
        let pb = (-0.5 * z * z).exp() / (self.birth_sd * (std::f64::consts::TAU).sqrt());
        let k = self.lifetime_shape as i32;
        let fact: f64 = (1..k).map(f64::from).product();
        let t = lifetime / self.lifetime_scale;
        let pl = t.powi(k - 1) * (-t).exp() / (fact * self.lifetime_scale);
        pb * pl
    }

    fn sample(&self, rng: &mut Stream) -> (f64, f64) {
        let birth = self.birth_mean + self.birth_sd * rng.normal();
        let lifetime: f64 = self.lifetime_scale * (0..self.lifetime_shape).map(|_| rng.exponential()).sum::<f64>();
        (birth, birth + lifetime)
    }
}

/// A diagram process with a closed-form mean measure: each diagram holds
/// `pairs_per_diagram` independent dimension-0 pairs drawn from a mixture of
/// [`PairComponent`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProcess {
    pub pairs_per_diagram: usize,
    pub components: Vec<PairComponent>,
}

impl SyntheticProcess {
    /// Two overlapping clusters of features; a smooth intensity with no
    /// mass near the diagonal.
    pub fn reference() -> Self {
        SyntheticProcess {
            pairs_per_diagram: 10,
            components: vec![
                PairComponent { weight: 0.6, birth_mean: 0.8, birth_sd: 0.35, lifetime_shape: 4, lifetime_scale: 0.3 },
                PairComponent { weight: 0.4, birth_mean: 1.8, birth_sd: 0.45, lifetime_shape: 5, lifetime_scale: 0.25 },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs_per_diagram == 0 || self.components.is_empty() {
            return Err(Error::param("synthetic", "need at least one pair and one component"));
        }
        for c in &self.components {
            let ok = c.weight > 0.0
                && c.weight.is_finite()
                && c.birth_mean.is_finite()
                && c.birth_sd > 0.0
                && c.lifetime_shape >= 1
                && c.lifetime_scale > 0.0;
            if !ok {
                return Err(Error::param("synthetic", format!("invalid component {c:?}")));
            }
        }
        Ok(())
    }

    fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn sample(&self, seed: RngSeed) -> PersistenceDiagram {
        let mut rng = seed.stream();
        let total = self.total_weight();
        let pairs = (0..self.pairs_per_diagram)
            .map(|_| {
                let c = pick(&self.components, |c| c.weight / total, rng.uniform());
                let (birth, death) = c.sample(&mut rng);
                PersistencePair { dim: 0, birth, death }
            })
            .collect();
        PersistenceDiagram::from_pairs(pairs)
    }

    /// Density of pair locations `(birth, death)` summed over a diagram
    /// (expected count per unit area).
    pub fn pair_density(&self, birth: f64, death: f64) -> f64 {
        let total = self.total_weight();
        let mix: f64 = self.components.iter().map(|c| c.weight / total * c.density(birth, death - birth)).sum();
        self.pairs_per_diagram as f64 * mix
    }

    /// Persistence intensity `κ(x, y)`: pair density times the dimension-0
    /// weight of the lifetime `y - x`.
    pub fn intensity(&self, weights: &WeightSpec, x: f64, y: f64) -> Result<f64> {
        if y <= x {
            return Ok(0.0);
        }
        Ok(self.pair_density(x, y) * weight_eval(weights, 0, y - x)?)
    }

    /// `κ` evaluated at every node of `spec`.
    pub fn intensity_grid(&self, weights: &WeightSpec, spec: &GridSpec) -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(spec.len());
        for i in 0..spec.nx {
            for j in 0..spec.ny {
                values.push(self.intensity(weights, spec.x(i), spec.y(j))?);
            }
        }
        Ok(values)
    }

    /// `E κ̂_τ` on `spec`, obtained by smoothing the mean persistence measure
    /// discretized on a lattice of step `step` in the (birth, death) plane.
    /// By linearity of smoothing this is the expectation of a single-diagram
    /// intensity, free of Monte Carlo error. Evaluated as `Kx · W · Kyᵀ`.
    pub fn expected_intensity(&self, tau: f64, weights: &WeightSpec, spec: &GridSpec, step: f64) -> Result<IntensityGrid> {
        self.validate()?;
        weights.validate()?;
        spec.validate()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param("tau", "smoothing bandwidth must be positive"));
        }
        if !(step > 0.0) {
            return Err(Error::param("step", "lattice step must be positive"));
        }
        let (b_lo, b_hi, d_lo, d_hi) = self.support();
        let nb = ((b_hi - b_lo) / step).ceil() as usize + 1;
        let nd = ((d_hi - d_lo) / step).ceil() as usize + 1;
        let bs: Vec<f64> = (0..nb).map(|a| b_lo + a as f64 * step).collect();
        let ds: Vec<f64> = (0..nd).map(|c| d_lo + c as f64 * step).collect();
        let cell = step * step;
        let mut w = DMatrix::<f64>::zeros(nb, nd);
        for (a, &b) in bs.iter().enumerate() {
            for (c, &d) in ds.iter().enumerate() {
                if d > b {
                    w[(a, c)] = self.intensity(weights, b, d)? * cell;
                }
            }
        }
        let inv = 1.0 / (tau * tau);
        let xs = spec.xs();
        let ys = spec.ys();
        let kx = DMatrix::from_fn(spec.nx, nb, |i, a| inv * gaussian((xs[i] - bs[a]) / tau));
        let ky = DMatrix::from_fn(nd, spec.ny, |c, j| gaussian((ys[j] - ds[c]) / tau));
        let e = (kx * w) * ky;
        let mut values = Vec::with_capacity(spec.len());
        for i in 0..spec.nx {
            for j in 0..spec.ny {
                values.push(e[(i, j)]);
            }
        }
        Ok(IntensityGrid { spec: *spec, values, tau, weights: *weights })
    }

    /// Box `(birth_lo, birth_hi, death_lo, death_hi)` holding all but a
    /// negligible fraction of the pair mass.
    pub fn support(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY);
        let mut d_hi = f64::NEG_INFINITY;
        for c in &self.components {
            b.0 = b.0.min(c.birth_mean - 7.0 * c.birth_sd);
            b.1 = b.1.max(c.birth_mean + 7.0 * c.birth_sd);
            let k = c.lifetime_shape as f64;
            let life_hi = c.lifetime_scale * (k + 8.0 * k.sqrt() + 8.0);
            d_hi = d_hi.max(c.birth_mean + 7.0 * c.birth_sd + life_hi);
        }
        (b.0, b.1, b.0, d_hi)
    }

    /// `E κ̂_τ(x, y)` under linear lifetime weight, by direct quadrature over
    /// (birth, lifetime) for each component. Independent of the lattice route
    /// in [`Self::expected_intensity`].
    pub fn expected_intensity_at(&self, x: f64, y: f64, tau: f64, lifetime_step: f64) -> f64 {
        let total = self.total_weight();
        let k = self.pairs_per_diagram as f64;
        let mut acc = 0.0;
        for c in &self.components {
            // ∫∫ p(b, ℓ) · ℓ · K_τ(x - b) · K_τ(y - b - ℓ) db dℓ
            let (lo, hi) = (c.birth_mean - 8.0 * c.birth_sd, c.birth_mean + 8.0 * c.birth_sd);
            let nb = ((hi - lo) / lifetime_step).ceil() as usize + 1;
            let kk = c.lifetime_shape as f64;
            let l_hi = c.lifetime_scale * (kk + 8.0 * kk.sqrt() + 8.0);
            let nl = (l_hi / lifetime_step).ceil() as usize + 1;
            let mut s = 0.0;
            for a in 0..nb {
                let b = lo + a as f64 * lifetime_step;
                let kx = gaussian((x - b) / tau) / tau;
                for l in 1..nl {
                    let life = l as f64 * lifetime_step;
                    let ky = gaussian((y - b - life) / tau) / tau;
                    s += c.density(b, life) * life * kx * ky;
                }
            }
            acc += c.weight / total * s * lifetime_step * lifetime_step;
        }
        k * acc
    }
}

fn pick<T>(items: &[T], prob: impl Fn(&T) -> f64, u: f64) -> &T {
    let mut acc = 0.0;
    for it in items {
        acc += prob(it);
        if u < acc {
            return it;
        }
    }
    items.last().expect("nonempty")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub generator: DiagramGenerator,
}

/// Source of random persistence diagrams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum DiagramGenerator {
    /// Sample a point cloud, estimate its density, take superlevel persistence.
    Pipeline(DensityPipeline),
    Synthetic(SyntheticProcess),
    /// The same diagram every time.
    Constant { pairs: Vec<PersistencePair> },
    /// Draw a component with probability proportional to its weight, then a
    /// whole diagram from it.
    Mixture { components: Vec<MixtureComponent> },
}

impl DiagramGenerator {
    pub fn validate(&self) -> Result<()> {
        match self {
            DiagramGenerator::Pipeline(p) => p.validate(),
            DiagramGenerator::Synthetic(s) => s.validate(),
            DiagramGenerator::Constant { pairs } => {
                if pairs.iter().any(|p| !(p.death >= p.birth) || p.dim > 1) {
                    return Err(Error::param("pairs", "constant pairs need dim 0/1 and death >= birth"));
                }
                Ok(())
            }
            DiagramGenerator::Mixture { components } => {
                if components.is_empty() || components.iter().any(|c| !(c.weight > 0.0 && c.weight.is_finite())) {
                    return Err(Error::param("components", "need at least one component with positive weight"));
                }
                components.iter().try_for_each(|c| c.generator.validate())
            }
        }
    }

    pub fn sample(&self, seed: RngSeed) -> Result<PersistenceDiagram> {
        match self {
            DiagramGenerator::Pipeline(p) => p.diagram(seed),
            DiagramGenerator::Synthetic(s) => Ok(s.sample(seed)),
            DiagramGenerator::Constant { pairs } => Ok(PersistenceDiagram::from_pairs(pairs.clone())),
            DiagramGenerator::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                let u = seed.child(0).stream().uniform();
                pick(components, |c| c.weight / total, u).generator.sample(seed.child(1))
            }
        }
    }
}
