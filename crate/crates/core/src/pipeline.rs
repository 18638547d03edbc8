//! Point cloud → density field → persistence diagram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{default_density_grid, kde_grid, GridField};
use crate::grid::GridPlan;
use crate::persistence::{compute_persistence, Direction, PersistenceDiagram};
use crate::rng::RngSeed;
use crate::synth::{PointCloud, Population};

/// Parameters of the density pipeline for one population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPipeline {
    pub population: Population,
    pub n_points: usize,
    /// KDE bandwidth.
    pub h: f64,
    pub density_grid: GridPlan,
    pub max_dim: u8,
}

/// Every artifact of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub cloud: PointCloud,
    pub field: GridField,
    pub diagram: PersistenceDiagram,
}

impl DensityPipeline {
    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::param("n_points", "must be positive"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::param("h", "must be positive"));
        }
        if self.max_dim > 1 {
            return Err(Error::param("max_dim", "must be 0 or 1"));
        }
        if let Population::Contaminated { q } = self.population {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::param("q", "must lie in [0, 1]"));
            }
        }
        self.density_grid.validate()
    }

    /// Runs cloud → KDE → superlevel persistence, keeping the intermediates.
    pub fn run(&self, seed: RngSeed) -> Result<PipelineOutput> {
        let cloud = self
            .population
            .sample(self.n_points, seed)
            .map_err(|e| e.in_stage(format!("synth {}", self.population.name())))?;
        let field = self
            .density_field(&cloud)
            .map_err(|e| e.in_stage(format!("field h={}", self.h)))?;
        let diagram = compute_persistence(&field, Direction::Superlevel, self.max_dim)
            .map_err(|e| e.in_stage("persist"))?;
        Ok(PipelineOutput { cloud, field, diagram })
    }

    pub fn density_field(&self, cloud: &PointCloud) -> Result<GridField> {
        let spec = self.density_grid.resolve(|r| default_density_grid(cloud, self.h, r))?;
        kde_grid(cloud, self.h, &spec)
    }

    pub fn diagram(&self, seed: RngSeed) -> Result<PersistenceDiagram> {
        Ok(self.run(seed)?.diagram)
    }
}
