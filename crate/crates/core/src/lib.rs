//! Persistence intensity functions.
//!
//! Pipeline: point clouds ([`synth`]) → grid functions ([`field`]) →
//! persistence diagrams ([`persistence`]) → smoothed intensities
//! ([`intensity`]) → distances, embeddings and clusters ([`analyze`]) or
//! two-sample tests and estimator studies ([`inference`]). The
//! [`experiment`] module wires the stages into reproducible runs.

pub mod analyze;
pub mod error;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod inference;
pub mod intensity;
pub mod io;
pub mod persistence;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use field::{FieldKind, GridField};
pub use grid::GridSpec;
pub use intensity::{IntensityGrid, WeightSpec};
pub use persistence::{Direction, PersistenceDiagram, PersistencePair};
pub use rng::RngSeed;
pub use synth::PointCloud;
