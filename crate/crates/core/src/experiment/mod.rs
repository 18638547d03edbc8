//! Experiment configuration and end-to-end runs.

mod config;
mod run;

pub use config::{
    issues_to_error, validate_config, ClusterConfig, ConfigIssue, EmbeddingChoice, ExperimentConfig, ExperimentKind,
    SeedDerivation, SeedSource, SpectralSection, StageSeed, DEFAULT_MASTER_SEED,
};
pub use run::{
    item_name, mise_curve_csv, power_curve_csv, power_pvalues_csv, run_experiment, run_fig2, run_fig4, run_mise,
    RunManifest,
};
