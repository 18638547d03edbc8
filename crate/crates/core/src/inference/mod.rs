//! Two-sample testing and Monte Carlo studies of the intensity estimators.

mod generator;
mod studies;
mod two_sample;

pub use generator::{DiagramGenerator, MixtureComponent, PairComponent, SyntheticProcess};
pub use studies::{
    bias_study, intensity_at, ks_standard_normal, loglog_slope, mise_study, mise_tau_sweep, mixture_identity_check,
    normality_check, pairing_identity_check, pooled_intensity, power_study, power_trial, sample_diagrams, spearman,
    BiasCurve, MiseConfig, MiseCurve, MiseReference, MixtureIdentityReport, NormalityReport, PairingReport,
    PowerConfig, PowerCurve, TauRule,
};
pub use two_sample::{bootstrap_zscore, permutation_test, two_sample_statistic, TestResult};
