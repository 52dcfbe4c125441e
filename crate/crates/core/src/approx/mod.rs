//! Operator models and convergence experiments.
//!
//! Unbounded operators are represented by a large reference matrix
//! (`ref_dim`) and approximated by its leading sections. Errors are measured
//! on a fixed spectral cluster enclosed by one contour.

mod estimates;
mod experiments;
mod models;
mod regularize;
mod report;

pub use estimates::{
    error_constant, error_constant_multi, padded_eigenvalues, resolvent_error, resolvent_sups,
    ErrorConstant, ResolventSups, Z0_MIN_DISTANCE,
};
pub use experiments::{
    cluster_function, default_probes, level1_pass, level_experiment, level_experiment_audited,
    multivariate_experiment,
    perturbation_experiment, reference_stability, ClusterFunction, ConvergenceReport, FactorSetup,
    LevelSetup, ReportRow, LEVEL1_TOL, LEVEL2_SLACK, ROUNDOFF_FLOOR, STABILITY_NOISE_FLOOR,
    STABILITY_TOL,
};
pub use models::{
    bandwidth, build_model, compress, conditioned_similarity, jordan_similar, jordan_toy,
    random_similarity, unit_perturbation,
    ModelKind, OperatorModel, TruncationPoint, JORDAN_TOY_CONDITIONING, MIN_REF_DIM,
};
pub use regularize::{regularization_sweep, RegularizationReport, RegularizationRow};
pub use report::{convergence_csv, regularization_csv, report_file_name};

use thiserror::Error;

use crate::calculus::CalculusError;
use crate::funcspace::FuncError;
use crate::numerics::{NumericsError, C64};
use crate::spectra::SpectraError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ApproxError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("guard {guard} too small for {kind}: need at least {need}")]
    GuardTooSmall {
        kind: &'static str,
        guard: usize,
        need: usize,
    },
    #[error("truncation n = {n} too large for reference dimension {ref_dim} (need n <= ref_dim/2 or n = ref_dim)")]
    TruncationTooLarge { n: usize, ref_dim: usize },
    #[error("z0 = {z0} lies {distance:.3e} from the spectrum (need >= 1)")]
    Z0TooClose { z0: C64, distance: f64 },
    #[error("contour |z - {center}| = {radius} encloses the zero eigenvalue of a padded section")]
    PaddedZeroEnclosed { center: C64, radius: f64 },
    #[error("probe has length {got}, expected {expected}")]
    ProbeDimension { expected: usize, got: usize },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("negative regularization parameter {0}")]
    NegativeEpsilon(f64),
}
