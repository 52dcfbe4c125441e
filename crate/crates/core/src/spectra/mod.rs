//! Projector–nilpotent decomposition of a single matrix.
//!
//! Eigenvalues are clustered at a tolerance (`cluster_tol`), each cluster
//! gets a Riesz projector by contour quadrature, and the nilpotent part
//! `N = (X − λI)P` and its index `ν` are read off per cluster.

mod contour;
mod decompose;
mod record;

pub use contour::{Contour, CLEARANCE_FRACTION, DEFAULT_NODES, MIN_NODES};
pub(crate) use contour::ordered_sum;
pub use decompose::{
    cluster_eigenvalues, decompose, decompose_enclosed, decompose_with, nilpotency_index,
    nilpotent_part, riesz_projector, verify_decomposition, Cluster, DecomposeOptions,
    Decomposition, DecompositionDiagnostics, SpectralComponent, DEFAULT_CLUSTER_REL_TOL,
    DEFAULT_TOL_DEC, DEFAULT_TOL_NIL,
};
pub use record::{read_decomposition, write_decomposition};

use thiserror::Error;

use crate::numerics::{NumericsError, C64};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectraError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid contour: center {center}, radius {radius}, {nodes} nodes (need radius > 0, nodes >= 16)")]
    InvalidContour { center: C64, radius: f64, nodes: usize },
    #[error("eigenvalue {eigenvalue} lies {distance:.3e} from the contour |z - {center}| = {radius}")]
    ContourTooClose {
        eigenvalue: C64,
        center: C64,
        radius: f64,
        distance: f64,
    },
    #[error("eigenvalue clusters not separable: gap {gap:.3e} vs cluster_tol {cluster_tol:.3e}")]
    ClusterSeparation { gap: f64, cluster_tol: f64 },
    #[error("projector at {lambda} is not idempotent: {residual:.3e} > {bound:.3e} (ill-conditioned Jordan structure?)")]
    NotIdempotent { lambda: C64, residual: f64, bound: f64 },
    #[error("projector at {lambda} has trace {trace:.6} but the cluster has {members} eigenvalues")]
    MultiplicityMismatch { lambda: C64, trace: f64, members: usize },
    #[error("nilpotency index {index} exceeds multiplicity {multiplicity} at {lambda}")]
    NilpotencyExceedsMultiplicity {
        lambda: C64,
        index: usize,
        multiplicity: usize,
    },
    #[error("{which} residual {residual:.3e} exceeds {bound:.3e}")]
    ResidualTooLarge {
        which: &'static str,
        residual: f64,
        bound: f64,
    },
}
