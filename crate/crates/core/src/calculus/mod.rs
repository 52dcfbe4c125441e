//! Functional calculus on one operator and on tensor-lifted tuples.
//!
//! The expansion routes ([`func_univariate`], [`func_multivariate`]) read
//! everything off spectral decompositions. The oracles ([`dunford`],
//! [`dunford_multivariate`], [`power_series_apply`]) never look at a
//! decomposition and are kept that way so the cross-checks stay independent.

mod lift;
mod multivariate;
mod oracles;
mod record;
mod univariate;

pub use lift::{lift, lift_with_cap, lift_with_decompositions, LiftedSystem, COMMUTATOR_REL_TOL};
pub use multivariate::{
    func_multivariate, three_term_split, CalculusResult, LedgerEntry, Split, TermClass,
};
pub use oracles::{
    dunford_multivariate, dunford_multivariate_with, power_series_apply,
    power_series_apply_auto, power_series_tail, DunfordOptions, DEFAULT_MULTI_NODES,
    DEFAULT_NODE_BUDGET, MAX_DUNFORD_ARITY, MULTI_DOUBLING_TOL, TAIL_TOL,
};
pub use record::{ledger_csv, read_split, write_split};
pub use univariate::{
    dunford, dunford_restricted, enclosing_contour, func_univariate, UNI_DOUBLING_TOL,
};

use thiserror::Error;

use crate::funcspace::FuncError;
use crate::numerics::{NumericsError, C64};
use crate::spectra::SpectraError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CalculusError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error("function has arity {function} but the system has {system} factors")]
    ArityMismatch { function: usize, system: usize },
    #[error("lifted operators {i} and {j} do not commute: {residual:.3e} > {bound:.3e}")]
    NotCommuting {
        i: usize,
        j: usize,
        residual: f64,
        bound: f64,
    },
    #[error("decomposition {index} describes a {got}x{got} matrix, factor is {expected}x{expected}")]
    DecompositionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("eigenvalue {eigenvalue} is not enclosed by the contour around {center} (radius {radius})")]
    NotEnclosed {
        eigenvalue: C64,
        center: C64,
        radius: f64,
    },
    #[error("function singularity {point} lies inside the contour")]
    SingularityInside { point: C64 },
    #[error("quadrature unstable under node doubling: change {change:.3e} > {bound:.3e}")]
    QuadratureUnstable { change: f64, bound: f64 },
    #[error("multivariate contour oracle supports at most {max} factors, got {r}")]
    TooManyFactors { r: usize, max: usize },
    #[error("contour oracle needs {evaluations} node tuples, budget is {budget}")]
    BudgetExceeded { evaluations: usize, budget: usize },
    #[error("power series tail {tail:.3e} exceeds {bound:.3e} at degree cap {cap}")]
    TailTooLarge { cap: usize, tail: f64, bound: f64 },
    #[error("need {expected} contours, got {got}")]
    ContourCount { expected: usize, got: usize },
}
