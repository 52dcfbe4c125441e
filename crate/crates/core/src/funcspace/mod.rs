//! Analytic functions of several complex variables.

mod expr;
mod function;
mod multi_index;
mod parse;

pub use expr::{Affine, Expr, Jet, Polynomial};
pub use function::{
    AnalyticFunction, DerivativeStrategy, Polydisk, CAUCHY_DOUBLING_TOL, CAUCHY_NODES,
    CAUCHY_RADIUS_FRACTION,
};
pub use multi_index::MultiIndex;
pub use parse::{format_expr, parse_expr};

use thiserror::Error;

use crate::numerics::C64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FuncError {
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("point {point:?} outside the function domain: {reason}")]
    Domain { point: Vec<C64>, reason: String },
    #[error("Cauchy quadrature did not converge: doubling changed the result by {change:.3e} (scale {scale:.3e})")]
    QuadratureNotConverged { change: f64, scale: f64 },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
