//! Dense complex linear algebra: products, norms, resolvents, eigenvalues,
//! Kronecker products and the `cmat v1` text format.

mod cmat;
mod eig;
mod matrix;

pub use cmat::{parse_cmat_lines, read_cmat, read_cmat_file, write_cmat};
pub use eig::{eig, eigenvalues, EigenResult};
pub use matrix::{
    kron, kron_all, kron_with_cap, op_norm, resolvent, ComplexMatrix, C64, DEFAULT_TENSOR_CAP,
    RESOLVENT_COND_LIMIT,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimension { rows: usize, cols: usize },
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{op}: incompatible dimensions {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("tensor dimension {dim} exceeds cap {cap}")]
    TensorTooLarge { dim: usize, cap: usize },
    #[error("zI - X is near-singular at z = {z} (condition estimate {cond:.3e})")]
    NearSingular { z: C64, cond: f64 },
    #[error("eigenvalue iteration failed to converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },
    #[error("cmat parse error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}
