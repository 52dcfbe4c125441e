use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CalculusError;
use crate::numerics::{kron_all, op_norm, ComplexMatrix, C64, DEFAULT_TENSOR_CAP};
use crate::spectra::{decompose_with, DecomposeOptions, Decomposition};

/// Pairwise commutators of the lifted operators must satisfy
/// `‖[X̃_i, X̃_j]‖ ≤ COMMUTATOR_REL_TOL·‖X̃_i‖·‖X̃_j‖`.
pub const COMMUTATOR_REL_TOL: f64 = 1e-12;

/// Above this tensor dimension the commutator check uses random probes.
const DENSE_CHECK_DIM: usize = 256;
const PROBES: usize = 4;

/// A tuple of square matrices lifted to commuting operators on the tensor
/// product `C^{d_1} ⊗ … ⊗ C^{d_r}`.
#[derive(Clone, Debug)]
pub struct LiftedSystem {
    pub factors: Vec<ComplexMatrix>,
    pub factor_dims: Vec<usize>,
    /// `lifted[j] = I ⊗ … ⊗ X_j ⊗ … ⊗ I`.
    pub lifted: Vec<ComplexMatrix>,
    pub decompositions: Vec<Decomposition>,
}

impl LiftedSystem {
    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Largest commutator residual relative to `‖X̃_i‖·‖X̃_j‖`.
    pub fn max_commutator(&self) -> f64 {
        let norms: Vec<f64> = self.factors.iter().map(op_norm).collect();
        let mut worst: f64 = 0.0;
        for i in 0..self.arity() {
            for j in i + 1..self.arity() {
                let scale = (norms[i] * norms[j]).max(f64::MIN_POSITIVE);
                worst = worst.max(commutator_residual(&self.lifted[i], &self.lifted[j]) / scale);
            }
        }
        worst
    }
}

/// Lifts and decomposes every factor with the same options.
pub fn lift(factors: &[ComplexMatrix], opts: &DecomposeOptions) -> Result<LiftedSystem, CalculusError> {
    lift_with_cap(factors, opts, DEFAULT_TENSOR_CAP)
}

pub fn lift_with_cap(
    factors: &[ComplexMatrix],
    opts: &DecomposeOptions,
    cap: usize,
) -> Result<LiftedSystem, CalculusError> {
    check_dims(factors, cap)?;
    let decs = factors
        .iter()
        .map(|x| decompose_with(x, opts))
        .collect::<Result<Vec<_>, _>>()?;
    lift_with_decompositions(factors, decs, cap)
}

/// Lifts with caller-supplied (possibly partial) decompositions.
pub fn lift_with_decompositions(
    factors: &[ComplexMatrix],
    decompositions: Vec<Decomposition>,
    cap: usize,
) -> Result<LiftedSystem, CalculusError> {
    let factor_dims = check_dims(factors, cap)?;
    if decompositions.len() != factors.len() {
        return Err(CalculusError::ArityMismatch {
            function: decompositions.len(),
            system: factors.len(),
        });
    }
    for (index, (d, &n)) in decompositions.iter().zip(&factor_dims).enumerate() {
        if d.source_dim != n {
            return Err(CalculusError::DecompositionMismatch {
                index,
                expected: n,
                got: d.source_dim,
            });
        }
    }
    let lifted = (0..factors.len())
        .map(|j| {
            let parts: Vec<ComplexMatrix> = factor_dims
                .iter()
                .enumerate()
                .map(|(i, &n)| if i == j { factors[j].clone() } else { ComplexMatrix::identity(n) })
                .collect();
            kron_all(&parts, cap)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sys = LiftedSystem {
        factors: factors.to_vec(),
        factor_dims,
        lifted,
        decompositions,
    };
    let norms: Vec<f64> = sys.factors.iter().map(op_norm).collect();
    for i in 0..sys.arity() {
        for j in i + 1..sys.arity() {
            let residual = commutator_residual(&sys.lifted[i], &sys.lifted[j]);
            let bound = COMMUTATOR_REL_TOL * norms[i] * norms[j];
            if residual > bound {
                return Err(CalculusError::NotCommuting { i, j, residual, bound });
            }
        }
    }
    Ok(sys)
}

fn check_dims(factors: &[ComplexMatrix], cap: usize) -> Result<Vec<usize>, CalculusError> {
    if factors.is_empty() {
        return Err(CalculusError::ArityMismatch {
            function: 0,
            system: 0,
        });
    }
    let dims = factors
        .iter()
        .map(|x| x.ensure_square())
        .collect::<Result<Vec<_>, _>>()?;
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    match total {
        Some(t) if t <= cap => Ok(dims),
        _ => Err(crate::numerics::NumericsError::TensorTooLarge {
            dim: total.unwrap_or(usize::MAX),
            cap,
        }
        .into()),
    }
}

/// `‖AB − BA‖`: dense for small dimensions, otherwise the largest
/// `‖(AB − BA)v‖/‖v‖` over a few seeded random probes.
fn commutator_residual(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    if n <= DENSE_CHECK_DIM {
        return op_norm(&a.commutator(b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f7);
    (0..PROBES)
        .map(|_| {
            let v: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let ab = a.mat_vec(&b.mat_vec(&v));
            let ba = b.mat_vec(&a.mat_vec(&v));
            let diff: f64 = ab.iter().zip(&ba).map(|(x, y)| (x - y).norm_sqr()).sum();
            let vn: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            (diff / vn).sqrt()
        })
        .fold(0.0, f64::max)
}
