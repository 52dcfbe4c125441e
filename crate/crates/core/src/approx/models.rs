use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ApproxError;
use crate::numerics::{op_norm, ComplexMatrix, C64};

/// Smallest reference dimension for the oscillator models.
pub const MIN_REF_DIM: usize = 16;
/// Condition number of the similarity used by [`ModelKind::JordanToy`].
pub const JORDAN_TOY_CONDITIONING: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// `p² + x²`, diagonal `2n + 1`.
    Harmonic,
    /// `p² + x⁴`.
    AnharmonicX4,
    /// `p² + i·x²`, complex symmetric and non-normal.
    ComplexHarmonic,
    /// `S·blkdiag(J_{d/2}(1), J_{d/2}(i))·S⁻¹` with `cond(S) = 10`.
    JordanToy,
    /// Matrix supplied by the caller.
    Custom,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Harmonic => "harmonic",
            ModelKind::AnharmonicX4 => "anharmonic_x4",
            ModelKind::ComplexHarmonic => "complex_harmonic",
            ModelKind::JordanToy => "jordan_toy",
            ModelKind::Custom => "custom_file",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            ModelKind::Harmonic,
            ModelKind::AnharmonicX4,
            ModelKind::ComplexHarmonic,
            ModelKind::JordanToy,
            ModelKind::Custom,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }

    /// Guard band needed so the retained block of the operator polynomial
    /// is exact: one row per ladder factor beyond the first.
    pub fn min_guard(self) -> usize {
        match self {
            ModelKind::AnharmonicX4 => 4,
            ModelKind::Harmonic | ModelKind::ComplexHarmonic => 2,
            ModelKind::JordanToy | ModelKind::Custom => 0,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A reference matrix standing in for an unbounded operator.
#[derive(Clone, Debug)]
pub struct OperatorModel {
    pub kind: ModelKind,
    pub ref_dim: usize,
    pub guard: usize,
    pub matrix_ref: ComplexMatrix,
}

/// Builds an oscillator model at `ref_dim` (or the Jordan toy at dimension
/// `ref_dim`, which must be even).
pub fn build_model(kind: ModelKind, ref_dim: usize, guard: usize) -> Result<OperatorModel, ApproxError> {
    if guard < kind.min_guard() {
        return Err(ApproxError::GuardTooSmall {
            kind: kind.name(),
            guard,
            need: kind.min_guard(),
        });
    }
    let matrix_ref = match kind {
        ModelKind::JordanToy => {
            if ref_dim < 2 || ref_dim % 2 != 0 {
                return Err(ApproxError::InvalidModel(format!(
                    "jordan_toy needs an even dimension >= 2, got {ref_dim}"
                )));
            }
            jordan_toy(ref_dim)
        }
        ModelKind::Custom => {
            return Err(ApproxError::InvalidModel(
                "custom models are created with OperatorModel::custom".into(),
            ))
        }
        _ => {
            if ref_dim < MIN_REF_DIM {
                return Err(ApproxError::InvalidModel(format!(
                    "{kind} needs ref_dim >= {MIN_REF_DIM}, got {ref_dim}"
                )));
            }
            oscillator(kind, ref_dim, guard)
        }
    };
    Ok(OperatorModel {
        kind,
        ref_dim,
        guard,
        matrix_ref,
    })
}

impl OperatorModel {
    pub fn custom(matrix: ComplexMatrix) -> Result<Self, ApproxError> {
        let ref_dim = matrix.ensure_square()?;
        Ok(Self {
            kind: ModelKind::Custom,
            ref_dim,
            guard: 0,
            matrix_ref: matrix,
        })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }
}

/// Ladder-operator polynomial at `ref_dim + guard`, truncated to `ref_dim`.
/// Real arithmetic throughout so the `a²` terms of `p²` and `x²` cancel
/// exactly in the harmonic case.
fn oscillator(kind: ModelKind, ref_dim: usize, guard: usize) -> ComplexMatrix {
    let m = ref_dim + guard;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    let at = a.transpose();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &at) * s;
    // p = (a − a†)/(i√2), so p² = −((a − a†)/√2)²
    let q = (&a - &at) * s;
    let p2 = -(&q * &q);
    let x2 = &x * &x;
    let block = |re: DMatrix<f64>, im: DMatrix<f64>| {
        ComplexMatrix::from_fn(ref_dim, ref_dim, |i, j| C64::new(re[(i, j)], im[(i, j)]))
    };
    match kind {
        ModelKind::Harmonic => block(&p2 + &x2, DMatrix::zeros(m, m)),
        ModelKind::AnharmonicX4 => block(&p2 + &x2 * &x2, DMatrix::zeros(m, m)),
        ModelKind::ComplexHarmonic => block(p2, x2),
        ModelKind::JordanToy | ModelKind::Custom => unreachable!("not an oscillator"),
    }
}

/// `S·blkdiag(J_{d/2}(1), J_{d/2}(i))·S⁻¹` with `S = U·diag(s)·U†`, `U` the
/// unitary DFT and `s` geometric from 1 to 10.
pub fn jordan_toy(dim: usize) -> ComplexMatrix {
    let h = dim / 2;
    let j = ComplexMatrix::block_diag(&[
        ComplexMatrix::jordan_block(h, C64::new(1.0, 0.0)),
        ComplexMatrix::jordan_block(h, C64::new(0.0, 1.0)),
    ]);
    let (s, s_inv) = conditioned_similarity(dim, JORDAN_TOY_CONDITIONING);
    &(&s * &j) * &s_inv
}

/// `(S, S⁻¹)` with singular values geometric from 1 to `cond`.
pub fn conditioned_similarity(dim: usize, cond: f64) -> (ComplexMatrix, ComplexMatrix) {
    let scale = 1.0 / (dim as f64).sqrt();
    let u = ComplexMatrix::from_fn(dim, dim, |r, c| {
        C64::from_polar(scale, -2.0 * PI * (r * c) as f64 / dim as f64)
    });
    let sv: Vec<f64> = (0..dim)
        .map(|k| {
            if dim == 1 {
                1.0
            } else {
                cond.powf(k as f64 / (dim - 1) as f64)
            }
        })
        .collect();
    let d = ComplexMatrix::from_diagonal(&sv.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>());
    let d_inv =
        ComplexMatrix::from_diagonal(&sv.iter().map(|&v| C64::new(1.0 / v, 0.0)).collect::<Vec<_>>());
    let ua = u.adjoint();
    (&(&u * &d) * &ua, &(&u * &d_inv) * &ua)
}

/// Seeded `(S, S⁻¹)` with `S = U·diag(s)·V†`, `U`, `V` Haar-like unitaries
/// from QR of Gaussian matrices and `s` geometric from 1 to `cond`.
pub fn random_similarity(dim: usize, cond: f64, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unitary = || {
        let g = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        g.qr().q()
    };
    let u = unitary();
    let v = unitary();
    let sv: Vec<f64> = (0..dim)
        .map(|k| if dim == 1 { 1.0 } else { cond.powf(k as f64 / (dim - 1) as f64) })
        .collect();
    let d = DMatrix::<C64>::from_fn(dim, dim, |i, j| if i == j { C64::new(sv[i], 0.0) } else { C64::new(0.0, 0.0) });
    let d_inv =
        DMatrix::<C64>::from_fn(dim, dim, |i, j| if i == j { C64::new(1.0 / sv[i], 0.0) } else { C64::new(0.0, 0.0) });
    let s = &u * d * v.adjoint();
    let s_inv = &v * d_inv * u.adjoint();
    (
        ComplexMatrix::from_fn(dim, dim, |i, j| s[(i, j)]),
        ComplexMatrix::from_fn(dim, dim, |i, j| s_inv[(i, j)]),
    )
}

/// `S·blkdiag(J_{m_1}(λ_1), …)·S⁻¹` with a seeded similarity of condition
/// number `cond`.
pub fn jordan_similar(blocks: &[(C64, usize)], cond: f64, seed: u64) -> ComplexMatrix {
    let j = ComplexMatrix::block_diag(
        &blocks
            .iter()
            .map(|&(l, m)| ComplexMatrix::jordan_block(m, l))
            .collect::<Vec<_>>(),
    );
    let (s, s_inv) = random_similarity(j.rows(), cond, seed);
    &(&s * &j) * &s_inv
}

/// Seeded complex Gaussian matrix scaled to unit spectral norm.
pub fn unit_perturbation(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let n = op_norm(&e);
    e.scale_real(1.0 / n)
}

/// Largest `|i − j|` with `|m_ij| > tol`.
pub fn bandwidth(m: &ComplexMatrix, tol: f64) -> usize {
    let mut b = 0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m.get(i, j).norm() > tol {
                b = b.max(i.abs_diff(j));
            }
        }
    }
    b
}

/// One finite section `X_n` and the errors measured on it.
#[derive(Clone, Debug)]
pub struct TruncationPoint {
    pub n: usize,
    /// Perturbation size for perturbation families.
    pub delta: Option<f64>,
    pub x_n: ComplexMatrix,
    pub x_n_padded: ComplexMatrix,
    /// `‖(X_n − X)(z_0 − X)⁻¹‖`.
    pub eps_n: f64,
    /// Same, composed with the reference cluster projector.
    pub eps_cluster: f64,
    pub func_error_norm: f64,
    pub func_error_vectors: Vec<f64>,
}

impl TruncationPoint {
    pub fn new(n: usize, x_n: ComplexMatrix, dim: usize) -> Self {
        let x_n_padded = x_n.embed(dim);
        Self {
            n,
            delta: None,
            x_n,
            x_n_padded,
            eps_n: 0.0,
            eps_cluster: 0.0,
            func_error_norm: 0.0,
            func_error_vectors: Vec::new(),
        }
    }

    pub fn is_padded(&self) -> bool {
        self.x_n.rows() < self.x_n_padded.rows()
    }
}

/// `X_n = P_n X P_n`: the leading `n × n` block and its zero extension.
/// Requires `n ≤ ref_dim/2` (reference headroom) or `n = ref_dim`.
pub fn compress(model: &OperatorModel, n: usize) -> Result<TruncationPoint, ApproxError> {
    if n == 0 || (n > model.ref_dim / 2 && n != model.ref_dim) {
        return Err(ApproxError::TruncationTooLarge {
            n,
            ref_dim: model.ref_dim,
        });
    }
    Ok(TruncationPoint::new(
        n,
        model.matrix_ref.leading_block(n),
        model.ref_dim,
    ))
}
