//! Fixtures shared by the benchmarks.

use pnfc_core::approx::{build_model, compress, jordan_similar, ModelKind};
use pnfc_core::funcspace::AnalyticFunction;
use pnfc_core::numerics::{ComplexMatrix, C64};

/// Jordan-similar factor of size `2 * blocks` with 2×2 blocks at distinct
/// integer eigenvalues.
pub fn jordan_factor(blocks: usize, seed: u64) -> ComplexMatrix {
    let spec: Vec<(C64, usize)> = (0..blocks).map(|k| (C64::new(k as f64, 0.5), 2)).collect();
    jordan_similar(&spec, 4.0, seed)
}

/// Leading `n × n` section of the complex harmonic oscillator.
pub fn complex_harmonic(n: usize) -> ComplexMatrix {
    let model = build_model(ModelKind::ComplexHarmonic, (2 * n).max(16), 2).expect("model");
    compress(&model, n).expect("section").x_n
}

/// `exp(−Σ zᵢ)` of the given arity.
pub fn exp_neg(arity: usize) -> AnalyticFunction {
    AnalyticFunction::exp_affine(vec![C64::new(-1.0, 0.0); arity], C64::new(0.0, 0.0))
}
