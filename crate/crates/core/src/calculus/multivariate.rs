use nalgebra::DMatrix;
use rayon::prelude::*;

use super::lift::LiftedSystem;
use super::CalculusError;
use crate::funcspace::{AnalyticFunction, MultiIndex};
use crate::numerics::{kron_all, op_norm, ComplexMatrix, C64, DEFAULT_TENSOR_CAP};

/// Which part of the three-term split a multi-index feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermClass {
    /// `α = 0`.
    Spectral,
    /// `0 < |supp α| < r`.
    Mixed,
    /// `|supp α| = r`.
    Full,
}

impl TermClass {
    pub fn of(alpha: &MultiIndex) -> Self {
        let s = alpha.support().len();
        if s == 0 {
            TermClass::Spectral
        } else if s < alpha.arity() {
            TermClass::Mixed
        } else {
            TermClass::Full
        }
    }
}

/// One term `c·⊗_j N_j^{α_j} P_j` of the expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry {
    /// Component index per factor.
    pub components: Vec<usize>,
    pub lambdas: Vec<C64>,
    pub alpha: MultiIndex,
    /// `∂^α f(λ)/α!`.
    pub coefficient: C64,
    /// Operator norm of the term, `|c|·∏_j ‖N_j^{α_j} P_j‖`.
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub s0: ComplexMatrix,
    pub s_mixed: ComplexMatrix,
    pub s_full: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalculusResult {
    pub value: ComplexMatrix,
    pub term_ledger: Vec<LedgerEntry>,
    pub split: Split,
}

/// `(s0, s_mixed, s_full)` of a result.
pub fn three_term_split(result: &CalculusResult) -> (&ComplexMatrix, &ComplexMatrix, &ComplexMatrix) {
    (&result.split.s0, &result.split.s_mixed, &result.split.s_full)
}

/// Multivariate expansion over eigenvalue tuples and multi-indices:
///
/// `f_⊗ = Σ_{(k_1…k_r)} Σ_{α_j < ν_j} ∂^α f(λ)/α! · ⊗_j N_j^{α_j} P_j`.
///
/// Tuples are visited lexicographically in component order, and the
/// reduction runs in that order regardless of thread count.
pub fn func_multivariate(f: &AnalyticFunction, sys: &LiftedSystem) -> Result<CalculusResult, CalculusError> {
    let r = sys.arity();
    if f.arity() != r {
        return Err(CalculusError::ArityMismatch {
            function: f.arity(),
            system: r,
        });
    }
    let dim = sys.dim();

    // N^q P per factor, component and order, with their norms
    let powers: Vec<Vec<Vec<(ComplexMatrix, f64)>>> = sys
        .decompositions
        .iter()
        .map(|dec| {
            dec.components
                .iter()
                .map(|c| {
                    let mut out = Vec::with_capacity(c.nilpotency_index.max(1));
                    let mut m = c.projector.clone();
                    for q in 0..c.nilpotency_index.max(1) {
                        if q > 0 {
                            m = &c.nilpotent * &m;
                        }
                        let norm = op_norm(&m);
                        out.push((m.clone(), norm));
                    }
                    out
                })
                .collect()
        })
        .collect();

    let counts: Vec<usize> = sys.decompositions.iter().map(|d| d.components.len()).collect();
    let tuples: Vec<Vec<usize>> = MultiIndex::box_iter(
        &counts.iter().map(|&c| c.saturating_sub(1)).collect::<Vec<_>>(),
    )
    .filter(|_| counts.iter().all(|&c| c > 0))
    .map(|m| m.orders().to_vec())
    .collect();

    type Partial = ([DMatrix<C64>; 3], Vec<LedgerEntry>);
    let partials: Vec<Result<Partial, CalculusError>> = tuples
        .par_iter()
        .map(|tuple| {
            let lambdas: Vec<C64> = tuple
                .iter()
                .enumerate()
                .map(|(j, &k)| sys.decompositions[j].components[k].lambda)
                .collect();
            let bounds: Vec<usize> = tuple
                .iter()
                .enumerate()
                .map(|(j, &k)| powers[j][k].len() - 1)
                .collect();
            let jet = f.taylor_table(&lambdas, &bounds)?;
            let mut acc = [
                DMatrix::zeros(dim, dim),
                DMatrix::zeros(dim, dim),
                DMatrix::zeros(dim, dim),
            ];
            let mut ledger = Vec::new();
            for (alpha, coeff) in jet.iter() {
                let parts: Vec<ComplexMatrix> = alpha
                    .orders()
                    .iter()
                    .enumerate()
                    .map(|(j, &q)| powers[j][tuple[j]][q].0.clone())
                    .collect();
                let norm = coeff.norm()
                    * alpha
                        .orders()
                        .iter()
                        .enumerate()
                        .map(|(j, &q)| powers[j][tuple[j]][q].1)
                        .product::<f64>();
                let slot = match TermClass::of(&alpha) {
                    TermClass::Spectral => 0,
                    TermClass::Mixed => 1,
                    TermClass::Full => 2,
                };
                if coeff != C64::new(0.0, 0.0) {
                    let term = kron_all(&parts, DEFAULT_TENSOR_CAP.max(dim))?;
                    acc[slot] += term.as_nalgebra() * coeff;
                }
                ledger.push(LedgerEntry {
                    components: tuple.clone(),
                    lambdas: lambdas.clone(),
                    alpha,
                    coefficient: coeff,
                    norm,
                });
            }
            Ok((acc, ledger))
        })
        .collect();

    let mut sums = [
        DMatrix::zeros(dim, dim),
        DMatrix::zeros(dim, dim),
        DMatrix::zeros(dim, dim),
    ];
    let mut term_ledger = Vec::new();
    for p in partials {
        let (acc, ledger) = p?;
        for (s, a) in sums.iter_mut().zip(acc) {
            *s += a;
        }
        term_ledger.extend(ledger);
    }
    let [s0, s_mixed, s_full] = sums.map(ComplexMatrix::from_nalgebra);
    let split = Split {
        s0: s0?,
        s_mixed: s_mixed?,
        s_full: s_full?,
    };
    let value = &(&split.s0 + &split.s_mixed) + &split.s_full;
    Ok(CalculusResult {
        value,
        term_ledger,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::lift;
    use crate::numerics::kron;
    use crate::spectra::DecomposeOptions;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pair() -> LiftedSystem {
        let x1 = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let x2 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        lift(&[x1, x2], &DecomposeOptions::default()).unwrap()
    }

    #[test]
    fn product_of_coordinates_on_worked_pair() {
        let sys = pair();
        let f = AnalyticFunction::polynomial(2, [(vec![1, 1], c(1.0))]);
        let res = func_multivariate(&f, &sys).unwrap();
        let expected = kron(&sys.factors[0], &sys.factors[1]).unwrap();
        assert!(res.value.max_abs_diff(&expected) < 1e-12);

        let (s0, s_mixed, s_full) = three_term_split(&res);
        let i2 = ComplexMatrix::identity(2);
        let n1 = &sys.factors[0] - &i2;
        assert!(s0.max_abs() < 1e-12);
        assert!(s_mixed.max_abs_diff(&kron(&i2, &sys.factors[1]).unwrap()) < 1e-12);
        assert!(s_full.max_abs_diff(&kron(&n1, &sys.factors[1]).unwrap()) < 1e-12);
        assert_eq!(res.term_ledger.len(), 4);
    }

    #[test]
    fn single_factor_has_no_mixed_part() {
        let x = ComplexMatrix::jordan_block(3, c(0.5));
        let sys = lift(&[x], &DecomposeOptions::default()).unwrap();
        let f = AnalyticFunction::exp_affine(vec![c(1.0)], c(0.0));
        let res = func_multivariate(&f, &sys).unwrap();
        assert_eq!(res.split.s_mixed.max_abs(), 0.0);
        assert_eq!(res.term_ledger.len(), 3);
        assert!(res.term_ledger.iter().all(|t| t.components == [0]));
    }

    #[test]
    fn arity_must_match() {
        let f = AnalyticFunction::exp_affine(vec![c(1.0)], c(0.0));
        assert!(matches!(
            func_multivariate(&f, &pair()),
            Err(CalculusError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn term_class_by_support() {
        assert_eq!(TermClass::of(&MultiIndex::new(vec![0, 0])), TermClass::Spectral);
        assert_eq!(TermClass::of(&MultiIndex::new(vec![0, 2])), TermClass::Mixed);
        assert_eq!(TermClass::of(&MultiIndex::new(vec![1, 1])), TermClass::Full);
        assert_eq!(TermClass::of(&MultiIndex::new(vec![3])), TermClass::Full);
    }
}
