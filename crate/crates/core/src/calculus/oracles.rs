use nalgebra::DMatrix;
use rayon::prelude::*;

use super::lift::LiftedSystem;
use super::univariate::{check_doubling, check_singularities, norm_est};
use super::CalculusError;
use crate::funcspace::{AnalyticFunction, MultiIndex};
use crate::numerics::{eigenvalues, kron_with_cap, resolvent, ComplexMatrix, C64};
use crate::spectra::Contour;

pub const DEFAULT_MULTI_NODES: usize = 64;
pub const MAX_DUNFORD_ARITY: usize = 3;
/// Node tuples allowed on the doubled grid.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 21;
pub const MULTI_DOUBLING_TOL: f64 = 1e-9;
/// Power-series tail bound relative to `max(1, ‖result‖)`.
pub const TAIL_TOL: f64 = 1e-12;
/// Extra orders beyond the cap used to estimate the tail.
const TAIL_ORDERS: usize = 10;
const OUTER_CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DunfordOptions {
    pub node_budget: usize,
    pub doubling_tol: f64,
}

impl Default for DunfordOptions {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
            doubling_tol: MULTI_DOUBLING_TOL,
        }
    }
}

/// Multivariate Dunford integral with default options.
pub fn dunford_multivariate(
    f: &AnalyticFunction,
    sys: &LiftedSystem,
    contours: &[Contour],
) -> Result<ComplexMatrix, CalculusError> {
    dunford_multivariate_with(f, sys, contours, &DunfordOptions::default())
}

/// `(2πi)^{−r} ∮…∮ f(z) ⊗_j (z_j I − X_j)⁻¹ dz` by iterated trapezoidal
/// quadrature, using resolvents of the original factors only.
///
/// Runs on the doubled grid; the coarse grid (even nodes) is the stability
/// check.
pub fn dunford_multivariate_with(
    f: &AnalyticFunction,
    sys: &LiftedSystem,
    contours: &[Contour],
    opts: &DunfordOptions,
) -> Result<ComplexMatrix, CalculusError> {
    let r = sys.arity();
    if f.arity() != r {
        return Err(CalculusError::ArityMismatch {
            function: f.arity(),
            system: r,
        });
    }
    if contours.len() != r {
        return Err(CalculusError::ContourCount {
            expected: r,
            got: contours.len(),
        });
    }
    if r > MAX_DUNFORD_ARITY {
        return Err(CalculusError::TooManyFactors {
            r,
            max: MAX_DUNFORD_ARITY,
        });
    }
    let evaluations = contours
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(2 * c.nodes()))
        .unwrap_or(usize::MAX);
    if evaluations > opts.node_budget {
        return Err(CalculusError::BudgetExceeded {
            evaluations,
            budget: opts.node_budget,
        });
    }
    for (x, contour) in sys.factors.iter().zip(contours) {
        let eigs = eigenvalues(x)?;
        if let Some(&e) = eigs.iter().find(|&&e| !contour.encloses(e)) {
            return Err(CalculusError::NotEnclosed {
                eigenvalue: e,
                center: contour.center(),
                radius: contour.radius(),
            });
        }
        contour.check_clear(&eigs)?;
    }
    if r == 1 {
        check_singularities(f, &contours[0])?;
    }

    // per factor: (z, fine weight, is coarse node, resolvent)
    let grids: Vec<Vec<Node>> = sys
        .factors
        .iter()
        .zip(contours)
        .map(|(x, c)| {
            let fine = c.with_nodes(2 * c.nodes())?;
            fine.quadrature()
                .into_par_iter()
                .enumerate()
                .map(|(k, (z, w))| {
                    Ok(Node {
                        z,
                        w,
                        even: k % 2 == 0,
                        r: resolvent(x, z)?,
                    })
                })
                .collect::<Result<Vec<_>, CalculusError>>()
        })
        .collect::<Result<_, _>>()?;

    let dim = sys.dim();
    let outer = &grids[0];
    let partials: Vec<Result<(DMatrix<C64>, DMatrix<C64>, f64), CalculusError>> = outer
        .par_chunks(OUTER_CHUNK)
        .map(|chunk| {
            let mut fine = DMatrix::zeros(dim, dim);
            let mut coarse = DMatrix::zeros(dim, dim);
            let mut mag: f64 = 0.0;
            let mut point = vec![C64::new(0.0, 0.0); r];
            for node in chunk {
                point[0] = node.z;
                let (inner_f, inner_c, m) = nest(f, &grids, 1, &mut point)?;
                let rn = node.r.frobenius_norm();
                mag = mag.max(m * rn);
                fine += kron_scalar_or(&node.r, &inner_f)?.as_nalgebra() * node.w;
                if node.even {
                    coarse += kron_scalar_or(&node.r, &inner_c)?.as_nalgebra() * (node.w * 2.0);
                }
            }
            Ok((fine, coarse, mag))
        })
        .collect();
    let mut fine = DMatrix::zeros(dim, dim);
    let mut coarse = DMatrix::zeros(dim, dim);
    let mut mag: f64 = 0.0;
    for p in partials {
        let (pf, pc, m) = p?;
        fine += pf;
        coarse += pc;
        mag = mag.max(m);
    }
    let fine = ComplexMatrix::from_nalgebra(fine)?;
    let coarse = ComplexMatrix::from_nalgebra(coarse)?;
    let radii: f64 = contours.iter().map(|c| c.radius()).product();
    check_doubling(&fine, &coarse, radii * mag, opts.doubling_tol)?;
    Ok(fine)
}

struct Node {
    z: C64,
    w: C64,
    even: bool,
    r: ComplexMatrix,
}

/// Inner integrals over factors `j..r` with the outer variables fixed in
/// `point`: `(fine, coarse, magnitude)`. Once every variable is bound the
/// "integral" is the 1×1 matrix `f(point)`.
type Inner = (ComplexMatrix, ComplexMatrix, f64);

fn nest(
    f: &AnalyticFunction,
    grids: &[Vec<Node>],
    j: usize,
    point: &mut Vec<C64>,
) -> Result<Inner, CalculusError> {
    if j == grids.len() {
        let v = f.eval(point)?;
        let m = ComplexMatrix::from_diagonal(&[v]);
        return Ok((m.clone(), m, v.norm()));
    }
    let d: usize = grids[j..].iter().map(|g| g[0].r.rows()).product();
    let mut fine = DMatrix::zeros(d, d);
    let mut coarse = DMatrix::zeros(d, d);
    let mut mag: f64 = 0.0;
    for node in &grids[j] {
        point[j] = node.z;
        let (inner_f, inner_c, m) = nest(f, grids, j + 1, point)?;
        mag = mag.max(m * node.r.frobenius_norm());
        fine += kron_scalar_or(&node.r, &inner_f)?.as_nalgebra() * node.w;
        if node.even {
            coarse += kron_scalar_or(&node.r, &inner_c)?.as_nalgebra() * (node.w * 2.0);
        }
    }
    Ok((
        ComplexMatrix::from_nalgebra(fine)?,
        ComplexMatrix::from_nalgebra(coarse)?,
        mag,
    ))
}

/// `a ⊗ b`, with a 1×1 `b` treated as a scalar.
fn kron_scalar_or(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, CalculusError> {
    if b.rows() == 1 {
        Ok(a.scale(b.get(0, 0)))
    } else {
        Ok(kron_with_cap(a, b, usize::MAX)?)
    }
}

/// Truncated lifted power series `Σ_{α_j ≤ cap} a_α ∏_j (X̃_j − c_j I)^{α_j}`
/// about `center` (default: the mean eigenvalue of each factor's
/// decomposition).
///
/// Fails when the estimated tail, summed over the next ten orders with
/// `‖(X̃_j − c_j)^k‖` weights, exceeds `TAIL_TOL·max(1, ‖result‖)`.
pub fn power_series_apply(
    f: &AnalyticFunction,
    sys: &LiftedSystem,
    center: Option<&[C64]>,
    degree_cap: usize,
) -> Result<ComplexMatrix, CalculusError> {
    let (value, tail) = power_series_tail(f, sys, center, degree_cap)?;
    let bound = TAIL_TOL * norm_est(&value).max(1.0);
    if tail > bound {
        return Err(CalculusError::TailTooLarge {
            cap: degree_cap,
            tail,
            bound,
        });
    }
    Ok(value)
}

/// Smallest cap in `8, 16, …, max_cap` whose tail passes.
pub fn power_series_apply_auto(
    f: &AnalyticFunction,
    sys: &LiftedSystem,
    center: Option<&[C64]>,
    max_cap: usize,
) -> Result<(ComplexMatrix, usize), CalculusError> {
    let mut cap = 8.min(max_cap.max(1));
    loop {
        match power_series_apply(f, sys, center, cap) {
            Ok(v) => return Ok((v, cap)),
            Err(CalculusError::TailTooLarge { .. }) if cap < max_cap => {
                cap = (cap + 8).min(max_cap);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Series value at `degree_cap` and its tail estimate.
pub fn power_series_tail(
    f: &AnalyticFunction,
    sys: &LiftedSystem,
    center: Option<&[C64]>,
    degree_cap: usize,
) -> Result<(ComplexMatrix, f64), CalculusError> {
    let r = sys.arity();
    if f.arity() != r {
        return Err(CalculusError::ArityMismatch {
            function: f.arity(),
            system: r,
        });
    }
    let center: Vec<C64> = match center {
        Some(c) => c.to_vec(),
        None => sys
            .decompositions
            .iter()
            .map(|d| {
                let e = d.eigenvalues();
                e.iter().sum::<C64>() / e.len().max(1) as f64
            })
            .collect(),
    };
    if center.len() != r {
        return Err(CalculusError::ArityMismatch {
            function: center.len(),
            system: r,
        });
    }
    let top = degree_cap + TAIL_ORDERS;
    let coeffs = f.taylor_coefficients(&center, top)?;
    let dim = sys.dim();

    // (X̃_j − c_j)^k for k ≤ top, with norms
    let powers: Vec<Vec<ComplexMatrix>> = sys
        .lifted
        .iter()
        .zip(&center)
        .map(|(x, &c)| {
            let y = x.shifted(c);
            let mut out = vec![ComplexMatrix::identity(dim)];
            for k in 1..=top {
                out.push(&out[k - 1] * &y);
            }
            out
        })
        .collect();
    let norms: Vec<Vec<f64>> = powers
        .iter()
        .map(|p| p.par_iter().map(norm_est).collect())
        .collect();

    let tail: f64 = coeffs
        .iter()
        .filter(|(a, _)| a.orders().iter().any(|&k| k > degree_cap))
        .map(|(a, v)| {
            v.norm()
                * a.orders()
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| norms[j][k])
                    .product::<f64>()
        })
        .sum();

    let lookup = |alpha: &[usize]| {
        coeffs
            .get(&MultiIndex::new(alpha.to_vec()))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    };
    let mut prefix = Vec::with_capacity(r);
    let value = horner(&powers, degree_cap, &mut prefix, &lookup);
    Ok((ComplexMatrix::from_nalgebra(value)?, tail))
}

/// `Σ_k Pow_j[k] · (inner sum over the remaining variables)`; the last
/// variable is a plain linear combination.
fn horner(
    powers: &[Vec<ComplexMatrix>],
    cap: usize,
    prefix: &mut Vec<usize>,
    coeff: &dyn Fn(&[usize]) -> C64,
) -> DMatrix<C64> {
    let j = prefix.len();
    let dim = powers[0][0].rows();
    let mut acc = DMatrix::zeros(dim, dim);
    for k in 0..=cap {
        prefix.push(k);
        if j + 1 == powers.len() {
            let a = coeff(prefix);
            if a != C64::new(0.0, 0.0) {
                acc += powers[j][k].as_nalgebra() * a;
            }
        } else {
            let inner = horner(powers, cap, prefix, coeff);
            acc += powers[j][k].as_nalgebra() * inner;
        }
        prefix.pop();
    }
    acc
}
