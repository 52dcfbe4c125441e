use rayon::prelude::*;

use super::experiments::default_probes;
use super::ApproxError;
use crate::numerics::{op_norm, resolvent, ComplexMatrix, C64};

const DEFAULT_PROBES: usize = 4;
const BOUND_SLACK: f64 = 1e-6;

/// Measurements at one `ε`. `status` holds the failure message when `z0`
/// is not in the resolvent set of `X + εK`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationRow {
    pub eps: f64,
    /// `‖(R_ε(z0) − R(z0))u‖` per probe.
    pub probe_errors: Vec<f64>,
    /// `‖R_ε(z0) − R(z0)‖`.
    pub norm_error: f64,
    /// `‖εK·R(z0)‖`.
    pub hypothesis: f64,
    /// `‖εK·R(z0)u‖` per probe.
    pub bound_terms: Vec<f64>,
    /// `‖R_ε(z0)‖`.
    pub resolvent_norm: f64,
    pub bound_ok: bool,
    pub status: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationReport {
    pub z0: C64,
    /// `M = max_ε ‖R_ε(z0)‖` over the successful rows.
    pub sup_resolvent: f64,
    pub rows: Vec<RegularizationRow>,
    /// Every probe error sequence strictly decreases along the list.
    pub probes_decreasing: bool,
    /// `error_u ≤ M·‖εKRu‖·(1 + 1e−6)` at every successful `ε`.
    pub bound_pass: bool,
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Resolvent of `X + εK` against that of `X` at `z0` for each `ε`, in list
/// order. Empty `probes` means the first four basis vectors.
pub fn regularization_sweep(
    x: &ComplexMatrix,
    k: &ComplexMatrix,
    eps_list: &[f64],
    z0: C64,
    probes: &[Vec<C64>],
) -> Result<RegularizationReport, ApproxError> {
    let dim = x.ensure_square()?;
    if k.rows() != dim || k.cols() != dim {
        return Err(crate::numerics::NumericsError::DimensionMismatch {
            op: "regularization_sweep",
            left: (dim, dim),
            right: (k.rows(), k.cols()),
        }
        .into());
    }
    if eps_list.is_empty() {
        return Err(ApproxError::Empty("eps_list"));
    }
    if let Some(&e) = eps_list.iter().find(|&&e| !(e >= 0.0)) {
        return Err(ApproxError::NegativeEpsilon(e));
    }
    let probes = if probes.is_empty() {
        default_probes(DEFAULT_PROBES, dim)
    } else {
        probes.to_vec()
    };
    if let Some(p) = probes.iter().find(|p| p.len() != dim) {
        return Err(ApproxError::ProbeDimension {
            expected: dim,
            got: p.len(),
        });
    }
    let r = resolvent(x, z0)?;
    let kr = k * &r;
    let r_u: Vec<Vec<C64>> = probes.iter().map(|u| kr.mat_vec(u)).collect();

    let mut rows: Vec<RegularizationRow> = eps_list
        .par_iter()
        .map(|&eps| {
            let bound_terms: Vec<f64> = r_u.iter().map(|v| eps * vec_norm(v)).collect();
            let hypothesis = eps * op_norm(&kr);
            let x_eps = x + &k.scale_real(eps);
            match resolvent(&x_eps, z0) {
                Ok(r_eps) => {
                    let diff = &r_eps - &r;
                    RegularizationRow {
                        eps,
                        probe_errors: probes.iter().map(|u| vec_norm(&diff.mat_vec(u))).collect(),
                        norm_error: op_norm(&diff),
                        hypothesis,
                        bound_terms,
                        resolvent_norm: op_norm(&r_eps),
                        bound_ok: false,
                        status: None,
                    }
                }
                Err(e) => RegularizationRow {
                    eps,
                    probe_errors: Vec::new(),
                    norm_error: f64::NAN,
                    hypothesis,
                    bound_terms,
                    resolvent_norm: f64::NAN,
                    bound_ok: false,
                    status: Some(e.to_string()),
                },
            }
        })
        .collect();

    let ok = |row: &&mut RegularizationRow| row.status.is_none();
    let sup_resolvent = rows
        .iter_mut()
        .filter(ok)
        .map(|row| row.resolvent_norm)
        .fold(0.0, f64::max);
    for row in rows.iter_mut().filter(ok) {
        row.bound_ok = row
            .probe_errors
            .iter()
            .zip(&row.bound_terms)
            .all(|(&e, &b)| e <= sup_resolvent * b * (1.0 + BOUND_SLACK));
    }
    let good: Vec<&RegularizationRow> = rows.iter().filter(|r| r.status.is_none()).collect();
    let probes_decreasing = good.len() == rows.len()
        && (0..probes.len()).all(|p| good.windows(2).all(|w| w[1].probe_errors[p] < w[0].probe_errors[p]));
    let bound_pass = good.iter().all(|r| r.bound_ok);
    Ok(RegularizationReport {
        z0,
        sup_resolvent,
        rows,
        probes_decreasing,
        bound_pass,
    })
}
