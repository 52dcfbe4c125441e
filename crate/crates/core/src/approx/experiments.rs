use rayon::prelude::*;

use super::estimates::{check_z0, error_constant_multi, padded_eigenvalues, resolvent_sups, ErrorConstant};
use super::models::{build_model, compress, unit_perturbation, ModelKind, OperatorModel, TruncationPoint};
use super::ApproxError;
use crate::calculus::{dunford, func_multivariate, func_univariate, lift_with_decompositions};
use crate::funcspace::AnalyticFunction;
use crate::numerics::{eigenvalues, kron_all, op_norm, resolvent, ComplexMatrix, C64, DEFAULT_TENSOR_CAP};
use crate::spectra::{decompose_enclosed, Contour, DecomposeOptions, Decomposition};

/// Level-1 probe errors must end below this.
pub const LEVEL1_TOL: f64 = 1e-6;
/// Relative slack on the Level-2 inequality.
pub const LEVEL2_SLACK: f64 = 1e-6;
/// Absolute slack on the Level-2 inequality, relative to `max(1, ‖f(X)P‖)`.
/// Covers round-off when both sides vanish.
pub const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Largest admissible relative change of a metric when `N_ref` halves.
pub const STABILITY_TOL: f64 = 0.05;
/// Metrics at or below this are treated as zero by [`reference_stability`].
pub const STABILITY_NOISE_FLOOR: f64 = 1e-10;
const MONOTONE_SLACK: f64 = 1e-14;
const DEFAULT_PROBES: usize = 4;

/// `f(X)P` on the enclosed cluster and the cluster projector `P`, both at
/// the padded dimension.
#[derive(Clone, Debug)]
pub struct ClusterFunction {
    pub value: ComplexMatrix,
    pub projector: ComplexMatrix,
}

/// Decomposition of `block` restricted to `contour`, zero-extended to `dim`.
/// A padded section has the extra eigenvalue 0, which must stay outside.
fn enclosed_decomposition(
    block: &ComplexMatrix,
    dim: usize,
    contour: &Contour,
    opts: &DecomposeOptions,
) -> Result<Decomposition, ApproxError> {
    if block.rows() < dim {
        let zero = C64::new(0.0, 0.0);
        if contour.encloses(zero) {
            return Err(ApproxError::PaddedZeroEnclosed {
                center: contour.center(),
                radius: contour.radius(),
            });
        }
        contour.check_clear(&[zero])?;
    }
    Ok(decompose_enclosed(block, contour, opts)?.embed(dim))
}

/// `f` on the part of the spectrum of `block ⊕ 0_{dim−n}` inside `contour`.
///
/// An unpadded matrix whose whole spectrum is enclosed goes through the
/// Dunford integral (`P = I`); otherwise the enclosed decomposition of the
/// block is used so the padded zeros never enter the quadrature.
pub fn cluster_function(
    f: &AnalyticFunction,
    block: &ComplexMatrix,
    dim: usize,
    contour: &Contour,
    opts: &DecomposeOptions,
) -> Result<ClusterFunction, ApproxError> {
    let n = block.ensure_square()?;
    if n == dim {
        let eigs = eigenvalues(block)?;
        if eigs.iter().all(|&e| contour.encloses(e)) {
            return Ok(ClusterFunction {
                value: dunford(f, block, contour)?,
                projector: ComplexMatrix::identity(dim),
            });
        }
    }
    let dec = enclosed_decomposition(block, dim, contour, opts)?;
    Ok(ClusterFunction {
        value: func_univariate(f, &dec)?,
        projector: dec.total_projector(),
    })
}

/// First `k` standard basis vectors of `C^dim`.
pub fn default_probes(k: usize, dim: usize) -> Vec<Vec<C64>> {
    (0..k.min(dim))
        .map(|i| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[i] = C64::new(1.0, 0.0);
            v
        })
        .collect()
}

/// Inputs of [`level_experiment`].
#[derive(Clone, Debug)]
pub struct LevelSetup {
    pub z0: C64,
    pub contour: Contour,
    pub n_list: Vec<usize>,
    /// Empty means the first `min(4, n_min)` basis vectors.
    pub probes: Vec<Vec<C64>>,
    pub opts: DecomposeOptions,
}

impl LevelSetup {
    pub fn new(z0: C64, contour: Contour, n_list: Vec<usize>) -> Self {
        Self {
            z0,
            contour,
            n_list,
            probes: Vec::new(),
            opts: DecomposeOptions::default(),
        }
    }
}

/// One line of a convergence report. For several factors the ε columns are
/// sums over factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub delta: Option<f64>,
    pub eps_global: f64,
    pub eps_cluster: f64,
    pub func_error_norm: f64,
    pub probe_errors: Vec<f64>,
    pub bound_rhs: f64,
    pub level2_ok: bool,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub model: String,
    pub function: String,
    pub z0: Vec<C64>,
    pub contours: Vec<Contour>,
    /// Sections per factor, in row order.
    pub points: Vec<Vec<TruncationPoint>>,
    pub rows: Vec<ReportRow>,
    pub constant: ErrorConstant,
    pub level1_pass: bool,
    pub level2_pass: bool,
    pub reference_stability: Option<f64>,
}

impl ConvergenceReport {
    pub fn c_f(&self) -> f64 {
        self.constant.c_f
    }

    /// Probe-error sequence of probe `k` in row order.
    pub fn probe_series(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.probe_errors[k]).collect()
    }
}

/// Every probe sequence ends below [`LEVEL1_TOL`] and is nonincreasing from
/// the first entry within 10× of its final value.
pub fn level1_pass(rows: &[ReportRow]) -> bool {
    let Some(last) = rows.last() else {
        return false;
    };
    (0..last.probe_errors.len()).all(|k| {
        let seq: Vec<f64> = rows.iter().map(|r| r.probe_errors[k]).collect();
        let fin = *seq.last().expect("nonempty");
        if !(fin < LEVEL1_TOL) {
            return false;
        }
        let start = seq.iter().position(|&e| e <= 10.0 * fin).unwrap_or(seq.len() - 1);
        seq[start..].windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK)
    })
}

fn check_probes(probes: &[Vec<C64>], dim: usize) -> Result<(), ApproxError> {
    match probes.iter().find(|p| p.len() != dim) {
        Some(p) => Err(ApproxError::ProbeDimension {
            expected: dim,
            got: p.len(),
        }),
        None => Ok(()),
    }
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Reference quantities shared by every section of one factor.
struct FactorReference {
    r0: ComplexMatrix,
    r0p: ComplexMatrix,
}

impl FactorReference {
    fn new(x: &ComplexMatrix, projector: &ComplexMatrix, z0: C64) -> Result<Self, ApproxError> {
        check_z0(z0, &eigenvalues(x)?)?;
        let r0 = resolvent(x, z0)?;
        let r0p = &r0 * projector;
        Ok(Self { r0, r0p })
    }

    /// Fills `eps_n` and `eps_cluster` of `point`.
    fn measure(&self, x: &ComplexMatrix, point: &mut TruncationPoint, z0: C64) -> Result<(), ApproxError> {
        check_z0(z0, &padded_eigenvalues(point)?)?;
        let diff = &point.x_n_padded - x;
        point.eps_n = op_norm(&(&diff * &self.r0));
        point.eps_cluster = op_norm(&(&diff * &self.r0p));
        Ok(())
    }
}

/// Shared driver for one operator and a list of sections.
fn run_single(
    model: &OperatorModel,
    f: &AnalyticFunction,
    z0: C64,
    contour: &Contour,
    opts: &DecomposeOptions,
    probes: &[Vec<C64>],
    points: Vec<TruncationPoint>,
) -> Result<ConvergenceReport, ApproxError> {
    let dim = model.ref_dim;
    check_probes(probes, dim)?;
    let x = &model.matrix_ref;
    let reference = cluster_function(f, x, dim, contour, opts)?;
    let fr = FactorReference::new(x, &reference.projector, z0)?;
    let floor = ROUNDOFF_FLOOR * op_norm(&reference.value).max(1.0);

    let points = points
        .into_par_iter()
        .map(|mut p| {
            fr.measure(x, &mut p, z0)?;
            let fx = cluster_function(f, &p.x_n, dim, contour, opts)?;
            let diff = &fx.value - &reference.value;
            p.func_error_norm = op_norm(&(&diff * &reference.projector));
            p.func_error_vectors = probes.iter().map(|u| vec_norm(&diff.mat_vec(u))).collect();
            Ok(p)
        })
        .collect::<Result<Vec<_>, ApproxError>>()?;

    let sups = resolvent_sups(x, contour, &points)?;
    let constant = error_constant_multi(f, &[sups])?;
    let rows: Vec<ReportRow> = points
        .iter()
        .map(|p| {
            let bound_rhs = constant.c_f * p.eps_cluster;
            ReportRow {
                n: p.n,
                delta: p.delta,
                eps_global: p.eps_n,
                eps_cluster: p.eps_cluster,
                func_error_norm: p.func_error_norm,
                probe_errors: p.func_error_vectors.clone(),
                bound_rhs,
                level2_ok: p.func_error_norm <= bound_rhs * (1.0 + LEVEL2_SLACK) + floor,
            }
        })
        .collect();
    Ok(ConvergenceReport {
        model: model.name().to_string(),
        function: f.to_string(),
        z0: vec![z0],
        contours: vec![*contour],
        points: vec![points],
        level1_pass: level1_pass(&rows),
        level2_pass: rows.iter().all(|r| r.level2_ok),
        rows,
        constant,
        reference_stability: None,
    })
}

/// Level-1 and Level-2 metrics of `f(X_n)` against `f(X)` on the cluster
/// enclosed by `setup.contour`, for every `n` in `setup.n_list`.
pub fn level_experiment(
    model: &OperatorModel,
    f: &AnalyticFunction,
    setup: &LevelSetup,
) -> Result<ConvergenceReport, ApproxError> {
    let n_min = *setup.n_list.iter().min().ok_or(ApproxError::Empty("n_list"))?;
    let probes = if setup.probes.is_empty() {
        default_probes(DEFAULT_PROBES.min(n_min), model.ref_dim)
    } else {
        setup.probes.clone()
    };
    let points = setup
        .n_list
        .iter()
        .map(|&n| compress(model, n))
        .collect::<Result<Vec<_>, _>>()?;
    run_single(model, f, setup.z0, &setup.contour, &setup.opts, &probes, points)
}

/// [`level_experiment`] at `ref_dim` plus the audit run at `ref_dim/2` over
/// the sections valid for both; fills `reference_stability`.
pub fn level_experiment_audited(
    kind: ModelKind,
    ref_dim: usize,
    guard: usize,
    f: &AnalyticFunction,
    setup: &LevelSetup,
) -> Result<ConvergenceReport, ApproxError> {
    let full = build_model(kind, ref_dim, guard)?;
    let mut report = level_experiment(&full, f, setup)?;
    let half_dim = ref_dim / 2;
    let half = build_model(kind, half_dim, guard)?;
    let mut half_setup = setup.clone();
    half_setup.n_list.retain(|&n| n <= half_dim / 2);
    if half_setup.n_list.is_empty() {
        return Err(ApproxError::Empty("n_list valid at ref_dim/2"));
    }
    // probes live in the leading coordinates
    let n_min = *setup.n_list.iter().min().expect("nonempty");
    let probes = if setup.probes.is_empty() {
        default_probes(DEFAULT_PROBES.min(n_min), ref_dim)
    } else {
        setup.probes.clone()
    };
    half_setup.probes = probes.iter().map(|p| p[..half_dim].to_vec()).collect();
    let half_report = level_experiment(&half, f, &half_setup)?;
    report.reference_stability = Some(reference_stability(&report, &half_report));
    Ok(report)
}

/// `X_δ = X + δE` with a seeded `‖E‖ = 1`, one row per `δ`. Rows carry
/// `n = dim` and the `δ` they were built with.
pub fn perturbation_experiment(
    model: &OperatorModel,
    f: &AnalyticFunction,
    z0: C64,
    contour: &Contour,
    deltas: &[f64],
    seed: u64,
) -> Result<ConvergenceReport, ApproxError> {
    if deltas.is_empty() {
        return Err(ApproxError::Empty("delta list"));
    }
    let dim = model.ref_dim;
    let e = unit_perturbation(dim, seed);
    let points: Vec<TruncationPoint> = deltas
        .iter()
        .map(|&d| {
            let mut p = TruncationPoint::new(dim, &model.matrix_ref + &e.scale_real(d), dim);
            p.delta = Some(d);
            p
        })
        .collect();
    let probes = default_probes(DEFAULT_PROBES, dim);
    run_single(model, f, z0, contour, &DecomposeOptions::default(), &probes, points)
}

/// Largest relative change `|a − b|/|a|` over rows present in both reports
/// (matched by `n` and `δ`) and over `eps_global`, `eps_cluster`,
/// `func_error_norm` and the probe errors. Pairs where both values are at
/// most [`STABILITY_NOISE_FLOOR`] are skipped.
pub fn reference_stability(a: &ConvergenceReport, b: &ConvergenceReport) -> f64 {
    let mut worst: f64 = 0.0;
    let mut cmp = |x: f64, y: f64| {
        if x.abs().max(y.abs()) > STABILITY_NOISE_FLOOR {
            worst = worst.max((x - y).abs() / x.abs().max(STABILITY_NOISE_FLOOR));
        }
    };
    for ra in &a.rows {
        let Some(rb) = b.rows.iter().find(|r| r.n == ra.n && r.delta == ra.delta) else {
            continue;
        };
        cmp(ra.eps_global, rb.eps_global);
        cmp(ra.eps_cluster, rb.eps_cluster);
        cmp(ra.func_error_norm, rb.func_error_norm);
        for (&x, &y) in ra.probe_errors.iter().zip(&rb.probe_errors) {
            cmp(x, y);
        }
    }
    worst
}

/// One factor of [`multivariate_experiment`].
#[derive(Clone, Debug)]
pub struct FactorSetup {
    pub model: OperatorModel,
    pub z0: C64,
    pub contour: Contour,
    /// `false` keeps the full reference matrix at every `n` (`ε = 0`).
    pub truncate: bool,
}

/// Tensor-lifted sections against the tensor-lifted reference on the
/// product cluster `P_1 ⊗ … ⊗ P_r`; the bound is `C_f·Σ_j ε^{(j)}` with the
/// cluster-restricted `ε`.
pub fn multivariate_experiment(
    factors: &[FactorSetup],
    f: &AnalyticFunction,
    n_list: &[usize],
    opts: &DecomposeOptions,
) -> Result<ConvergenceReport, ApproxError> {
    if factors.is_empty() {
        return Err(ApproxError::Empty("factor list"));
    }
    if n_list.is_empty() {
        return Err(ApproxError::Empty("n_list"));
    }
    let r = factors.len();
    if f.arity() != r {
        return Err(crate::calculus::CalculusError::ArityMismatch {
            function: f.arity(),
            system: r,
        }
        .into());
    }
    let dims: Vec<usize> = factors.iter().map(|s| s.model.ref_dim).collect();
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    if !matches!(total, Some(t) if t <= DEFAULT_TENSOR_CAP) {
        return Err(crate::numerics::NumericsError::TensorTooLarge {
            dim: total.unwrap_or(usize::MAX),
            cap: DEFAULT_TENSOR_CAP,
        }
        .into());
    }

    let mut ref_decs = Vec::with_capacity(r);
    let mut refs = Vec::with_capacity(r);
    let mut projectors = Vec::with_capacity(r);
    for s in factors {
        let x = &s.model.matrix_ref;
        let dec = enclosed_decomposition(x, s.model.ref_dim, &s.contour, opts)?;
        let p = dec.total_projector();
        refs.push(FactorReference::new(x, &p, s.z0)?);
        projectors.push(p);
        ref_decs.push(dec);
    }
    let ref_mats: Vec<ComplexMatrix> = factors.iter().map(|s| s.model.matrix_ref.clone()).collect();
    let reference = func_multivariate(
        f,
        &lift_with_decompositions(&ref_mats, ref_decs, DEFAULT_TENSOR_CAP)?,
    )?
    .value;
    let p_all = kron_all(&projectors, DEFAULT_TENSOR_CAP)?;
    let floor = ROUNDOFF_FLOOR * op_norm(&reference).max(1.0);
    let probes = default_probes(DEFAULT_PROBES, reference.rows());

    let mut points: Vec<Vec<TruncationPoint>> = vec![Vec::with_capacity(n_list.len()); r];
    let mut measured = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut decs = Vec::with_capacity(r);
        let mut mats = Vec::with_capacity(r);
        for (j, s) in factors.iter().enumerate() {
            let mut p = compress(&s.model, if s.truncate { n } else { s.model.ref_dim })?;
            refs[j].measure(&s.model.matrix_ref, &mut p, s.z0)?;
            decs.push(enclosed_decomposition(&p.x_n, s.model.ref_dim, &s.contour, opts)?);
            mats.push(p.x_n_padded.clone());
            points[j].push(p);
        }
        let value = func_multivariate(f, &lift_with_decompositions(&mats, decs, DEFAULT_TENSOR_CAP)?)?.value;
        let diff = &value - &reference;
        let err = op_norm(&(&diff * &p_all));
        let probe_errors: Vec<f64> = probes.iter().map(|u| vec_norm(&diff.mat_vec(u))).collect();
        for pts in &mut points {
            let p = pts.last_mut().expect("pushed above");
            p.func_error_norm = err;
            p.func_error_vectors = probe_errors.clone();
        }
        measured.push((n, err, probe_errors));
    }

    let sups = factors
        .iter()
        .zip(&points)
        .map(|(s, pts)| resolvent_sups(&s.model.matrix_ref, &s.contour, pts))
        .collect::<Result<Vec<_>, _>>()?;
    let constant = error_constant_multi(f, &sups)?;
    let rows: Vec<ReportRow> = measured
        .into_iter()
        .enumerate()
        .map(|(i, (n, err, probe_errors))| {
            let eps_global: f64 = points.iter().map(|pts| pts[i].eps_n).sum();
            let eps_cluster: f64 = points.iter().map(|pts| pts[i].eps_cluster).sum();
            let bound_rhs = constant.c_f * eps_cluster;
            ReportRow {
                n,
                delta: None,
                eps_global,
                eps_cluster,
                func_error_norm: err,
                probe_errors,
                bound_rhs,
                level2_ok: err <= bound_rhs * (1.0 + LEVEL2_SLACK) + floor,
            }
        })
        .collect();
    let names: Vec<&str> = factors.iter().map(|s| s.model.name()).collect();
    Ok(ConvergenceReport {
        model: names.join("+"),
        function: f.to_string(),
        z0: factors.iter().map(|s| s.z0).collect(),
        contours: factors.iter().map(|s| s.contour).collect(),
        points,
        level1_pass: level1_pass(&rows),
        level2_pass: rows.iter().all(|r| r.level2_ok),
        rows,
        constant,
        reference_stability: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_neg(arity: usize) -> AnalyticFunction {
        AnalyticFunction::exp_affine(vec![C64::new(-1.0, 0.0); arity], C64::new(0.0, 0.0))
    }

    fn low3_contour() -> Contour {
        Contour::circle(C64::new(3.0, 0.0), 2.5).unwrap()
    }

    #[test]
    fn harmonic_probe_errors_vanish_once_cluster_fits() {
        let model = build_model(ModelKind::Harmonic, 16, 2).unwrap();
        let mut setup = LevelSetup::new(C64::new(-1.0, 0.0), low3_contour(), vec![1, 2, 3, 4, 6, 8]);
        setup.probes = default_probes(2, 16);
        let rep = level_experiment(&model, &exp_neg(1), &setup).unwrap();
        for row in &rep.rows {
            if row.n >= 3 {
                assert!(row.probe_errors.iter().all(|&e| e <= 1e-14), "{row:?}");
                assert!(row.func_error_norm <= 1e-14);
                assert!(row.eps_cluster <= 1e-14);
            }
        }
        // n = 1 misses λ = 3 and λ = 5
        assert!((rep.rows[0].probe_errors[1] - (-3f64).exp()).abs() < 1e-12);
        assert!(rep.level1_pass && rep.level2_pass);
        assert!((rep.rows[2].eps_global - 31.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn padded_zero_must_stay_outside() {
        let model = build_model(ModelKind::Harmonic, 16, 2).unwrap();
        let contour = Contour::circle(C64::new(1.0, 0.0), 1.5).unwrap();
        let setup = LevelSetup::new(C64::new(-3.0, 0.0), contour, vec![2]);
        assert!(matches!(
            level_experiment(&model, &exp_neg(1), &setup),
            Err(ApproxError::PaddedZeroEnclosed { .. })
        ));
    }

    #[test]
    fn perturbation_bound_holds() {
        let model = build_model(ModelKind::JordanToy, 4, 0).unwrap();
        let contour = Contour::circle(C64::new(0.5, 0.5), 3.0).unwrap();
        let rep = perturbation_experiment(&model, &exp_neg(1), C64::new(-2.0, 0.0), &contour, &[1e-1, 1e-2, 1e-3, 1e-4], 7)
            .unwrap();
        assert!(rep.level2_pass, "{:?}", rep.rows);
        let errs: Vec<f64> = rep.rows.iter().map(|r| r.func_error_norm).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.rows.iter().all(|r| r.eps_cluster == r.eps_global));
    }

    #[test]
    fn level1_rule() {
        let row = |e: f64| ReportRow {
            n: 0,
            delta: None,
            eps_global: 0.0,
            eps_cluster: 0.0,
            func_error_norm: 0.0,
            probe_errors: vec![e],
            bound_rhs: 0.0,
            level2_ok: true,
        };
        let rows = |v: &[f64]| v.iter().map(|&e| row(e)).collect::<Vec<_>>();
        assert!(level1_pass(&rows(&[1.0, 2.0, 1e-3, 1e-7])));
        assert!(level1_pass(&rows(&[1e-1, 0.0, 0.0])));
        assert!(!level1_pass(&rows(&[1e-6, 1e-8, 5e-8, 1e-8])));
        assert!(!level1_pass(&rows(&[1.0, 1e-3])));
        assert!(!level1_pass(&[]));
    }

    #[test]
    fn multivariate_harmonic_pair() {
        let model = build_model(ModelKind::Harmonic, 16, 2).unwrap();
        let setup = FactorSetup {
            model,
            z0: C64::new(-1.0, 0.0),
            contour: low3_contour(),
            truncate: true,
        };
        let rep = multivariate_experiment(&[setup.clone(), setup], &exp_neg(2), &[2, 4, 8], &DecomposeOptions::default())
            .unwrap();
        assert!(rep.level2_pass, "{:?}", rep.rows);
        assert!(rep.rows[0].func_error_norm > 1e-4);
        assert!(rep.rows[2].func_error_norm < 1e-14);
        assert_eq!(rep.points.len(), 2);
    }
}
