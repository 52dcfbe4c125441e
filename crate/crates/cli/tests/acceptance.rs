//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pnfc_core::approx::{
    build_model, default_probes, jordan_similar, level_experiment_audited, multivariate_experiment,
    perturbation_experiment, regularization_sweep, FactorSetup, LevelSetup, ModelKind,
};
use pnfc_core::calculus::{
    dunford_multivariate, func_multivariate, lift, lift_with_decompositions, power_series_apply,
    power_series_apply_auto,
};
use pnfc_core::funcspace::{AnalyticFunction, Polynomial};
use pnfc_core::numerics::{eig, eigenvalues, kron, op_norm, write_cmat, ComplexMatrix, C64, DEFAULT_TENSOR_CAP};
use pnfc_core::spectra::{decompose_with, verify_decomposition, Contour, DecomposeOptions};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, || format!("runtime {:?} exceeds {limit:?}", t.elapsed()))
}

fn e(msg: impl std::fmt::Display) -> String {
    msg.to_string()
}

// ---------------------------------------------------------------- 1

fn worked_pair() -> (ComplexMatrix, ComplexMatrix) {
    (
        ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap(),
        ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap(),
    )
}

/// `f I + ∂₁f N₁⊗I + ∂₂f I⊗N₂ + ∂₁∂₂f N₁⊗N₂` at `(λ₁, λ₂) = (1, 0)`, with
/// the four derivative values supplied by hand.
fn four_term(d: [f64; 4]) -> ComplexMatrix {
    let n1 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    let n2 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
    let i = ComplexMatrix::identity(2);
    let terms = [
        (d[0], kron(&i, &i).unwrap()),
        (d[1], kron(&n1, &i).unwrap()),
        (d[2], kron(&i, &n2).unwrap()),
        (d[3], kron(&n1, &n2).unwrap()),
    ];
    terms
        .iter()
        .fold(ComplexMatrix::zeros(4, 4), |acc, (v, m)| &acc + &m.scale_real(*v))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let (x1, x2) = worked_pair();
    let sys = lift(&[x1, x2], &DecomposeOptions::default()).map_err(e)?;
    let ee = std::f64::consts::E;
    let one = c(1.0, 0.0);
    let cases: Vec<(&str, AnalyticFunction, [f64; 4])> = vec![
        ("z1*z2", AnalyticFunction::polynomial(2, [(vec![1, 1], one)]), [0.0, 0.0, 1.0, 1.0]),
        ("exp(z1+z2)", AnalyticFunction::exp_affine(vec![one, one], c(0.0, 0.0)), [ee; 4]),
        (
            "exp(z1)(1+z2)",
            AnalyticFunction::product(
                &AnalyticFunction::exp_affine(vec![one, c(0.0, 0.0)], c(0.0, 0.0)),
                &AnalyticFunction::polynomial(2, [(vec![0, 0], one), (vec![0, 1], one)]),
            ),
            [ee; 4],
        ),
        (
            "(1+z1)^2*z2",
            AnalyticFunction::polynomial(
                2,
                [(vec![0, 1], one), (vec![1, 1], c(2.0, 0.0)), (vec![2, 1], one)],
            ),
            [0.0, 0.0, 4.0, 4.0],
        ),
    ];
    let contours = [
        Contour::new(c(1.0, 0.0), 1.0, 64).map_err(e)?,
        Contour::new(c(0.0, 0.0), 1.0, 64).map_err(e)?,
    ];
    let mut worst: f64 = 0.0;
    for (name, f, d) in cases {
        let hand = four_term(d);
        let a = func_multivariate(&f, &sys).map_err(e)?.value;
        let b = dunford_multivariate(&f, &sys, &contours).map_err(e)?;
        let s = power_series_apply(&f, &sys, None, 24).map_err(e)?;
        let diff = [hand.dist(&a), hand.dist(&b), hand.dist(&s), a.dist(&b), a.dist(&s), b.dist(&s)]
            .into_iter()
            .fold(0.0, f64::max);
        ensure(diff <= 1e-9, || format!("{name}: pairwise discrepancy {diff:.3e}"))?;
        worst = worst.max(diff);
    }
    within(t, Duration::from_secs(1))?;
    Ok(format!("max pairwise discrepancy {worst:.2e}, {:?}", t.elapsed()))
}

// ---------------------------------------------------------------- 2

const GRID: [(f64, f64); 9] = [
    (-1.5, -1.0),
    (-1.5, 1.0),
    (-0.5, 0.0),
    (0.5, -1.0),
    (0.5, 1.0),
    (1.5, 0.0),
    (-1.5, 0.0),
    (0.5, 0.0),
    (1.5, 1.0),
];

fn random_factor(rng: &mut ChaCha8Rng) -> (ComplexMatrix, Vec<C64>) {
    let dim = rng.random_range(1..=6);
    let mut left = dim;
    let mut used: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();
    while left > 0 {
        let size = rng.random_range(1..=left.min(4));
        let k = loop {
            let k = rng.random_range(0..GRID.len());
            if !used.contains(&k) {
                break k;
            }
        };
        used.push(k);
        blocks.push((c(GRID[k].0, GRID[k].1), size));
        left -= size;
    }
    let cond = rng.random_range(1.0..10.0);
    let x = jordan_similar(&blocks, cond, rng.random());
    (x, blocks.iter().map(|b| b.0).collect())
}

fn affine(rng: &mut ChaCha8Rng, r: usize) -> (Vec<C64>, C64) {
    let coeffs = (0..r)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)))
        .collect();
    (coeffs, c(rng.random_range(-0.5..0.5), 0.0))
}

fn random_polynomial(rng: &mut ChaCha8Rng, r: usize) -> AnalyticFunction {
    let terms: Vec<(Vec<usize>, C64)> = (0..4)
        .map(|_| {
            let e: Vec<usize> = (0..r).map(|_| rng.random_range(0..=3)).collect();
            (e, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        })
        .collect();
    AnalyticFunction::polynomial(r, terms)
}

fn random_function(rng: &mut ChaCha8Rng, r: usize) -> AnalyticFunction {
    match rng.random_range(0..6) {
        0 => {
            let (a, d) = affine(rng, r);
            AnalyticFunction::exp_affine(a, d)
        }
        1 => {
            let (a, d) = affine(rng, r);
            AnalyticFunction::sin_affine(a, d)
        }
        2 => random_polynomial(rng, r),
        3 => {
            let mut e = vec![0; r];
            e[0] = 1;
            let den = Polynomial::new(r, vec![(vec![0; r], c(12.0, 0.0)), (e, c(-1.0, 0.0))]);
            let num = Polynomial::new(r, vec![(vec![0; r], c(1.0, 0.0))]);
            AnalyticFunction::ratio(num, den)
        }
        4 => {
            let (a, d) = affine(rng, r);
            AnalyticFunction::product(&AnalyticFunction::exp_affine(a, d), &random_polynomial(rng, r))
        }
        _ => {
            let (a, d) = affine(rng, r);
            let (b, e) = affine(rng, r);
            AnalyticFunction::sum(&AnalyticFunction::sin_affine(a, d), &AnalyticFunction::cos_affine(b, e))
        }
    }
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let opts = DecomposeOptions::default().with_cluster_tol(1e-2);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let r = rng.random_range(1..=2);
        let (factors, eigs): (Vec<_>, Vec<_>) = (0..r).map(|_| random_factor(&mut rng)).unzip();
        let f = random_function(&mut rng, r);
        let decs = factors
            .iter()
            .map(|x| decompose_with(x, &opts))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|err| format!("case {case}: {err}"))?;
        let sys = lift_with_decompositions(&factors, decs, DEFAULT_TENSOR_CAP).map_err(e)?;
        let contours = eigs
            .iter()
            .map(|ev| {
                let center = ev.iter().sum::<C64>() / ev.len() as f64;
                let spread = ev.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
                Contour::new(center, spread + 1.5, 128)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(e)?;
        let a = func_multivariate(&f, &sys).map_err(e)?.value;
        let b = dunford_multivariate(&f, &sys, &contours).map_err(|err| format!("case {case} {f}: {err}"))?;
        let (s, _) = power_series_apply_auto(&f, &sys, None, 160).map_err(|err| format!("case {case} {f}: {err}"))?;
        let d = [a.dist(&b), a.dist(&s), b.dist(&s)].into_iter().fold(0.0, f64::max) / (1.0 + op_norm(&a));
        ensure(d <= 1e-8, || format!("case {case} ({f}): {d:.3e}"))?;
        worst = worst.max(d);
    }
    within(t, Duration::from_secs(30))?;
    Ok(format!("50 systems, max relative discrepancy {worst:.2e}, {:?}", t.elapsed()))
}

// ---------------------------------------------------------------- 3

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = gaussian(rng, n);
    &g + &g.adjoint()
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xdec0);
    let mut counts = [0usize; 4];
    let mut worst_herm: f64 = 0.0;
    for case in 0..200 {
        let kind = case % 4;
        let n = rng.random_range(1..=8);
        let (x, opts) = match kind {
            0 => {
                // repeated eigenvalues allowed: semisimple clusters
                let d: Vec<C64> = (0..n).map(|_| c(rng.random_range(-3..=3) as f64, 0.0)).collect();
                (ComplexMatrix::from_diagonal(&d), DecomposeOptions::default())
            }
            1 => (hermitian(&mut rng, n), DecomposeOptions::default()),
            2 => {
                let (x, _) = random_factor(&mut rng);
                (x, DecomposeOptions::default().with_cluster_tol(1e-2))
            }
            _ => (gaussian(&mut rng, n), DecomposeOptions::default()),
        };
        let dec = match decompose_with(&x, &opts) {
            Ok(d) => d,
            Err(err) => return Err(format!("case {case} (kind {kind}): {err}")),
        };
        let diag = verify_decomposition(&dec, &x);
        ensure(diag.pass(), || format!("case {case} (kind {kind}): {:?}", diag.failures))?;
        if kind == 1 {
            let xn = op_norm(&x);
            for comp in &dec.components {
                let rel = op_norm(&comp.nilpotent) / xn;
                ensure(comp.nilpotency_index == 1 && rel <= 1e-10, || {
                    format!("case {case}: Hermitian component with ν = {} and ‖N‖/‖X‖ = {rel:.3e}", comp.nilpotency_index)
                })?;
                worst_herm = worst_herm.max(rel);
            }
        }
        counts[kind] += 1;
    }
    within(t, Duration::from_secs(30))?;
    Ok(format!(
        "{} diagonal, {} Hermitian, {} Jordan-similar, {} random; Hermitian max ‖N‖/‖X‖ {worst_herm:.2e}, {:?}",
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        t.elapsed()
    ))
}

// ---------------------------------------------------------------- 4

/// `f(H₁ ⊗ I, I ⊗ H₂) = (V₁⊗V₂)·diag f(λ_i, μ_j)·(V₁⊗V₂)†` from the unitary
/// eigenvectors of each Hermitian factor.
fn direct_hermitian(f: &AnalyticFunction, h1: &ComplexMatrix, h2: &ComplexMatrix) -> Result<ComplexMatrix, String> {
    let (a, b) = (eig(h1).map_err(e)?, eig(h2).map_err(e)?);
    let v = kron(&a.right_eigenvectors, &b.right_eigenvectors).map_err(e)?;
    let mut d = Vec::new();
    for &l in &a.eigenvalues {
        for &m in &b.eigenvalues {
            d.push(f.eval(&[c(l.re, 0.0), c(m.re, 0.0)]).map_err(e)?);
        }
    }
    Ok(&(&v * &ComplexMatrix::from_diagonal(&d)) * &v.adjoint())
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a);
    let mut worst_split: f64 = 0.0;
    let mut worst_direct: f64 = 0.0;
    for case in 0..20 {
        let (n1, n2) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let (h1, h2) = (hermitian(&mut rng, n1), hermitian(&mut rng, n2));
        let f = random_function(&mut rng, 2);
        let sys = lift(&[h1.clone(), h2.clone()], &DecomposeOptions::default()).map_err(e)?;
        let res = func_multivariate(&f, &sys).map_err(e)?;
        let scale = op_norm(&res.value);
        let split = op_norm(&res.split.s_mixed).max(op_norm(&res.split.s_full));
        ensure(split <= 1e-10 * scale, || format!("case {case} ({f}): split residue {split:.3e}"))?;
        let direct = direct_hermitian(&f, &h1, &h2)?;
        let d = direct.dist(&res.value) / scale.max(1.0);
        ensure(d <= 1e-10, || format!("case {case} ({f}): direct eigendecomposition differs by {d:.3e}"))?;
        worst_split = worst_split.max(split / scale.max(f64::MIN_POSITIVE));
        worst_direct = worst_direct.max(d);
    }
    Ok(format!(
        "20 Hermitian pairs, max split residue {worst_split:.2e}, max direct discrepancy {worst_direct:.2e}, {:?}",
        t.elapsed()
    ))
}

// ---------------------------------------------------------------- 5

fn exp_neg(arity: usize) -> AnalyticFunction {
    AnalyticFunction::exp_affine(vec![c(-1.0, 0.0); arity], c(0.0, 0.0))
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let m = build_model(ModelKind::Harmonic, 64, 2).map_err(e)?;
    let mut eigs: Vec<f64> = eigenvalues(&m.matrix_ref).map_err(e)?.iter().map(|z| z.re).collect();
    eigs.sort_by(f64::total_cmp);
    let dev = eigs
        .iter()
        .enumerate()
        .map(|(n, &l)| (l - (2 * n + 1) as f64).abs())
        .fold(0.0, f64::max);
    ensure(dev <= 1e-12, || format!("eigenvalues deviate from 2n+1 by {dev:.3e}"))?;
    let contour = Contour::circle(c(3.0, 0.0), 2.5).map_err(e)?;
    let mut setup = LevelSetup::new(c(-1.0, 0.0), contour, vec![1, 2, 3, 4, 6, 8, 16, 32]);
    setup.probes = default_probes(4, 64);
    let rep = pnfc_core::approx::level_experiment(&m, &exp_neg(1), &setup).map_err(e)?;
    let worst = rep
        .rows
        .iter()
        .filter(|r| r.n >= 3)
        .flat_map(|r| r.probe_errors.iter().copied())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-14, || format!("probe error {worst:.3e} at n >= 3"))?;
    Ok(format!(
        "max |λ − (2n+1)| {dev:.1e}; max probe error for n >= 3: {worst:.1e}, {:?}",
        t.elapsed()
    ))
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let m = build_model(ModelKind::JordanToy, 4, 0).map_err(e)?;
    let contour = Contour::circle(c(0.5, 0.5), 3.0).map_err(e)?;
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4];
    let rep = perturbation_experiment(&m, &exp_neg(1), c(-2.0, 0.0), &contour, &deltas, 7).map_err(e)?;
    let mut detail = Vec::new();
    for r in &rep.rows {
        let delta = r.delta.unwrap_or(f64::NAN);
        ensure(r.level2_ok, || {
            format!("δ = {delta:.0e}: error {:.3e} > C_f·ε = {:.3e}", r.func_error_norm, r.bound_rhs)
        })?;
        detail.push(format!("δ={delta:.0e}: {:.2e} <= {:.2e}", r.func_error_norm, r.bound_rhs));
    }
    within(t, Duration::from_secs(10))?;
    Ok(format!("C_f = {:.3}; {}; {:?}", rep.c_f(), detail.join(", "), t.elapsed()))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let h = build_model(ModelKind::Harmonic, 16, 2).map_err(e)?;
    let low3 = Contour::circle(c(3.0, 0.0), 2.5).map_err(e)?;
    let harmonic = FactorSetup {
        model: h.clone(),
        z0: c(-1.0, 0.0),
        contour: low3,
        truncate: true,
    };
    let n_list = [1, 2, 3, 4, 6, 8];
    let opts = DecomposeOptions::default();
    let pair = multivariate_experiment(&[harmonic.clone(), harmonic.clone()], &exp_neg(2), &n_list, &opts).map_err(e)?;
    for r in &pair.rows {
        ensure(r.level2_ok, || {
            format!("harmonic pair n = {}: {:.3e} > {:.3e}", r.n, r.func_error_norm, r.bound_rhs)
        })?;
    }

    let toy = FactorSetup {
        model: build_model(ModelKind::JordanToy, 4, 0).map_err(e)?,
        z0: c(-2.0, 0.0),
        contour: Contour::circle(c(0.5, 0.5), 3.0).map_err(e)?,
        truncate: false,
    };
    let g = AnalyticFunction::product(
        &AnalyticFunction::exp_affine(vec![c(-1.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0)),
        &AnalyticFunction::coordinate(2, 1),
    );
    let mixed = multivariate_experiment(&[harmonic, toy], &g, &n_list, &opts.with_cluster_tol(1e-3)).map_err(e)?;
    for r in &mixed.rows {
        ensure(r.level2_ok, || {
            format!("harmonic ⊗ jordan_toy n = {}: {:.3e} > {:.3e}", r.n, r.func_error_norm, r.bound_rhs)
        })?;
    }

    // exp(−X̃₁ − X̃₂) = e^{−X₁} ⊗ e^{−X₂} on every section, against the
    // closed-form diagonal exponential
    let mut worst: f64 = 0.0;
    for &n in &n_list {
        let x = h.matrix_ref.leading_block(n);
        let sys = lift(&[x.clone(), x.clone()], &opts).map_err(e)?;
        let v = func_multivariate(&exp_neg(2), &sys).map_err(e)?.value;
        let ex = ComplexMatrix::from_diagonal(&x.diagonal().iter().map(|d| (-d).exp()).collect::<Vec<_>>());
        worst = worst.max(v.dist(&kron(&ex, &ex).map_err(e)?));
    }
    ensure(worst <= 1e-9, || format!("factorization error {worst:.3e}"))?;
    within(t, Duration::from_secs(60))?;
    Ok(format!(
        "tensor dim 256 and 64; bound holds at n ∈ {n_list:?} (C_f {:.3e} and {:.3e}); factorization error {worst:.1e}, {:?}",
        pair.c_f(),
        mixed.c_f(),
        t.elapsed()
    ))
}

// ---------------------------------------------------------------- 8

fn lowest(kind: ModelKind, dim: usize) -> Result<C64, String> {
    let m = build_model(kind, dim, 2).map_err(e)?;
    Ok(eigenvalues(&m.matrix_ref)
        .map_err(e)?
        .into_iter()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("nonempty"))
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let m = build_model(ModelKind::ComplexHarmonic, 128, 2).map_err(e)?;
    let x = &m.matrix_ref;
    let comm = op_norm(&(&(x * &x.adjoint()) - &(&x.adjoint() * x)));
    let xn = op_norm(x);
    ensure(comm > 1e-6 * xn * xn, || format!("‖MM† − M†M‖ = {comm:.3e} not above 1e-6·‖M‖²"))?;
    let (a, b) = (lowest(ModelKind::ComplexHarmonic, 64)?, lowest(ModelKind::ComplexHarmonic, 128)?);
    let rel = (a - b).norm() / b.norm();
    ensure(rel <= 1e-3, || format!("lowest eigenvalue moved by {rel:.3e}"))?;
    let contour = Contour::circle(b, 0.8).map_err(e)?;
    let setup = LevelSetup::new(c(-1.0, 0.0), contour, vec![8, 12, 16, 24, 32, 48, 64]);
    let rep = level_experiment_audited(ModelKind::ComplexHarmonic, 128, 2, &exp_neg(1), &setup).map_err(e)?;
    ensure(rep.level1_pass, || {
        format!("probe errors {:?}", (0..4).map(|k| rep.probe_series(k)).collect::<Vec<_>>())
    })?;
    let stab = rep.reference_stability.unwrap_or(f64::INFINITY);
    ensure(stab <= 0.05, || format!("reference stability {stab:.3e}"))?;
    let last = rep.rows.last().expect("rows").probe_errors.iter().copied().fold(0.0, f64::max);
    Ok(format!(
        "non-normality {:.2e}·‖M‖²; λ₀ relative change {rel:.1e}; final probe error {last:.1e}; reference stability {stab:.1e}, {:?}",
        comm / (xn * xn),
        t.elapsed()
    ))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let x = build_model(ModelKind::ComplexHarmonic, 64, 2).map_err(e)?.matrix_ref;
    let k = build_model(ModelKind::Harmonic, 64, 2).map_err(e)?.matrix_ref;
    let rep = regularization_sweep(&x, &k, &[1e-1, 1e-2, 1e-3, 1e-4], c(-1.0, 0.0), &[]).map_err(e)?;
    ensure(rep.probes_decreasing, || format!("probe errors not strictly decreasing: {:?}", rep.rows))?;
    ensure(rep.bound_pass, || format!("bound violated: {:?}", rep.rows))?;
    within(t, Duration::from_secs(20))?;
    let first = rep.rows[0].probe_errors.iter().copied().fold(0.0, f64::max);
    let last = rep.rows[3].probe_errors.iter().copied().fold(0.0, f64::max);
    Ok(format!(
        "max probe error {first:.2e} → {last:.2e}; M = {:.3}; bound holds at every ε, {:?}",
        rep.sup_resolvent,
        t.elapsed()
    ))
}

// ---------------------------------------------------------------- 10

fn run_cli(dir: &Path, out: &str) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_pnfc"))
        .args(["converge", "--config", "run.toml", "--out", out, "--seed", "11"])
        .current_dir(dir)
        .output()
        .map_err(e)?;
    ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    std::fs::read_to_string(dir.join(out).join("manifest.csv")).map_err(e)
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let (x1, _) = worked_pair();
    std::fs::write(dir.path().join("x1.cmat"), write_cmat(&x1)).map_err(e)?;
    std::fs::write(
        dir.path().join("run.toml"),
        "[input]\nfunction = \"exp(-1*z1)\"\nlabel = \"exp_neg\"\n\
         [converge]\nmodel = \"jordan_toy\"\nref_dim = 4\nguard = 0\nz0 = [-2.0, 0.0]\n\
         deltas = [0.1, 0.01, 0.001, 0.0001]\ncontour = { center = [0.5, 0.5], radius = 3.0 }\n",
    )
    .map_err(e)?;
    let a = run_cli(dir.path(), "a")?;
    let b = run_cli(dir.path(), "b")?;
    ensure(a == b, || "manifests differ".into())?;
    ensure(a.lines().count() == 3, || format!("unexpected manifest:\n{a}"))?;
    Ok(format!("{} artifacts, identical manifests", a.lines().count() - 1))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("golden worked pair", criterion_1),
        ("oracle triangle", criterion_2),
        ("decomposition invariants", criterion_3),
        ("self-adjoint collapse", criterion_4),
        ("harmonic oscillator", criterion_5),
        ("Level-2 bound, perturbation family", criterion_6),
        ("multivariate additive bound", criterion_7),
        ("complex harmonic oscillator", criterion_8),
        ("regularization sweep", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
