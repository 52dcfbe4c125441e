use proptest::prelude::*;

use pnfc_core::approx::jordan_similar;
use pnfc_core::calculus::{func_multivariate, func_univariate, lift, LiftedSystem};
use pnfc_core::funcspace::{AnalyticFunction, DerivativeStrategy, MultiIndex};
use pnfc_core::numerics::{op_norm, ComplexMatrix, C64};
use pnfc_core::spectra::{decompose_with, verify_decomposition, DecomposeOptions};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn opts() -> DecomposeOptions {
    DecomposeOptions::default().with_cluster_tol(1e-2)
}

/// Two Jordan-similar factors with well separated eigenvalues.
fn system(seed: u64, nu1: usize, nu2: usize) -> LiftedSystem {
    let x1 = jordan_similar(&[(c(1.0, 0.0), nu1), (c(-1.0, 0.5), 1)], 4.0, seed);
    let x2 = jordan_similar(&[(c(0.0, 1.0), nu2), (c(0.5, -1.0), 2)], 3.0, seed ^ 0x5a5a);
    lift(&[x1, x2], &opts()).unwrap()
}

fn exp_affine(a: f64, b: f64) -> AnalyticFunction {
    AnalyticFunction::exp_affine(vec![c(a, 0.0), c(b, 0.0)], c(0.0, 0.0))
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.dist(b) <= tol * (1.0 + op_norm(a).max(op_norm(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_in_the_function(seed in any::<u64>(), a in -1.0..1.0f64, b in -1.0..1.0f64, s in -2.0..2.0f64) {
        let sys = system(seed, 2, 3);
        let f = exp_affine(a, b);
        let g = AnalyticFunction::sin_affine(vec![c(b, 0.0), c(a, 0.0)], c(0.1, 0.0));
        let h = AnalyticFunction::sum(&f.scaled(c(s, 0.0)), &g);
        let lhs = func_multivariate(&h, &sys).unwrap().value;
        let rhs = &func_multivariate(&f, &sys).unwrap().value.scale(c(s, 0.0))
            + &func_multivariate(&g, &sys).unwrap().value;
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn multiplicative(seed in any::<u64>(), a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let sys = system(seed, 3, 2);
        let f = exp_affine(a, b);
        let g = AnalyticFunction::polynomial(2, [(vec![1, 0], c(1.0, 0.0)), (vec![1, 2], c(0.0, 2.0))]);
        let fg = func_multivariate(&AnalyticFunction::product(&f, &g), &sys).unwrap().value;
        let prod = &func_multivariate(&f, &sys).unwrap().value * &func_multivariate(&g, &sys).unwrap().value;
        prop_assert!(close(&fg, &prod, 1e-10));
    }

    #[test]
    fn coordinates_and_constants(seed in any::<u64>(), k in 0usize..2, re in -3.0..3.0f64) {
        let sys = system(seed, 2, 2);
        let zk = func_multivariate(&AnalyticFunction::coordinate(2, k), &sys).unwrap().value;
        prop_assert!(close(&zk, &sys.lifted[k], 1e-10));
        let one = func_multivariate(&AnalyticFunction::constant(2, c(re, 1.0)), &sys).unwrap().value;
        prop_assert!(close(&one, &ComplexMatrix::identity(sys.dim()).scale(c(re, 1.0)), 1e-10));
    }

    #[test]
    fn split_sums_to_value(seed in any::<u64>(), a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let sys = system(seed, 2, 3);
        let res = func_multivariate(&exp_affine(a, b), &sys).unwrap();
        let total = &(&res.split.s0 + &res.split.s_mixed) + &res.split.s_full;
        prop_assert!(close(&total, &res.value, 1e-12));
    }

    #[test]
    fn cauchy_matches_closed_form(x in -1.0..1.0f64, y in -1.0..1.0f64, i in 0usize..3, j in 0usize..3) {
        let f = AnalyticFunction::product(
            &exp_affine(0.7, -0.4),
            &AnalyticFunction::cos_affine(vec![c(0.3, 0.0), c(1.0, 0.0)], c(0.2, 0.0)),
        );
        let g = f.clone().with_strategy(DerivativeStrategy::CauchyContour);
        let p = [c(x, 0.3), c(y, -0.2)];
        let alpha = MultiIndex::new(vec![i, j]);
        let exact = f.mixed_partial(&p, &alpha).unwrap();
        let quad = g.mixed_partial(&p, &alpha).unwrap();
        prop_assert!((exact - quad).norm() <= 1e-8 * (1.0 + exact.norm()), "{exact} vs {quad}");
    }

    #[test]
    fn leibniz_rule(x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let f = AnalyticFunction::sin_affine(vec![c(1.0, 0.0), c(0.5, 0.0)], c(0.0, 0.0));
        let g = AnalyticFunction::polynomial(2, [(vec![2, 1], c(1.0, 0.0)), (vec![0, 3], c(-1.0, 0.5))]);
        let p = [c(x, 0.0), c(y, 0.1)];
        let bounds = [3, 3];
        let fg = AnalyticFunction::product(&f, &g).taylor_table(&p, &bounds).unwrap();
        let tf = f.taylor_table(&p, &bounds).unwrap();
        let tg = g.taylor_table(&p, &bounds).unwrap();
        for (gamma, coeff) in fg.iter() {
            let mut conv = c(0.0, 0.0);
            for beta in MultiIndex::box_iter(gamma.orders()) {
                let rest = MultiIndex::new(gamma.orders().iter().zip(beta.orders()).map(|(g, b)| g - b).collect());
                conv += tf.coeff(&beta) * tg.coeff(&rest);
            }
            prop_assert!((coeff - conv).norm() <= 1e-12 * (1.0 + conv.norm()));
        }
    }

    #[test]
    fn derivatives_beyond_nilpotency_do_not_contribute(lambda in -2.0..2.0f64, m in 1usize..5, k in 0usize..3) {
        // f and f + (z − λ)^m·g agree on J_m(λ)
        let l = c(lambda, 0.5);
        let x = ComplexMatrix::jordan_block(m, l);
        let dec = decompose_with(&x, &DecomposeOptions::default()).unwrap();
        prop_assert_eq!(dec.components[0].nilpotency_index, m);
        let f = AnalyticFunction::exp_affine(vec![c(0.5, 0.0)], c(0.0, 0.0));
        let mut shift = AnalyticFunction::polynomial(1, [(vec![1], c(1.0, 0.0)), (vec![0], -l)]);
        for _ in 1..m {
            shift = AnalyticFunction::product(&shift, &AnalyticFunction::polynomial(1, [(vec![1], c(1.0, 0.0)), (vec![0], -l)]));
        }
        let bump = AnalyticFunction::product(&shift, &AnalyticFunction::cos_affine(vec![c(k as f64, 0.0)], c(0.0, 0.0)));
        let a = func_univariate(&f, &dec).unwrap();
        let b = func_univariate(&AnalyticFunction::sum(&f, &bump), &dec).unwrap();
        prop_assert!(close(&a, &b, 1e-12));
        // f(J_m(λ)) has f^{(q)}(λ)/q! on the q-th superdiagonal
        for q in 0..m {
            let expected = f.mixed_partial(&[l], &MultiIndex::new(vec![q])).unwrap() / (1..=q).product::<usize>() as f64;
            prop_assert!((a.get(0, q) - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn decompositions_satisfy_invariants(seed in any::<u64>(), m in 1usize..5) {
        let x = jordan_similar(&[(c(2.0, 0.0), m), (c(-1.0, 1.0), 2), (c(0.0, -1.0), 1)], 6.0, seed);
        let dec = decompose_with(&x, &opts()).unwrap();
        let d = verify_decomposition(&dec, &x);
        prop_assert!(d.pass(), "{:?}", d.failures);
        let nus: Vec<usize> = dec.components.iter().map(|c| c.nilpotency_index).collect();
        prop_assert!(nus.contains(&m));
        prop_assert_eq!(d.multiplicity_sum, m + 3);
    }
}

#[test]
fn hermitian_factors_collapse_to_s0() {
    let h1 = ComplexMatrix::from_rows(&[
        vec![c(2.0, 0.0), c(0.5, 0.5), c(0.0, 0.0)],
        vec![c(0.5, -0.5), c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
    ])
    .unwrap();
    let h2 = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, -1.0]]).unwrap();
    let sys = lift(&[h1.clone(), h2.clone()], &DecomposeOptions::default()).unwrap();
    let f = AnalyticFunction::product(
        &exp_affine(-0.5, 1.0),
        &AnalyticFunction::polynomial(2, [(vec![1, 1], c(1.0, 0.0)), (vec![0, 0], c(2.0, 0.0))]),
    );
    let res = func_multivariate(&f, &sys).unwrap();
    let scale = op_norm(&res.value);
    assert!(op_norm(&res.split.s_mixed) <= 1e-10 * scale);
    assert!(op_norm(&res.split.s_full) <= 1e-10 * scale);
    for dec in &sys.decompositions {
        assert!(dec.components.iter().all(|c| c.nilpotency_index == 1));
    }
}
