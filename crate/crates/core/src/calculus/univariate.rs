use super::CalculusError;
use crate::funcspace::AnalyticFunction;
use crate::numerics::{eigenvalues, op_norm, resolvent, ComplexMatrix, C64};
use crate::spectra::{ordered_sum, Contour, Decomposition};

/// Relative node-doubling tolerance of [`dunford`].
pub const UNI_DOUBLING_TOL: f64 = 1e-10;

/// `f(X) = Σ_k Σ_{q<ν_k} f^{(q)}(λ_k)/q! · N_k^q P_k`.
///
/// A partial decomposition gives `f` restricted to the enclosed spectral
/// subspace, i.e. `f(X)·Σ_k P_k`.
pub fn func_univariate(f: &AnalyticFunction, dec: &Decomposition) -> Result<ComplexMatrix, CalculusError> {
    if f.arity() != 1 {
        return Err(CalculusError::ArityMismatch {
            function: f.arity(),
            system: 1,
        });
    }
    let n = dec.source_dim;
    let mut acc = ComplexMatrix::zeros(n, n).into_nalgebra();
    for c in &dec.components {
        let nu = c.nilpotency_index.max(1);
        let jet = f.taylor_table(&[c.lambda], &[nu - 1])?;
        let mut np = c.projector.clone();
        for (q, (_, coeff)) in jet.iter().enumerate() {
            if q > 0 {
                np = &c.nilpotent * &np;
            }
            acc += np.as_nalgebra() * coeff;
        }
    }
    Ok(ComplexMatrix::from_nalgebra(acc)?)
}

/// Trapezoidal Dunford integral `(1/2πi)∮ f(z)(zI − X)⁻¹ dz`; every
/// eigenvalue of `x` must lie inside the contour.
pub fn dunford(f: &AnalyticFunction, x: &ComplexMatrix, contour: &Contour) -> Result<ComplexMatrix, CalculusError> {
    let eigs = eigenvalues(x)?;
    if let Some(&e) = eigs.iter().find(|&&e| !contour.encloses(e)) {
        return Err(CalculusError::NotEnclosed {
            eigenvalue: e,
            center: contour.center(),
            radius: contour.radius(),
        });
    }
    dunford_checked(f, x, contour, &eigs)
}

/// Dunford integral over a contour that may leave part of the spectrum
/// outside; the result is `f(X)` times the Riesz projector of the inside.
pub fn dunford_restricted(
    f: &AnalyticFunction,
    x: &ComplexMatrix,
    contour: &Contour,
) -> Result<ComplexMatrix, CalculusError> {
    let eigs = eigenvalues(x)?;
    dunford_checked(f, x, contour, &eigs)
}

fn dunford_checked(
    f: &AnalyticFunction,
    x: &ComplexMatrix,
    contour: &Contour,
    eigs: &[C64],
) -> Result<ComplexMatrix, CalculusError> {
    if f.arity() != 1 {
        return Err(CalculusError::ArityMismatch {
            function: f.arity(),
            system: 1,
        });
    }
    let n = x.ensure_square()?;
    contour.check_clear(eigs)?;
    check_singularities(f, contour)?;
    let (fine, coarse, bound) = doubled(contour, n, n, |z, w| {
        let fz = f.eval(&[z])?;
        let r = resolvent(x, z)?;
        Ok((r.scale(w * fz), fz.norm() * r.frobenius_norm()))
    })?;
    check_doubling(&fine, &coarse, contour.radius() * bound, UNI_DOUBLING_TOL)?;
    Ok(fine)
}

pub(super) fn check_singularities(f: &AnalyticFunction, contour: &Contour) -> Result<(), CalculusError> {
    for s in f.singularities_univariate() {
        if (s - contour.center()).norm() <= contour.radius() {
            return Err(CalculusError::SingularityInside { point: s });
        }
    }
    Ok(())
}

/// Quadrature at `N` and `2N` nodes sharing the even nodes.
///
/// `term(z, w)` returns the weighted integrand and a magnitude estimate of
/// the unweighted one. Returns `(fine, coarse, max magnitude)`.
pub(super) fn doubled<F>(
    contour: &Contour,
    rows: usize,
    cols: usize,
    term: F,
) -> Result<(ComplexMatrix, ComplexMatrix, f64), CalculusError>
where
    F: Fn(C64, C64) -> Result<(ComplexMatrix, f64), CalculusError> + Sync,
{
    let fine = contour.with_nodes(2 * contour.nodes())?;
    let nodes = fine.quadrature();
    let even: Vec<(C64, C64)> = nodes.iter().step_by(2).copied().collect();
    let odd: Vec<(C64, C64)> = nodes.iter().skip(1).step_by(2).copied().collect();
    let mags = std::sync::Mutex::new(0.0f64);
    let run = |part: &[(C64, C64)]| {
        ordered_sum(part, rows, cols, |z, w| {
            let (t, mag) = term(z, w)?;
            let mut m = mags.lock().expect("magnitude lock");
            *m = m.max(mag);
            Ok::<_, CalculusError>(t)
        })
    };
    let s_even = run(&even)?;
    let s_odd = run(&odd)?;
    let coarse = s_even.scale_real(2.0);
    let fine = &s_even + &s_odd;
    let mag = mags.into_inner().expect("magnitude lock");
    Ok((fine, coarse, mag))
}

/// Accepts when `‖fine − coarse‖ ≤ tol·max(‖fine‖, 1e−6·estimate)`; the
/// estimate floor keeps results that cancel to ~0 from failing on round-off.
pub(super) fn check_doubling(
    fine: &ComplexMatrix,
    coarse: &ComplexMatrix,
    estimate: f64,
    tol: f64,
) -> Result<(), CalculusError> {
    let change = norm_est(&(fine - coarse));
    let bound = tol * norm_est(fine).max(1e-6 * estimate);
    if change > bound {
        return Err(CalculusError::QuadratureUnstable { change, bound });
    }
    Ok(())
}

/// Spectral norm for moderate sizes, Frobenius (an upper bound) beyond.
pub(super) fn norm_est(m: &ComplexMatrix) -> f64 {
    if m.rows() <= 256 {
        op_norm(m)
    } else {
        m.frobenius_norm()
    }
}

/// Circle about the eigenvalue centroid with radius `2·spread + 0.5`, so
/// the spectrum sits well inside and the trapezoid rule converges fast.
pub fn enclosing_contour(eigs: &[C64], nodes: usize) -> Result<Contour, CalculusError> {
    let center = eigs.iter().sum::<C64>() / eigs.len().max(1) as f64;
    let spread = eigs.iter().map(|e| (e - center).norm()).fold(0.0, f64::max);
    Ok(Contour::new(center, 2.0 * spread + 0.5, nodes)?)
}
