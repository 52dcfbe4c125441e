use super::models::{OperatorModel, TruncationPoint};
use super::ApproxError;
use crate::funcspace::AnalyticFunction;
use crate::numerics::{eigenvalues, op_norm, resolvent, ComplexMatrix, C64};
use crate::spectra::Contour;

/// Minimum distance from `z0` to the spectra involved in `ε_n`.
pub const Z0_MIN_DISTANCE: f64 = 1.0;

/// Spectrum of the zero-padded section: the block's eigenvalues plus 0.
pub fn padded_eigenvalues(point: &TruncationPoint) -> Result<Vec<C64>, ApproxError> {
    let mut eigs = eigenvalues(&point.x_n)?;
    if point.is_padded() {
        eigs.push(C64::new(0.0, 0.0));
    }
    Ok(eigs)
}

pub(super) fn check_z0(z0: C64, eigs: &[C64]) -> Result<(), ApproxError> {
    if let Some(d) = eigs
        .iter()
        .map(|e| (e - z0).norm())
        .min_by(f64::total_cmp)
    {
        if d < Z0_MIN_DISTANCE {
            return Err(ApproxError::Z0TooClose { z0, distance: d });
        }
    }
    Ok(())
}

/// `ε_n = ‖(X_n − X)(z_0 I − X)⁻¹‖`, stored into `point.eps_n`.
pub fn resolvent_error(
    model: &OperatorModel,
    point: &mut TruncationPoint,
    z0: C64,
) -> Result<f64, ApproxError> {
    check_z0(z0, &eigenvalues(&model.matrix_ref)?)?;
    check_z0(z0, &padded_eigenvalues(point)?)?;
    let r0 = resolvent(&model.matrix_ref, z0)?;
    let eps = op_norm(&(&(&point.x_n_padded - &model.matrix_ref) * &r0));
    point.eps_n = eps;
    Ok(eps)
}

/// Contour and the resolvent suprema over its nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventSups {
    pub contour: Contour,
    /// `sup_{z, n} ‖(z − X_n)⁻¹‖` over the padded sections.
    pub sup_rn: f64,
    /// `sup_z ‖(z − X)⁻¹‖`.
    pub sup_r: f64,
}

/// Resolvent suprema on the quadrature nodes. A zero-padded section has
/// `‖(z − X_n ⊕ 0)⁻¹‖ = max(‖(z − X_n)⁻¹‖, 1/|z|)`, so only the block is
/// inverted.
pub fn resolvent_sups(
    x: &ComplexMatrix,
    contour: &Contour,
    points: &[TruncationPoint],
) -> Result<ResolventSups, ApproxError> {
    contour.check_clear(&eigenvalues(x)?)?;
    for p in points {
        contour.check_clear(&padded_eigenvalues(p)?)?;
    }
    let nodes = contour.points();
    let mut sup_r: f64 = 0.0;
    for &z in &nodes {
        sup_r = sup_r.max(op_norm(&resolvent(x, z)?));
    }
    let mut sup_rn: f64 = 0.0;
    for p in points {
        for &z in &nodes {
            let mut v = op_norm(&resolvent(&p.x_n, z)?);
            if p.is_padded() {
                v = v.max(1.0 / z.norm());
            }
            sup_rn = sup_rn.max(v);
        }
    }
    Ok(ResolventSups {
        contour: contour.clone(),
        sup_rn,
        sup_r,
    })
}

/// Factors of the explicit Level-2 constant.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorConstant {
    pub c_f: f64,
    /// `∏_j L(Γ_j)`.
    pub length: f64,
    /// `max |f|` over the (product) quadrature grid.
    pub m_f: f64,
    pub sup_rn: Vec<f64>,
    pub sup_r: Vec<f64>,
}

/// `C_f = L(Γ)/(2π)·M_f·sup‖(z − X_n)⁻¹‖·sup‖(z − X)⁻¹‖`, with the
/// resolvent sup taken over every section in `points`.
pub fn error_constant(
    f: &AnalyticFunction,
    model: &OperatorModel,
    contour: &Contour,
    points: &[TruncationPoint],
) -> Result<ErrorConstant, ApproxError> {
    let sups = resolvent_sups(&model.matrix_ref, contour, points)?;
    error_constant_multi(f, &[sups])
}

/// `C_f = (2π)^{−r}·∏L(Γ_j)·M_f·∏ sup‖R_{j,n}‖·∏ sup‖R_j‖·r`. For `r = 1`
/// this is the single-operator constant without the trailing factor.
pub fn error_constant_multi(f: &AnalyticFunction, parts: &[ResolventSups]) -> Result<ErrorConstant, ApproxError> {
    let r = parts.len();
    if f.arity() != r {
        return Err(crate::calculus::CalculusError::ArityMismatch {
            function: f.arity(),
            system: r,
        }
        .into());
    }
    let grids: Vec<Vec<C64>> = parts.iter().map(|p| p.contour.points()).collect();
    let mut m_f: f64 = 0.0;
    let total: usize = grids.iter().map(Vec::len).product();
    let mut z = vec![C64::new(0.0, 0.0); r];
    for flat in 0..total {
        let mut k = flat;
        for j in (0..r).rev() {
            z[j] = grids[j][k % grids[j].len()];
            k /= grids[j].len();
        }
        m_f = m_f.max(f.eval(&z)?.norm());
    }
    let length: f64 = parts.iter().map(|p| p.contour.length()).product();
    let sup_rn: Vec<f64> = parts.iter().map(|p| p.sup_rn).collect();
    let sup_r: Vec<f64> = parts.iter().map(|p| p.sup_r).collect();
    let telescoping = if r == 1 { 1.0 } else { r as f64 };
    let c_f = length / (2.0 * std::f64::consts::PI).powi(r as i32)
        * m_f
        * sup_rn.iter().product::<f64>()
        * sup_r.iter().product::<f64>()
        * telescoping;
    Ok(ErrorConstant {
        c_f,
        length,
        m_f,
        sup_rn,
        sup_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{build_model, compress, ModelKind};

    #[test]
    fn harmonic_global_eps_saturates() {
        let model = build_model(ModelKind::Harmonic, 16, 2).unwrap();
        let z0 = C64::new(-1.0, 0.0);
        for n in [4, 8] {
            let mut p = compress(&model, n).unwrap();
            let eps = resolvent_error(&model, &mut p, z0).unwrap();
            // max_{k ≥ n} (2k+1)/(2k+2) is attained at k = ref_dim − 1
            assert!((eps - 31.0 / 32.0).abs() < 1e-12, "{eps}");
            assert_eq!(p.eps_n, eps);
        }
        let mut full = compress(&model, 16).unwrap();
        assert_eq!(resolvent_error(&model, &mut full, z0).unwrap(), 0.0);
        let mut p = compress(&model, 4).unwrap();
        assert!(matches!(
            resolvent_error(&model, &mut p, C64::new(0.5, 0.0)),
            Err(ApproxError::Z0TooClose { .. })
        ));
    }

    #[test]
    fn constant_for_unit_function() {
        let model = build_model(ModelKind::Harmonic, 16, 2).unwrap();
        let contour = Contour::circle(C64::new(3.0, 0.0), 2.5).unwrap();
        let points: Vec<_> = [4, 6, 8].iter().map(|&n| compress(&model, n).unwrap()).collect();
        let one = AnalyticFunction::constant(1, C64::new(1.0, 0.0));
        let c = error_constant(&one, &model, &contour, &points).unwrap();
        assert_eq!(c.m_f, 1.0);
        let expected = 2.5 * c.sup_rn[0] * c.sup_r[0];
        assert!((c.c_f - expected).abs() < 1e-12 * expected);
        // nearest eigenvalue to the circle sits 0.5 away
        assert!((c.sup_r[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn multivariate_constant_has_factor_r() {
        let model = build_model(ModelKind::Harmonic, 16, 2).unwrap();
        let contour = Contour::circle(C64::new(3.0, 0.0), 2.5).unwrap();
        let points = vec![compress(&model, 4).unwrap()];
        let sups = resolvent_sups(&model.matrix_ref, &contour, &points).unwrap();
        let one1 = AnalyticFunction::constant(1, C64::new(1.0, 0.0));
        let one2 = AnalyticFunction::constant(2, C64::new(1.0, 0.0));
        let c1 = error_constant_multi(&one1, &[sups.clone()]).unwrap().c_f;
        let c2 = error_constant_multi(&one2, &[sups.clone(), sups]).unwrap().c_f;
        assert!((c2 - 2.0 * c1 * c1).abs() < 1e-12 * c2);
    }
}
