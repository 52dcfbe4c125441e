use nalgebra::{DMatrix, Schur};

use super::matrix::{op_norm, ComplexMatrix, C64};
use super::NumericsError;

/// Eigenvalues and right eigenvectors of a square matrix.
///
/// Eigenvectors are unit-norm columns of `right_eigenvectors`; no
/// orthogonality is implied. `backward_error` is
/// `max_k ‖X v_k − λ_k v_k‖ / (‖X‖·‖v_k‖)`.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub eigenvalues: Vec<C64>,
    pub right_eigenvectors: ComplexMatrix,
    pub backward_error: f64,
}

/// Dense nonsymmetric eigensolver: complex Schur form followed by
/// triangular back-substitution for the eigenvectors.
pub fn eig(x: &ComplexMatrix) -> Result<EigenResult, NumericsError> {
    let n = x.ensure_square()?;
    let xnorm = op_norm(x);
    if n == 1 {
        return Ok(EigenResult {
            eigenvalues: vec![x.get(0, 0)],
            right_eigenvectors: ComplexMatrix::identity(1),
            backward_error: 0.0,
        });
    }
    let schur = Schur::try_new(x.as_nalgebra().clone(), f64::EPSILON, 1000 * n)
        .ok_or(NumericsError::EigenFailure { dim: n })?;
    let (q, t) = schur.unpack();
    if t.iter().any(|z| !z.is_finite()) {
        return Err(NumericsError::EigenFailure { dim: n });
    }
    let eigenvalues: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
        // rescale the column so repeated tiny pivots cannot overflow later ones
        let m = y.column(k).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 1e100 {
            let inv = 1.0 / m;
            for i in 0..=k {
                y[(i, k)] *= inv;
            }
        }
    }
    let mut v = &q * &y;
    for mut col in v.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::new(nrm, 0.0);
        }
    }
    let xm = x.as_nalgebra();
    let mut backward_error: f64 = 0.0;
    for k in 0..n {
        let vk = v.column(k);
        let r = xm * vk - vk * eigenvalues[k];
        let denom = xnorm * vk.norm();
        if denom > 0.0 {
            backward_error = backward_error.max(r.norm() / denom);
        }
    }
    Ok(EigenResult {
        eigenvalues,
        right_eigenvectors: ComplexMatrix::from_nalgebra(v)?,
        backward_error,
    })
}

/// Eigenvalues only.
pub fn eigenvalues(x: &ComplexMatrix) -> Result<Vec<C64>, NumericsError> {
    let n = x.ensure_square()?;
    if n == 1 {
        return Ok(vec![x.get(0, 0)]);
    }
    let schur = Schur::try_new(x.as_nalgebra().clone(), f64::EPSILON, 1000 * n)
        .ok_or(NumericsError::EigenFailure { dim: n })?;
    let t = schur.unpack().1;
    let vals: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    if vals.iter().any(|z| !z.is_finite()) {
        return Err(NumericsError::EigenFailure { dim: n });
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_eigenvalues() {
        let d = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0), c(5.0, 0.0)]);
        let res = eig(&d).unwrap();
        let vals = sorted(res.eigenvalues);
        for (v, e) in vals.iter().zip([1.0, 3.0, 5.0]) {
            assert!((v - c(e, 0.0)).norm() < 1e-13);
        }
        assert!(res.backward_error < 1e-14);
    }

    #[test]
    fn jordan_block_eigenvalues() {
        let j = ComplexMatrix::jordan_block(3, c(2.0, 0.0));
        for v in eigenvalues(&j).unwrap() {
            assert!((v - c(2.0, 0.0)).norm() < 1e-12);
        }
        // X1 = I + N1 from the two-by-two worked example
        let x1 = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        for v in eig(&x1).unwrap().eigenvalues {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn nonnormal_backward_error() {
        let x = ComplexMatrix::from_fn(7, 7, |i, j| {
            c(((3 * i + 5 * j) % 7) as f64 - 3.0, ((i * j) % 5) as f64 * 0.25)
        });
        let res = eig(&x).unwrap();
        assert_eq!(res.eigenvalues.len(), 7);
        assert!(res.backward_error < 1e-10, "{}", res.backward_error);
        let tr: C64 = res.eigenvalues.iter().sum();
        assert!((tr - x.trace()).norm() < 1e-10);
    }
}
