use std::f64::consts::PI;

use rayon::prelude::*;

use super::SpectraError;
use crate::numerics::{ComplexMatrix, C64};

/// Minimum number of trapezoidal nodes on a circle.
pub const MIN_NODES: usize = 16;
pub const DEFAULT_NODES: usize = 128;
/// Eigenvalues closer than this fraction of the radius to the circle are rejected.
pub const CLEARANCE_FRACTION: f64 = 0.05;

/// Positively oriented circle discretized by the periodic trapezoidal rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    center: C64,
    radius: f64,
    nodes: usize,
}

impl Contour {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self, SpectraError> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() || nodes < MIN_NODES {
            return Err(SpectraError::InvalidContour {
                center,
                radius,
                nodes,
            });
        }
        Ok(Self {
            center,
            radius,
            nodes,
        })
    }

    /// Circle with the default node count.
    pub fn circle(center: C64, radius: f64) -> Result<Self, SpectraError> {
        Self::new(center, radius, DEFAULT_NODES)
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn with_nodes(&self, nodes: usize) -> Result<Self, SpectraError> {
        Self::new(self.center, self.radius, nodes)
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.nodes)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / self.nodes as f64;
                self.center + C64::from_polar(self.radius, theta)
            })
            .collect()
    }

    /// Nodes with weights such that `Σ w·g(z) ≈ (1/2πi)∮ g(z) dz`.
    ///
    /// On the circle `dz = i(z − c)dθ`, so each weight is `(z_k − c)/N`.
    pub fn quadrature(&self) -> Vec<(C64, C64)> {
        let n = self.nodes as f64;
        self.points()
            .into_iter()
            .map(|z| (z, (z - self.center) / n))
            .collect()
    }

    pub fn encloses(&self, z: C64) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Distance from `z` to the circle.
    pub fn clearance(&self, z: C64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }

    /// Rejects any point within `0.05·radius` of the circle.
    pub fn check_clear(&self, points: &[C64]) -> Result<(), SpectraError> {
        let limit = CLEARANCE_FRACTION * self.radius;
        match points
            .iter()
            .map(|&z| (z, self.clearance(z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        {
            Some((z, d)) if d < limit => Err(SpectraError::ContourTooClose {
                eigenvalue: z,
                center: self.center,
                radius: self.radius,
                distance: d,
            }),
            _ => Ok(()),
        }
    }
}

/// Node chunk size for parallel quadrature. Fixed so the reduction order
/// (and hence every bit of the result) does not depend on the thread count.
const CHUNK: usize = 8;

/// `Σ_k term(z_k, w_k)` evaluated in parallel, reduced in node order.
pub(crate) fn ordered_sum<E, F>(
    nodes: &[(C64, C64)],
    rows: usize,
    cols: usize,
    term: F,
) -> Result<ComplexMatrix, E>
where
    E: Send,
    F: Fn(C64, C64) -> Result<ComplexMatrix, E> + Sync,
{
    let partials: Vec<Result<ComplexMatrix, E>> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = ComplexMatrix::zeros(rows, cols).into_nalgebra();
            for &(z, w) in chunk {
                let t = term(z, w)?;
                acc += t.as_nalgebra();
            }
            Ok(ComplexMatrix::from_nalgebra_unchecked(acc))
        })
        .collect();
    let mut total = ComplexMatrix::zeros(rows, cols).into_nalgebra();
    for p in partials {
        total += p?.as_nalgebra();
    }
    Ok(ComplexMatrix::from_nalgebra_unchecked(total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        let c0 = C64::new(0.0, 0.0);
        assert!(Contour::new(c0, 1.0, 15).is_err());
        assert!(Contour::new(c0, 0.0, 64).is_err());
        assert!(Contour::new(c0, f64::NAN, 64).is_err());
        assert!(Contour::new(c0, 1.0, 16).is_ok());
    }

    #[test]
    fn weights_integrate_cauchy_kernel() {
        // (1/2πi)∮ dz/(z − a) = 1 inside, 0 outside
        let c = Contour::circle(C64::new(1.0, -1.0), 0.7).unwrap();
        for (a, expected) in [(C64::new(1.2, -0.9), 1.0), (C64::new(2.5, 0.0), 0.0)] {
            let s: C64 = c.quadrature().iter().map(|&(z, w)| w / (z - a)).sum();
            assert!((s - expected).norm() < 1e-14, "{s}");
        }
        assert!((c.length() - 1.4 * PI).abs() < 1e-15);
    }

    #[test]
    fn clearance_check() {
        let c = Contour::circle(C64::new(0.0, 0.0), 1.0).unwrap();
        assert!(c.check_clear(&[C64::new(0.5, 0.0), C64::new(2.0, 0.0)]).is_ok());
        assert!(matches!(
            c.check_clear(&[C64::new(0.0, 0.97)]),
            Err(SpectraError::ContourTooClose { .. })
        ));
    }
}
