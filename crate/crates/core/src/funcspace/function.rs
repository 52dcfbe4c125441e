use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use super::expr::{Affine, Expr, Jet, Polynomial};
use super::multi_index::MultiIndex;
use super::FuncError;
use crate::numerics::C64;

/// How mixed partial derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeStrategy {
    /// Exact derivative chains of the builtin primitives.
    ClosedForm,
    /// Iterated Cauchy integrals over per-variable circles.
    CauchyContour,
    /// Exact coefficient table of a polynomial.
    PolynomialTable,
}

/// Product of closed disks, one per variable. Infinite radii mean "entire".
#[derive(Clone, Debug, PartialEq)]
pub struct Polydisk {
    pub center: Vec<C64>,
    pub radii: Vec<f64>,
}

impl Polydisk {
    pub fn whole_space(arity: usize) -> Self {
        Self {
            center: vec![C64::new(0.0, 0.0); arity],
            radii: vec![f64::INFINITY; arity],
        }
    }

    pub fn contains(&self, point: &[C64]) -> bool {
        point
            .iter()
            .zip(self.center.iter().zip(&self.radii))
            .all(|(z, (c, r))| (z - c).norm() <= *r)
    }
}

pub const CAUCHY_NODES: usize = 128;
pub const CAUCHY_RADIUS_FRACTION: f64 = 0.3;
pub const CAUCHY_DOUBLING_TOL: f64 = 1e-8;

/// Analytic scalar function of `arity` complex variables.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticFunction {
    arity: usize,
    expr: Expr,
    strategy: DerivativeStrategy,
    max_order_hint: usize,
    domain: Polydisk,
}

impl AnalyticFunction {
    /// Wraps an expression; arity is the highest variable used.
    pub fn new(expr: Expr) -> Self {
        let arity = expr.arity().max(1);
        let strategy = match expr {
            Expr::Poly(_) => DerivativeStrategy::PolynomialTable,
            _ => DerivativeStrategy::ClosedForm,
        };
        Self {
            arity,
            expr,
            strategy,
            max_order_hint: 0,
            domain: Polydisk::whole_space(arity),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FuncError> {
        Ok(Self::new(super::parse::parse_expr(text)?))
    }

    /// Declares more variables than the expression mentions.
    pub fn with_arity(mut self, arity: usize) -> Result<Self, FuncError> {
        if arity < self.expr.arity() {
            return Err(FuncError::Arity {
                expected: arity,
                got: self.expr.arity(),
            });
        }
        self.arity = arity;
        self.domain = Polydisk::whole_space(arity);
        Ok(self)
    }

    pub fn with_strategy(mut self, strategy: DerivativeStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_domain(mut self, domain: Polydisk) -> Result<Self, FuncError> {
        if domain.center.len() != self.arity || domain.radii.len() != self.arity {
            return Err(FuncError::Arity {
                expected: self.arity,
                got: domain.center.len(),
            });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_max_order_hint(mut self, hint: usize) -> Self {
        self.max_order_hint = hint;
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn strategy(&self) -> DerivativeStrategy {
        self.strategy
    }

    pub fn max_order_hint(&self) -> usize {
        self.max_order_hint
    }

    pub fn domain(&self) -> &Polydisk {
        &self.domain
    }

    fn check_point(&self, point: &[C64]) -> Result<(), FuncError> {
        if point.len() != self.arity {
            return Err(FuncError::Arity {
                expected: self.arity,
                got: point.len(),
            });
        }
        if !self.domain.contains(point) {
            return Err(FuncError::Domain {
                point: point.to_vec(),
                reason: "outside the declared polydisk".into(),
            });
        }
        Ok(())
    }

    /// Value at `point`; fails outside the domain or at a singularity.
    pub fn eval(&self, point: &[C64]) -> Result<C64, FuncError> {
        self.check_point(point)?;
        let v = self.expr.eval(point);
        if !v.is_finite() {
            return Err(FuncError::Domain {
                point: point.to_vec(),
                reason: "function is singular here".into(),
            });
        }
        for d in self.expr.denominators() {
            if d.eval(point).norm() == 0.0 {
                return Err(FuncError::Domain {
                    point: point.to_vec(),
                    reason: "denominator vanishes".into(),
                });
            }
        }
        Ok(v)
    }

    /// Taylor table `∂^α f(point)/α!` for every `α ≤ bounds`, exact for the
    /// closed-form and polynomial strategies.
    pub fn taylor_table(&self, point: &[C64], bounds: &[usize]) -> Result<Jet, FuncError> {
        self.eval(point)?;
        if bounds.len() != self.arity {
            return Err(FuncError::Arity {
                expected: self.arity,
                got: bounds.len(),
            });
        }
        Ok(self.expr.jet(point, bounds))
    }

    /// `∂^α f(point)`.
    pub fn mixed_partial(&self, point: &[C64], alpha: &MultiIndex) -> Result<C64, FuncError> {
        self.eval(point)?;
        if alpha.arity() != self.arity {
            return Err(FuncError::Arity {
                expected: self.arity,
                got: alpha.arity(),
            });
        }
        match self.strategy {
            DerivativeStrategy::ClosedForm | DerivativeStrategy::PolynomialTable => {
                let jet = self.expr.jet(point, alpha.orders());
                Ok(jet.coeff(alpha) * alpha.factorial())
            }
            DerivativeStrategy::CauchyContour => {
                let coarse = self.cauchy_partial(point, alpha, CAUCHY_NODES)?;
                let fine = self.cauchy_partial(point, alpha, 2 * CAUCHY_NODES)?;
                let scale = fine.value.norm().max(1e-6 * fine.bound);
                let change = (fine.value - coarse.value).norm();
                if change > CAUCHY_DOUBLING_TOL * scale {
                    return Err(FuncError::QuadratureNotConverged {
                        change,
                        scale,
                    });
                }
                Ok(fine.value)
            }
        }
    }

    /// Per-variable Cauchy radius: `0.3 ×` distance to the nearest
    /// singularity in that variable, or `0.3` for entire directions.
    pub fn cauchy_radius(&self, point: &[C64], j: usize) -> f64 {
        CAUCHY_RADIUS_FRACTION * self.expr.singular_distance(point, j).unwrap_or(1.0)
    }

    fn cauchy_partial(
        &self,
        point: &[C64],
        alpha: &MultiIndex,
        nodes: usize,
    ) -> Result<CauchyEstimate, FuncError> {
        // variables with α_j = 0 are evaluated in place (mean value property)
        let active: Vec<usize> = alpha.support();
        let radii: Vec<f64> = active.iter().map(|&j| self.cauchy_radius(point, j)).collect();
        let total = nodes.pow(active.len() as u32);
        let mut sum = C64::new(0.0, 0.0);
        let mut max_f: f64 = 0.0;
        let mut z = point.to_vec();
        for flat in 0..total {
            let mut k = flat;
            let mut phase = C64::new(1.0, 0.0);
            for (slot, &j) in active.iter().enumerate().rev() {
                let idx = k % nodes;
                k /= nodes;
                let theta = 2.0 * PI * idx as f64 / nodes as f64;
                let e = C64::from_polar(1.0, theta);
                z[j] = point[j] + e * radii[slot];
                phase *= C64::from_polar(1.0, -theta * alpha.orders()[j] as f64);
            }
            let v = self.expr.eval(&z);
            if !v.is_finite() {
                return Err(FuncError::Domain {
                    point: z.clone(),
                    reason: "singular on a Cauchy circle".into(),
                });
            }
            max_f = max_f.max(v.norm());
            sum += v * phase;
        }
        let mut scale = 1.0 / total as f64;
        for (slot, &j) in active.iter().enumerate() {
            scale /= radii[slot].powi(alpha.orders()[j] as i32);
        }
        let fact = alpha.factorial();
        Ok(CauchyEstimate {
            value: sum * scale * fact,
            bound: max_f * total as f64 * scale * fact,
        })
    }

    /// `∂^α f(center)/α!` for every `α` with `max_j α_j ≤ degree_cap`.
    pub fn taylor_coefficients(
        &self,
        center: &[C64],
        degree_cap: usize,
    ) -> Result<BTreeMap<MultiIndex, C64>, FuncError> {
        let bounds = vec![degree_cap; self.arity];
        match self.strategy {
            DerivativeStrategy::CauchyContour => MultiIndex::box_iter(&bounds)
                .map(|a| {
                    let v = self.mixed_partial(center, &a)? / a.factorial();
                    Ok((a, v))
                })
                .collect(),
            _ => Ok(self.taylor_table(center, &bounds)?.iter().collect()),
        }
    }

    /// Zeros of the denominators for a univariate function, if any.
    pub fn singularities_univariate(&self) -> Vec<C64> {
        if self.arity != 1 {
            return Vec::new();
        }
        self.expr
            .denominators()
            .iter()
            .flat_map(|d| {
                let coeffs: Vec<C64> = (0..=d.terms().keys().map(|e| e[0]).max().unwrap_or(0))
                    .map(|k| d.terms().get(&vec![k]).copied().unwrap_or(C64::new(0.0, 0.0)))
                    .collect();
                super::expr::polynomial_roots(&coeffs)
            })
            .collect()
    }

    // builtins

    /// `exp(Σ a_j z_j + d)`.
    pub fn exp_affine(coeffs: Vec<C64>, constant: C64) -> Self {
        Self::new(Expr::Exp(Affine::new(coeffs, constant)))
    }

    pub fn sin_affine(coeffs: Vec<C64>, constant: C64) -> Self {
        Self::new(Expr::Sin(Affine::new(coeffs, constant)))
    }

    pub fn cos_affine(coeffs: Vec<C64>, constant: C64) -> Self {
        Self::new(Expr::Cos(Affine::new(coeffs, constant)))
    }

    pub fn polynomial(arity: usize, terms: impl IntoIterator<Item = (Vec<usize>, C64)>) -> Self {
        Self::new(Expr::Poly(Polynomial::new(arity, terms)))
    }

    /// Coordinate function `z_j` (0-based `j`) of an `arity`-variable space.
    pub fn coordinate(arity: usize, j: usize) -> Self {
        let mut e = vec![0; arity];
        e[j] = 1;
        Self::polynomial(arity, [(e, C64::new(1.0, 0.0))])
    }

    pub fn constant(arity: usize, c: C64) -> Self {
        Self::polynomial(arity, [(vec![0; arity], c)])
    }

    pub fn ratio(num: Polynomial, den: Polynomial) -> Self {
        Self::new(Expr::Ratio(num, den))
    }

    pub fn product(a: &Self, b: &Self) -> Self {
        let arity = a.arity.max(b.arity);
        let f = Self::new(Expr::Prod(Box::new(a.expr.clone()), Box::new(b.expr.clone())));
        f.with_arity(arity).expect("arity is the max of both factors")
    }

    pub fn sum(a: &Self, b: &Self) -> Self {
        let arity = a.arity.max(b.arity);
        let f = Self::new(Expr::Sum(Box::new(a.expr.clone()), Box::new(b.expr.clone())));
        f.with_arity(arity).expect("arity is the max of both terms")
    }

    /// `c·f`, represented as a product with a constant polynomial.
    pub fn scaled(&self, c: C64) -> Self {
        Self::product(&Self::constant(self.arity, c), self)
    }
}

impl fmt::Display for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::parse::format_expr(&self.expr))
    }
}

struct CauchyEstimate {
    value: C64,
    /// Cauchy-estimate magnitude, used as a round-off floor.
    bound: f64,
}
