use std::collections::BTreeMap;

use super::multi_index::{binomial, factorial, MultiIndex};
use crate::numerics::C64;

/// Multivariate polynomial `Σ c_e z^e` with exponent vectors of one length.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Vec<usize>, C64>,
}

impl Polynomial {
    /// Terms with a repeated exponent are summed. Panics on mixed lengths.
    pub fn new(arity: usize, terms: impl IntoIterator<Item = (Vec<usize>, C64)>) -> Self {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), arity, "exponent length must equal arity");
            *map.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        Self { arity, terms: map }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, C64> {
        &self.terms
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .enumerate()
                    .fold(c, |acc, (j, &k)| acc * z[j].powu(k as u32))
            })
            .sum()
    }

    /// Coefficients in `z_j` with every other variable fixed at `z`.
    fn univariate_in(&self, j: usize, z: &[C64]) -> Vec<C64> {
        let deg = self.terms.keys().map(|e| e[j]).max().unwrap_or(0);
        let mut coeffs = vec![C64::new(0.0, 0.0); deg + 1];
        for (e, &c) in &self.terms {
            let w = e
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .fold(c, |acc, (i, &k)| acc * z[i].powu(k as u32));
            coeffs[e[j]] += w;
        }
        coeffs
    }
}

/// `Σ a_j z_j + d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    coeffs: Vec<C64>,
    constant: C64,
}

impl Affine {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coeffs: Vec<C64>, constant: C64) -> Self {
        while coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs, constant }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn constant(&self) -> C64 {
        self.constant
    }

    fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.coeffs
            .iter()
            .zip(z)
            .fold(self.constant, |acc, (a, x)| acc + a * x)
    }

    fn coeff(&self, j: usize) -> C64 {
        self.coeffs.get(j).copied().unwrap_or(C64::new(0.0, 0.0))
    }
}

/// Expression tree of the builtin function family.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Poly(Polynomial),
    Exp(Affine),
    Sin(Affine),
    Cos(Affine),
    /// `num / den`; singular where `den` vanishes.
    Ratio(Polynomial, Polynomial),
    Prod(Box<Expr>, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn arity(&self) -> usize {
        match self {
            Expr::Poly(p) => p.arity(),
            Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.arity(),
            Expr::Ratio(n, d) => n.arity().max(d.arity()),
            Expr::Prod(a, b) | Expr::Sum(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        match self {
            Expr::Poly(p) => p.eval(z),
            Expr::Exp(a) => a.eval(z).exp(),
            Expr::Sin(a) => a.eval(z).sin(),
            Expr::Cos(a) => a.eval(z).cos(),
            Expr::Ratio(n, d) => n.eval(z) / d.eval(z),
            Expr::Prod(a, b) => a.eval(z) * b.eval(z),
            Expr::Sum(a, b) => a.eval(z) + b.eval(z),
        }
    }

    pub fn is_entire(&self) -> bool {
        match self {
            Expr::Ratio(..) => false,
            Expr::Prod(a, b) | Expr::Sum(a, b) => a.is_entire() && b.is_entire(),
            _ => true,
        }
    }

    /// Denominators of every rational node, for singularity bookkeeping.
    pub(crate) fn denominators(&self) -> Vec<&Polynomial> {
        match self {
            Expr::Ratio(_, d) => vec![d],
            Expr::Prod(a, b) | Expr::Sum(a, b) => {
                let mut v = a.denominators();
                v.extend(b.denominators());
                v
            }
            _ => Vec::new(),
        }
    }

    /// Truncated Taylor table at `point` over the box `α ≤ bounds`.
    pub fn jet(&self, point: &[C64], bounds: &[usize]) -> Jet {
        match self {
            Expr::Poly(p) => Jet::from_poly(p, point, bounds),
            Expr::Exp(a) => {
                let u = a.eval(point).exp();
                Jet::from_fn(bounds, |alpha| u * affine_monomial(a, alpha))
            }
            Expr::Sin(a) => {
                let u = a.eval(point);
                let table = [u.sin(), u.cos(), -u.sin(), -u.cos()];
                Jet::from_fn(bounds, |alpha| table[alpha.total() % 4] * affine_monomial(a, alpha))
            }
            Expr::Cos(a) => {
                let u = a.eval(point);
                let table = [u.cos(), -u.sin(), -u.cos(), u.sin()];
                Jet::from_fn(bounds, |alpha| table[alpha.total() % 4] * affine_monomial(a, alpha))
            }
            Expr::Ratio(n, d) => {
                Jet::from_poly(n, point, bounds).div(&Jet::from_poly(d, point, bounds))
            }
            Expr::Prod(a, b) => a.jet(point, bounds).mul(&b.jet(point, bounds)),
            Expr::Sum(a, b) => a.jet(point, bounds).add(&b.jet(point, bounds)),
        }
    }

    /// Nearest zero of any denominator in variable `j`, other variables
    /// held at `point`. `None` when there are no singularities.
    pub(crate) fn singular_distance(&self, point: &[C64], j: usize) -> Option<f64> {
        let mut best: Option<f64> = None;
        for d in self.denominators() {
            if j >= d.arity() {
                continue;
            }
            let coeffs = d.univariate_in(j, point);
            for root in polynomial_roots(&coeffs) {
                let dist = (root - point[j]).norm();
                best = Some(best.map_or(dist, |b: f64| b.min(dist)));
            }
        }
        best
    }
}

/// `∏ a_j^{α_j} / α_j!`.
fn affine_monomial(a: &Affine, alpha: &MultiIndex) -> C64 {
    alpha
        .orders()
        .iter()
        .enumerate()
        .fold(C64::new(1.0, 0.0), |acc, (j, &k)| {
            acc * a.coeff(j).powu(k as u32) / factorial(k)
        })
}

/// Roots of `Σ c_k t^k` via companion-matrix eigenvalues.
pub(crate) fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut deg = coeffs.len().saturating_sub(1);
    while deg > 0 && coeffs[deg].norm() == 0.0 {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let companion = crate::numerics::ComplexMatrix::from_fn(deg, deg, |i, k| {
        if i == 0 {
            -coeffs[deg - 1 - k] / lead
        } else if k + 1 == i {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    crate::numerics::eigenvalues(&companion).unwrap_or_default()
}

/// Dense truncated Taylor table over a box of multi-indices.
///
/// `coeff(α)` is the coefficient of `h^α` in `f(point + h)`, i.e.
/// `∂^α f(point) / α!`. Products and quotients stay exact inside the box
/// because box truncation is closed under index addition.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    bounds: Vec<usize>,
    data: Vec<C64>,
}

impl Jet {
    fn len_for(bounds: &[usize]) -> usize {
        bounds.iter().map(|&b| b + 1).product()
    }

    fn zeros(bounds: &[usize]) -> Self {
        Self {
            bounds: bounds.to_vec(),
            data: vec![C64::new(0.0, 0.0); Self::len_for(bounds)],
        }
    }

    fn from_fn(bounds: &[usize], mut f: impl FnMut(&MultiIndex) -> C64) -> Self {
        Self {
            bounds: bounds.to_vec(),
            data: MultiIndex::box_iter(bounds).map(|a| f(&a)).collect(),
        }
    }

    fn offset(&self, orders: &[usize]) -> usize {
        orders
            .iter()
            .zip(&self.bounds)
            .fold(0, |acc, (&a, &b)| acc * (b + 1) + a)
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    /// Coefficient of `h^α`; zero outside the box.
    pub fn coeff(&self, alpha: &MultiIndex) -> C64 {
        if alpha.arity() != self.bounds.len()
            || alpha.orders().iter().zip(&self.bounds).any(|(a, b)| a > b)
        {
            return C64::new(0.0, 0.0);
        }
        self.data[self.offset(alpha.orders())]
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, C64)> + '_ {
        MultiIndex::box_iter(&self.bounds).zip(self.data.iter().copied())
    }

    fn from_poly(p: &Polynomial, point: &[C64], bounds: &[usize]) -> Self {
        let mut jet = Self::zeros(bounds);
        for (e, &c) in p.terms() {
            // ∏_j (p_j + h_j)^{e_j}, expanded per variable and truncated
            let per_var: Vec<Vec<C64>> = bounds
                .iter()
                .enumerate()
                .map(|(j, &b)| {
                    let ej = e.get(j).copied().unwrap_or(0);
                    (0..=b)
                        .map(|k| {
                            if k > ej {
                                C64::new(0.0, 0.0)
                            } else {
                                point[j].powu((ej - k) as u32) * binomial(ej, k)
                            }
                        })
                        .collect()
                })
                .collect();
            for (slot, alpha) in jet.data.iter_mut().zip(MultiIndex::box_iter(bounds)) {
                let mut v = c;
                for (j, &k) in alpha.orders().iter().enumerate() {
                    v *= per_var[j][k];
                    if v == C64::new(0.0, 0.0) {
                        break;
                    }
                }
                *slot += v;
            }
        }
        jet
    }

    fn add(&self, other: &Jet) -> Jet {
        Jet {
            bounds: self.bounds.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    fn mul(&self, other: &Jet) -> Jet {
        let mut out = Jet::zeros(&self.bounds);
        let mut gamma = vec![0; self.bounds.len()];
        for gi in 0..out.data.len() {
            let mut s = C64::new(0.0, 0.0);
            // offsets are linear in the orders, so offset(γ − β) = gi − offset(β)
            self.for_each_below(&gamma, |bi| s += self.data[bi] * other.data[gi - bi]);
            out.data[gi] = s;
            self.advance(&mut gamma);
        }
        out
    }

    /// Series quotient; requires a nonzero constant term in `den`.
    fn div(&self, den: &Jet) -> Jet {
        let d0 = den.data[0];
        let mut q = Jet::zeros(&self.bounds);
        let mut gamma = vec![0; self.bounds.len()];
        // lexicographic order visits γ − β before γ
        for gi in 0..q.data.len() {
            let mut s = self.data[gi];
            self.for_each_below(&gamma, |bi| {
                if bi != 0 {
                    s -= den.data[bi] * q.data[gi - bi];
                }
            });
            q.data[gi] = s / d0;
            self.advance(&mut gamma);
        }
        q
    }

    /// Calls `visit(offset(β))` for every `β ≤ γ`.
    fn for_each_below(&self, gamma: &[usize], mut visit: impl FnMut(usize)) {
        let r = gamma.len();
        let mut beta = vec![0; r];
        loop {
            visit(self.offset(&beta));
            let mut j = r;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                if beta[j] < gamma[j] {
                    beta[j] += 1;
                    break;
                }
                beta[j] = 0;
            }
        }
    }

    /// Next multi-index in lexicographic box order.
    fn advance(&self, gamma: &mut [usize]) {
        for j in (0..gamma.len()).rev() {
            if gamma[j] < self.bounds[j] {
                gamma[j] += 1;
                return;
            }
            gamma[j] = 0;
        }
    }
}
