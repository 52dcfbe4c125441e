use std::fmt;

/// Multi-index `α = (α_1, …, α_r)` of derivative (or Taylor) orders.
///
/// The set of variables actually differentiated, `A = {j : α_j ≥ 1}`, is
/// its [`support`](MultiIndex::support).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(orders: Vec<usize>) -> Self {
        Self(orders)
    }

    pub fn zeros(arity: usize) -> Self {
        Self(vec![0; arity])
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(j, _)| j)
            .collect()
    }

    /// `∏ α_j!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// All multi-indices with `α_j ≤ bounds[j]`, in lexicographic order
    /// (last coordinate fastest).
    pub fn box_iter(bounds: &[usize]) -> impl Iterator<Item = MultiIndex> + '_ {
        let total: usize = bounds.iter().map(|&b| b + 1).product();
        (0..total).map(move |mut k| {
            let mut orders = vec![0; bounds.len()];
            for j in (0..bounds.len()).rev() {
                let base = bounds[j] + 1;
                orders[j] = k % base;
                k /= base;
            }
            MultiIndex(orders)
        })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ";")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
