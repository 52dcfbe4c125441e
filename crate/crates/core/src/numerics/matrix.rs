use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::NumericsError;

/// Double-precision complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Default cap on the dimension of a Kronecker product.
pub const DEFAULT_TENSOR_CAP: usize = 4096;

/// Dense complex matrix.
///
/// Entries are always finite and both dimensions are positive. Values are
/// immutable once built; every operation returns a new matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:>+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self, NumericsError> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::EmptyDimension { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(NumericsError::EntryCount {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|z| !z.is_finite()) {
            return Err(NumericsError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self {
            data: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    /// Builds from nested rows. Panics on ragged input; meant for literals.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::new(r, c, rows.concat())
    }

    /// Builds a real matrix from nested rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, NumericsError> {
        let owned: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&owned)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let data = DMatrix::from_fn(rows, cols, |i, j| f(i, j));
        debug_assert!(data.iter().all(|z| z.is_finite()));
        Self { data }
    }

    /// Wraps an nalgebra matrix, validating finiteness.
    pub fn from_nalgebra(data: DMatrix<C64>) -> Result<Self, NumericsError> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(NumericsError::EmptyDimension {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            // nalgebra storage is column-major
            return Err(NumericsError::NonFinite {
                row: pos % data.nrows(),
                col: pos / data.nrows(),
            });
        }
        Ok(Self { data })
    }

    pub(crate) fn from_nalgebra_unchecked(data: DMatrix<C64>) -> Self {
        Self { data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity dimension must be positive");
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    /// Jordan block `J_m(λ)`: λ on the diagonal, ones on the superdiagonal.
    pub fn jordan_block(m: usize, lambda: C64) -> Self {
        Self::from_fn(m, m, |i, j| {
            if i == j {
                lambda
            } else if j == i + 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Block-diagonal assembly.
    pub fn block_diag(blocks: &[ComplexMatrix]) -> Self {
        let rows: usize = blocks.iter().map(ComplexMatrix::rows).sum();
        let cols: usize = blocks.iter().map(ComplexMatrix::cols).sum();
        let mut data = DMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            data.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.data);
            r0 += b.rows();
            c0 += b.cols();
        }
        Self { data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.data
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows().min(self.cols())).map(|i| self.data[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.data.column(j).iter().copied().collect()
    }

    pub fn ensure_square(&self) -> Result<usize, NumericsError> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(NumericsError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            data: &self.data * c,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `self − λI`.
    pub fn shifted(&self, lambda: C64) -> Self {
        let mut data = self.data.clone();
        for i in 0..self.rows().min(self.cols()) {
            data[(i, i)] -= lambda;
        }
        Self { data }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.data.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm, see [`op_norm`].
    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }

    /// `self^k` by repeated squaring; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Self {
        let n = self.rows();
        assert!(self.is_square(), "pow of a non-square matrix");
        let mut result = Self::identity(n);
        let mut base = self.clone();
        let mut e = k;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { &result * &base };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Leading `n × n` principal block.
    pub fn leading_block(&self, n: usize) -> Self {
        assert!(n > 0 && n <= self.rows() && n <= self.cols());
        Self {
            data: self.data.view((0, 0), (n, n)).into_owned(),
        }
    }

    /// Zero-extends into the top-left corner of a `dim × dim` matrix.
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.rows() && dim >= self.cols());
        let mut data = DMatrix::zeros(dim, dim);
        data.view_mut((0, 0), (self.rows(), self.cols()))
            .copy_from(&self.data);
        Self { data }
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols());
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.data[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖self − other‖₂`.
    pub fn dist(&self, other: &Self) -> f64 {
        (self - other).op_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (self - &self.adjoint()).op_norm() <= tol * self.op_norm().max(1.0)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, NumericsError> {
        if self.cols() != other.rows() {
            return Err(NumericsError::DimensionMismatch {
                op: "mul",
                left: (self.rows(), self.cols()),
                right: (other.rows(), other.cols()),
            });
        }
        Ok(self * other)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * &rhs.data,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            data: -&self.data,
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: self.data + rhs.data,
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: self.data - rhs.data,
        }
    }
}

/// Kronecker product with the default dimension cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    kron_with_cap(a, b, DEFAULT_TENSOR_CAP)
}

/// Kronecker product `a ⊗ b`; fails when either result dimension exceeds `cap`.
pub fn kron_with_cap(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cap: usize,
) -> Result<ComplexMatrix, NumericsError> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => Ok(ComplexMatrix {
            data: a.data.kronecker(&b.data),
        }),
        _ => Err(NumericsError::TensorTooLarge {
            dim: a.rows().saturating_mul(b.rows()).max(a.cols().saturating_mul(b.cols())),
            cap,
        }),
    }
}

/// Kronecker product of a sequence, left to right.
pub fn kron_all(factors: &[ComplexMatrix], cap: usize) -> Result<ComplexMatrix, NumericsError> {
    let (first, rest) = factors
        .split_first()
        .expect("kron_all needs at least one factor");
    rest.iter()
        .try_fold(first.clone(), |acc, m| kron_with_cap(&acc, m, cap))
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    if a.data.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    if a.rows() == 1 || a.cols() == 1 {
        return a.frobenius_norm();
    }
    a.data.clone().singular_values().max()
}

/// Resolvent `(zI − x)⁻¹`.
///
/// Fails when the 1-norm condition number of `zI − x` exceeds `1e14`.
pub fn resolvent(x: &ComplexMatrix, z: C64) -> Result<ComplexMatrix, NumericsError> {
    x.ensure_square()?;
    let a = (-x).shifted(-z);
    let anorm = a.norm_one();
    let inv = a
        .data
        .clone()
        .lu()
        .try_inverse()
        .ok_or(NumericsError::NearSingular { z, cond: f64::INFINITY })?;
    let inv = ComplexMatrix { data: inv };
    let cond = anorm * inv.norm_one();
    if !cond.is_finite() || cond > RESOLVENT_COND_LIMIT {
        return Err(NumericsError::NearSingular { z, cond });
    }
    Ok(inv)
}

pub const RESOLVENT_COND_LIMIT: f64 = 1e14;
