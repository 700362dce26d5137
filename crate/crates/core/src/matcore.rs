//! Dense complex matrices and the reference routines used to validate the
//! parameter-driven algorithms.
//!
//! The reference Cholesky, determinant and eigenvalue routines here are
//! deliberately plain. They never sit on the parametrization path; they exist
//! so that every result of [`crate::schur`] can be checked against an
//! independent computation.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Absolute/relative tolerance pair used by every structural check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_eps: 1e-10,
            rel_eps: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self> {
        if !(abs_eps.is_finite() && rel_eps.is_finite()) {
            return Err(Error::NonFinite("tolerance"));
        }
        if abs_eps < 0.0 || rel_eps < 0.0 {
            return Err(Error::Domain("tolerances must be nonnegative".into()));
        }
        Ok(Self { abs_eps, rel_eps })
    }

    /// `abs_eps + rel_eps * scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_eps + self.rel_eps * scale
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>10.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("matrix data"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from a closure. Panics if the closure yields a
    /// non-finite entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let z = f(r, c);
                assert!(
                    z.re.is_finite() && z.im.is_finite(),
                    "non-finite entry at ({r}, {c})"
                );
                data.push(z);
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from nested rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::new(n, m, data)
    }

    pub fn from_complex_rows(rows: &[&[C64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(n, m, data)
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Rank-one matrix `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.data[k * rhs.cols + c];
                }
            }
        }
        Ok(out)
    }

    /// Square principal submatrix on `indices`.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), indices.len(), |r, c| {
            self[(indices[r], indices[c])]
        })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out[(self.rows + r, self.cols + c)] = other[(r, c)];
            }
        }
        out
    }

    /// `self` repeated `p` times along the diagonal.
    pub fn direct_power(&self, p: usize) -> Self {
        (1..p).fold(self.clone(), |acc, _| acc.direct_sum(self))
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in elementwise operation"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in matrix product")
    }
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} requires a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// `max |m[j,k] - conj(m[k,j])| <= abs_eps + rel_eps * maxnorm(m)`.
pub fn is_hermitian(m: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    require_square(m, "is_hermitian")?;
    let thr = tol.threshold(m.max_norm());
    let n = m.rows;
    for r in 0..n {
        for c in r..n {
            if (m[(r, c)] - m[(c, r)].conj()).norm() > thr {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Upper-triangular `U` with nonnegative real diagonal and `U* U = m`.
///
/// Pivot-free outer-product elimination. A pivot at or below the tolerance
/// threshold zeroes the corresponding row of `U`; the remaining column of the
/// residual must then vanish, measured against the Cauchy-Schwarz bound
/// `|a_ip|^2 <= a_pp a_ii` a PSD residual obeys.
pub fn reference_cholesky(m: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    require_square(m, "reference_cholesky")?;
    if !is_hermitian(m, tol)? {
        return Err(Error::Precondition("matrix is not Hermitian".into()));
    }
    let n = m.rows;
    let thr = tol.threshold(m.max_norm());
    let mut a = m.clone();
    let mut u = ComplexMatrix::zeros(n, n);
    for p in 0..n {
        let pivot = a[(p, p)].re;
        if pivot < -thr {
            return Err(Error::not_psd(p, p, format!("negative pivot {pivot:e}")));
        }
        if pivot <= thr {
            for i in p + 1..n {
                let r = a[(i, p)].norm();
                if r * r > thr * (a[(i, i)].re.abs() + thr) {
                    return Err(Error::not_psd(
                        p,
                        i,
                        format!("zero pivot with residual {r:e} in its column"),
                    ));
                }
            }
            continue;
        }
        let upp = pivot.sqrt();
        u[(p, p)] = C64::new(upp, 0.0);
        for j in p + 1..n {
            u[(p, j)] = a[(p, j)] / upp;
        }
        for i in p + 1..n {
            let ui = u[(p, i)].conj();
            for j in p + 1..n {
                let upj = u[(p, j)];
                a[(i, j)] -= ui * upj;
            }
        }
    }
    Ok(u)
}

/// Determinant by LU factorization with partial pivoting.
pub fn reference_determinant(m: &ComplexMatrix) -> Result<C64> {
    require_square(m, "reference_determinant")?;
    let n = m.rows;
    let mut a = m.clone();
    let mut det = ONE;
    for p in 0..n {
        let (piv_row, piv_abs) =
            (p..n)
                .map(|r| (r, a[(r, p)].norm()))
                .fold(
                    (p, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if piv_abs == 0.0 {
            return Ok(ZERO);
        }
        if piv_row != p {
            for c in 0..n {
                a.data.swap(p * n + c, piv_row * n + c);
            }
            det = -det;
        }
        let pivot = a[(p, p)];
        det *= pivot;
        for r in p + 1..n {
            let factor = a[(r, p)] / pivot;
            if factor == ZERO {
                continue;
            }
            for c in p..n {
                let apc = a[(p, c)];
                a[(r, c)] -= factor * apc;
            }
        }
    }
    Ok(det)
}

/// Ascending eigenvalues of a Hermitian matrix.
///
/// The `n x n` Hermitian matrix `A + iB` is embedded as the real symmetric
/// `2n x 2n` matrix `[[A, -B], [B, A]]`, whose spectrum is that of the
/// original with every eigenvalue doubled, and diagonalized by cyclic Jacobi
/// rotations.
pub fn reference_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    require_square(m, "reference_eigenvalues")?;
    if !is_hermitian(m, Tolerance::default())? {
        return Err(Error::Precondition("matrix is not Hermitian".into()));
    }
    let n = m.rows;
    let size = 2 * n;
    let mut a = vec![0.0; size * size];
    for r in 0..n {
        for c in 0..n {
            // Symmetrize so rounding in the input cannot break the embedding.
            let z = 0.5 * (m[(r, c)] + m[(c, r)].conj());
            a[r * size + c] = z.re;
            a[(r + n) * size + (c + n)] = z.re;
            a[r * size + (c + n)] = -z.im;
            a[(r + n) * size + c] = z.im;
        }
    }
    let mut eig = jacobi_symmetric_eigenvalues(&mut a, size);
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig.into_iter().step_by(2).collect())
}

fn jacobi_symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Kronecker product with `a` indexing the outer blocks:
/// `kron(a, b)[k * rb + l, j * cb + m] = a[k, j] * b[l, m]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}
