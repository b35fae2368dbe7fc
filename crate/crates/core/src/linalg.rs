//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. Vectorization stacks columns: for an
//! `m x n` matrix `X`, `vec(X)[j * m + i] == X[(i, j)]`, i.e. the column index
//! occupies the first tensor factor. Every other module goes through
//! [`vec`] and [`unvec`] when moving between operators and vectors.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Numerical cutoffs.
///
/// `rank_eps` and `psd_eps` are applied relative to `max(1, largest
/// eigenvalue)`; `eq_eps` is used for entrywise comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rank_eps: f64,
    pub psd_eps: f64,
    pub eq_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_eps: 1e-9,
            psd_eps: 1e-9,
            eq_eps: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(rank_eps: f64, psd_eps: f64, eq_eps: f64) -> Result<Self> {
        for (name, v) in [("rank_eps", rank_eps), ("psd_eps", psd_eps), ("eq_eps", eq_eps)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Self {
            rank_eps,
            psd_eps,
            eq_eps,
        })
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Rejects wrong lengths,
    /// empty shapes and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                len: data.len(),
                rows,
                cols,
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| r(rows[i][j]))
    }

    /// Complex matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { r(values[i]) } else { ZERO })
    }

    /// `|u><v|`
    pub fn outer(u: &[Complex], v: &[Complex]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(columns: &[Vec<Complex>]) -> Self {
        let rows = columns.first().map_or(0, |c| c.len());
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        self.shape() == other.shape() && self.max_abs_diff(other) <= eps
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(H + H^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + adj[(i, j)]) * 0.5)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = other.shape();
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    /// Copy of the block `[r0, r0 + rows) x [c0, c0 + cols)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Principal submatrix on the given index set.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// vectors

pub fn inner(u: &[Complex], v: &[Complex]) -> Complex {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit vector along `v`; `None` for the zero vector.
pub fn normalized(v: &[Complex]) -> Option<Vec<Complex>> {
    let nv = norm(v);
    if nv == 0.0 || !nv.is_finite() {
        return None;
    }
    Some(v.iter().map(|z| z / nv).collect())
}

pub fn basis_vector(n: usize, k: usize) -> Vec<Complex> {
    let mut v = vec![ZERO; n];
    v[k] = ONE;
    v
}

/// Multiplies `v` by the phase that makes its first entry above `eps`
/// real and positive.
pub fn fix_phase(v: &mut [Complex], eps: f64) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > eps * scale.max(1e-300)) {
        let phase = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Deterministic unit vector orthogonal to every vector in `span` (assumed
/// orthonormal). Tries standard basis vectors in order and keeps the one with
/// the largest orthogonal component.
pub fn orthogonal_completion(span: &[Vec<Complex>], n: usize) -> Option<Vec<Complex>> {
    let mut best: Option<(f64, Vec<Complex>)> = None;
    for k in 0..n {
        let mut v = basis_vector(n, k);
        for _ in 0..2 {
            for s in span {
                let p = inner(s, &v);
                for (vi, si) in v.iter_mut().zip(s) {
                    *vi -= p * si;
                }
            }
        }
        let nv = norm(&v);
        if best.as_ref().is_none_or(|(b, _)| nv > *b + 1e-12) {
            best = Some((nv, v));
        }
    }
    let (nv, v) = best?;
    if nv < 1e-8 {
        return None;
    }
    let mut u = normalized(&v)?;
    fix_phase(&mut u, 1e-12);
    Some(u)
}

// ---------------------------------------------------------------------------
// vectorization

/// Column-stacking vectorization: `vec(X)[j * m + i] = X[(i, j)]`.
pub fn vec(x: &ComplexMatrix) -> Vec<Complex> {
    let (m, n) = x.shape();
    let mut out = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            out.push(x[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vec`] for an `m x n` target.
pub fn unvec(v: &[Complex], m: usize, n: usize) -> Result<ComplexMatrix> {
    if m == 0 || n == 0 || v.len() != m * n {
        return Err(Error::LengthMismatch {
            len: v.len(),
            rows: m,
            cols: n,
        });
    }
    Ok(ComplexMatrix::from_fn(m, n, |i, j| v[j * m + i]))
}

// ---------------------------------------------------------------------------
// Hermitian spectral routines

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, the
/// eigenvectors are the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex> {
        self.vectors.column(k)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `rank_eps * max(1, largest eigenvalue)`
    pub fn rank_cutoff(&self, tol: &Tolerance) -> f64 {
        tol.rank_eps * self.max_value().max(1.0)
    }
}

fn check_hermitian(h: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let asym = h.hermitian_defect();
    if asym > tol.eq_eps * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

/// Symmetrizes `h` and diagonalizes it. Asymmetry above `eq_eps` (relative
/// to `max(1, max |h_ij|)`) is rejected.
pub fn hermitian_eig(h: &ComplexMatrix, tol: &Tolerance) -> Result<HermitianEigen> {
    check_hermitian(h, tol)?;
    let n = h.rows();
    let eig = nalgebra::SymmetricEigen::new(h.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Orthonormal eigenvectors whose eigenvalues lie below
/// `rank_eps * max(1, largest eigenvalue)`.
pub fn kernel_basis(h: &ComplexMatrix, tol: &Tolerance) -> Result<Vec<Vec<Complex>>> {
    let eig = hermitian_eig(h, tol)?;
    Ok(kernel_from_eigen(&eig, tol))
}

pub(crate) fn kernel_from_eigen(eig: &HermitianEigen, tol: &Tolerance) -> Vec<Vec<Complex>> {
    let cutoff = eig.rank_cutoff(tol);
    eig.values
        .iter()
        .enumerate()
        .filter(|(_, &w)| w < cutoff)
        .map(|(k, _)| eig.vector(k))
        .collect()
}

/// Number of eigenvalues at or above the rank cutoff.
pub fn numerical_rank(h: &ComplexMatrix, tol: &Tolerance) -> Result<usize> {
    let eig = hermitian_eig(h, tol)?;
    let cutoff = eig.rank_cutoff(tol);
    Ok(eig.values.iter().filter(|&&w| w >= cutoff).count())
}

pub fn min_eigenvalue(h: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    Ok(hermitian_eig(h, tol)?.min_value())
}

/// True iff the smallest eigenvalue is at least `-psd_eps * max(1, largest)`.
pub fn psd_check(h: &ComplexMatrix, tol: &Tolerance) -> Result<bool> {
    let eig = hermitian_eig(h, tol)?;
    Ok(psd_from_eigen(&eig, tol))
}

pub(crate) fn psd_from_eigen(eig: &HermitianEigen, tol: &Tolerance) -> bool {
    eig.min_value() >= -tol.psd_eps * eig.max_value().max(1.0)
}

/// Orthonormal basis of the numerical kernel of an arbitrary (possibly
/// rectangular) matrix, from its singular value decomposition. Singular
/// values below `rank_eps * max(1, largest)` count as zero.
pub fn null_space(a: &ComplexMatrix, tol: &Tolerance) -> Vec<Vec<Complex>> {
    let n = a.cols();
    // pad to at least n rows so the thin SVD returns a full right basis
    let padded = if a.rows() < n {
        let mut p = ComplexMatrix::zeros(n, n);
        for i in 0..a.rows() {
            for j in 0..n {
                p[(i, j)] = a[(i, j)];
            }
        }
        p
    } else {
        a.clone()
    };
    let svd = nalgebra::SVD::new(padded.to_nalgebra(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.rank_eps * smax.max(1.0);
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s < cutoff {
            out.push((0..n).map(|j| v_t[(k, j)].conj()).collect());
        }
    }
    out
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(h: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    Ok(hermitian_eig(h, tol)?.values.iter().map(|w| w.abs()).sum())
}

/// Largest entrywise modulus of `U^dagger U - 1`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(u.rows()))
}

pub fn ensure_unitary(u: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect > tol.eq_eps.max(1e-12) * u.rows().max(1) as f64 {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

pub(crate) fn ensure_len(v: &[Complex], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(dim_mismatch(format!("vector of length {n}"), v.len()));
    }
    Ok(())
}

/// Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn vec_reads_columns_first() {
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(vec(&x), vec![r(1.0), r(3.0), r(2.0), r(4.0)]);
        assert_eq!(
            vec(&ComplexMatrix::identity(2)),
            vec![ONE, ZERO, ZERO, ONE]
        );
        let e10 = ComplexMatrix::outer(&basis_vector(2, 1), &basis_vector(2, 0));
        assert_eq!(vec(&e10), vec![ZERO, ONE, ZERO, ZERO]);
    }

    #[test]
    fn unvec_inverts_vec() {
        let v = vec![r(1.0), r(3.0), r(2.0), r(4.0)];
        let x = unvec(&v, 2, 2).unwrap();
        assert_eq!(x, ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let k = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 - 0.3 * j as f64, (i * j) as f64));
        assert_eq!(unvec(&vec(&k), 3, 3).unwrap(), k);
        assert_eq!(unvec(&[ZERO; 6], 2, 3).unwrap(), ComplexMatrix::zeros(2, 3));
        assert!(matches!(
            unvec(&[ZERO; 5], 2, 3),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rectangular_vec_convention() {
        // 3x2: column index in the first factor
        let x = ComplexMatrix::from_fn(3, 2, |i, j| r((10 * i + j) as f64));
        let v = vec(&x);
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(v[j * 3 + i], x[(i, j)]);
            }
        }
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(ComplexMatrix::new(2, 2, vec![ZERO; 3]).is_err());
        assert_eq!(
            ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn eig_of_diagonal_and_pauli_x() {
        let e = hermitian_eig(&ComplexMatrix::diag_real(&[2.0, -1.0]), &tol()).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);

        let e = hermitian_eig(&pauli::x(), &tol()).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let s = 1.0 / 2f64.sqrt();
        let v0 = e.vector(0);
        // (1, -1)/sqrt 2 up to phase
        assert_abs_diff_eq!(inner(&[r(s), r(-s)], &v0).norm(), 1.0, epsilon = 1e-14);
        let v1 = e.vector(1);
        assert_abs_diff_eq!(inner(&[r(s), r(s)], &v1).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian_and_repairs_ulp_asymmetry() {
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(hermitian_eig(&bad, &tol()), Err(Error::NotHermitian { .. })));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect, &tol()), Err(Error::NotSquare { .. })));
        let nearly = ComplexMatrix::from_real_rows(&[&[1.0, 0.5 + 1e-15], &[0.5, 1.0]]);
        assert!(hermitian_eig(&nearly, &tol()).is_ok());
    }

    #[test]
    fn kernel_basis_examples() {
        assert!(kernel_basis(&ComplexMatrix::identity(3), &tol()).unwrap().is_empty());
        let k = kernel_basis(&ComplexMatrix::diag_real(&[1.0, 0.0, 2.0, 0.0]), &tol()).unwrap();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_abs_diff_eq!(v[0].norm() + v[2].norm(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(inner(&k[0], &k[1]).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn psd_check_respects_tolerance() {
        let t = Tolerance::new(1e-9, 1e-10, 1e-10).unwrap();
        assert!(psd_check(&ComplexMatrix::diag_real(&[1.0, -1e-15]), &t).unwrap());
        assert!(!psd_check(&ComplexMatrix::diag_real(&[1.0, -0.1]), &t).unwrap());
        assert_abs_diff_eq!(
            min_eigenvalue(&ComplexMatrix::diag_real(&[3.0, -0.25]), &t).unwrap(),
            -0.25
        );
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(-1.0, 0.0, 0.0).is_err());
        assert!(Tolerance::new(0.0, f64::INFINITY, 0.0).is_err());
        assert!(Tolerance::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn null_space_of_wide_and_tall() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let k = null_space(&a, &tol());
        assert_eq!(k.len(), 1);
        assert_abs_diff_eq!(k[0][2].norm(), 1.0, epsilon = 1e-14);
        assert!(null_space(&ComplexMatrix::identity(3), &tol()).is_empty());
    }

    #[test]
    fn orthogonal_completion_is_orthogonal() {
        let s = 1.0 / 2f64.sqrt();
        let span = vec![vec![r(s), r(s), ZERO]];
        let v = orthogonal_completion(&span, 3).unwrap();
        assert_abs_diff_eq!(inner(&span[0], &v).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(norm(&v), 1.0, epsilon = 1e-14);
        let full: Vec<_> = (0..2).map(|k| basis_vector(2, k)).collect();
        assert!(orthogonal_completion(&full, 2).is_none());
    }
}
