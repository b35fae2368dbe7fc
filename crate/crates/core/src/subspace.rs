//! The span of a channel's Kraus operators, its Hilbert-Schmidt orthogonal
//! complement, and joint kernels.

use crate::channel::Channel;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    hermitian_eig, inner, kernel_from_eigen, null_space, psd_from_eigen, unvec, vec, Complex,
    ComplexMatrix, Tolerance,
};

/// A subspace of `m x n` matrices with a Hilbert-Schmidt orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSubspace {
    rows: usize,
    cols: usize,
    basis: Vec<ComplexMatrix>,
}

impl OperatorSubspace {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    /// Norm of the component of `z` orthogonal to the subspace.
    pub fn distance(&self, z: &ComplexMatrix) -> f64 {
        let v = vec(z);
        let mut rest = v.clone();
        for b in &self.basis {
            let bv = vec(b);
            let p = inner(&bv, &v);
            for (r, bi) in rest.iter_mut().zip(&bv) {
                *r -= p * bi;
            }
        }
        crate::linalg::norm(&rest)
    }
}

fn from_vectors(vs: &[Vec<Complex>], m: usize, n: usize) -> OperatorSubspace {
    let basis = vs
        .iter()
        .map(|v| unvec(v, m, n).expect("vector length m*n"))
        .collect();
    OperatorSubspace {
        rows: m,
        cols: n,
        basis,
    }
}

/// `span{K_j}`, from the range of the Choi matrix.
pub fn kraus_subspace(ch: &Channel, tol: &Tolerance) -> Result<OperatorSubspace> {
    let eig = hermitian_eig(ch.choi(), tol)?;
    if !psd_from_eigen(&eig, tol) {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.min_value(),
        });
    }
    let cutoff = eig.rank_cutoff(tol);
    let range: Vec<_> = (0..eig.values.len())
        .rev()
        .filter(|&k| eig.values[k] >= cutoff)
        .map(|k| eig.vector(k))
        .collect();
    Ok(from_vectors(&range, ch.dim_out(), ch.dim_in()))
}

/// Orthogonal complement of the Kraus span: the unvec'd kernel of the Choi
/// matrix.
pub fn kraus_perp(ch: &Channel, tol: &Tolerance) -> Result<OperatorSubspace> {
    let eig = hermitian_eig(ch.choi(), tol)?;
    if !psd_from_eigen(&eig, tol) {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.min_value(),
        });
    }
    let mut kernel = kernel_from_eigen(&eig, tol);
    for v in kernel.iter_mut() {
        crate::linalg::fix_phase(v, tol.eq_eps);
    }
    Ok(from_vectors(&kernel, ch.dim_out(), ch.dim_in()))
}

/// Orthonormal basis of `⋂ ker(M)`, computed as the kernel of the vertical
/// stack of all members. An empty list of matrices has no kernel to
/// intersect and yields an empty result; callers treat that case themselves.
pub fn common_kernel(mats: &[ComplexMatrix], tol: &Tolerance) -> Result<Vec<Vec<Complex>>> {
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let n = first.cols();
    if let Some(bad) = mats.iter().find(|m| m.cols() != n) {
        return Err(dim_mismatch(format!("{n} columns"), bad.cols()));
    }
    let rows: usize = mats.iter().map(|m| m.rows()).sum();
    let mut stacked = ComplexMatrix::zeros(rows, n);
    let mut r0 = 0;
    for m in mats {
        for i in 0..m.rows() {
            for j in 0..n {
                stacked[(r0 + i, j)] = m[(i, j)];
            }
        }
        r0 += m.rows();
    }
    let mut ker = null_space(&stacked, tol);
    for v in ker.iter_mut() {
        crate::linalg::fix_phase(v, tol.eq_eps);
    }
    Ok(ker)
}

/// `max_j ‖M_j x − <x|M_j x> x‖` for unit `x`; zero iff `x` is a common
/// eigenvector.
pub fn common_eigvec_residual(mats: &[ComplexMatrix], x: &[Complex]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in mats {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        crate::linalg::ensure_len(x, m.cols())?;
        let mx = m.mul_vec(x);
        let p = inner(x, &mx);
        let r: f64 = mx
            .iter()
            .zip(x)
            .map(|(a, b)| (a - p * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    Ok(worst)
}
