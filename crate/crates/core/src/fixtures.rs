//! Reference channels used by tests, the acceptance runner and the CLI.

use rand::Rng;

use crate::channel::{Channel, KrausSet};
use crate::error::{Error, Result};
use crate::linalg::{inner, norm, pauli, Complex, ComplexMatrix, Tolerance, ZERO};
use crate::random;

/// Pauli mixture `(1−a)ρ + (a+b)/2 σ_x ρ σ_x + (a−b)/2 σ_y ρ σ_y`,
/// `0 ≤ b < a < 1`. Its Kraus complement is spanned by `σ_z`.
pub fn pauli_mixture_kraus(a: f64, b: f64) -> Result<KrausSet> {
    if !(0.0 <= b && b < a && a < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= b < a < 1, got a = {a}, b = {b}"
        )));
    }
    KrausSet::new(vec![
        ComplexMatrix::identity(2).scale_real((1.0 - a).sqrt()),
        pauli::x().scale_real(((a + b) / 2.0).sqrt()),
        pauli::y().scale_real(((a - b) / 2.0).sqrt()),
    ])
}

/// Choi matrix of [`pauli_mixture_kraus`], written out entrywise.
pub fn pauli_mixture_choi(a: f64, b: f64) -> ComplexMatrix {
    let p = 1.0 - a;
    ComplexMatrix::from_real_rows(&[
        &[p, 0.0, 0.0, p],
        &[0.0, a, b, 0.0],
        &[0.0, b, a, 0.0],
        &[p, 0.0, 0.0, p],
    ])
}

pub fn pauli_mixture(a: f64, b: f64, tol: &Tolerance) -> Result<Channel> {
    Channel::from_kraus(&pauli_mixture_kraus(a, b)?, tol)
}

/// Qubit channel with Choi matrix
/// `[[1,0,0,1/3],[0,0,0,0],[0,0,2/3,1/3],[1/3,0,1/3,1/3]]` (Kraus rank 3).
/// Dividing by the damping channel with `x = |1>`, `x⊥ = |0>` is possible
/// exactly for `λ ≤ 1/6`.
pub fn qubit_rank3_choi() -> ComplexMatrix {
    let t = 1.0 / 3.0;
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, t],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 2.0 * t, t],
        &[t, 0.0, t, t],
    ])
}

pub fn qubit_rank3(tol: &Tolerance) -> Result<Channel> {
    Channel::from_choi(qubit_rank3_choi(), 2, 2, tol)
}

/// Random qutrit channel whose Kraus operators all have zero diagonal,
/// so every `|j><j|` lies in the Kraus complement. Built from a random
/// `3r x 3` isometry whose `j`-th column avoids the rows `(i, j)`.
pub fn zero_diagonal_qutrit<R: Rng + ?Sized>(r: usize, rng: &mut R, tol: &Tolerance) -> Result<Channel> {
    if r < 2 {
        return Err(Error::InvalidParameter("need at least two Kraus operators".into()));
    }
    let n = 3;
    let len = r * n;
    // position of K_i[a, j] in column j of the stacked isometry: i * n + a
    let allowed = |j: usize, pos: usize| pos % n != j;
    let mut cols: Vec<Vec<Complex>> = Vec::with_capacity(n);
    for j in 0..n {
        loop {
            let mut c: Vec<Complex> = (0..len)
                .map(|p| if allowed(j, p) { random::complex_normal(rng) } else { ZERO })
                .collect();
            // orthogonalize against the projections of earlier columns onto S_j
            let mut proj: Vec<Vec<Complex>> = Vec::new();
            for prev in &cols {
                let mut q: Vec<Complex> = prev
                    .iter()
                    .enumerate()
                    .map(|(p, z)| if allowed(j, p) { *z } else { ZERO })
                    .collect();
                for _ in 0..2 {
                    for b in &proj {
                        let s = inner(b, &q);
                        q.iter_mut().zip(b).for_each(|(qi, bi)| *qi -= s * bi);
                    }
                }
                let nq = norm(&q);
                if nq > 1e-12 {
                    proj.push(q.into_iter().map(|z| z / nq).collect());
                }
            }
            for _ in 0..2 {
                for b in &proj {
                    let s = inner(b, &c);
                    c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= s * bi);
                }
            }
            let nc = norm(&c);
            if nc > 1e-8 {
                cols.push(c.into_iter().map(|z| z / nc).collect());
                break;
            }
        }
    }
    let iso = ComplexMatrix::from_columns(&cols);
    let ops = (0..r).map(|i| iso.submatrix(i * n, 0, n, n)).collect();
    Channel::from_kraus(&KrausSet::new(ops)?, tol)
}

/// Channel whose Kraus span contains `|v><x|` for every `v`, so the whole
/// Kraus complement annihilates `x`. `extra` random Kraus operators are
/// added (`extra + n < n²` keeps the rank deficient), then the set is
/// renormalized, which keeps the `|v><x|` structure because `x` is an
/// eigenvector of the completeness defect.
pub fn planted_kernel_channel<R: Rng + ?Sized>(
    n: usize,
    extra: usize,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<(Channel, Vec<Complex>)> {
    if n < 2 || extra == 0 || extra + n >= n * n {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2 and 1 <= extra < n^2 - n, got n = {n}, extra = {extra}"
        )));
    }
    let x = random::unit_vector(n, rng);
    let base = crate::channel::random_kraus(n, extra, rng)?;
    let weight: f64 = rng.random_range(0.2..1.0);
    let mut ops: Vec<ComplexMatrix> = base.ops().to_vec();
    for i in 0..n {
        let e = crate::linalg::basis_vector(n, i);
        ops.push(ComplexMatrix::outer(&e, &x).scale_real(weight));
    }
    // Σ K†K = 1 + n w² |x><x|
    let f = 1.0 / (1.0 + n as f64 * weight * weight).sqrt() - 1.0;
    let s = &ComplexMatrix::identity(n) + &ComplexMatrix::outer(&x, &x).scale_real(f);
    let ops = ops.iter().map(|k| k * &s).collect();
    Ok((Channel::from_kraus(&KrausSet::new(ops)?, tol)?, x))
}
