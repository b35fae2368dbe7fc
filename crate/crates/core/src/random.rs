//! Seeded random fixtures: Gaussian matrices, Haar-like unitaries, unit
//! vectors. Everything is driven by a `ChaCha8Rng` so results are identical
//! across runs and platforms for the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{inner, norm, Complex, ComplexMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex normal sample (`E|z|^2 = 1`).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex> {
    loop {
        let v = gaussian_vector(n, rng);
        let nv = norm(&v);
        if nv > 1e-8 {
            return v.into_iter().map(|z| z / nv).collect();
        }
    }
}

/// Orthonormalizes the columns of `a` (modified Gram-Schmidt, two passes).
/// Returns `None` if the columns are numerically dependent.
pub fn orthonormalize_columns(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let mut cols: Vec<Vec<Complex>> = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let mut v = a.column(j);
        let start = norm(&v);
        for _ in 0..2 {
            for q in &cols {
                let p = inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv <= 1e-10 * start.max(1e-300) {
            return None;
        }
        cols.push(v.into_iter().map(|z| z / nv).collect());
    }
    Some(ComplexMatrix::from_columns(&cols))
}

/// Haar-distributed unitary (Gram-Schmidt of a complex Ginibre matrix).
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        if let Some(q) = orthonormalize_columns(&gaussian_matrix(n, n, rng)) {
            return q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn unitary_is_unitary_and_deterministic() {
        let u = unitary(4, &mut seeded(3));
        assert!(unitarity_defect(&u) < 1e-13);
        assert_eq!(u, unitary(4, &mut seeded(3)));
        assert_ne!(u, unitary(4, &mut seeded(4)));
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0]]);
        assert!(orthonormalize_columns(&a).is_none());
    }
}
