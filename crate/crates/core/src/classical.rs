//! Column-stochastic matrices as diagonal-Choi channels, and the column
//! sign-domination test on their zero patterns.

use rand::Rng;

use crate::channel::{Channel, KrausSet};
use crate::divisibility::Criteria;
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, ComplexMatrix, Tolerance};

/// Nonnegative `n x n` matrix whose columns sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    /// Row-major entries.
    pub fn new(n: usize, entries: Vec<f64>, tol: &Tolerance) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidStochastic(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(v) = entries.iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidStochastic(format!("negative entry {v}")));
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| entries[i * n + j]).sum();
            if (s - 1.0).abs() > tol.eq_eps.max(1e-12) * n as f64 {
                return Err(Error::InvalidStochastic(format!("column {j} sums to {s}")));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[&[f64]], tol: &Tolerance) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidStochastic("matrix is not square".into()));
        }
        Self::new(n, rows.concat(), tol)
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let entries = (0..n * n)
            .map(|k| (0..n).map(|l| self.get(k / n, l) * other.get(l, k % n)).sum())
            .collect();
        Self { n, entries }
    }

    /// `sign(A_ij) > tol` for column `j`.
    fn support(&self, j: usize, tol: f64) -> Vec<bool> {
        (0..self.n).map(|i| self.get(i, j) > tol).collect()
    }
}

/// `|j><k| ↦ δ_jk Σ_l A_lj |l><l|`; Kraus operators `sqrt(A_lj)|l><j|`.
pub fn embed(a: &StochasticMatrix, tol: &Tolerance) -> Result<Channel> {
    let n = a.n;
    let mut ops = Vec::new();
    for j in 0..n {
        for l in 0..n {
            let v = a.get(l, j);
            if v > 0.0 {
                ops.push(ComplexMatrix::outer(&basis_vector(n, l), &basis_vector(n, j)).scale_real(v.sqrt()));
            }
        }
    }
    Channel::from_kraus(&KrausSet::new(ops)?, tol)
}

/// Outcome of the sign-domination test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominationOutcome {
    pub divisible_hint: bool,
    /// `(j, k)` with the support of column `j` containing that of column `k`.
    pub witness: Option<(usize, usize)>,
}

/// True iff some column's support contains the support of a different
/// column. Entries count as nonzero above `tol.eq_eps`.
pub fn richman_schneider_check(a: &StochasticMatrix, tol: &Tolerance) -> DominationOutcome {
    let n = a.n;
    let supports: Vec<Vec<bool>> = (0..n).map(|j| a.support(j, tol.eq_eps)).collect();
    for j in 0..n {
        for k in 0..n {
            if j != k && supports[k].iter().zip(&supports[j]).all(|(&sk, &sj)| !sk || sj) {
                return DominationOutcome {
                    divisible_hint: true,
                    witness: Some((j, k)),
                };
            }
        }
    }
    DominationOutcome {
        divisible_hint: false,
        witness: None,
    }
}

/// Sign-domination verdict next to the sufficient criterion of the
/// embedded channel over all basis pairs `(e_k, e_j)`, `j ≠ k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalComparison {
    pub domination: DominationOutcome,
    pub criterion_hint: bool,
    /// `(k, j)`: `x = e_k`, `x⊥ = e_j` passes.
    pub criterion_witness: Option<(usize, usize)>,
    pub agree: bool,
}

pub fn classical_criteria_agree(a: &StochasticMatrix, tol: &Tolerance) -> Result<ClassicalComparison> {
    let n = a.n;
    let ch = embed(a, tol)?;
    let crit = Criteria::new(&ch, tol)?;
    let mut criterion_witness = None;
    'outer: for k in 0..n {
        for j in 0..n {
            if j != k && crit.sufficient(&basis_vector(n, k), &basis_vector(n, j)).pass {
                criterion_witness = Some((k, j));
                break 'outer;
            }
        }
    }
    let domination = richman_schneider_check(a, tol);
    let criterion_hint = criterion_witness.is_some();
    Ok(ClassicalComparison {
        domination,
        criterion_hint,
        criterion_witness,
        agree: criterion_hint == domination.divisible_hint,
    })
}

/// Random stochastic matrix: each entry is zeroed with probability
/// `zero_prob` (every column keeps at least one nonzero entry), the rest
/// are uniform on `(0, 1)`, then columns are normalized.
pub fn random_stochastic<R: Rng + ?Sized>(n: usize, zero_prob: f64, rng: &mut R) -> StochasticMatrix {
    let mut cols = vec![vec![0.0; n]; n];
    for col in cols.iter_mut() {
        loop {
            for v in col.iter_mut() {
                *v = if rng.random::<f64>() < zero_prob {
                    0.0
                } else {
                    rng.random_range(0.05..1.0)
                };
            }
            if col.iter().any(|&v| v > 0.0) {
                break;
            }
        }
        let s: f64 = col.iter().sum();
        col.iter_mut().for_each(|v| *v /= s);
    }
    let entries = (0..n * n).map(|k| cols[k % n][k / n]).collect();
    StochasticMatrix { n, entries }
}
