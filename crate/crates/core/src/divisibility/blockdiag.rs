//! Pairs read off a block-diagonal Choi matrix after a known change of basis.
//!
//! With `X = (U^T ⊗ V†)† C(Φ) (U^T ⊗ V†)` split into contiguous diagonal
//! blocks, a run of positive definite blocks covering every row index
//! `j m + a` (`a = 0..m`) of input column `j` forces every element of the
//! Kraus complement of `Ad_V ∘ Φ ∘ Ad_{U†}` to kill `e_j`.

use super::criteria::Criteria;
use super::{unitary_transform_channel, CandidatePair, CandidateSource};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, hermitian_eig, ComplexMatrix, Tolerance};

/// Boundaries `p` (between indices `p−1` and `p`) across which `x` has no
/// coupling above `eps`; always includes `0` and `len`.
fn block_boundaries(x: &ComplexMatrix, eps: f64) -> Vec<usize> {
    let len = x.rows();
    let mut cuts = vec![0];
    for p in 1..len {
        let coupled = (0..p).any(|i| (p..len).any(|j| x[(i, j)].norm() > eps || x[(j, i)].norm() > eps));
        if !coupled {
            cuts.push(p);
        }
    }
    cuts.push(len);
    cuts
}

fn is_positive_definite(block: &ComplexMatrix, floor: f64, tol: &Tolerance) -> bool {
    hermitian_eig(block, tol).map(|e| e.min_value() > floor).unwrap_or(false)
}

pub fn block_diag_candidates(
    ch: &Channel,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Vec<CandidatePair>> {
    let (n, m) = (ch.dim_in(), ch.dim_out());
    // Ad_V ∘ Φ ∘ Ad_{U†} is the (U†, V†) transform.
    let inner_ch = unitary_transform_channel(ch, &u.adjoint(), &v.adjoint(), tol)?;
    let x = inner_ch.choi();
    let scale = x.max_abs().max(1.0);
    let cuts = block_boundaries(x, tol.eq_eps * scale);
    let floor = tol.rank_eps * scale;

    // maximal runs of consecutive positive definite blocks
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<usize> = None;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let idx: Vec<usize> = (a..b).collect();
        if is_positive_definite(&x.select(&idx), floor, tol) {
            open.get_or_insert(a);
        } else if let Some(s) = open.take() {
            runs.push((s, a));
        }
    }
    if let Some(s) = open {
        runs.push((s, x.rows()));
    }

    let mut columns: Vec<usize> = (0..n)
        .filter(|&j| runs.iter().any(|&(s, e)| s <= j * m && (j + 1) * m <= e))
        .collect();
    columns.dedup();
    if columns.is_empty() {
        return Err(Error::NoQualifyingBlock);
    }
    let crit = Criteria::new(ch, tol)?;
    let ud = u.adjoint();
    Ok(columns
        .into_iter()
        .map(|j| {
            let xv = ud.mul_vec(&basis_vector(n, j));
            let xp = ud.mul_vec(&basis_vector(n, (j + 1) % n));
            CandidatePair::evaluate(&crit, xv, xp, CandidateSource::BlockDiagonal)
        })
        .collect())
}
