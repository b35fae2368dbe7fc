//! Certifying `Φ = (Φ ∘ Ψ_λ⁻¹) ∘ Ψ_λ` for an orthonormal pair `(x, x⊥)`.

mod blockdiag;
mod criteria;
mod lambda;
mod search;

pub use blockdiag::block_diag_candidates;
pub use criteria::{criterion_matrices, necessary_check, sufficient_check, CheckOutcome, Criteria};
pub use lambda::{lambda_max, Feasibility, LambdaMax, BISECTION_WIDTH, GRID_POINTS, LAMBDA_CAP};
pub use search::{find_candidates, heuristic_pairs, SearchConfig};

use crate::channel::{compose, is_cptp, Channel, KrausSet};
use crate::elementary::{build_psi, psi_inverse_unchecked, ElementaryParams};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    ensure_unitary, hermitian_eig, inner, norm, trace_norm_hermitian, Complex, ComplexMatrix,
    Tolerance,
};

/// Which stage of the search produced a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidateSource {
    /// `x` is annihilated by the whole complement of the Kraus span.
    PerpKernel,
    /// `x` is annihilated by every criterion matrix.
    CriterionKernel,
    /// Found by numerical minimization.
    Heuristic,
    /// Read off a positive definite diagonal block.
    BlockDiagonal,
    /// Given by the caller.
    Supplied,
}

impl CandidateSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PerpKernel => "perp-kernel",
            Self::CriterionKernel => "criterion-kernel",
            Self::Heuristic => "heuristic",
            Self::BlockDiagonal => "block-diagonal",
            Self::Supplied => "supplied",
        }
    }
}

/// Orthonormal pair with its criterion residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePair {
    pub x: Vec<Complex>,
    pub x_perp: Vec<Complex>,
    pub orthogonality_defect: f64,
    pub necessary_residual: f64,
    pub sufficient_residual: f64,
    pub source: CandidateSource,
}

impl CandidatePair {
    pub fn evaluate(crit: &Criteria, x: Vec<Complex>, x_perp: Vec<Complex>, source: CandidateSource) -> Self {
        Self {
            orthogonality_defect: inner(&x, &x_perp).norm(),
            necessary_residual: crit.necessary_residual(&x, &x_perp),
            sufficient_residual: crit.sufficient_residual(&x, &x_perp),
            x,
            x_perp,
            source,
        }
    }

    /// Validates normalization and orthogonality, then evaluates.
    pub fn supplied(crit: &Criteria, x: Vec<Complex>, x_perp: Vec<Complex>, tol: &Tolerance) -> Result<Self> {
        validate_pair(&x, &x_perp, crit.dim(), tol)?;
        Ok(Self::evaluate(crit, x, x_perp, CandidateSource::Supplied))
    }
}

pub(crate) fn validate_pair(x: &[Complex], x_perp: &[Complex], n: usize, tol: &Tolerance) -> Result<()> {
    if x.len() != n || x_perp.len() != n {
        return Err(dim_mismatch(format!("vectors of length {n}"), format!("{} and {}", x.len(), x_perp.len())));
    }
    let slack = tol.eq_eps.max(1e-12) * 10.0;
    for (name, v) in [("x", x), ("x_perp", x_perp)] {
        if (norm(v) - 1.0).abs() > slack {
            return Err(Error::InvalidParameter(format!("{name} is not normalized")));
        }
    }
    if inner(x, x_perp).norm() > slack {
        return Err(Error::InvalidParameter("x and x_perp are not orthogonal".into()));
    }
    Ok(())
}

/// Result of one division step.
#[derive(Debug, Clone)]
pub struct DivisionCertificate {
    pub pair: CandidatePair,
    pub lambda_max: f64,
    pub rank_preserving: bool,
    pub chosen_lambda: f64,
    /// `Φ ∘ Ψ_λ⁻¹` at `chosen_lambda`.
    pub residual: Channel,
    pub rank_before: usize,
    pub rank_after: usize,
    pub rank_drop: bool,
    /// Trace norm of `Φ(|x><x|) − Φ(|x⊥><x⊥|)`.
    pub state_gap: f64,
}

impl DivisionCertificate {
    /// `Ψ_{chosen_lambda, x, x⊥}`.
    pub fn factor(&self, tol: &Tolerance) -> Result<Channel> {
        let p = ElementaryParams::new(self.pair.x.clone(), self.pair.x_perp.clone(), self.chosen_lambda, tol)?;
        build_psi(&p, tol)
    }

    /// `residual ∘ Ψ_λ`, which should reproduce the divided channel.
    pub fn recompose(&self, tol: &Tolerance) -> Result<Channel> {
        compose(&self.residual, &self.factor(tol)?, tol)
    }
}

/// Trace norm of `Φ(|x><x|) − Φ(|x⊥><x⊥|)`.
pub fn state_gap(ch: &Channel, x: &[Complex], x_perp: &[Complex], tol: &Tolerance) -> Result<f64> {
    let a = ch.apply(&ComplexMatrix::outer(x, x))?;
    let b = ch.apply(&ComplexMatrix::outer(x_perp, x_perp))?;
    trace_norm_hermitian(&(&a - &b).hermitian_part(), tol)
}

/// Smallest `λ` treated as a usable division.
pub const MIN_LAMBDA: f64 = 1e-10;

/// `λ` at which the residual is probed when reporting an infeasible pair.
pub const PROBE_LAMBDA: f64 = 1e-6;

/// Divides at a given `λ`. Fails with [`Error::Infeasible`] when the
/// residual is not CP within tolerance.
pub fn divide(ch: &Channel, pair: &CandidatePair, lambda: f64, tol: &Tolerance) -> Result<DivisionCertificate> {
    divide_with(ch, pair, lambda, None, tol)
}

fn divide_with(
    ch: &Channel,
    pair: &CandidatePair,
    lambda: f64,
    lm: Option<LambdaMax>,
    tol: &Tolerance,
) -> Result<DivisionCertificate> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::NotInvertible { lambda });
    }
    validate_pair(&pair.x, &pair.x_perp, ch.dim_in(), tol)?;
    let p = ElementaryParams::new(pair.x.clone(), pair.x_perp.clone(), lambda, tol)?;
    let choi = psi_inverse_unchecked(&p)
        .right_compose_choi(ch.choi(), ch.dim_out())
        .hermitian_part();
    let residual = Channel::from_choi(choi, ch.dim_in(), ch.dim_out(), tol)?;
    let rep = is_cptp(&residual, tol);
    if !rep.cp {
        return Err(Error::Infeasible {
            lambda,
            min_eigenvalue: rep.min_eigenvalue,
        });
    }
    if !rep.tp {
        return Err(Error::NotTracePreserving { defect: rep.tp_defect });
    }
    let rank_before = is_cptp(ch, tol).kraus_rank;
    let lm = match lm {
        Some(lm) => lm,
        None => lambda_max(ch, &pair.x, &pair.x_perp, tol)?,
    };
    Ok(DivisionCertificate {
        pair: pair.clone(),
        lambda_max: lm.value,
        rank_preserving: lm.rank_preserving,
        chosen_lambda: lambda,
        rank_before,
        rank_after: rep.kraus_rank,
        rank_drop: rep.kraus_rank < rank_before,
        state_gap: state_gap(ch, &pair.x, &pair.x_perp, tol)?,
        residual,
    })
}

/// Computes `λ_max`, picks `λ` (the maximum when the two output states
/// differ, otherwise `min(1/2, λ_max)`) and divides.
pub fn certify(ch: &Channel, pair: &CandidatePair, tol: &Tolerance) -> Result<DivisionCertificate> {
    let crit = Criteria::new(ch, tol)?;
    let lm = lambda_max(ch, &pair.x, &pair.x_perp, tol)?;
    // Below the tolerance floor a positive λ_max is not evidence of anything;
    // a failed necessary check rules out every λ > 0.
    if lm.value < MIN_LAMBDA || !crit.necessary(&pair.x, &pair.x_perp).pass {
        let c = Feasibility::new(ch, &pair.x, &pair.x_perp, tol)?.residual_choi(PROBE_LAMBDA);
        let min_eigenvalue = hermitian_eig(&c, tol)?.min_value();
        return Err(Error::Infeasible {
            lambda: PROBE_LAMBDA,
            min_eigenvalue,
        });
    }
    let gap = state_gap(ch, &pair.x, &pair.x_perp, tol)?;
    let lambda = if gap > tol.eq_eps { lm.value } else { lm.value.min(0.5) };
    divide_with(ch, pair, lambda, Some(lm), tol)
}

/// `(U† x, U† x⊥)`, the pair for `Ad_{V†} ∘ Φ ∘ Ad_U` matching `(x, x⊥)` for `Φ`.
pub fn unitary_transform_pair(
    x: &[Complex],
    x_perp: &[Complex],
    u: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(Vec<Complex>, Vec<Complex>)> {
    ensure_unitary(u, tol)?;
    let ud = u.adjoint();
    Ok((ud.mul_vec(x), ud.mul_vec(x_perp)))
}

/// `Ad_{V†} ∘ Φ ∘ Ad_U`, with Choi matrix `(U^T ⊗ V†) C (U^T ⊗ V†)†`.
pub fn unitary_transform_channel(
    ch: &Channel,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Channel> {
    ensure_unitary(u, tol)?;
    ensure_unitary(v, tol)?;
    let choi = crate::channel::choi_of_sandwich(
        ch.choi(),
        ch.dim_in(),
        ch.dim_out(),
        &KrausSet::single(v.adjoint()),
        &KrausSet::single(u.clone()),
    )?;
    Channel::from_choi(choi.hermitian_part(), ch.dim_in(), ch.dim_out(), tol)
}
