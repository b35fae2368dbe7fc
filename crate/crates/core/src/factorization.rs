//! Repeated division: `Φ = R ∘ Ψ_m ∘ … ∘ Ψ_1`.

use crate::channel::{compose, ensure_cptp, is_cptp, is_unitary_channel, Channel};
use crate::divisibility::{
    certify, find_candidates, state_gap, CandidatePair, DivisionCertificate, SearchConfig,
};
use crate::elementary::{build_psi, nontrivial_split, ElementaryParams};
use crate::error::Result;
use crate::linalg::{
    hermitian_eig, inner, kernel_basis, orthogonal_completion, unvec, ComplexMatrix, Tolerance,
};
use crate::subspace::common_kernel;

/// Why [`factor`] stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalReason {
    ResidualIsElementary,
    /// The residual is unitary, or the last division would have left a
    /// unitary residual and was split into two nonunitary factors.
    ResidualIsUnitary,
    NoCertificateFound,
    MaxSteps,
}

impl TerminalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ResidualIsElementary => "residual_is_elementary",
            Self::ResidualIsUnitary => "residual_is_unitary",
            Self::NoCertificateFound => "no_certificate_found",
            Self::MaxSteps => "max_steps",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorStep {
    pub pair: CandidatePair,
    pub lambda: f64,
    pub lambda_max: f64,
    pub rank_before: usize,
    pub rank_after: usize,
    pub state_gap: f64,
    /// The step was halved to keep the residual nonunitary.
    pub split: bool,
}

#[derive(Debug, Clone)]
pub struct FactorizationTrace {
    pub original: Channel,
    pub steps: Vec<FactorStep>,
    pub residual: Channel,
    pub terminal: TerminalReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FactorConfig {
    pub search: SearchConfig,
    /// Defaults to `n²`.
    pub max_steps: Option<usize>,
}

/// Parameters `(x, y, λ)` with `Ψ_{λ,x,y} = ch` within `1e-8` (Choi max
/// norm), if `ch` has that form with `λ > 0`.
pub fn is_elementary(ch: &Channel, tol: &Tolerance) -> Option<ElementaryParams> {
    let n = ch.dim_in();
    if n != ch.dim_out() || n < 2 || is_cptp(ch, tol).kraus_rank != 2 {
        return None;
    }
    // fixed points are the X with X x = 0 = x† X
    let shifted = ch.superop() - &ComplexMatrix::identity(n * n);
    let gram = &shifted.adjoint() * &shifted;
    let fixed = kernel_basis(&gram.hermitian_part(), tol).ok()?;
    if fixed.len() != (n - 1) * (n - 1) {
        return None;
    }
    let mut mats = Vec::with_capacity(2 * fixed.len());
    for v in &fixed {
        let x = unvec(v, n, n).ok()?;
        mats.push(x.adjoint());
        mats.push(x);
    }
    let ker = common_kernel(&mats, tol).ok()?;
    if ker.len() != 1 {
        return None;
    }
    let x = ker.into_iter().next()?;
    let z = orthogonal_completion(std::slice::from_ref(&x), n)?;
    let img = ch.apply(&ComplexMatrix::outer(&x, &z)).ok()?;
    let s = inner(&x, &img.mul_vec(&z));
    let lambda = (1.0 - s.norm_sqr()).clamp(0.0, 1.0);
    if lambda <= tol.eq_eps {
        return None;
    }
    let px = ComplexMatrix::outer(&x, &x);
    let rest = &ch.apply(&px).ok()? - &px.scale_real(1.0 - lambda);
    let eig = hermitian_eig(&rest.hermitian_part(), tol).ok()?;
    let y = eig.vector(n - 1);
    let p = ElementaryParams::new(x, y, lambda, tol).ok()?;
    let rebuilt = build_psi(&p, tol).ok()?;
    (rebuilt.choi().max_abs_diff(ch.choi()) <= 1e-8).then_some(p)
}

fn step_factor(step: &FactorStep, tol: &Tolerance) -> Result<Channel> {
    let p = ElementaryParams::new(step.pair.x.clone(), step.pair.x_perp.clone(), step.lambda, tol)?;
    build_psi(&p, tol)
}

/// Divides repeatedly until the residual is elementary or unitary, the
/// search finds nothing, or the step budget runs out.
pub fn factor(ch: &Channel, cfg: &FactorConfig, tol: &Tolerance) -> Result<FactorizationTrace> {
    ensure_cptp(ch, tol)?;
    let n = ch.dim_in();
    let max_steps = cfg.max_steps.unwrap_or(n * n);
    let mut current = ch.clone();
    let mut steps = Vec::new();
    let terminal = loop {
        if is_unitary_channel(&current, tol) {
            break TerminalReason::ResidualIsUnitary;
        }
        if is_elementary(&current, tol).is_some() {
            break TerminalReason::ResidualIsElementary;
        }
        if steps.len() >= max_steps {
            break TerminalReason::MaxSteps;
        }
        let pairs = find_candidates(&current, &cfg.search, tol)?;
        let gaps: Vec<f64> = pairs
            .iter()
            .map(|p| state_gap(&current, &p.x, &p.x_perp, tol))
            .collect::<Result<_>>()?;
        // pairs whose output states differ allow a rank drop; keep residual order otherwise
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by_key(|&i| gaps[i] <= tol.eq_eps);
        let cert = order.iter().find_map(|&i| certify(&current, &pairs[i], tol).ok());
        let Some(cert) = cert else {
            break TerminalReason::NoCertificateFound;
        };
        if is_unitary_channel(&cert.residual, tol) {
            let (step, residual) = split_step(cert, tol)?;
            steps.push(step);
            current = residual;
            break TerminalReason::ResidualIsUnitary;
        }
        steps.push(FactorStep {
            pair: cert.pair,
            lambda: cert.chosen_lambda,
            lambda_max: cert.lambda_max,
            rank_before: cert.rank_before,
            rank_after: cert.rank_after,
            state_gap: cert.state_gap,
            split: false,
        });
        current = cert.residual;
    };
    Ok(FactorizationTrace {
        original: ch.clone(),
        steps,
        residual: current,
        terminal,
    })
}

/// Rewrites `Φ = U ∘ Ψ_λ` (unitary `U`) as `(U ∘ Ψ_a) ∘ Ψ_b` with both
/// `a`, `b` in `(0, 1)` composing to `λ`.
fn split_step(cert: DivisionCertificate, tol: &Tolerance) -> Result<(FactorStep, Channel)> {
    let (a, b) = nontrivial_split(cert.chosen_lambda)?;
    let pa = ElementaryParams::new(cert.pair.x.clone(), cert.pair.x_perp.clone(), a, tol)?;
    let residual = compose(&cert.residual, &build_psi(&pa, tol)?, tol)?;
    let step = FactorStep {
        pair: cert.pair,
        lambda: b,
        lambda_max: cert.lambda_max,
        rank_before: cert.rank_before,
        rank_after: is_cptp(&residual, tol).kraus_rank,
        state_gap: cert.state_gap,
        split: true,
    };
    Ok((step, residual))
}

/// `R ∘ Ψ_m ∘ … ∘ Ψ_1`
pub fn recompose(trace: &FactorizationTrace, tol: &Tolerance) -> Result<Channel> {
    let mut s = trace.residual.superop().clone();
    for step in trace.steps.iter().rev() {
        s = &s * step_factor(step, tol)?.superop();
    }
    let n = trace.original.dim_in();
    Channel::from_superop(&s, n, trace.original.dim_out(), tol)
}

/// Recomposition matches the original within `max(1, steps)·1e-9`, the
/// residual is CPTP, every `λ` lies in `[0, 1)` and ranks never grow.
pub fn verify_trace(trace: &FactorizationTrace, tol: &Tolerance) -> bool {
    let steps_ok = trace
        .steps
        .iter()
        .all(|s| (0.0..1.0).contains(&s.lambda) && s.rank_after <= s.rank_before);
    if !steps_ok || ensure_cptp(&trace.residual, tol).is_err() {
        return false;
    }
    let bound = trace.steps.len().max(1) as f64 * 1e-9;
    match recompose(trace, tol) {
        Ok(ch) => ch.choi().max_abs_diff(trace.original.choi()) <= bound,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::fixtures::{pauli_mixture, qubit_rank3};
    use crate::linalg::basis_vector;
    use crate::random;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn detects_elementary_channels() {
        let t = tol();
        let mut rng = random::seeded(6);
        for n in 2..=4 {
            let x = random::unit_vector(n, &mut rng);
            let y = random::unit_vector(n, &mut rng);
            let p = ElementaryParams::new(x.clone(), y, 0.37, &t).unwrap();
            let ch = build_psi(&p, &t).unwrap();
            let found = is_elementary(&ch, &t).expect("elementary");
            assert!((found.lambda() - 0.37).abs() < 1e-9);
            assert!(inner(found.x(), &x).norm() > 1.0 - 1e-9);
        }
        assert!(is_elementary(&Channel::identity(2), &t).is_none());
        assert!(is_elementary(&qubit_rank3(&t).unwrap(), &t).is_none());
        assert!(is_elementary(&random_channel(3, 2, 1, &t).unwrap(), &t).is_none());
    }

    #[test]
    fn elementary_input_gives_zero_steps() {
        let t = tol();
        let p = ElementaryParams::new(basis_vector(2, 0), basis_vector(2, 1), 0.3, &t).unwrap();
        let tr = factor(&build_psi(&p, &t).unwrap(), &FactorConfig::default(), &t).unwrap();
        assert!(tr.steps.is_empty());
        assert_eq!(tr.terminal, TerminalReason::ResidualIsElementary);
        assert!(verify_trace(&tr, &t));
    }

    #[test]
    fn rank3_qubit_factors_in_one_step() {
        let t = tol();
        let tr = factor(&qubit_rank3(&t).unwrap(), &FactorConfig::default(), &t).unwrap();
        assert_eq!(tr.steps.len(), 1);
        assert!((tr.steps[0].lambda - 1.0 / 6.0).abs() < 1e-9);
        assert_eq!((tr.steps[0].rank_before, tr.steps[0].rank_after), (3, 2));
        assert!(verify_trace(&tr, &t));
    }

    #[test]
    fn pauli_mixture_stops_without_certificate() {
        let t = tol();
        let tr = factor(&pauli_mixture(0.6, 0.2, &t).unwrap(), &FactorConfig::default(), &t).unwrap();
        assert!(tr.steps.is_empty());
        assert_eq!(tr.terminal, TerminalReason::NoCertificateFound);
        assert!(verify_trace(&tr, &t));
    }

    #[test]
    fn tampered_lambda_fails_verification() {
        let t = tol();
        let mut tr = factor(&random_channel(2, 4, 7, &t).unwrap(), &FactorConfig::default(), &t).unwrap();
        assert!(!tr.steps.is_empty());
        assert!(verify_trace(&tr, &t));
        tr.steps[0].lambda = (tr.steps[0].lambda + 0.05).min(0.99);
        assert!(!verify_trace(&tr, &t));
    }

    #[test]
    fn unitary_input_and_non_cptp_input() {
        let t = tol();
        let tr = factor(&Channel::identity(3), &FactorConfig::default(), &t).unwrap();
        assert_eq!(tr.terminal, TerminalReason::ResidualIsUnitary);
        assert!(tr.steps.is_empty());
        let bad = Channel::from_choi(ComplexMatrix::identity(4).scale_real(0.3), 2, 2, &t).unwrap();
        assert!(factor(&bad, &FactorConfig::default(), &t).is_err());
    }

    #[test]
    fn unitary_residual_is_split_into_nonunitary_factors() {
        let t = tol();
        let u = random::unitary(2, &mut random::seeded(9));
        let p = ElementaryParams::new(basis_vector(2, 0), basis_vector(2, 1), 0.4, &t).unwrap();
        let phi = compose(&Channel::unitary(&u, &t).unwrap(), &build_psi(&p, &t).unwrap(), &t).unwrap();
        let crit = crate::divisibility::Criteria::new(&phi, &t).unwrap();
        let pair = CandidatePair::supplied(&crit, basis_vector(2, 0), basis_vector(2, 1), &t).unwrap();
        let cert = crate::divisibility::divide(&phi, &pair, 0.4, &t).unwrap();
        assert!(is_unitary_channel(&cert.residual, &t));
        let (step, residual) = split_step(cert, &t).unwrap();
        assert!((step.lambda - 0.2).abs() < 1e-15);
        assert!(!is_unitary_channel(&residual, &t));
        let tr = FactorizationTrace {
            original: phi,
            steps: vec![step],
            residual,
            terminal: TerminalReason::ResidualIsUnitary,
        };
        assert!(verify_trace(&tr, &t));
    }
}
