use chandiv::channel::{choi_from_superop, compose, is_cptp, random_channel, Channel};
use chandiv::divisibility::{
    block_diag_candidates, certify, criterion_matrices, divide, find_candidates, lambda_max,
    necessary_check, state_gap, sufficient_check, unitary_transform_channel, unitary_transform_pair,
    CandidatePair, CandidateSource, Criteria, SearchConfig, LAMBDA_CAP,
};
use chandiv::elementary::{build_psi, psi_inverse_map, ElementaryParams};
use chandiv::fixtures::{pauli_mixture, planted_kernel_channel, qubit_rank3};
use chandiv::linalg::{basis_vector, inner, kernel_basis, numerical_rank, pauli, r, Complex, ComplexMatrix};
use chandiv::{random, Error, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn e(n: usize, k: usize) -> Vec<Complex> {
    basis_vector(n, k)
}

fn supplied(ch: &Channel, x: Vec<Complex>, xp: Vec<Complex>) -> CandidatePair {
    let crit = Criteria::new(ch, &tol()).unwrap();
    CandidatePair::supplied(&crit, x, xp, &tol()).unwrap()
}

fn random_pair(n: usize, rng: &mut random::SeededRng) -> (Vec<Complex>, Vec<Complex>) {
    let x = random::unit_vector(n, rng);
    let w = random::unit_vector(n, rng);
    let p = inner(&x, &w);
    let v: Vec<Complex> = w.iter().zip(&x).map(|(a, b)| a - p * b).collect();
    let nv = chandiv::linalg::norm(&v);
    (x, v.into_iter().map(|z| z / nv).collect())
}

#[test]
fn rank3_qubit_lambda_max_is_one_sixth() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let lm = lambda_max(&ch, &e(2, 1), &e(2, 0), &t).unwrap();
    assert!((lm.value - 1.0 / 6.0).abs() < 1e-9, "{}", lm.value);
    assert!(!lm.rank_preserving && lm.monotone_on_grid);
}

#[test]
fn rank3_qubit_division_reproduces_displayed_factors() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let pair = supplied(&ch, e(2, 1), e(2, 0));
    let cert = divide(&ch, &pair, 1.0 / 6.0, &t).unwrap();
    assert_eq!((cert.rank_before, cert.rank_after), (3, 2));
    assert!(cert.rank_drop);

    let s = cert.residual.superop();
    let q = (2.0f64 / 15.0).sqrt();
    let expected_res = ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.6],
        &[0.0, q, 0.0, 0.4],
        &[0.0, 0.0, q, 0.4],
        &[0.0, 0.0, 0.0, 0.4],
    ]);
    assert!(s.approx_eq(&expected_res, 1e-9), "{s:?}");

    let f = cert.factor(&t).unwrap();
    let h = (5.0f64 / 6.0).sqrt();
    let expected_psi = ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 1.0 / 6.0],
        &[0.0, h, 0.0, 0.0],
        &[0.0, 0.0, h, 0.0],
        &[0.0, 0.0, 0.0, 5.0 / 6.0],
    ]);
    assert!(f.superop().approx_eq(&expected_psi, 1e-12));
    assert!(cert.recompose(&t).unwrap().choi().approx_eq(ch.choi(), 1e-9));
}

#[test]
fn rank3_qubit_search_finds_the_pair() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let pairs = find_candidates(&ch, &SearchConfig::default(), &t).unwrap();
    assert!(!pairs.is_empty());
    let best = &pairs[0];
    assert!(inner(&best.x, &e(2, 1)).norm() > 1.0 - 1e-9);
    assert!(inner(&best.x_perp, &e(2, 0)).norm() > 1.0 - 1e-9);
    assert_eq!(best.source, CandidateSource::PerpKernel);
    let cert = certify(&ch, best, &t).unwrap();
    assert!((cert.chosen_lambda - 1.0 / 6.0).abs() < 1e-9);
}

#[test]
fn rank3_qubit_checks() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let nec = necessary_check(&ch, &e(2, 1), &e(2, 0), &t).unwrap();
    let suf = sufficient_check(&ch, &e(2, 1), &e(2, 0), &t).unwrap();
    assert!(nec.pass && suf.pass);
    assert!(nec.cross_check < 1e-12 && suf.cross_check < 1e-12);
    let bad = sufficient_check(&ch, &e(2, 0), &e(2, 1), &t).unwrap();
    assert!(!bad.pass && bad.cross_check > 1e-3);
}

#[test]
fn block_diagonal_pair_for_rank3_qubit() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let pairs = block_diag_candidates(&ch, &pauli::x(), &ComplexMatrix::identity(2), &t).unwrap();
    assert!(!pairs.is_empty());
    let p = &pairs[0];
    assert!(inner(&p.x, &e(2, 1)).norm() > 1.0 - 1e-12);
    assert!(inner(&p.x_perp, &e(2, 0)).norm() > 1.0 - 1e-12);
    assert!(p.sufficient_residual < 1e-12);
}

#[test]
fn block_diagonal_rejects_small_blocks() {
    let t = tol();
    let c = ComplexMatrix::diag_real(&[0.0, 1.0, 1.0, 0.0]);
    let ch = Channel::from_choi(c, 2, 2, &t).unwrap();
    let id = ComplexMatrix::identity(2);
    assert!(matches!(block_diag_candidates(&ch, &id, &id, &t), Err(Error::NoQualifyingBlock)));
}

#[test]
fn block_diagonal_with_leading_positive_block() {
    // Choi = X1 ⊕ 0 with X1 > 0 of size n² − n: the last input column is free
    let t = tol();
    let n = 2;
    let mut rng = random::seeded(12);
    let g = random::gaussian_matrix(2, 2, &mut rng);
    let mut x1 = &(&g * &g.adjoint()) + &ComplexMatrix::identity(2).scale_real(0.1);
    // rescale so that the partial trace is the identity: only block (0,0) is nonzero
    let tr = x1.trace().re;
    x1 = x1.scale_real(1.0 / tr);
    let mut c = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            c[(i, j)] = x1[(i, j)];
        }
    }
    // input |1> goes to |0><0|, keeping the map trace preserving
    c[(2, 2)] = r(1.0);
    let ch = Channel::from_choi(c, n, n, &t).unwrap();
    assert!(is_cptp(&ch, &t).tp);
    let id = ComplexMatrix::identity(2);
    let pairs = block_diag_candidates(&ch, &id, &id, &t).unwrap();
    assert!(pairs.iter().all(|p| p.sufficient_residual < 1e-12));
    assert!(pairs.iter().any(|p| inner(&p.x, &e(2, 0)).norm() > 1.0 - 1e-12));
}

#[test]
fn pauli_mixture_has_no_certificate() {
    let t = tol();
    let ch = pauli_mixture(0.6, 0.2, &t).unwrap();
    let mats = criterion_matrices(&ch, &t).unwrap();
    assert_eq!(mats.len(), 3);
    assert!(find_candidates(&ch, &SearchConfig::default(), &t).unwrap().is_empty());
    for k in 0..40 {
        for l in 0..40 {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / 40.0;
            let ph = 2.0 * std::f64::consts::PI * l as f64 / 40.0;
            let x = vec![r((th / 2.0).cos()), Complex::from_polar((th / 2.0).sin(), ph)];
            let xp = vec![-x[1].conj(), x[0].conj()];
            assert!(!necessary_check(&ch, &x, &xp, &t).unwrap().pass);
        }
    }
}

#[test]
fn full_rank_channel_is_vacuous_and_divides_with_rank_drop() {
    let t = tol();
    let ch = random_channel(2, 4, 31, &t).unwrap();
    assert!(criterion_matrices(&ch, &t).unwrap().is_empty());
    let pairs = find_candidates(&ch, &SearchConfig::default(), &t).unwrap();
    assert_eq!(pairs.len(), 2);
    let cert = certify(&ch, &pairs[0], &t).unwrap();
    assert!(cert.state_gap > 1e-6);
    assert_eq!((cert.rank_before, cert.rank_after), (4, 3));
    // grid scan oracle for the bisection result
    let lm = cert.lambda_max;
    let p = ElementaryParams::new(pairs[0].x.clone(), pairs[0].x_perp.clone(), 0.0, &t).unwrap();
    let mut scan = 0.0;
    for k in 0..1000 {
        let l = k as f64 / 1000.0;
        let inv = psi_inverse_map(&p.with_lambda(l).unwrap(), &t).unwrap();
        let c = inv.right_compose_choi(ch.choi(), 2).hermitian_part();
        if chandiv::linalg::min_eigenvalue(&c, &t).unwrap() >= 0.0 {
            scan = l;
        } else {
            break;
        }
    }
    assert!((lm - scan).abs() <= 1e-3 + 1e-6, "{lm} vs {scan}");
    assert!(lm >= scan);
}

#[test]
fn division_at_zero_returns_the_channel() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let pair = supplied(&ch, e(2, 1), e(2, 0));
    let cert = divide(&ch, &pair, 0.0, &t).unwrap();
    assert!(cert.residual.choi().approx_eq(ch.choi(), 1e-15));
}

#[test]
fn infeasible_division_reports_min_eigenvalue() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let pair = supplied(&ch, e(2, 1), e(2, 0));
    match divide(&ch, &pair, 0.3, &t) {
        Err(Error::Infeasible { lambda, min_eigenvalue }) => {
            assert_eq!(lambda, 0.3);
            assert!(min_eigenvalue < 0.0);
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
    let wrong = supplied(&ch, e(2, 0), e(2, 1));
    assert!(lambda_max(&ch, &wrong.x, &wrong.x_perp, &t).unwrap().value < 1e-6);
    match certify(&ch, &wrong, &t) {
        Err(Error::Infeasible { min_eigenvalue, .. }) => assert!(min_eigenvalue < 0.0),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn failing_necessary_check_gives_zero_lambda() {
    let t = tol();
    let mut rng = random::seeded(77);
    for seed in 0..5 {
        let ch = random_channel(3, 4, seed, &t).unwrap();
        let (x, xp) = random_pair(3, &mut rng);
        let nec = necessary_check(&ch, &x, &xp, &t).unwrap();
        assert!(!nec.pass);
        assert!(lambda_max(&ch, &x, &xp, &t).unwrap().value < 1e-6);
    }
}

#[test]
fn two_term_formula_matches_superop_product() {
    let t = tol();
    let mut rng = random::seeded(3);
    for seed in 0..5 {
        let (ch, x) = planted_kernel_channel(3, 3, &mut rng, &t).unwrap();
        let xp = chandiv::linalg::orthogonal_completion(std::slice::from_ref(&x), 3).unwrap();
        let lambda = 0.05 * (seed + 1) as f64;
        let p = ElementaryParams::new(x, xp, lambda, &t).unwrap();
        let inv = psi_inverse_map(&p, &t).unwrap();
        let direct = inv.right_compose_choi(ch.choi(), 3);
        let via = choi_from_superop(&(ch.superop() * &inv.superop()), 3, 3);
        assert!(direct.approx_eq(&via, 1e-10));
    }
}

#[test]
fn planted_channels_certify_with_recomposition_and_kernel_preservation() {
    let t = tol();
    let mut rng = random::seeded(5);
    for _ in 0..10 {
        let (ch, x) = planted_kernel_channel(3, 2, &mut rng, &t).unwrap();
        let xp = chandiv::linalg::orthogonal_completion(std::slice::from_ref(&x), 3).unwrap();
        let pair = supplied(&ch, x, xp);
        assert!(pair.sufficient_residual < 1e-12);
        let cert = certify(&ch, &pair, &t).unwrap();
        assert!(cert.lambda_max > 1e-8);
        let rep = is_cptp(&cert.residual, &t);
        assert!(rep.cp && rep.tp);
        if cert.state_gap > 1e-8 {
            assert!(cert.rank_after < cert.rank_before);
        }
        let back = cert.recompose(&t).unwrap();
        assert!(back.choi().approx_eq(ch.choi(), 1e-9));
        // kernel does not shrink strictly inside the feasible interval
        let half = divide(&ch, &pair, 0.5 * cert.lambda_max, &t).unwrap();
        let k0 = kernel_basis(ch.choi(), &t).unwrap().len();
        let k1 = kernel_basis(half.residual.choi(), &t).unwrap().len();
        assert!(k1 >= k0);
        // the Choi-kernel compression form of the necessary condition
        let crit = Criteria::new(&ch, &t).unwrap();
        assert!(crit.kernel_compression_residual(&pair.x, &pair.x_perp) < 1e-12);
    }
}

#[test]
fn kernel_compression_detects_failure() {
    let t = tol();
    let ch = pauli_mixture(0.6, 0.2, &t).unwrap();
    let crit = Criteria::new(&ch, &t).unwrap();
    let v = crit.kernel_compression_residual(&e(2, 0), &e(2, 1));
    let nr = crit.necessary_residual(&e(2, 0), &e(2, 1));
    assert!(v > 1e-3);
    assert!(nr > 1e-3);
}

#[test]
fn unitary_covariance_of_lambda_max_and_checks() {
    let t = tol();
    let mut rng = random::seeded(8);
    for _ in 0..5 {
        let (ch, x) = planted_kernel_channel(3, 3, &mut rng, &t).unwrap();
        let xp = chandiv::linalg::orthogonal_completion(std::slice::from_ref(&x), 3).unwrap();
        let u = random::unitary(3, &mut rng);
        let v = random::unitary(3, &mut rng);
        let moved = unitary_transform_channel(&ch, &u, &v, &t).unwrap();
        let (y, yp) = unitary_transform_pair(&x, &xp, &u, &t).unwrap();
        let a = lambda_max(&ch, &x, &xp, &t).unwrap().value;
        let b = lambda_max(&moved, &y, &yp, &t).unwrap().value;
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        assert_eq!(
            sufficient_check(&ch, &x, &xp, &t).unwrap().pass,
            sufficient_check(&moved, &y, &yp, &t).unwrap().pass
        );
    }
    let id = ComplexMatrix::identity(2);
    let (a, b) = unitary_transform_pair(&e(2, 1), &e(2, 0), &id, &t).unwrap();
    assert_eq!((a, b), (e(2, 1), e(2, 0)));
    assert!(unitary_transform_pair(&e(2, 1), &e(2, 0), &ComplexMatrix::diag_real(&[1.0, 2.0]), &t).is_err());
}

#[test]
fn pauli_x_maps_rank3_pair() {
    let t = tol();
    let ch = qubit_rank3(&t).unwrap();
    let (y, yp) = unitary_transform_pair(&e(2, 1), &e(2, 0), &pauli::x(), &t).unwrap();
    assert!(inner(&y, &e(2, 0)).norm() > 1.0 - 1e-15);
    let moved = unitary_transform_channel(&ch, &pauli::x(), &ComplexMatrix::identity(2), &t).unwrap();
    assert!(sufficient_check(&moved, &y, &yp, &t).unwrap().pass);
}

#[test]
fn elementary_channel_has_cap_for_its_own_pair_at_full_damping() {
    // Ψ_1 ∘ Ψ_λ⁻¹ = Ψ_1 is CP for every λ < 1
    let t = tol();
    let p = ElementaryParams::new(e(2, 0), e(2, 1), 1.0, &t).unwrap();
    let ch = build_psi(&p, &t).unwrap();
    let lm = lambda_max(&ch, &e(2, 0), &e(2, 1), &t).unwrap();
    assert!(lm.rank_preserving);
    assert_eq!(lm.value, LAMBDA_CAP);
    assert!(state_gap(&ch, &e(2, 0), &e(2, 1), &t).unwrap() < 1e-12);
    let pair = supplied(&ch, e(2, 0), e(2, 1));
    let cert = certify(&ch, &pair, &t).unwrap();
    assert_eq!(cert.chosen_lambda, 0.5);
    let back = compose(&cert.residual, &cert.factor(&t).unwrap(), &t).unwrap();
    assert!(back.choi().approx_eq(ch.choi(), 1e-9));
    assert_eq!(numerical_rank(cert.residual.choi(), &t).unwrap(), 2);
}
