use chandiv::classical::{
    classical_criteria_agree, embed, random_stochastic, richman_schneider_check, StochasticMatrix,
};
use chandiv::divisibility::sufficient_check;
use chandiv::linalg::basis_vector;
use chandiv::{random, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Column `k` contains the support of column `j`, decided on the raw entries.
fn dominates(a: &StochasticMatrix, k: usize, j: usize) -> bool {
    (0..a.n()).all(|i| a.get(i, j) == 0.0 || a.get(i, k) > 0.0)
}

#[test]
fn basis_pair_criterion_matches_support_containment() {
    let t = tol();
    let mut rng = random::seeded(40);
    for trial in 0..30 {
        let n = 3 + trial % 2;
        let a = random_stochastic(n, 0.4, &mut rng);
        let ch = embed(&a, &t).unwrap();
        for k in 0..n {
            for j in 0..n {
                if j == k {
                    continue;
                }
                let pass = sufficient_check(&ch, &basis_vector(n, k), &basis_vector(n, j), &t)
                    .unwrap()
                    .pass;
                assert_eq!(pass, dominates(&a, k, j), "trial {trial}, pair ({k}, {j}): {a:?}");
            }
        }
    }
}

#[test]
fn random_patterns_agree() {
    let t = tol();
    let mut rng = random::seeded(41);
    for trial in 0..60 {
        let n = 3 + trial % 2;
        let a = random_stochastic(n, 0.5, &mut rng);
        let cmp = classical_criteria_agree(&a, &t).unwrap();
        assert!(cmp.agree, "{a:?}: {cmp:?}");
        if let Some((j, k)) = cmp.domination.witness {
            assert!(dominates(&a, j, k));
        }
    }
}

#[test]
fn positive_matrix_is_divisible_hint() {
    let t = tol();
    let a = StochasticMatrix::from_rows(
        &[&[0.2, 0.3, 0.5], &[0.3, 0.3, 0.25], &[0.5, 0.4, 0.25]],
        &t,
    )
    .unwrap();
    let rs = richman_schneider_check(&a, &t);
    assert!(rs.divisible_hint && rs.witness.is_some());
    assert!(classical_criteria_agree(&a, &t).unwrap().agree);
}
