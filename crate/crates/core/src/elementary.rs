//! The two-Kraus elementary channel
//! `Ψ(ρ) = K ρ K† + L ρ L†` with `K = 1 − (1 − sqrt(1−λ))|x><x|` and
//! `L = sqrt(λ)|y><x|`, together with its inverse map.

use crate::channel::{weighted_conjugation, Channel, KrausSet};
use crate::error::{Error, Result};
use crate::linalg::{inner, norm, Complex, ComplexMatrix, Tolerance};

/// Parameters `(x, y, λ)`; `x` and `y` are unit vectors, linearly independent.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryParams {
    x: Vec<Complex>,
    y: Vec<Complex>,
    lambda: f64,
    orthogonal: bool,
}

impl ElementaryParams {
    pub fn new(x: Vec<Complex>, y: Vec<Complex>, lambda: f64, tol: &Tolerance) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "x and y must share a dimension of at least 2 (got {} and {})",
                x.len(),
                y.len()
            )));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
        }
        for (name, v) in [("x", &x), ("y", &y)] {
            let nv = norm(v);
            if v.iter().any(|z| !z.is_finite()) {
                return Err(Error::NonFinite);
            }
            if (nv - 1.0).abs() > tol.eq_eps.max(1e-12) * 10.0 {
                return Err(Error::InvalidParameter(format!("{name} has norm {nv}, expected 1")));
            }
        }
        let overlap = inner(&x, &y).norm();
        if 1.0 - overlap <= tol.eq_eps {
            return Err(Error::InvalidParameter("x and y are linearly dependent".into()));
        }
        Ok(Self {
            orthogonal: overlap <= tol.eq_eps,
            x,
            y,
            lambda,
        })
    }

    pub fn x(&self) -> &[Complex] {
        &self.x
    }

    pub fn y(&self) -> &[Complex] {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Same `x`, `y` with a different `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(Self {
            lambda,
            ..self.clone()
        })
    }

    /// Unit vector in `span{x, y}` orthogonal to `x`, phased so that
    /// `<x⊥|y>` is real and positive.
    pub fn x_perp(&self) -> Vec<Complex> {
        let p = inner(&self.x, &self.y);
        let w: Vec<Complex> = self.y.iter().zip(&self.x).map(|(yi, xi)| yi - p * xi).collect();
        let nw = norm(&w);
        w.into_iter().map(|z| z / nw).collect()
    }

    fn proj_x(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.x, &self.x)
    }

    /// `K_λ`
    pub fn k_op(&self) -> ComplexMatrix {
        let n = self.dim();
        &ComplexMatrix::identity(n) - &self.proj_x().scale_real(1.0 - (1.0 - self.lambda).sqrt())
    }

    /// `L_λ`
    pub fn l_op(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.y, &self.x).scale_real(self.lambda.sqrt())
    }

    /// Kraus pair `(K_λ, L_λ)`; just `K_0 = 1` when `λ = 0`.
    pub fn kraus(&self) -> KrausSet {
        if self.lambda == 0.0 {
            return KrausSet::single(ComplexMatrix::identity(self.dim()));
        }
        KrausSet::new(vec![self.k_op(), self.l_op()]).expect("equal shapes")
    }
}

/// `Ψ_{λ,x,y}` as a channel.
pub fn build_psi(p: &ElementaryParams, tol: &Tolerance) -> Result<Channel> {
    Channel::from_kraus(&p.kraus(), tol)
}

/// `A ↦ K⁻¹ A K⁻¹† − L̂ A L̂†`, the inverse of an elementary channel.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseMap {
    pub k_inv: ComplexMatrix,
    pub l_hat: ComplexMatrix,
}

impl InverseMap {
    pub fn superop(&self) -> ComplexMatrix {
        &self.k_inv.conj().kron(&self.k_inv) - &self.l_hat.conj().kron(&self.l_hat)
    }

    pub fn choi(&self) -> ComplexMatrix {
        let n = self.k_inv.rows();
        crate::channel::choi_from_superop(&self.superop(), n, n)
    }

    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let t1 = &(&self.k_inv * a) * &self.k_inv.adjoint();
        let t2 = &(&self.l_hat * a) * &self.l_hat.adjoint();
        &t1 - &t2
    }

    /// Choi matrix of `Φ ∘ Ψ⁻¹` for `Φ: n -> m` given by its Choi matrix:
    /// `((K⁻¹)^T ⊗ 1) C ((K⁻¹)^T ⊗ 1)† − (L̂^T ⊗ 1) C (L̂^T ⊗ 1)†`.
    pub fn right_compose_choi(&self, phi_choi: &ComplexMatrix, dim_out: usize) -> ComplexMatrix {
        let id = ComplexMatrix::identity(dim_out);
        weighted_conjugation(
            phi_choi,
            &[
                (1.0, self.k_inv.transpose().kron(&id)),
                (-1.0, self.l_hat.transpose().kron(&id)),
            ],
        )
    }
}

/// Inverse of `Ψ_{λ,x,y}`; fails for `λ` within `eq_eps` of 1.
pub fn psi_inverse_map(p: &ElementaryParams, tol: &Tolerance) -> Result<InverseMap> {
    let lambda = p.lambda;
    if 1.0 - lambda <= tol.eq_eps {
        return Err(Error::NotInvertible { lambda });
    }
    Ok(psi_inverse_unchecked(p))
}

/// [`psi_inverse_map`] without the distance-to-one guard; `λ < 1` required.
pub(crate) fn psi_inverse_unchecked(p: &ElementaryParams) -> InverseMap {
    let lambda = p.lambda;
    debug_assert!(lambda < 1.0);
    let n = p.dim();
    let px = p.proj_x();
    let k_inv = &ComplexMatrix::identity(n) - &px.scale_real(1.0 - 1.0 / (1.0 - lambda).sqrt());
    let l_hat = if p.orthogonal {
        p.l_op().scale_real(1.0 / (1.0 - lambda).sqrt())
    } else {
        let xp = p.x_perp();
        let a = inner(&p.x, &p.y);
        let b = inner(&xp, &p.y);
        let d = (1.0 - lambda * b.norm_sqr()).sqrt();
        let s = lambda.sqrt();
        let t1 = px.scale(a * (s / ((1.0 - lambda).sqrt() * d)));
        let t2 = ComplexMatrix::outer(&xp, &p.x).scale(b * (s / d));
        &t1 + &t2
    };
    InverseMap { k_inv, l_hat }
}

/// `λ + μ − λμ`, the parameter of `Ψ_λ ∘ Ψ_μ` for orthogonal `x`, `y`.
pub fn compose_lambda(lambda: f64, mu: f64) -> Result<f64> {
    for v in [lambda, mu] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("lambda {v} outside [0, 1]")));
        }
    }
    Ok(lambda + mu - lambda * mu)
}

/// `(λ/(2−λ), λ/2)`: both strictly inside `(0, 1)` and composing to `λ`.
pub fn nontrivial_split(lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split needs lambda in (0, 1), got {lambda}"
        )));
    }
    Ok((lambda / (2.0 - lambda), lambda / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::is_cptp;
    use crate::linalg::{basis_vector, c, psd_check, r};
    use crate::random;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn unit(v: &[Complex]) -> Vec<Complex> {
        let nv = norm(v);
        v.iter().map(|z| z / nv).collect()
    }

    fn orth(n: usize, lambda: f64) -> ElementaryParams {
        ElementaryParams::new(basis_vector(n, 1), basis_vector(n, 0), lambda, &tol()).unwrap()
    }

    #[test]
    fn validation() {
        let t = tol();
        let e0 = basis_vector(2, 0);
        assert!(ElementaryParams::new(e0.clone(), e0.clone(), 0.5, &t).is_err());
        assert!(ElementaryParams::new(e0.clone(), basis_vector(2, 1), 1.5, &t).is_err());
        assert!(ElementaryParams::new(e0.clone(), vec![r(1.0), r(1.0)], 0.5, &t).is_err());
        assert!(ElementaryParams::new(e0.clone(), basis_vector(3, 1), 0.5, &t).is_err());
        assert!(orth(2, 0.3).is_orthogonal());
    }

    #[test]
    fn lambda_zero_is_identity() {
        let t = tol();
        let ch = build_psi(&orth(3, 0.0), &t).unwrap();
        assert!(ch.choi().approx_eq(Channel::identity(3).choi(), 1e-15));
        let inv = psi_inverse_map(&orth(3, 0.0), &t).unwrap();
        assert!(inv.superop().approx_eq(&ComplexMatrix::identity(9), 1e-15));
    }

    #[test]
    fn kraus_pair_for_x_one_y_zero() {
        let p = orth(2, 0.36);
        let ks = p.kraus();
        assert!(ks.ops()[0].approx_eq(&ComplexMatrix::diag_real(&[1.0, 0.8]), 1e-15));
        let l = ComplexMatrix::from_real_rows(&[&[0.0, 0.6], &[0.0, 0.0]]);
        assert!(ks.ops()[1].approx_eq(&l, 1e-15));
    }

    #[test]
    fn image_of_x_projector() {
        let t = tol();
        let mut rng = random::seeded(3);
        let x = random::unit_vector(3, &mut rng);
        let y = random::unit_vector(3, &mut rng);
        let p = ElementaryParams::new(x.clone(), y.clone(), 0.4, &t).unwrap();
        let out = build_psi(&p, &t).unwrap().apply(&ComplexMatrix::outer(&x, &x)).unwrap();
        let expected = &ComplexMatrix::outer(&x, &x).scale_real(0.6)
            + &ComplexMatrix::outer(&y, &y).scale_real(0.4);
        assert!(out.approx_eq(&expected, 1e-13));
    }

    #[test]
    fn tp_and_rank_on_lambda_grid() {
        let t = tol();
        let mut rng = random::seeded(17);
        let x = random::unit_vector(3, &mut rng);
        let y = random::unit_vector(3, &mut rng);
        let gen = ElementaryParams::new(x, y, 0.0, &t).unwrap();
        let lambdas: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).chain([0.99, 1.0]).collect();
        for base in [gen, orth(3, 0.0)] {
            for &l in &lambdas {
                let p = base.with_lambda(l).unwrap();
                let ks = p.kraus();
                assert!(ks.completeness().approx_eq(&ComplexMatrix::identity(3), 1e-12));
                let rep = is_cptp(&build_psi(&p, &t).unwrap(), &t);
                assert!(rep.cp && rep.tp);
                assert_eq!(rep.kraus_rank, if l == 0.0 { 1 } else { 2 });
            }
        }
    }

    #[test]
    fn orthogonal_inverse_on_x_projector() {
        let t = tol();
        let lambda = 0.3;
        let p = orth(2, lambda);
        let inv = psi_inverse_map(&p, &t).unwrap();
        let x = p.x().to_vec();
        let xp = p.x_perp();
        let got = inv.apply(&ComplexMatrix::outer(&x, &x));
        let expected = &ComplexMatrix::outer(&x, &x).scale_real(1.0 / (1.0 - lambda))
            - &ComplexMatrix::outer(&xp, &xp).scale_real(lambda / (1.0 - lambda));
        assert!(got.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn general_inverse_composes_to_identity() {
        let t = tol();
        let lambda = 0.3;
        let mut rng = random::seeded(5);
        let x = random::unit_vector(3, &mut rng);
        let w = random::unit_vector(3, &mut rng);
        // y with <x|y> = 1/2
        let p0 = inner(&x, &w);
        let wp: Vec<Complex> = w.iter().zip(&x).map(|(wi, xi)| wi - p0 * xi).collect();
        let wp = unit(&wp);
        let h = (0.75f64).sqrt();
        let y: Vec<Complex> = x.iter().zip(&wp).map(|(a, b)| a * 0.5 + b * h).collect();
        let p = ElementaryParams::new(x, y, lambda, &t).unwrap();
        assert!(!p.is_orthogonal());
        assert!((inner(&p.x_perp(), p.y()).im).abs() < 1e-15);
        let psi = build_psi(&p, &t).unwrap();
        let inv = psi_inverse_map(&p, &t).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let e = ComplexMatrix::outer(&basis_vector(3, j), &basis_vector(3, k));
                let back = inv.apply(&psi.apply(&e).unwrap());
                assert!(back.approx_eq(&e, 1e-12));
            }
        }
        let id = ComplexMatrix::identity(9);
        assert!((psi.superop() * &inv.superop()).approx_eq(&id, 1e-9 / (1.0 - lambda)));
        assert!((&inv.superop() * psi.superop()).approx_eq(&id, 1e-9 / (1.0 - lambda)));
        assert!(!psd_check(&inv.choi(), &t).unwrap());
    }

    #[test]
    fn inverse_rejects_lambda_one() {
        assert!(matches!(
            psi_inverse_map(&orth(2, 1.0), &tol()),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn right_compose_choi_matches_superop_product() {
        let t = tol();
        let phi = crate::channel::random_channel(3, 3, 8, &t).unwrap();
        let p = ElementaryParams::new(basis_vector(3, 0), vec![c(0.6, 0.0), c(0.0, 0.8), r(0.0)], 0.25, &t)
            .unwrap();
        let inv = psi_inverse_map(&p, &t).unwrap();
        let direct = inv.right_compose_choi(phi.choi(), 3);
        let via = crate::channel::choi_from_superop(&(phi.superop() * &inv.superop()), 3, 3);
        assert!(direct.approx_eq(&via, 1e-12));
    }

    #[test]
    fn semigroup_and_split() {
        let t = tol();
        assert_eq!(compose_lambda(0.5, 0.5).unwrap(), 0.75);
        assert_eq!(compose_lambda(0.3, 0.0).unwrap(), 0.3);
        assert!(compose_lambda(1.2, 0.0).is_err());
        let (a, b) = nontrivial_split(0.5).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-15 && (b - 0.25).abs() < 1e-15);
        let (a, b) = nontrivial_split(1.0 / 6.0).unwrap();
        assert!((a - 1.0 / 11.0).abs() < 1e-15 && (b - 1.0 / 12.0).abs() < 1e-15);
        assert!((compose_lambda(a, b).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(nontrivial_split(0.0).is_err() && nontrivial_split(1.0).is_err());
        let (l, m) = (0.35, 0.6);
        let pl = build_psi(&orth(3, l), &t).unwrap();
        let pm = build_psi(&orth(3, m), &t).unwrap();
        let plm = build_psi(&orth(3, compose_lambda(l, m).unwrap()), &t).unwrap();
        assert!((pl.superop() * pm.superop()).approx_eq(plm.superop(), 1e-11));
        assert!((pm.superop() * pl.superop()).approx_eq(plm.superop(), 1e-11));
    }
}
