//! Products `K_j† G_k` of Kraus operators with the complement basis, and the
//! residuals built from them.

use crate::channel::Channel;
use crate::error::Result;
use crate::linalg::{inner, norm, Complex, ComplexMatrix, Tolerance};
use crate::subspace::kraus_perp;

/// Pass/fail with the residual it was decided on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub pass: bool,
    pub residual: f64,
    /// Same condition evaluated through images of rank-one projectors;
    /// zero exactly when `residual` is zero.
    pub cross_check: f64,
}

/// Everything needed to evaluate the criteria for many pairs of one channel.
#[derive(Debug, Clone)]
pub struct Criteria {
    dim: usize,
    perp: Vec<ComplexMatrix>,
    mats: Vec<ComplexMatrix>,
    scale: f64,
    tol: Tolerance,
    channel: Channel,
}

impl Criteria {
    pub fn new(ch: &Channel, tol: &Tolerance) -> Result<Self> {
        let ks = ch.kraus_or_err()?.clone();
        let perp = kraus_perp(ch, tol)?.basis().to_vec();
        let mut mats = Vec::with_capacity(ks.len() * perp.len());
        for k in ks.ops() {
            let kd = k.adjoint();
            for g in &perp {
                mats.push(&kd * g);
            }
        }
        let scale = mats.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
        Ok(Self {
            dim: ch.dim_in(),
            perp,
            mats,
            scale,
            tol: *tol,
            channel: ch.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All `M_{jk} = K_j† G_k`, Kraus index outer.
    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    /// Orthonormal basis of the complement of the Kraus span.
    pub fn perp_basis(&self) -> &[ComplexMatrix] {
        &self.perp
    }

    /// Largest Frobenius norm among the criterion matrices (0 if none).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_vacuous(&self) -> bool {
        self.mats.is_empty()
    }

    fn threshold(&self) -> f64 {
        self.tol.rank_eps * self.scale
    }

    /// `max |<x⊥|M x>|`
    pub fn necessary_residual(&self, x: &[Complex], x_perp: &[Complex]) -> f64 {
        self.mats
            .iter()
            .map(|m| inner(x_perp, &m.mul_vec(x)).norm())
            .fold(0.0, f64::max)
    }

    /// `max(|<x⊥|M x>|, |<x|M x>|)`
    pub fn sufficient_residual(&self, x: &[Complex], x_perp: &[Complex]) -> f64 {
        self.mats
            .iter()
            .map(|m| {
                let mx = m.mul_vec(x);
                inner(x_perp, &mx).norm().max(inner(x, &mx).norm())
            })
            .fold(0.0, f64::max)
    }

    /// `max_k ‖Φ(|v><v|) G_k x‖`
    fn image_residual(&self, v: &[Complex], x: &[Complex]) -> f64 {
        let img = self
            .channel
            .apply(&ComplexMatrix::outer(v, v))
            .expect("vector has input dimension");
        self.perp
            .iter()
            .map(|g| norm(&img.mul_vec(&g.mul_vec(x))))
            .fold(0.0, f64::max)
    }

    pub fn necessary(&self, x: &[Complex], x_perp: &[Complex]) -> CheckOutcome {
        let residual = self.necessary_residual(x, x_perp);
        CheckOutcome {
            pass: residual <= self.threshold(),
            residual,
            cross_check: self.image_residual(x_perp, x),
        }
    }

    pub fn sufficient(&self, x: &[Complex], x_perp: &[Complex]) -> CheckOutcome {
        let residual = self.sufficient_residual(x, x_perp);
        CheckOutcome {
            pass: residual <= self.threshold(),
            residual,
            cross_check: self
                .image_residual(x_perp, x)
                .max(self.image_residual(x, x)),
        }
    }

    /// `‖ι† Z C Z† ι‖_max` with `Z = |x̄><x̄⊥| ⊗ 1` and `ι` an isometry onto
    /// the Choi kernel. Vanishes iff the necessary condition holds; scales
    /// quadratically with the necessary residual.
    pub fn kernel_compression_residual(&self, x: &[Complex], x_perp: &[Complex]) -> f64 {
        if self.perp.is_empty() {
            return 0.0;
        }
        let m = self.channel.dim_out();
        let xb: Vec<Complex> = x.iter().map(|z| z.conj()).collect();
        let xpb: Vec<Complex> = x_perp.iter().map(|z| z.conj()).collect();
        let z = ComplexMatrix::outer(&xb, &xpb).kron(&ComplexMatrix::identity(m));
        let iota = ComplexMatrix::from_columns(
            &self.perp.iter().map(crate::linalg::vec).collect::<Vec<_>>(),
        );
        let zi = &z.adjoint() * &iota;
        (&(&zi.adjoint() * self.channel.choi()) * &zi).max_abs()
    }
}

/// `K_j† G_k` for the canonical Kraus operators and complement basis.
pub fn criterion_matrices(ch: &Channel, tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    Ok(Criteria::new(ch, tol)?.mats)
}

pub fn necessary_check(
    ch: &Channel,
    x: &[Complex],
    x_perp: &[Complex],
    tol: &Tolerance,
) -> Result<CheckOutcome> {
    Ok(Criteria::new(ch, tol)?.necessary(x, x_perp))
}

pub fn sufficient_check(
    ch: &Channel,
    x: &[Complex],
    x_perp: &[Complex],
    tol: &Tolerance,
) -> Result<CheckOutcome> {
    Ok(Criteria::new(ch, tol)?.sufficient(x, x_perp))
}
