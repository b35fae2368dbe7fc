//! Largest `λ` for which `Φ ∘ Ψ_λ⁻¹` stays completely positive.

use crate::channel::Channel;
use crate::elementary::{psi_inverse_unchecked, ElementaryParams};
use crate::error::Result;
use crate::linalg::{hermitian_eig, psd_check, Complex, ComplexMatrix, Tolerance};

/// Upper end of the bisection bracket, `1 − 2⁻⁴⁰`.
pub const LAMBDA_CAP: f64 = 1.0 - 1.0 / (1u64 << 40) as f64;

/// Bracket width at which bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-12;

/// Number of grid points used for the interval sanity check.
pub const GRID_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMax {
    pub value: f64,
    /// The cap itself is feasible: the division never loses Kraus rank.
    pub rank_preserving: bool,
    /// Feasibility on the grid `{k·cap/31}` is downward closed.
    pub monotone_on_grid: bool,
}

/// Feasibility test for `Φ ∘ Ψ_λ⁻¹` at one pair.
///
/// The residual Choi matrix must pass the tolerant PSD check, and its
/// compression to the range of `C(Φ)` must have a nonnegative smallest
/// eigenvalue with no tolerance at all. The second condition pins the
/// boundary to the point where a range eigenvalue actually crosses zero;
/// the tolerant check alone would overshoot by roughly `psd_eps / slope`.
pub struct Feasibility<'a> {
    choi: &'a ComplexMatrix,
    dim_out: usize,
    base: ElementaryParams,
    range: ComplexMatrix,
    tol: Tolerance,
}

impl<'a> Feasibility<'a> {
    pub fn new(ch: &'a Channel, x: &[Complex], x_perp: &[Complex], tol: &Tolerance) -> Result<Self> {
        let base = ElementaryParams::new(x.to_vec(), x_perp.to_vec(), 0.0, tol)?;
        let eig = hermitian_eig(ch.choi(), tol)?;
        let cutoff = eig.rank_cutoff(tol);
        let cols: Vec<Vec<Complex>> = (0..eig.values.len())
            .filter(|&k| eig.values[k] >= cutoff)
            .map(|k| eig.vector(k))
            .collect();
        let range = if cols.is_empty() {
            ComplexMatrix::zeros(ch.choi().rows(), 0)
        } else {
            ComplexMatrix::from_columns(&cols)
        };
        Ok(Self {
            choi: ch.choi(),
            dim_out: ch.dim_out(),
            base,
            range,
            tol: *tol,
        })
    }

    /// Choi matrix of `Φ ∘ Ψ_λ⁻¹` (Hermitian part).
    pub fn residual_choi(&self, lambda: f64) -> ComplexMatrix {
        let p = self.base.with_lambda(lambda).expect("lambda in [0, 1)");
        psi_inverse_unchecked(&p)
            .right_compose_choi(self.choi, self.dim_out)
            .hermitian_part()
    }

    pub fn is_feasible(&self, lambda: f64) -> bool {
        let c = self.residual_choi(lambda);
        if !psd_check(&c, &self.tol).unwrap_or(false) {
            return false;
        }
        if self.range.cols() == 0 {
            return true;
        }
        let compressed = (&(&self.range.adjoint() * &c) * &self.range).hermitian_part();
        match hermitian_eig(&compressed, &self.tol) {
            Ok(e) => e.min_value() >= 0.0,
            Err(_) => false,
        }
    }
}

/// Bisection on `[0, LAMBDA_CAP]` down to [`BISECTION_WIDTH`]; the lower
/// (feasible) end is returned.
pub fn lambda_max(ch: &Channel, x: &[Complex], x_perp: &[Complex], tol: &Tolerance) -> Result<LambdaMax> {
    let f = Feasibility::new(ch, x, x_perp, tol)?;
    let grid: Vec<bool> = (0..GRID_POINTS)
        .map(|k| f.is_feasible(LAMBDA_CAP * k as f64 / (GRID_POINTS - 1) as f64))
        .collect();
    let monotone_on_grid = grid.windows(2).all(|w| w[0] || !w[1]);
    if *grid.last().expect("grid is nonempty") {
        return Ok(LambdaMax {
            value: LAMBDA_CAP,
            rank_preserving: true,
            monotone_on_grid,
        });
    }
    // Start from the grid bracket around the first infeasible point.
    let first_bad = grid.iter().position(|&ok| !ok).expect("last point infeasible");
    let step = LAMBDA_CAP / (GRID_POINTS - 1) as f64;
    let (mut lo, mut hi) = if first_bad == 0 {
        (0.0, 0.0)
    } else {
        ((first_bad - 1) as f64 * step, first_bad as f64 * step)
    };
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if f.is_feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaMax {
        value: lo,
        rank_preserving: false,
        monotone_on_grid,
    })
}
