//! Candidate pairs `(x, x⊥)` for a channel.
//!
//! Exact tiers come first: the joint kernel of the complement basis, then
//! the joint kernel of the criterion matrices. The heuristic tier runs a
//! seeded multistart minimization of
//! `F(x) = Σ |<x|M x>|² + λ_min(x x† + Σ (M x)(M x)†)` over unit `x`,
//! followed by a Levenberg-Marquardt polish on `(x, x⊥)` jointly. Every
//! returned pair passes the sufficient check; an empty result only means
//! that nothing was found.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::criteria::Criteria;
use super::{CandidatePair, CandidateSource};
use crate::channel::Channel;
use crate::error::Result;
use crate::linalg::{
    basis_vector, fix_phase, hermitian_eig, inner, norm, orthogonal_completion, Complex,
    ComplexMatrix, Tolerance,
};
use crate::random;
use crate::subspace::common_kernel;

/// Knobs for [`find_candidates`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub seed: u64,
    pub starts: usize,
    /// Objective value below which descent stops early.
    pub accept_tol: f64,
    /// Thread count for the multistart tier; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Coordinate-descent sweeps per start.
    pub max_sweeps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 64,
            accept_tol: 1e-10,
            workers: None,
            max_sweeps: 400,
        }
    }
}

/// Objective values above this are not worth polishing.
const POLISH_GATE: f64 = 1e-3;
const LM_ITERS: usize = 100;

pub fn find_candidates(ch: &Channel, cfg: &SearchConfig, tol: &Tolerance) -> Result<Vec<CandidatePair>> {
    let crit = Criteria::new(ch, tol)?;
    let n = crit.dim();
    let mut out: Vec<CandidatePair> = Vec::new();

    if crit.perp_basis().is_empty() {
        for j in 0..n {
            let x = basis_vector(n, j);
            let xp = basis_vector(n, (j + 1) % n);
            push_unique(&mut out, CandidatePair::evaluate(&crit, x, xp, CandidateSource::PerpKernel));
        }
    } else {
        for v in common_kernel(crit.perp_basis(), tol)? {
            push_kernel_pair(&mut out, &crit, v, CandidateSource::PerpKernel);
        }
    }
    if !crit.is_vacuous() {
        for v in common_kernel(crit.matrices(), tol)? {
            push_kernel_pair(&mut out, &crit, v, CandidateSource::CriterionKernel);
        }
        for (x, xp) in heuristic_pairs(crit.matrices(), n, cfg) {
            let pair = CandidatePair::evaluate(&crit, x, xp, CandidateSource::Heuristic);
            if crit.sufficient(&pair.x, &pair.x_perp).pass {
                push_unique(&mut out, pair);
            }
        }
    }
    out.retain(|p| crit.sufficient(&p.x, &p.x_perp).pass);
    out.sort_by(|a, b| a.sufficient_residual.total_cmp(&b.sufficient_residual));
    Ok(out)
}

fn push_kernel_pair(out: &mut Vec<CandidatePair>, crit: &Criteria, x: Vec<Complex>, source: CandidateSource) {
    let xp = orthogonal_completion(std::slice::from_ref(&x), crit.dim()).expect("dimension at least 2");
    push_unique(out, CandidatePair::evaluate(crit, x, xp, source));
}

fn push_unique(out: &mut Vec<CandidatePair>, pair: CandidatePair) {
    if !out.iter().any(|p| inner(&p.x, &pair.x).norm() > 1.0 - 1e-9) {
        out.push(pair);
    }
}

/// Runs the multistart tier on arbitrary square matrices and returns the
/// polished `(x, x⊥)` of every start whose objective fell below the polish
/// gate, in start order. Callers filter by their own acceptance test.
pub fn heuristic_pairs(
    mats: &[ComplexMatrix],
    n: usize,
    cfg: &SearchConfig,
) -> Vec<(Vec<Complex>, Vec<Complex>)> {
    let run = || {
        (0..cfg.starts)
            .into_par_iter()
            .map(|i| single_start(mats, n, cfg, i as u64))
            .collect::<Vec<_>>()
    };
    let results = match cfg.workers {
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    results.into_iter().flatten().collect()
}

fn single_start(
    mats: &[ComplexMatrix],
    n: usize,
    cfg: &SearchConfig,
    index: u64,
) -> Option<(Vec<Complex>, Vec<Complex>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let x0 = random::unit_vector(n, &mut rng);
    let (x, fx) = coordinate_descent(mats, x0, cfg);
    if fx > POLISH_GATE {
        return None;
    }
    let (_, xp) = objective(mats, &x);
    let (mut x, mut xp) = polish(mats, x, xp);
    // exact orthonormality before handing back
    let nx = norm(&x);
    x.iter_mut().for_each(|z| *z /= nx);
    let p = inner(&x, &xp);
    xp.iter_mut().zip(&x).for_each(|(a, b)| *a -= p * b);
    let nxp = norm(&xp);
    if nxp.is_nan() || nxp <= 1e-12 {
        return None;
    }
    xp.iter_mut().for_each(|z| *z /= nxp);
    fix_phase(&mut x, 1e-12);
    fix_phase(&mut xp, 1e-12);
    Some((x, xp))
}

/// `F(x)` for unit `x`, plus the minimizing `x⊥`.
fn objective(mats: &[ComplexMatrix], x: &[Complex]) -> (f64, Vec<Complex>) {
    let n = x.len();
    let mut gram = ComplexMatrix::outer(x, x);
    let mut diag = 0.0;
    for m in mats {
        let mx = m.mul_vec(x);
        diag += inner(x, &mx).norm_sqr();
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += mx[i] * mx[j].conj();
            }
        }
    }
    let eig = hermitian_eig(&gram.hermitian_part(), &Tolerance::default()).expect("Hermitian Gram matrix");
    (diag + eig.values[0].max(0.0), eig.vector(0))
}

fn unit_from_reals(v: &[f64]) -> Vec<Complex> {
    let n = v.len() / 2;
    let x: Vec<Complex> = (0..n).map(|i| Complex::new(v[i], v[n + i])).collect();
    let nx = norm(&x);
    x.into_iter().map(|z| z / nx).collect()
}

fn coordinate_descent(mats: &[ComplexMatrix], x0: Vec<Complex>, cfg: &SearchConfig) -> (Vec<Complex>, f64) {
    let n = x0.len();
    let mut v: Vec<f64> = x0.iter().map(|z| z.re).chain(x0.iter().map(|z| z.im)).collect();
    let mut fx = objective(mats, &x0).0;
    let mut h = 0.25;
    for _ in 0..cfg.max_sweeps {
        if fx < cfg.accept_tol || h < 1e-10 {
            break;
        }
        let mut improved = false;
        for i in 0..2 * n {
            for s in [1.0, -1.0] {
                let mut w = v.clone();
                w[i] += s * h;
                let y = unit_from_reals(&w);
                let fy = objective(mats, &y).0;
                if fy < fx {
                    v = y.iter().map(|z| z.re).chain(y.iter().map(|z| z.im)).collect();
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (unit_from_reals(&v), fx)
}

/// Residuals of the joint system: criterion overlaps, orthogonality, norms.
fn joint_residuals(mats: &[ComplexMatrix], v: &[f64]) -> Vec<f64> {
    let n = v.len() / 4;
    let x: Vec<Complex> = (0..n).map(|i| Complex::new(v[i], v[n + i])).collect();
    let xp: Vec<Complex> = (0..n).map(|i| Complex::new(v[2 * n + i], v[3 * n + i])).collect();
    let mut r = Vec::with_capacity(4 * mats.len() + 4);
    for m in mats {
        let mx = m.mul_vec(&x);
        let a = inner(&x, &mx);
        let b = inner(&xp, &mx);
        r.extend_from_slice(&[a.re, a.im, b.re, b.im]);
    }
    let o = inner(&x, &xp);
    r.extend_from_slice(&[o.re, o.im, norm(&x).powi(2) - 1.0, norm(&xp).powi(2) - 1.0]);
    r
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|t| t * t).sum()
}

fn polish(mats: &[ComplexMatrix], x: Vec<Complex>, xp: Vec<Complex>) -> (Vec<Complex>, Vec<Complex>) {
    let n = x.len();
    let mut v: Vec<f64> = x
        .iter()
        .map(|z| z.re)
        .chain(x.iter().map(|z| z.im))
        .chain(xp.iter().map(|z| z.re))
        .chain(xp.iter().map(|z| z.im))
        .collect();
    let mut r = joint_residuals(mats, &v);
    let mut cost = sum_sq(&r);
    let mut mu = 1e-3;
    let h = 1e-6;
    for _ in 0..LM_ITERS {
        if cost < 1e-30 {
            break;
        }
        // residuals are quadratic, so central differences are exact up to rounding
        let mut jac = DMatrix::<f64>::zeros(r.len(), v.len());
        for k in 0..v.len() {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[k] += h;
            vm[k] -= h;
            let rp = joint_residuals(mats, &vp);
            let rm = joint_residuals(mats, &vm);
            for i in 0..r.len() {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut stepped = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for k in 0..v.len() {
                a[(k, k)] += mu * (1.0 + jtj[(k, k)]);
            }
            let Some(delta) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let rt = joint_residuals(mats, &trial);
            let ct = sum_sq(&rt);
            if ct < cost {
                v = trial;
                r = rt;
                cost = ct;
                mu = (mu * 0.3).max(1e-12);
                stepped = true;
                break;
            }
            mu *= 10.0;
        }
        if !stepped {
            break;
        }
    }
    let x = (0..n).map(|i| Complex::new(v[i], v[n + i])).collect();
    let xp = (0..n).map(|i| Complex::new(v[2 * n + i], v[3 * n + i])).collect();
    (x, xp)
}
