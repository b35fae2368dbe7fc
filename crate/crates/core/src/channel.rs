//! Linear maps on matrices in Choi, Kraus and superoperator form.
//!
//! The Choi matrix is `C(Φ) = Σ_{jk} |j><k| ⊗ Φ(|j><k|)`: block `(j, k)` on
//! the `n x n` grid of `m x m` blocks holds `Φ(|j><k|)`. With the column
//! stacking convention of [`crate::linalg::vec`] this gives
//! `C(A(·)B†) = vec(A) vec(B)†` and the superoperator `Φ̂ = Σ conj(K) ⊗ K`
//! acting on `vec(X)`.

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    fix_phase, hermitian_eig, psd_from_eigen, unitarity_defect, unvec, vec, ComplexMatrix,
    HermitianEigen, Tolerance,
};
use crate::random;

/// Nonempty list of equally shaped Kraus operators, each `dim_out x dim_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?;
        let shape = first.shape();
        if let Some(bad) = ops.iter().find(|k| k.shape() != shape) {
            return Err(dim_mismatch(
                format!("{}x{}", shape.0, shape.1),
                format!("{}x{}", bad.rows(), bad.cols()),
            ));
        }
        Ok(Self { ops })
    }

    pub fn single(op: ComplexMatrix) -> Self {
        Self { ops: vec![op] }
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.ops[0].cols()
    }

    pub fn dim_out(&self) -> usize {
        self.ops[0].rows()
    }

    /// `Σ K_j† K_j`
    pub fn completeness(&self) -> ComplexMatrix {
        let n = self.dim_in();
        self.ops
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, k| &acc + &(&k.adjoint() * k))
    }
}

/// `Σ_j vec(K_j) vec(K_j)†`
pub fn choi_from_kraus(ks: &KrausSet) -> ComplexMatrix {
    let d = ks.dim_in() * ks.dim_out();
    let mut out = ComplexMatrix::zeros(d, d);
    for k in ks.ops() {
        let v = vec(k);
        out = &out + &ComplexMatrix::outer(&v, &v);
    }
    out
}

/// Canonical Kraus operators from the spectral decomposition of a PSD Choi
/// matrix: eigenvalues descending, each eigenvector phased so its first
/// nonzero entry is real positive, `K_j = unvec(sqrt(w_j) q_j)`.
pub fn kraus_from_choi(
    choi: &ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
    tol: &Tolerance,
) -> Result<KrausSet> {
    check_choi_shape(choi, dim_in, dim_out)?;
    let eig = hermitian_eig(choi, tol)?;
    kraus_from_eigen(&eig, dim_in, dim_out, tol)
}

fn kraus_from_eigen(
    eig: &HermitianEigen,
    dim_in: usize,
    dim_out: usize,
    tol: &Tolerance,
) -> Result<KrausSet> {
    if !psd_from_eigen(eig, tol) {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.min_value(),
        });
    }
    let cutoff = eig.rank_cutoff(tol);
    let mut ops = Vec::new();
    for k in (0..eig.values.len()).rev() {
        let w = eig.values[k];
        if w < cutoff {
            break;
        }
        let mut q = eig.vector(k);
        fix_phase(&mut q, tol.eq_eps);
        let s = w.sqrt();
        q.iter_mut().for_each(|z| *z *= s);
        ops.push(unvec(&q, dim_out, dim_in)?);
    }
    if ops.is_empty() {
        // the zero map; keep the set nonempty
        ops.push(ComplexMatrix::zeros(dim_out, dim_in));
    }
    KrausSet::new(ops)
}

/// `Φ̂[b m + a, k n + j] = C[j m + a, k m + b]`, so `vec(Φ(X)) = Φ̂ vec(X)`.
pub fn superop_from_choi(choi: &ComplexMatrix, dim_in: usize, dim_out: usize) -> ComplexMatrix {
    let (n, m) = (dim_in, dim_out);
    ComplexMatrix::from_fn(m * m, n * n, |row, col| {
        let (b, a) = (row / m, row % m);
        let (k, j) = (col / n, col % n);
        choi[(j * m + a, k * m + b)]
    })
}

/// Inverse of [`superop_from_choi`].
pub fn choi_from_superop(superop: &ComplexMatrix, dim_in: usize, dim_out: usize) -> ComplexMatrix {
    let (n, m) = (dim_in, dim_out);
    ComplexMatrix::from_fn(n * m, n * m, |row, col| {
        let (j, a) = (row / m, row % m);
        let (k, b) = (col / m, col % m);
        superop[(b * m + a, k * n + j)]
    })
}

/// `Σ_j conj(K_j) ⊗ K_j`
pub fn superop_from_kraus(ks: &KrausSet) -> ComplexMatrix {
    let (m, n) = (ks.dim_out(), ks.dim_in());
    ks.ops()
        .iter()
        .fold(ComplexMatrix::zeros(m * m, n * n), |acc, k| {
            &acc + &k.conj().kron(k)
        })
}

/// Choi matrix of an arbitrary linear map given by its action, assembled
/// block by block from the images of the matrix units.
pub fn choi_from_action(
    dim_in: usize,
    dim_out: usize,
    map: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> ComplexMatrix {
    let (n, m) = (dim_in, dim_out);
    let mut out = ComplexMatrix::zeros(n * m, n * m);
    for j in 0..n {
        for k in 0..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(j, k)] = crate::linalg::ONE;
            let img = map(&e);
            assert_eq!(img.shape(), (m, m), "map output has wrong shape");
            for a in 0..m {
                for b in 0..m {
                    out[(j * m + a, k * m + b)] = img[(a, b)];
                }
            }
        }
    }
    out
}

/// Partial trace over the output factor: `P[j, k] = tr Φ(|j><k|)`.
pub fn partial_trace_output(choi: &ComplexMatrix, dim_in: usize, dim_out: usize) -> ComplexMatrix {
    let (n, m) = (dim_in, dim_out);
    ComplexMatrix::from_fn(n, n, |j, k| (0..m).map(|a| choi[(j * m + a, k * m + a)]).sum())
}

fn check_choi_shape(choi: &ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<()> {
    let d = dim_in * dim_out;
    if dim_in == 0 || dim_out == 0 || choi.shape() != (d, d) {
        return Err(dim_mismatch(
            format!("{d}x{d} Choi matrix"),
            format!("{}x{}", choi.rows(), choi.cols()),
        ));
    }
    Ok(())
}

/// A linear map `C^{n x n} -> C^{m x m}`, held as its Choi matrix.
///
/// The superoperator is always cached; canonical Kraus operators are cached
/// when the Choi matrix is PSD within the construction tolerance.
#[derive(Debug, Clone)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    choi: ComplexMatrix,
    superop: ComplexMatrix,
    kraus: Option<KrausSet>,
}

impl Channel {
    /// Requires a Hermitian Choi matrix (within `eq_eps`).
    pub fn from_choi(
        choi: ComplexMatrix,
        dim_in: usize,
        dim_out: usize,
        tol: &Tolerance,
    ) -> Result<Self> {
        check_choi_shape(&choi, dim_in, dim_out)?;
        let eig = hermitian_eig(&choi, tol)?;
        let kraus = kraus_from_eigen(&eig, dim_in, dim_out, tol).ok();
        let superop = superop_from_choi(&choi, dim_in, dim_out);
        Ok(Self {
            dim_in,
            dim_out,
            choi,
            superop,
            kraus,
        })
    }

    pub fn from_kraus(ks: &KrausSet, tol: &Tolerance) -> Result<Self> {
        Self::from_choi(choi_from_kraus(ks), ks.dim_in(), ks.dim_out(), tol)
    }

    /// The superoperator must describe a Hermiticity-preserving map.
    pub fn from_superop(
        superop: &ComplexMatrix,
        dim_in: usize,
        dim_out: usize,
        tol: &Tolerance,
    ) -> Result<Self> {
        if superop.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(dim_mismatch(
                format!("{}x{} superoperator", dim_out * dim_out, dim_in * dim_in),
                format!("{}x{}", superop.rows(), superop.cols()),
            ));
        }
        Self::from_choi(choi_from_superop(superop, dim_in, dim_out), dim_in, dim_out, tol)
    }

    pub fn identity(n: usize) -> Self {
        Self::unitary(&ComplexMatrix::identity(n), &Tolerance::default())
            .expect("identity is unitary")
    }

    /// `Ad_U = U (·) U†`
    pub fn unitary(u: &ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        crate::linalg::ensure_unitary(u, tol)?;
        Self::from_kraus(&KrausSet::single(u.clone()), tol)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }

    /// Canonical Kraus operators; `None` if the map is not CP.
    pub fn kraus(&self) -> Option<&KrausSet> {
        self.kraus.as_ref()
    }

    pub fn kraus_or_err(&self) -> Result<&KrausSet> {
        self.kraus.as_ref().ok_or_else(|| Error::NotCompletelyPositive {
            min_eigenvalue: crate::linalg::min_eigenvalue(&self.choi, &Tolerance::default())
                .unwrap_or(f64::NAN),
        })
    }

    /// `Σ K_j X K_j†` (falls back to the superoperator for non-CP maps).
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim_in, self.dim_in) {
            return Err(dim_mismatch(
                format!("{0}x{0} input", self.dim_in),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        Ok(match &self.kraus {
            Some(ks) => {
                let m = self.dim_out;
                ks.ops().iter().fold(ComplexMatrix::zeros(m, m), |acc, k| {
                    &acc + &(&(k * x) * &k.adjoint())
                })
            }
            None => self.apply_superop(x),
        })
    }

    /// `unvec(Φ̂ vec(X))`
    pub fn apply_superop(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let y = self.superop.mul_vec(&vec(x));
        unvec(&y, self.dim_out, self.dim_out).expect("superop has consistent shape")
    }
}

/// `ch2 ∘ ch1`, computed as the product of superoperators.
pub fn compose(ch2: &Channel, ch1: &Channel, tol: &Tolerance) -> Result<Channel> {
    if ch1.dim_out() != ch2.dim_in() {
        return Err(dim_mismatch(
            format!("inner dimension {}", ch2.dim_in()),
            ch1.dim_out(),
        ));
    }
    let s = ch2.superop() * ch1.superop();
    Channel::from_superop(&s, ch1.dim_in(), ch2.dim_out(), tol)
}

/// `Σ_t w_t A_t C A_t†`
pub(crate) fn weighted_conjugation(c: &ComplexMatrix, terms: &[(f64, ComplexMatrix)]) -> ComplexMatrix {
    let (rows, _) = terms[0].1.shape();
    let mut out = ComplexMatrix::zeros(rows, rows);
    for (w, a) in terms {
        let t = &(a * c) * &a.adjoint();
        out = &out + &t.scale_real(*w);
    }
    out
}

/// Choi matrix of `Ψ_K ∘ Φ ∘ Ψ_L` from the Choi matrix of `Φ: n -> m` and
/// Kraus sets of `Ψ_K: m -> m'` and `Ψ_L: n' -> n`:
/// `Σ_{a,b} (L_b^T ⊗ K_a) C(Φ) (L_b^T ⊗ K_a)†`.
pub fn choi_of_sandwich(
    phi_choi: &ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
    left: &KrausSet,
    right: &KrausSet,
) -> Result<ComplexMatrix> {
    check_choi_shape(phi_choi, dim_in, dim_out)?;
    if left.dim_in() != dim_out {
        return Err(dim_mismatch(
            format!("left Kraus input dimension {dim_out}"),
            left.dim_in(),
        ));
    }
    if right.dim_out() != dim_in {
        return Err(dim_mismatch(
            format!("right Kraus output dimension {dim_in}"),
            right.dim_out(),
        ));
    }
    let mut terms = Vec::with_capacity(left.len() * right.len());
    for l in right.ops() {
        let lt = l.transpose();
        for k in left.ops() {
            terms.push((1.0, lt.kron(k)));
        }
    }
    Ok(weighted_conjugation(phi_choi, &terms))
}

/// Outcome of [`is_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub cp: bool,
    pub tp: bool,
    pub kraus_rank: usize,
    pub min_eigenvalue: f64,
    /// Largest entrywise deviation of the output partial trace from identity.
    pub tp_defect: f64,
}

pub fn is_cptp(ch: &Channel, tol: &Tolerance) -> CptpReport {
    let eig = hermitian_eig(ch.choi(), tol).expect("Choi matrix validated at construction");
    let cutoff = eig.rank_cutoff(tol);
    let kraus_rank = eig.values.iter().filter(|&&w| w >= cutoff).count();
    let n = ch.dim_in();
    let pt = partial_trace_output(ch.choi(), n, ch.dim_out());
    let tp_defect = pt.max_abs_diff(&ComplexMatrix::identity(n));
    CptpReport {
        cp: psd_from_eigen(&eig, tol),
        tp: tp_defect <= n as f64 * tol.eq_eps,
        kraus_rank,
        min_eigenvalue: eig.min_value(),
        tp_defect,
    }
}

pub fn kraus_rank(ch: &Channel, tol: &Tolerance) -> usize {
    is_cptp(ch, tol).kraus_rank
}

/// Errors unless the map is CPTP within tolerance.
pub fn ensure_cptp(ch: &Channel, tol: &Tolerance) -> Result<CptpReport> {
    let rep = is_cptp(ch, tol);
    if !rep.cp {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: rep.min_eigenvalue,
        });
    }
    if !rep.tp {
        return Err(Error::NotTracePreserving {
            defect: rep.tp_defect,
        });
    }
    Ok(rep)
}

/// True iff the map has Kraus rank one and its Kraus operator is unitary.
pub fn is_unitary_channel(ch: &Channel, tol: &Tolerance) -> bool {
    if ch.dim_in() != ch.dim_out() || kraus_rank(ch, tol) != 1 {
        return false;
    }
    match ch.kraus() {
        Some(ks) if ks.len() == 1 => unitarity_defect(&ks.ops()[0]) <= tol.eq_eps.max(1e-12) * ch.dim_in() as f64,
        _ => false,
    }
}

/// Random CPTP map on `n x n` matrices with Kraus rank `r`, sliced from a
/// random `(r n) x n` isometry. Deterministic per seed.
pub fn random_channel(n: usize, r: usize, seed: u64, tol: &Tolerance) -> Result<Channel> {
    let ks = random_kraus(n, r, &mut random::seeded(seed))?;
    Channel::from_kraus(&ks, tol)
}

pub fn random_kraus<R: rand::Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<KrausSet> {
    if n == 0 || r == 0 || r > n * n {
        return Err(Error::InvalidParameter(format!(
            "Kraus rank must lie in 1..={}, got {r}",
            n * n
        )));
    }
    let iso = loop {
        if let Some(q) = random::orthonormalize_columns(&random::gaussian_matrix(r * n, n, rng)) {
            break q;
        }
    };
    let ops = (0..r).map(|i| iso.submatrix(i * n, 0, n, n)).collect();
    KrausSet::new(ops)
}
