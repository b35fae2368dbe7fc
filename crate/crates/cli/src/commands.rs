use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use chandiv::channel::{ensure_cptp, is_cptp, random_channel, Channel};
use chandiv::classical::{classical_criteria_agree, random_stochastic, ClassicalComparison};
use chandiv::divisibility::{
    certify, divide, find_candidates, lambda_max, state_gap, CandidatePair, Criteria,
};
use chandiv::factorization::{factor, verify_trace};
use chandiv::fixtures::{pauli_mixture, qubit_rank3, zero_diagonal_qutrit};
use chandiv::linalg::{basis_vector, pauli, Complex};
use chandiv::subspace::{common_eigvec_residual, kraus_perp};
use chandiv::{random, Tolerance};

use crate::args::{Cli, Command, Format, GlobalOpts};
use crate::document::{encode_matrix, encode_vector, ChannelDocument, Entry, MatrixPayload};
use crate::error::CliError;
use crate::trace::TraceDocument;

/// Runs a parsed command line and returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let opts = &cli.opts;
    let tol = opts.tolerance()?;
    match &cli.command {
        Command::Check { input } => render(opts, &check(&read_document(input)?, opts, &tol)?),
        Command::Factor {
            input,
            random,
            output,
            verify,
        } => {
            let doc = match (input, random) {
                (Some(path), _) => read_document(path)?,
                (None, Some(nr)) => random_document(nr[0], nr[1], opts.seed, &tol)?,
                (None, None) => return Err(CliError::Usage("need an input file or --random".into())),
            };
            let (trace, report) = factor_document(&doc, opts, &tol, *verify)?;
            let json = trace.to_json();
            if let Some(path) = output {
                std::fs::write(path, format!("{json}\n"))?;
            }
            match opts.format {
                Format::Json => Ok(json),
                Format::Text => Ok(report.text()),
            }
        }
        Command::Classical {
            input,
            trials,
            dim,
            zero_prob,
        } => match (input, trials) {
            (Some(path), _) => render(opts, &classical_single(&read_document(path)?, &tol)?),
            (None, Some(t)) => render(opts, &classical_batch(*t, *dim, *zero_prob, opts.seed, &tol)?),
            (None, None) => Err(CliError::Usage("need an input file or --trials".into())),
        },
        Command::Example { id, trials, pairs } => match id {
            1 => render(opts, &example1(opts, &tol)?),
            2 => render(opts, &example2(*trials, *pairs, opts, &tol)?),
            3 => render(opts, &example3(&tol)?),
            other => Err(CliError::Usage(format!("unknown example {other}"))),
        },
        Command::Random { n, r } => Ok(random_document(*n, *r, opts.seed, &tol)?.to_json()),
    }
}

trait Report: Serialize {
    fn text(&self) -> String;
}

fn render<R: Report>(opts: &GlobalOpts, report: &R) -> Result<String, CliError> {
    match opts.format {
        Format::Json => serde_json::to_string_pretty(report).map_err(|e| CliError::Internal(e.to_string())),
        Format::Text => Ok(report.text()),
    }
}

fn read_document(path: &Path) -> Result<ChannelDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    ChannelDocument::parse(&text)
}

fn random_document(n: usize, r: usize, seed: u64, tol: &Tolerance) -> Result<ChannelDocument, CliError> {
    if n < 2 {
        return Err(CliError::Usage("random channels need n >= 2".into()));
    }
    let ch = random_channel(n, r, seed, tol)?;
    let ks = ch.kraus_or_err()?;
    Ok(ChannelDocument::from_kraus(ks)
        .with_metadata("generator", "random")
        .with_metadata("seed", seed.to_string()))
}

fn load_cptp(doc: &ChannelDocument, tol: &Tolerance) -> Result<Channel, CliError> {
    let ch = doc.to_channel(tol)?;
    if ch.dim_in() < 2 {
        return Err(CliError::Usage("channels need dimension at least 2".into()));
    }
    ensure_cptp(&ch, tol)?;
    Ok(ch)
}

fn fmt_vec(v: &[Entry]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|[re, im]| {
            if *im == 0.0 {
                format!("{re:.6}")
            } else {
                format!("{re:.6}{im:+.6}i")
            }
        })
        .collect();
    format!("({})", parts.join(", "))
}

fn fmt_matrix(m: &MatrixPayload, out: &mut String) {
    for row in m {
        let _ = writeln!(out, "    {}", fmt_vec(row));
    }
}

#[derive(Debug, Serialize)]
pub struct CandidateReport {
    pub x: Vec<Entry>,
    pub x_perp: Vec<Entry>,
    pub source: String,
    pub necessary_residual: f64,
    pub sufficient_residual: f64,
    pub lambda_max: f64,
    pub rank_preserving: bool,
    pub state_gap: f64,
    pub certified: bool,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub dim: usize,
    pub completely_positive: bool,
    pub trace_preserving: bool,
    pub min_choi_eigenvalue: f64,
    pub tp_defect: f64,
    pub kraus_rank: usize,
    pub complement_dim: usize,
    pub candidates: Vec<CandidateReport>,
    pub verdict: String,
}

impl Report for CheckReport {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dimension: {}", self.dim);
        let _ = writeln!(
            s,
            "CP: {} (min Choi eigenvalue {:.3e}), TP: {} (defect {:.3e})",
            self.completely_positive, self.min_choi_eigenvalue, self.trace_preserving, self.tp_defect
        );
        let _ = writeln!(s, "Kraus rank: {}", self.kraus_rank);
        let _ = writeln!(s, "Kraus complement dimension: {}", self.complement_dim);
        let _ = writeln!(s, "candidate pairs: {}", self.candidates.len());
        for (k, c) in self.candidates.iter().enumerate() {
            let _ = writeln!(s, "  [{k}] source {}", c.source);
            let _ = writeln!(s, "      x      = {}", fmt_vec(&c.x));
            let _ = writeln!(s, "      x_perp = {}", fmt_vec(&c.x_perp));
            let _ = writeln!(
                s,
                "      residuals: necessary {:.3e}, sufficient {:.3e}",
                c.necessary_residual, c.sufficient_residual
            );
            let _ = writeln!(
                s,
                "      lambda_max = {:.7}{}, state gap {:.3e}, certified {}",
                c.lambda_max,
                if c.rank_preserving { " (capped)" } else { "" },
                c.state_gap,
                c.certified
            );
        }
        let _ = writeln!(s, "{}", self.verdict);
        s
    }
}

fn candidate_report(ch: &Channel, pair: &CandidatePair, tol: &Tolerance) -> Result<CandidateReport, CliError> {
    let lm = lambda_max(ch, &pair.x, &pair.x_perp, tol)?;
    let certified = match certify(ch, pair, tol) {
        Ok(_) => true,
        Err(chandiv::Error::Infeasible { .. }) => false,
        Err(e) => return Err(e.into()),
    };
    Ok(CandidateReport {
        x: encode_vector(&pair.x),
        x_perp: encode_vector(&pair.x_perp),
        source: pair.source.as_str().to_string(),
        necessary_residual: pair.necessary_residual,
        sufficient_residual: pair.sufficient_residual,
        lambda_max: lm.value,
        rank_preserving: lm.rank_preserving,
        state_gap: state_gap(ch, &pair.x, &pair.x_perp, tol)?,
        certified,
    })
}

fn check(doc: &ChannelDocument, opts: &GlobalOpts, tol: &Tolerance) -> Result<CheckReport, CliError> {
    let ch = doc.to_channel(tol)?;
    let rep = ensure_cptp(&ch, tol)?;
    if ch.dim_in() < 2 {
        return Err(CliError::Usage("channels need dimension at least 2".into()));
    }
    let perp = kraus_perp(&ch, tol)?;
    let pairs = find_candidates(&ch, &opts.search()?, tol)?;
    let candidates = pairs
        .iter()
        .map(|p| candidate_report(&ch, p, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let verdict = if candidates.iter().any(|c| c.certified) {
        "certificate found"
    } else {
        "no certificate found"
    };
    Ok(CheckReport {
        dim: ch.dim_in(),
        completely_positive: rep.cp,
        trace_preserving: rep.tp,
        min_choi_eigenvalue: rep.min_eigenvalue,
        tp_defect: rep.tp_defect,
        kraus_rank: rep.kraus_rank,
        complement_dim: perp.dim(),
        candidates,
        verdict: verdict.into(),
    })
}

#[derive(Debug, Serialize)]
pub struct FactorSummary {
    pub dim: usize,
    pub kraus_rank: usize,
    pub steps: Vec<(f64, usize, usize, String)>,
    pub residual_rank: usize,
    pub terminal: String,
    pub reloaded_error: Option<f64>,
}

impl FactorSummary {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dimension {}, Kraus rank {}", self.dim, self.kraus_rank);
        let _ = writeln!(s, "steps: {}", self.steps.len());
        for (k, (lambda, before, after, source)) in self.steps.iter().enumerate() {
            let _ = writeln!(s, "  [{k}] lambda {lambda:.7}, rank {before} -> {after} ({source})");
        }
        let _ = writeln!(s, "residual Kraus rank: {}", self.residual_rank);
        let _ = writeln!(s, "terminal: {}", self.terminal);
        if let Some(err) = self.reloaded_error {
            let _ = writeln!(s, "reloaded trace verified, recomposition error {err:.3e}");
        }
        s
    }
}

fn factor_document(
    doc: &ChannelDocument,
    opts: &GlobalOpts,
    tol: &Tolerance,
    verify: bool,
) -> Result<(TraceDocument, FactorSummary), CliError> {
    let ch = load_cptp(doc, tol)?;
    let trace = factor(&ch, &opts.factor()?, tol)?;
    if !verify_trace(&trace, tol) {
        return Err(CliError::Internal("factorization trace failed verification".into()));
    }
    let mut out = TraceDocument::from_trace(&trace);
    out.metadata = doc.metadata.clone();
    let reloaded_error = if verify {
        Some(TraceDocument::parse(&out.to_json())?.verify(tol)?)
    } else {
        None
    };
    let summary = FactorSummary {
        dim: ch.dim_in(),
        kraus_rank: is_cptp(&ch, tol).kraus_rank,
        steps: trace
            .steps
            .iter()
            .map(|s| (s.lambda, s.rank_before, s.rank_after, s.pair.source.as_str().to_string()))
            .collect(),
        residual_rank: is_cptp(&trace.residual, tol).kraus_rank,
        terminal: trace.terminal.as_str().to_string(),
        reloaded_error,
    };
    Ok((out, summary))
}

#[derive(Debug, Serialize)]
pub struct ClassicalReport {
    pub dim: usize,
    pub domination_hint: bool,
    /// `(j, k)`: the support of column `j` contains that of column `k`.
    pub domination_witness: Option<(usize, usize)>,
    pub criterion_hint: bool,
    /// `(k, j)`: the basis pair `x = e_k`, `x⊥ = e_j` passes.
    pub criterion_witness: Option<(usize, usize)>,
    pub agree: bool,
}

impl ClassicalReport {
    fn new(dim: usize, cmp: &ClassicalComparison) -> Self {
        Self {
            dim,
            domination_hint: cmp.domination.divisible_hint,
            domination_witness: cmp.domination.witness,
            criterion_hint: cmp.criterion_hint,
            criterion_witness: cmp.criterion_witness,
            agree: cmp.agree,
        }
    }
}

impl Report for ClassicalReport {
    fn text(&self) -> String {
        let w = |o: Option<(usize, usize)>| o.map_or("none".to_string(), |(a, b)| format!("({a}, {b})"));
        format!(
            "column domination: {} (witness {})\nembedded criterion: {} (witness {})\nagree: {}\n",
            self.domination_hint,
            w(self.domination_witness),
            self.criterion_hint,
            w(self.criterion_witness),
            self.agree
        )
    }
}

fn classical_single(doc: &ChannelDocument, tol: &Tolerance) -> Result<ClassicalReport, CliError> {
    let a = doc.to_stochastic(tol)?;
    Ok(ClassicalReport::new(a.n(), &classical_criteria_agree(&a, tol)?))
}

#[derive(Debug, Serialize)]
pub struct Disagreement {
    pub matrix: ChannelDocument,
    pub report: ClassicalReport,
}

#[derive(Debug, Serialize)]
pub struct ClassicalBatchReport {
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    pub divisible_hints: usize,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
}

impl Report for ClassicalBatchReport {
    fn text(&self) -> String {
        let mut s = format!(
            "{} random {}x{} matrices (seed {}): {} with a dominated column, {}/{} agree\n",
            self.trials, self.dim, self.dim, self.seed, self.divisible_hints, self.agreements, self.trials
        );
        for d in &self.disagreements {
            let _ = writeln!(s, "disagreement:");
            fmt_matrix(&d.matrix.matrices[0], &mut s);
            s.push_str(&d.report.text());
        }
        s
    }
}

fn classical_batch(
    trials: usize,
    dim: usize,
    zero_prob: f64,
    seed: u64,
    tol: &Tolerance,
) -> Result<ClassicalBatchReport, CliError> {
    if dim < 2 {
        return Err(CliError::Usage("--dim must be at least 2".into()));
    }
    if !(0.0..1.0).contains(&zero_prob) {
        return Err(CliError::Usage("--zero-prob must lie in [0, 1)".into()));
    }
    let mut rng = random::seeded(seed);
    let mut agreements = 0;
    let mut divisible_hints = 0;
    let mut disagreements = Vec::new();
    for _ in 0..trials {
        let a = random_stochastic(dim, zero_prob, &mut rng);
        let cmp = classical_criteria_agree(&a, tol)?;
        divisible_hints += usize::from(cmp.domination.divisible_hint);
        if cmp.agree {
            agreements += 1;
        } else {
            disagreements.push(Disagreement {
                matrix: ChannelDocument::from_stochastic(&a),
                report: ClassicalReport::new(dim, &cmp),
            });
        }
    }
    Ok(ClassicalBatchReport {
        trials,
        dim,
        seed,
        divisible_hints,
        agreements,
        disagreements,
    })
}

pub const EXAMPLE1_A: f64 = 0.6;
pub const EXAMPLE1_B: f64 = 0.2;
const BLOCH_POINTS: usize = 60;

#[derive(Debug, Serialize)]
pub struct Example1Report {
    pub a: f64,
    pub b: f64,
    pub kraus_rank: usize,
    pub complement_dim: usize,
    /// `det [σ_x σ_z, σ_y σ_z]`; zero iff the two share an eigenvector.
    pub commutator_determinant: Entry,
    pub common_eigenvector: bool,
    /// Smallest common-eigenvector residual of `{K_j† σ_z}` on a Bloch grid.
    pub min_grid_residual: f64,
    pub candidates: usize,
    pub verdict: String,
}

impl Report for Example1Report {
    fn text(&self) -> String {
        let [re, im] = self.commutator_determinant;
        format!(
            "Pauli mixture a = {}, b = {}: Kraus rank {}, complement spanned by sigma_z ({} dim)\n\
             det[sigma_x sigma_z, sigma_y sigma_z] = {re}{im:+}i, common eigenvector: {}\n\
             min common-eigenvector residual over a {BLOCH_POINTS}x{BLOCH_POINTS} Bloch grid: {:.4}\n\
             candidate pairs: {}\n{}\n",
            self.a,
            self.b,
            self.kraus_rank,
            self.complement_dim,
            self.common_eigenvector,
            self.min_grid_residual,
            self.candidates,
            self.verdict
        )
    }
}

fn example1(opts: &GlobalOpts, tol: &Tolerance) -> Result<Example1Report, CliError> {
    let ch = pauli_mixture(EXAMPLE1_A, EXAMPLE1_B, tol)?;
    let z = pauli::z();
    let xz = &pauli::x() * &z;
    let yz = &pauli::y() * &z;
    let comm = &(&xz * &yz) - &(&yz * &xz);
    let det = comm[(0, 0)] * comm[(1, 1)] - comm[(0, 1)] * comm[(1, 0)];
    let ks = ch.kraus_or_err()?;
    let mats: Vec<_> = ks.ops().iter().map(|k| &k.adjoint() * &z).collect();
    let mut min_grid_residual = f64::INFINITY;
    for i in 0..BLOCH_POINTS {
        let theta = std::f64::consts::PI * i as f64 / (BLOCH_POINTS - 1) as f64;
        for j in 0..BLOCH_POINTS {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / BLOCH_POINTS as f64;
            let x = [
                Complex::new((theta / 2.0).cos(), 0.0),
                Complex::from_polar((theta / 2.0).sin(), phi),
            ];
            min_grid_residual = min_grid_residual.min(common_eigvec_residual(&mats, &x)?);
        }
    }
    let candidates = find_candidates(&ch, &opts.search()?, tol)?.len();
    Ok(Example1Report {
        a: EXAMPLE1_A,
        b: EXAMPLE1_B,
        kraus_rank: is_cptp(&ch, tol).kraus_rank,
        complement_dim: kraus_perp(&ch, tol)?.dim(),
        commutator_determinant: [det.re, det.im],
        common_eigenvector: det.norm() == 0.0,
        min_grid_residual,
        candidates,
        verdict: if candidates == 0 {
            "necessary criterion fails for every pair: no certificate found".into()
        } else {
            "candidate found".into()
        },
    })
}

#[derive(Debug, Serialize)]
pub struct Example2Report {
    pub completions: usize,
    pub pairs_per_completion: usize,
    pub seed: u64,
    pub conditions: Vec<String>,
    pub min_necessary_residual: f64,
    /// Smallest value of `max_j |<j|Φ(x⊥ x⊥†)|j> x_j|` over all sampled pairs.
    pub min_condition_violation: f64,
    pub jointly_infeasible: bool,
    pub candidates: usize,
}

impl Report for Example2Report {
    fn text(&self) -> String {
        let mut s = format!(
            "{} zero-diagonal qutrit completions, {} pairs each (seed {})\nconditions:\n",
            self.completions, self.pairs_per_completion, self.seed
        );
        for c in &self.conditions {
            let _ = writeln!(s, "  {c}");
        }
        let _ = writeln!(s, "min necessary residual: {:.4e}", self.min_necessary_residual);
        let _ = writeln!(s, "min condition violation: {:.4e}", self.min_condition_violation);
        let _ = writeln!(s, "jointly infeasible on all samples: {}", self.jointly_infeasible);
        let _ = writeln!(s, "candidate pairs found: {}", self.candidates);
        s
    }
}

fn example2(trials: usize, pairs: usize, opts: &GlobalOpts, tol: &Tolerance) -> Result<Example2Report, CliError> {
    let mut rng = random::seeded(opts.seed);
    let mut min_residual = f64::INFINITY;
    let mut min_violation = f64::INFINITY;
    let mut candidates = 0;
    let search = opts.search()?;
    for _ in 0..trials {
        let ch = zero_diagonal_qutrit(6, &mut rng, tol)?;
        let crit = Criteria::new(&ch, tol)?;
        for _ in 0..pairs {
            let q = random::unitary(3, &mut rng);
            let (x, xp) = (q.column(0), q.column(1));
            min_residual = min_residual.min(crit.necessary_residual(&x, &xp));
            let out = ch.apply_superop(&chandiv::ComplexMatrix::outer(&xp, &xp));
            let v = (0..3).map(|j| (out[(j, j)] * x[j]).norm()).fold(0.0, f64::max);
            min_violation = min_violation.min(v);
        }
        candidates += find_candidates(&ch, &search, tol)?.len();
    }
    Ok(Example2Report {
        completions: trials,
        pairs_per_completion: pairs,
        seed: opts.seed,
        conditions: (1..=3)
            .map(|j| format!("<{j}|Phi(x_perp x_perp^dag)|{j}> x_{j} = 0"))
            .collect(),
        min_necessary_residual: min_residual,
        min_condition_violation: min_violation,
        jointly_infeasible: min_violation > 1e-6,
        candidates,
    })
}

#[derive(Debug, Serialize)]
pub struct Example3Report {
    pub x: Vec<Entry>,
    pub x_perp: Vec<Entry>,
    pub lambda_max: f64,
    pub rank_before: usize,
    pub rank_after: usize,
    pub residual_superop: MatrixPayload,
    pub factor_superop: MatrixPayload,
    pub recomposition_error: f64,
}

impl Report for Example3Report {
    fn text(&self) -> String {
        let mut s = format!(
            "pair x = {}, x_perp = {}\nlambda_max = {:.10}\nKraus rank {} -> {}\nresidual superoperator:\n",
            fmt_vec(&self.x),
            fmt_vec(&self.x_perp),
            self.lambda_max,
            self.rank_before,
            self.rank_after
        );
        fmt_matrix(&self.residual_superop, &mut s);
        s.push_str("elementary factor superoperator:\n");
        fmt_matrix(&self.factor_superop, &mut s);
        let _ = writeln!(s, "recomposition error: {:.3e}", self.recomposition_error);
        s
    }
}

fn example3(tol: &Tolerance) -> Result<Example3Report, CliError> {
    let ch = qubit_rank3(tol)?;
    let (x, xp) = (basis_vector(2, 1), basis_vector(2, 0));
    let crit = Criteria::new(&ch, tol)?;
    let pair = CandidatePair::supplied(&crit, x, xp, tol)?;
    let lm = lambda_max(&ch, &pair.x, &pair.x_perp, tol)?;
    let cert = divide(&ch, &pair, lm.value, tol)?;
    let recomposition_error = cert.recompose(tol)?.choi().max_abs_diff(ch.choi());
    Ok(Example3Report {
        x: encode_vector(&pair.x),
        x_perp: encode_vector(&pair.x_perp),
        lambda_max: lm.value,
        rank_before: cert.rank_before,
        rank_after: cert.rank_after,
        residual_superop: encode_matrix(cert.residual.superop()),
        factor_superop: encode_matrix(cert.factor(tol)?.superop()),
        recomposition_error,
    })
}
