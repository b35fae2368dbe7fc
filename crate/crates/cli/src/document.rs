//! JSON channel documents.
//!
//! Complex entries are `[re, im]` pairs; matrices are row-major nested
//! arrays. `dim` is the Hilbert space dimension `n`, so a Choi or superop
//! payload is `n² x n²` and Kraus or classical payloads are `n x n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use chandiv::channel::{Channel, KrausSet};
use chandiv::classical::StochasticMatrix;
use chandiv::{Complex, ComplexMatrix, Tolerance};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Choi,
    Kraus,
    Superop,
    Classical,
}

pub type Entry = [f64; 2];
pub type MatrixPayload = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    pub kind: DocumentKind,
    pub dim: usize,
    pub matrices: Vec<MatrixPayload>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

pub fn encode_matrix(m: &ComplexMatrix) -> MatrixPayload {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn encode_vector(v: &[Complex]) -> Vec<Entry> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn decode_vector(v: &[Entry]) -> Vec<Complex> {
    v.iter().map(|[re, im]| Complex::new(*re, *im)).collect()
}

fn decode_matrix(p: &MatrixPayload, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix, CliError> {
    if p.len() != rows || p.iter().any(|r| r.len() != cols) {
        return Err(CliError::Parse(format!("{what} must be {rows} x {cols}")));
    }
    if p.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::Parse(format!("{what} has non-finite entries")));
    }
    let rows: Vec<Vec<Complex>> = p.iter().map(|r| decode_vector(r)).collect();
    Ok(ComplexMatrix::from_rows(&rows))
}

impl ChannelDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    /// Checks payload shapes against `kind` and `dim`.
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.dim;
        if n == 0 {
            return Err(CliError::Parse("dim must be positive".into()));
        }
        let (count_ok, side) = match self.kind {
            DocumentKind::Choi | DocumentKind::Superop => (self.matrices.len() == 1, n * n),
            DocumentKind::Classical => (self.matrices.len() == 1, n),
            DocumentKind::Kraus => (!self.matrices.is_empty(), n),
        };
        if !count_ok {
            return Err(CliError::Parse(format!(
                "{:?} document has {} matrices",
                self.kind,
                self.matrices.len()
            )));
        }
        for (k, m) in self.matrices.iter().enumerate() {
            decode_matrix(m, side, side, &format!("matrix {k}"))?;
        }
        Ok(())
    }

    fn matrix(&self, k: usize) -> Result<ComplexMatrix, CliError> {
        let side = match self.kind {
            DocumentKind::Choi | DocumentKind::Superop => self.dim * self.dim,
            DocumentKind::Kraus | DocumentKind::Classical => self.dim,
        };
        decode_matrix(&self.matrices[k], side, side, &format!("matrix {k}"))
    }

    /// Linear map described by the document. Classical documents are
    /// embedded as diagonal-Choi channels.
    pub fn to_channel(&self, tol: &Tolerance) -> Result<Channel, CliError> {
        self.validate()?;
        let n = self.dim;
        let ch = match self.kind {
            DocumentKind::Choi => Channel::from_choi(self.matrix(0)?, n, n, tol)?,
            DocumentKind::Superop => Channel::from_superop(&self.matrix(0)?, n, n, tol)?,
            DocumentKind::Kraus => {
                let ops = (0..self.matrices.len()).map(|k| self.matrix(k)).collect::<Result<_, _>>()?;
                Channel::from_kraus(&KrausSet::new(ops)?, tol)?
            }
            DocumentKind::Classical => chandiv::classical::embed(&self.to_stochastic(tol)?, tol)?,
        };
        Ok(ch)
    }

    pub fn to_stochastic(&self, tol: &Tolerance) -> Result<StochasticMatrix, CliError> {
        self.validate()?;
        if self.kind != DocumentKind::Classical {
            return Err(CliError::Parse(format!("expected a classical document, got {:?}", self.kind)));
        }
        let m = &self.matrices[0];
        if m.iter().flatten().any(|[_, im]| *im != 0.0) {
            return Err(CliError::Parse("classical entries must be real".into()));
        }
        let entries = m.iter().flatten().map(|[re, _]| *re).collect();
        Ok(StochasticMatrix::new(self.dim, entries, tol)?)
    }

    pub fn from_choi(ch: &Channel) -> Self {
        Self {
            kind: DocumentKind::Choi,
            dim: ch.dim_in(),
            matrices: vec![encode_matrix(ch.choi())],
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_kraus(ks: &KrausSet) -> Self {
        Self {
            kind: DocumentKind::Kraus,
            dim: ks.dim_in(),
            matrices: ks.ops().iter().map(encode_matrix).collect(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_stochastic(a: &StochasticMatrix) -> Self {
        let n = a.n();
        let rows = (0..n).map(|i| (0..n).map(|j| [a.get(i, j), 0.0]).collect()).collect();
        Self {
            kind: DocumentKind::Classical,
            dim: n,
            matrices: vec![rows],
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}
