//! Divisibility of quantum channels by two-Kraus damping channels.
//!
//! A channel `Φ` on `n x n` matrices is held as its Choi matrix. For an
//! orthonormal pair `(x, x⊥)` the crate checks whether `Φ ∘ Ψ_λ⁻¹` stays
//! completely positive for some `λ > 0`, where `Ψ_λ` damps `|x><x|` toward
//! `|x⊥><x⊥|`, finds such pairs, computes the largest admissible `λ`, and
//! peels off factors repeatedly.

pub mod channel;
pub mod classical;
pub mod divisibility;
pub mod elementary;
pub mod error;
pub mod factorization;
pub mod fixtures;
pub mod linalg;
pub mod random;
pub mod subspace;

pub use channel::{Channel, CptpReport, KrausSet};
pub use divisibility::{CandidatePair, DivisionCertificate, LambdaMax, SearchConfig};
pub use elementary::ElementaryParams;
pub use error::{Error, Result};
pub use linalg::{Complex, ComplexMatrix, Tolerance};
