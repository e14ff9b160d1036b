//! Exact many-body reference for small chains of spinless fermions.
//!
//! States are pure vectors over the occupation basis of `L ≤ 14` sites and
//! are evolved with the hopping Hamiltonian `H = -½ Σ_x (c†_x c_{x+1} + h.c.)`
//! on a ring. Charge measurements apply true projectors.
//!
//! Results from this crate are meant for structural identities (sum rules,
//! conservation laws, entropy decompositions). Chains this short are far from
//! the ballistic regime, so they are not a quantitative check of
//! hydrodynamic predictions.
//!
//! Sign convention: site `x` (1-based) is bit `x - 1` of a basis index, and
//! fermionic operators carry the Jordan–Wigner string of all occupied sites
//! with a smaller index. States are built from creation strings ordered by
//! site, the leftmost operator acting last.

mod decomposition;
mod fock;
mod protocol;
mod simulator;

pub use decomposition::{entropy_decomposition, Decomposition};
pub use fock::{build_state, FockVector, MAX_SITES};
pub use protocol::{
    run_protocol, MeasurementEntry, MeasurementRecord, Outcomes, ProtocolSpec, Trajectory, TrajectoryPoint,
};
pub use simulator::Simulator;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Born probability below the cut-off, i.e. the outcome cannot occur.
    #[error("forbidden outcome: charge {q} has probability {probability:e}")]
    ForbiddenOutcome { q: i64, probability: f64 },
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Born probabilities below this are treated as forbidden outcomes.
pub const FORBIDDEN_PROBABILITY: f64 = 1e-14;
