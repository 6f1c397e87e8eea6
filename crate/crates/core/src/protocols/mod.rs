//! The distillation protocols.
//!
//! * [`optimal::optimal_ecp`]: single-photon concentration of one pair with
//!   known coefficients; succeeds on either detector with the maximal yield.
//! * [`optimal::ghz_concentrate`]: the same filtering idea extended to an
//!   N-ensemble GHZ-class state.
//! * [`efficient::efficient_ecp`]: two-copy concentration with unknown
//!   coefficients, cascaded over failed rounds.
//! * [`epp::epp_round`] / [`epp::epp_iterate`]: purification of bit-flip
//!   mixtures with one parity check per node, iterated to pump the fidelity.
//!
//! Every protocol returns a [`ProtocolResult`] carrying the heralded branch
//! table and the kept output; iterated protocols add an [`IterationTrace`]
//! with per-round bookkeeping.

pub mod efficient;
pub mod epp;
pub mod optimal;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::cavity::{CavityError, ENS_G, ENS_S};
use crate::pcd::PcdError;
use crate::qstate::{LinearOp, MixedEnsemble, PureState, StateError, SubsystemKind,
    SubsystemLabel};

pub use efficient::{efficient_ecp, CascadeOutcome};
pub use epp::{bit_flip_mixture, convert_phase_flip_mixture, epp_iterate, epp_round,
    phase_flip_mixture, PurificationRound};
pub use optimal::{ghz_concentrate, optimal_ecp};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid protocol input: {0}")]
    Invalid(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    ParityCheck(#[from] PcdError),
}

/// One heralded branch of a protocol run.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    /// Which detector (or detector coincidence) heralds this branch.
    pub detector: String,
    pub probability: f64,
    /// Fidelity of the branch's kept state against the protocol target;
    /// `None` for branches that keep nothing.
    pub fidelity: Option<f64>,
}

/// The kept output of a protocol: a single pure state when every success
/// branch agrees, otherwise the weighted mixture over success branches.
#[derive(Debug, Clone)]
pub enum StateOutput {
    Pure(PureState),
    Mixture(MixedEnsemble),
}

impl StateOutput {
    pub fn fidelity(&self, target: &PureState) -> Result<f64, StateError> {
        match self {
            StateOutput::Pure(s) => s.fidelity(target),
            StateOutput::Mixture(m) => m.fidelity(target),
        }
    }
}

/// Outcome summary of one protocol invocation.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    /// Total probability of the heralds counted as success.
    pub success_probability: f64,
    /// All heralded branches, in a fixed documented order per protocol.
    pub branches: Vec<BranchRecord>,
    /// The kept state conditioned on success (`None` if success has zero
    /// probability).
    pub output: Option<StateOutput>,
    /// Fidelity of `output` against the target below.
    pub fidelity_vs_target: Option<f64>,
    /// Human-readable name of the target state ("psi_plus", "ghz_plus", …).
    pub target_name: String,
}

/// Per-round bookkeeping of an iterated protocol.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// Attempts made this round, normalized to one round-1 attempt.
    pub reach_probability: f64,
    /// Per-attempt success probability of this round.
    pub success_probability: f64,
    /// Round output quality: the success-branch fidelity for concentration,
    /// the post-round conditioned fidelity for purification.
    pub fidelity: Option<f64>,
    /// |α|, |β| of the dominant surviving (recursed) class, when a failed
    /// branch banks pairs for the next round.
    pub recursed_magnitudes: Option<(f64, f64)>,
}

/// Trace of an iterated protocol run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub rounds: Vec<RoundRecord>,
    /// Σ over rounds of reach × success; the accumulated success mass.
    pub cumulative_success: f64,
}

impl IterationTrace {
    /// Checks the defining invariant of `cumulative_success`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let sum: f64 = self
            .rounds
            .iter()
            .map(|r| r.reach_probability * r.success_probability)
            .sum();
        (sum - self.cumulative_success).abs() <= tol
    }
}

/// σ_z = |G⟩⟨G| − |S⟩⟨S| on one qubit subsystem.
pub fn sigma_z(label: &SubsystemLabel) -> Result<LinearOp, StateError> {
    LinearOp::single(label, &[[C64::ONE, C64::ZERO], [C64::ZERO, -C64::ONE]])
}

/// σ_x = |G⟩⟨S| + |S⟩⟨G| on one qubit subsystem.
pub fn sigma_x(label: &SubsystemLabel) -> Result<LinearOp, StateError> {
    LinearOp::single(label, &[[C64::ZERO, C64::ONE], [C64::ONE, C64::ZERO]])
}

/// The memory-qubit Hadamard H_E: |G⟩ ↔ (|G⟩+|S⟩)/√2, |S⟩ ↔ (|G⟩−|S⟩)/√2.
pub fn ensemble_hadamard(label: &SubsystemLabel) -> Result<LinearOp, StateError> {
    if label.kind != SubsystemKind::EnsembleQubit {
        return Err(StateError::LabelMismatch(label.name.clone()));
    }
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    LinearOp::single(label, &[[s, s], [s, -s]])
}

/// |ψ⁺⟩ = (|GS⟩ + |SG⟩)/√2 on two named ensembles.
pub fn psi_plus(a: &str, b: &str) -> PureState {
    bell(a, b, vec![ENS_G, ENS_S], vec![ENS_S, ENS_G], 1.0)
}

/// |ψ⁻⟩ = (|GS⟩ − |SG⟩)/√2 on two named ensembles.
pub fn psi_minus(a: &str, b: &str) -> PureState {
    bell(a, b, vec![ENS_G, ENS_S], vec![ENS_S, ENS_G], -1.0)
}

/// |φ⁺⟩ = (|GG⟩ + |SS⟩)/√2 on two named ensembles.
pub fn phi_plus(a: &str, b: &str) -> PureState {
    bell(a, b, vec![ENS_G, ENS_G], vec![ENS_S, ENS_S], 1.0)
}

fn bell(a: &str, b: &str, first: Vec<usize>, second: Vec<usize>, sign: f64) -> PureState {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureState::new(
        vec![SubsystemLabel::ensemble(a), SubsystemLabel::ensemble(b)],
        [(first, s), (second, s * sign)],
    )
    .expect("Bell state construction cannot fail")
}

/// GHZ⁺ = (|G…G⟩ + |S…S⟩)/√2 on the named ensembles.
pub fn ghz_plus(names: &[&str]) -> PureState {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let labels = names
        .iter()
        .map(|n| SubsystemLabel::ensemble(*n))
        .collect::<Vec<_>>();
    PureState::new(
        labels,
        [
            (vec![ENS_G; names.len()], s),
            (vec![ENS_S; names.len()], s),
        ],
    )
    .expect("GHZ state construction cannot fail")
}

/// Validates that |α|² + |β|² = 1 within the protocol input tolerance.
fn require_unit_pair(alpha: C64, beta: C64) -> Result<(), ProtocolError> {
    let n2 = alpha.norm_sqr() + beta.norm_sqr();
    if !n2.is_finite() || (n2 - 1.0).abs() > crate::qstate::INPUT_EPS {
        return Err(ProtocolError::Invalid(format!(
            "coefficients must satisfy |alpha|^2 + |beta|^2 = 1, got {n2}"
        )));
    }
    Ok(())
}

/// One heralded branch of a joint two-subsystem measurement:
/// (outcome pair, joint probability, post state).
type PairBranches = Vec<((usize, usize), f64, PureState)>;

/// Measures two named subsystems in sequence with the same basis, returning
/// every branch with nonzero probability.
fn measure_two(
    state: &PureState,
    first: &str,
    second: &str,
    basis: &[Vec<C64>],
) -> Result<PairBranches, StateError> {
    let mut joint = Vec::new();
    for b1 in state.measure(first, basis)? {
        if b1.probability <= 1e-30 {
            continue;
        }
        for b2 in b1.post.measure(second, basis)? {
            let p = b1.probability * b2.probability;
            if p <= 1e-30 {
                continue;
            }
            joint.push(((b1.outcome, b2.outcome), p, b2.post));
        }
    }
    Ok(joint)
}
