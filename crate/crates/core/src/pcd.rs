//! Nondestructive parity check on two ensemble qubits.
//!
//! One probe photon prepared as (|h⟩ + |v⟩)/√2 enters a small interferometer:
//! a PBS splits the polarizations onto two rails, each rail reflects off one
//! cavity node (with a half-wave plate before or after so that both rails
//! probe their node in h), the PBS recombines the rails onto a common output
//! path, and a final Hadamard plate mixes the polarizations before detection.
//!
//! Detecting h heralds the even-parity projection (|GG⟩, |SS⟩ sector, with a
//! sign flip on |SS⟩ in the ideal limit); detecting v heralds odd parity
//! (|GS⟩, |SG⟩ sector, sign flip on |SG⟩). No detection heralds photon loss.
//! The ensembles themselves survive in all heralded branches, which is what
//! lets the same pair be probed again in later rounds.
//!
//! Branch amplitudes, writing Q_i = r0 |G⟩⟨G| + r |S⟩⟨S| for node i:
//!
//! * even (h): −(Q₁ + Q₂)/2 → diagonal (−r0, −(r0+r)/2, −(r0+r)/2, −r),
//! * odd  (v): (Q₂ − Q₁)/2 → diagonal (0, (r−r0)/2, (r0−r)/2, 0).
//!
//! The odd branch is exactly zero on |GG⟩ and |SS⟩ for every (r0, r), so a
//! v click is background-free parity information even at finite coupling.
//! The overall sign convention (the leading −1, one common-path mirror
//! bounce between recombination and detection) is fixed here once; protocols
//! inherit it.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::cavity::{reflection_operator, reflection_pair, CavityError, CavityParams, Mode,
    ReflectionPair};
use crate::optics::{hwp_sigma_x, pbs_route, photon_hadamard, POL_H, POL_V};
use crate::qstate::{computational_basis, LinearOp, PureState, StateError, SubsystemKind,
    SubsystemLabel};

#[derive(Debug, Error)]
pub enum PcdError {
    #[error("parity check needs two distinct ensembles, got `{0}` twice")]
    SameEnsemble(String),
    #[error("`{0}` is not an ensemble qubit")]
    NotAnEnsemble(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
}

/// Heralded result class of one parity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// h detected: joint state projected onto the {|GG⟩, |SS⟩} sector.
    Even,
    /// v detected: joint state projected onto the {|GS⟩, |SG⟩} sector.
    Odd,
    /// No detection: the probe was absorbed or scattered.
    Loss,
}

/// One heralded branch of a parity check: its class, its probability, and
/// the renormalized post-measurement state (absent for loss). The probe
/// subsystems are consumed; `post_state` lives on the original subsystems
/// only.
#[derive(Debug, Clone)]
pub struct ParityOutcome {
    pub parity: Parity,
    pub probability: f64,
    pub post_state: Option<PureState>,
}

/// Runs the parity check on ensembles `e1` and `e2` of `state` with the
/// reflection pair of the given mode. Returns the three outcomes in the
/// order [Even, Odd, Loss]; probabilities sum to 1, with the loss outcome
/// absorbing both the probe's reflection deficit and any sub-normalization
/// the input state already carried.
pub fn pcd_apply(
    state: &PureState,
    e1: &str,
    e2: &str,
    params: &CavityParams,
    mode: Mode,
) -> Result<Vec<ParityOutcome>, PcdError> {
    let pair = reflection_pair(params, mode)?;
    pcd_apply_with(state, e1, e2, &pair)
}

/// Same as [`pcd_apply`] but with the reflection coefficients given
/// directly; useful for probing the circuit with synthetic coefficients.
pub fn pcd_apply_with(
    state: &PureState,
    e1: &str,
    e2: &str,
    pair: &ReflectionPair,
) -> Result<Vec<ParityOutcome>, PcdError> {
    if e1 == e2 {
        return Err(PcdError::SameEnsemble(e1.to_string()));
    }
    let label_e1 = ensemble_label(state, e1)?;
    let label_e2 = ensemble_label(state, e2)?;

    let pol = SubsystemLabel::polarization(fresh_name(state, "pcd_pol"));
    let path = SubsystemLabel::path(fresh_name(state, "pcd_path"), 2);
    let half = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let probe = PureState::new(
        vec![pol.clone(), path.clone()],
        [(vec![POL_H, 0], half), (vec![POL_V, 0], half)],
    )
    .map_err(PcdError::State)?;
    let mut joint = state.tensor(&probe)?;

    let steps = [
        pbs_route(&pol, &path, 0, 1)?,
        LinearOp::controlled(&path, 1, &hwp_sigma_x(&pol)?)?,
        LinearOp::controlled(&path, 1, &reflection_operator(pair, &pol, &label_e1)?)?,
        LinearOp::controlled(&path, 0, &reflection_operator(pair, &pol, &label_e2)?)?,
        LinearOp::controlled(&path, 0, &hwp_sigma_x(&pol)?)?,
        pbs_route(&pol, &path, 0, 1)?,
        photon_hadamard(&pol)?,
    ];
    for step in &steps {
        joint = joint.apply(step)?;
    }
    // One common mirror bounce between recombination and detection; this
    // global phase fixes the sign convention of both heralded branches.
    joint = joint.scaled(C64::new(-1.0, 0.0));

    let branches = joint.measure(&pol.name, &computational_basis(2))?;
    let mut outcomes = Vec::with_capacity(3);
    let mut detected = 0.0;
    for branch in branches {
        let parity = match branch.outcome {
            POL_H => Parity::Even,
            _ => Parity::Odd,
        };
        detected += branch.probability;
        // Both polarizations exit on the same rail, so the path register is
        // definite and can be dropped.
        let post = branch.post.discard_definite(&path.name)?;
        outcomes.push(ParityOutcome {
            parity,
            probability: branch.probability,
            post_state: Some(post),
        });
    }
    outcomes.push(ParityOutcome {
        parity: Parity::Loss,
        probability: (1.0 - detected).max(0.0),
        post_state: None,
    });
    Ok(outcomes)
}

fn ensemble_label(state: &PureState, name: &str) -> Result<SubsystemLabel, PcdError> {
    let label = state.label(name).map_err(PcdError::State)?;
    if label.kind != SubsystemKind::EnsembleQubit {
        return Err(PcdError::NotAnEnsemble(name.to_string()));
    }
    Ok(label.clone())
}

/// A subsystem name not already used by `state`.
fn fresh_name(state: &PureState, base: &str) -> String {
    let taken = |n: &str| state.subsystems().iter().any(|l| l.name == n);
    if !taken(base) {
        return base.to_string();
    }
    (2..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken(n))
        .expect("unbounded name space")
}
