//! Two-copy concentration with unknown coefficients, cascaded over rounds.
//!
//! One parity check on the two B-side ensembles splits a product of two
//! identical partially entangled pairs into an odd branch, which yields an
//! exactly maximally entangled pair for any reflection coefficients, and an
//! even branch, whose surviving pair is again of the partially entangled
//! form and can be fed back into the same procedure. Failed-branch pairs are
//! pooled per amplitude class, paired up (two pairs per attempt, hence the
//! factor 1/2 in the reach recursion), and retried for as many rounds as
//! requested.
//!
//! The odd branch projects onto the antisymmetric {|GS⟩, |SG⟩} combination
//! with coefficients ±(r−r₀)/2 of equal magnitude, so its fidelity is exact
//! in both modes; imperfect reflection costs success probability only.

use num_complex::Complex64 as C64;

use crate::cavity::{CavityParams, Mode, ENS_G, ENS_S};
use crate::pcd::{pcd_apply, Parity};
use crate::qstate::{computational_basis, PureState, SubsystemLabel};

use super::optimal::assemble_output;
use super::{
    ensemble_hadamard, measure_two, psi_plus, require_unit_pair, sigma_z, BranchRecord,
    IterationTrace, ProtocolError, ProtocolResult, RoundRecord,
};

/// Two recursed classes agreeing this closely (after phase canonicalization)
/// are pooled together.
const CLASS_MERGE_EPS: f64 = 1e-9;
/// Branches below this probability mass are dropped as numerical dust.
const MASS_FLOOR: f64 = 1e-30;
/// Class count can double per round in practical mode, so cap the cascade
/// depth at something that stays cheap.
const MAX_ROUNDS: usize = 32;

/// Result of a cascaded run: the aggregate outcome plus per-round bookkeeping.
#[derive(Debug, Clone)]
pub struct CascadeOutcome {
    pub result: ProtocolResult,
    pub trace: IterationTrace,
}

/// A pool of identical pairs a|GS⟩ + b|SG⟩ awaiting another attempt.
/// `mass` counts attempts per original round-1 attempt; coefficients are
/// normalized and phase-canonicalized.
#[derive(Debug, Clone)]
struct Class {
    a: C64,
    b: C64,
    mass: f64,
}

/// Runs the cascade on pairs α|GS⟩ + β|SG⟩ shared between nodes A and B.
///
/// The input coefficients may be complex; |α|² + |β|² must be 1. Each round
/// consumes two pairs of the entering class per attempt: the parity check
/// acts on the B-side ensembles, both second-copy ensembles are measured in
/// the rotated basis, and the A1 ensemble receives σ_z when the outcomes
/// agree (odd herald) or disagree (even herald). Success branches are exact
/// |ψ⁺⟩ up to phase; even branches bank their surviving pairs for the next
/// round. Branch records report the round-1 detector statistics; multi-round
/// structure lives in the trace.
pub fn efficient_ecp(
    alpha: C64,
    beta: C64,
    params: &CavityParams,
    mode: Mode,
    rounds: usize,
) -> Result<CascadeOutcome, ProtocolError> {
    require_unit_pair(alpha, beta)?;
    if rounds == 0 || rounds > MAX_ROUNDS {
        return Err(ProtocolError::Invalid(format!(
            "rounds must be between 1 and {MAX_ROUNDS}, got {rounds}"
        )));
    }

    let target = psi_plus("EA1", "EB1");
    let (a0, b0) = canonical(alpha, beta);
    let mut classes = vec![Class { a: a0, b: b0, mass: 1.0 }];
    let mut trace_rounds: Vec<RoundRecord> = Vec::new();
    let mut cumulative = 0.0;
    let mut kept: Vec<(f64, PureState)> = Vec::new();
    let mut round1 = (0.0, 0.0, 0.0);

    for round in 1..=rounds {
        if classes.is_empty() {
            break;
        }
        let reach: f64 = classes.iter().map(|c| c.mass).sum();
        let mut next: Vec<Class> = Vec::new();
        let mut round_kept: Vec<(f64, PureState)> = Vec::new();
        let mut odd_mass = 0.0;
        let mut even_mass = 0.0;
        let mut loss_mass = 0.0;

        for class in &classes {
            let joint = two_copies(class)?;
            let correction = sigma_z(joint.label("EA1")?)?;
            for outcome in pcd_apply(&joint, "EB1", "EB2", params, mode)? {
                let p = class.mass * outcome.probability;
                if p <= MASS_FLOOR {
                    continue;
                }
                match outcome.parity {
                    Parity::Loss => loss_mass += p,
                    Parity::Odd => {
                        let post = outcome.post_state.expect("heralded branch has a state");
                        for ((o1, o2), q, st) in rotated_pair_outcomes(&post)? {
                            let fixed = if o1 == o2 { st.apply(&correction)? } else { st };
                            odd_mass += p * q;
                            round_kept.push((p * q, fixed));
                        }
                    }
                    Parity::Even => {
                        let post = outcome.post_state.expect("heralded branch has a state");
                        for ((o1, o2), q, st) in rotated_pair_outcomes(&post)? {
                            let fixed = if o1 != o2 { st.apply(&correction)? } else { st };
                            even_mass += p * q;
                            let a = fixed.amplitude(&[ENS_G, ENS_S]);
                            let b = fixed.amplitude(&[ENS_S, ENS_G]);
                            bank(&mut next, a, b, p * q);
                        }
                    }
                }
            }
        }

        // Two banked pairs feed one attempt of the next round.
        for class in &mut next {
            class.mass /= 2.0;
        }
        next.retain(|c| c.mass > MASS_FLOOR);

        let fidelity = if odd_mass > 0.0 {
            let mut acc = 0.0;
            for (w, st) in &round_kept {
                acc += w * st.fidelity(&target)?;
            }
            Some(acc / odd_mass)
        } else {
            None
        };
        let recursed_magnitudes = next
            .iter()
            .max_by(|x, y| x.mass.total_cmp(&y.mass))
            .map(|c| (c.a.norm(), c.b.norm()));
        trace_rounds.push(RoundRecord {
            round,
            reach_probability: reach,
            success_probability: if reach > 0.0 { odd_mass / reach } else { 0.0 },
            fidelity,
            recursed_magnitudes,
        });
        cumulative += odd_mass;
        kept.extend(round_kept);
        if round == 1 {
            round1 = (even_mass, odd_mass, loss_mass);
        }
        classes = next;
    }

    let mut branches = vec![
        BranchRecord {
            detector: "D_h".to_string(),
            probability: round1.0,
            fidelity: None,
        },
        BranchRecord {
            detector: "D_v".to_string(),
            probability: round1.1,
            fidelity: trace_rounds.first().and_then(|r| r.fidelity),
        },
    ];
    if round1.2 > 1e-12 {
        branches.push(BranchRecord {
            detector: "loss".to_string(),
            probability: round1.2,
            fidelity: None,
        });
    }

    let output = assemble_output(&kept, cumulative)?;
    let fidelity_vs_target = match &output {
        Some(o) => Some(o.fidelity(&target)?),
        None => None,
    };
    Ok(CascadeOutcome {
        result: ProtocolResult {
            success_probability: cumulative,
            branches,
            output,
            fidelity_vs_target,
            target_name: "psi_plus".to_string(),
        },
        trace: IterationTrace {
            rounds: trace_rounds,
            cumulative_success: cumulative,
        },
    })
}

fn two_copies(class: &Class) -> Result<PureState, ProtocolError> {
    let one = pair_state(class.a, class.b, "EA1", "EB1")?;
    let two = pair_state(class.a, class.b, "EA2", "EB2")?;
    Ok(one.tensor(&two)?)
}

fn pair_state(a: C64, b: C64, na: &str, nb: &str) -> Result<PureState, ProtocolError> {
    Ok(PureState::new(
        vec![SubsystemLabel::ensemble(na), SubsystemLabel::ensemble(nb)],
        [(vec![ENS_G, ENS_S], a), (vec![ENS_S, ENS_G], b)],
    )?)
}

/// Rotates both second-copy ensembles into the {(|G⟩±|S⟩)/√2} basis and
/// measures them, returning every joint outcome of nonzero probability with
/// its post state on (EA1, EB1).
fn rotated_pair_outcomes(post: &PureState) -> Result<super::PairBranches, ProtocolError> {
    let ha = ensemble_hadamard(post.label("EA2")?)?;
    let hb = ensemble_hadamard(post.label("EB2")?)?;
    let rotated = post.apply(&ha)?.apply(&hb)?;
    Ok(measure_two(&rotated, "EA2", "EB2", &computational_basis(2))?)
}

/// Normalizes and rotates (a, b) so the larger-magnitude coefficient is
/// positive real; phase-equivalent classes then get identical coordinates.
fn canonical(a: C64, b: C64) -> (C64, C64) {
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    let anchor = if a.norm() >= b.norm() { a } else { b };
    let phase = anchor / anchor.norm();
    (a * phase.conj(), b * phase.conj())
}

fn bank(pool: &mut Vec<Class>, a: C64, b: C64, mass: f64) {
    let (a, b) = canonical(a, b);
    for class in pool.iter_mut() {
        if (class.a - a).norm() <= CLASS_MERGE_EPS && (class.b - b).norm() <= CLASS_MERGE_EPS {
            class.mass += mass;
            return;
        }
    }
    pool.push(Class { a, b, mass });
}
