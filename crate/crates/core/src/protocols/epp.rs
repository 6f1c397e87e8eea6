//! Purification of shared-pair mixtures with one parity check per node.
//!
//! The purifiable form is a bit-flip mixture f·|ψ⁺⟩⟨ψ⁺| + (1−f)·|φ⁺⟩⟨φ⁺|
//! across two nodes. Each attempt consumes two such pairs: node A runs a
//! parity check on its two ensembles, node B likewise, and only matching
//! heralds (both even or both odd) are kept; the second pair is measured in
//! the (|G⟩±|S⟩)/√2 basis on both nodes and a σ_z on the first node's kept
//! ensemble repairs disagreeing outcomes. Matching-herald plus agreeing-X
//! double-h coincidences reproduce the closed-form fidelity map; a phase-flip
//! mixture f·ψ⁺ + (1−f)·ψ⁻ must first be rotated into bit-flip form.

use crate::cavity::{CavityParams, Mode};
use crate::pcd::{pcd_apply, Parity};
use crate::qstate::{plus_minus_basis, MixedEnsemble, PureState, SubsystemKind};

use super::optimal::assemble_output;
use super::{
    ensemble_hadamard, measure_two, phi_plus, psi_minus, psi_plus, sigma_x, sigma_z,
    BranchRecord, IterationTrace, ProtocolError, ProtocolResult, RoundRecord,
};

/// Keeps iterated runs cheap; each purification round is quadratic in the
/// number of mixture terms.
const MAX_ROUNDS: usize = 32;
/// Branches below this probability mass are dropped as numerical dust.
const MASS_FLOOR: f64 = 1e-30;

/// Outcome of one purification round.
#[derive(Debug, Clone)]
pub struct PurificationRound {
    /// Success counts every kept herald (hh and vv, all X outcomes); the
    /// output is the mixture over all of them. Branches list, in order,
    /// "D_h D'_h", "D_v D'_v", "parity mismatch", and "loss" when present.
    pub result: ProtocolResult,
    /// Fidelity against |ψ⁺⟩ conditioned on the double-h herald with
    /// agreeing X outcomes; `None` when that branch has zero probability.
    /// This is the quantity the closed-form fidelity map describes.
    pub conditioned_fidelity: Option<f64>,
    /// Same conditioning on the double-v herald.
    pub conditioned_fidelity_vv: Option<f64>,
}

/// f·|ψ⁺⟩⟨ψ⁺| + (1−f)·|φ⁺⟩⟨φ⁺| on two named ensembles.
pub fn bit_flip_mixture(f0: f64, a: &str, b: &str) -> Result<MixedEnsemble, ProtocolError> {
    require_weight(f0)?;
    Ok(MixedEnsemble::new(vec![
        (f0, psi_plus(a, b)),
        (1.0 - f0, phi_plus(a, b)),
    ])?)
}

/// f·|ψ⁺⟩⟨ψ⁺| + (1−f)·|ψ⁻⟩⟨ψ⁻| on two named ensembles.
pub fn phase_flip_mixture(f0: f64, a: &str, b: &str) -> Result<MixedEnsemble, ProtocolError> {
    require_weight(f0)?;
    Ok(MixedEnsemble::new(vec![
        (f0, psi_plus(a, b)),
        (1.0 - f0, psi_minus(a, b)),
    ])?)
}

/// Rotates a phase-flip mixture into the purifiable bit-flip form.
///
/// Applies the memory-basis Hadamard on both ensembles, then σ_z and σ_x on
/// the first-listed ensemble. This sends ψ⁺ ↦ ψ⁺ and ψ⁻ ↦ φ⁺ exactly, so
/// f·ψ⁺ + (1−f)·ψ⁻ becomes f·ψ⁺ + (1−f)·φ⁺ with the same weight.
pub fn convert_phase_flip_mixture(
    input: &MixedEnsemble,
) -> Result<MixedEnsemble, ProtocolError> {
    let (first, second) = pair_names(input)?;
    let sample = &input.terms()[0].1;
    let ha = ensemble_hadamard(sample.label(&first)?)?;
    let hb = ensemble_hadamard(sample.label(&second)?)?;
    let z = sigma_z(sample.label(&first)?)?;
    let x = sigma_x(sample.label(&first)?)?;
    Ok(input.apply(&ha)?.apply(&hb)?.apply(&z)?.apply(&x)?)
}

/// Runs one purification round on two copies of `input`.
pub fn epp_round(
    input: &MixedEnsemble,
    params: &CavityParams,
    mode: Mode,
) -> Result<PurificationRound, ProtocolError> {
    let (na, nb) = pair_names(input)?;
    let na2 = format!("{na}_2");
    let nb2 = format!("{nb}_2");
    let target = psi_plus(&na, &nb);

    let mut kept: Vec<(f64, PureState)> = Vec::new();
    let mut hh: Vec<(f64, PureState)> = Vec::new();
    let mut vv: Vec<(f64, PureState)> = Vec::new();
    let mut hh_same = (0.0, 0.0);
    let mut vv_same = (0.0, 0.0);
    let mut mismatch = 0.0;
    let mut loss = 0.0;

    for (wi, si) in input.terms() {
        for (wj, sj) in input.terms() {
            let w = wi * wj;
            if w <= MASS_FLOOR {
                continue;
            }
            let copy2 = sj.renamed(&na, &na2)?.renamed(&nb, &nb2)?;
            let joint = si.tensor(&copy2)?;
            let correction = sigma_z(joint.label(&na)?)?;
            for node_a in pcd_apply(&joint, &na, &na2, params, mode)? {
                let pa = w * node_a.probability;
                if pa <= MASS_FLOOR {
                    continue;
                }
                if node_a.parity == Parity::Loss {
                    loss += pa;
                    continue;
                }
                let post_a = node_a.post_state.expect("heralded branch has a state");
                for node_b in pcd_apply(&post_a, &nb, &nb2, params, mode)? {
                    let p = pa * node_b.probability;
                    if p <= MASS_FLOOR {
                        continue;
                    }
                    if node_b.parity == Parity::Loss {
                        loss += p;
                        continue;
                    }
                    if node_a.parity != node_b.parity {
                        mismatch += p;
                        continue;
                    }
                    let post = node_b.post_state.expect("heralded branch has a state");
                    for ((oa, ob), q, st) in
                        measure_two(&post, &na2, &nb2, &plus_minus_basis())?
                    {
                        let mass = p * q;
                        let fixed = if oa == ob { st } else { st.apply(&correction)? };
                        let fidelity = fixed.fidelity(&target)?;
                        kept.push((mass, fixed.clone()));
                        match node_a.parity {
                            Parity::Even => {
                                hh.push((mass, fixed));
                                if oa == ob {
                                    hh_same.0 += mass;
                                    hh_same.1 += mass * fidelity;
                                }
                            }
                            _ => {
                                vv.push((mass, fixed));
                                if oa == ob {
                                    vv_same.0 += mass;
                                    vv_same.1 += mass * fidelity;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let eta: f64 = kept.iter().map(|(p, _)| p).sum();
    let hh_total: f64 = hh.iter().map(|(p, _)| p).sum();
    let vv_total: f64 = vv.iter().map(|(p, _)| p).sum();
    let mut branches = vec![
        BranchRecord {
            detector: "D_h D'_h".to_string(),
            probability: hh_total,
            fidelity: branch_fidelity(&hh, hh_total, &target)?,
        },
        BranchRecord {
            detector: "D_v D'_v".to_string(),
            probability: vv_total,
            fidelity: branch_fidelity(&vv, vv_total, &target)?,
        },
        BranchRecord {
            detector: "parity mismatch".to_string(),
            probability: mismatch,
            fidelity: None,
        },
    ];
    if loss > 1e-12 {
        branches.push(BranchRecord {
            detector: "loss".to_string(),
            probability: loss,
            fidelity: None,
        });
    }

    let output = assemble_output(&kept, eta)?;
    let fidelity_vs_target = match &output {
        Some(o) => Some(o.fidelity(&target)?),
        None => None,
    };
    Ok(PurificationRound {
        result: ProtocolResult {
            success_probability: eta,
            branches,
            output,
            fidelity_vs_target,
            target_name: "psi_plus".to_string(),
        },
        conditioned_fidelity: ratio(hh_same),
        conditioned_fidelity_vv: ratio(vv_same),
    })
}

/// Iterates the purification map from a bit-flip mixture of weight `f0`.
///
/// Round k records the entering attempt mass (two pairs per attempt), the
/// kept probability, and the post-round conditioned fidelity, which seeds
/// the next round's bit-flip mixture. Kept pairs from round k are paired up
/// for round k+1, so reach halves relative to the kept mass; the standing
/// yield after the last round is its reach × success.
pub fn epp_iterate(
    f0: f64,
    rounds: usize,
    params: &CavityParams,
    mode: Mode,
) -> Result<IterationTrace, ProtocolError> {
    require_weight(f0)?;
    if rounds == 0 || rounds > MAX_ROUNDS {
        return Err(ProtocolError::Invalid(format!(
            "rounds must be between 1 and {MAX_ROUNDS}, got {rounds}"
        )));
    }
    let mut f = f0;
    let mut reach = 1.0;
    let mut cumulative = 0.0;
    let mut records = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let mixture = bit_flip_mixture(f, "EA", "EB")?;
        let outcome = epp_round(&mixture, params, mode)?;
        let eta = outcome.result.success_probability;
        let next = outcome.conditioned_fidelity.ok_or_else(|| {
            ProtocolError::Invalid(
                "purification conditioning branch has zero probability".to_string(),
            )
        })?;
        records.push(RoundRecord {
            round,
            reach_probability: reach,
            success_probability: eta,
            fidelity: Some(next),
            recursed_magnitudes: None,
        });
        cumulative += reach * eta;
        reach *= eta / 2.0;
        f = next;
    }
    Ok(IterationTrace {
        rounds: records,
        cumulative_success: cumulative,
    })
}

fn require_weight(f0: f64) -> Result<(), ProtocolError> {
    if !f0.is_finite() || !(0.0..=1.0).contains(&f0) {
        return Err(ProtocolError::Invalid(format!(
            "mixture weight must lie in [0, 1], got {f0}"
        )));
    }
    Ok(())
}

/// Validates that every term lives on the same two ensembles and returns
/// their names in subsystem order.
fn pair_names(input: &MixedEnsemble) -> Result<(String, String), ProtocolError> {
    let first = input
        .terms()
        .first()
        .ok_or_else(|| ProtocolError::Invalid("empty mixture".to_string()))?;
    let labels = first.1.subsystems();
    if labels.len() != 2 || labels.iter().any(|l| l.kind != SubsystemKind::EnsembleQubit) {
        return Err(ProtocolError::Invalid(
            "purification expects terms on exactly two ensemble qubits".to_string(),
        ));
    }
    for (_, term) in input.terms() {
        if term.subsystems() != labels {
            return Err(ProtocolError::Invalid(
                "every mixture term must share the same two ensembles".to_string(),
            ));
        }
    }
    let (na, nb) = (labels[0].name.clone(), labels[1].name.clone());
    if na.ends_with("_2") || nb.ends_with("_2") {
        return Err(ProtocolError::Invalid(
            "ensemble names ending in _2 collide with the second-copy labels".to_string(),
        ));
    }
    Ok((na, nb))
}

fn branch_fidelity(
    parts: &[(f64, PureState)],
    total: f64,
    target: &PureState,
) -> Result<Option<f64>, ProtocolError> {
    if total <= MASS_FLOOR {
        return Ok(None);
    }
    let mut acc = 0.0;
    for (w, st) in parts {
        acc += w * st.fidelity(target)?;
    }
    Ok(Some(acc / total))
}

fn ratio((mass, weighted): (f64, f64)) -> Option<f64> {
    if mass > MASS_FLOOR {
        Some(weighted / mass)
    } else {
        None
    }
}

#[cfg(test)]
// Frozen reference values keep their full printed precision.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::analytics;
    use crate::cavity::reflection_pair;

    fn params(g: f64) -> CavityParams {
        CavityParams::scaled(g).unwrap()
    }

    #[test]
    fn ideal_round_matches_the_fidelity_map() {
        let mixture = bit_flip_mixture(0.7, "EA", "EB").unwrap();
        let round = epp_round(&mixture, &params(1.0), Mode::Ideal).unwrap();
        assert!((round.result.success_probability - 0.58).abs() < 1e-12);
        let f = round.conditioned_fidelity.unwrap();
        assert!((f - 49.0 / 58.0).abs() < 1e-12);
        let fv = round.conditioned_fidelity_vv.unwrap();
        assert!((fv - 49.0 / 58.0).abs() < 1e-12);
        let mismatch = &round.result.branches[2];
        assert_eq!(mismatch.detector, "parity mismatch");
        assert!((mismatch.probability - 0.42).abs() < 1e-12);
    }

    #[test]
    fn ideal_iterates_reach_the_frozen_fixed_points() {
        let trace = epp_iterate(0.7, 3, &params(1.0), Mode::Ideal).unwrap();
        let fids: Vec<f64> = trace.rounds.iter().map(|r| r.fidelity.unwrap()).collect();
        assert!((fids[0] - 0.844827586206896552).abs() < 1e-15);
        assert!((fids[1] - 0.967365028203062047).abs() < 1e-15);
        assert!((fids[2] - 0.998863179956481676).abs() < 1e-15);
        assert!(fids[2] >= 0.997);
        assert!((trace.rounds[1].reach_probability - 0.29).abs() < 1e-12);
        assert!(trace.is_consistent(1e-12));
    }

    #[test]
    fn practical_round_matches_closed_forms() {
        let p = params(0.8);
        let pair = reflection_pair(&p, Mode::Practical).unwrap();
        let mixture = bit_flip_mixture(0.7, "EA", "EB").unwrap();
        let round = epp_round(&mixture, &p, Mode::Practical).unwrap();
        let eta = analytics::eta_p(0.7, &pair).unwrap();
        let f = analytics::f_p(0.7, &pair).unwrap();
        assert!((round.result.success_probability - eta).abs() < 1e-12);
        assert!((round.conditioned_fidelity.unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn phase_flip_conversion_is_exact() {
        let input = phase_flip_mixture(0.77, "EA", "EB").unwrap();
        let converted = convert_phase_flip_mixture(&input).unwrap();
        let psi = psi_plus("EA", "EB");
        let phi = phi_plus("EA", "EB");
        assert!((converted.fidelity(&psi).unwrap() - 0.77).abs() < 1e-12);
        assert!((converted.fidelity(&phi).unwrap() - 0.23).abs() < 1e-12);
        for (w, term) in converted.terms() {
            let is_psi = term.fidelity(&psi).unwrap() > 1.0 - 1e-12;
            let is_phi = term.fidelity(&phi).unwrap() > 1.0 - 1e-12;
            assert!(is_psi || is_phi, "term of weight {w} left the Bell frame");
        }
    }

    #[test]
    fn converted_mixture_purifies() {
        let input = phase_flip_mixture(0.8, "EA", "EB").unwrap();
        let converted = convert_phase_flip_mixture(&input).unwrap();
        let round = epp_round(&converted, &params(1.0), Mode::Ideal).unwrap();
        let f = round.conditioned_fidelity.unwrap();
        assert!((f - 16.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn output_mixture_tracks_all_kept_branches() {
        let mixture = bit_flip_mixture(0.9, "EA", "EB").unwrap();
        let round = epp_round(&mixture, &params(0.8), Mode::Practical).unwrap();
        let total: f64 = round.result.branches.iter().map(|b| b.probability).sum();
        assert!(total <= 1.0 + 1e-9);
        assert!((total - 1.0).abs() < 1e-6, "branches must account for all mass");
        let f = round.result.fidelity_vs_target.unwrap();
        assert!(f > 0.0 && f <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params(1.0);
        assert!(bit_flip_mixture(1.2, "EA", "EB").is_err());
        assert!(epp_iterate(0.7, 0, &p, Mode::Ideal).is_err());
        assert!(epp_iterate(f64::NAN, 2, &p, Mode::Ideal).is_err());
        let collision = bit_flip_mixture(0.7, "EA_2", "EB");
        assert!(collision.is_ok(), "construction itself is fine");
        assert!(epp_round(&collision.unwrap(), &p, Mode::Ideal).is_err());
    }
}
