//! Single-probe concentration with known coefficients.
//!
//! One photon reflects off the cavity holding one ensemble of the state,
//! passes a polarization Hadamard, and is then filtered by an unbalanced
//! beam splitter that trims the larger coefficient down to the smaller one.
//! Both final detectors herald success (D_h after a σ_z on the probed
//! ensemble, D_v directly), so the ideal yield is 2·min(|α|²,|β|²), which
//! is the optimum for a single-copy procedure.
//!
//! The same circuit concentrates an N-partite GHZ-class state when the probe
//! bounces off one of its ensembles; the only difference is an extra σ_x on
//! the probe polarization before routing.

use num_complex::Complex64 as C64;

use crate::cavity::{reflection_operator, reflection_pair, CavityParams, Mode, ENS_G, ENS_S};
use crate::optics::{hwp_sigma_x, pbs_route, photon_hadamard, ubs_split, POL_H};
use crate::qstate::{computational_basis, PureState, SubsystemLabel};

use super::{
    ghz_plus, psi_plus, require_unit_pair, sigma_z, BranchRecord, ProtocolError,
    ProtocolResult, StateOutput,
};

/// Concentrates α|GS⟩ + β|SG⟩ on ensembles ("EA", "EB") toward |ψ⁺⟩.
///
/// Requires strictly positive real coefficients with α² + β² = 1. The branch
/// table lists, in order: "D_h" (success, σ_z applied to EB), "D_v"
/// (success, no correction), "D_filter" (heralded filter rejection), and
/// "loss" when the reflection is lossy enough to matter.
pub fn optimal_ecp(
    alpha: f64,
    beta: f64,
    params: &CavityParams,
    mode: Mode,
) -> Result<ProtocolResult, ProtocolError> {
    require_positive_pair(alpha, beta)?;
    let ea = SubsystemLabel::ensemble("EA");
    let eb = SubsystemLabel::ensemble("EB");
    let initial = PureState::new(
        vec![ea, eb.clone()],
        [
            (vec![ENS_G, ENS_S], C64::new(alpha, 0.0)),
            (vec![ENS_S, ENS_G], C64::new(beta, 0.0)),
        ],
    )?;
    let target = psi_plus("EA", "EB");
    run_filter(&initial, &eb, alpha, beta, false, &target, "psi_plus", params, mode)
}

/// Concentrates α|G…G⟩ + β|S…S⟩ on n ensembles ("E1" … "En") toward GHZ⁺.
///
/// Same filter as [`optimal_ecp`] with the probe reflecting off "E1"; the
/// D_h herald applies σ_z to "E1". Requires n ≥ 2 and strictly positive
/// real coefficients with α² + β² = 1.
pub fn ghz_concentrate(
    alpha: f64,
    beta: f64,
    n: usize,
    params: &CavityParams,
    mode: Mode,
) -> Result<ProtocolResult, ProtocolError> {
    require_positive_pair(alpha, beta)?;
    if n < 2 {
        return Err(ProtocolError::Invalid(format!(
            "GHZ concentration needs at least 2 ensembles, got {n}"
        )));
    }
    let names: Vec<String> = (1..=n).map(|i| format!("E{i}")).collect();
    let labels: Vec<SubsystemLabel> = names.iter().map(SubsystemLabel::ensemble).collect();
    let probed = labels[0].clone();
    let initial = PureState::new(
        labels,
        [
            (vec![ENS_G; n], C64::new(alpha, 0.0)),
            (vec![ENS_S; n], C64::new(beta, 0.0)),
        ],
    )?;
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let target = ghz_plus(&name_refs);
    run_filter(&initial, &probed, alpha, beta, true, &target, "ghz_plus", params, mode)
}

fn require_positive_pair(alpha: f64, beta: f64) -> Result<(), ProtocolError> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(ProtocolError::Invalid(format!(
            "coefficients must be strictly positive reals, got alpha={alpha}, beta={beta}"
        )));
    }
    require_unit_pair(C64::new(alpha, 0.0), C64::new(beta, 0.0))
}

/// The common probe-reflect-filter circuit.
///
/// Rail layout: 0 carries the probe to the detectors, 1 is the temporary
/// polarization rail between the two PBS passes, 2 is the filter reject port.
/// The unbalanced splitter sits on whichever rail carries the larger
/// coefficient, with reflectivity min/max so the kept amplitude matches the
/// smaller coefficient.
#[allow(clippy::too_many_arguments)]
fn run_filter(
    initial: &PureState,
    probed: &SubsystemLabel,
    alpha: f64,
    beta: f64,
    sigma_x_after_h1: bool,
    target: &PureState,
    target_name: &str,
    params: &CavityParams,
    mode: Mode,
) -> Result<ProtocolResult, ProtocolError> {
    let pair = reflection_pair(params, mode)?;
    let pol = SubsystemLabel::polarization("probe");
    let rail = SubsystemLabel::path("rail", 3);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let probe = PureState::new(
        vec![pol.clone(), rail.clone()],
        [(vec![0, 0], s), (vec![1, 0], s)],
    )?;

    let mut state = initial.tensor(&probe)?;
    state = state.apply(&reflection_operator(&pair, &pol, probed)?)?;
    state = state.apply(&photon_hadamard(&pol)?)?;
    if sigma_x_after_h1 {
        state = state.apply(&hwp_sigma_x(&pol)?)?;
    }
    state = state.apply(&pbs_route(&pol, &rail, 0, 1)?)?;
    let (filtered_rail, reflectivity) = if alpha <= beta {
        (1, alpha / beta)
    } else {
        (0, beta / alpha)
    };
    state = state.apply(&ubs_split(&rail, filtered_rail, 2, reflectivity)?)?;
    state = state.apply(&pbs_route(&pol, &rail, 0, 1)?)?;
    state = state.apply(&photon_hadamard(&pol)?)?;

    let correction = sigma_z(probed)?;
    let mut branches = Vec::new();
    let mut kept: Vec<(f64, PureState)> = Vec::new();
    let mut detected = 0.0;
    for rail_branch in state.measure(&rail.name, &computational_basis(3))? {
        if rail_branch.probability <= 1e-30 {
            continue;
        }
        detected += rail_branch.probability;
        match rail_branch.outcome {
            0 => {
                for pol_branch in rail_branch.post.measure(&pol.name, &computational_basis(2))? {
                    let p = rail_branch.probability * pol_branch.probability;
                    if p <= 1e-30 {
                        continue;
                    }
                    let (detector, post) = if pol_branch.outcome == POL_H {
                        ("D_h", pol_branch.post.apply(&correction)?)
                    } else {
                        ("D_v", pol_branch.post)
                    };
                    let fidelity = post.fidelity(target)?;
                    branches.push(BranchRecord {
                        detector: detector.to_string(),
                        probability: p,
                        fidelity: Some(fidelity),
                    });
                    kept.push((p, post));
                }
            }
            2 => branches.push(BranchRecord {
                detector: "D_filter".to_string(),
                probability: rail_branch.probability,
                fidelity: None,
            }),
            _ => branches.push(BranchRecord {
                detector: format!("stray rail {}", rail_branch.outcome),
                probability: rail_branch.probability,
                fidelity: None,
            }),
        }
    }
    let loss = (1.0 - detected).max(0.0);
    if loss > 1e-12 {
        branches.push(BranchRecord {
            detector: "loss".to_string(),
            probability: loss,
            fidelity: None,
        });
    }

    let success_probability: f64 = kept.iter().map(|(p, _)| p).sum();
    let output = assemble_output(&kept, success_probability)?;
    let fidelity_vs_target = match &output {
        Some(o) => Some(o.fidelity(target)?),
        None => None,
    };
    Ok(ProtocolResult {
        success_probability,
        branches,
        output,
        fidelity_vs_target,
        target_name: target_name.to_string(),
    })
}

/// Folds kept branches into a single output: pure if one branch remains,
/// otherwise the success-conditioned mixture.
pub(super) fn assemble_output(
    kept: &[(f64, PureState)],
    total: f64,
) -> Result<Option<StateOutput>, ProtocolError> {
    if kept.is_empty() || total <= 1e-30 {
        return Ok(None);
    }
    if kept.len() == 1 {
        return Ok(Some(StateOutput::Pure(kept[0].1.clone())));
    }
    let terms = kept
        .iter()
        .map(|(p, s)| (p / total, s.clone()))
        .collect::<Vec<_>>();
    Ok(Some(StateOutput::Mixture(
        crate::qstate::MixedEnsemble::new(terms)?,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics;

    fn params(g: f64) -> CavityParams {
        CavityParams::scaled(g).unwrap()
    }

    #[test]
    fn ideal_pair_reaches_optimal_yield() {
        let result = optimal_ecp(0.6, 0.8, &params(1.0), Mode::Ideal).unwrap();
        assert!((result.success_probability - 0.72).abs() < 1e-12);
        assert!((result.fidelity_vs_target.unwrap() - 1.0).abs() < 1e-12);
        let reject = result
            .branches
            .iter()
            .find(|b| b.detector == "D_filter")
            .expect("filter branch present");
        assert!((reject.probability - 0.28).abs() < 1e-12);
        for b in &result.branches {
            if b.detector.starts_with("D_h") || b.detector.starts_with("D_v") {
                assert!((b.fidelity.unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swapped_coefficients_filter_the_other_rail() {
        let result = optimal_ecp(0.8, 0.6, &params(1.0), Mode::Ideal).unwrap();
        assert!((result.success_probability - 0.72).abs() < 1e-12);
        assert!((result.fidelity_vs_target.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_input_needs_no_filtering() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let result = optimal_ecp(a, a, &params(1.0), Mode::Ideal).unwrap();
        assert!((result.success_probability - 1.0).abs() < 1e-12);
        assert!(result.branches.iter().all(|b| b.detector != "D_filter"
            || b.probability < 1e-12));
    }

    #[test]
    fn practical_pair_matches_closed_forms() {
        let p = params(0.8);
        let pair = reflection_pair(&p, Mode::Practical).unwrap();
        let result = optimal_ecp(0.6, 0.8, &p, Mode::Practical).unwrap();
        let eta = analytics::eta_c(0.6, &pair).unwrap();
        assert!((result.success_probability - eta).abs() < 1e-12);
        let d_h = result
            .branches
            .iter()
            .find(|b| b.detector == "D_h")
            .expect("D_h branch present");
        let f = analytics::f_c(0.6, &pair).unwrap();
        assert!((d_h.fidelity.unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn ghz_ideal_matches_pair_yield() {
        let result = ghz_concentrate(0.6, 0.8, 3, &params(1.0), Mode::Ideal).unwrap();
        assert!((result.success_probability - 0.72).abs() < 1e-12);
        assert!((result.fidelity_vs_target.unwrap() - 1.0).abs() < 1e-12);
        let reject = result
            .branches
            .iter()
            .find(|b| b.detector == "D_filter")
            .unwrap();
        assert!((reject.probability - 0.28).abs() < 1e-12);
    }

    #[test]
    fn ghz_swapped_coefficients_still_concentrate() {
        let result = ghz_concentrate(0.8, 0.6, 4, &params(1.0), Mode::Ideal).unwrap();
        assert!((result.success_probability - 0.72).abs() < 1e-12);
        assert!((result.fidelity_vs_target.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_practical_keeps_probabilities_sane() {
        let result = ghz_concentrate(0.6, 0.8, 4, &params(0.8), Mode::Practical).unwrap();
        let total: f64 = result.branches.iter().map(|b| b.probability).sum();
        assert!(total <= 1.0 + 1e-9);
        assert!(result.success_probability > 0.0);
        let f = result.fidelity_vs_target.unwrap();
        assert!(f > 0.0 && f <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params(1.0);
        assert!(optimal_ecp(0.0, 1.0, &p, Mode::Ideal).is_err());
        assert!(optimal_ecp(-0.6, 0.8, &p, Mode::Ideal).is_err());
        assert!(optimal_ecp(0.6, 0.6, &p, Mode::Ideal).is_err());
        assert!(ghz_concentrate(0.6, 0.8, 1, &p, Mode::Ideal).is_err());
    }
}
