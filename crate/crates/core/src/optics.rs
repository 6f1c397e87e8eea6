//! Linear-optical elements as operators on labelled photon subsystems.
//!
//! Conventions used throughout the crate:
//!
//! * polarization index 0 = |h⟩, 1 = |v⟩;
//! * a polarizing beam splitter transmits h on its own rail and swaps v
//!   between two named rails;
//! * the unbalanced beam splitter acts on the path subsystem alone, mixing a
//!   kept rail with an error rail using real amplitudes (R, T ≥ 0 with
//!   R² + T² = 1 enforced via T = √(1 − R²)).

use num_complex::Complex64 as C64;

use crate::qstate::{LinearOp, StateError, SubsystemKind, SubsystemLabel};

/// Polarization basis index for |h⟩.
pub const POL_H: usize = 0;
/// Polarization basis index for |v⟩.
pub const POL_V: usize = 1;

fn require_kind(
    label: &SubsystemLabel,
    kind: SubsystemKind,
) -> Result<(), StateError> {
    if label.kind != kind {
        return Err(StateError::LabelMismatch(label.name.clone()));
    }
    Ok(())
}

/// Half-wave plate at 45°: swaps |h⟩ ↔ |v⟩ (a polarization σ_x).
pub fn hwp_sigma_x(pol: &SubsystemLabel) -> Result<LinearOp, StateError> {
    require_kind(pol, SubsystemKind::PhotonPolarization)?;
    LinearOp::single(pol, &[[C64::ZERO, C64::ONE], [C64::ONE, C64::ZERO]])
}

/// Half-wave plate at 22.5°: the polarization Hadamard,
/// |h⟩ → (|h⟩ + |v⟩)/√2, |v⟩ → (|h⟩ − |v⟩)/√2.
pub fn photon_hadamard(pol: &SubsystemLabel) -> Result<LinearOp, StateError> {
    require_kind(pol, SubsystemKind::PhotonPolarization)?;
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    LinearOp::single(pol, &[[s, s], [s, -s]])
}

/// Polarizing beam splitter between two rails of a path subsystem:
/// |h⟩ keeps its rail, |v⟩ on `rail_a` exits on `rail_b` and vice versa.
/// Rails other than the named pair are untouched. The element is its own
/// inverse, so the same operator both splits and recombines.
pub fn pbs_route(
    pol: &SubsystemLabel,
    path: &SubsystemLabel,
    rail_a: usize,
    rail_b: usize,
) -> Result<LinearOp, StateError> {
    require_kind(pol, SubsystemKind::PhotonPolarization)?;
    require_kind(path, SubsystemKind::PhotonPath)?;
    for rail in [rail_a, rail_b] {
        if rail >= path.dim {
            return Err(StateError::IndexOutOfRange {
                name: path.name.clone(),
                index: rail,
                dim: path.dim,
            });
        }
    }
    if rail_a == rail_b {
        return Err(StateError::LabelMismatch(path.name.clone()));
    }
    let mut entries = Vec::new();
    for rail in 0..path.dim {
        entries.push(((vec![POL_H, rail], vec![POL_H, rail]), C64::ONE));
        let v_out = if rail == rail_a {
            rail_b
        } else if rail == rail_b {
            rail_a
        } else {
            rail
        };
        entries.push(((vec![POL_V, v_out], vec![POL_V, rail]), C64::ONE));
    }
    LinearOp::from_entries(vec![pol.clone(), path.clone()], entries)
}

/// Unbalanced beam splitter on a path subsystem, mixing `kept` with `error`:
///
/// |kept⟩ → R |kept⟩ + T |error⟩,   |error⟩ → −T |kept⟩ + R |error⟩,
///
/// with T = √(1 − R²). `reflectivity` is the amplitude R ∈ [0, 1]; other
/// rails are untouched.
pub fn ubs_split(
    path: &SubsystemLabel,
    kept: usize,
    error: usize,
    reflectivity: f64,
) -> Result<LinearOp, StateError> {
    require_kind(path, SubsystemKind::PhotonPath)?;
    for rail in [kept, error] {
        if rail >= path.dim {
            return Err(StateError::IndexOutOfRange {
                name: path.name.clone(),
                index: rail,
                dim: path.dim,
            });
        }
    }
    if kept == error || !(0.0..=1.0).contains(&reflectivity) || !reflectivity.is_finite() {
        return Err(StateError::LabelMismatch(path.name.clone()));
    }
    let r = C64::new(reflectivity, 0.0);
    let t = C64::new((1.0 - reflectivity * reflectivity).max(0.0).sqrt(), 0.0);
    let mut entries = vec![
        ((vec![kept], vec![kept]), r),
        ((vec![error], vec![kept]), t),
        ((vec![kept], vec![error]), -t),
        ((vec![error], vec![error]), r),
    ];
    for rail in (0..path.dim).filter(|r| *r != kept && *r != error) {
        entries.push(((vec![rail], vec![rail]), C64::ONE));
    }
    LinearOp::from_entries(vec![path.clone()], entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::PureState;

    #[test]
    fn elements_are_unitary() {
        let pol = SubsystemLabel::polarization("q");
        let path = SubsystemLabel::path("p", 3);
        assert!(hwp_sigma_x(&pol).unwrap().is_unitary(1e-12));
        assert!(photon_hadamard(&pol).unwrap().is_unitary(1e-12));
        assert!(pbs_route(&pol, &path, 0, 1).unwrap().is_unitary(1e-12));
        assert!(ubs_split(&path, 0, 2, 0.3).unwrap().is_unitary(1e-12));
    }

    #[test]
    fn pbs_routes_v_and_passes_h() {
        let pol = SubsystemLabel::polarization("q");
        let path = SubsystemLabel::path("p", 2);
        let pbs = pbs_route(&pol, &path, 0, 1).unwrap();
        let h_in = PureState::basis_state(vec![pol.clone(), path.clone()], &[POL_H, 0]).unwrap();
        let h_out = h_in.apply(&pbs).unwrap();
        assert!((h_out.amplitude(&[POL_H, 0]) - C64::ONE).norm() < 1e-15);
        let v_in = PureState::basis_state(vec![pol, path], &[POL_V, 0]).unwrap();
        let v_out = v_in.apply(&pbs).unwrap();
        assert!((v_out.amplitude(&[POL_V, 1]) - C64::ONE).norm() < 1e-15);
        // Self-inverse: applying twice restores the input.
        let back = v_out.apply(&pbs).unwrap();
        assert!((back.amplitude(&[POL_V, 0]) - C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn ubs_amplitudes_and_orthogonal_port() {
        let path = SubsystemLabel::path("p", 3);
        let ubs = ubs_split(&path, 0, 2, 0.6).unwrap();
        let on_kept = PureState::basis_state(vec![path.clone()], &[0]).unwrap();
        let out = on_kept.apply(&ubs).unwrap();
        assert!((out.amplitude(&[0]) - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((out.amplitude(&[2]) - C64::new(0.8, 0.0)).norm() < 1e-15);
        // The bystander rail is untouched.
        let bystander = PureState::basis_state(vec![path], &[1]).unwrap();
        let same = bystander.apply(&ubs).unwrap();
        assert!((same.amplitude(&[1]) - C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn ubs_rejects_bad_reflectivity() {
        let path = SubsystemLabel::path("p", 3);
        assert!(ubs_split(&path, 0, 2, 1.2).is_err());
        assert!(ubs_split(&path, 0, 2, -0.1).is_err());
        assert!(ubs_split(&path, 0, 0, 0.5).is_err());
        assert!(ubs_split(&path, 0, 2, f64::NAN).is_err());
    }

    #[test]
    fn kind_checks_reject_mislabeled_subsystems() {
        let ens = SubsystemLabel::ensemble("e");
        assert!(hwp_sigma_x(&ens).is_err());
        assert!(photon_hadamard(&ens).is_err());
    }
}
