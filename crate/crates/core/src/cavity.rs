//! Reflection of a resonant probe photon off a single-sided cavity.
//!
//! An h-polarized probe enters the cavity port and reflects with a
//! coefficient that depends on whether the ensemble inside couples to the
//! cavity mode. In the memory ground state |G⟩ the cavity is effectively
//! empty and the probe picks up `r0`; in the single-excitation symmetric
//! state |S⟩ the collective coupling shifts the resonance and the probe picks
//! up `r`. A v-polarized probe never enters the cavity: it takes the mirror
//! arm and reflects with unit coefficient by convention. All rates are
//! quoted in units of the cavity linewidth κ.
//!
//! In the strong-coupling limit (g → ∞, δ′ → 0, γ → 0) the pair approaches
//! (r0, r) = (−1, +1); the `Ideal` mode short-circuits to exactly that.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::qstate::{LinearOp, StateError, SubsystemKind, SubsystemLabel};

/// Ensemble-qubit basis index for the collective ground state.
pub const ENS_G: usize = 0;
/// Ensemble-qubit basis index for the symmetric single-excitation state.
pub const ENS_S: usize = 1;

/// Below this magnitude the coupled-reflection denominator counts as zero.
pub const SINGULAR_EPS: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum CavityError {
    #[error("invalid cavity parameter: {0}")]
    InvalidParameter(String),
    #[error("reflection denominator is singular (|den| = {0:.3e})")]
    SingularDenominator(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Whether a protocol step uses exact unit-modulus reflections or the
/// finite-coupling coefficients computed from [`CavityParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// (r0, r) = (−1, +1): lossless, phase-perfect reflections.
    Ideal,
    /// Coefficients evaluated from g, κ, γ, Δ, δ′.
    Practical,
}

/// Cavity and probe parameters. Only ratios matter; pass κ = 1 to work in
/// linewidth units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Collective coupling rate between the ensemble and the cavity mode.
    pub g: f64,
    /// Cavity field decay rate.
    pub kappa: f64,
    /// Atomic spontaneous-emission rate.
    pub gamma: f64,
    /// Detuning of the atoms from the cavity resonance.
    pub delta: f64,
    /// Detuning of the probe from the bare-cavity resonance.
    pub delta_prime: f64,
}

impl CavityParams {
    /// Probe detuning, in units of κ, at which a realistic phase-stabilised
    /// probe sits slightly off the bare resonance.
    pub const DEFAULT_DELTA_PRIME_OVER_KAPPA: f64 = 0.0566;
    /// Spontaneous-emission rate, in units of κ, for the reference system.
    pub const DEFAULT_GAMMA_OVER_KAPPA: f64 = 0.0566;

    pub fn new(
        g: f64,
        kappa: f64,
        gamma: f64,
        delta: f64,
        delta_prime: f64,
    ) -> Result<Self, CavityError> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(CavityError::InvalidParameter(format!(
                "coupling g must be finite and nonnegative, got {g}"
            )));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(CavityError::InvalidParameter(format!(
                "linewidth kappa must be finite and positive, got {kappa}"
            )));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(CavityError::InvalidParameter(format!(
                "emission rate gamma must be finite and nonnegative, got {gamma}"
            )));
        }
        if !delta.is_finite() || !delta_prime.is_finite() {
            return Err(CavityError::InvalidParameter(
                "detunings must be finite".to_string(),
            ));
        }
        Ok(CavityParams {
            g,
            kappa,
            gamma,
            delta,
            delta_prime,
        })
    }

    /// κ = 1 with the reference detunings: Δ = 0, δ′ = γ = 0.0566.
    pub fn scaled(g_over_kappa: f64) -> Result<Self, CavityError> {
        CavityParams::new(
            g_over_kappa,
            1.0,
            Self::DEFAULT_GAMMA_OVER_KAPPA,
            0.0,
            Self::DEFAULT_DELTA_PRIME_OVER_KAPPA,
        )
    }
}

/// The two reflection coefficients a probe can pick up at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    /// Reflection with the ensemble in |G⟩ (empty cavity).
    pub r0: C64,
    /// Reflection with the ensemble in |S⟩ (coupled cavity).
    pub r: C64,
}

impl ReflectionPair {
    /// The strong-coupling limit: (−1, +1).
    pub const IDEAL: ReflectionPair = ReflectionPair {
        r0: C64::new(-1.0, 0.0),
        r: C64::new(1.0, 0.0),
    };
}

/// Empty-cavity reflection: r0 = (δ′ − iκ/2) / (δ′ + iκ/2).
///
/// The denominator cannot vanish for κ > 0, and |r0| = 1 identically: an
/// empty lossless cavity only rotates the probe's phase.
pub fn reflect_empty(p: &CavityParams) -> C64 {
    let half_kappa = C64::new(0.0, p.kappa / 2.0);
    let dp = C64::new(p.delta_prime, 0.0);
    (dp - half_kappa) / (dp + half_kappa)
}

/// Coupled-cavity reflection:
/// r = [(δ′ − iκ/2)(Δ + iγ/2) − g²] / [(δ′ + iκ/2)(Δ + iγ/2) − g²].
///
/// Errors when the denominator magnitude falls below [`SINGULAR_EPS`]. That
/// requires both δ′γ/2 + κΔ/2 = 0 and δ′Δ − γκ/4 = g², a measure-zero set
/// (the simplest instance is g = γ = Δ = 0: no coupling and no decay at
/// all), so real parameter scans never hit it silently.
pub fn reflect_coupled(p: &CavityParams) -> Result<C64, CavityError> {
    let half_kappa = C64::new(0.0, p.kappa / 2.0);
    let dp = C64::new(p.delta_prime, 0.0);
    let atom = C64::new(p.delta, p.gamma / 2.0);
    let g2 = C64::new(p.g * p.g, 0.0);
    let den = (dp + half_kappa) * atom - g2;
    if den.norm() < SINGULAR_EPS {
        return Err(CavityError::SingularDenominator(den.norm()));
    }
    Ok(((dp - half_kappa) * atom - g2) / den)
}

/// Both coefficients for the requested mode.
pub fn reflection_pair(p: &CavityParams, mode: Mode) -> Result<ReflectionPair, CavityError> {
    match mode {
        Mode::Ideal => Ok(ReflectionPair::IDEAL),
        Mode::Practical => Ok(ReflectionPair {
            r0: reflect_empty(p),
            r: reflect_coupled(p)?,
        }),
    }
}

/// The conditional reflection picked up by one probe photon at one node:
///
/// |h⟩⟨h| ⊗ (r0 |G⟩⟨G| + r |S⟩⟨S|)  +  |v⟩⟨v| ⊗ I.
///
/// The v branch models the plain mirror arm of the node, taken with a +1
/// reflection convention; any fixed mirror phase can be absorbed into the
/// definition of |v⟩.
pub fn reflection_operator(
    pair: &ReflectionPair,
    photon: &SubsystemLabel,
    ensemble: &SubsystemLabel,
) -> Result<LinearOp, CavityError> {
    if photon.kind != SubsystemKind::PhotonPolarization {
        return Err(CavityError::InvalidParameter(format!(
            "`{}` is not a polarization subsystem",
            photon.name
        )));
    }
    if ensemble.kind != SubsystemKind::EnsembleQubit {
        return Err(CavityError::InvalidParameter(format!(
            "`{}` is not an ensemble qubit",
            ensemble.name
        )));
    }
    let h = crate::optics::POL_H;
    let v = crate::optics::POL_V;
    let op = LinearOp::from_entries(
        vec![photon.clone(), ensemble.clone()],
        [
            ((vec![h, ENS_G], vec![h, ENS_G]), pair.r0),
            ((vec![h, ENS_S], vec![h, ENS_S]), pair.r),
            ((vec![v, ENS_G], vec![v, ENS_G]), C64::ONE),
            ((vec![v, ENS_S], vec![v, ENS_S]), C64::ONE),
        ],
    )?;
    Ok(op)
}
