//! Closed-form efficiency and fidelity expressions for the distillation
//! protocols at finite coupling, written in terms of the two reflection
//! coefficients (r0, r) of one node.
//!
//! These are the quantities the circuit simulations in [`crate::protocols`]
//! must reproduce; keeping them as independent formulas (rather than reusing
//! the simulator) is what makes the cross-checks meaningful. At the ideal
//! point (r0, r) = (−1, +1) every expression collapses to its lossless
//! limit: η_c = 2α², F_c = 1, η_c′ = 2|αβ|², η_p = f₀² + (1−f₀)²,
//! F_p = f₀² / (f₀² + (1−f₀)²).

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::cavity::ReflectionPair;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("invalid analytics input: {0}")]
    InvalidParameter(String),
    #[error("fidelity denominator vanished; the branch has zero probability")]
    DegenerateDenominator,
}

/// Guard for the single-pair concentration coefficient: real, and not
/// larger than its partner β = √(1 − α²). The concentration step attenuates
/// the β component, so the formulas below assume α ≤ β; for the opposite
/// ordering relabel the two ensembles first.
fn validate_concentration_alpha(alpha: f64) -> Result<f64, AnalyticsError> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(AnalyticsError::InvalidParameter(format!(
            "alpha must be a nonnegative real coefficient, got {alpha}"
        )));
    }
    let beta_sq = 1.0 - alpha * alpha;
    if alpha * alpha > 0.5 + 1e-12 {
        return Err(AnalyticsError::InvalidParameter(format!(
            "alpha = {alpha} exceeds beta = {}; relabel so alpha is the smaller coefficient",
            beta_sq.max(0.0).sqrt()
        )));
    }
    Ok(beta_sq.sqrt())
}

fn validate_fidelity_weight(f0: f64) -> Result<f64, AnalyticsError> {
    if !f0.is_finite() || !(0.0..=1.0).contains(&f0) {
        return Err(AnalyticsError::InvalidParameter(format!(
            "mixture weight f0 must lie in [0, 1], got {f0}"
        )));
    }
    Ok(1.0 - f0)
}

/// Success probability of the single-photon optimal concentration step on
/// α|GS⟩ + β|SG⟩ (α ≤ β real):
///
/// η_c = ¼ (α²|r+1|² + (α⁴/β²)|r−1|² + β²|r0+1|² + α²|r0−1|²).
pub fn eta_c(alpha: f64, pair: &ReflectionPair) -> Result<f64, AnalyticsError> {
    let beta = validate_concentration_alpha(alpha)?;
    let a2 = alpha * alpha;
    let b2 = beta * beta;
    let one = C64::ONE;
    Ok(0.25
        * (a2 * (pair.r + one).norm_sqr()
            + a2 * a2 / b2 * (pair.r - one).norm_sqr()
            + b2 * (pair.r0 + one).norm_sqr()
            + a2 * (pair.r0 - one).norm_sqr()))
}

/// Fidelity of the optimal concentration output against the Bell target in
/// the h-detection branch (after its conditional phase flip):
///
/// F_c = |u − w|² / (2 (|u|² + |w|²)),
///
/// with u = α[r(1 + α/β) + 1 − α/β] and w = β[r0(1 + α/β) + 1 − α/β]. The
/// denominator is the (unnormalized) branch weight; a vanishing weight has
/// no conditional state and is rejected.
pub fn f_c(alpha: f64, pair: &ReflectionPair) -> Result<f64, AnalyticsError> {
    let beta = validate_concentration_alpha(alpha)?;
    let ratio = alpha / beta;
    let plus = C64::new(1.0 + ratio, 0.0);
    let minus = C64::new(1.0 - ratio, 0.0);
    let u = alpha * (pair.r * plus + minus);
    let w = beta * (pair.r0 * plus + minus);
    let den = 2.0 * (u.norm_sqr() + w.norm_sqr());
    if den < 1e-300 {
        return Err(AnalyticsError::DegenerateDenominator);
    }
    Ok((u - w).norm_sqr() / den)
}

/// Success probability of one two-outcome (cascade) concentration round on
/// two identical copies of α|GS⟩ + β|SG⟩, α complex and unknown to the
/// parties:
///
/// η_c′ = (|α|² − |α|⁴) |r0 − r|² / 2.
pub fn eta_c_prime(alpha: C64, pair: &ReflectionPair) -> Result<f64, AnalyticsError> {
    let a2 = alpha.norm_sqr();
    if !a2.is_finite() || a2 > 1.0 + 1e-9 {
        return Err(AnalyticsError::InvalidParameter(format!(
            "|alpha| must not exceed 1, got |alpha|^2 = {a2}"
        )));
    }
    let a2 = a2.min(1.0);
    Ok((a2 - a2 * a2) * (pair.r0 - pair.r).norm_sqr() / 2.0)
}

/// The purification branch coefficients. `c[i][j]` weights the mixture term
/// with i phase errors on pair 1 and j on pair 2 in the success probability;
/// `c_prime[i][j]` plays the same role in the conditioned fidelity. By
/// construction `c[0][1]` and `c[1][0]` are the same expression and compare
/// exactly equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EppCoefficients {
    pub c: [[f64; 2]; 2],
    pub c_prime: [[f64; 2]; 2],
}

/// Evaluates both coefficient sets from one reflection pair.
pub fn epp_coefficients(pair: &ReflectionPair) -> EppCoefficients {
    let r = pair.r;
    let r0 = pair.r0;
    let sum = r + r0;
    let diff = r - r0;
    let tail = ((sum * sum).norm_sqr() + (diff * diff).norm_sqr()) / 32.0;
    let c00 = 0.5 * (r0 * r).norm_sqr() + tail;
    let c11 = 0.25 * (r0.norm_sqr().powi(2) + r.norm_sqr().powi(2)) + tail;
    let c01 = ((r0 * sum).norm_sqr() + (r * sum).norm_sqr()) / 8.0;
    let quarter_sum_sq = sum * sum * 0.25;
    let cp00 = 2.0 * (r0 * r + quarter_sum_sq).norm_sqr();
    let cp11 =
        (r0 * r0 + quarter_sum_sq).norm_sqr() + (r * r + quarter_sum_sq).norm_sqr();
    let cp01 = sum.norm_sqr().powi(2) / 2.0;
    let cp10 = (r0 * sum).norm_sqr() + (r * sum).norm_sqr();
    EppCoefficients {
        c: [[c00, c01], [c01, c11]],
        c_prime: [[cp00, cp01], [cp10, cp11]],
    }
}

/// Success probability of one purification round on the mixture
/// f₀ ψ⁺ + (1−f₀) φ⁺ per pair:
///
/// η_p = f₀² c₀₀ + f₀(1−f₀)(c₀₁ + c₁₀) + (1−f₀)² c₁₁.
pub fn eta_p(f0: f64, pair: &ReflectionPair) -> Result<f64, AnalyticsError> {
    let f1 = validate_fidelity_weight(f0)?;
    let k = epp_coefficients(pair);
    Ok(f0 * f0 * k.c[0][0] + f0 * f1 * (k.c[0][1] + k.c[1][0]) + f1 * f1 * k.c[1][1])
}

/// Post-round fidelity of the kept pair in the double-h-detection branch,
/// conditioned on the two conjugate-basis checks agreeing (the instances
/// needing no phase correction):
///
/// F_p = (f₀² c′₀₀ + f₀(1−f₀) c′₀₁) /
///       (f₀² c′₀₀ + f₀(1−f₀)(c′₀₁ + c′₁₀) + (1−f₀)² c′₁₁).
pub fn f_p(f0: f64, pair: &ReflectionPair) -> Result<f64, AnalyticsError> {
    let f1 = validate_fidelity_weight(f0)?;
    let k = epp_coefficients(pair);
    let numerator = f0 * f0 * k.c_prime[0][0] + f0 * f1 * k.c_prime[0][1];
    let denominator = numerator + f0 * f1 * k.c_prime[1][0] + f1 * f1 * k.c_prime[1][1];
    if denominator < 1e-300 {
        return Err(AnalyticsError::DegenerateDenominator);
    }
    Ok(numerator / denominator)
}

/// Efficiency and fidelity bundled, with the purification coefficients
/// attached when they are what the numbers came from.
#[derive(Debug, Clone, Copy)]
pub struct PracticalMetrics {
    pub eta: f64,
    pub fidelity: f64,
    pub coefficients: Option<EppCoefficients>,
}

/// η_c and F_c for the optimal concentration step.
pub fn concentration_metrics(
    alpha: f64,
    pair: &ReflectionPair,
) -> Result<PracticalMetrics, AnalyticsError> {
    Ok(PracticalMetrics {
        eta: eta_c(alpha, pair)?,
        fidelity: f_c(alpha, pair)?,
        coefficients: None,
    })
}

/// η_p and F_p for one purification round.
pub fn purification_metrics(
    f0: f64,
    pair: &ReflectionPair,
) -> Result<PracticalMetrics, AnalyticsError> {
    Ok(PracticalMetrics {
        eta: eta_p(f0, pair)?,
        fidelity: f_p(f0, pair)?,
        coefficients: Some(epp_coefficients(pair)),
    })
}

#[cfg(test)]
// Frozen reference values keep their full printed precision.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::cavity::{reflection_pair, CavityParams, Mode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn practical_pair(g: f64) -> ReflectionPair {
        let p = CavityParams::scaled(g).unwrap();
        reflection_pair(&p, Mode::Practical).unwrap()
    }

    #[test]
    fn ideal_limits() {
        let ideal = ReflectionPair::IDEAL;
        for alpha in [0.1, 0.3, 0.5, std::f64::consts::FRAC_1_SQRT_2] {
            assert!((eta_c(alpha, &ideal).unwrap() - 2.0 * alpha * alpha).abs() < 1e-14);
            assert!((f_c(alpha, &ideal).unwrap() - 1.0).abs() < 1e-14);
            let a = C64::new(alpha, 0.0);
            let a2 = alpha * alpha;
            assert!((eta_c_prime(a, &ideal).unwrap() - 2.0 * (a2 - a2 * a2)).abs() < 1e-14);
        }
        for f0 in [0.0, 0.3, 0.5, 0.7, 1.0] {
            let f1 = 1.0 - f0;
            let expected_eta = f0 * f0 + f1 * f1;
            assert!((eta_p(f0, &ideal).unwrap() - expected_eta).abs() < 1e-14);
            let expected_f = f0 * f0 / expected_eta;
            assert!((f_p(f0, &ideal).unwrap() - expected_f).abs() < 1e-14);
        }
    }

    #[test]
    fn cascade_efficiency_reference_point() {
        // Frozen: alpha = 0.2, g/kappa = 0.4 at the reference detunings.
        let eta = eta_c_prime(C64::new(0.2, 0.0), &practical_pair(0.4)).unwrap();
        assert!((eta - 0.0640011371065743776).abs() < 1e-15, "eta = {eta:.18}");
        let ideal = eta_c_prime(C64::new(0.2, 0.0), &ReflectionPair::IDEAL).unwrap();
        assert!((ideal - 0.0768).abs() < 1e-15);
        let ratio = eta / ideal;
        assert!((0.82..=0.86).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn purification_reference_point() {
        // Frozen: f0 = 0.7, g/kappa = 0.8 at the reference detunings.
        let pair = practical_pair(0.8);
        let k = epp_coefficients(&pair);
        assert!((k.c[0][0] - 0.90434990882678268).abs() < 1e-14);
        assert!((k.c[0][1] - 0.0120518460182819824).abs() < 1e-14);
        assert!((k.c[1][1] - 0.906141414666590777).abs() < 1e-14);
        let eta = eta_p(0.7, &pair).unwrap();
        assert!((eta - 0.529745957972795116).abs() < 1e-14, "eta = {eta:.18}");
        let fid = f_p(0.7, &pair).unwrap();
        assert!((fid - 0.834911001080679519).abs() < 1e-14, "F = {fid:.18}");
        // Bands relative to the lossless limit.
        assert!((eta / 0.58 - 0.913355).abs() < 1e-4);
        assert!(fid / (0.49f64 / 0.58) >= 0.985);
    }

    #[test]
    fn mirror_symmetric_coefficients_are_identical() {
        for g in [0.1, 0.4, 0.8, 1.3, 2.0] {
            let k = epp_coefficients(&practical_pair(g));
            assert_eq!(k.c[0][1], k.c[1][0]);
        }
    }

    #[test]
    fn coefficients_stay_in_range_for_passive_reflections() {
        // Any pair with |r0|, |r| <= 1 must give probabilities in [0, 1].
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for _ in 0..10_000 {
            let draw = |rng: &mut ChaCha8Rng| {
                let m: f64 = rng.gen_range(0.0..=1.0);
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                C64::from_polar(m, phase)
            };
            let pair = ReflectionPair {
                r0: draw(&mut rng),
                r: draw(&mut rng),
            };
            let k = epp_coefficients(&pair);
            for row in k.c {
                for value in row {
                    assert!((0.0..=1.0 + 1e-12).contains(&value), "c = {value}");
                }
            }
            let f0: f64 = rng.gen_range(0.0..=1.0);
            let eta = eta_p(f0, &pair).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&eta));
            if let Ok(fid) = f_p(f0, &pair) {
                assert!((0.0..=1.0 + 1e-12).contains(&fid));
            }
            let alpha = C64::new(rng.gen_range(0.0..=1.0), 0.0);
            let etac = eta_c_prime(alpha, &pair).unwrap();
            assert!((0.0..=1.0).contains(&etac));
        }
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        let ideal = ReflectionPair::IDEAL;
        assert!(eta_c(-0.1, &ideal).is_err());
        assert!(eta_c(0.9, &ideal).is_err(), "alpha > beta must be rejected");
        assert!(f_c(f64::NAN, &ideal).is_err());
        assert!(eta_c_prime(C64::new(1.2, 0.0), &ideal).is_err());
        assert!(eta_p(1.5, &ideal).is_err());
        assert!(f_p(-0.2, &ideal).is_err());
    }

    #[test]
    fn degenerate_branches_are_rejected() {
        // alpha = 0 at the ideal point leaves the h branch empty.
        assert!(matches!(
            f_c(0.0, &ReflectionPair::IDEAL),
            Err(AnalyticsError::DegenerateDenominator)
        ));
        // A dead cavity (r = r0 = 0) has no h-h coincidences at f0 = 0.
        let dead = ReflectionPair {
            r0: C64::ZERO,
            r: C64::ZERO,
        };
        assert!(matches!(
            f_p(0.0, &dead),
            Err(AnalyticsError::DegenerateDenominator)
        ));
    }

    #[test]
    fn metrics_bundles_match_the_scalars() {
        let pair = practical_pair(0.8);
        let m = concentration_metrics(0.3, &pair).unwrap();
        assert_eq!(m.eta, eta_c(0.3, &pair).unwrap());
        assert_eq!(m.fidelity, f_c(0.3, &pair).unwrap());
        assert!(m.coefficients.is_none());
        let p = purification_metrics(0.7, &pair).unwrap();
        assert_eq!(p.eta, eta_p(0.7, &pair).unwrap());
        assert_eq!(p.fidelity, f_p(0.7, &pair).unwrap());
        assert!(p.coefficients.is_some());
    }
}
