//! The executable acceptance checks behind `edp verify`.
//!
//! Each check pins a contract of the toolkit: closed-form limits, circuit
//! identities, analytics-simulation agreement, reference operating points,
//! and global properties (conservation, unitarity, monotonicity). The test
//! suite runs the same functions, so a green `verify` and a green test run
//! certify the same thing.

// Frozen reference values keep their full printed precision.
#![allow(clippy::excessive_precision)]

use edp_core::analytics;
use edp_core::cavity::{
    reflect_coupled, reflect_empty, reflection_operator, reflection_pair, CavityParams, Mode,
    ReflectionPair, ENS_G, ENS_S,
};
use edp_core::optics::{hwp_sigma_x, pbs_route, photon_hadamard, ubs_split};
use edp_core::pcd::{pcd_apply, pcd_apply_with, Parity, ParityOutcome};
use edp_core::protocols::{
    bit_flip_mixture, efficient_ecp, ensemble_hadamard, epp_iterate, epp_round, ghz_concentrate,
    optimal_ecp, sigma_x, sigma_z, ProtocolResult,
};
use edp_core::qstate::{PureState, SubsystemLabel};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CheckResult = Result<(), Box<dyn std::error::Error>>;

/// Tolerance for exact algebraic identities evaluated in f64.
const EXACT_TOL: f64 = 1e-12;
/// Tolerance for amplitude-level circuit comparisons.
const AMP_TOL: f64 = 1e-10;
/// Tolerance for analytics-versus-simulation grid agreement.
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn report_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("A{} {}: {} ({})", self.index, self.name, verdict, self.detail)
    }
}

#[derive(Default)]
struct Check {
    points: usize,
    failures: Vec<String>,
}

impl Check {
    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.points += 1;
        let dev = (got - want).abs();
        // A NaN deviation must count as a failure, never slip past.
        if dev.is_nan() || dev > tol {
            self.failures
                .push(format!("{what}: got {got:.15e}, want {want:.15e} +/- {tol:.0e}"));
        }
    }

    fn hold(&mut self, what: &str, ok: bool) {
        self.points += 1;
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn in_band(&mut self, what: &str, got: f64, lo: f64, hi: f64) {
        self.hold(
            &format!("{what}: got {got:.6}, want within [{lo}, {hi}]"),
            (lo..=hi).contains(&got),
        );
    }

    fn finish(self, index: usize, name: &'static str) -> CheckOutcome {
        let passed = self.failures.is_empty();
        let detail = if passed {
            match self.points {
                1 => "1 check".to_string(),
                n => format!("{n} checks"),
            }
        } else {
            let shown = self.failures.len().min(3);
            let mut d = self.failures[..shown].join("; ");
            if self.failures.len() > shown {
                d.push_str(&format!(" (+{} more)", self.failures.len() - shown));
            }
            d
        };
        CheckOutcome {
            index,
            name,
            passed,
            detail,
        }
    }
}

fn guarded(
    index: usize,
    name: &'static str,
    body: impl FnOnce(&mut Check) -> CheckResult,
) -> CheckOutcome {
    let mut check = Check::default();
    if let Err(e) = body(&mut check) {
        check.failures.push(format!("aborted: {e}"));
    }
    check.finish(index, name)
}

/// All nine checks, in order.
pub fn all_checks() -> Vec<CheckOutcome> {
    vec![
        check_ideal_optimal_grid(),
        check_ideal_cascade_recursion(),
        check_ideal_purification_map(),
        check_parity_circuit_identity(),
        check_reflection_limits(),
        check_equivalence_grid(),
        check_reference_bands(),
        check_cascade_fidelity_invariance(),
        check_global_properties(),
    ]
}

/// Prints one line per check; returns whether all passed.
pub fn print_report(checks: &[CheckOutcome]) -> bool {
    for check in checks {
        println!("{}", check.report_line());
    }
    checks.iter().all(|c| c.passed)
}

/// 1: the lossless single-photon concentration yields eta = 2 alpha^2 at
/// unit fidelity across the whole admissible range.
pub fn check_ideal_optimal_grid() -> CheckOutcome {
    guarded(1, "ideal optimal concentration grid", |c| {
        let params = CavityParams::scaled(0.8)?;
        for i in 1..=7 {
            let alpha = i as f64 * 0.1;
            let beta = (1.0 - alpha * alpha).sqrt();
            let result = optimal_ecp(alpha, beta, &params, Mode::Ideal)?;
            c.close(
                &format!("eta at alpha={alpha:.1}"),
                result.success_probability,
                2.0 * alpha * alpha,
                AMP_TOL,
            );
            let fidelity = result.fidelity_vs_target.ok_or("no kept output")?;
            c.close(&format!("fidelity at alpha={alpha:.1}"), fidelity, 1.0, AMP_TOL);
        }
        Ok(())
    })
}

/// 2: the lossless cascade succeeds with 2 a^2 b^2 per attempt, recurses to
/// a' = a^2 / sqrt(a^4 + b^4), and its two-round total matches the closed
/// composition of those rules.
pub fn check_ideal_cascade_recursion() -> CheckOutcome {
    guarded(2, "ideal cascade recursion", |c| {
        let params = CavityParams::scaled(0.8)?;
        for alpha in [0.3f64, 0.6] {
            let a2 = alpha * alpha;
            let b2 = 1.0 - a2;
            let beta = b2.sqrt();
            let out = efficient_ecp(
                C64::new(alpha, 0.0),
                C64::new(beta, 0.0),
                &params,
                Mode::Ideal,
                2,
            )?;
            let tag = format!("alpha={alpha:.1}");
            let round1 = &out.trace.rounds[0];
            c.close(
                &format!("round-1 success, {tag}"),
                round1.success_probability,
                2.0 * a2 * b2,
                AMP_TOL,
            );
            c.close(
                &format!("round-1 fidelity, {tag}"),
                round1.fidelity.ok_or("round 1 kept nothing")?,
                1.0,
                AMP_TOL,
            );
            let (mag_a, _) = round1.recursed_magnitudes.ok_or("no recursed class")?;
            let fail = a2 * a2 + b2 * b2;
            c.close(
                &format!("recursed coefficient, {tag}"),
                mag_a,
                a2 / fail.sqrt(),
                AMP_TOL,
            );
            let a2_next = a2 * a2 / fail;
            let eta_two = 2.0 * a2 * b2 + fail / 2.0 * (2.0 * a2_next * (1.0 - a2_next));
            c.close(
                &format!("two-round total, {tag}"),
                out.trace.cumulative_success,
                eta_two,
                GRID_TOL,
            );
            if alpha == 0.6 {
                // Independently frozen reference for the composition above.
                c.close(
                    "two-round total at alpha=0.6 vs frozen value",
                    out.trace.cumulative_success,
                    0.559249851632047478,
                    EXACT_TOL,
                );
            }
        }
        Ok(())
    })
}

/// 3: one lossless purification round maps f = 0.7 to 49/58 (0.844828 to six
/// places) with success 0.58; the third iterate crosses 0.997. Two rounds do
/// not get there (0.9674), so the round count is pinned at three.
pub fn check_ideal_purification_map() -> CheckOutcome {
    guarded(3, "ideal purification map", |c| {
        let params = CavityParams::scaled(0.8)?;
        let trace = epp_iterate(0.7, 3, &params, Mode::Ideal)?;
        let f1 = trace.rounds[0].fidelity.ok_or("round 1 unconditioned")?;
        c.close("one-round fidelity", f1, 49.0 / 58.0, GRID_TOL);
        c.hold(
            &format!("one-round fidelity prints as 0.844828 (got {f1:.6})"),
            (f1 - 0.844828).abs() < 5e-7,
        );
        c.close(
            "one-round success",
            trace.rounds[0].success_probability,
            0.58,
            GRID_TOL,
        );
        let f2 = trace.rounds[1].fidelity.ok_or("round 2 unconditioned")?;
        let f3 = trace.rounds[2].fidelity.ok_or("round 3 unconditioned")?;
        c.hold(&format!("two rounds stay short of 0.997 (got {f2:.6})"), f2 < 0.997);
        c.hold(&format!("three rounds reach 0.997 (got {f3:.6})"), f3 >= 0.997);
        Ok(())
    })
}

fn random_amp(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn pair_state(amps: [C64; 4]) -> Result<PureState, Box<dyn std::error::Error>> {
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1e-6 {
        return Err("amplitude draw too close to zero".into());
    }
    Ok(PureState::new(
        vec![
            SubsystemLabel::ensemble("E1"),
            SubsystemLabel::ensemble("E2"),
        ],
        [
            (vec![ENS_G, ENS_G], amps[0] / norm),
            (vec![ENS_G, ENS_S], amps[1] / norm),
            (vec![ENS_S, ENS_G], amps[2] / norm),
            (vec![ENS_S, ENS_S], amps[3] / norm),
        ],
    )?)
}

fn random_pair_state(rng: &mut ChaCha8Rng) -> Result<PureState, Box<dyn std::error::Error>> {
    loop {
        let amps = [
            random_amp(rng),
            random_amp(rng),
            random_amp(rng),
            random_amp(rng),
        ];
        if amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3 {
            return pair_state(amps);
        }
    }
}

/// What one parity branch must do to the joint amplitudes: scale them
/// entrywise over (GG, GS, SG, SS) and renormalize.
fn branch_factors(pair: &ReflectionPair, parity: Parity) -> [C64; 4] {
    let half = C64::new(0.5, 0.0);
    let even_cross = -(pair.r0 + pair.r) * half;
    let odd_cross = (pair.r - pair.r0) * half;
    match parity {
        Parity::Even => [-pair.r0, even_cross, even_cross, -pair.r],
        Parity::Odd => [C64::ZERO, odd_cross, -odd_cross, C64::ZERO],
        Parity::Loss => unreachable!("loss has no amplitude map"),
    }
}

fn compare_branch(
    c: &mut Check,
    tag: &str,
    input: &PureState,
    pair: &ReflectionPair,
    outcome: &ParityOutcome,
) {
    let factors = branch_factors(pair, outcome.parity);
    let scaled: Vec<(Vec<usize>, C64)> = input
        .amplitudes()
        .map(|(key, amp)| (key.clone(), factors[key[0] * 2 + key[1]] * amp))
        .collect();
    let prob: f64 = scaled.iter().map(|(_, a)| a.norm_sqr()).sum();
    c.close(&format!("{tag} probability"), outcome.probability, prob, AMP_TOL);
    let Some(post) = &outcome.post_state else {
        c.hold(&format!("{tag} kept a state"), prob <= AMP_TOL);
        return;
    };
    for (key, amp) in &scaled {
        let got = post.amplitude(key);
        let want = amp / C64::new(prob.sqrt(), 0.0);
        c.hold(
            &format!(
                "{tag} amplitude at {key:?}: got {got}, want {want}"
            ),
            (got - want).norm() <= AMP_TOL,
        );
    }
}

/// 4: the parity-check circuit acts as the documented entrywise amplitude
/// map, never misroutes parity-pure inputs in ideal mode, and keeps the odd
/// detector dark on |GG> / |SS> inputs even at finite coupling.
pub fn check_parity_circuit_identity() -> CheckOutcome {
    guarded(4, "parity-check circuit identity", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0401);
        let ideal = ReflectionPair::IDEAL;
        for trial in 0..100 {
            let state = random_pair_state(&mut rng)?;
            let outcomes = pcd_apply_with(&state, "E1", "E2", &ideal)?;
            for outcome in &outcomes[..2] {
                compare_branch(c, &format!("trial {trial} {:?}", outcome.parity), &state, &ideal, outcome);
            }
        }
        // Parity-pure inputs never trip the other detector in ideal mode.
        for trial in 0..20 {
            let even_in = pair_state([random_amp(&mut rng), C64::ZERO, C64::ZERO, random_amp(&mut rng)])?;
            let odd_in = pair_state([C64::ZERO, random_amp(&mut rng), random_amp(&mut rng), C64::ZERO])?;
            let even_out = pcd_apply_with(&even_in, "E1", "E2", &ideal)?;
            let odd_out = pcd_apply_with(&odd_in, "E1", "E2", &ideal)?;
            c.close(
                &format!("odd leakage of even input, trial {trial}"),
                even_out[1].probability,
                0.0,
                EXACT_TOL,
            );
            c.close(
                &format!("even leakage of odd input, trial {trial}"),
                odd_out[0].probability,
                0.0,
                EXACT_TOL,
            );
        }
        // Finite coupling: |GG> and |SS> still cannot fire the odd detector.
        let params = CavityParams::scaled(0.8)?;
        let gg = pair_state([C64::ONE, C64::ZERO, C64::ZERO, C64::ZERO])?;
        let ss = pair_state([C64::ZERO, C64::ZERO, C64::ZERO, C64::ONE])?;
        for (name, state) in [("GG", gg), ("SS", ss)] {
            let outcomes = pcd_apply(&state, "E1", "E2", &params, Mode::Practical)?;
            c.close(
                &format!("practical odd probability on |{name}>"),
                outcomes[1].probability,
                0.0,
                EXACT_TOL,
            );
        }
        Ok(())
    })
}

/// 5: the reflection coefficients obey their closed-form limits: an empty
/// resonant cavity reflects with exactly -1, an empty detuned one with unit
/// modulus, a decoupled ensemble reproduces the empty coefficient, and the
/// doubly resonant point collapses to (g^2 - kg/4) / (g^2 + kg/4).
pub fn check_reflection_limits() -> CheckOutcome {
    guarded(5, "reflection coefficient limits", |c| {
        let resonant = CavityParams::new(0.8, 1.0, 0.0566, 0.0, 0.0)?;
        let r0 = reflect_empty(&resonant);
        c.hold(
            &format!("r0 at delta'=0 is exactly -1 (got {r0})"),
            r0 == C64::new(-1.0, 0.0),
        );

        let mut max_dev: f64 = 0.0;
        for i in 0..=200 {
            let dp = -10.0 + 0.1 * i as f64;
            let p = CavityParams::new(0.8, 1.0, 0.0566, 0.0, dp)?;
            max_dev = max_dev.max((reflect_empty(&p).norm() - 1.0).abs());
        }
        c.close("max | |r0| - 1 | over detuning grid", max_dev, 0.0, EXACT_TOL);

        for gamma in [0.01, 0.0566, 0.3] {
            for dp in [-0.5, 0.0566] {
                for delta in [0.0, 0.7] {
                    let p = CavityParams::new(0.0, 1.0, gamma, delta, dp)?;
                    let gap = (reflect_coupled(&p)? - reflect_empty(&p)).norm();
                    c.close(
                        &format!("decoupled limit at gamma={gamma}, dp={dp}, delta={delta}"),
                        gap,
                        0.0,
                        EXACT_TOL,
                    );
                }
            }
        }

        for g in [0.2, 0.8, 2.0] {
            for gamma in [0.01, 0.0566, 0.2] {
                let p = CavityParams::new(g, 1.0, gamma, 0.0, 0.0)?;
                let r = reflect_coupled(&p)?;
                let want = (g * g - gamma / 4.0) / (g * g + gamma / 4.0);
                c.close(
                    &format!("doubly resonant value at g={g}, gamma={gamma}"),
                    (r - C64::new(want, 0.0)).norm(),
                    0.0,
                    EXACT_TOL,
                );
            }
        }
        Ok(())
    })
}

/// 6: over the reference coupling grid the closed forms and the state-vector
/// simulations agree to 1e-9 on every point, for all five quantities.
pub fn check_equivalence_grid() -> CheckOutcome {
    guarded(6, "analytics-simulation equivalence grid", |c| {
        for g in [0.2, 0.4, 0.8, 1.6, 3.2, 4.0] {
            let params = CavityParams::scaled(g)?;
            let pair = reflection_pair(&params, Mode::Practical)?;
            for alpha in [0.2f64, 0.4, 0.6] {
                let beta = (1.0 - alpha * alpha).sqrt();
                let tag = format!("g={g}, alpha={alpha}");
                let result = optimal_ecp(alpha, beta, &params, Mode::Practical)?;
                c.close(
                    &format!("concentration yield, {tag}"),
                    result.success_probability,
                    analytics::eta_c(alpha, &pair)?,
                    GRID_TOL,
                );
                let dh = result
                    .branches
                    .iter()
                    .find(|b| b.detector == "D_h")
                    .and_then(|b| b.fidelity)
                    .ok_or("D_h branch missing")?;
                c.close(
                    &format!("concentration fidelity, {tag}"),
                    dh,
                    analytics::f_c(alpha, &pair)?,
                    GRID_TOL,
                );
                let cascade = efficient_ecp(
                    C64::new(alpha, 0.0),
                    C64::new(beta, 0.0),
                    &params,
                    Mode::Practical,
                    1,
                )?;
                c.close(
                    &format!("cascade yield, {tag}"),
                    cascade.trace.cumulative_success,
                    analytics::eta_c_prime(C64::new(alpha, 0.0), &pair)?,
                    GRID_TOL,
                );
            }
            for f0 in [0.6, 0.7, 0.8, 0.9] {
                let tag = format!("g={g}, f0={f0}");
                let trace = epp_iterate(f0, 1, &params, Mode::Practical)?;
                c.close(
                    &format!("purification yield, {tag}"),
                    trace.rounds[0].success_probability,
                    analytics::eta_p(f0, &pair)?,
                    GRID_TOL,
                );
                c.close(
                    &format!("purification fidelity, {tag}"),
                    trace.rounds[0].fidelity.ok_or("unconditioned round")?,
                    analytics::f_p(f0, &pair)?,
                    GRID_TOL,
                );
            }
        }
        Ok(())
    })
}

/// 7: the reference operating points land in their published bands, both
/// absolutely and relative to the lossless limit.
pub fn check_reference_bands() -> CheckOutcome {
    guarded(7, "reference checkpoint bands", |c| {
        let weak = CavityParams::scaled(0.4)?;
        let alpha = 0.2;
        let beta = (1.0f64 - alpha * alpha).sqrt();
        let cascade = efficient_ecp(
            C64::new(alpha, 0.0),
            C64::new(beta, 0.0),
            &weak,
            Mode::Practical,
            1,
        )?;
        let eta = cascade.trace.cumulative_success;
        c.in_band("cascade yield at alpha=0.2, g=0.4", eta, 0.063, 0.068);
        let ideal_eta = 2.0 * alpha * alpha * beta * beta;
        c.in_band("cascade yield ratio to ideal", eta / ideal_eta, 0.82, 0.86);

        let reference = CavityParams::scaled(0.8)?;
        let trace = epp_iterate(0.7, 1, &reference, Mode::Practical)?;
        let f = trace.rounds[0].fidelity.ok_or("unconditioned round")?;
        let ideal_f = 49.0 / 58.0;
        c.in_band("purified fidelity at f0=0.7, g=0.8", f, 0.83, 0.85);
        c.hold(
            &format!("purified fidelity at least 98.5% of ideal (got {:.4})", f / ideal_f),
            f >= 0.985 * ideal_f,
        );
        let eta_p = trace.rounds[0].success_probability;
        c.in_band("purification yield at f0=0.7, g=0.8", eta_p, 0.52, 0.54);
        c.hold(
            &format!("purification yield at least 90% of ideal (got {:.4})", eta_p / 0.58),
            eta_p >= 0.90 * 0.58,
        );
        Ok(())
    })
}

/// 8: with identical input pairs the cascade's kept state is the Bell target
/// exactly, whatever the coupling, detuning, or decay actually are.
pub fn check_cascade_fidelity_invariance() -> CheckOutcome {
    guarded(8, "cascade fidelity invariance", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0801);
        let mut max_dev: f64 = 0.0;
        for _ in 0..100 {
            let g = rng.gen_range(0.1..4.0);
            let dp = rng.gen_range(0.0..0.2);
            let gamma = rng.gen_range(0.001..0.2);
            let params = CavityParams::new(g, 1.0, gamma, 0.0, dp)?;
            let out = efficient_ecp(
                C64::new(0.6, 0.0),
                C64::new(0.8, 0.0),
                &params,
                Mode::Practical,
                1,
            )?;
            let fidelity = out.result.fidelity_vs_target.ok_or("no success branch")?;
            max_dev = max_dev.max((fidelity - 1.0).abs());
        }
        c.close("max |F - 1| over 100 parameter draws", max_dev, 0.0, AMP_TOL);
        Ok(())
    })
}

fn branch_total(result: &ProtocolResult) -> f64 {
    result.branches.iter().map(|b| b.probability).sum()
}

/// 9: global properties: heralded branches partition probability, the ideal
/// optical elements are unitary, the closed forms collapse to their lossless
/// limits at (r0, r) = (-1, +1), and one lossless purification round always
/// improves a mixture that starts above one half.
pub fn check_global_properties() -> CheckOutcome {
    guarded(9, "conservation, unitarity, monotonicity", |c| {
        let params = CavityParams::scaled(0.8)?;
        let optimal = optimal_ecp(0.6, 0.8, &params, Mode::Practical)?;
        c.close("optimal branch sum", branch_total(&optimal), 1.0, EXACT_TOL);
        let ghz = ghz_concentrate(0.6, 0.8, 3, &params, Mode::Practical)?;
        c.close("ghz branch sum", branch_total(&ghz), 1.0, EXACT_TOL);
        let cascade = efficient_ecp(
            C64::new(0.6, 0.0),
            C64::new(0.8, 0.0),
            &params,
            Mode::Practical,
            1,
        )?;
        c.close("cascade branch sum", branch_total(&cascade.result), 1.0, EXACT_TOL);
        let round = epp_round(&bit_flip_mixture(0.7, "A", "B")?, &params, Mode::Practical)?;
        c.close("purification branch sum", branch_total(&round.result), 1.0, EXACT_TOL);

        let pol = SubsystemLabel::polarization("p");
        let rail = SubsystemLabel::path("q", 3);
        let ens = SubsystemLabel::ensemble("E");
        let ops = [
            ("ideal reflection", reflection_operator(&ReflectionPair::IDEAL, &pol, &ens)?),
            ("polarization hadamard", photon_hadamard(&pol)?),
            ("half-wave flip", hwp_sigma_x(&pol)?),
            ("polarizing splitter", pbs_route(&pol, &rail, 0, 1)?),
            ("unbalanced splitter", ubs_split(&rail, 1, 2, 0.37)?),
            ("ensemble hadamard", ensemble_hadamard(&ens)?),
            ("sigma_z", sigma_z(&ens)?),
            ("sigma_x", sigma_x(&ens)?),
        ];
        for (name, op) in &ops {
            c.hold(&format!("{name} is unitary"), op.is_unitary(EXACT_TOL));
        }

        let ideal = ReflectionPair::IDEAL;
        for i in 1..=7 {
            let alpha = i as f64 * 0.1;
            let b2 = 1.0 - alpha * alpha;
            c.close(
                &format!("lossless concentration yield at alpha={alpha:.1}"),
                analytics::eta_c(alpha, &ideal)?,
                2.0 * alpha * alpha,
                EXACT_TOL,
            );
            c.close(
                &format!("lossless concentration fidelity at alpha={alpha:.1}"),
                analytics::f_c(alpha, &ideal)?,
                1.0,
                EXACT_TOL,
            );
            c.close(
                &format!("lossless cascade yield at alpha={alpha:.1}"),
                analytics::eta_c_prime(C64::new(alpha, 0.0), &ideal)?,
                2.0 * alpha * alpha * b2,
                EXACT_TOL,
            );
        }
        for i in 0..9 {
            let f0 = 0.55 + 0.05 * i as f64;
            let denom = f0 * f0 + (1.0 - f0) * (1.0 - f0);
            c.close(
                &format!("lossless purification yield at f0={f0:.2}"),
                analytics::eta_p(f0, &ideal)?,
                denom,
                EXACT_TOL,
            );
            c.close(
                &format!("lossless purification fidelity at f0={f0:.2}"),
                analytics::f_p(f0, &ideal)?,
                f0 * f0 / denom,
                EXACT_TOL,
            );
        }

        let mut monotone = true;
        let mut worst = f64::INFINITY;
        for i in 0..50 {
            let f0 = 0.5 + (i as f64 + 1.0) * 0.5 / 51.0;
            let trace = epp_iterate(f0, 1, &params, Mode::Ideal)?;
            let f1 = trace.rounds[0].fidelity.ok_or("unconditioned round")?;
            worst = worst.min(f1 - f0);
            monotone &= f1 > f0;
        }
        c.hold(
            &format!("lossless round improves every f0 in (0.5, 1) (worst gain {worst:.3e})"),
            monotone,
        );
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for check in all_checks() {
            assert!(check.passed, "{}", check.report_line());
        }
    }

    #[test]
    fn report_lines_name_and_number_each_check() {
        let checks = all_checks();
        assert_eq!(checks.len(), 9);
        for (i, check) in checks.iter().enumerate() {
            assert_eq!(check.index, i + 1);
            assert!(check.report_line().starts_with(&format!("A{} ", i + 1)));
        }
    }
}
