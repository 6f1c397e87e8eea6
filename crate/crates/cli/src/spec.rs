//! Sweep requests: what to evaluate, over which grid, with what output.

use clap::ValueEnum;
use edp_core::cavity::{CavityParams, Mode};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("bad axis `{0}`: expected NAME:START:STOP:STEPS")]
    BadAxis(String),
    #[error("unknown sweep parameter `{0}`")]
    UnknownParam(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    /// Single-pair concentration with known coefficients.
    #[value(name = "optimal-ecp")]
    OptimalEcp,
    /// GHZ-class concentration on several ensembles.
    #[value(name = "ghz-ecp")]
    GhzEcp,
    /// Two-copy concentration with unknown coefficients, cascadable.
    #[value(name = "efficient-ecp")]
    EfficientEcp,
    /// Purification of bit-flip mixtures, iterable.
    #[value(name = "epp")]
    Epp,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::OptimalEcp => "optimal-ecp",
            Protocol::GhzEcp => "ghz-ecp",
            Protocol::EfficientEcp => "efficient-ecp",
            Protocol::Epp => "epp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ideal,
    Practical,
}

impl ModeArg {
    pub fn to_mode(self) -> Mode {
        match self {
            ModeArg::Ideal => Mode::Ideal,
            ModeArg::Practical => Mode::Practical,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModeArg::Ideal => "ideal",
            ModeArg::Practical => "practical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// The numeric parameters a sweep axis may range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Alpha,
    F0,
    GOverKappa,
    DeltaOverKappa,
    BigDeltaOverKappa,
    GammaOverKappa,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::Alpha,
        Param::F0,
        Param::GOverKappa,
        Param::DeltaOverKappa,
        Param::BigDeltaOverKappa,
        Param::GammaOverKappa,
    ];

    /// The CLI-facing name, matching the flag spelling without dashes.
    pub fn key(&self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::F0 => "f0",
            Param::GOverKappa => "g-over-kappa",
            Param::DeltaOverKappa => "delta-over-kappa",
            Param::BigDeltaOverKappa => "big-delta-over-kappa",
            Param::GammaOverKappa => "gamma-over-kappa",
        }
    }

    pub fn parse(name: &str) -> Result<Param, SpecError> {
        Param::ALL
            .into_iter()
            .find(|p| p.key() == name)
            .ok_or_else(|| SpecError::UnknownParam(name.to_string()))
    }
}

/// One sweep axis: an inclusive linear grid over a parameter.
#[derive(Debug, Clone)]
pub struct Axis {
    pub param: Param,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    /// Parses NAME:START:STOP:STEPS, e.g. `g-over-kappa:0.1:4.0:40`.
    pub fn parse(text: &str) -> Result<Axis, SpecError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 4 {
            return Err(SpecError::BadAxis(text.to_string()));
        }
        let param = Param::parse(parts[0])?;
        let bad = || SpecError::BadAxis(text.to_string());
        let start: f64 = parts[1].parse().map_err(|_| bad())?;
        let stop: f64 = parts[2].parse().map_err(|_| bad())?;
        let steps: usize = parts[3].parse().map_err(|_| bad())?;
        if steps < 1 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(Axis {
            param,
            start,
            stop,
            steps,
        })
    }

    /// The grid points, inclusive of both ends; a single step degenerates
    /// to the start value.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.start + span * i as f64 / n)
            .collect()
    }
}

/// Baseline values for every parameter an axis does not cover.
#[derive(Debug, Clone, Copy)]
pub struct FixedParams {
    pub alpha: f64,
    pub f0: f64,
    pub g_over_kappa: f64,
    pub delta_prime_over_kappa: f64,
    pub big_delta_over_kappa: f64,
    pub gamma_over_kappa: f64,
}

impl Default for FixedParams {
    /// The reference operating point: g/κ = 0.8 with the standard detunings,
    /// a moderately entangled pair, and a 0.7-fidelity mixture.
    fn default() -> Self {
        FixedParams {
            alpha: 0.6,
            f0: 0.7,
            g_over_kappa: 0.8,
            delta_prime_over_kappa: CavityParams::DEFAULT_DELTA_PRIME_OVER_KAPPA,
            big_delta_over_kappa: 0.0,
            gamma_over_kappa: CavityParams::DEFAULT_GAMMA_OVER_KAPPA,
        }
    }
}

impl FixedParams {
    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Alpha => self.alpha,
            Param::F0 => self.f0,
            Param::GOverKappa => self.g_over_kappa,
            Param::DeltaOverKappa => self.delta_prime_over_kappa,
            Param::BigDeltaOverKappa => self.big_delta_over_kappa,
            Param::GammaOverKappa => self.gamma_over_kappa,
        }
    }

    pub fn set(&mut self, p: Param, value: f64) {
        match p {
            Param::Alpha => self.alpha = value,
            Param::F0 => self.f0 = value,
            Param::GOverKappa => self.g_over_kappa = value,
            Param::DeltaOverKappa => self.delta_prime_over_kappa = value,
            Param::BigDeltaOverKappa => self.big_delta_over_kappa = value,
            Param::GammaOverKappa => self.gamma_over_kappa = value,
        }
    }
}

/// Finite-shot emulation: estimate success frequencies by seeded sampling
/// instead of reporting exact branch norms.
#[derive(Debug, Clone, Copy)]
pub struct Sampling {
    pub seed: u64,
    pub shots: u64,
}

/// A fully resolved evaluation request: one point when `axes` is empty,
/// otherwise the cartesian grid in row-major order (last axis fastest).
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub protocol: Protocol,
    pub mode: ModeArg,
    pub axes: Vec<Axis>,
    pub fixed: FixedParams,
    /// Parameters the user pinned explicitly, for conflict detection.
    pub explicit_fixed: Vec<Param>,
    pub rounds: usize,
    pub ensembles: usize,
    pub sampling: Option<Sampling>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        for (i, axis) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|a| a.param == axis.param) {
                return Err(SpecError::Invalid(format!(
                    "parameter `{}` appears on more than one axis",
                    axis.param.key()
                )));
            }
            if self.explicit_fixed.contains(&axis.param) {
                return Err(SpecError::Invalid(format!(
                    "parameter `{}` is both fixed and swept",
                    axis.param.key()
                )));
            }
            if !self.applicable(axis.param) {
                return Err(SpecError::Invalid(format!(
                    "parameter `{}` does not apply to protocol `{}`",
                    axis.param.key(),
                    self.protocol.name()
                )));
            }
        }
        for p in &self.explicit_fixed {
            if !self.applicable(*p) {
                return Err(SpecError::Invalid(format!(
                    "parameter `{}` does not apply to protocol `{}`",
                    p.key(),
                    self.protocol.name()
                )));
            }
        }
        match self.protocol {
            Protocol::OptimalEcp | Protocol::GhzEcp => {
                if self.rounds != 1 {
                    return Err(SpecError::Invalid(format!(
                        "protocol `{}` is single-shot; --rounds does not apply",
                        self.protocol.name()
                    )));
                }
            }
            Protocol::EfficientEcp | Protocol::Epp => {}
        }
        if self.rounds < 1 {
            return Err(SpecError::Invalid("rounds must be at least 1".to_string()));
        }
        if self.protocol == Protocol::GhzEcp {
            if self.ensembles < 2 {
                return Err(SpecError::Invalid(
                    "GHZ concentration needs at least 2 ensembles".to_string(),
                ));
            }
        } else if self.ensembles != 2 {
            return Err(SpecError::Invalid(format!(
                "--ensembles does not apply to protocol `{}`",
                self.protocol.name()
            )));
        }
        if let Some(s) = &self.sampling {
            if s.shots == 0 {
                return Err(SpecError::Invalid("shots must be positive".to_string()));
            }
        }
        Ok(())
    }

    /// Whether a parameter participates in this protocol's evaluation.
    fn applicable(&self, p: Param) -> bool {
        match p {
            Param::Alpha => self.protocol != Protocol::Epp,
            Param::F0 => self.protocol == Protocol::Epp,
            _ => true,
        }
    }

    /// Total row count: the product of the axis step counts.
    pub fn row_count(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }
}
