//! `edp`: evaluate the distillation protocols at a point, sweep them over a
//! grid, or run the acceptance checks.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or parameter
//! combinations, 3 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use edp_cli::engine;
use edp_cli::output;
use edp_cli::spec::{Axis, FixedParams, Format, ModeArg, Param, Protocol, Sampling, SweepSpec};
use edp_cli::verify;

#[derive(Parser)]
#[command(
    name = "edp",
    version,
    about = "Cavity-assisted entanglement distillation: simulate, sweep, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point and print the row.
    Run(RunArgs),
    /// Evaluate a grid defined by one or more --axis flags.
    Sweep(SweepArgs),
    /// Run the acceptance checks and report one line per check.
    Verify,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep axis NAME:START:STOP:STEPS; repeat for a multi-axis grid
    /// (last axis varies fastest). Names match the flag spellings:
    /// alpha, f0, g-over-kappa, delta-over-kappa, big-delta-over-kappa,
    /// gamma-over-kappa.
    #[arg(long = "axis", value_name = "AXIS")]
    axes: Vec<String>,
}

#[derive(Args)]
struct CommonArgs {
    /// Which protocol to evaluate.
    #[arg(long, value_enum)]
    protocol: Protocol,

    /// Ideal reflections (-1, +1) or coefficients from the cavity inputs.
    #[arg(long, value_enum, default_value = "practical")]
    mode: ModeArg,

    /// Smaller Schmidt coefficient of the input pair (concentration only).
    #[arg(long)]
    alpha: Option<f64>,

    /// Initial mixture fidelity (purification only).
    #[arg(long)]
    f0: Option<f64>,

    /// Ensemble-cavity coupling g in units of kappa.
    #[arg(long = "g-over-kappa")]
    g_over_kappa: Option<f64>,

    /// Probe detuning delta' in units of kappa.
    #[arg(long = "delta-over-kappa")]
    delta_over_kappa: Option<f64>,

    /// Atom-cavity detuning Delta in units of kappa.
    #[arg(long = "big-delta-over-kappa")]
    big_delta_over_kappa: Option<f64>,

    /// Spontaneous emission rate gamma in units of kappa.
    #[arg(long = "gamma-over-kappa")]
    gamma_over_kappa: Option<f64>,

    /// Iteration depth for the cascade and purification protocols.
    #[arg(long, default_value_t = 1)]
    rounds: usize,

    /// Party count for GHZ concentration.
    #[arg(long)]
    ensembles: Option<usize>,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Estimate success frequencies from seeded Bernoulli sampling instead
    /// of reporting exact branch probabilities.
    #[arg(long)]
    seed: Option<u64>,

    /// Samples per row when --seed is given.
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
}

impl CommonArgs {
    fn to_spec(&self, axes: Vec<Axis>) -> SweepSpec {
        let mut fixed = FixedParams::default();
        let mut explicit_fixed = Vec::new();
        let flags = [
            (Param::Alpha, self.alpha),
            (Param::F0, self.f0),
            (Param::GOverKappa, self.g_over_kappa),
            (Param::DeltaOverKappa, self.delta_over_kappa),
            (Param::BigDeltaOverKappa, self.big_delta_over_kappa),
            (Param::GammaOverKappa, self.gamma_over_kappa),
        ];
        for (param, value) in flags {
            if let Some(v) = value {
                fixed.set(param, v);
                explicit_fixed.push(param);
            }
        }
        SweepSpec {
            protocol: self.protocol,
            mode: self.mode,
            axes,
            fixed,
            explicit_fixed,
            rounds: self.rounds,
            ensembles: match (self.protocol, self.ensembles) {
                (_, Some(n)) => n,
                (Protocol::GhzEcp, None) => 3,
                (_, None) => 2,
            },
            sampling: self.seed.map(|seed| Sampling {
                seed,
                shots: self.shots,
            }),
        }
    }
}

fn evaluate_and_write(common: &CommonArgs, axes: Vec<Axis>) -> Result<(), MainError> {
    let spec = common.to_spec(axes);
    let rows = engine::run(&spec).map_err(|e| MainError::Invalid(e.to_string()))?;
    let text = output::render(&rows, common.format);
    output::write_output(common.out.as_deref(), &text)
        .with_context(|| match &common.out {
            Some(p) => format!("writing {}", p.display()),
            None => "writing to stdout".to_string(),
        })
        .map_err(MainError::Io)?;
    Ok(())
}

enum MainError {
    Io(anyhow::Error),
    Invalid(String),
    VerificationFailed,
}

fn execute(cli: Cli) -> Result<(), MainError> {
    match cli.command {
        Command::Run(args) => evaluate_and_write(&args.common, Vec::new()),
        Command::Sweep(args) => {
            let axes = args
                .axes
                .iter()
                .map(|text| Axis::parse(text))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| MainError::Invalid(e.to_string()))?;
            if axes.is_empty() {
                return Err(MainError::Invalid(
                    "sweep needs at least one --axis NAME:START:STOP:STEPS".to_string(),
                ));
            }
            evaluate_and_write(&args.common, axes)
        }
        Command::Verify => {
            let checks = verify::all_checks();
            if verify::print_report(&checks) {
                Ok(())
            } else {
                Err(MainError::VerificationFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(MainError::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(MainError::Invalid(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(MainError::VerificationFailed) => ExitCode::from(3),
    }
}
