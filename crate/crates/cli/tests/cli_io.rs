//! End-to-end behavior of the `edp` binary: argument handling, exit codes,
//! output formats, and determinism guarantees.

// Reference values keep their full printed precision.
#![allow(clippy::excessive_precision)]

use std::process::{Command, Output};

fn edp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edp"))
        .args(args)
        .output()
        .expect("spawn edp")
}

fn run_ok(args: &[&str]) -> String {
    let out = edp(args);
    assert!(
        out.status.success(),
        "edp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn exit_code(args: &[&str]) -> i32 {
    edp(args).status.code().expect("exit code")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    csv_rows(text).into_iter().map(|r| r[idx].clone()).collect()
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    let args = [
        "sweep",
        "--protocol",
        "epp",
        "--axis",
        "f0:0.6:0.9:4",
        "--axis",
        "g-over-kappa:0.4:1.6:4",
    ];
    assert_eq!(run_ok(&args), run_ok(&args));
    let json_args = [
        "sweep",
        "--protocol",
        "efficient-ecp",
        "--rounds",
        "2",
        "--axis",
        "alpha:0.2:0.6:5",
        "--format",
        "json",
    ];
    assert_eq!(run_ok(&json_args), run_ok(&json_args));
}

#[test]
fn single_step_sweep_matches_run() {
    let swept = run_ok(&[
        "sweep",
        "--protocol",
        "optimal-ecp",
        "--axis",
        "alpha:0.35:0.35:1",
    ]);
    let direct = run_ok(&["run", "--protocol", "optimal-ecp", "--alpha", "0.35"]);
    assert_eq!(swept, direct);
}

#[test]
fn row_count_is_the_product_of_axis_steps() {
    let text = run_ok(&[
        "sweep",
        "--protocol",
        "epp",
        "--axis",
        "f0:0.6:0.9:3",
        "--axis",
        "g-over-kappa:0.4:1.6:5",
    ]);
    assert_eq!(csv_rows(&text).len(), 15);
}

#[test]
fn csv_output_has_the_documented_shape() {
    let text = run_ok(&["run", "--protocol", "epp"]);
    assert_eq!(
        text.lines().next().unwrap(),
        "protocol,mode,alpha,f0,g_over_kappa,delta_prime_over_kappa,big_delta_over_kappa,\
         gamma_over_kappa,rounds,ensembles,eta_sim,eta_analytic,fidelity_sim,\
         fidelity_analytic,delta_eta_abs,delta_fidelity_abs,seed,shots"
    );
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    // 12 significant digits in scientific notation for every float column.
    for field in [&row[4], &row[10], &row[12]] {
        let (mantissa, exponent) = field.split_once('e').expect("scientific notation");
        assert!(exponent.parse::<i32>().is_ok());
        let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        assert_eq!(digits.len(), 12, "field {field}");
    }
    // Inapplicable columns are empty, not zero.
    assert_eq!(row[2], "");
    assert_eq!(row[9], "");
    assert_eq!(row[16], "");
}

#[test]
fn json_output_is_an_array_of_uniform_objects() {
    let text = run_ok(&[
        "sweep",
        "--protocol",
        "ghz-ecp",
        "--mode",
        "ideal",
        "--ensembles",
        "4",
        "--axis",
        "alpha:0.3:0.5:2",
        "--format",
        "json",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row["protocol"], "ghz-ecp");
        assert_eq!(row["ensembles"], 4);
        assert!(row["f0"].is_null());
        assert_eq!(row["fidelity_analytic"].as_f64(), Some(1.0));
    }
    // The ideal GHZ yield matches the two-party value 2 alpha^2.
    assert!((rows[0]["eta_sim"].as_f64().unwrap() - 0.18).abs() < 1e-10);
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let stdout = run_ok(&[
        "run",
        "--protocol",
        "epp",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, run_ok(&["run", "--protocol", "epp"]));
}

#[test]
fn invalid_requests_exit_with_code_2() {
    // Swept and fixed at once.
    assert_eq!(
        exit_code(&[
            "sweep",
            "--protocol",
            "optimal-ecp",
            "--alpha",
            "0.3",
            "--axis",
            "alpha:0.1:0.5:5",
        ]),
        2
    );
    // Parameter that does not belong to the protocol.
    assert_eq!(
        exit_code(&["sweep", "--protocol", "optimal-ecp", "--axis", "f0:0.6:0.9:4"]),
        2
    );
    assert_eq!(exit_code(&["run", "--protocol", "epp", "--alpha", "0.4"]), 2);
    // Malformed axis.
    assert_eq!(
        exit_code(&["sweep", "--protocol", "epp", "--axis", "f0:0.6:0.9"]),
        2
    );
    // Single-shot protocols reject --rounds.
    assert_eq!(
        exit_code(&["run", "--protocol", "optimal-ecp", "--rounds", "2"]),
        2
    );
    // Party count only belongs to GHZ concentration.
    assert_eq!(
        exit_code(&["run", "--protocol", "efficient-ecp", "--ensembles", "4"]),
        2
    );
    // Out-of-range coefficient.
    assert_eq!(
        exit_code(&["run", "--protocol", "optimal-ecp", "--alpha", "1.5"]),
        2
    );
    // A sweep without axes is a misuse, not a run.
    assert_eq!(exit_code(&["sweep", "--protocol", "epp"]), 2);
}

#[test]
fn verify_passes_and_reports_every_check() {
    let out = edp(&["verify"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    for (i, line) in lines.iter().enumerate() {
        assert!(line.starts_with(&format!("A{} ", i + 1)), "line: {line}");
        assert!(line.contains(": PASS"), "line: {line}");
    }
}

#[test]
fn sampling_is_seed_reproducible_and_tracks_the_exact_value() {
    let args = [
        "sweep",
        "--protocol",
        "optimal-ecp",
        "--axis",
        "alpha:0.2:0.6:3",
        "--seed",
        "7",
        "--shots",
        "20000",
    ];
    let first = run_ok(&args);
    assert_eq!(first, run_ok(&args));

    let reseeded = run_ok(&[
        "sweep",
        "--protocol",
        "optimal-ecp",
        "--axis",
        "alpha:0.2:0.6:3",
        "--seed",
        "8",
        "--shots",
        "20000",
    ]);
    assert_ne!(first, reseeded);

    let exact = run_ok(&[
        "sweep",
        "--protocol",
        "optimal-ecp",
        "--axis",
        "alpha:0.2:0.6:3",
    ]);
    let sampled: Vec<f64> = column(&first, "eta_sim")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let truth: Vec<f64> = column(&exact, "eta_sim")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for (got, want) in sampled.iter().zip(&truth) {
        // Binomial noise at 20000 shots: 5 sigma is under 0.02 here.
        assert!((got - want).abs() < 0.02, "sampled {got} vs exact {want}");
    }
    // Fidelity stays exact under sampling.
    assert_eq!(column(&first, "fidelity_sim"), column(&exact, "fidelity_sim"));
}

#[test]
fn purified_fidelity_rises_with_coupling_above_the_weak_regime() {
    // Below g/kappa of roughly 0.3 the conditioned fidelity is not monotone
    // in the coupling, so the claim is restricted to the regime above it.
    let text = run_ok(&[
        "sweep",
        "--protocol",
        "epp",
        "--axis",
        "f0:0.6:0.9:4",
        "--axis",
        "g-over-kappa:0.4:4.0:10",
    ]);
    let fidelities: Vec<f64> = column(&text, "fidelity_sim")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(fidelities.len(), 40);
    for block in fidelities.chunks(10) {
        for pair in block.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-12,
                "fidelity fell from {} to {}",
                pair[0],
                pair[1]
            );
        }
    }
}

#[test]
fn deeper_cascades_and_purification_report_their_columns() {
    // Finite-coupling cascades only have a closed-form yield at depth 1.
    let deep = run_ok(&["run", "--protocol", "efficient-ecp", "--rounds", "3"]);
    assert_eq!(column(&deep, "eta_analytic"), vec![String::new()]);
    assert_eq!(column(&deep, "fidelity_analytic"), vec!["1.00000000000e0"]);

    // The lossless cascade keeps its closed form at any depth.
    let ideal = run_ok(&[
        "run",
        "--protocol",
        "efficient-ecp",
        "--mode",
        "ideal",
        "--rounds",
        "3",
        "--alpha",
        "0.6",
    ]);
    let eta: f64 = column(&ideal, "eta_sim")[0].parse().unwrap();
    let eta_formula: f64 = column(&ideal, "eta_analytic")[0].parse().unwrap();
    assert!((eta - eta_formula).abs() < 1e-9);
    assert!(eta > 0.559249851632047478);

    // Iterated purification reports round-1 yield and final-round fidelity.
    let purified = run_ok(&["run", "--protocol", "epp", "--rounds", "2"]);
    let eta_p: f64 = column(&purified, "eta_sim")[0].parse().unwrap();
    assert!((eta_p - 0.529745957972795116).abs() < 1e-11);
    let f2: f64 = column(&purified, "fidelity_sim")[0].parse().unwrap();
    let f1 = 0.834911001080679519;
    assert!(f2 > f1);
    let delta: f64 = column(&purified, "delta_fidelity_abs")[0].parse().unwrap();
    assert!(delta < 1e-10);
}
