//! Deterministic serialization of result rows to CSV or JSON.

use std::io;
use std::io::Write as _;
use std::path::Path;

use crate::engine::ResultRow;
use crate::spec::Format;

/// Column order of the CSV output. JSON objects carry the same keys.
pub const CSV_HEADER: [&str; 18] = [
    "protocol",
    "mode",
    "alpha",
    "f0",
    "g_over_kappa",
    "delta_prime_over_kappa",
    "big_delta_over_kappa",
    "gamma_over_kappa",
    "rounds",
    "ensembles",
    "eta_sim",
    "eta_analytic",
    "fidelity_sim",
    "fidelity_analytic",
    "delta_eta_abs",
    "delta_fidelity_abs",
    "seed",
    "shots",
];

/// 12 significant digits in scientific notation: enough to round-trip the
/// discrepancy columns meaningfully, short enough to diff by eye.
fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

pub fn render(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        writer
            .write_record([
                row.protocol.to_string(),
                row.mode.to_string(),
                opt_sig(row.alpha),
                opt_sig(row.f0),
                sig(row.g_over_kappa),
                sig(row.delta_prime_over_kappa),
                sig(row.big_delta_over_kappa),
                sig(row.gamma_over_kappa),
                row.rounds.to_string(),
                row.ensembles.map(|n| n.to_string()).unwrap_or_default(),
                sig(row.eta_sim),
                opt_sig(row.eta_analytic),
                sig(row.fidelity_sim),
                opt_sig(row.fidelity_analytic),
                opt_sig(row.delta_eta_abs),
                opt_sig(row.delta_fidelity_abs),
                row.seed.map(|s| s.to_string()).unwrap_or_default(),
                row.shots.map(|s| s.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8 csv")
}

pub fn to_json(rows: &[ResultRow]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
    text.push('\n');
    text
}

/// Writes to the path, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, contents: &str) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents),
        None => io::stdout().write_all(contents.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            protocol: "optimal-ecp",
            mode: "ideal",
            alpha: Some(0.3),
            f0: None,
            g_over_kappa: 0.8,
            delta_prime_over_kappa: 0.0566,
            big_delta_over_kappa: 0.0,
            gamma_over_kappa: 0.0566,
            rounds: 1,
            ensembles: None,
            eta_sim: 0.18,
            eta_analytic: Some(0.18),
            fidelity_sim: 1.0,
            fidelity_analytic: Some(1.0),
            delta_eta_abs: Some(0.0),
            delta_fidelity_abs: Some(0.0),
            seed: None,
            shots: None,
        }
    }

    #[test]
    fn csv_has_header_empty_nulls_and_12_digit_floats() {
        let text = to_csv(&[sample_row()]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row = lines.next().unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.len());
        assert_eq!(fields[0], "optimal-ecp");
        assert_eq!(fields[3], "");
        assert_eq!(fields[9], "");
        assert_eq!(fields[10], "1.80000000000e-1");
        assert_eq!(fields[12], "1.00000000000e0");
        assert!(lines.next().is_none());
    }

    #[test]
    fn json_is_an_array_with_nulls() {
        let text = to_json(&[sample_row()]);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let rows = parsed.as_array().unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0]["protocol"], "optimal-ecp");
        assert!(rows[0]["f0"].is_null());
        assert!(rows[0]["ensembles"].is_null());
        assert_eq!(rows[0]["eta_sim"].as_f64().unwrap(), 0.18);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn rendering_is_deterministic() {
        let rows = vec![sample_row(), sample_row()];
        assert_eq!(to_csv(&rows), to_csv(&rows));
        assert_eq!(to_json(&rows), to_json(&rows));
    }
}
