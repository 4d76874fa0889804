//! CSV rendering of sweeps and diagnostics.
//!
//! Every file starts with `#` comment lines echoing the configuration, then a
//! header row. Floats carry 17 significant digits, so values round-trip
//! exactly; absent values are empty cells. Wall time is left out on purpose:
//! identical inputs give byte-identical files.

use std::io::{self, Write};

use lntail::montecarlo::{CHUNK_SIZE, RNG_FAMILY};
use lntail::EstimatorTag;

use crate::runner::{DiagnosticsReport, RowOutcome, SweepReport};

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn column_prefix(tag: EstimatorTag) -> String {
    tag.as_str().replace('-', "_")
}

const ESTIMATE_FIELDS: [&str; 7] = [
    "value",
    "log_value",
    "variance",
    "second_moment",
    "ci_low",
    "ci_high",
    "m",
];

const SUMMARY_FIELDS: [&str; 9] = [
    "rho_hat",
    "beta_hat",
    "cv2_is",
    "cv2_iscv_fixed",
    "cv2_iscv_star",
    "xi_fixed",
    "xi_star",
    "alpha_asymptotic",
    "error",
];

pub fn sweep_header() -> Vec<String> {
    let mut h = vec!["gamma".to_owned(), "log_gamma".to_owned()];
    for tag in EstimatorTag::ALL {
        let prefix = column_prefix(tag);
        h.extend(ESTIMATE_FIELDS.iter().map(|f| format!("{prefix}_{f}")));
    }
    h.extend(SUMMARY_FIELDS.iter().map(|f| f.to_string()));
    h
}

fn sweep_record(row: &RowOutcome, level: f64) -> Vec<String> {
    let th = row.threshold;
    let mut r = vec![fmt_float(th.gamma()), fmt_float(th.log())];
    for tag in EstimatorTag::ALL {
        match row.estimate(tag) {
            Some(e) => {
                let (lo, hi) = lntail::metrics::estimate_interval(e, level);
                r.extend([
                    fmt_float(e.value),
                    fmt_float(e.log_value),
                    fmt_float(e.variance),
                    fmt_float(e.second_moment),
                    fmt_float(lo),
                    fmt_float(hi),
                    e.m.to_string(),
                ]);
            }
            None => r.extend(std::iter::repeat_n(String::new(), ESTIMATE_FIELDS.len())),
        }
    }
    let eff = &row.efficiency;
    r.extend([
        opt(eff.rho_hat),
        opt(eff.beta_hat),
        opt(row.squared_cv(EstimatorTag::Is).or(eff.cv2_is)),
        opt(row.squared_cv(EstimatorTag::IsCvFixed)),
        opt(row.squared_cv(EstimatorTag::IsCvBetaStar)),
        opt(eff.xi_fixed),
        opt(eff.xi_star),
        opt(eff.alpha_asymptotic),
        row.error_message().unwrap_or_default(),
    ]);
    r
}

fn write_preamble<W: Write>(
    out: &mut W,
    kind: &str,
    config_toml: &str,
    notes: &[String],
) -> io::Result<()> {
    writeln!(out, "# lntail {kind}")?;
    writeln!(out, "# rng = {RNG_FAMILY}, chunk = {CHUNK_SIZE}")?;
    for note in notes {
        writeln!(out, "# {note}")?;
    }
    writeln!(out, "# config:")?;
    for line in config_toml.lines() {
        if line.is_empty() {
            writeln!(out, "#")?;
        } else {
            writeln!(out, "#   {line}")?;
        }
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(report: &SweepReport, mut out: W) -> io::Result<()> {
    let cfg = &report.experiment.config;
    let mut notes = vec![match report.dominance.dominant() {
        Ok(i) => format!("dominant component = {i} (zero-based)"),
        Err(_) => "dominant component = none (general tilt, control variates disabled)".to_owned(),
    }];
    notes.extend(report.warnings().map(|w| format!("warning: {w}")));
    write_preamble(&mut out, "sweep", &cfg.echo_toml(), &notes)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sweep_header())?;
    for row in &report.rows {
        w.write_record(sweep_record(row, cfg.confidence_level))?;
    }
    w.flush()
}

pub fn sweep_csv_string(report: &SweepReport) -> String {
    let mut buf = Vec::new();
    write_sweep_csv(report, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

pub const DIAGNOSTICS_HEADER: [&str; 28] = [
    "gamma",
    "log_gamma",
    "m",
    "p1_hat",
    "p1_within_3se",
    "p2_hat",
    "p1_minus_p2_hat",
    "discrepancy_events",
    "low_count",
    "p_gamma",
    "z2_empirical",
    "z2_std_error",
    "z2_closed_form",
    "t2_empirical",
    "l4_empirical",
    "l4_std_error",
    "l4_closed_form",
    "lemma1_lhs",
    "lemma1_rate",
    "lemma1_constant",
    "a_i0",
    "lemma2_log_ratio",
    "quad_identity_error",
    "order_violations",
    "alpha_hat_is",
    "alpha_hat_iscv",
    "alpha_asymptotic",
    "alpha_ratio",
];

pub fn write_diagnostics_csv<W: Write>(report: &DiagnosticsReport, mut out: W) -> io::Result<()> {
    let notes = vec![format!(
        "lemma2_spread = {}",
        report
            .lemma2_spread
            .map(fmt_float)
            .unwrap_or_else(|| "n/a".to_owned())
    )];
    write_preamble(
        &mut out,
        "diagnose",
        &report.experiment.config.echo_toml(),
        &notes,
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIAGNOSTICS_HEADER)?;
    for d in &report.rows {
        let th = d.threshold;
        w.write_record([
            fmt_float(th.gamma()),
            fmt_float(th.log()),
            d.m.to_string(),
            fmt_float(d.p1_hat),
            d.p1_within_3se.to_string(),
            fmt_float(d.p2_hat),
            fmt_float(d.p1_minus_p2_hat),
            d.discrepancy_events.to_string(),
            d.low_count.to_string(),
            fmt_float(d.control_mean),
            fmt_float(d.z2_empirical),
            fmt_float(d.z2_std_error),
            fmt_float(d.z2_closed_form),
            fmt_float(d.t2_empirical),
            fmt_float(d.l4_empirical),
            fmt_float(d.l4_std_error),
            fmt_float(d.l4_closed_form),
            fmt_float(d.lemma1_lhs),
            fmt_float(d.lemma1_rate),
            opt(d.lemma1_constant()),
            opt(d.a_i0),
            opt(d.lemma2_log_ratio),
            fmt_float(d.quad_identity_error),
            d.order_violations.to_string(),
            fmt_float(d.alpha_hat_is),
            fmt_float(d.alpha_hat_iscv),
            opt(d.alpha_asymptotic),
            opt(d.asymptotic_ratio()),
        ])?;
    }
    w.flush()
}

pub fn diagnostics_csv_string(report: &DiagnosticsReport) -> String {
    let mut buf = Vec::new();
    write_diagnostics_csv(report, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
