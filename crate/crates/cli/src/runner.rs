//! Runs estimators over a threshold grid.

use std::time::{Duration, Instant};

use lntail::metrics::{
    lemma2_spread, lemma_diagnostics, squared_cv, EfficiencyRow, LemmaDiagnostics,
};
use lntail::montecarlo::hash64;
use lntail::{
    alpha_asymptotic, check_assumption_a, is_cv, is_mean_shift, naive_mc, plan_shift, BetaMode,
    DominanceReport, Estimate, EstimatorTag, RngStream, ShiftMode, ShiftPlan, Threshold,
};
use rayon::prelude::*;

use crate::config::Experiment;

/// Stream-id slot for the diagnostics run, distinct from every estimator tag.
const DIAGNOSE_CODE: u64 = 0x0d1a;

/// A core error with the grid cell it came from.
#[derive(Debug, Clone, thiserror::Error)]
#[error("γ #{gamma_index} (log γ = {log_gamma}){}: {source}", estimator_suffix(*.estimator))]
pub struct RunError {
    pub gamma_index: usize,
    pub log_gamma: f64,
    pub estimator: Option<EstimatorTag>,
    pub source: lntail::Error,
}

fn estimator_suffix(tag: Option<EstimatorTag>) -> String {
    tag.map(|t| format!(", estimator {t}")).unwrap_or_default()
}

/// Stream for one `(γ index, estimator)` cell; chunk sub-streams are derived
/// from it inside the sampler.
pub fn cell_stream(seed: u64, gamma_index: usize, code: u64) -> RngStream {
    RngStream::new(seed, hash64(&[gamma_index as u64, code]))
}

/// Everything computed at one threshold.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub gamma_index: usize,
    pub threshold: Threshold<f64>,
    pub estimates: Vec<Estimate<f64>>,
    pub efficiency: EfficiencyRow<f64>,
    pub warnings: Vec<String>,
    pub errors: Vec<RunError>,
    pub wall_time: Duration,
}

impl RowOutcome {
    pub fn estimate(&self, tag: EstimatorTag) -> Option<&Estimate<f64>> {
        self.estimates.iter().find(|e| e.tag == tag)
    }

    /// `CV²` of one estimator; `+∞` when its estimate is zero.
    pub fn squared_cv(&self, tag: EstimatorTag) -> Option<f64> {
        self.estimate(tag)
            .map(|e| squared_cv(e).unwrap_or(f64::INFINITY))
    }

    pub fn error_message(&self) -> Option<String> {
        (!self.errors.is_empty()).then(|| {
            self.errors
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ")
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub experiment: Experiment,
    pub dominance: DominanceReport<f64>,
    pub rows: Vec<RowOutcome>,
}

impl SweepReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.errors.is_empty()).count()
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.rows
            .iter()
            .flat_map(|r| r.warnings.iter().map(String::as_str))
    }
}

/// Runs every requested estimator at one threshold. Control-variate
/// estimators need a dominant component; without one they are skipped with
/// a warning and IS uses the general tilt.
pub fn run_estimate(
    exp: &Experiment,
    report: &DominanceReport<f64>,
    gamma_index: usize,
    threshold: Threshold<f64>,
) -> RowOutcome {
    let start = Instant::now();
    let cfg = &exp.config;
    let p = &exp.problem;
    let m = cfg.samples;
    let err = |estimator, source| RunError {
        gamma_index,
        log_gamma: threshold.log(),
        estimator,
        source,
    };
    let mut estimates = Vec::new();
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let plan: Option<ShiftPlan<f64>> = match plan_shift(p, report, threshold) {
        Ok(plan) => Some(plan),
        Err(e) => {
            errors.push(err(None, e));
            None
        }
    };
    let dominant = matches!(plan.as_ref().map(|p| p.mode), Some(ShiftMode::Dominant(_)));
    let wants_cv = exp.estimators.iter().any(|t| t.is_control_variate());
    if wants_cv && plan.is_some() && !dominant {
        warnings.push(format!(
            "γ #{gamma_index}: no dominant component, control-variate estimators skipped"
        ));
    }

    for &tag in &exp.estimators {
        let stream = cell_stream(cfg.seed, gamma_index, tag.code());
        let result = match (tag, plan.as_ref()) {
            (EstimatorTag::Naive, _) => naive_mc(p, threshold, m, stream),
            (_, None) => continue,
            (EstimatorTag::Is, Some(plan)) => is_mean_shift(p, plan, m, stream),
            (_, Some(_)) if !dominant => continue,
            (EstimatorTag::IsCvBetaStar, Some(plan)) => {
                is_cv(p, plan, report, m, stream, BetaMode::Estimated)
            }
            (EstimatorTag::IsCvFixed, Some(plan)) => {
                is_cv(p, plan, report, m, stream, BetaMode::FixedMinusOne)
            }
        };
        match result {
            Ok(e) => {
                if e.weight_overflow {
                    warnings.push(format!(
                        "γ #{gamma_index}, {tag}: likelihood weights beyond the safe exponent range"
                    ));
                }
                estimates.push(e);
            }
            Err(e) => errors.push(err(Some(tag), e)),
        }
    }

    let find = |tag| estimates.iter().find(|e: &&Estimate<f64>| e.tag == tag);
    let alpha_asym = report
        .holds
        .then(|| alpha_asymptotic(p, report, threshold).ok().map(|v| v.value))
        .flatten();
    let efficiency = EfficiencyRow::from_estimates(
        threshold,
        find(EstimatorTag::Is),
        find(EstimatorTag::IsCvFixed),
        find(EstimatorTag::IsCvBetaStar),
        alpha_asym,
    );
    RowOutcome {
        gamma_index,
        threshold,
        estimates,
        efficiency,
        warnings,
        errors,
        wall_time: start.elapsed(),
    }
}

/// Runs the whole grid. Rows run concurrently and are returned in grid
/// order; a failing row never stops the others.
pub fn run_sweep(exp: &Experiment) -> SweepReport {
    let report = check_assumption_a(&exp.problem);
    let rows = exp
        .thresholds
        .par_iter()
        .enumerate()
        .map(|(i, &th)| run_estimate(exp, &report, i, th))
        .collect();
    SweepReport {
        experiment: exp.clone(),
        dominance: report,
        rows,
    }
}

#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub experiment: Experiment,
    pub rows: Vec<LemmaDiagnostics<f64>>,
    /// `max/min` of `(P₁ − P₂)/γ^{a_{i0}}` over the grid.
    pub lemma2_spread: Option<f64>,
}

/// Lemma probes at every threshold of the grid, under the dominant tilt.
pub fn diagnose(exp: &Experiment) -> Result<DiagnosticsReport, RunError> {
    let p = &exp.problem;
    let report = check_assumption_a(p);
    let rows = exp
        .thresholds
        .par_iter()
        .enumerate()
        .map(|(i, &th)| {
            let err = |source| RunError {
                gamma_index: i,
                log_gamma: th.log(),
                estimator: None,
                source,
            };
            let plan = plan_shift(p, &report, th).map_err(err)?;
            let stream = cell_stream(exp.config.seed, i, DIAGNOSE_CODE);
            lemma_diagnostics(p, &plan, &report, exp.config.samples, stream).map_err(err)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lemma2_spread = if rows.len() > 1 {
        lemma2_spread(&rows)
    } else {
        None
    };
    Ok(DiagnosticsReport {
        experiment: exp.clone(),
        rows,
        lemma2_spread,
    })
}
