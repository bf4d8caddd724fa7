//! Mass-gap VQE over backends, ansätze and couplings, with a pass/fail table
//! against the benchmark thresholds.

use phi4_core::circuit::derive_seed;
use phi4_core::mitigation::{PurificationReport, ReadoutCalibration};
use phi4_core::vqe::{mass_gap_vqe, AnsatzKind, BackendKind, GapResult, VqeResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::BackendConfig;
use crate::output::{num, Table};
use crate::{CliError, ExperimentConfig, Outcome};

/// Exact-backend tolerance of the complete ansatz.
pub const ORACLE_TOL: f64 = 1e-6;
/// Accepted relative ground-energy excess of the product ansatz.
pub const PRODUCT_EXCESS: (f64, f64) = (5e-4, 5e-2);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub backend: String,
    pub ansatz: String,
    pub n_max: usize,
    pub lambda: f64,
    pub check: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

#[derive(Serialize)]
struct SectorRecord {
    sector: String,
    params: Vec<f64>,
    energy: f64,
    std: f64,
    unmitigated_energy: Option<f64>,
    unmitigated_std: Option<f64>,
    evaluations: usize,
    converged: bool,
    purification_iterations: Vec<usize>,
    purification: Vec<PurificationReport>,
    calibration: Option<ReadoutCalibration>,
    seed: u64,
}

impl From<&VqeResult> for SectorRecord {
    fn from(r: &VqeResult) -> Self {
        SectorRecord {
            sector: r.sector.clone(),
            params: r.params.clone(),
            energy: r.energy,
            std: r.std,
            unmitigated_energy: r.unmitigated_energy,
            unmitigated_std: r.unmitigated_std,
            evaluations: r.evaluations,
            converged: r.converged,
            purification_iterations: r.purification.iter().map(|p| p.iterations).collect(),
            purification: r.purification.clone(),
            calibration: r.calibration.clone(),
            seed: r.seed,
        }
    }
}

#[derive(Serialize)]
struct Point {
    index: usize,
    backend: String,
    ansatz: AnsatzKind,
    n_max: usize,
    lambda: f64,
    seed: u64,
    shots: Option<u64>,
    e0: f64,
    e0_std: f64,
    e1: f64,
    e1_std: f64,
    gap: f64,
    gap_std: f64,
    exact_e0: f64,
    exact_e1: f64,
    exact_gap: f64,
    ground: SectorRecord,
    excited: SectorRecord,
}

struct Job<'a> {
    index: usize,
    backend: &'a BackendConfig,
    ansatz: AnsatzKind,
    n_max: usize,
    lambda: f64,
}

fn verdicts(job: &Job, g: &GapResult) -> Vec<Verdict> {
    let make = |check: &str, value: f64, threshold: String, pass: bool| Verdict {
        backend: job.backend.label().to_string(),
        ansatz: ansatz_label(job.ansatz).to_string(),
        n_max: job.n_max,
        lambda: job.lambda,
        check: check.to_string(),
        value,
        threshold,
        pass,
    };
    let mut out = Vec::new();
    match (job.backend.kind, job.ansatz) {
        (BackendKind::Exact, AnsatzKind::Entangled) => {
            let dev = (g.e0 - g.exact_e0).abs().max((g.e1 - g.exact_e1).abs());
            out.push(make(
                "oracle_match",
                dev,
                format!("<= {ORACLE_TOL:e}"),
                dev <= ORACLE_TOL,
            ));
        }
        (BackendKind::Exact, AnsatzKind::Product) => {
            let excess = (g.e0 - g.exact_e0) / g.exact_e0.abs();
            let (lo, hi) = PRODUCT_EXCESS;
            out.push(make(
                "product_excess",
                excess,
                format!("[{lo}, {hi}]"),
                (lo..=hi).contains(&excess),
            ));
        }
        (_, AnsatzKind::Entangled) => {
            let z = (g.gap - g.exact_gap).abs() / g.gap_std;
            out.push(make("gap_within_1sigma", z, "<= 1".into(), z <= 1.0));
        }
        (_, AnsatzKind::Product) => {}
    }
    if let (Some(u0), Some(u1)) = (g.ground.unmitigated_energy, g.excited.unmitigated_energy) {
        let margin = ((g.e0 - g.exact_e0).abs() - (u0 - g.exact_e0).abs())
            .max((g.e1 - g.exact_e1).abs() - (u1 - g.exact_e1).abs());
        out.push(make("mitigation_reduces_error", margin, "< 0".into(), margin < 0.0));
    }
    out
}

fn ansatz_label(a: AnsatzKind) -> &'static str {
    match a {
        AnsatzKind::Product => "product",
        AnsatzKind::Entangled => "entangled",
    }
}

pub(crate) fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut jobs = Vec::new();
    for backend in &config.backends {
        for &ansatz in &config.ansatze {
            for &n_max in &config.n_max {
                for &lambda in &config.lambdas {
                    jobs.push(Job {
                        index: jobs.len(),
                        backend,
                        ansatz,
                        n_max,
                        lambda,
                    });
                }
            }
        }
    }

    let results = jobs
        .par_iter()
        .map(|job| {
            let seed = derive_seed(config.seed, job.index as u64);
            let context = |e: phi4_core::Error| {
                CliError::Numerical(format!(
                    "point {} ({}, {}, n_max={}, λ={}): {e}",
                    job.index,
                    job.backend.label(),
                    ansatz_label(job.ansatz),
                    job.n_max,
                    job.lambda
                ))
            };
            let params = config.params(job.lambda, job.n_max)?;
            let spec = job.backend.spec(seed);
            let g = mass_gap_vqe(&params, &spec, job.ansatz, seed, &config.optimizer).map_err(context)?;
            Ok((seed, g))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new(
        "vqe.csv",
        &[
            "backend",
            "ansatz",
            "n_max",
            "lambda[1/a^2]",
            "e0[1/a]",
            "e0_std[1/a]",
            "e1[1/a]",
            "e1_std[1/a]",
            "gap[1/a]",
            "gap_std[1/a]",
            "exact_e0[1/a]",
            "exact_e1[1/a]",
            "exact_gap[1/a]",
            "unmitigated_e0[1/a]",
            "unmitigated_e1[1/a]",
            "evaluations",
            "seed",
        ],
    );
    let mut verdict_table = Table::new(
        "verdict.csv",
        &[
            "backend",
            "ansatz",
            "n_max",
            "lambda[1/a^2]",
            "check",
            "value",
            "threshold",
            "verdict",
        ],
    );
    let mut points = Vec::new();
    let mut all_verdicts = Vec::new();
    for (job, (seed, g)) in jobs.iter().zip(&results) {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        table.push(vec![
            job.backend.label().into(),
            ansatz_label(job.ansatz).into(),
            job.n_max.to_string(),
            num(job.lambda),
            num(g.e0),
            num(g.e0_std),
            num(g.e1),
            num(g.e1_std),
            num(g.gap),
            num(g.gap_std),
            num(g.exact_e0),
            num(g.exact_e1),
            num(g.exact_gap),
            opt(g.ground.unmitigated_energy),
            opt(g.excited.unmitigated_energy),
            (g.ground.evaluations + g.excited.evaluations).to_string(),
            seed.to_string(),
        ]);
        for v in verdicts(job, g) {
            verdict_table.push(vec![
                v.backend.clone(),
                v.ansatz.clone(),
                v.n_max.to_string(),
                num(v.lambda),
                v.check.clone(),
                num(v.value),
                v.threshold.clone(),
                if v.pass { "PASS" } else { "FAIL" }.into(),
            ]);
            all_verdicts.push(v);
        }
        points.push(Point {
            index: job.index,
            backend: job.backend.label().into(),
            ansatz: job.ansatz,
            n_max: job.n_max,
            lambda: job.lambda,
            seed: *seed,
            shots: (job.backend.kind != BackendKind::Exact).then_some(job.backend.shots),
            e0: g.e0,
            e0_std: g.e0_std,
            e1: g.e1,
            e1_std: g.e1_std,
            gap: g.gap,
            gap_std: g.gap_std,
            exact_e0: g.exact_e0,
            exact_e1: g.exact_e1,
            exact_gap: g.exact_gap,
            ground: (&g.ground).into(),
            excited: (&g.excited).into(),
        });
    }

    Ok(Outcome {
        tables: vec![table, verdict_table],
        points: serde_json::to_value(&points).map_err(|e| CliError::Output(e.to_string()))?,
        summary: verdict_summary(&all_verdicts),
        verdicts: all_verdicts,
    })
}

/// One line per point plus a tally per `(backend, ansatz, check)`. The gap
/// check tolerates up to two outliers in seven, matching the benchmark rule.
fn verdict_summary(verdicts: &[Verdict]) -> String {
    let mut lines = vec![format!(
        "{:<16} {:<10} {:>6} {:<26} {:>12} {:<16} {}",
        "backend", "ansatz", "lambda", "check", "value", "threshold", "verdict"
    )];
    for v in verdicts {
        lines.push(format!(
            "{:<16} {:<10} {:>6} {:<26} {:>12.4e} {:<16} {}",
            v.backend,
            v.ansatz,
            v.lambda,
            v.check,
            v.value,
            v.threshold,
            if v.pass { "PASS" } else { "FAIL" }
        ));
    }
    let mut groups: Vec<(&str, &str, &str)> = Vec::new();
    for v in verdicts {
        let key = (v.backend.as_str(), v.ansatz.as_str(), v.check.as_str());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (backend, ansatz, check) in groups {
        let members: Vec<&Verdict> = verdicts
            .iter()
            .filter(|v| v.backend == backend && v.ansatz == ansatz && v.check == check)
            .collect();
        let passed = members.iter().filter(|v| v.pass).count();
        let needed = if check == "gap_within_1sigma" {
            (5 * members.len()).div_ceil(7)
        } else {
            members.len()
        };
        lines.push(format!(
            "{backend}/{ansatz} {check}: {passed}/{} (need {needed}) {}",
            members.len(),
            if passed >= needed { "PASS" } else { "FAIL" }
        ));
    }
    lines.join("\n")
}
