//! Critical curves at fixed gap and power-law fits of the gap near the
//! critical coupling.

use phi4_core::fock::{
    critical_curve, critical_exponent_fit, gap_scan, select_precritical_window, CriticalFit, CriticalPoint,
};
use phi4_core::lattice::ModelParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{num, Table};
use crate::{CliError, ExperimentConfig, Outcome};

#[derive(Serialize)]
struct Curve {
    target_gap_sq: f64,
    n_max: usize,
    points: Vec<CriticalPoint>,
}

#[derive(Serialize)]
struct Fit {
    m0_sq: f64,
    n_max: usize,
    scan: Vec<(f64, f64)>,
    fit: Result<CriticalFit, String>,
}

#[derive(Serialize)]
struct Points {
    curves: Vec<Curve>,
    fits: Vec<Fit>,
}

pub(crate) fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let k = &config.critical;
    let curve_jobs: Vec<(f64, usize)> = k
        .target_gap_sq
        .iter()
        .flat_map(|&t| config.n_max.iter().map(move |&n| (t, n)))
        .collect();
    let curves = curve_jobs
        .par_iter()
        .map(|&(target, n_max)| {
            let base = config.params(0.0, n_max)?;
            Ok(Curve {
                target_gap_sq: target,
                n_max,
                points: critical_curve(&k.curve_lambdas, target, &base)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let grid = k.scan_grid();
    let fit_jobs: Vec<(f64, usize)> = k
        .fit_m0_sq
        .iter()
        .flat_map(|&m| k.fit_n_max.iter().map(move |&n| (m, n)))
        .collect();
    let fits = fit_jobs
        .par_iter()
        .map(|&(m0_sq, n_max)| {
            let base = ModelParams::from_bare_mass(config.l, config.m_sq, m0_sq, 0.0, n_max)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let scan = gap_scan(&base, &grid)?;
            let fit = select_precritical_window(&scan, k.window_count, k.gap_floor)
                .and_then(|w| critical_exponent_fit(&w))
                .map_err(|e| e.to_string());
            Ok(Fit {
                m0_sq,
                n_max,
                scan,
                fit,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut curve_table = Table::new(
        "critical_curve.csv",
        &[
            "target_gap_sq[1/a^2]",
            "n_max",
            "lambda[1/a^2]",
            "m0_sq[1/a^2]",
            "status",
        ],
    );
    let mut curve_failures = 0;
    for c in &curves {
        for p in &c.points {
            let (m0, status) = match &p.m0_sq {
                Ok(v) => (num(*v), "ok".to_string()),
                Err(e) => {
                    curve_failures += 1;
                    (String::new(), e.clone())
                }
            };
            curve_table.push(vec![
                num(c.target_gap_sq),
                c.n_max.to_string(),
                num(p.lambda),
                m0,
                status,
            ]);
        }
    }
    let mut scan_table = Table::new(
        "critical_scan.csv",
        &["m0_sq[1/a^2]", "n_max", "lambda[1/a^2]", "gap[1/a]"],
    );
    let mut fit_table = Table::new(
        "critical_fit.csv",
        &[
            "m0_sq[1/a^2]",
            "n_max",
            "lambda_c[1/a^2]",
            "nu",
            "amplitude",
            "rms_residual[1/a]",
            "window_lo[1/a^2]",
            "window_hi[1/a^2]",
            "status",
        ],
    );
    let mut slope_table = Table::new(
        "critical_slopes.csv",
        &["m0_sq[1/a^2]", "n_max", "lambda_mid[1/a^2]", "dgap_dlambda[a]"],
    );
    let mut lines = Vec::new();
    for f in &fits {
        for (l, g) in &f.scan {
            scan_table.push(vec![num(f.m0_sq), f.n_max.to_string(), num(*l), num(*g)]);
        }
        match &f.fit {
            Ok(fit) => {
                fit_table.push(vec![
                    num(f.m0_sq),
                    f.n_max.to_string(),
                    num(fit.lambda_c),
                    num(fit.nu),
                    num(fit.amplitude),
                    num(fit.residual),
                    num(fit.window.0),
                    num(fit.window.1),
                    "ok".into(),
                ]);
                for (l, s) in &fit.slopes {
                    slope_table.push(vec![num(f.m0_sq), f.n_max.to_string(), num(*l), num(*s)]);
                }
                lines.push(format!(
                    "m0²={} n_max={}: ν={:.3} λc={:.3} window [{}, {}]",
                    f.m0_sq, f.n_max, fit.nu, fit.lambda_c, fit.window.0, fit.window.1
                ));
            }
            Err(e) => {
                let mut row = vec![num(f.m0_sq), f.n_max.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e.clone());
                fit_table.push(row);
                lines.push(format!("m0²={} n_max={}: fit failed: {e}", f.m0_sq, f.n_max));
            }
        }
    }
    lines.push(format!(
        "{} critical curves, {} failed points",
        curves.len(),
        curve_failures
    ));

    let points = Points { curves, fits };
    Ok(Outcome {
        tables: vec![curve_table, scan_table, fit_table, slope_table],
        points: serde_json::to_value(&points).map_err(|e| CliError::Output(e.to_string()))?,
        summary: lines.join("\n"),
        verdicts: Vec::new(),
    })
}
