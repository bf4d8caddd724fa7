//! First-order counter-term curves, gap-vs-counter-term sweeps and the exact
//! counter-term roots that keep the gap at the reference mass.

use phi4_core::fock::{exact_spectrum, solve_counterterm, HamiltonianTerms};
use phi4_core::lattice::{counterterm_continuum, counterterm_first_order, ModelParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::LatticeSize;
use crate::output::{num, Table};
use crate::{CliError, ExperimentConfig, Outcome};

#[derive(Serialize)]
struct Curve {
    m_sq: f64,
    lattice: String,
    lambdas: Vec<f64>,
    delta_m: Vec<f64>,
}

#[derive(Serialize)]
struct Sweep {
    lambda: f64,
    n_max: usize,
    delta_m: Vec<f64>,
    gap: Vec<f64>,
    root: Result<f64, String>,
    first_order: f64,
}

#[derive(Serialize)]
struct Points {
    curves: Vec<Curve>,
    sweeps: Vec<Sweep>,
}

fn first_order(size: LatticeSize, m_sq: f64, lambda: f64) -> phi4_core::Result<f64> {
    match size {
        LatticeSize::Sites(l) => counterterm_first_order(&ModelParams::from_counterterm(l, m_sq, 0.0, lambda, 2)?),
        LatticeSize::Infinite(_) => counterterm_continuum(m_sq, lambda),
    }
}

pub(crate) fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let c = &config.counterterm;
    let mut curves = Vec::new();
    for &m_sq in &c.m_sq_values {
        for &size in &c.lattice_sizes {
            let delta_m = c
                .curve_lambdas
                .iter()
                .map(|&l| first_order(size, m_sq, l))
                .collect::<phi4_core::Result<Vec<_>>>()
                .map_err(|e| CliError::Numerical(format!("m²={m_sq} L={size}: {e}")))?;
            curves.push(Curve {
                m_sq,
                lattice: size.to_string(),
                lambdas: c.curve_lambdas.clone(),
                delta_m,
            });
        }
    }

    let (lo, hi) = c.delta_range;
    let deltas: Vec<f64> = (0..c.delta_points)
        .map(|i| lo + (hi - lo) * i as f64 / (c.delta_points - 1) as f64)
        .collect();
    let jobs: Vec<(f64, usize)> = c
        .sweep_lambdas
        .iter()
        .flat_map(|&l| config.n_max.iter().map(move |&n| (l, n)))
        .collect();
    let sweeps = jobs
        .par_iter()
        .map(|&(lambda, n_max)| {
            let params = ModelParams::from_counterterm(config.l, config.m_sq, 0.0, lambda, n_max)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let terms = HamiltonianTerms::new(&params)?;
            let gap = deltas
                .iter()
                .map(|&d| Ok(exact_spectrum(&terms.hamiltonian(lambda, d))?.gap))
                .collect::<phi4_core::Result<Vec<_>>>()
                .map_err(|e| CliError::Numerical(format!("sweep λ={lambda} n_max={n_max}: {e}")))?;
            Ok(Sweep {
                lambda,
                n_max,
                delta_m: deltas.clone(),
                gap,
                root: solve_counterterm(&params, config.m_sq).map_err(|e| e.to_string()),
                first_order: counterterm_first_order(&params)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut curve_table = Table::new(
        "counterterm_first_order.csv",
        &["m_sq[1/a^2]", "L", "lambda[1/a^2]", "delta_m[1/a^2]"],
    );
    for curve in &curves {
        for (l, d) in curve.lambdas.iter().zip(&curve.delta_m) {
            curve_table.push(vec![num(curve.m_sq), curve.lattice.clone(), num(*l), num(*d)]);
        }
    }
    let mut sweep_table = Table::new(
        "gap_vs_counterterm.csv",
        &["lambda[1/a^2]", "n_max", "delta_m[1/a^2]", "gap[1/a]"],
    );
    let mut root_table = Table::new(
        "counterterm_roots.csv",
        &[
            "lambda[1/a^2]",
            "n_max",
            "m_sq[1/a^2]",
            "delta_m[1/a^2]",
            "first_order[1/a^2]",
            "status",
        ],
    );
    let mut failures = 0;
    for s in &sweeps {
        for (d, g) in s.delta_m.iter().zip(&s.gap) {
            sweep_table.push(vec![num(s.lambda), s.n_max.to_string(), num(*d), num(*g)]);
        }
        let (root, status) = match &s.root {
            Ok(r) => (num(*r), "ok".to_string()),
            Err(e) => {
                failures += 1;
                (String::new(), e.clone())
            }
        };
        root_table.push(vec![
            num(s.lambda),
            s.n_max.to_string(),
            num(config.m_sq),
            root,
            num(s.first_order),
            status,
        ]);
    }

    let summary = format!(
        "{} counter-term curves, {} sweeps, {} root failures",
        curves.len(),
        sweeps.len(),
        failures
    );
    let points = Points { curves, sweeps };
    Ok(Outcome {
        tables: vec![curve_table, sweep_table, root_table],
        points: serde_json::to_value(&points).map_err(|e| CliError::Output(e.to_string()))?,
        summary,
        verdicts: Vec::new(),
    })
}
