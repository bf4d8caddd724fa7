//! Exact spectra over `(n_max, λ)` grids.

use phi4_core::encoding::{encode_matrix, parity_blocks, PauliSum};
use phi4_core::fock::{eigensystem, exact_spectrum, HamiltonianTerms};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{num, Table};
use crate::{CliError, ExperimentConfig, Outcome};

#[derive(Serialize)]
struct SectorPoint {
    sector: String,
    lowest: f64,
}

#[derive(Serialize)]
struct Point {
    n_max: usize,
    lambda: f64,
    m0_sq: f64,
    delta_m: f64,
    gap: f64,
    degenerate: bool,
    eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sectors: Vec<SectorPoint>,
    #[serde(skip)]
    pauli: Vec<(String, PauliSum)>,
}

pub(crate) fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut points = Vec::new();
    for &n_max in &config.n_max {
        let base = config.params(0.0, n_max)?;
        let terms = HamiltonianTerms::new(&base)?;
        let batch: Vec<Point> = config
            .lambdas
            .par_iter()
            .map(|&lambda| {
                let params = base.with_lambda(lambda);
                let h = terms.hamiltonian(lambda, params.delta_m);
                let spectrum =
                    exact_spectrum(&h).map_err(|e| CliError::Numerical(format!("n_max={n_max} λ={lambda}: {e}")))?;
                let mut sectors = Vec::new();
                let mut pauli = Vec::new();
                if config.qubit_encoding {
                    pauli.push(("full".to_string(), encode_matrix(&h.matrix)?));
                }
                if config.parity_blocking {
                    for s in parity_blocks(&h, &params)? {
                        sectors.push(SectorPoint {
                            sector: s.label(),
                            lowest: eigensystem(&s.block)?.values[0],
                        });
                        if let (true, Some(p)) = (config.qubit_encoding, &s.pauli) {
                            pauli.push((s.label(), p.clone()));
                        }
                    }
                }
                Ok(Point {
                    n_max,
                    lambda,
                    m0_sq: params.m0_sq,
                    delta_m: params.delta_m,
                    gap: spectrum.gap,
                    degenerate: spectrum.degenerate,
                    eigenvalues: spectrum.eigenvalues.into_iter().take(config.levels).collect(),
                    sectors,
                    pauli,
                })
            })
            .collect::<Result<_, CliError>>()?;
        points.extend(batch);
    }

    let mut gaps = Table::new(
        "spectrum_gap.csv",
        &["n_max", "lambda[1/a^2]", "m0_sq[1/a^2]", "delta_m[1/a^2]", "gap[1/a]"],
    );
    let mut levels = Table::new(
        "spectrum_levels.csv",
        &["n_max", "lambda[1/a^2]", "level", "energy[1/a]"],
    );
    let mut sectors = Table::new(
        "spectrum_sectors.csv",
        &["n_max", "lambda[1/a^2]", "sector", "lowest_energy[1/a]"],
    );
    let mut pauli = Table::new(
        "pauli_terms.csv",
        &[
            "n_max",
            "lambda[1/a^2]",
            "operator",
            "coefficient_re[1/a]",
            "coefficient_im[1/a]",
            "word",
        ],
    );
    for p in &points {
        gaps.push(vec![
            p.n_max.to_string(),
            num(p.lambda),
            num(p.m0_sq),
            num(p.delta_m),
            num(p.gap),
        ]);
        for (i, e) in p.eigenvalues.iter().enumerate() {
            levels.push(vec![p.n_max.to_string(), num(p.lambda), i.to_string(), num(*e)]);
        }
        for s in &p.sectors {
            sectors.push(vec![
                p.n_max.to_string(),
                num(p.lambda),
                s.sector.clone(),
                num(s.lowest),
            ]);
        }
        for (label, sum) in &p.pauli {
            for (c, w) in &sum.terms {
                pauli.push(vec![
                    p.n_max.to_string(),
                    num(p.lambda),
                    label.clone(),
                    num(c.re),
                    num(c.im),
                    w.to_string(),
                ]);
            }
        }
    }

    let mut tables = vec![gaps, levels];
    if config.parity_blocking {
        tables.push(sectors);
    }
    if config.qubit_encoding {
        tables.push(pauli);
    }
    let summary = format!("{} spectrum points over n_max {:?}", points.len(), config.n_max);
    Ok(Outcome {
        tables,
        points: serde_json::to_value(&points).map_err(|e| CliError::Output(e.to_string()))?,
        summary,
        verdicts: Vec::new(),
    })
}
