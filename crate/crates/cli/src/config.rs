//! Experiment configuration: JSON documents with defaults for every key
//! except the bare mass / counter term choice.

use std::path::PathBuf;

use phi4_core::circuit::{NoiseModel, ReadoutRates};
use phi4_core::lattice::ModelParams;
use phi4_core::vqe::{AnsatzKind, BackendKind, BackendSpec, OptimizerSettings, ANSATZ_QUBITS, DEFAULT_SHOTS};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Couplings of the two-site benchmark.
pub const BENCHMARK_LAMBDAS: [f64; 7] = [2.0, 4.0, 6.0, 8.21, 10.0, 12.0, 14.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_l")]
    pub l: usize,
    #[serde(default = "default_m_sq")]
    pub m_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<f64>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: Vec<usize>,
    /// Also split each spectrum into parity sectors.
    #[serde(default)]
    pub parity_blocking: bool,
    /// Also export Pauli decompositions.
    #[serde(default)]
    pub qubit_encoding: bool,
    /// Eigenvalues written per spectrum point.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_backends")]
    pub backends: Vec<BackendConfig>,
    #[serde(default = "default_ansatze")]
    pub ansatze: Vec<AnsatzKind>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub counterterm: CountertermConfig,
    #[serde(default)]
    pub critical: CriticalConfig,
}

fn default_l() -> usize {
    2
}
fn default_m_sq() -> f64 {
    1.0
}
fn default_lambdas() -> Vec<f64> {
    BENCHMARK_LAMBDAS.to_vec()
}
fn default_n_max() -> Vec<usize> {
    vec![4]
}
fn default_levels() -> usize {
    6
}
fn default_backends() -> Vec<BackendConfig> {
    vec![BackendConfig::default()]
}
fn default_ansatze() -> Vec<AnsatzKind> {
    vec![AnsatzKind::Entangled, AnsatzKind::Product]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub shots: u64,
    pub p_dep: f64,
    pub p1_given_0: f64,
    pub p0_given_1: f64,
    pub readout_correction: bool,
    pub purification: bool,
    pub calibration_shots: u64,
    pub eps_n: f64,
    pub max_purify_iter: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        let exact = BackendSpec::exact();
        BackendConfig {
            kind: BackendKind::Exact,
            shots: DEFAULT_SHOTS,
            p_dep: NoiseModel::DEFAULT_P_DEP,
            p1_given_0: 0.03,
            p0_given_1: 0.03,
            readout_correction: true,
            purification: true,
            calibration_shots: DEFAULT_SHOTS,
            eps_n: exact.eps_n,
            max_purify_iter: exact.max_purify_iter,
        }
    }
}

impl BackendConfig {
    pub fn label(&self) -> &'static str {
        match self.kind {
            BackendKind::Exact => "exact",
            BackendKind::Sampled => "sampled",
            BackendKind::NoisyMitigated => "noisy_mitigated",
        }
    }

    /// Backend for one grid point; `seed` is recorded on the noise model.
    pub fn spec(&self, seed: u64) -> BackendSpec {
        match self.kind {
            BackendKind::Exact => BackendSpec::exact(),
            BackendKind::Sampled => BackendSpec::sampled(self.shots),
            BackendKind::NoisyMitigated => {
                let noise = NoiseModel {
                    readout: vec![
                        ReadoutRates {
                            p1_given_0: self.p1_given_0,
                            p0_given_1: self.p0_given_1,
                        };
                        ANSATZ_QUBITS
                    ],
                    p_dep: self.p_dep,
                    seed,
                };
                BackendSpec {
                    readout_correction: self.readout_correction,
                    purification: self.purification,
                    calibration_shots: self.calibration_shots,
                    eps_n: self.eps_n,
                    max_purify_iter: self.max_purify_iter,
                    ..BackendSpec::noisy_mitigated(self.shots, noise)
                }
            }
        }
    }
}

/// Lattice size for first-order counter-term curves; `"inf"` selects the
/// continuum closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSize {
    Sites(usize),
    Infinite(Infinite),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinite {
    #[serde(rename = "inf")]
    Inf,
}

impl std::fmt::Display for LatticeSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LatticeSize::Sites(n) => write!(f, "{n}"),
            LatticeSize::Infinite(_) => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountertermConfig {
    pub m_sq_values: Vec<f64>,
    pub lattice_sizes: Vec<LatticeSize>,
    pub curve_lambdas: Vec<f64>,
    /// Couplings of the gap-vs-counter-term sweeps and their roots.
    pub sweep_lambdas: Vec<f64>,
    pub delta_range: (f64, f64),
    pub delta_points: usize,
}

impl Default for CountertermConfig {
    fn default() -> Self {
        CountertermConfig {
            m_sq_values: vec![0.1, 1.5],
            lattice_sizes: [8, 16, 32, 64]
                .into_iter()
                .map(LatticeSize::Sites)
                .chain([LatticeSize::Infinite(Infinite::Inf)])
                .collect(),
            curve_lambdas: (0..=20).map(|i| 0.5 * i as f64).collect(),
            sweep_lambdas: vec![6.0, 10.0, 24.0],
            delta_range: (-9.0, 2.0),
            delta_points: 45,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalConfig {
    /// Squared target gaps of the critical curves.
    pub target_gap_sq: Vec<f64>,
    pub curve_lambdas: Vec<f64>,
    /// Bare masses of the power-law fits.
    pub fit_m0_sq: Vec<f64>,
    pub fit_n_max: Vec<usize>,
    pub scan_step: f64,
    pub scan_max: f64,
    pub window_count: usize,
    pub gap_floor: f64,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        CriticalConfig {
            target_gap_sq: vec![0.1, 0.25, 0.5],
            curve_lambdas: (0..=24).map(|i| 0.5 * i as f64).collect(),
            fit_m0_sq: vec![-1.5, -2.5],
            fit_n_max: vec![8],
            scan_step: 0.25,
            scan_max: 25.0,
            window_count: 6,
            gap_floor: 0.2,
        }
    }
}

impl CriticalConfig {
    pub fn scan_grid(&self) -> Vec<f64> {
        let n = (self.scan_max / self.scan_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.scan_step * i as f64).collect()
    }
}

/// What a command asks of the configuration beyond the common checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct Requirements {
    pub parity: bool,
    pub encoding: bool,
    pub vqe: bool,
}

impl ExperimentConfig {
    /// Parses a config document, or the `config` member of an emitted result
    /// record.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if let Some(inner) = value.get("schema").and(value.get("config")) {
            return serde_json::from_value(inner.clone())
                .map_err(|e| CliError::Validation(format!("config member of result record: {e}")));
        }
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Model parameters at one grid point.
    pub fn params(&self, lambda: f64, n_max: usize) -> Result<ModelParams, CliError> {
        let p = match (self.m0_sq, self.delta_m) {
            (Some(m0_sq), None) => ModelParams::from_bare_mass(self.l, self.m_sq, m0_sq, lambda, n_max),
            (None, Some(delta_m)) => ModelParams::from_counterterm(self.l, self.m_sq, delta_m, lambda, n_max),
            _ => {
                return Err(CliError::Validation(
                    "exactly one of m0_sq and delta_m must be given".into(),
                ))
            }
        };
        p.map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn validate(&self, req: Requirements, source: Option<&str>) -> Result<(), CliError> {
        let fail = |key: &str, msg: String| {
            let at = source
                .and_then(|s| line_of(s, key))
                .map(|l| format!("line {l}: "))
                .unwrap_or_default();
            Err(CliError::Validation(format!("{at}{key}: {msg}")))
        };
        match (self.m0_sq, self.delta_m) {
            (Some(_), Some(_)) => return fail("delta_m", "give either m0_sq or delta_m, not both".into()),
            (None, None) => return fail("m0_sq", "one of m0_sq and delta_m is required".into()),
            _ => {}
        }
        if !(self.m_sq > 0.0) || !self.m_sq.is_finite() {
            return fail("m_sq", format!("must be positive, got {}", self.m_sq));
        }
        if self.l == 0 {
            return fail("l", "must be positive".into());
        }
        if self.lambdas.is_empty() {
            return fail("lambdas", "grid is empty".into());
        }
        if let Some(bad) = self.lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return fail(
                "lambdas",
                format!("couplings must be finite and non-negative, got {bad}"),
            );
        }
        if self.n_max.is_empty() {
            return fail("n_max", "grid is empty".into());
        }
        for &n in &self.n_max {
            if n < 2 {
                return fail("n_max", format!("cutoff must be at least 2, got {n}"));
            }
            if (req.parity || self.parity_blocking) && n % 2 != 0 {
                return fail("n_max", format!("parity blocking needs an even cutoff, got {n}"));
            }
            if (req.encoding || self.qubit_encoding) && !n.is_power_of_two() {
                return fail("n_max", format!("qubit encoding needs a power-of-two cutoff, got {n}"));
            }
        }
        if req.vqe {
            if self.l != 2 {
                return fail("l", format!("the mass-gap VQE runs on two sites, got {}", self.l));
            }
            if let Some(&n) = self.n_max.iter().find(|&&n| n > 4) {
                return fail(
                    "n_max",
                    format!("sector Hamiltonians must fit on two qubits, got cutoff {n}"),
                );
            }
            if self.backends.is_empty() {
                return fail("backends", "list is empty".into());
            }
            if self.ansatze.is_empty() {
                return fail("ansatze", "list is empty".into());
            }
            for b in &self.backends {
                if let Err(e) = b.spec(self.seed).validate() {
                    return fail("backends", e.to_string());
                }
            }
            let o = &self.optimizer;
            if o.restarts == 0 || o.repeats < 2 || o.max_evals == 0 || !(o.initial_step > 0.0) || !(o.f_tol >= 0.0) {
                return fail(
                    "optimizer",
                    "need restarts ≥ 1, repeats ≥ 2, max_evals ≥ 1, initial_step > 0, f_tol ≥ 0".into(),
                );
            }
        }
        let c = &self.counterterm;
        if c.m_sq_values.is_empty()
            || c.lattice_sizes.is_empty()
            || c.curve_lambdas.is_empty()
            || c.sweep_lambdas.is_empty()
        {
            return fail("counterterm", "grids must be nonempty".into());
        }
        if c.m_sq_values.iter().any(|m| !(*m > 0.0)) {
            return fail("m_sq_values", "masses must be positive".into());
        }
        if c.lattice_sizes.contains(&LatticeSize::Sites(0)) {
            return fail("lattice_sizes", "sizes must be positive".into());
        }
        if c.delta_points < 2 || !(c.delta_range.0 < c.delta_range.1) {
            return fail("delta_range", "need an increasing range and at least 2 points".into());
        }
        let k = &self.critical;
        if k.target_gap_sq.is_empty() || k.curve_lambdas.is_empty() || k.fit_m0_sq.is_empty() || k.fit_n_max.is_empty()
        {
            return fail("critical", "grids must be nonempty".into());
        }
        if k.target_gap_sq.iter().any(|t| !(*t > 0.0)) {
            return fail("target_gap_sq", "targets must be positive".into());
        }
        if k.fit_n_max.iter().any(|&n| n < 2) {
            return fail("fit_n_max", "cutoff must be at least 2".into());
        }
        if !(k.scan_step > 0.0) || !(k.scan_max > k.scan_step) || k.window_count < 4 {
            return fail(
                "critical",
                "need scan_step > 0, scan_max > scan_step and window_count ≥ 4".into(),
            );
        }
        Ok(())
    }
}

fn line_of(source: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    source.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}
