//! Variational minimization of two-qubit sector Hamiltonians on exact,
//! shot-sampled and noisy-with-mitigation backends.

use std::f64::consts::FRAC_PI_2;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    ansatz_entangled, ansatz_product, derive_seed, expectation_exact, measure_pauli, measure_pauli_density, prepare,
    seeded_rng, simulate_density, Circuit, NoiseModel,
};
use crate::encoding::{find_sector, parity_blocks, Parity, PauliSum, PauliWord, SectorHamiltonian};
use crate::fock::{build_hamiltonian, eigensystem};
use crate::lattice::ModelParams;
use crate::mitigation::{
    energy_from_state, mcweeny_purify, reconstruct_2q, ro_correct, PurificationReport, ReadoutCalibration,
    DEFAULT_EPS_N, DEFAULT_MAX_ITER,
};
use crate::optim::NelderMead;
use crate::{Error, Result};

/// Register width of both ansatz circuits.
pub const ANSATZ_QUBITS: usize = 2;

pub const DEFAULT_SHOTS: u64 = 8192;

const MAX_POLISH_ROUNDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Exact,
    Sampled,
    NoisyMitigated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub kind: BackendKind,
    /// Shots per measured Pauli word.
    pub shots: u64,
    /// Used only by [`BackendKind::NoisyMitigated`].
    pub noise: NoiseModel,
    pub readout_correction: bool,
    pub purification: bool,
    /// Shots per basis-state preparation when calibrating readout.
    pub calibration_shots: u64,
    pub eps_n: f64,
    pub max_purify_iter: usize,
}

impl BackendSpec {
    pub fn exact() -> Self {
        BackendSpec {
            kind: BackendKind::Exact,
            shots: DEFAULT_SHOTS,
            noise: NoiseModel::noiseless(ANSATZ_QUBITS),
            readout_correction: false,
            purification: false,
            calibration_shots: DEFAULT_SHOTS,
            eps_n: DEFAULT_EPS_N,
            max_purify_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn sampled(shots: u64) -> Self {
        BackendSpec {
            kind: BackendKind::Sampled,
            shots,
            ..BackendSpec::exact()
        }
    }

    /// Readout correction and purification both enabled.
    pub fn noisy_mitigated(shots: u64, noise: NoiseModel) -> Self {
        BackendSpec {
            kind: BackendKind::NoisyMitigated,
            shots,
            noise,
            readout_correction: true,
            purification: true,
            calibration_shots: shots,
            ..BackendSpec::exact()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != BackendKind::Exact && (self.shots == 0 || self.calibration_shots == 0) {
            return Err(Error::InvalidParameter(
                "sampled backends need at least one shot".into(),
            ));
        }
        if self.kind == BackendKind::NoisyMitigated {
            self.noise.validate()?;
            if self.noise.readout.len() != ANSATZ_QUBITS {
                return Err(Error::DimensionMismatch {
                    expected: ANSATZ_QUBITS,
                    found: self.noise.readout.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Product,
    Entangled,
}

impl AnsatzKind {
    pub fn parameter_count(self) -> usize {
        match self {
            AnsatzKind::Product => 2,
            AnsatzKind::Entangled => 3,
        }
    }

    pub fn circuit(self, theta: &[f64]) -> Result<Circuit> {
        if theta.len() != self.parameter_count() {
            return Err(Error::ParameterCount {
                expected: self.parameter_count(),
                found: theta.len(),
            });
        }
        Ok(match self {
            AnsatzKind::Product => ansatz_product(theta[0], theta[1]),
            AnsatzKind::Entangled => ansatz_entangled(theta[0], theta[1], theta[2]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub restarts: usize,
    /// Re-evaluations at the optimum used for the mean and spread.
    pub repeats: usize,
    pub initial_step: f64,
    /// Simplex spread tolerance for the exact backend.
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 4,
            repeats: 10,
            initial_step: 0.5,
            f_tol: 1e-7,
            max_evals: 600,
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub energy: f64,
    /// Raw sampled energy, noisy backend only.
    pub unmitigated: Option<f64>,
    pub purification: Option<PurificationReport>,
}

/// The sector's Pauli form, padded to the ansatz register.
pub fn sector_pauli(sector: &SectorHamiltonian) -> Result<PauliSum> {
    let pauli = sector.pauli.as_ref().ok_or_else(|| {
        Error::Unsupported(format!(
            "sector {} has no Pauli form (dimension {})",
            sector.label(),
            sector.dim()
        ))
    })?;
    if pauli.qubit_count > ANSATZ_QUBITS {
        return Err(Error::Unsupported(format!(
            "sector {} needs {} qubits; the ansatz has {ANSATZ_QUBITS}",
            sector.label(),
            pauli.qubit_count
        )));
    }
    pauli.padded(ANSATZ_QUBITS)
}

/// Owns the random stream and readout calibration of one optimization.
pub struct Evaluator {
    hamiltonian: PauliSum,
    ansatz: AnsatzKind,
    backend: BackendSpec,
    calibration: Option<ReadoutCalibration>,
    rng: ChaCha8Rng,
}

impl Evaluator {
    /// Calibrates readout first when the backend is noisy.
    pub fn new(hamiltonian: PauliSum, ansatz: AnsatzKind, backend: &BackendSpec, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let calibration = match backend.kind {
            BackendKind::NoisyMitigated if backend.readout_correction => Some(ReadoutCalibration::measure(
                &backend.noise,
                backend.calibration_shots,
                &mut rng,
            )?),
            _ => None,
        };
        Self::with_calibration(hamiltonian, ansatz, backend, calibration, rng)
    }

    fn with_calibration(
        hamiltonian: PauliSum,
        ansatz: AnsatzKind,
        backend: &BackendSpec,
        calibration: Option<ReadoutCalibration>,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        backend.validate()?;
        if hamiltonian.qubit_count != ANSATZ_QUBITS {
            return Err(Error::DimensionMismatch {
                expected: ANSATZ_QUBITS,
                found: hamiltonian.qubit_count,
            });
        }
        Ok(Evaluator {
            hamiltonian,
            ansatz,
            backend: backend.clone(),
            calibration,
            rng,
        })
    }

    pub fn calibration(&self) -> Option<&ReadoutCalibration> {
        self.calibration.as_ref()
    }

    pub fn evaluate(&mut self, theta: &[f64]) -> Result<Evaluation> {
        let circuit = self.ansatz.circuit(theta)?;
        match self.backend.kind {
            BackendKind::Exact => Ok(Evaluation {
                energy: expectation_exact(&prepare(&circuit), &self.hamiltonian)?,
                unmitigated: None,
                purification: None,
            }),
            BackendKind::Sampled => {
                let state = prepare(&circuit);
                let ideal = NoiseModel::noiseless(ANSATZ_QUBITS);
                let mut energy = 0.0;
                for (c, w) in &self.hamiltonian.terms {
                    let e = if w.is_identity() {
                        1.0
                    } else {
                        measure_pauli(&state, w, self.backend.shots, &ideal, &mut self.rng)?.parity_expectation()
                    };
                    energy += c.re * e;
                }
                Ok(Evaluation {
                    energy,
                    unmitigated: None,
                    purification: None,
                })
            }
            BackendKind::NoisyMitigated => self.evaluate_noisy(&circuit),
        }
    }

    fn evaluate_noisy(&mut self, circuit: &Circuit) -> Result<Evaluation> {
        let noise = &self.backend.noise;
        let rho = simulate_density(circuit, noise)?;
        let ideal_cal = ReadoutCalibration::ideal(ANSATZ_QUBITS);
        let cal = self.calibration.as_ref().unwrap_or(&ideal_cal);
        let tomography = self.backend.purification && self.ansatz == AnsatzKind::Entangled;

        let words: Vec<PauliWord> = if tomography {
            PauliWord::all(ANSATZ_QUBITS).filter(|w| !w.is_identity()).collect()
        } else {
            self.hamiltonian
                .terms
                .iter()
                .map(|(_, w)| w.clone())
                .filter(|w| !w.is_identity())
                .collect()
        };
        let mut raw = Vec::with_capacity(words.len());
        let mut corrected = Vec::with_capacity(words.len());
        for w in &words {
            let counts = measure_pauli_density(&rho, w, self.backend.shots, noise, &mut self.rng)?;
            raw.push(counts.parity_expectation());
            corrected.push(ro_correct(&counts, &w.support(), cal)?);
        }
        let weighted = |values: &[f64]| -> f64 {
            self.hamiltonian
                .terms
                .iter()
                .map(|(c, w)| {
                    let e = if w.is_identity() {
                        1.0
                    } else {
                        values[words.iter().position(|m| m == w).expect("every term was measured")]
                    };
                    c.re * e
                })
                .sum()
        };
        let unmitigated = weighted(&raw);

        if tomography {
            let expectations: Vec<(PauliWord, f64)> = words.iter().cloned().zip(corrected.iter().copied()).collect();
            let reconstructed = reconstruct_2q(&expectations)?;
            let (purified, report) = mcweeny_purify(&reconstructed, self.backend.eps_n, self.backend.max_purify_iter)?;
            Ok(Evaluation {
                energy: energy_from_state(&purified, &self.hamiltonian)?,
                unmitigated: Some(unmitigated),
                purification: Some(report),
            })
        } else {
            Ok(Evaluation {
                energy: weighted(&corrected),
                unmitigated: Some(unmitigated),
                purification: None,
            })
        }
    }
}

/// Single evaluation of the sector energy at `theta`.
pub fn energy_objective(
    theta: &[f64],
    sector: &SectorHamiltonian,
    ansatz: AnsatzKind,
    backend: &BackendSpec,
    seed: u64,
) -> Result<f64> {
    Evaluator::new(sector_pauli(sector)?, ansatz, backend, seed)?
        .evaluate(theta)
        .map(|e| e.energy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub ansatz: AnsatzKind,
    pub backend: BackendKind,
    pub sector: String,
    pub params: Vec<f64>,
    /// Mean over the re-evaluations at the optimum.
    pub energy: f64,
    /// Sample standard deviation of those re-evaluations.
    pub std: f64,
    pub unmitigated_energy: Option<f64>,
    pub unmitigated_std: Option<f64>,
    /// Objective values of the winning restart.
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
    pub purification: Vec<PurificationReport>,
    pub calibration: Option<ReadoutCalibration>,
    pub seed: u64,
}

fn start_point(restart: usize, n: usize) -> Vec<f64> {
    let pattern = match restart {
        0 => 0,
        r if r <= n => 1 << (r - 1),
        r if r == n + 1 => (1 << n) - 1,
        r => r,
    };
    (0..n)
        .map(|i| if (pattern >> i) & 1 == 1 { FRAC_PI_2 } else { 0.0 })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Nelder–Mead over the ansatz angles with fixed restarts, followed by
/// repeated evaluation at the best point.
pub fn optimize(
    sector: &SectorHamiltonian,
    ansatz: AnsatzKind,
    backend: &BackendSpec,
    seed: u64,
    settings: &OptimizerSettings,
) -> Result<VqeResult> {
    let hamiltonian = sector_pauli(sector)?;
    backend.validate()?;
    let calibration = match backend.kind {
        BackendKind::NoisyMitigated if backend.readout_correction => Some(ReadoutCalibration::measure(
            &backend.noise,
            backend.calibration_shots,
            &mut seeded_rng(derive_seed(seed, u64::MAX)),
        )?),
        _ => None,
    };
    let evaluator = |stream: u64| {
        Evaluator::with_calibration(
            hamiltonian.clone(),
            ansatz,
            backend,
            calibration.clone(),
            seeded_rng(derive_seed(seed, stream)),
        )
    };

    let f_tol = match backend.kind {
        BackendKind::Exact => settings.f_tol,
        _ => {
            let weight: f64 = hamiltonian
                .terms
                .iter()
                .filter(|(_, w)| !w.is_identity())
                .map(|(c, _)| c.norm_sqr())
                .sum();
            settings.f_tol.max((weight / backend.shots as f64).sqrt())
        }
    };
    let nm = NelderMead {
        initial_step: settings.initial_step,
        f_tol,
        max_evals: settings.max_evals,
    };

    let n = ansatz.parameter_count();
    let repeats = settings.repeats.max(2);
    let mut best: Option<(f64, crate::optim::Minimum)> = None;
    let mut evaluations = 0;
    for r in 0..settings.restarts.max(1) {
        let mut ev = evaluator(r as u64)?;
        let mut found = nm.minimize(|x| ev.evaluate(x).map(|e| e.energy), &start_point(r, n))?;
        evaluations += found.evals;
        let mut score = found.f;
        if backend.kind != BackendKind::Exact {
            // the bound above overstates the noise of most objectives; refine
            // against the spread actually observed at the first-pass optimum
            let sample = |x: &[f64], ev: &mut Evaluator| -> Result<(f64, f64)> {
                let values = (0..repeats)
                    .map(|_| ev.evaluate(x).map(|e| e.energy))
                    .collect::<Result<Vec<_>>>()?;
                Ok(mean_std(&values))
            };
            let (mean, sigma) = sample(&found.x, &mut ev)?;
            evaluations += repeats;
            score = mean;
            if sigma < nm.f_tol {
                let polish = NelderMead {
                    initial_step: settings.initial_step,
                    f_tol: sigma.max(settings.f_tol),
                    max_evals: settings.max_evals,
                };
                // fresh simplices at the incumbent until the mean stops improving
                for _ in 0..MAX_POLISH_ROUNDS {
                    let refined = polish.minimize(|x| ev.evaluate(x).map(|e| e.energy), &found.x)?;
                    evaluations += refined.evals;
                    let (refined_mean, _) = sample(&refined.x, &mut ev)?;
                    evaluations += repeats;
                    if refined_mean >= score {
                        break;
                    }
                    score = refined_mean;
                    found.history.extend(refined.history);
                    found = crate::optim::Minimum {
                        history: found.history,
                        ..refined
                    };
                }
            }
        }
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, found));
        }
    }
    let (_, best) = best.expect("at least one restart");

    let mut ev = evaluator(settings.restarts.max(1) as u64)?;
    let repeats = settings.repeats.max(1);
    let mut energies = Vec::with_capacity(repeats);
    let mut raw = Vec::new();
    let mut purification = Vec::new();
    for _ in 0..repeats {
        let e = ev.evaluate(&best.x)?;
        energies.push(e.energy);
        raw.extend(e.unmitigated);
        purification.extend(e.purification);
    }
    evaluations += repeats;
    let (energy, std) = mean_std(&energies);
    let (unmitigated_energy, unmitigated_std) = if raw.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&raw);
        (Some(m), Some(s))
    };

    Ok(VqeResult {
        ansatz,
        backend: backend.kind,
        sector: sector.label(),
        params: best.x,
        energy,
        std,
        unmitigated_energy,
        unmitigated_std,
        history: best.history,
        evaluations,
        converged: best.converged,
        purification,
        calibration,
        seed,
    })
}

/// VQE estimates of the lowest states of the `{+,+}` and `{−,+}` sectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub e0: f64,
    pub e0_std: f64,
    pub e1: f64,
    pub e1_std: f64,
    pub gap: f64,
    pub gap_std: f64,
    pub exact_e0: f64,
    pub exact_e1: f64,
    pub exact_gap: f64,
    pub ground: VqeResult,
    pub excited: VqeResult,
}

pub const GROUND_SECTOR: [Parity; 2] = [Parity::Even, Parity::Even];
pub const EXCITED_SECTOR: [Parity; 2] = [Parity::Odd, Parity::Even];

/// The `{+,+}` and `{−,+}` blocks of a two-site Hamiltonian.
pub fn benchmark_sectors(params: &ModelParams) -> Result<(SectorHamiltonian, SectorHamiltonian)> {
    if params.l != 2 {
        return Err(Error::Unsupported(format!(
            "mass-gap VQE needs two sites, got {}",
            params.l
        )));
    }
    let sectors = parity_blocks(&build_hamiltonian(params)?, params)?;
    let pick = |p: &[Parity]| {
        find_sector(&sectors, p)
            .cloned()
            .ok_or_else(|| Error::Unsupported("missing parity sector".into()))
    };
    let ground = pick(&GROUND_SECTOR)?;
    let excited = pick(&EXCITED_SECTOR)?;
    sector_pauli(&ground)?;
    sector_pauli(&excited)?;
    Ok((ground, excited))
}

/// Lowest eigenvalue of a sector block.
pub fn sector_minimum(sector: &SectorHamiltonian) -> Result<f64> {
    Ok(eigensystem(&sector.block)?.values[0])
}

pub fn mass_gap_vqe(
    params: &ModelParams,
    backend: &BackendSpec,
    ansatz: AnsatzKind,
    seed: u64,
    settings: &OptimizerSettings,
) -> Result<GapResult> {
    let (ground_sector, excited_sector) = benchmark_sectors(params)?;
    let exact_e0 = sector_minimum(&ground_sector)?;
    let exact_e1 = sector_minimum(&excited_sector)?;
    let ground = optimize(&ground_sector, ansatz, backend, derive_seed(seed, 0), settings)?;
    let excited = optimize(&excited_sector, ansatz, backend, derive_seed(seed, 1), settings)?;
    Ok(GapResult {
        e0: ground.energy,
        e0_std: ground.std,
        e1: excited.energy,
        e1_std: excited.std,
        gap: excited.energy - ground.energy,
        gap_std: ground.std.hypot(excited.std),
        exact_e0,
        exact_e1,
        exact_gap: exact_e1 - exact_e0,
        ground,
        excited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn benchmark(lambda: f64) -> ModelParams {
        ModelParams::from_bare_mass(2, 1.0, -1.5, lambda, 4).unwrap()
    }

    #[test]
    fn start_points_cover_corners() {
        assert_eq!(start_point(0, 2), vec![0.0, 0.0]);
        assert_eq!(start_point(1, 2), vec![FRAC_PI_2, 0.0]);
        assert_eq!(start_point(2, 2), vec![0.0, FRAC_PI_2]);
        assert_eq!(start_point(3, 2), vec![FRAC_PI_2, FRAC_PI_2]);
        assert_eq!(start_point(3, 3), vec![0.0, 0.0, FRAC_PI_2]);
        assert_eq!(start_point(4, 3), vec![FRAC_PI_2; 3]);
    }

    #[test]
    fn objective_at_zero_angles_is_diagonal_element() {
        let (g, _) = benchmark_sectors(&benchmark(6.0)).unwrap();
        let e = energy_objective(&[0.0, 0.0, 0.0], &g, AnsatzKind::Entangled, &BackendSpec::exact(), 0).unwrap();
        assert!((e - g.block[(0, 0)].re).abs() < 1e-12);
        assert!(matches!(
            energy_objective(&[0.0; 3], &g, AnsatzKind::Product, &BackendSpec::exact(), 0),
            Err(Error::ParameterCount { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn free_vacuum_has_zero_energy() {
        let (g, _) = benchmark_sectors(&ModelParams::free(2, 1.0, 4).unwrap()).unwrap();
        let e = energy_objective(&[0.0, 0.0], &g, AnsatzKind::Product, &BackendSpec::exact(), 0).unwrap();
        assert!(e.abs() < 1e-14);
        let r = optimize(
            &g,
            AnsatzKind::Entangled,
            &BackendSpec::exact(),
            1,
            &OptimizerSettings::default(),
        )
        .unwrap();
        assert!(r.energy.abs() < 1e-7);
        for t in &r.params[..2] {
            let wrapped = t.rem_euclid(2.0 * std::f64::consts::PI);
            assert!(wrapped.min(2.0 * std::f64::consts::PI - wrapped) < 1e-2);
        }
    }

    #[test]
    fn exact_entangled_reaches_block_minimum() {
        let gap = mass_gap_vqe(
            &benchmark(6.0),
            &BackendSpec::exact(),
            AnsatzKind::Entangled,
            3,
            &OptimizerSettings::default(),
        )
        .unwrap();
        assert!((gap.e0 - gap.exact_e0).abs() < 1e-6);
        assert!((gap.e1 - gap.exact_e1).abs() < 1e-6);
        assert!((gap.gap - gap.exact_gap).abs() < 1e-6);
        assert!(gap.gap_std < 1e-12);
        assert!(gap.e0 >= gap.exact_e0 - 1e-9);
    }

    #[test]
    fn free_gap_is_reference_mass() {
        let p = ModelParams::free(2, 1.0, 4).unwrap();
        let gap = mass_gap_vqe(
            &p,
            &BackendSpec::exact(),
            AnsatzKind::Entangled,
            0,
            &OptimizerSettings::default(),
        )
        .unwrap();
        assert!((gap.gap - 1.0).abs() < 1e-6);
    }

    #[test]
    fn product_is_never_below_entangled() {
        let (g, _) = benchmark_sectors(&benchmark(10.0)).unwrap();
        let s = OptimizerSettings::default();
        let p = optimize(&g, AnsatzKind::Product, &BackendSpec::exact(), 0, &s).unwrap();
        let e = optimize(&g, AnsatzKind::Entangled, &BackendSpec::exact(), 0, &s).unwrap();
        assert!(e.energy <= p.energy + 1e-9);
    }

    #[test]
    fn sampled_objective_tracks_exact() {
        let (g, _) = benchmark_sectors(&benchmark(6.0)).unwrap();
        let pauli = sector_pauli(&g).unwrap();
        let theta = [0.3, -0.2, 0.5];
        let exact = energy_objective(&theta, &g, AnsatzKind::Entangled, &BackendSpec::exact(), 0).unwrap();
        let state = prepare(&AnsatzKind::Entangled.circuit(&theta).unwrap());
        let variance: f64 = pauli
            .terms
            .iter()
            .filter(|(_, w)| !w.is_identity())
            .map(|(c, w)| {
                let m = expectation_exact(
                    &state,
                    &PauliSum::new(2, vec![(crate::Complex64::new(1.0, 0.0), w.clone())]).unwrap(),
                )
                .unwrap();
                c.norm_sqr() * (1.0 - m * m) / 8192.0
            })
            .sum();
        let sampled = energy_objective(&theta, &g, AnsatzKind::Entangled, &BackendSpec::sampled(8192), 17).unwrap();
        assert!((sampled - exact).abs() < 4.0 * variance.sqrt() + 1e-12);
    }

    #[test]
    fn runs_are_deterministic() {
        let (g, _) = benchmark_sectors(&benchmark(4.0)).unwrap();
        let backend = BackendSpec::noisy_mitigated(512, NoiseModel::uniform(2, 0.03, 0.02, 5).unwrap());
        let settings = OptimizerSettings {
            max_evals: 60,
            ..Default::default()
        };
        let a = optimize(&g, AnsatzKind::Entangled, &backend, 9, &settings).unwrap();
        let b = optimize(&g, AnsatzKind::Entangled, &backend, 9, &settings).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.purification.len(), settings.repeats);
        assert!(a.calibration.is_some() && a.unmitigated_energy.is_some());
    }

    #[test]
    fn three_sites_unsupported() {
        let p = ModelParams::from_bare_mass(3, 1.0, 0.5, 0.0, 2).unwrap();
        assert!(mass_gap_vqe(
            &p,
            &BackendSpec::exact(),
            AnsatzKind::Entangled,
            0,
            &OptimizerSettings::default()
        )
        .is_err());
    }

    #[test]
    fn oversized_sector_unsupported() {
        let p = ModelParams::from_bare_mass(2, 1.0, -1.5, 2.0, 8).unwrap();
        assert!(matches!(benchmark_sectors(&p), Err(Error::Unsupported(_))));
    }
}
