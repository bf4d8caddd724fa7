//! Readout-error correction of sampled Pauli expectations, two-qubit state
//! tomography and McWeeny purification.

use serde::{Deserialize, Serialize};

use crate::circuit::{measure_pauli_density, simulate_density, Circuit, Counts, DensityMatrix, NoiseModel};
use crate::encoding::{PauliSum, PauliWord};
use crate::fock::hermitian_deviation;
use crate::{CMatrix, Complex64, Error, Result};

/// Estimated flip rates of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub p0_given_1: f64,
    pub p1_given_0: f64,
}

impl QubitCalibration {
    pub fn p_minus(&self) -> f64 {
        self.p0_given_1 - self.p1_given_0
    }

    pub fn p_plus(&self) -> f64 {
        self.p0_given_1 + self.p1_given_0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCalibration {
    qubits: Vec<QubitCalibration>,
}

impl ReadoutCalibration {
    pub fn new(qubits: Vec<QubitCalibration>) -> Result<Self> {
        for (q, c) in qubits.iter().enumerate() {
            if !(1.0 - c.p_plus() > 0.0) {
                return Err(Error::InvalidCalibration {
                    qubit: q,
                    p_plus: c.p_plus(),
                });
            }
        }
        Ok(ReadoutCalibration { qubits })
    }

    /// Zero flip rates on every qubit.
    pub fn ideal(qubit_count: usize) -> Self {
        ReadoutCalibration {
            qubits: vec![QubitCalibration::default(); qubit_count],
        }
    }

    /// Calibrates every qubit of `noise` with `shots` preparations of each
    /// basis state.
    pub fn measure<R: rand::Rng + ?Sized>(noise: &NoiseModel, shots: u64, rng: &mut R) -> Result<Self> {
        let qubits = (0..noise.readout.len())
            .map(|q| {
                crate::circuit::calibrate_readout(noise, q, shots, rng)
                    .map(|(p0_given_1, p1_given_0)| QubitCalibration { p0_given_1, p1_given_0 })
            })
            .collect::<Result<Vec<_>>>()?;
        ReadoutCalibration::new(qubits)
    }

    pub fn qubits(&self) -> &[QubitCalibration] {
        &self.qubits
    }

    pub fn get(&self, qubit: usize) -> Result<QubitCalibration> {
        self.qubits.get(qubit).copied().ok_or(Error::IndexOutOfRange {
            index: qubit,
            len: self.qubits.len(),
        })
    }
}

/// Corrected `⟨Z…Z⟩` on `support` from an outcome distribution whose bit `i`
/// belongs to `measured[i]`.
pub fn ro_correct_distribution<'a>(
    outcomes: impl IntoIterator<Item = (&'a str, f64)>,
    measured: &[usize],
    support: &[usize],
    cal: &ReadoutCalibration,
) -> Result<f64> {
    let mut positions = Vec::with_capacity(support.len());
    let mut factors = Vec::with_capacity(support.len());
    for &q in support {
        let pos = measured
            .iter()
            .position(|&m| m == q)
            .ok_or_else(|| Error::InvalidParameter(format!("support qubit q{q} was not measured")))?;
        let c = cal.get(q)?;
        let denom = 1.0 - c.p_plus();
        if denom <= 0.0 {
            return Err(Error::InvalidCalibration {
                qubit: q,
                p_plus: c.p_plus(),
            });
        }
        positions.push(pos);
        factors.push((c.p_minus(), denom));
    }
    let mut total = 0.0;
    for (bits, p) in outcomes {
        let bits = bits.as_bytes();
        if bits.len() != measured.len() {
            return Err(Error::Parse(format!(
                "outcome of width {} for {} measured qubits",
                bits.len(),
                measured.len()
            )));
        }
        let term: f64 = positions
            .iter()
            .zip(&factors)
            .map(|(&pos, &(p_minus, denom))| {
                let sign = if bits[pos] == b'1' { -1.0 } else { 1.0 };
                (sign - p_minus) / denom
            })
            .product();
        total += p * term;
    }
    Ok(total)
}

/// `Σ_x p(x) Π_{i∈support} ((−1)^{x_i} − p_i⁻)/(1 − p_i⁺)`.
pub fn ro_correct(counts: &Counts, support: &[usize], cal: &ReadoutCalibration) -> Result<f64> {
    if counts.shots == 0 {
        return Err(Error::InvalidParameter("empty counts".into()));
    }
    let shots = counts.shots as f64;
    ro_correct_distribution(
        counts.histogram.iter().map(|(k, &n)| (k.as_str(), n as f64 / shots)),
        &counts.measured,
        support,
        cal,
    )
}

/// `ρ = ¼ Σ_p ⟨p⟩ p` from the expectations of all two-qubit words, symmetrized.
/// Words missing from `expectations` contribute zero; the identity is fixed at 1.
pub fn reconstruct_2q(expectations: &[(PauliWord, f64)]) -> Result<DensityMatrix> {
    let mut rho = PauliWord::identity(2).to_matrix();
    for (w, e) in expectations {
        if w.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: w.len(),
            });
        }
        if !w.is_identity() {
            rho += w.to_matrix() * Complex64::new(*e, 0.0);
        }
    }
    rho *= Complex64::new(0.25, 0.0);
    DensityMatrix::from_matrix((&rho + rho.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Readout-corrected expectations of the 15 non-identity words sampled from `rho`.
pub fn sample_pauli_expectations<R: rand::Rng + ?Sized>(
    rho: &DensityMatrix,
    noise: &NoiseModel,
    shots: u64,
    cal: &ReadoutCalibration,
    rng: &mut R,
) -> Result<Vec<(PauliWord, f64, f64)>> {
    PauliWord::all(rho.qubit_count())
        .filter(|w| !w.is_identity())
        .map(|w| {
            let counts = measure_pauli_density(rho, &w, shots, noise, rng)?;
            let raw = counts.parity_expectation();
            let corrected = ro_correct(&counts, &w.support(), cal)?;
            Ok((w, raw, corrected))
        })
        .collect()
}

/// Sampled tomography of a two-qubit circuit run under `noise`.
pub fn tomography_2q<R: rand::Rng + ?Sized>(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    cal: &ReadoutCalibration,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if circuit.qubit_count() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: circuit.qubit_count(),
        });
    }
    let rho = simulate_density(circuit, noise)?;
    let expectations: Vec<(PauliWord, f64)> = sample_pauli_expectations(&rho, noise, shots, cal, rng)?
        .into_iter()
        .map(|(w, _, corrected)| (w, corrected))
        .collect();
    reconstruct_2q(&expectations)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurificationReport {
    pub iterations: usize,
    pub non_idempotency: f64,
    pub converged: bool,
    pub initial_purity: f64,
    pub final_purity: f64,
}

pub const DEFAULT_EPS_N: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 100;

fn non_idempotency(m: &CMatrix) -> f64 {
    (m * m - m).trace().re
}

fn normalized(m: CMatrix) -> CMatrix {
    let tr = m.trace().re;

    (&m + m.adjoint()) * Complex64::new(0.5 / tr, 0.0)
}

/// Iterates `ρ ← 3ρ² − 2ρ³`, renormalizing the trace, until
/// `|Tr(ρ² − ρ)| < eps_n`. Inputs whose largest eigenvalue is below ½ are
/// returned unchanged (trace-normalized) with `converged = false`.
pub fn mcweeny_purify(rho: &DensityMatrix, eps_n: f64, max_iter: usize) -> Result<(DensityMatrix, PurificationReport)> {
    let dev = hermitian_deviation(rho.matrix());
    if dev > 1e-8 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let tr = rho.trace();
    if !(0.5..=1.5).contains(&tr) {
        return Err(Error::InvalidParameter(format!(
            "density trace {tr} outside [0.5, 1.5]"
        )));
    }
    let mut m = normalized(rho.matrix().clone());
    let initial_purity = (&m * &m).trace().re;
    let start = DensityMatrix::from_matrix(m.clone())?;
    let dominant = start.eigenvalues().last().copied().unwrap_or(0.0);
    let mut report = PurificationReport {
        iterations: 0,
        non_idempotency: non_idempotency(&m),
        converged: false,
        initial_purity,
        final_purity: initial_purity,
    };
    if dominant < 0.5 {
        return Ok((start, report));
    }
    loop {
        report.non_idempotency = non_idempotency(&m);
        if report.non_idempotency.abs() < eps_n {
            report.converged = true;
            break;
        }
        if report.iterations == max_iter {
            break;
        }
        let sq = &m * &m;
        let cube = &sq * &m;
        m = normalized(sq * Complex64::new(3.0, 0.0) - cube * Complex64::new(2.0, 0.0));
        report.iterations += 1;
    }
    report.final_purity = (&m * &m).trace().re;
    Ok((DensityMatrix::from_matrix(m)?, report))
}

/// `Re Tr(ρ H)`.
pub fn energy_from_state(rho: &DensityMatrix, h: &PauliSum) -> Result<f64> {
    if h.qubit_count != rho.qubit_count() {
        return Err(Error::DimensionMismatch {
            expected: h.qubit_count,
            found: rho.qubit_count(),
        });
    }
    Ok((rho.matrix() * h.to_matrix()).trace().re)
}
