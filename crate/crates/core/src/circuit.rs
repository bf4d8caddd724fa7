//! Statevector and density-matrix simulation of `RotY`/`CNOT` circuits with
//! Pauli-basis sampling, readout bit flips and two-qubit depolarization.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::encoding::{Pauli, PauliSum, PauliWord};
use crate::{CMatrix, Complex64, Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Splitmix64 finalizer; mixes a master seed with a stream index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    RotY { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::RotY { qubit, angle } => write!(f, "ry q{qubit} {angle}"),
            Gate::Cnot { control, target } => write!(f, "cx q{control} q{target}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Self {
        Circuit {
            qubit_count,
            gates: Vec::new(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubit_count {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: self.qubit_count,
            });
        }
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        match gate {
            Gate::RotY { qubit, angle } => {
                self.check_qubit(qubit)?;
                if !angle.is_finite() {
                    return Err(Error::InvalidParameter(format!("non-finite rotation angle {angle}")));
                }
            }
            Gate::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::InvalidParameter(format!(
                        "CNOT control and target both q{control}"
                    )));
                }
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn ry(&mut self, qubit: usize, angle: f64) -> Result<&mut Self> {
        self.push(Gate::RotY { qubit, angle })
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate::Cnot { control, target })
    }

    /// One gate per line, preceded by a `# qubits N` comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("# qubits {}\n", self.qubit_count);
        for g in &self.gates {
            out.push_str(&format!("{g}\n"));
        }
        out
    }

    /// Parses [`Circuit::to_text`] output. Without a `# qubits` line the
    /// register is sized to the highest referenced qubit.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut declared = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}: '{line}'", lineno + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() == Some("qubits") {
                    let n = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad qubit count"))?;
                    declared = Some(n);
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let qubit = |s: &str| -> Result<usize> {
                s.strip_prefix('q')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| err("bad qubit reference"))
            };
            let gate = match tokens.as_slice() {
                ["ry", q, angle] => Gate::RotY {
                    qubit: qubit(q)?,
                    angle: angle.parse().map_err(|_| err("bad angle"))?,
                },
                ["cx", c, t] => Gate::Cnot {
                    control: qubit(c)?,
                    target: qubit(t)?,
                },
                _ => return Err(err("unknown instruction")),
            };
            gates.push(gate);
        }
        let highest = gates
            .iter()
            .map(|g| match *g {
                Gate::RotY { qubit, .. } => qubit + 1,
                Gate::Cnot { control, target } => control.max(target) + 1,
            })
            .max()
            .unwrap_or(0);
        let mut circuit = Circuit::new(declared.unwrap_or(highest));
        for g in gates {
            circuit.push(g)?;
        }
        Ok(circuit)
    }
}

/// `U_p = RotY(q1, θ1) RotY(q0, θ0)` on two qubits.
pub fn ansatz_product(theta0: f64, theta1: f64) -> Circuit {
    let mut c = Circuit::new(2);
    c.ry(0, theta0)
        .and_then(|c| c.ry(1, theta1))
        .expect("fixed two-qubit layout");
    c
}

/// `U_p` followed by a controlled `RotY(θ2)` on qubit 1, controlled by qubit 0,
/// expanded into two CNOTs.
pub fn ansatz_entangled(theta0: f64, theta1: f64, theta2: f64) -> Circuit {
    let mut c = ansatz_product(theta0, theta1);
    c.ry(1, theta2 / 2.0)
        .and_then(|c| c.cx(0, 1))
        .and_then(|c| c.ry(1, -theta2 / 2.0))
        .and_then(|c| c.cx(0, 1))
        .expect("fixed two-qubit layout");
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(qubit_count: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubit_count];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes }
    }

    /// Computational basis state; qubit 0 is the leading bit of `index`.
    pub fn basis(qubit_count: usize, index: usize) -> Result<Self> {
        let dim = 1 << qubit_count;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(amplitudes.len()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm² {norm} is not 1")));
        }
        Ok(StateVector { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn qubit_count(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn apply_gate(&mut self, gate: &Gate) {
        let n = self.qubit_count();
        match *gate {
            Gate::RotY { qubit, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let bit = 1 << (n - 1 - qubit);
                for i in (0..self.amplitudes.len()).filter(|i| i & bit == 0) {
                    let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                    self.amplitudes[i] = a0 * c - a1 * s;
                    self.amplitudes[i | bit] = a0 * s + a1 * c;
                }
            }
            Gate::Cnot { control, target } => {
                let cbit = 1 << (n - 1 - control);
                let tbit = 1 << (n - 1 - target);
                for i in (0..self.amplitudes.len()).filter(|i| i & cbit != 0 && i & tbit == 0) {
                    self.amplitudes.swap(i, i | tbit);
                }
            }
        }
    }
}

pub fn apply_circuit(circuit: &Circuit, initial: &StateVector) -> Result<StateVector> {
    if initial.qubit_count() != circuit.qubit_count {
        return Err(Error::DimensionMismatch {
            expected: circuit.qubit_count,
            found: initial.qubit_count(),
        });
    }
    let mut state = initial.clone();
    for g in &circuit.gates {
        state.apply_gate(g);
    }
    Ok(state)
}

/// The circuit applied to `|0…0⟩`.
pub fn prepare(circuit: &Circuit) -> StateVector {
    apply_circuit(circuit, &StateVector::zero(circuit.qubit_count)).expect("register sized from circuit")
}

fn check_qubits(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `⟨ψ|H|ψ⟩`.
pub fn expectation_exact(state: &StateVector, h: &PauliSum) -> Result<f64> {
    check_qubits(h.qubit_count, state.qubit_count())?;
    let value: Complex64 = h
        .terms
        .iter()
        .map(|(c, w)| {
            c * state.inner(&StateVector {
                amplitudes: w.apply(&state.amplitudes),
            })
        })
        .sum();
    Ok(value.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn from_state(state: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        DensityMatrix {
            matrix: &v * v.adjoint(),
        }
    }

    /// Wraps a square power-of-two matrix without checking positivity or trace.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if !matrix.nrows().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(matrix.nrows()));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(qubit_count: usize) -> Self {
        let dim = 1 << qubit_count;
        DensityMatrix {
            matrix: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn qubit_count(&self) -> usize {
        self.matrix.nrows().trailing_zeros() as usize
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity(&self, state: &StateVector) -> f64 {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        (v.adjoint() * &self.matrix * &v)[(0, 0)].re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `Tr(ρ w)` for a Pauli word.
    pub fn pauli_expectation(&self, word: &PauliWord) -> f64 {
        (&self.matrix * word.to_matrix()).trace().re
    }

    fn conjugate(&mut self, u: &CMatrix) {
        self.matrix = u * &self.matrix * u.adjoint();
    }
}

/// Dense unitary of a gate on `n` qubits.
pub fn gate_matrix(gate: &Gate, n: usize) -> CMatrix {
    let dim = 1 << n;
    CMatrix::from_columns(
        &(0..dim)
            .map(|j| {
                let mut s = StateVector::basis(n, j).expect("index below 2^n");
                s.apply_gate(gate);
                nalgebra::DVector::from_column_slice(s.amplitudes())
            })
            .collect::<Vec<_>>(),
    )
}

/// Readout flip rates of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReadoutRates {
    pub p1_given_0: f64,
    pub p0_given_1: f64,
}

impl ReadoutRates {
    pub fn symmetric(p: f64) -> Self {
        ReadoutRates {
            p1_given_0: p,
            p0_given_1: p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub readout: Vec<ReadoutRates>,
    pub p_dep: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub const DEFAULT_P_DEP: f64 = 0.02;

    pub fn noiseless(qubit_count: usize) -> Self {
        NoiseModel {
            readout: vec![ReadoutRates::default(); qubit_count],
            p_dep: 0.0,
            seed: 0,
        }
    }

    pub fn uniform(qubit_count: usize, readout: f64, p_dep: f64, seed: u64) -> Result<Self> {
        let model = NoiseModel {
            readout: vec![ReadoutRates::symmetric(readout); qubit_count],
            p_dep,
            seed,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |p: f64| (0.0..1.0).contains(&p);
        if !in_range(self.p_dep) {
            return Err(Error::InvalidParameter(format!("p_dep {} outside [0, 1)", self.p_dep)));
        }
        for (q, r) in self.readout.iter().enumerate() {
            if !in_range(r.p1_given_0) || !in_range(r.p0_given_1) {
                return Err(Error::InvalidParameter(format!("readout rates of q{q} outside [0, 1)")));
            }
            let p_plus = r.p1_given_0 + r.p0_given_1;
            if p_plus >= 1.0 {
                return Err(Error::InvalidCalibration { qubit: q, p_plus });
            }
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        seeded_rng(self.seed)
    }

    fn rates(&self, qubit: usize) -> ReadoutRates {
        self.readout.get(qubit).copied().unwrap_or_default()
    }
}

/// Histogram of measured bit strings. Bit `i` of each key is the outcome of
/// qubit `measured[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub measured: Vec<usize>,
    pub histogram: BTreeMap<String, u64>,
    pub shots: u64,
}

impl Counts {
    /// Empirical `⟨Z…Z⟩` over the measured qubits.
    pub fn parity_expectation(&self) -> f64 {
        self.histogram
            .iter()
            .map(|(bits, &n)| {
                let ones = bits.bytes().filter(|&b| b == b'1').count();
                if ones % 2 == 0 {
                    n as f64
                } else {
                    -(n as f64)
                }
            })
            .sum::<f64>()
            / self.shots as f64
    }

    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        self.histogram
            .iter()
            .map(|(k, &n)| (k.clone(), n as f64 / self.shots as f64))
            .collect()
    }

    /// `{bitstring: count}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.histogram).expect("string keys serialize")
    }
}

/// Rotation taking the eigenbasis of each label to the Z basis.
fn basis_change(word: &PauliWord) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let one = Complex64::new(1.0, 0.0);
    let hadamard = CMatrix::from_row_slice(2, 2, &[one * h, one * h, one * h, -one * h]);
    let s_dag = CMatrix::from_row_slice(
        2,
        2,
        &[
            one,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
        ],
    );
    let y_change = &hadamard * &s_dag;
    word.0.iter().fold(CMatrix::identity(1, 1), |acc, p| {
        let local = match p {
            Pauli::X => hadamard.clone(),
            Pauli::Y => y_change.clone(),
            Pauli::I | Pauli::Z => CMatrix::identity(2, 2),
        };
        acc.kronecker(&local)
    })
}

/// Outcome distribution over the support of `word`, after the readout flip
/// channel. Index `x` of the result holds the probability of the bit string
/// whose `i`-th bit (most significant first) belongs to `support[i]`.
pub fn outcome_distribution(
    rho: &DensityMatrix,
    word: &PauliWord,
    noise: &NoiseModel,
) -> Result<(Vec<usize>, Vec<f64>)> {
    check_qubits(word.len(), rho.qubit_count())?;
    let n = word.len();
    let support = word.support();
    let u = basis_change(word);
    let rotated = &u * rho.matrix() * u.adjoint();
    let mut probs = vec![0.0; 1 << support.len()];
    for j in 0..rotated.nrows() {
        let key = support.iter().fold(0, |acc, &q| (acc << 1) | ((j >> (n - 1 - q)) & 1));
        probs[key] += rotated[(j, j)].re.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);

    for (i, &q) in support.iter().enumerate() {
        let r = noise.rates(q);
        let bit = 1 << (support.len() - 1 - i);
        for x in (0..probs.len()).filter(|x| x & bit == 0) {
            let (p0, p1) = (probs[x], probs[x | bit]);
            probs[x] = p0 * (1.0 - r.p1_given_0) + p1 * r.p0_given_1;
            probs[x | bit] = p0 * r.p1_given_0 + p1 * (1.0 - r.p0_given_1);
        }
    }
    Ok((support, probs))
}

/// Draws `shots` outcomes as sequential conditional binomials.
fn multinomial<R: rand::Rng + ?Sized>(shots: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass = 1.0;
    let mut out = vec![0; probs.len()];
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let draw = Binomial::new(remaining, q)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        out[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    out
}

/// Samples `word` on a mixed state: basis change, Born sampling over the
/// support, then independent readout flips.
pub fn measure_pauli_density<R: rand::Rng + ?Sized>(
    rho: &DensityMatrix,
    word: &PauliWord,
    shots: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let (measured, probs) = outcome_distribution(rho, word, noise)?;
    let draws = multinomial(shots, &probs, rng);
    let width = measured.len();
    let histogram = draws
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(x, n)| {
            (
                if width == 0 {
                    String::new()
                } else {
                    format!("{:0width$b}", x)
                },
                n,
            )
        })
        .collect();
    Ok(Counts {
        measured,
        histogram,
        shots,
    })
}

pub fn measure_pauli<R: rand::Rng + ?Sized>(
    state: &StateVector,
    word: &PauliWord,
    shots: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Counts> {
    measure_pauli_density(&DensityMatrix::from_state(state), word, shots, noise, rng)
}

fn depolarize(rho: &mut DensityMatrix, a: usize, b: usize, p: f64) {
    let n = rho.qubit_count();
    let mut twirl = CMatrix::zeros(rho.matrix.nrows(), rho.matrix.ncols());
    for pa in Pauli::ALL {
        for pb in Pauli::ALL {
            let mut labels = vec![Pauli::I; n];
            labels[a] = pa;
            labels[b] = pb;
            let w = PauliWord(labels).to_matrix();
            twirl += &w * &rho.matrix * &w;
        }
    }
    rho.matrix = &rho.matrix * Complex64::new(1.0 - p, 0.0) + twirl * Complex64::new(p / 16.0, 0.0);
}

/// Evolves `|0…0⟩⟨0…0|`, depolarizing each CNOT's qubit pair with `p_dep`.
pub fn simulate_density(circuit: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.validate()?;
    let n = circuit.qubit_count();
    let mut rho = DensityMatrix::from_state(&StateVector::zero(n));
    for g in circuit.gates() {
        rho.conjugate(&gate_matrix(g, n));
        if let (Gate::Cnot { control, target }, true) = (g, noise.p_dep > 0.0) {
            depolarize(&mut rho, *control, *target, noise.p_dep);
        }
    }
    Ok(rho)
}

/// Empirical `(p̂(0|1), p̂(1|0))` from preparing `|0⟩` and `|1⟩` on `qubit`.
pub fn calibrate_readout<R: rand::Rng + ?Sized>(
    noise: &NoiseModel,
    qubit: usize,
    shots: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let n = noise.readout.len().max(qubit + 1);
    let mut labels = vec![Pauli::I; n];
    labels[qubit] = Pauli::Z;
    let word = PauliWord(labels);
    let fraction = |prep: &Circuit, outcome: &str, rng: &mut R| -> Result<f64> {
        let counts = measure_pauli(&prepare(prep), &word, shots, noise, rng)?;
        Ok(*counts.histogram.get(outcome).unwrap_or(&0) as f64 / shots as f64)
    };
    let zero = Circuit::new(n);
    let mut one = Circuit::new(n);
    one.ry(qubit, std::f64::consts::PI)?;
    let p1_given_0 = fraction(&zero, "1", rng)?;
    let p0_given_1 = fraction(&one, "0", rng)?;
    Ok((p0_given_1, p1_given_0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: &StateVector, b: &StateVector, tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn single_gate_examples() {
        let mut c = Circuit::new(1);
        c.ry(0, PI).unwrap();
        assert!(close(&prepare(&c), &StateVector::basis(1, 1).unwrap(), 1e-15));

        let mut c = Circuit::new(2);
        c.cx(0, 1).unwrap();
        let out = apply_circuit(&c, &StateVector::basis(2, 0b10).unwrap()).unwrap();
        assert!(close(&out, &StateVector::basis(2, 0b11).unwrap(), 0.0 + 1e-15));
    }

    #[test]
    fn controlled_rotation_idle_when_control_clear() {
        for theta in [0.3, 1.7, -2.2] {
            let mut c = Circuit::new(2);
            c.ry(1, theta / 2.0)
                .unwrap()
                .cx(0, 1)
                .unwrap()
                .ry(1, -theta / 2.0)
                .unwrap()
                .cx(0, 1)
                .unwrap();
            for start in [0b00, 0b01] {
                let s = StateVector::basis(2, start).unwrap();
                assert!(close(&apply_circuit(&c, &s).unwrap(), &s, 1e-14));
            }
        }
    }

    #[test]
    fn out_of_range_gates_rejected() {
        let mut c = Circuit::new(2);
        assert!(matches!(c.ry(2, 0.1), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
        assert!(c.cx(0, 0).is_err());
        assert!(c.ry(0, f64::NAN).is_err());
        assert!(apply_circuit(&c, &StateVector::zero(3)).is_err());
    }

    #[test]
    fn ansatz_examples() {
        assert!(close(&prepare(&ansatz_product(0.0, 0.0)), &StateVector::zero(2), 1e-15));
        assert!(close(
            &prepare(&ansatz_product(PI, 0.0)),
            &StateVector::basis(2, 0b10).unwrap(),
            1e-15
        ));
        let e = ansatz_entangled(PI, 0.0, PI);
        assert_eq!(e.cnot_count(), 2);
        assert!(close(&prepare(&e), &StateVector::basis(2, 0b11).unwrap(), 1e-15));
    }

    #[test]
    fn entangled_matches_four_by_four_product() {
        let (t0, t1, t2) = (0.4, -1.1, 2.3);
        let ry = |t: f64| {
            let (s, c) = (t / 2.0).sin_cos();
            nalgebra::Matrix2::new(c, -s, s, c)
        };
        let i2 = nalgebra::Matrix2::<f64>::identity();
        let cx = nalgebra::Matrix4::new(1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.);
        let u = cx * i2.kronecker(&ry(-t2 / 2.0)) * cx * i2.kronecker(&ry(t2 / 2.0)) * ry(t0).kronecker(&ry(t1));
        let want = u.column(0);
        let got = prepare(&ansatz_entangled(t0, t1, t2));
        for k in 0..4 {
            assert!((got.amplitudes()[k].re - want[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn text_format_roundtrip() {
        let c = ansatz_entangled(FRAC_PI_2, 0.25, -1.0);
        let text = c.to_text();
        assert!(text.contains("ry q0 1.5707963267948966"));
        assert!(text.contains("cx q0 q1"));
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
        let bare = Circuit::from_text("ry q0 1.5708\ncx q0 q1\n").unwrap();
        assert_eq!(bare.qubit_count(), 2);
        assert!(Circuit::from_text("rz q0 1").is_err());
        assert!(Circuit::from_text("# qubits 1\ncx q0 q1").is_err());
    }

    #[test]
    fn exact_expectations() {
        let zi = PauliSum::from_text("1 ZI").unwrap();
        assert!((expectation_exact(&StateVector::zero(2), &zi).unwrap() - 1.0).abs() < 1e-15);
        let h = PauliSum::from_text("0.5 ZI\n0.5 IZ").unwrap();
        assert!((expectation_exact(&StateVector::basis(2, 3).unwrap(), &h).unwrap() + 1.0).abs() < 1e-15);

        let bell = prepare(&ansatz_entangled(FRAC_PI_2, 0.0, PI));
        let a = bell.amplitudes();
        let zz = a[0].norm_sqr() - a[1].norm_sqr() - a[2].norm_sqr() + a[3].norm_sqr();
        let got = expectation_exact(&bell, &PauliSum::from_text("1 ZZ").unwrap()).unwrap();
        assert!((got - zz).abs() < 1e-14);
        assert!((got - 1.0).abs() < 1e-14);
        assert!(expectation_exact(&StateVector::zero(1), &zi).is_err());
    }

    #[test]
    fn noiseless_z_measurement_is_deterministic() {
        let mut rng = seeded_rng(1);
        let counts = measure_pauli(
            &StateVector::zero(1),
            &"Z".parse().unwrap(),
            777,
            &NoiseModel::noiseless(1),
            &mut rng,
        )
        .unwrap();
        assert_eq!(counts.histogram.get("0"), Some(&777));
        assert_eq!(counts.histogram.len(), 1);

        let mut plus = Circuit::new(1);
        plus.ry(0, FRAC_PI_2).unwrap();
        let counts = measure_pauli(
            &prepare(&plus),
            &"X".parse().unwrap(),
            500,
            &NoiseModel::noiseless(1),
            &mut rng,
        )
        .unwrap();
        assert_eq!(counts.parity_expectation(), 1.0);
    }

    #[test]
    fn y_measurement_of_y_eigenstate() {
        let one = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let plus_i = StateVector::from_amplitudes(vec![one, Complex64::new(0.0, one.re)]).unwrap();
        let mut rng = seeded_rng(2);
        let counts = measure_pauli(&plus_i, &"Y".parse().unwrap(), 100, &NoiseModel::noiseless(1), &mut rng).unwrap();
        assert_eq!(counts.parity_expectation(), 1.0);
    }

    #[test]
    fn readout_flips_shift_expectation() {
        let noise = NoiseModel {
            readout: vec![ReadoutRates {
                p1_given_0: 0.1,
                p0_given_1: 0.0,
            }],
            p_dep: 0.0,
            seed: 3,
        };
        let shots = 1_000_000;
        let counts = measure_pauli(
            &StateVector::zero(1),
            &"Z".parse().unwrap(),
            shots,
            &noise,
            &mut noise.rng(),
        )
        .unwrap();
        let se = (1.0 - 0.64f64).sqrt() / (shots as f64).sqrt();
        assert!((counts.parity_expectation() - 0.8).abs() < 4.0 * se);
        assert_eq!(counts.histogram.values().sum::<u64>(), shots);
        assert!(counts.to_json().starts_with("{\"0\":"));
    }

    #[test]
    fn identity_word_is_not_measured() {
        let noise = NoiseModel::uniform(2, 0.2, 0.0, 0).unwrap();
        let counts = measure_pauli(
            &StateVector::zero(2),
            &"II".parse().unwrap(),
            10,
            &noise,
            &mut noise.rng(),
        )
        .unwrap();
        assert!(counts.measured.is_empty());
        assert_eq!(counts.histogram.get(""), Some(&10));
        assert_eq!(counts.parity_expectation(), 1.0);
    }

    #[test]
    fn density_simulation() {
        let c = ansatz_entangled(0.7, -0.3, 1.9);
        let pure = simulate_density(&c, &NoiseModel::noiseless(2)).unwrap();
        let proj = DensityMatrix::from_state(&prepare(&c));
        assert!((pure.matrix() - proj.matrix()).iter().all(|z| z.norm() < 1e-14));

        let noisy_product =
            simulate_density(&ansatz_product(0.7, 1.2), &NoiseModel::uniform(2, 0.0, 0.3, 0).unwrap()).unwrap();
        assert!((noisy_product.purity() - 1.0).abs() < 1e-14);

        let noisy = simulate_density(&c, &NoiseModel::uniform(2, 0.0, 0.05, 0).unwrap()).unwrap();
        // two applications of (1-p)ρ + p I/4 on a pure two-qubit state
        let keep = 0.95f64 * 0.95;
        let want = keep * keep + (1.0 - keep * keep) / 4.0;
        assert!((noisy.purity() - want).abs() < 1e-12);
        assert!(noisy.purity() < 1.0);
    }

    #[test]
    fn calibration_estimates() {
        let noise = NoiseModel {
            readout: vec![ReadoutRates {
                p1_given_0: 0.1,
                p0_given_1: 0.05,
            }],
            p_dep: 0.0,
            seed: 11,
        };
        let shots = 100_000;
        let (p01, p10) = calibrate_readout(&noise, 0, shots, &mut noise.rng()).unwrap();
        let sd = |p: f64| (p * (1.0 - p) / shots as f64).sqrt();
        assert!((p10 - 0.1).abs() < 3.0 * sd(0.1));
        assert!((p01 - 0.05).abs() < 3.0 * sd(0.05));

        let clean = NoiseModel::noiseless(2);
        assert_eq!(
            calibrate_readout(&clean, 1, 1000, &mut clean.rng()).unwrap(),
            (0.0, 0.0)
        );

        let lopsided = NoiseModel {
            readout: vec![ReadoutRates {
                p1_given_0: 0.5,
                p0_given_1: 0.0,
            }],
            p_dep: 0.0,
            seed: 5,
        };
        let (_, p10) = calibrate_readout(&lopsided, 0, 100_000, &mut lopsided.rng()).unwrap();
        assert!((p10 - 0.5).abs() < 3.0 * sd(0.5));
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::uniform(2, 0.5, 0.0, 0).is_err());
        assert!(NoiseModel::uniform(2, 0.1, 1.0, 0).is_err());
        assert!(NoiseModel::uniform(2, -0.1, 0.0, 0).is_err());
        assert!(NoiseModel::uniform(2, 0.49, 0.99, 0).is_ok());
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    proptest! {
        #[test]
        fn gates_preserve_norm_and_reality(angles in proptest::collection::vec(-7.0f64..7.0, 3)) {
            let s = prepare(&ansatz_entangled(angles[0], angles[1], angles[2]));
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!(s.amplitudes().iter().all(|a| a.im.abs() < 1e-12));
        }

        #[test]
        fn zero_entangler_matches_product(t0 in -7.0f64..7.0, t1 in -7.0f64..7.0) {
            let a = prepare(&ansatz_entangled(t0, t1, 0.0));
            let b = prepare(&ansatz_product(t0, t1));
            prop_assert!(close(&a, &b, 1e-12));
        }

        #[test]
        fn depolarizing_keeps_density_physical(angles in proptest::collection::vec(-4.0f64..4.0, 3), p in 0.0f64..0.99) {
            let noise = NoiseModel::uniform(2, 0.0, p, 0).unwrap();
            let rho = simulate_density(&ansatz_entangled(angles[0], angles[1], angles[2]), &noise).unwrap();
            prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
            prop_assert!(crate::fock::hermitian_deviation(rho.matrix()) < 1e-12);
            prop_assert!(rho.eigenvalues()[0] > -1e-12);
        }
    }
}
