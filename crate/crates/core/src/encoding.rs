//! Pauli-sum encoding of dense operators and the mode-parity block
//! decomposition of the lattice Hamiltonian.
//!
//! Qubit 0 is the leftmost label of a word and the most significant bit of a
//! computational-basis index. Occupation `|i⟩` of a mode maps to the big-endian
//! binary string of `i`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{compose_index, decompose_index, LatticeOperator};
use crate::lattice::ModelParams;
use crate::{CMatrix, Error, Result};

/// Coefficients with modulus below this are dropped.
pub const COEFF_TOL: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Phase picked up by `|bit⟩`, i.e. `P|b⟩ = phase · |b ⊕ flip⟩`.
    fn phase(self, bit: bool) -> Complex64 {
        match (self, bit) {
            (Pauli::I, _) | (Pauli::X, _) | (Pauli::Z, false) => Complex64::new(1.0, 0.0),
            (Pauli::Z, true) => Complex64::new(-1.0, 0.0),
            (Pauli::Y, false) => Complex64::new(0.0, 1.0),
            (Pauli::Y, true) => Complex64::new(0.0, -1.0),
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliWord(pub Vec<Pauli>);

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        PauliWord(vec![Pauli::I; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Qubits with a non-identity label.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// Every word on `n` qubits, in lexicographic `I < X < Y < Z` order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliWord> {
        (0..4usize.pow(n as u32)).map(move |mut code| {
            let mut labels = vec![Pauli::I; n];
            for slot in labels.iter_mut().rev() {
                *slot = Pauli::ALL[code % 4];
                code /= 4;
            }
            PauliWord(labels)
        })
    }

    fn flip_mask(&self) -> usize {
        let n = self.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// `w|j⟩ = phase(j) |j ⊕ mask⟩`.
    fn column_phase(&self, j: usize) -> Complex64 {
        let n = self.len();
        self.0.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (q, p)| {
            acc * p.phase((j >> (n - 1 - q)) & 1 == 1)
        })
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.len();
        let mask = self.flip_mask();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            m[(j ^ mask, j)] = self.column_phase(j);
        }
        m
    }

    /// `w` applied to a state vector.
    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        let mask = self.flip_mask();
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        for (j, amp) in state.iter().enumerate() {
            out[j ^ mask] = self.column_phase(j) * amp;
        }
        out
    }

    /// `Tr(w M)` in `O(2^n)`.
    fn trace_with(&self, m: &CMatrix) -> Complex64 {
        let mask = self.flip_mask();
        (0..m.nrows()).map(|j| self.column_phase(j) * m[(j, j ^ mask)]).sum()
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("unknown Pauli label '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliWord)
    }
}

/// Weighted sum of Pauli words on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub qubit_count: usize,
    pub terms: Vec<(Complex64, PauliWord)>,
}

impl PauliSum {
    /// Merges duplicate words, drops coefficients below [`COEFF_TOL`] and sorts
    /// terms by word.
    pub fn new(qubit_count: usize, terms: impl IntoIterator<Item = (Complex64, PauliWord)>) -> Result<Self> {
        let mut merged: std::collections::BTreeMap<PauliWord, Complex64> = Default::default();
        for (c, w) in terms {
            if w.len() != qubit_count {
                return Err(Error::DimensionMismatch {
                    expected: qubit_count,
                    found: w.len(),
                });
            }
            *merged.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(PauliSum {
            qubit_count,
            terms: merged
                .into_iter()
                .filter(|(_, c)| c.norm() >= COEFF_TOL)
                .map(|(w, c)| (c, w))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &PauliWord) -> Complex64 {
        self.terms
            .iter()
            .find(|(_, w)| w == word)
            .map(|(c, _)| *c)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn max_imaginary(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.qubit_count;
        let mut m = CMatrix::zeros(dim, dim);
        for (c, w) in &self.terms {
            let mask = w.flip_mask();
            for j in 0..dim {
                m[(j ^ mask, j)] += c * w.column_phase(j);
            }
        }
        m
    }

    /// The same operator tensored with identities on extra trailing qubits.
    pub fn padded(&self, qubit_count: usize) -> Result<PauliSum> {
        if qubit_count < self.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count,
                found: qubit_count,
            });
        }
        let extra = qubit_count - self.qubit_count;
        Ok(PauliSum {
            qubit_count,
            terms: self
                .terms
                .iter()
                .map(|(c, w)| {
                    let mut labels = w.0.clone();
                    labels.extend(std::iter::repeat_n(Pauli::I, extra));
                    (*c, PauliWord(labels))
                })
                .collect(),
        })
    }

    /// One `coefficient label` line per term, e.g. `0.5 ZI`. Complex
    /// coefficients are written as `re+imi`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, w) in &self.terms {
            let label = if w.is_empty() { "-".to_string() } else { w.to_string() };
            if c.im == 0.0 {
                out.push_str(&format!("{} {}\n", c.re, label));
            } else {
                let sign = if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
                    '-'
                } else {
                    '+'
                };
                out.push_str(&format!("{}{}{}i {}\n", c.re, sign, c.im.abs(), label));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut terms = Vec::new();
        let mut qubits = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(coeff), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!(
                    "line {}: expected 'coefficient label'",
                    lineno + 1
                )));
            };
            let word: PauliWord = if label == "-" {
                PauliWord(vec![])
            } else {
                label.parse()?
            };
            let c = parse_coefficient(coeff).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            match qubits {
                None => qubits = Some(word.len()),
                Some(n) if n != word.len() => {
                    return Err(Error::Parse(format!(
                        "line {}: word length {} differs from {n}",
                        lineno + 1,
                        word.len()
                    )))
                }
                _ => {}
            }
            terms.push((c, word));
        }
        PauliSum::new(qubits.unwrap_or(0), terms)
    }
}

fn parse_coefficient(s: &str) -> std::result::Result<Complex64, String> {
    if let Some(body) = s.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last()
            .ok_or_else(|| format!("malformed complex coefficient '{s}'"))?;
        let re: f64 = body[..split].parse().map_err(|e| format!("{e} in '{s}'"))?;
        let im: f64 = body[split..].parse().map_err(|e| format!("{e} in '{s}'"))?;
        Ok(Complex64::new(re, im))
    } else {
        s.parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|e| format!("{e} in '{s}'"))
    }
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Pauli decomposition `M = Σ_w c_w w` with `c_w = Tr(w M) / 2^n`.
pub fn encode_matrix(m: &CMatrix) -> Result<PauliSum> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let nq = log2_exact(m.nrows())?;
    let norm = 1.0 / m.nrows() as f64;
    PauliSum::new(nq, PauliWord::all(nq).map(|w| (w.trace_with(m) * norm, w)))
}

/// Bit strings of the occupations `0..n_max`, big-endian.
pub fn binary_index_map(n_max: usize) -> Result<Vec<String>> {
    let bits = log2_exact(n_max)?;
    Ok((0..n_max).map(|i| format!("{:0width$b}", i, width = bits)).collect())
}

/// Qubits needed for `L` modes: `L log₂ n_max`, or `L log₂(n_max/2)` inside a
/// parity sector.
pub fn qubit_count(l: usize, n_max: usize, parity_blocked: bool) -> Result<usize> {
    let levels = if parity_blocked {
        if !n_max.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "parity blocking needs even n_max, got {n_max}"
            )));
        }
        n_max / 2
    } else {
        n_max
    };
    Ok(l * log2_exact(levels)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "+",
            Parity::Odd => "-",
        })
    }
}

/// One mode-parity block of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub parities: Vec<Parity>,
    pub block: CMatrix,
    /// `None` when the block dimension is not a power of two.
    pub pauli: Option<PauliSum>,
    /// Retained occupation tuples, in block order.
    pub basis_map: Vec<Vec<usize>>,
}

impl SectorHamiltonian {
    /// Label such as `{+,-}`.
    pub fn label(&self) -> String {
        let inner: Vec<String> = self.parities.iter().map(|p| p.to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }

    pub fn dim(&self) -> usize {
        self.block.nrows()
    }
}

/// Splits `H` into the `2^L` blocks of fixed per-mode occupation parity.
pub fn parity_blocks(h: &LatticeOperator, params: &ModelParams) -> Result<Vec<SectorHamiltonian>> {
    let n_max = params.n_max;
    if !n_max.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "parity blocking needs even n_max, got {n_max}"
        )));
    }
    let dims = vec![n_max; params.l];
    if h.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: h.dim(),
        });
    }
    let parity_of = |idx: usize| -> Vec<Parity> { decompose_index(idx, &dims).into_iter().map(Parity::of).collect() };
    let labels: Vec<Vec<Parity>> = (0..h.dim()).map(parity_of).collect();
    let mut deviation = 0.0f64;
    for i in 0..h.dim() {
        for j in 0..h.dim() {
            if labels[i] != labels[j] {
                deviation = deviation.max(h.matrix[(i, j)].norm());
            }
        }
    }
    if deviation > SYMMETRY_TOL {
        return Err(Error::SymmetryViolation { deviation });
    }

    let half = n_max / 2;
    let sub_dims = vec![half; params.l];
    let block_dim = half.pow(params.l as u32);
    (0..1usize << params.l)
        .map(|code| {
            let parities: Vec<Parity> = (0..params.l)
                .map(|k| {
                    if (code >> (params.l - 1 - k)) & 1 == 0 {
                        Parity::Even
                    } else {
                        Parity::Odd
                    }
                })
                .collect();
            let basis_map: Vec<Vec<usize>> = (0..block_dim)
                .map(|r| {
                    decompose_index(r, &sub_dims)
                        .iter()
                        .zip(&parities)
                        .map(|(&s, p)| 2 * s + p.offset())
                        .collect()
                })
                .collect();
            let full: Vec<usize> = basis_map.iter().map(|occ| compose_index(occ, &dims)).collect();
            let block = CMatrix::from_fn(block_dim, block_dim, |i, j| h.matrix[(full[i], full[j])]);
            let pauli = if block_dim.is_power_of_two() {
                Some(encode_matrix(&block)?)
            } else {
                None
            };
            Ok(SectorHamiltonian {
                parities,
                block,
                pauli,
                basis_map,
            })
        })
        .collect()
}

/// The sector with the given per-mode parities.
pub fn find_sector<'a>(sectors: &'a [SectorHamiltonian], parities: &[Parity]) -> Option<&'a SectorHamiltonian> {
    sectors.iter().find(|s| s.parities == parities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_hamiltonian, exact_spectrum};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(entries: [Complex64; 4]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &entries)
    }

    #[test]
    fn projector_table() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let ket0bra0 = encode_matrix(&single([one, z, z, z])).unwrap();
        assert_eq!(ket0bra0.coefficient(&"I".parse().unwrap()), c(0.5, 0.0));
        assert_eq!(ket0bra0.coefficient(&"Z".parse().unwrap()), c(0.5, 0.0));
        assert_eq!(ket0bra0.len(), 2);

        let ket1bra0 = encode_matrix(&single([z, z, one, z])).unwrap();
        assert_eq!(ket1bra0.coefficient(&"X".parse().unwrap()), c(0.5, 0.0));
        assert_eq!(ket1bra0.coefficient(&"Y".parse().unwrap()), c(0.0, -0.5));
        assert_eq!(ket1bra0.len(), 2);

        let ket0bra1 = encode_matrix(&single([z, one, z, z])).unwrap();
        assert_eq!(ket0bra1.coefficient(&"Y".parse().unwrap()), c(0.0, 0.5));

        let number = encode_matrix(&single([z, z, z, one])).unwrap();
        assert_eq!(number.coefficient(&"I".parse().unwrap()), c(0.5, 0.0));
        assert_eq!(number.coefficient(&"Z".parse().unwrap()), c(-0.5, 0.0));
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            encode_matrix(&CMatrix::identity(3, 3)),
            Err(Error::NotPowerOfTwo(3))
        ));
        assert!(binary_index_map(6).is_err());
    }

    #[test]
    fn binary_map_examples() {
        assert_eq!(binary_index_map(4).unwrap(), vec!["00", "01", "10", "11"]);
        assert_eq!(binary_index_map(2).unwrap()[1], "1");
        assert_eq!(binary_index_map(8).unwrap()[5], "101");
    }

    #[test]
    fn qubit_count_examples() {
        assert_eq!(qubit_count(2, 4, false).unwrap(), 4);
        assert_eq!(qubit_count(2, 4, true).unwrap(), 2);
        assert_eq!(qubit_count(1, 2, false).unwrap(), 1);
        assert_eq!(qubit_count(2, 16, true).unwrap(), 6);
        assert!(qubit_count(2, 6, false).is_err());
    }

    #[test]
    fn word_matrix_convention() {
        // ZI acts on the most significant bit
        let zi: PauliWord = "ZI".parse().unwrap();
        let diag: Vec<f64> = zi.to_matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let sum = PauliSum::new(
            2,
            vec![
                (c(0.5, 0.0), "ZI".parse().unwrap()),
                (c(-0.25, 1e-3), "XY".parse().unwrap()),
                (c(1.0 / 3.0, -2.0), "II".parse().unwrap()),
            ],
        )
        .unwrap();
        let text = sum.to_text();
        assert!(text.contains("0.5 ZI"));
        assert_eq!(PauliSum::from_text(&text).unwrap(), sum);
        assert!(PauliSum::from_text("0.5 ZQ").is_err());
        assert!(PauliSum::from_text("0.5 ZI\n0.1 Z").is_err());
        assert!(PauliSum::from_text("abc ZI").is_err());
    }

    #[test]
    fn two_site_sectors() {
        let p = ModelParams::from_bare_mass(2, 1.0, -1.5, 6.0, 4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let sectors = parity_blocks(&h, &p).unwrap();
        assert_eq!(sectors.len(), 4);
        assert!(sectors.iter().all(|s| s.dim() == 4));
        assert_eq!(sectors[1].label(), "{+,-}");
        assert_eq!(
            sectors[2].basis_map,
            vec![vec![1, 0], vec![1, 2], vec![3, 0], vec![3, 2]]
        );

        let mut union: Vec<f64> = sectors
            .iter()
            .flat_map(|s| crate::fock::eigensystem(&s.block).unwrap().values)
            .collect();
        union.sort_by(f64::total_cmp);
        let full = exact_spectrum(&h).unwrap().eigenvalues;
        for (a, b) in union.iter().zip(&full) {
            assert!((a - b).abs() < 1e-10);
        }

        let trace: Complex64 = sectors.iter().map(|s| s.block.trace()).sum();
        assert!((trace - h.matrix.trace()).norm() < 1e-10);

        for s in &sectors {
            let pauli = s.pauli.as_ref().unwrap();
            assert_eq!(pauli.qubit_count, 2);
            assert!(pauli.max_imaginary() < 1e-12);
            assert!((pauli.to_matrix() - &s.block).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn parity_violation_detected_on_three_sites() {
        let p = ModelParams::from_bare_mass(3, 1.0, 0.5, 2.0, 2).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert!(matches!(parity_blocks(&h, &p), Err(Error::SymmetryViolation { .. })));
        let odd = ModelParams::free(2, 1.0, 3).unwrap();
        assert!(parity_blocks(&build_hamiltonian(&odd).unwrap(), &odd).is_err());
    }

    #[test]
    fn non_power_of_two_sector_has_no_pauli_form() {
        let p = ModelParams::from_bare_mass(2, 1.0, 0.5, 3.0, 6).unwrap();
        let sectors = parity_blocks(&build_hamiltonian(&p).unwrap(), &p).unwrap();
        assert!(sectors.iter().all(|s| s.pauli.is_none() && s.dim() == 9));
    }

    #[test]
    fn padding_adds_identity() {
        let sum = PauliSum::new(1, vec![(c(2.0, 0.0), "Z".parse().unwrap())]).unwrap();
        let padded = sum.padded(2).unwrap();
        let expected = sum.to_matrix().kronecker(&CMatrix::identity(2, 2));
        assert!((padded.to_matrix() - expected).iter().all(|z| z.norm() < 1e-15));
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> CMatrix {
        let dim = 1 << n;
        let mut m = CMatrix::zeros(dim, dim);
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                let re = seed[k % seed.len()] * (1.0 + i as f64) - 0.3 * j as f64;
                let im = if i == j {
                    0.0
                } else {
                    seed[(k + 1) % seed.len()] - 0.1 * i as f64
                };
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
                k += 2;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn hermitian_roundtrip(n in 1usize..=4, seed in proptest::collection::vec(-3.0f64..3.0, 7..40)) {
            let m = random_hermitian(n, &seed);
            let sum = encode_matrix(&m).unwrap();
            prop_assert!(sum.max_imaginary() < 1e-12);
            let back = sum.to_matrix();
            prop_assert!((back - &m).iter().all(|z| z.norm() < 1e-12));
            prop_assert_eq!(PauliSum::from_text(&sum.to_text()).unwrap(), sum);
        }
    }
}
