use std::collections::BTreeMap;

use phi4_core::circuit::{
    ansatz_entangled, ansatz_product, expectation_exact, measure_pauli, outcome_distribution, prepare, seeded_rng,
    Counts, DensityMatrix, NoiseModel, ReadoutRates,
};
use phi4_core::encoding::{encode_matrix, parity_blocks, Parity, PauliSum, PauliWord};
use phi4_core::fock::{build_hamiltonian, eigensystem};
use phi4_core::lattice::ModelParams;
use phi4_core::mitigation::{
    mcweeny_purify, ro_correct, ro_correct_distribution, QubitCalibration, ReadoutCalibration,
};
use phi4_core::{CMatrix, Complex64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn benchmark_points() -> Vec<ModelParams> {
    [2.0, 4.0, 6.0, 8.21, 10.0, 12.0, 14.0]
        .iter()
        .map(|&l| ModelParams::from_bare_mass(2, 1.0, -1.5, l, 4).unwrap())
        .collect()
}

#[test]
fn even_even_sector_diagonalizes_on_two_qubits() {
    for p in benchmark_points() {
        let sectors = parity_blocks(&build_hamiltonian(&p).unwrap(), &p).unwrap();
        let pp = &sectors[0];
        assert_eq!(pp.parities, vec![Parity::Even, Parity::Even]);
        let pauli = pp.pauli.as_ref().unwrap();
        assert_eq!(pauli.qubit_count, 2);
        let from_pauli = eigensystem(&pauli.to_matrix()).unwrap().values;
        let from_block = eigensystem(&pp.block).unwrap().values;
        for (a, b) in from_pauli.iter().zip(&from_block) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

/// Weight of an eigenvector on each parity sector.
fn sector_weights(v: &[Complex64], n_max: usize) -> BTreeMap<(usize, usize), f64> {
    let mut w = BTreeMap::new();
    for (idx, a) in v.iter().enumerate() {
        let key = ((idx / n_max) % 2, (idx % n_max) % 2);
        *w.entry(key).or_insert(0.0) += a.norm_sqr();
    }
    w
}

#[test]
fn lowest_states_sit_in_expected_sectors() {
    for p in benchmark_points() {
        let h = build_hamiltonian(&p).unwrap();
        let es = eigensystem(&h.matrix).unwrap();
        let ground: Vec<Complex64> = es.vectors.column(0).iter().copied().collect();
        let excited: Vec<Complex64> = es.vectors.column(1).iter().copied().collect();
        assert!(sector_weights(&ground, 4)[&(0, 0)] > 1.0 - 1e-10, "λ={}", p.lambda);
        assert!(sector_weights(&excited, 4)[&(1, 0)] > 1.0 - 1e-10, "λ={}", p.lambda);
    }
}

#[test]
fn sampled_expectations_converge() {
    let state = prepare(&ansatz_entangled(0.8, -1.3, 2.1));
    let mut rng = seeded_rng(123);
    let shots = 1_000_000u64;
    for w in PauliWord::all(2).filter(|w| !w.is_identity()) {
        let exact = expectation_exact(
            &state,
            &PauliSum::new(2, vec![(Complex64::new(1.0, 0.0), w.clone())]).unwrap(),
        )
        .unwrap();
        let got = measure_pauli(&state, &w, shots, &NoiseModel::noiseless(2), &mut rng)
            .unwrap()
            .parity_expectation();
        let se = ((1.0 - exact * exact).max(0.0) / shots as f64).sqrt();
        assert!((got - exact).abs() <= 4.0 * se + 1e-12, "{w}: {got} vs {exact}");
    }
}

#[test]
fn zero_rate_correction_is_identity_on_random_counts() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let histogram: BTreeMap<String, u64> = ["00", "01", "10", "11"]
            .iter()
            .map(|k| (k.to_string(), rng.random_range(0..1000)))
            .collect();
        let shots = histogram.values().sum::<u64>().max(1);
        let counts = Counts {
            measured: vec![0, 1],
            histogram,
            shots,
        };
        let got = ro_correct(&counts, &[0, 1], &ReadoutCalibration::ideal(2)).unwrap();
        assert!((got - counts.parity_expectation()).abs() < 1e-12);
    }
}

fn purification_input(eps: f64) -> (DensityMatrix, phi4_core::circuit::StateVector) {
    let psi = prepare(&ansatz_entangled(1.1, 0.4, -2.0));
    let pure = DensityMatrix::from_state(&psi);
    let mixed = pure.matrix() * Complex64::new(1.0 - eps, 0.0)
        + DensityMatrix::maximally_mixed(2).matrix() * Complex64::new(eps, 0.0);
    (DensityMatrix::from_matrix(mixed).unwrap(), psi)
}

fn skewed_input() -> DensityMatrix {
    let a = prepare(&ansatz_product(0.3, 0.9));
    let b = prepare(&ansatz_product(0.3 + std::f64::consts::PI, 0.9));
    let c = prepare(&ansatz_product(0.3, 0.9 + std::f64::consts::PI));
    let weight =
        |s: &phi4_core::circuit::StateVector, w: f64| DensityMatrix::from_state(s).matrix() * Complex64::new(w, 0.0);
    DensityMatrix::from_matrix(weight(&a, 0.8) + weight(&b, 0.15) + weight(&c, 0.05)).unwrap()
}

#[test]
fn purification_preserves_eigenvectors_and_shrinks_non_idempotency() {
    for rho in [purification_input(0.3).0, skewed_input()] {
        let dominant = |m: &CMatrix| {
            let es = eigensystem(m).unwrap();
            es.vectors.column(es.values.len() - 1).into_owned()
        };
        let v0 = dominant(rho.matrix());
        let mut last_n = f64::INFINITY;
        for k in 1..8 {
            let (iterate, report) = mcweeny_purify(&rho, 0.0, k).unwrap();
            let overlap = (v0.adjoint() * dominant(iterate.matrix()))[(0, 0)].norm();
            assert!(overlap > 1.0 - 1e-8, "iteration {k}: {overlap}");
            assert!(report.non_idempotency.abs() <= last_n + 1e-15);
            last_n = report.non_idempotency.abs();
        }
    }
}

fn product_distribution(z_values: &[f64]) -> Vec<(String, f64)> {
    let n = z_values.len();
    (0..1usize << n)
        .map(|x| {
            let bits = format!("{:0n$b}", x);
            let p = bits
                .bytes()
                .zip(z_values)
                .map(|(b, z)| if b == b'0' { (1.0 + z) / 2.0 } else { (1.0 - z) / 2.0 })
                .product();
            (bits, p)
        })
        .collect()
}

/// Applies independent flip channels analytically.
fn flip_channel(dist: &[(String, f64)], rates: &[(f64, f64)]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = dist.iter().map(|(b, _)| (b.clone(), 0.0)).collect();
    for (bits, p) in dist {
        for (obits, slot) in out.iter_mut() {
            let mut t = *p;
            for (i, &(p1_given_0, p0_given_1)) in rates.iter().enumerate() {
                let (src, dst) = (bits.as_bytes()[i], obits.as_bytes()[i]);
                t *= match (src, dst) {
                    (b'0', b'0') => 1.0 - p1_given_0,
                    (b'0', _) => p1_given_0,
                    (_, b'0') => p0_given_1,
                    _ => 1.0 - p0_given_1,
                };
            }
            *slot += t;
        }
    }
    out
}

proptest! {
    #[test]
    fn analytic_channel_inversion(
        z in proptest::collection::vec(-1.0f64..1.0, 1..=3),
        rates in proptest::collection::vec((0.0f64..0.25, 0.0f64..0.25), 3),
    ) {
        let n = z.len();
        let rates = &rates[..n];
        let noisy = flip_channel(&product_distribution(&z), rates);
        let cal = ReadoutCalibration::new(
            rates.iter().map(|&(p1_given_0, p0_given_1)| QubitCalibration { p0_given_1, p1_given_0 }).collect(),
        ).unwrap();
        let measured: Vec<usize> = (0..n).collect();
        let got = ro_correct_distribution(noisy.iter().map(|(b, p)| (b.as_str(), *p)), &measured, &measured, &cal).unwrap();
        let want: f64 = z.iter().product();
        prop_assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn sampler_distribution_matches_flip_channel(
        angles in proptest::collection::vec(-3.0f64..3.0, 2),
        r in (0.0f64..0.3, 0.0f64..0.3),
    ) {
        let state = prepare(&ansatz_product(angles[0], angles[1]));
        let rho = DensityMatrix::from_state(&state);
        let noise = NoiseModel { readout: vec![ReadoutRates { p1_given_0: r.0, p0_given_1: r.1 }; 2], p_dep: 0.0, seed: 0 };
        let (_, probs) = outcome_distribution(&rho, &"ZZ".parse().unwrap(), &noise).unwrap();
        let z: Vec<f64> = angles.iter().map(|t| t.cos()).collect();
        let want = flip_channel(&product_distribution(&z), &[r, r]);
        for (p, (_, w)) in probs.iter().zip(&want) {
            prop_assert!((p - w).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_roundtrip_random_hermitian(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = 1 << n;
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let re = rng.random_range(-2.0..2.0);
                let im = if i == j { 0.0 } else { rng.random_range(-2.0..2.0) };
                m[(i, j)] = Complex64::new(re, im);
                m[(j, i)] = Complex64::new(re, -im);
            }
        }
        let sum = encode_matrix(&m).unwrap();
        prop_assert!(sum.max_imaginary() < 1e-12);
        prop_assert!((sum.to_matrix() - m).iter().all(|z| z.norm() < 1e-12));
    }
}
