use phi4_core::fock::mass_gap;
use phi4_core::lattice::ModelParams;
use phi4_core::vqe::{benchmark_sectors, optimize, sector_minimum, AnsatzKind, BackendSpec, OptimizerSettings};

fn benchmark(lambda: f64) -> ModelParams {
    ModelParams::from_bare_mass(2, 1.0, -1.5, lambda, 4).unwrap()
}

#[test]
fn variational_bound_and_nesting() {
    let settings = OptimizerSettings {
        f_tol: 1e-13,
        max_evals: 3000,
        ..Default::default()
    };
    for lambda in [0.0, 2.0, 8.21, 14.0] {
        let (g, e) = benchmark_sectors(&benchmark(lambda)).unwrap();
        for sector in [&g, &e] {
            let floor = sector_minimum(sector).unwrap();
            let product = optimize(sector, AnsatzKind::Product, &BackendSpec::exact(), 1, &settings).unwrap();
            let entangled = optimize(sector, AnsatzKind::Entangled, &BackendSpec::exact(), 1, &settings).unwrap();
            assert!(product.energy >= floor - 1e-9);
            assert!(entangled.energy >= floor - 1e-9);
            assert!(
                entangled.energy <= product.energy + 1e-9,
                "λ={lambda} {}",
                sector.label()
            );
        }
    }
}

#[test]
fn gap_is_linear_in_coupling() {
    let xs: Vec<f64> = (0..=20).map(|i| 4.0 + 0.5 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&l| mass_gap(&benchmark(l)).unwrap()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    assert!(r2 > 0.99, "R² = {r2}");
}
