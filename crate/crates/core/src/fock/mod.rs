//! Truncated Fock-space operators for the momentum modes of the lattice and
//! the dense Hamiltonian built from them.
//!
//! Ladder operators are truncated first; every product (`q²`, `φ⁴`, ...) is then
//! formed by multiplying truncated matrices. The product basis orders modes as
//! the momentum grid does, with the first momentum as the slowest index.

mod critical;
mod spectrum;

pub use critical::{
    bisect, critical_curve, critical_exponent_fit, gap_scan, physical_counterterm, select_precritical_window,
    slope_series, solve_counterterm, CriticalFit, CriticalPoint, DeltaBracket,
};
pub use spectrum::{eigensystem, exact_spectrum, mass_gap, Eigensystem, Spectrum, DEGENERACY_TOL};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::lattice::{momentum_grid, ModelParams};
use crate::{CMatrix, Error, Result};

/// Dense operator on a single truncated oscillator mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatrix(pub CMatrix);

impl ModeMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn identity(n_max: usize) -> Self {
        ModeMatrix(CMatrix::identity(n_max, n_max))
    }

    pub fn adjoint(&self) -> Self {
        ModeMatrix(self.0.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

impl std::ops::Mul for &ModeMatrix {
    type Output = ModeMatrix;
    fn mul(self, rhs: &ModeMatrix) -> ModeMatrix {
        ModeMatrix(&self.0 * &rhs.0)
    }
}

/// Dense operator on the `L`-mode tensor product space.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    pub mode_dims: Vec<usize>,
    pub matrix: CMatrix,
}

impl LatticeOperator {
    pub fn zeros(mode_dims: Vec<usize>) -> Self {
        let n = mode_dims.iter().product();
        LatticeOperator {
            mode_dims,
            matrix: CMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest entry of `M - M†`.
    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    /// Occupation numbers of basis state `index`, first mode first.
    pub fn occupations(&self, index: usize) -> Vec<usize> {
        decompose_index(index, &self.mode_dims)
    }
}

impl std::ops::Add for &LatticeOperator {
    type Output = LatticeOperator;
    fn add(self, rhs: &LatticeOperator) -> LatticeOperator {
        LatticeOperator {
            mode_dims: self.mode_dims.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl std::ops::Mul for &LatticeOperator {
    type Output = LatticeOperator;
    fn mul(self, rhs: &LatticeOperator) -> LatticeOperator {
        LatticeOperator {
            mode_dims: self.mode_dims.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn decompose_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut occ = vec![0; dims.len()];
    for (slot, &d) in occ.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    occ
}

pub(crate) fn compose_index(occ: &[usize], dims: &[usize]) -> usize {
    occ.iter().zip(dims).fold(0, |acc, (&n, &d)| acc * d + n)
}

fn check_cutoff(n_max: usize) -> Result<()> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fock cutoff must be at least 2, got {n_max}"
        )));
    }
    Ok(())
}

/// Truncated annihilation and creation operators `(a, a†)`.
pub fn ladder_ops(n_max: usize) -> Result<(ModeMatrix, ModeMatrix)> {
    check_cutoff(n_max)?;
    let a = DMatrix::from_fn(n_max, n_max, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a = ModeMatrix(a);
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Number operator `a†a` (exactly diagonal).
pub fn number_op(n_max: usize) -> Result<ModeMatrix> {
    check_cutoff(n_max)?;
    Ok(ModeMatrix(DMatrix::from_fn(n_max, n_max, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })))
}

/// Field quadrature `q = (a + a†)/√2`.
pub fn quadrature(n_max: usize) -> Result<ModeMatrix> {
    let (a, a_dag) = ladder_ops(n_max)?;
    Ok(ModeMatrix((a.0 + a_dag.0).scale(std::f64::consts::FRAC_1_SQRT_2)))
}

/// Mode parity `(-1)^n`.
pub fn parity_op(n_max: usize) -> Result<ModeMatrix> {
    check_cutoff(n_max)?;
    Ok(ModeMatrix(DMatrix::from_fn(n_max, n_max, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    })))
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on mode `mode_index`.
pub fn embed(mode_op: &ModeMatrix, mode_index: usize, params: &ModelParams) -> Result<LatticeOperator> {
    if mode_index >= params.l {
        return Err(Error::IndexOutOfRange {
            index: mode_index,
            len: params.l,
        });
    }
    if mode_op.dim() != params.n_max {
        return Err(Error::DimensionMismatch {
            expected: params.n_max,
            found: mode_op.dim(),
        });
    }
    Ok(embed_unchecked(&mode_op.0, mode_index, params.l))
}

fn embed_unchecked(op: &CMatrix, mode_index: usize, l: usize) -> LatticeOperator {
    let n = op.nrows();
    let before = n.pow(mode_index as u32);
    let after = n.pow((l - mode_index - 1) as u32);
    let left = CMatrix::identity(before, before).kronecker(op);
    let matrix = left.kronecker(&CMatrix::identity(after, after));
    LatticeOperator {
        mode_dims: vec![n; l],
        matrix,
    }
}

/// Free Hamiltonian `Σ_k ω(k) a†(k)a(k)` without zero-point energy.
pub fn build_h0(params: &ModelParams) -> Result<LatticeOperator> {
    params.validate_structure()?;
    let grid = momentum_grid(params)?;
    let dims = vec![params.n_max; params.l];
    let n = params.dim();
    let diag = (0..n).map(|idx| {
        let occ = decompose_index(idx, &dims);
        let e: f64 = occ.iter().zip(&grid.frequencies).map(|(&o, w)| o as f64 * w).sum();
        Complex64::new(e, 0.0)
    });
    let matrix = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, diag));
    Ok(LatticeOperator {
        mode_dims: dims,
        matrix,
    })
}

/// Embedded ladder operators for every mode plus the grid frequencies.
struct ModeLadders {
    momenta: Vec<f64>,
    frequencies: Vec<f64>,
    a: Vec<CMatrix>,
    a_dag: Vec<CMatrix>,
}

impl ModeLadders {
    fn new(params: &ModelParams) -> Result<Self> {
        params.validate_structure()?;
        let grid = momentum_grid(params)?;
        let (a, a_dag) = ladder_ops(params.n_max)?;
        let a_emb = (0..params.l)
            .map(|k| embed_unchecked(&a.0, k, params.l).matrix)
            .collect();
        let a_dag_emb = (0..params.l)
            .map(|k| embed_unchecked(&a_dag.0, k, params.l).matrix)
            .collect();
        Ok(ModeLadders {
            momenta: grid.momenta,
            frequencies: grid.frequencies,
            a: a_emb,
            a_dag: a_dag_emb,
        })
    }

    fn field(&self, x: usize, l: usize) -> (CMatrix, CMatrix) {
        let n = self.a[0].nrows();
        let mut phi = CMatrix::zeros(n, n);
        let mut pi = CMatrix::zeros(n, n);
        let norm = 1.0 / (l as f64).sqrt();
        for j in 0..l {
            let phase = plane_wave(j, x, l);
            let w = self.frequencies[j];
            let term_dag = &self.a_dag[j] * phase.conj();
            let term = &self.a[j] * phase;
            phi += (&term_dag + &term) * Complex64::new(norm / (2.0 * w).sqrt(), 0.0);
            pi += (&term_dag - &term) * Complex64::new(0.0, norm * (0.5 * w).sqrt());
        }
        debug_assert_eq!(self.momenta.len(), l);
        (phi, pi)
    }
}

/// `e^{ikx}` for `k = 2πj/L`, with the exponent reduced mod `L` so that
/// `k = π` and `k = π/2` phases come out exact.
fn plane_wave(j: usize, x: usize, l: usize) -> Complex64 {
    let r = (j * x) % l;
    if (4 * r).is_multiple_of(l) {
        match 4 * r / l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * r as f64 / l as f64)
    }
}

/// Field and conjugate momentum `(φ(x), π(x))` at site `x`.
pub fn build_field(x: usize, params: &ModelParams) -> Result<(LatticeOperator, LatticeOperator)> {
    if x >= params.l {
        return Err(Error::IndexOutOfRange {
            index: x,
            len: params.l,
        });
    }
    let ladders = ModeLadders::new(params)?;
    let (phi, pi) = ladders.field(x, params.l);
    let dims = vec![params.n_max; params.l];
    Ok((
        LatticeOperator {
            mode_dims: dims.clone(),
            matrix: phi,
        },
        LatticeOperator {
            mode_dims: dims,
            matrix: pi,
        },
    ))
}

/// The coupling-independent pieces of `H`: `H₀`, `Σ_x φ²(x)` and `Σ_x φ⁴(x)`.
///
/// They depend on `(L, m², n_max)` only, so sweeps over `λ` or `δ_m` at fixed
/// reference mass assemble `H` without rebuilding any matrix products.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub params: ModelParams,
    pub h0: LatticeOperator,
    pub phi2_sum: CMatrix,
    pub phi4_sum: CMatrix,
}

impl HamiltonianTerms {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let h0 = build_h0(params)?;
        let ladders = ModeLadders::new(params)?;
        let n = params.dim();
        let mut phi2_sum = CMatrix::zeros(n, n);
        let mut phi4_sum = CMatrix::zeros(n, n);
        for x in 0..params.l {
            let (phi, _) = ladders.field(x, params.l);
            let phi2 = &phi * &phi;
            phi4_sum += &phi2 * &phi2;
            phi2_sum += phi2;
        }
        Ok(HamiltonianTerms {
            params: *params,
            h0,
            phi2_sum,
            phi4_sum,
        })
    }

    /// `Σ_x [ (δ_m/2) φ² + (λ/4!) φ⁴ ]`.
    pub fn interaction(&self, lambda: f64, delta_m: f64) -> LatticeOperator {
        let matrix =
            &self.phi2_sum * Complex64::new(0.5 * delta_m, 0.0) + &self.phi4_sum * Complex64::new(lambda / 24.0, 0.0);
        LatticeOperator {
            mode_dims: self.h0.mode_dims.clone(),
            matrix,
        }
    }

    /// Full `H = H₀ + H_I` at the given coupling and counter term.
    pub fn hamiltonian(&self, lambda: f64, delta_m: f64) -> LatticeOperator {
        let hi = self.interaction(lambda, delta_m);
        &self.h0 + &hi
    }
}

/// Interaction Hamiltonian `Σ_x [ (δ_m/2) φ²(x) + (λ/4!) φ⁴(x) ]`.
pub fn build_hi(params: &ModelParams) -> Result<LatticeOperator> {
    Ok(HamiltonianTerms::new(params)?.interaction(params.lambda, params.delta_m))
}

/// Full Hamiltonian `H₀ + H_I`.
pub fn build_hamiltonian(params: &ModelParams) -> Result<LatticeOperator> {
    Ok(HamiltonianTerms::new(params)?.hamiltonian(params.lambda, params.delta_m))
}

impl ModelParams {
    /// The subset of [`ModelParams::validate`] that operator construction needs:
    /// coupling and counter term may take any value here (finite differences
    /// around `λ = 0` evaluate at negative coupling).
    pub(crate) fn validate_structure(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::InvalidParameter("lattice size L must be positive".into()));
        }
        if !(self.m_sq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference mass squared must be positive, got {}",
                self.m_sq
            )));
        }
        check_cutoff(self.n_max)
    }
}
