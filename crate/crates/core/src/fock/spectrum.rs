use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{build_hamiltonian, hermitian_deviation, LatticeOperator};
use crate::lattice::ModelParams;
use crate::{CMatrix, Error, Result};

/// Gaps below this are reported as exactly zero and flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-10;

/// Ascending eigenvalues of a Hamiltonian and its gap `E₁ - E₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
    pub degenerate: bool,
}

impl Spectrum {
    fn from_sorted(eigenvalues: Vec<f64>) -> Self {
        let raw = if eigenvalues.len() > 1 {
            eigenvalues[1] - eigenvalues[0]
        } else {
            0.0
        };
        let degenerate = raw < DEGENERACY_TOL;
        Spectrum {
            eigenvalues,
            gap: if degenerate { 0.0 } else { raw },
            degenerate,
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Eigenvalues with their eigenvectors (columns), ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn eigensystem(h: &CMatrix) -> Result<Eigensystem> {
    let deviation = hermitian_deviation(h);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let columns: Vec<DVector<_>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    Ok(Eigensystem {
        values,
        vectors: CMatrix::from_columns(&columns),
    })
}

pub fn exact_spectrum(h: &LatticeOperator) -> Result<Spectrum> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let mut values: Vec<f64> = h.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(Spectrum::from_sorted(values))
}

/// `E₁ - E₀` of `H₀ + H_I`.
pub fn mass_gap(params: &ModelParams) -> Result<f64> {
    Ok(exact_spectrum(&build_hamiltonian(params)?)?.gap)
}
