//! Physics parameters of the periodic lattice and the closed-form quantities
//! that follow from them: momentum grid, free dispersion and the first-order
//! mass counter term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One φ⁴ configuration on a periodic chain with unit lattice spacing.
///
/// `m_sq` is the reference mass of the oscillator basis, `m0_sq` the bare mass
/// and `delta_m = m0_sq - m_sq` the counter term. The constructors keep the
/// three consistent; code that perturbs a single field (finite differences,
/// root finding) uses struct update syntax and is responsible for the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of lattice sites.
    pub l: usize,
    pub m_sq: f64,
    pub m0_sq: f64,
    pub lambda: f64,
    pub delta_m: f64,
    /// Per-mode Fock cutoff (number of retained levels).
    pub n_max: usize,
}

impl ModelParams {
    /// Parameters from a bare mass; the counter term is `m0_sq - m_sq`.
    pub fn from_bare_mass(l: usize, m_sq: f64, m0_sq: f64, lambda: f64, n_max: usize) -> Result<Self> {
        let params = ModelParams {
            l,
            m_sq,
            m0_sq,
            lambda,
            delta_m: delta_from_masses(m0_sq, m_sq)?,
            n_max,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters from an explicit counter term; the bare mass is `m_sq + delta_m`.
    pub fn from_counterterm(l: usize, m_sq: f64, delta_m: f64, lambda: f64, n_max: usize) -> Result<Self> {
        let params = ModelParams {
            l,
            m_sq,
            m0_sq: m_sq + delta_m,
            lambda,
            delta_m,
            n_max,
        };
        params.validate()?;
        Ok(params)
    }

    /// Free theory (`lambda = 0`, `delta_m = 0`).
    pub fn free(l: usize, m_sq: f64, n_max: usize) -> Result<Self> {
        Self::from_counterterm(l, m_sq, 0.0, 0.0, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::InvalidParameter("lattice size L must be positive".into()));
        }
        if !(self.m_sq > 0.0) || !self.m_sq.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reference mass squared must be positive, got {}",
                self.m_sq
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be non-negative, got {}",
                self.lambda
            )));
        }
        if !self.delta_m.is_finite() || !self.m0_sq.is_finite() {
            return Err(Error::InvalidParameter("masses must be finite".into()));
        }
        if self.n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "Fock cutoff must be at least 2, got {}",
                self.n_max
            )));
        }
        Ok(())
    }

    /// Same bare mass and reference mass, different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        ModelParams { lambda, ..*self }
    }

    /// Same reference mass, new counter term (the bare mass follows).
    pub fn with_delta_m(&self, delta_m: f64) -> Self {
        ModelParams {
            delta_m,
            m0_sq: self.m_sq + delta_m,
            ..*self
        }
    }

    /// Same bare mass, new reference mass (the counter term follows).
    pub fn with_reference_mass(&self, m_sq: f64) -> Self {
        ModelParams {
            m_sq,
            delta_m: self.m0_sq - m_sq,
            ..*self
        }
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        ModelParams { n_max, ..*self }
    }

    /// Hilbert-space dimension `n_max^L`.
    pub fn dim(&self) -> usize {
        self.n_max.pow(self.l as u32)
    }
}

/// Dual-lattice momenta `2πj/L`, `j = 0..L`, with their free frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    pub momenta: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
}

pub fn momentum_grid(params: &ModelParams) -> Result<MomentumGrid> {
    if params.l == 0 {
        return Err(Error::InvalidParameter("lattice size L must be positive".into()));
    }
    if !(params.m_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference mass squared must be positive, got {}",
            params.m_sq
        )));
    }
    let l = params.l as f64;
    let momenta: Vec<f64> = (0..params.l).map(|j| 2.0 * PI * j as f64 / l).collect();
    let frequencies = momenta
        .iter()
        .map(|&k| dispersion(k, params.m_sq))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentumGrid { momenta, frequencies })
}

/// Free lattice dispersion `ω(k) = sqrt(m² + 4 sin²(k/2))`.
pub fn dispersion(k: f64, m_sq: f64) -> Result<f64> {
    let s = (0.5 * k).sin();
    let radicand = m_sq + 4.0 * s * s;
    if radicand < 0.0 || !radicand.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "negative dispersion radicand {radicand} at k = {k}"
        )));
    }
    Ok(radicand.sqrt())
}

/// First-order counter term `-(λ / 4L) Σ_k 1/ω(k)` that keeps the gap at the
/// reference mass.
pub fn counterterm_first_order(params: &ModelParams) -> Result<f64> {
    let grid = momentum_grid(params)?;
    let inv_sum: f64 = grid.frequencies.iter().map(|w| 1.0 / w).sum();
    Ok(-params.lambda / (4.0 * params.l as f64) * inv_sum)
}

/// Small-mass continuum form `-(λ / 8π) log(64 / m²)`.
pub fn counterterm_continuum(m_sq: f64, lambda: f64) -> Result<f64> {
    if !(m_sq > 0.0 && m_sq <= 64.0) {
        return Err(Error::InvalidParameter(format!(
            "continuum counter term needs 0 < m² ≤ 64, got {m_sq}"
        )));
    }
    Ok(-lambda / (8.0 * PI) * (64.0 / m_sq).ln())
}

/// `L → ∞` limit of [`counterterm_first_order`] at fixed mass:
/// `-(λ / 8π) ∫_{-π}^{π} dk / ω(k)`, evaluated by adaptive Simpson quadrature.
pub fn counterterm_infinite_lattice(m_sq: f64, lambda: f64) -> Result<f64> {
    if !(m_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference mass squared must be positive, got {m_sq}"
        )));
    }
    let f = |k: f64| 1.0 / (m_sq + 4.0 * (0.5 * k).sin().powi(2)).sqrt();
    // symmetric integrand; integrate the half range and double
    let half = adaptive_simpson(&f, 0.0, PI, 1e-13, 50);
    Ok(-lambda / (8.0 * PI) * 2.0 * half)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// Counter term from a bare and a reference mass.
pub fn delta_from_masses(m0_sq: f64, m_sq: f64) -> Result<f64> {
    if !(m_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference mass squared must be positive, got {m_sq}"
        )));
    }
    Ok(m0_sq - m_sq)
}
