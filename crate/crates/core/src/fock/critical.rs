//! Counter-term root finding and critical-behaviour analysis on top of the
//! exact spectrum.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{exact_spectrum, HamiltonianTerms};
use crate::lattice::ModelParams;
use crate::{Error, Result};

const BISECTION_TOL: f64 = 1e-13;
const BISECTION_MAX_ITER: usize = 200;
const BRACKET_SCAN_STEPS: usize = 64;

/// Search interval for the counter term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBracket {
    pub lo: f64,
    pub hi: f64,
}

impl DeltaBracket {
    /// `[-|m0²| - m² - λ, m² + λ]`.
    pub fn default_for(params: &ModelParams) -> Self {
        DeltaBracket {
            lo: -params.m0_sq.abs() - params.m_sq - params.lambda,
            hi: params.m_sq + params.lambda,
        }
    }
}

/// Plain bisection on a sign change of `f` in `[lo, hi]`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketFailure { lo, hi });
    }
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scans `[lo, hi]` downward from `hi` in equal steps and bisects the first
/// sign change, so the root returned is the one on the branch nearest `hi`.
fn first_root_from_top<F>(mut f: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let step = (hi - lo) / BRACKET_SCAN_STEPS as f64;
    let mut upper = hi;
    let mut f_upper = f(upper)?;
    for i in 1..=BRACKET_SCAN_STEPS {
        let lower = hi - step * i as f64;
        let f_lower = f(lower)?;
        if f_lower == 0.0 {
            return Ok(lower);
        }
        if f_lower.signum() != f_upper.signum() {
            return bisect(&mut f, lower, upper, BISECTION_TOL, BISECTION_MAX_ITER);
        }
        upper = lower;
        f_upper = f_lower;
    }
    Err(Error::BracketFailure { lo, hi })
}

/// Counter term at fixed reference mass for which `gap² = target_m_sq`.
///
/// The bare mass of `params` only sets the width of the default bracket.
pub fn solve_counterterm(params: &ModelParams, target_m_sq: f64) -> Result<f64> {
    solve_counterterm_in(params, target_m_sq, DeltaBracket::default_for(params))
}

pub fn solve_counterterm_in(params: &ModelParams, target_m_sq: f64, bracket: DeltaBracket) -> Result<f64> {
    if !(target_m_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target gap squared must be positive, got {target_m_sq}"
        )));
    }
    let terms = HamiltonianTerms::new(params)?;
    let lambda = params.lambda;
    first_root_from_top(
        |delta| {
            let gap = exact_spectrum(&terms.hamiltonian(lambda, delta))?.gap;
            Ok(gap * gap - target_m_sq)
        },
        bracket.lo,
        bracket.hi,
    )
}

/// Counter term at fixed bare mass for which the reference mass equals the
/// physical gap, `gap(m²)² = m²` with `δ_m = m0² - m²`.
///
/// The search runs over the reference mass in `[m_sq_lo, m_sq_hi]`, starting
/// from the light end.
pub fn physical_counterterm(params: &ModelParams, m_sq_lo: f64, m_sq_hi: f64) -> Result<f64> {
    if !(m_sq_lo > 0.0 && m_sq_hi > m_sq_lo) {
        return Err(Error::InvalidParameter(format!(
            "reference-mass search range [{m_sq_lo}, {m_sq_hi}] is invalid"
        )));
    }
    let residual = |m_sq: f64| -> Result<f64> {
        let p = params.with_reference_mass(m_sq);
        let terms = HamiltonianTerms::new(&p)?;
        let gap = exact_spectrum(&terms.hamiltonian(p.lambda, p.delta_m))?.gap;
        Ok(gap * gap - m_sq)
    };
    // scanning from the top of a negated axis finds the root nearest m_sq_lo
    let m_sq = first_root_from_top(|neg| residual(-neg), -m_sq_hi, -m_sq_lo).map(|neg| -neg)?;
    Ok(params.m0_sq - m_sq)
}

/// One point of a critical curve: the bare mass at which `gap² = target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub lambda: f64,
    pub m0_sq: std::result::Result<f64, String>,
}

/// Bare mass vs coupling at fixed physical gap.
///
/// Each point uses the target gap as reference mass, so the counter term is
/// the one that keeps the reference mass physical. Failures are recorded per
/// point.
pub fn critical_curve(lambda_grid: &[f64], target_gap_sq: f64, base: &ModelParams) -> Result<Vec<CriticalPoint>> {
    if !(target_gap_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target gap squared must be positive, got {target_gap_sq}"
        )));
    }
    let reference = ModelParams {
        m_sq: target_gap_sq,
        ..*base
    };
    let terms = HamiltonianTerms::new(&reference)?;
    let points = lambda_grid
        .iter()
        .map(|&lambda| {
            let p = reference.with_lambda(lambda);
            let bracket = DeltaBracket::default_for(&p);
            let root = first_root_from_top(
                |delta| {
                    let gap = exact_spectrum(&terms.hamiltonian(lambda, delta))?.gap;
                    Ok(gap * gap - target_gap_sq)
                },
                bracket.lo,
                bracket.hi,
            );
            CriticalPoint {
                lambda,
                m0_sq: root.map(|delta| target_gap_sq + delta).map_err(|e| e.to_string()),
            }
        })
        .collect();
    Ok(points)
}

/// Exact gaps of `base` over a coupling grid (reference mass and bare mass fixed).
pub fn gap_scan(base: &ModelParams, lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let terms = HamiltonianTerms::new(base)?;
    lambdas
        .iter()
        .map(|&lambda| Ok((lambda, exact_spectrum(&terms.hamiltonian(lambda, base.delta_m))?.gap)))
        .collect()
}

/// Picks the fit window for a power-law fit approaching the critical coupling
/// from above.
///
/// Only points above the coupling of the smallest gap (the finite-size
/// crossover) and with `gap >= gap_floor` qualify; of those the `count`
/// smallest-gap points are returned, sorted by coupling.
pub fn select_precritical_window(scan: &[(f64, f64)], count: usize, gap_floor: f64) -> Result<Vec<(f64, f64)>> {
    let mut sorted = scan.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let crossover = sorted
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
        .ok_or_else(|| Error::DegenerateFit("empty scan".into()))?;
    let mut candidates: Vec<(f64, f64)> = sorted
        .into_iter()
        .filter(|&(l, g)| l > crossover && g >= gap_floor)
        .collect();
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    candidates.truncate(count);
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    if candidates.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "only {} points above the crossover with gap >= {gap_floor}",
            candidates.len()
        )));
    }
    Ok(candidates)
}

/// Forward differences `(λ_mid, Δgap/Δλ)` over points sorted by coupling.
pub fn slope_series(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted
        .windows(2)
        .map(|w| (0.5 * (w[0].0 + w[1].0), (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
        .collect()
}

/// Result of fitting `gap = A (λ - λ_c)^ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalFit {
    pub lambda_c: f64,
    pub nu: f64,
    pub amplitude: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub window: (f64, f64),
    pub slopes: Vec<(f64, f64)>,
}

/// Levenberg–Marquardt fit of `gap = A (λ - λ_c)^ν` with `λ_c` below the window.
pub fn critical_exponent_fit(points: &[(f64, f64)]) -> Result<CriticalFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.iter().any(|&(_, g)| !(g > 0.0)) {
        return Err(Error::DegenerateFit("gaps must be positive".into()));
    }
    let g0 = pts[0].1;
    if pts.iter().all(|&(_, g)| (g - g0).abs() <= 1e-14 * g0.abs().max(1.0)) {
        return Err(Error::DegenerateFit("all gaps are equal".into()));
    }
    let lambda_min = pts[0].0;
    let lambda_max = pts[pts.len() - 1].0;
    let span = lambda_max - lambda_min;

    // linear pre-fit gap = s λ + c seeds A = s and λ_c = -c/s
    let n = pts.len() as f64;
    let mean_l = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_g = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_l).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_l) * (p.1 - mean_g)).sum();
    let slope = sxy / sxx;
    let mut lambda_c = if slope > 0.0 {
        mean_l - mean_g / slope
    } else {
        lambda_min - span
    };
    let max_lambda_c = lambda_min - 1e-9 * span.max(1.0);
    if lambda_c >= max_lambda_c {
        lambda_c = lambda_min - 0.1 * span.max(1e-3);
    }
    let amplitude = if slope > 0.0 {
        slope
    } else {
        mean_g / (mean_l - lambda_c)
    };
    let mut p = Vector3::new(amplitude, lambda_c, 1.0);

    let sse = |p: &Vector3<f64>| -> f64 {
        pts.iter()
            .map(|&(l, g)| (p[0] * (l - p[1]).powf(p[2]) - g).powi(2))
            .sum()
    };
    let feasible =
        |p: &Vector3<f64>| p[0] > 0.0 && p[2] > 0.0 && p[1] < max_lambda_c && p.iter().all(|v| v.is_finite());

    let mut current = sse(&p);
    let mut mu = 1e-3;
    for _ in 0..2000 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for &(l, g) in &pts {
            let d = l - p[1];
            let dn = d.powf(p[2]);
            let f = p[0] * dn;
            let row = Vector3::new(dn, -p[0] * p[2] * dn / d, f * d.ln());
            jtj += row * row.transpose();
            jtr += row * (f - g);
        }
        let mut improved = false;
        while mu < 1e16 {
            let mut damped = jtj;
            for i in 0..3 {
                damped[(i, i)] += mu * jtj[(i, i)].max(1e-30);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                mu *= 10.0;
                continue;
            };
            let trial = p + step;
            if feasible(&trial) {
                let value = sse(&trial);
                if value < current {
                    let gain = current - value;
                    p = trial;
                    current = value;
                    mu = (mu / 3.0).max(1e-15);
                    improved = gain > 1e-15 * current.max(1e-300) && step.norm() > 1e-14;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }

    Ok(CriticalFit {
        lambda_c: p[1],
        nu: p[2],
        amplitude: p[0],
        residual: (current / n).sqrt(),
        window: (lambda_min, lambda_max),
        slopes: slope_series(&pts),
    })
}
