//! Nelder–Mead simplex minimization.

use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMead {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop once `max f − min f` over the simplex falls below this.
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            initial_step: 0.5,
            f_tol: 1e-7,
            max_evals: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
    /// Objective value of every evaluation, in order.
    pub history: Vec<f64>,
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Result<Minimum>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let n = x0.len();
        let mut history = Vec::new();
        let mut eval = |x: &[f64], history: &mut Vec<f64>| -> Result<f64> {
            let v = f(x)?;
            history.push(v);
            Ok(v)
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0, &mut history)?));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let v = eval(&x, &mut history)?;
            simplex.push((x, v));
        }

        let mut converged = false;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[n].1 - simplex[0].1 < self.f_tol {
                converged = true;
                break;
            }
            if history.len() >= self.max_evals {
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(ALPHA);
            let fr = eval(&xr, &mut history)?;
            if fr < simplex[0].1 {
                let xe = along(GAMMA);
                let fe = eval(&xe, &mut history)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(RHO * ALPHA);
                let fc = eval(&xc, &mut history)?;
                (xc, fc)
            } else {
                let xc = along(-RHO);
                let fc = eval(&xc, &mut history)?;
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + SIGMA * (v - b)).collect();
                let v = eval(&x, &mut history)?;
                *vertex = (x, v);
            }
        }

        let (x, fx) = simplex.swap_remove(0);
        Ok(Minimum {
            x,
            f: fx,
            evals: history.len(),
            converged,
            history,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead {
            f_tol: 1e-14,
            ..Default::default()
        };
        let m = nm
            .minimize(
                |x| Ok((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5),
                &[0.0, 0.0],
            )
            .unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] + 2.0).abs() < 1e-5);
        assert!((m.f - 0.5).abs() < 1e-12);
        assert_eq!(m.history.len(), m.evals);
    }

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            f_tol: 1e-16,
            max_evals: 5000,
            ..Default::default()
        };
        let m = nm
            .minimize(
                |x| Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)),
                &[-1.2, 1.0],
            )
            .unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn eval_cap_reports_nonconvergence() {
        let nm = NelderMead {
            f_tol: 0.0,
            max_evals: 20,
            ..Default::default()
        };
        let m = nm
            .minimize(|x| Ok(x.iter().map(|v| v * v).sum()), &[3.0, 1.0, -2.0])
            .unwrap();
        assert!(!m.converged);
        assert!(m.evals < 30);
    }

    #[test]
    fn objective_errors_propagate() {
        let nm = NelderMead::default();
        let r = nm.minimize(|_| Err(crate::Error::Unsupported("boom".into())), &[0.0]);
        assert!(r.is_err());
    }
}
