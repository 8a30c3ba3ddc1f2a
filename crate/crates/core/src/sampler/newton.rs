//! Minimum-norm Gauss–Newton for underdetermined polynomial systems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Converged when every residual component is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
        }
    }
}

/// A square-or-wide system `F: R^n -> R^r`.
pub trait System {
    fn rows(&self) -> usize;
    fn dim(&self) -> usize;
    /// Fills `r` (length `rows`) and row-major `jac` (`rows x dim`).
    fn eval(&self, x: &[f64], r: &mut [f64], jac: &mut [f64]);
    fn residual(&self, x: &[f64], r: &mut [f64]);
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

fn half_sq(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|a| a * a).sum::<f64>()
}

/// `dx = -J^T (J J^T)^{-1} F`, falling back to the pseudo-inverse.
fn min_norm_step(j: &DMatrix<f64>, f: &DVector<f64>) -> Option<DVector<f64>> {
    let jjt = j * j.transpose();
    let w = match jjt.clone().cholesky() {
        Some(ch) => ch.solve(f),
        None => jjt.svd(true, true).solve(f, 1e-14).ok()?,
    };
    let dx = -(j.transpose() * w);
    dx.iter().all(|v| v.is_finite()).then_some(dx)
}

/// Returns the converged point, or `None` on stagnation or divergence.
pub fn solve<S: System>(sys: &S, x0: &[f64], cfg: &NewtonConfig) -> Option<Vec<f64>> {
    let (r, n) = (sys.rows(), sys.dim());
    let mut x = x0.to_vec();
    let mut res = vec![0.0; r];
    let mut jac = vec![0.0; r * n];
    let mut trial = vec![0.0; n];
    let mut trial_res = vec![0.0; r];
    for _ in 0..cfg.max_iter {
        sys.eval(&x, &mut res, &mut jac);
        if max_abs(&res) < cfg.tol {
            return Some(x);
        }
        let j = DMatrix::from_row_slice(r, n, &jac);
        let dx = min_norm_step(&j, &DVector::from_column_slice(&res))?;
        let phi = half_sq(&res);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            for ((tx, xi), di) in trial.iter_mut().zip(&x).zip(dx.iter()) {
                *tx = xi + t * di;
            }
            sys.residual(&trial, &mut trial_res);
            // Sufficient decrease along dx, whose directional derivative is -2 phi.
            if half_sq(&trial_res) <= (1.0 - 2e-4 * t) * phi {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
        std::mem::swap(&mut x, &mut trial);
    }
    sys.residual(&x, &mut res);
    (max_abs(&res) < cfg.tol).then_some(x)
}
