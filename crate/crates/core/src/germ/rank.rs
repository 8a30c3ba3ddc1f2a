//! Numerical ranks of Jacobians and of the stacked matrices used for the
//! singular/polar-set checks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GermError, MapGerm};

/// How small a singular value must be to count as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RankTolerance {
    /// Threshold is `factor * sigma_max`.
    Relative(f64),
    Absolute(f64),
}

impl Default for RankTolerance {
    fn default() -> Self {
        RankTolerance::Relative(1e-8)
    }
}

impl RankTolerance {
    pub fn threshold(&self, sigma_max: f64) -> f64 {
        match *self {
            RankTolerance::Relative(r) => r * sigma_max,
            RankTolerance::Absolute(a) => a,
        }
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn numerical_rank(m: &DMatrix<f64>, tol: RankTolerance) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else { return 0 };
    let thr = tol.threshold(smax);
    sv.iter().filter(|&&s| s > thr && s > 0.0).count()
}

fn stack(blocks: &[&DMatrix<f64>], ncols: usize) -> DMatrix<f64> {
    let nrows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(nrows, ncols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), ncols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Ranks at one point `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub rank_df: usize,
    /// Rank of `df` stacked with `dg = 2x`.
    pub rank_df_with_g: usize,
    /// `rank_a[I-1]` is the rank of `A(x) = [df_I; df_{K-I}; dg]`.
    pub rank_a: Vec<usize>,
    /// Rank of `df_I` alone, per stage.
    pub rank_df_stage: Vec<usize>,
    /// Smallest singular value of `[df; dg]`.
    pub min_sv_with_g: f64,
}

impl RankProfile {
    /// `A(x)` has full row rank `K + 1` at every stage.
    pub fn a_is_maximal(&self, target_dim: usize) -> bool {
        self.rank_a.iter().all(|&r| r == target_dim + 1)
    }
}

pub fn rank_profile(f: &MapGerm, x: &[f64], tol: RankTolerance) -> Result<RankProfile, GermError> {
    let m = f.source_dim();
    let k = f.target_dim();
    let df = f.jacobian(x)?;
    let dg = DMatrix::from_row_slice(1, m, &x.iter().map(|v| 2.0 * v).collect::<Vec<_>>());
    let with_g = stack(&[&df, &dg], m);
    let mut rank_a = Vec::with_capacity(k);
    let mut rank_df_stage = Vec::with_capacity(k);
    for i in 1..=k {
        let stage = f.stage(i)?;
        let dfi = stage.f_i.jacobian(x)?;
        let dfr = stage.f_rest.jacobian(x)?;
        rank_df_stage.push(numerical_rank(&dfi, tol));
        rank_a.push(numerical_rank(&stack(&[&dfi, &dfr, &dg], m), tol));
    }
    let sv = singular_values(&with_g);
    Ok(RankProfile {
        rank_df: numerical_rank(&df, tol),
        rank_df_with_g: numerical_rank(&with_g, tol),
        rank_a,
        rank_df_stage,
        min_sv_with_g: sv.last().copied().unwrap_or(0.0),
    })
}
