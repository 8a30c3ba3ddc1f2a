//! Searches for points of `Sing f` off `V(f)` in a shell `ε/10 ≤ ‖x‖ ≤ ε`,
//! which witness that `f` is not tame at that scale.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newton::{self, NewtonConfig, System};
use super::{rng, Radii, SampleError};
use crate::germ::{rank, MapGerm, PolyMap};

/// `(df(x)^T λ, (|λ|² - 1)/2) = 0` in the unknowns `(x, λ)`.
struct CriticalSystem<'a> {
    f: &'a PolyMap,
    grads: Vec<PolyMap>,
}

impl CriticalSystem<'_> {
    fn split<'b>(&self, z: &'b [f64]) -> (&'b [f64], &'b [f64]) {
        z.split_at(self.f.source_dim())
    }

    fn fill(&self, z: &[f64], r: &mut [f64], jac: Option<&mut [f64]>) {
        let m = self.f.source_dim();
        let k = self.f.target_dim();
        let (x, lam) = self.split(z);
        let mut df = vec![0.0; k * m];
        self.f.jacobian_into(x, &mut df);
        for j in 0..m {
            r[j] = (0..k).map(|c| df[c * m + j] * lam[c]).sum();
        }
        r[m] = 0.5 * (lam.iter().map(|l| l * l).sum::<f64>() - 1.0);
        let Some(jac) = jac else { return };
        let n = m + k;
        jac.iter_mut().for_each(|v| *v = 0.0);
        let mut hess = vec![0.0; m * m];
        for (c, g) in self.grads.iter().enumerate() {
            g.jacobian_into(x, &mut hess);
            for j in 0..m {
                for i in 0..m {
                    jac[j * n + i] += lam[c] * hess[j * m + i];
                }
                jac[j * n + m + c] = df[c * m + j];
            }
        }
        for c in 0..k {
            jac[m * n + m + c] = lam[c];
        }
    }
}

impl System for CriticalSystem<'_> {
    fn rows(&self) -> usize {
        self.f.source_dim() + 1
    }
    fn dim(&self) -> usize {
        self.f.source_dim() + self.f.target_dim()
    }
    fn eval(&self, z: &[f64], r: &mut [f64], jac: &mut [f64]) {
        self.fill(z, r, Some(jac));
    }
    fn residual(&self, z: &[f64], r: &mut [f64]) {
        self.fill(z, r, None);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamenessHit {
    pub point: Vec<f64>,
    pub norm: f64,
    pub value_norm: f64,
    pub min_sv_df: f64,
}

/// One inclusion between singular and polar sets, checked pointwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionCheck {
    pub relation: String,
    /// Points lying in the smaller set.
    pub checked: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamenessReport {
    pub radii: Radii,
    pub starts: usize,
    pub converged: usize,
    pub hits: Vec<TamenessHit>,
    pub min_hit_norm: Option<f64>,
    pub inclusions: Vec<InclusionCheck>,
}

impl TamenessReport {
    pub fn is_clean(&self) -> bool {
        self.hits.is_empty() && self.inclusions.iter().all(|c| c.violations == 0)
    }
}

const VALUE_FLOOR: f64 = 1e-9;
const DEFICIENCY_ABS: f64 = 1e-7;

fn stack_with_g(a: &DMatrix<f64>, x: &[f64]) -> DMatrix<f64> {
    let m = x.len();
    let mut out = DMatrix::zeros(a.nrows() + 1, m);
    out.view_mut((0, 0), (a.nrows(), m)).copy_from(a);
    for (j, v) in x.iter().enumerate() {
        out[(a.nrows(), j)] = 2.0 * v;
    }
    out
}

/// Rows linearly dependent up to an absolute threshold.
fn row_deficient(a: &DMatrix<f64>) -> bool {
    if a.nrows() == 0 {
        return false;
    }
    if a.nrows() > a.ncols() {
        return true;
    }
    rank::singular_values(a)
        .last()
        .is_none_or(|&s| s <= DEFICIENCY_ABS)
}

struct Membership {
    sing: bool,
    polar: bool,
}

fn membership(map: &PolyMap, x: &[f64]) -> Result<Membership, SampleError> {
    let j = map.jacobian(x)?;
    Ok(Membership {
        sing: row_deficient(&j),
        polar: row_deficient(&stack_with_g(&j, x)),
    })
}

fn inclusion_checks(f: &MapGerm, points: &[Vec<f64>]) -> Result<Vec<InclusionCheck>, SampleError> {
    let k = f.target_dim();
    let mut checks: Vec<InclusionCheck> = Vec::new();
    let mut record = |name: String, lhs: bool, rhs: bool| {
        let pos = match checks.iter().position(|c| c.relation == name) {
            Some(p) => p,
            None => {
                checks.push(InclusionCheck {
                    relation: name,
                    checked: 0,
                    violations: 0,
                });
                checks.len() - 1
            }
        };
        if lhs {
            checks[pos].checked += 1;
            if !rhs {
                checks[pos].violations += 1;
            }
        }
    };
    for x in points {
        let full = membership(f.as_map(), x)?;
        record("Sing(f) ⊆ Sing(f,g)".into(), full.sing, full.polar);
        for i in 1..k {
            let st = f.stage(i)?;
            let a = membership(&st.f_i, x)?;
            let b = membership(&st.f_rest, x)?;
            record(format!("Sing(f_{i}) ⊆ Sing(f_{i},g)"), a.sing, a.polar);
            record(format!("Sing(f_{i}) ⊆ Sing(f)"), a.sing, full.sing);
            record(format!("Sing(f_{i},g) ⊆ Sing(f,g)"), a.polar, full.polar);
            record(format!("Sing(f_K-{i}) ⊆ Sing(f_K-{i},g)"), b.sing, b.polar);
            record(format!("Sing(f_K-{i}) ⊆ Sing(f)"), b.sing, full.sing);
            record(format!("Sing(f_K-{i},g) ⊆ Sing(f,g)"), b.polar, full.polar);
        }
    }
    Ok(checks)
}

/// Runs `n` critical-point searches from random starts in the shell and
/// reports converged points with `f(x) ≠ 0` and `df(x)` rank deficient.
pub fn tameness_evidence(
    f: &MapGerm,
    radii: &Radii,
    n: usize,
    seed: u64,
) -> Result<TamenessReport, SampleError> {
    radii.validate()?;
    if n < 100 {
        return Err(SampleError::Parameter(format!(
            "tameness search needs at least 100 starts, got {n}"
        )));
    }
    let m = f.source_dim();
    let k = f.target_dim();
    let grads = f
        .components()
        .iter()
        .map(|p| PolyMap::new(m, (0..m).map(|j| p.derivative(j)).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    let sys = CriticalSystem { f: f.as_map(), grads };
    let cfg = NewtonConfig::default();
    let eps = radii.epsilon;
    let tag = rng::tag(&[0x7461_6d65]);
    let runs: Vec<(Vec<f64>, Option<Vec<f64>>)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, tag, i);
            let mut z: Vec<f64> = (0..m + k).map(|_| r.sample(StandardNormal)).collect();
            let (x, lam) = z.split_at_mut(m);
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let radius = eps * (0.1 + 0.9 * r.random::<f64>());
            x.iter_mut().for_each(|v| *v *= radius / nx);
            let nl = lam.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            lam.iter_mut().for_each(|v| *v /= nl);
            let start = x.to_vec();
            (start, newton::solve(&sys, &z, &cfg).map(|s| s[..m].to_vec()))
        })
        .collect();
    let mut converged = Vec::new();
    let mut hits = Vec::new();
    for (_, sol) in &runs {
        let Some(x) = sol else { continue };
        converged.push(x.clone());
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(0.1 * eps..=eps).contains(&norm) {
            continue;
        }
        let value_norm = f.evaluate(x)?.iter().map(|v| v * v).sum::<f64>().sqrt();
        if value_norm <= VALUE_FLOOR {
            continue;
        }
        let sv = rank::singular_values(&f.jacobian(x)?);
        let smax = sv.first().copied().unwrap_or(0.0);
        let smin = if sv.len() < k { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
        let deficient = smin <= DEFICIENCY_ABS.max(1e-6 * smax);
        let polar = row_deficient(&stack_with_g(&f.jacobian(x)?, x));
        if deficient && polar {
            hits.push(TamenessHit {
                point: x.clone(),
                norm,
                value_norm,
                min_sv_df: smin,
            });
        }
    }
    let mut probe_points: Vec<Vec<f64>> = runs.iter().map(|(s, _)| s.clone()).collect();
    probe_points.extend(converged.iter().cloned());
    Ok(TamenessReport {
        radii: *radii,
        starts: n,
        converged: converged.len(),
        min_hit_norm: hits.iter().map(|h| h.norm).min_by(f64::total_cmp),
        hits,
        inclusions: inclusion_checks(f, &probe_points)?,
    })
}
