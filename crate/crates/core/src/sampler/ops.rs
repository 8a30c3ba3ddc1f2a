use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newton::{self, System};
use super::rng;
use super::{PointCloud, Radii, Residuals, SampleError, SampleStats, SamplerConfig, TargetKind};
use crate::germ::{rank, MapGerm, PolyMap};
use crate::grid::PointGrid;

/// `f_I(x) = y`, optionally with `‖x‖² = ε²` and `P f_{K-I}(x) = 0`, where the
/// rows of `P` span the orthogonal complement of a page direction.
struct StackedSystem<'a> {
    f_i: &'a PolyMap,
    y: &'a [f64],
    sphere: Option<f64>,
    page: Option<(&'a PolyMap, Vec<Vec<f64>>)>,
}

impl StackedSystem<'_> {
    fn page_rows(&self) -> usize {
        self.page.as_ref().map_or(0, |(_, b)| b.len())
    }

    fn fill(&self, x: &[f64], r: &mut [f64], jac: Option<&mut [f64]>) {
        let m = x.len();
        let k = self.f_i.target_dim();
        self.f_i.eval_into(x, &mut r[..k]);
        for (ri, yi) in r[..k].iter_mut().zip(self.y) {
            *ri -= yi;
        }
        let mut row = k;
        if let Some(e) = self.sphere {
            r[row] = x.iter().map(|v| v * v).sum::<f64>() - e * e;
            row += 1;
        }
        let mut page_jac = Vec::new();
        if let Some((g, basis)) = &self.page {
            let mut page_vals = vec![0.0; g.target_dim()];
            g.eval_into(x, &mut page_vals);
            for (i, b) in basis.iter().enumerate() {
                r[row + i] = dot(b, &page_vals);
            }
            if jac.is_some() {
                page_jac = vec![0.0; g.target_dim() * m];
                g.jacobian_into(x, &mut page_jac);
            }
        }
        let Some(jac) = jac else { return };
        self.f_i.jacobian_into(x, &mut jac[..k * m]);
        let mut row = k;
        if self.sphere.is_some() {
            for (j, v) in x.iter().enumerate() {
                jac[row * m + j] = 2.0 * v;
            }
            row += 1;
        }
        if let Some((_, basis)) = &self.page {
            for (i, b) in basis.iter().enumerate() {
                for j in 0..m {
                    jac[(row + i) * m + j] =
                        b.iter().enumerate().map(|(c, bc)| bc * page_jac[c * m + j]).sum();
                }
            }
        }
    }
}

impl System for StackedSystem<'_> {
    fn rows(&self) -> usize {
        self.f_i.target_dim() + usize::from(self.sphere.is_some()) + self.page_rows()
    }
    fn dim(&self) -> usize {
        self.f_i.source_dim()
    }
    fn eval(&self, x: &[f64], r: &mut [f64], jac: &mut [f64]) {
        self.fill(x, r, Some(jac));
    }
    fn residual(&self, x: &[f64], r: &mut [f64]) {
        self.fill(x, r, None);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of `theta`'s orthogonal complement.
fn complement_basis(theta: &[f64]) -> Vec<Vec<f64>> {
    let p = theta.len();
    let mut basis: Vec<Vec<f64>> = vec![theta.to_vec()];
    for j in 0..p {
        let mut v = vec![0.0; p];
        v[j] = 1.0;
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|vi| *vi /= n);
            basis.push(v);
        }
        if basis.len() == p {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn propose(rng: &mut ChaCha8Rng, m: usize, epsilon: f64, on_sphere: bool) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n < 1e-12 {
            continue;
        }
        let radius = if on_sphere {
            epsilon
        } else {
            epsilon * rng.random::<f64>().powf(1.0 / m as f64)
        };
        v.iter_mut().for_each(|c| *c *= radius / n);
        return v;
    }
}

struct Target<'a> {
    kind: TargetKind,
    stage: usize,
    system: StackedSystem<'a>,
    radii: Radii,
    /// Page acceptance: `theta · f_{K-I}(x) >= tau`.
    page_filter: Option<(&'a PolyMap, &'a [f64])>,
    extra_tag: u64,
}

impl Target<'_> {
    fn attempt(&self, rng: &mut ChaCha8Rng, cfg: &SamplerConfig) -> Option<Vec<f64>> {
        let m = self.system.dim();
        let x0 = propose(rng, m, self.radii.epsilon, self.kind.on_sphere());
        let x = newton::solve(&self.system, &x0, &cfg.newton)?;
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        if self.kind == TargetKind::Fiber && norm(&x) > self.radii.epsilon {
            return None;
        }
        if let Some((g, theta)) = &self.page_filter {
            let v = g.evaluate(&x).ok()?;
            if dot(theta, &v) < self.radii.tau {
                return None;
            }
        }
        Some(x)
    }

    fn collect(&self, n: usize, seed: u64, cfg: &SamplerConfig) -> (Vec<f64>, SampleStats) {
        let m = self.system.dim();
        let tag = rng::tag(&[self.kind.code() as u64, self.stage as u64, self.extra_tag]);
        let dedup = (cfg.dedup_factor * self.radii.epsilon).max(f64::MIN_POSITIVE);
        let mut grid = PointGrid::new(m, dedup);
        let mut stats = SampleStats::default();
        if n == 0 {
            return (Vec::new(), stats);
        }
        let budget = cfg.budget(n);
        let mut streak = 0u64;
        let mut next = 0u64;
        'outer: while next < budget {
            let hi = (next + cfg.batch.max(1) as u64).min(budget);
            let batch: Vec<Option<Vec<f64>>> = (next..hi)
                .into_par_iter()
                .map(|i| self.attempt(&mut rng::stream(seed, tag, i), cfg))
                .collect();
            next = hi;
            for res in batch {
                stats.proposals += 1;
                let Some(x) = res else { continue };
                stats.accepted += 1;
                if grid.any_within(&x, dedup) {
                    stats.duplicates += 1;
                    streak += 1;
                    if streak >= cfg.saturation_streak {
                        stats.saturated = true;
                        break 'outer;
                    }
                } else {
                    streak = 0;
                    grid.insert(&x);
                    if grid.len() == n {
                        break 'outer;
                    }
                }
            }
        }
        let coords = (0..grid.len()).flat_map(|i| grid.point(i).to_vec()).collect();
        (coords, stats)
    }

    fn run(
        &self,
        n: usize,
        seed: u64,
        cfg: &SamplerConfig,
        allow_empty: bool,
    ) -> Result<PointCloud, SampleError> {
        let (coords, stats) = self.collect(n, seed, cfg);
        if n > 0 {
            if stats.accepted == 0 && !allow_empty {
                return Err(SampleError::EmptyFiber {
                    proposals: stats.proposals,
                });
            }
            if stats.accepted > 0 && stats.acceptance_rate() < cfg.min_acceptance {
                return Err(SampleError::AcceptanceTooLow {
                    rate: stats.acceptance_rate(),
                    min: cfg.min_acceptance,
                    proposals: stats.proposals,
                });
            }
        }
        let m = self.system.dim();
        let mut residuals = Residuals::default();
        let mut buf = vec![0.0; self.system.f_i.target_dim()];
        for x in coords.chunks_exact(m) {
            self.system.f_i.eval_into(x, &mut buf);
            for (v, y) in buf.iter().zip(self.system.y) {
                residuals.equations = residuals.equations.max((v - y).abs());
            }
            if self.kind.on_sphere() {
                residuals.sphere = residuals.sphere.max((norm(x) - self.radii.epsilon).abs());
            }
        }
        Ok(PointCloud {
            dim: m,
            kind: self.kind,
            stage: self.stage,
            regular_value: self.system.y.to_vec(),
            radii: self.radii,
            seed,
            residuals,
            coords,
            singular: Vec::new(),
            stats,
        })
    }
}

fn check_value(y: &[f64], stage: usize, radii: &Radii) -> Result<(), SampleError> {
    let n = norm(y);
    let ok = y.len() == stage && n > 0.0 && n <= radii.eta * (1.0 + 1e-9) && n.is_finite();
    if ok {
        Ok(())
    } else {
        Err(SampleError::RegularValue {
            expected: stage,
            found: y.to_vec(),
        })
    }
}

/// Points of `F_I = B_ε ∩ f_I⁻¹(y)`.
pub fn sample_fiber(
    f: &MapGerm,
    stage: usize,
    y: &[f64],
    radii: &Radii,
    n: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<PointCloud, SampleError> {
    radii.validate()?;
    let maps = f.stage(stage)?;
    check_value(y, stage, radii)?;
    Target {
        kind: TargetKind::Fiber,
        stage,
        system: StackedSystem { f_i: &maps.f_i, y, sphere: None, page: None },
        radii: *radii,
        page_filter: None,
        extra_tag: 0,
    }
    .run(n, seed, cfg, false)
}

/// Points of `∂F_I = S_ε ∩ f_I⁻¹(y)`.
pub fn sample_boundary(
    f: &MapGerm,
    stage: usize,
    y: &[f64],
    radii: &Radii,
    n: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<PointCloud, SampleError> {
    radii.validate()?;
    let maps = f.stage(stage)?;
    check_value(y, stage, radii)?;
    Target {
        kind: TargetKind::Boundary,
        stage,
        system: StackedSystem {
            f_i: &maps.f_i,
            y,
            sphere: Some(radii.epsilon),
            page: None,
        },
        radii: *radii,
        page_filter: None,
        extra_tag: 0,
    }
    .run(n, seed, cfg, false)
}

/// Points of `L_I = S_ε ∩ f_I⁻¹(0)`. An empty link is a valid outcome.
/// Points where `df_I` is nearly rank deficient are listed in `singular`.
pub fn sample_link(
    f: &MapGerm,
    stage: usize,
    radii: &Radii,
    n: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<PointCloud, SampleError> {
    radii.validate()?;
    let maps = f.stage(stage)?;
    let zero = vec![0.0; stage];
    let mut cloud = Target {
        kind: TargetKind::Link,
        stage,
        system: StackedSystem {
            f_i: &maps.f_i,
            y: &zero,
            sphere: Some(radii.epsilon),
            page: None,
        },
        radii: *radii,
        page_filter: None,
        extra_tag: 0,
    }
    .run(n, seed, cfg, true)?;
    for i in 0..cloud.len() {
        let jac = maps.f_i.jacobian(cloud.point(i))?;
        let sv = rank::singular_values(&jac);
        let smax = sv.first().copied().unwrap_or(0.0);
        let smin = if sv.len() < stage { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
        if smax == 0.0 || smin < cfg.singular_tol * smax {
            cloud.singular.push(i as u32);
        }
    }
    Ok(cloud)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenBookSample {
    pub theta: Vec<f64>,
    pub cloud: PointCloud,
}

/// Page of the open book `f_{K-I}/‖f_{K-I}‖ : ∂F_I ∖ ∂F_f → S^{K-I-1}` over
/// `theta`, cut off at `theta · f_{K-I} >= τ`. For `K - I = 1`, `theta` is
/// `[1.0]` or `[-1.0]` and selects a sign.
#[allow(clippy::too_many_arguments)]
pub fn sample_openbook_page(
    f: &MapGerm,
    stage: usize,
    y: &[f64],
    theta: &[f64],
    radii: &Radii,
    n: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<OpenBookSample, SampleError> {
    radii.validate()?;
    let maps = f.stage(stage)?;
    check_value(y, stage, radii)?;
    let p = maps.f_rest.target_dim();
    if p == 0 {
        return Err(SampleError::Parameter(format!(
            "open-book pages need I < K, got I = K = {stage}"
        )));
    }
    if theta.len() != p || (norm(theta) - 1.0).abs() > 1e-9 {
        return Err(SampleError::PageDirection {
            expected: p,
            found: theta.to_vec(),
        });
    }
    let extra_tag = rng::tag(&theta.iter().map(|t| t.to_bits()).collect::<Vec<_>>());
    let cloud = Target {
        kind: TargetKind::Page,
        stage,
        system: StackedSystem {
            f_i: &maps.f_i,
            y,
            sphere: Some(radii.epsilon),
            page: Some((&maps.f_rest, complement_basis(theta))),
        },
        radii: *radii,
        page_filter: Some((&maps.f_rest, theta)),
        extra_tag,
    }
    .run(n, seed, cfg, false)?;
    Ok(OpenBookSample {
        theta: theta.to_vec(),
        cloud,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal() {
        let theta = [0.6, 0.0, 0.8];
        let b = complement_basis(&theta);
        assert_eq!(b.len(), 2);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &theta).abs() < 1e-12);
            assert!((norm(u) - 1.0).abs() < 1e-12);
            for v in &b[i + 1..] {
                assert!(dot(u, v).abs() < 1e-12);
            }
        }
        assert!(complement_basis(&[-1.0]).is_empty());
    }
}
