use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ops::sample_boundary, rng, Radii, SampleError, SamplerConfig};
use crate::germ::{rank, MapGerm, RankTolerance};

pub const EPSILON_LADDER: [f64; 6] = [0.5, 0.25, 0.1, 0.05, 0.025, 0.01];

const PROBE_VALUES: usize = 8;

/// Rank statistics of `[df; dg]` over `S_ε ∩ f_I⁻¹(y)` for the probe values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusProbe {
    pub epsilon: f64,
    pub eta: f64,
    pub points: usize,
    /// Probe values whose level set on the sphere came out empty.
    pub empty_values: usize,
    pub rank_deficient: usize,
    pub min_sv: f64,
    pub median_sv: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub stage: usize,
    pub radii: Radii,
    pub probes: Vec<RadiusProbe>,
}

/// Eight values with `‖y‖ = η`: `±η` for `I = 1`, seeded random directions
/// otherwise.
pub fn probe_values(stage: usize, eta: f64, seed: u64) -> Vec<Vec<f64>> {
    if stage == 1 {
        return (0..PROBE_VALUES)
            .map(|j| vec![if j % 2 == 0 { eta } else { -eta }])
            .collect();
    }
    let tag = rng::tag(&[0x7261_6469_69, stage as u64]);
    (0..PROBE_VALUES as u64)
        .map(|j| {
            let mut r = rng::stream(seed, tag, j);
            loop {
                let v: Vec<f64> = (0..stage).map(|_| r.sample(StandardNormal)).collect();
                let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if n > 1e-9 {
                    return v.into_iter().map(|a| a * eta / n).collect();
                }
            }
        })
        .collect()
}

/// Walks down [`EPSILON_LADDER`] with `η = ε/20` and accepts the first `ε`
/// for which `[df; dg]` has rank `K + 1` at every probed point. `budget` is
/// the number of proposals per radius.
pub fn choose_radii(
    f: &MapGerm,
    stage: usize,
    budget: u64,
    seed: u64,
    tol: RankTolerance,
) -> Result<RadiusReport, SampleError> {
    if budget < 1000 {
        return Err(SampleError::Parameter(format!(
            "radius probe budget must be at least 1000, got {budget}"
        )));
    }
    f.stage(stage)?;
    let k = f.target_dim();
    let per_value = budget / PROBE_VALUES as u64;
    let cfg = SamplerConfig {
        max_proposals: Some(per_value),
        min_acceptance: 0.0,
        ..SamplerConfig::default()
    };
    let mut probes = Vec::new();
    for &epsilon in &EPSILON_LADDER {
        let radii = Radii::from_epsilon(epsilon);
        let mut svs = Vec::new();
        let mut empty_values = 0;
        let mut rank_deficient = 0;
        for y in probe_values(stage, radii.eta, seed) {
            let cloud = match sample_boundary(f, stage, &y, &radii, per_value as usize, seed, &cfg) {
                Ok(c) => c,
                Err(SampleError::EmptyFiber { .. }) => {
                    empty_values += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for x in cloud.points() {
                let p = rank::rank_profile(f, x, tol)?;
                if p.rank_df_with_g != k + 1 {
                    rank_deficient += 1;
                }
                svs.push(p.min_sv_with_g);
            }
        }
        svs.sort_by(f64::total_cmp);
        let probe = RadiusProbe {
            epsilon,
            eta: radii.eta,
            points: svs.len(),
            empty_values,
            rank_deficient,
            min_sv: svs.first().copied().unwrap_or(0.0),
            median_sv: svs.get(svs.len() / 2).copied().unwrap_or(0.0),
            accepted: !svs.is_empty() && rank_deficient == 0,
        };
        let accepted = probe.accepted;
        probes.push(probe);
        if accepted {
            return Ok(RadiusReport { stage, radii, probes });
        }
    }
    let summary = probes
        .iter()
        .map(|p| {
            format!(
                "ε={}: {} points, {} rank deficient, {} empty values, min σ {:.3e}",
                p.epsilon, p.points, p.rank_deficient, p.empty_values, p.min_sv
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Err(SampleError::NoRadiusFound(summary))
}
