//! Sample one stage target and estimate its χ.

use serde::{Deserialize, Serialize};

use super::scan::{estimate_cloud, ChiEstimate, CloudEstimateOptions};
use super::EstimatorError;
use crate::germ::MapGerm;
use crate::sampler::{
    sample_boundary, sample_fiber, sample_link, sample_openbook_page, PointCloud, Radii,
    SampleError, SampleStats, SamplerConfig, TargetKind,
};

/// Expected manifold dimension of the target at stage `i`.
pub fn manifold_dim(m: usize, k: usize, i: usize, kind: TargetKind) -> i64 {
    let (m, k, i) = (m as i64, k as i64, i as i64);
    match kind {
        TargetKind::Fiber => m - i,
        TargetKind::Boundary | TargetKind::Link => m - i - 1,
        TargetKind::Page => m - k,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    pub radii: Radii,
    /// Unit direction of the regular value `y = η·u`; defaults to `e1`.
    pub direction: Option<Vec<f64>>,
    /// Page direction in `R^{K-I}`, required for pages.
    pub theta: Option<Vec<f64>>,
    pub points: usize,
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub estimate: CloudEstimateOptions,
    /// Also estimate the fibre restricted to `‖x‖ ≤ 0.95ε`.
    pub shrink: bool,
    /// Count simplices only up to the manifold dimension, without reduction.
    pub skeleton: bool,
}

impl StageParams {
    pub fn new(radii: Radii, seed: u64) -> Self {
        Self {
            radii,
            direction: None,
            theta: None,
            points: 4000,
            seed,
            sampler: SamplerConfig::default(),
            estimate: CloudEstimateOptions { seed, ..CloudEstimateOptions::default() },
            shrink: false,
            skeleton: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEstimate {
    pub kind: TargetKind,
    pub stage: usize,
    pub manifold_dim: i64,
    pub regular_value: Vec<f64>,
    pub cloud_points: usize,
    pub sample_stats: Option<SampleStats>,
    pub singular_points: usize,
    pub estimate: ChiEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shrunk: Option<ChiEstimate>,
}

fn regular_value(stage: usize, params: &StageParams) -> Result<Vec<f64>, EstimatorError> {
    let u = match &params.direction {
        Some(u) => u.clone(),
        None => {
            let mut e = vec![0.0; stage];
            e[0] = 1.0;
            e
        }
    };
    let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if u.len() != stage || !(n > 0.0 && n.is_finite()) {
        return Err(EstimatorError::Parameter(format!(
            "direction must be a nonzero vector in R^{stage}, got {u:?}"
        )));
    }
    Ok(u.iter().map(|v| params.radii.eta * v / n).collect())
}

pub fn estimate_stage(
    f: &MapGerm,
    stage: usize,
    kind: TargetKind,
    params: &StageParams,
) -> Result<StageEstimate, EstimatorError> {
    let (m, k) = (f.source_dim(), f.target_dim());
    if stage == 0 || stage > k {
        return Err(EstimatorError::Parameter(format!("stage {stage} outside 1..={k}")));
    }
    let d = manifold_dim(m, k, stage, kind);
    let y = if kind == TargetKind::Link { vec![0.0; stage] } else { regular_value(stage, params)? };
    let (p, seed, cfg) = (params.points, params.seed, &params.sampler);
    let sampled = match kind {
        TargetKind::Fiber => sample_fiber(f, stage, &y, &params.radii, p, seed, cfg),
        TargetKind::Boundary => sample_boundary(f, stage, &y, &params.radii, p, seed, cfg),
        TargetKind::Link => sample_link(f, stage, &params.radii, p, seed, cfg),
        TargetKind::Page => {
            let theta = params.theta.as_ref().ok_or_else(|| {
                EstimatorError::Parameter("page estimates need a direction theta".into())
            })?;
            sample_openbook_page(f, stage, &y, theta, &params.radii, p, seed, cfg).map(|s| s.cloud)
        }
    };
    let mut opts = params.estimate.clone();
    if params.skeleton {
        opts.scan.rips.reduce = false;
        opts.scan.rips.max_dim = Some(d.max(0) as usize);
    }
    let cloud: Option<PointCloud> = match sampled {
        Ok(c) => Some(c),
        Err(SampleError::EmptyFiber { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let Some(cloud) = cloud else {
        let mut est = estimate_cloud(&[], m, params.radii.epsilon, &opts)?;
        est.notes.push(format!("no point of the {} was found", kind.name()));
        return Ok(StageEstimate {
            kind,
            stage,
            manifold_dim: d,
            regular_value: y,
            cloud_points: 0,
            sample_stats: None,
            singular_points: 0,
            estimate: est,
            shrunk: None,
        });
    };
    // A saturated sampler has enumerated a finite target; dropping points
    // from it changes the space, not the sample.
    let finite = cloud.stats.saturated && opts.subsample_trials > 0;
    if finite {
        opts.subsample_trials = 0;
    }
    let mut estimate = estimate_cloud(&cloud.coords, m, params.radii.epsilon, &opts)?;
    if finite {
        estimate.notes.push(format!(
            "sampler saturated at {} points; subsample check skipped",
            cloud.len()
        ));
    }
    if cloud.is_empty() {
        estimate.notes.push(format!("empty {}", kind.name()));
    }
    if !cloud.singular.is_empty() {
        estimate.notes.push(format!(
            "{} sampled points are near singular points of f_{stage}",
            cloud.singular.len()
        ));
    }
    let shrunk = if params.shrink && kind == TargetKind::Fiber {
        let r2 = (0.95 * params.radii.epsilon).powi(2);
        let inner: Vec<f64> = cloud
            .points()
            .filter(|x| x.iter().map(|v| v * v).sum::<f64>() <= r2)
            .flatten()
            .copied()
            .collect();
        Some(estimate_cloud(&inner, m, params.radii.epsilon, &opts)?)
    } else {
        None
    };
    Ok(StageEstimate {
        kind,
        stage,
        manifold_dim: d,
        regular_value: y,
        cloud_points: cloud.len(),
        sample_stats: Some(cloud.stats.clone()),
        singular_points: cloud.singular.len(),
        estimate,
        shrunk,
    })
}
