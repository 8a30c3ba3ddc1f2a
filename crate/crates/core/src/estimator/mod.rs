//! Euler characteristic of a sampled space, read off a plateau of
//! Vietoris–Rips complexes over a ladder of scales.

mod bitset;
mod complex;
mod net;
mod scan;
mod stage;

use thiserror::Error;

use crate::sampler::SampleError;

pub use complex::{rips_chi, ComplexStats, RipsOptions};
pub use net::{greedy_net, thin_to_budget, Net, ThinOptions};
pub use scan::{
    chi_scan, estimate_cloud, find_plateau, mean_nearest_neighbor, scan_scales, scan_svg,
    ChiEstimate, CloudEstimateOptions, Confidence, Ladder, LadderBase, NetSummary, Plateau,
    ScanOptions,
};
pub use stage::{estimate_stage, manifold_dim, StageEstimate, StageParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("invalid scale {0}")]
    InvalidScale(f64),
    #[error("budget exceeded at scale {scale}: {detail}")]
    Budget { scale: f64, detail: String },
    #[error(transparent)]
    Sampler(#[from] SampleError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}
