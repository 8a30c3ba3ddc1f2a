//! Point clouds on stage fibres `F_I`, boundaries `∂F_I`, links `L_I` and
//! open-book pages, obtained by projecting random proposals onto the
//! defining equations.

mod io;
pub mod newton;
mod ops;
mod radii;
pub mod rng;
mod tameness;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::germ::GermError;

pub use io::CloudIoError;
pub use newton::NewtonConfig;
pub use ops::{
    sample_boundary, sample_fiber, sample_link, sample_openbook_page, OpenBookSample,
};
pub use radii::{choose_radii, probe_values, RadiusProbe, RadiusReport, EPSILON_LADDER};
pub use tameness::{tameness_evidence, InclusionCheck, TamenessHit, TamenessReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub epsilon: f64,
    pub eta: f64,
    pub tau: f64,
}

impl Radii {
    /// `η = ε/20`, `τ = η/10`.
    pub fn from_epsilon(epsilon: f64) -> Self {
        let eta = epsilon / 20.0;
        Self {
            epsilon,
            eta,
            tau: eta / 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let ok = self.epsilon > 0.0
            && self.eta > 0.0
            && self.tau > 0.0
            && self.tau < self.eta
            && self.eta < self.epsilon
            && [self.epsilon, self.eta, self.tau].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(SampleError::InvalidRadii(*self))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Fiber,
    Boundary,
    Link,
    Page,
}

impl TargetKind {
    pub fn code(self) -> u8 {
        match self {
            TargetKind::Fiber => 0,
            TargetKind::Boundary => 1,
            TargetKind::Link => 2,
            TargetKind::Page => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => TargetKind::Fiber,
            1 => TargetKind::Boundary,
            2 => TargetKind::Link,
            3 => TargetKind::Page,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Fiber => "fiber",
            TargetKind::Boundary => "boundary",
            TargetKind::Link => "link",
            TargetKind::Page => "page",
        }
    }

    /// Whether points are constrained to `‖x‖ = ε`.
    pub fn on_sphere(self) -> bool {
        !matches!(self, TargetKind::Fiber)
    }
}

impl std::str::FromStr for TargetKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fiber" => Ok(TargetKind::Fiber),
            "boundary" => Ok(TargetKind::Boundary),
            "link" => Ok(TargetKind::Link),
            "page" => Ok(TargetKind::Page),
            _ => Err(format!("unknown target kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// `max |f_I(x) - y|` over the cloud (componentwise).
    pub equations: f64,
    /// `max |‖x‖ - ε|`; zero for fibres.
    pub sphere: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleStats {
    pub proposals: u64,
    /// Converged and inside the target, duplicates included.
    pub accepted: u64,
    pub duplicates: u64,
    /// Stopped because new proposals only produced duplicates.
    pub saturated: bool,
}

impl SampleStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub kind: TargetKind,
    pub stage: usize,
    pub regular_value: Vec<f64>,
    pub radii: Radii,
    pub seed: u64,
    pub residuals: Residuals,
    /// Row-major, `dim` values per point.
    pub coords: Vec<f64>,
    /// Indices of link points where `df_I` is numerically rank deficient.
    pub singular: Vec<u32>,
    pub stats: SampleStats,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub newton: NewtonConfig,
    /// Points closer than `dedup_factor * ε` are merged.
    pub dedup_factor: f64,
    /// Proposal budget; `None` means `max(50 n, 20000)`.
    pub max_proposals: Option<u64>,
    /// Consecutive duplicates after which the target is taken to be exhausted.
    pub saturation_streak: u64,
    pub batch: usize,
    pub min_acceptance: f64,
    /// Relative singular-value threshold for flagging singular link points.
    /// Newton pins a double root only to about `sqrt(tol)`, hence the size.
    pub singular_tol: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            newton: NewtonConfig::default(),
            dedup_factor: 1e-4,
            max_proposals: None,
            saturation_streak: 200,
            batch: 256,
            min_acceptance: 0.01,
            singular_tol: 1e-4,
        }
    }
}

impl SamplerConfig {
    pub fn budget(&self, n: usize) -> u64 {
        self.max_proposals
            .unwrap_or_else(|| (50 * n as u64).max(20_000))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error("invalid radii {0:?}: need 0 < tau < eta < epsilon")]
    InvalidRadii(Radii),
    #[error("regular value must be a nonzero vector of length {expected} and norm ≤ eta, got {found:?}")]
    RegularValue { expected: usize, found: Vec<f64> },
    #[error("page direction must be a unit vector in R^{expected}, got {found:?}")]
    PageDirection { expected: usize, found: Vec<f64> },
    #[error("no point of the target was found in {proposals} proposals")]
    EmptyFiber { proposals: u64 },
    #[error("acceptance rate {rate:.4} below {min} after {proposals} proposals")]
    AcceptanceTooLow { rate: f64, min: f64, proposals: u64 },
    #[error("no radius on the ladder passed the rank probe: {0}")]
    NoRadiusFound(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}
