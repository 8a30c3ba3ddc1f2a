//! Scale scans and plateau detection.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::complex::{evaluate, ComplexStats, PairList, RipsOptions, UnionFind};
use super::net::{greedy_net, thin_to_budget, ThinOptions};
use super::EstimatorError;
use crate::grid::dist2;
use crate::sampler::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LadderBase {
    /// The spacing of the net the cloud was thinned to.
    NetSpacing,
    MeanNearestNeighbor,
    Absolute(f64),
}

/// `scales` geometric steps over `[lo, hi] × base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub scales: usize,
    pub lo: f64,
    pub hi: f64,
    pub base: LadderBase,
}

impl Default for Ladder {
    fn default() -> Self {
        Self {
            scales: 40,
            lo: 2.0,
            hi: 30.0,
            base: LadderBase::NetSpacing,
        }
    }
}

pub fn mean_nearest_neighbor(coords: &[f64], dim: usize) -> Option<f64> {
    let pts: Vec<&[f64]> = coords.chunks_exact(dim.max(1)).collect();
    if pts.len() < 2 {
        return None;
    }
    let total: f64 = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| dist2(p, q))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Some(total / pts.len() as f64)
}

impl Ladder {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.scales < 15 {
            return Err(EstimatorError::InvalidOption(format!(
                "a scan needs at least 15 scales, got {}",
                self.scales
            )));
        }
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return Err(EstimatorError::InvalidOption(format!(
                "ladder bounds must satisfy 0 < lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// Absolute scales. `spacing` is required for [`LadderBase::NetSpacing`].
    pub fn resolve(
        &self,
        coords: &[f64],
        dim: usize,
        spacing: Option<f64>,
    ) -> Result<Vec<f64>, EstimatorError> {
        self.validate()?;
        let base = match self.base {
            LadderBase::Absolute(b) => b,
            LadderBase::NetSpacing => spacing.ok_or_else(|| {
                EstimatorError::InvalidOption("net-spacing ladder used on an unthinned cloud".into())
            })?,
            LadderBase::MeanNearestNeighbor => mean_nearest_neighbor(coords, dim).unwrap_or(1.0),
        };
        if !(base > 0.0 && base.is_finite()) {
            return Err(EstimatorError::InvalidScale(base));
        }
        let ratio = (self.hi / self.lo).powf(1.0 / (self.scales - 1) as f64);
        Ok((0..self.scales)
            .map(|i| base * self.lo * ratio.powi(i as i32))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub ladder: Ladder,
    pub rips: RipsOptions,
    pub plateau_min: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            ladder: Ladder::default(),
            rips: RipsOptions::default(),
            plateau_min: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub start: usize,
    pub length: usize,
    pub r_min: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSummary {
    pub raw_points: usize,
    pub net_points: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub chi: i64,
    pub confidence: Confidence,
    pub plateau: Option<Plateau>,
    pub scan: Vec<ComplexStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net: Option<NetSummary>,
    /// Plateau χ of each subsample trial (`None`: no usable scale).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub subsample: Vec<Option<i64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ChiEstimate {
    pub fn is_stable(&self) -> bool {
        self.confidence == Confidence::Stable
    }

    /// Components of the raw graph at the first plateau scale.
    pub fn plateau_components(&self) -> Option<usize> {
        self.plateau.as_ref().map(|p| self.scan[p.start].components)
    }

    fn empty(note: &str) -> Self {
        ChiEstimate {
            chi: 0,
            confidence: Confidence::Stable,
            plateau: None,
            scan: Vec::new(),
            net: None,
            subsample: Vec::new(),
            notes: vec![note.to_string()],
        }
    }
}

/// Longest run of equal χ over consecutive usable scales; the earliest run
/// wins ties.
pub fn find_plateau(scan: &[ComplexStats]) -> Option<Plateau> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < scan.len() {
        if !scan[i].usable() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < scan.len() && scan[j].usable() && scan[j].chi == scan[i].chi {
            j += 1;
        }
        if best.is_none_or(|(_, len)| j - i > len) {
            best = Some((i, j - i));
        }
        i = j;
    }
    best.map(|(start, length)| Plateau {
        start,
        length,
        r_min: scan[start].scale,
        r_max: scan[start + length - 1].scale,
    })
}

/// Evaluates every scale (ascending) and picks the plateau. Once a scale
/// exceeds a budget, larger scales are skipped.
pub fn scan_scales(
    coords: &[f64],
    dim: usize,
    scales: &[f64],
    opts: &ScanOptions,
) -> Result<ChiEstimate, EstimatorError> {
    opts.rips.validate()?;
    if scales.windows(2).any(|w| w[1] <= w[0]) || scales.first().is_some_and(|&s| s <= 0.0) {
        return Err(EstimatorError::InvalidOption("scales must be positive and increasing".into()));
    }
    let r_max = scales.last().copied().unwrap_or(0.0);
    let pl = PairList::new(coords, dim, r_max);
    let mut uf = UnionFind::new(pl.n);
    let mut done = 0;
    let mut scan = Vec::with_capacity(scales.len());
    let mut stopped = false;
    for &r in scales {
        let end = pl.prefix_len(r);
        for &(_, i, j) in &pl.pairs[done..end] {
            uf.union(i, j);
        }
        done = end;
        if stopped {
            scan.push(ComplexStats {
                scale: r,
                counts: Vec::new(),
                chi: 0,
                raw_vertices: pl.n,
                raw_edges: end,
                components: uf.components,
                valid: false,
                saturated: pl.n >= 2 && end == pl.n * (pl.n - 1) / 2,
                note: Some("skipped after a smaller scale exceeded its budget".into()),
            });
            continue;
        }
        let stats = evaluate(r, coords, dim, pl.n, &pl.pairs[..end], uf.components, &opts.rips);
        stopped = !stats.valid;
        scan.push(stats);
    }
    let plateau = find_plateau(&scan);
    let confidence = match &plateau {
        Some(p) if p.length >= opts.plateau_min => Confidence::Stable,
        _ => Confidence::Unstable,
    };
    let mut notes = Vec::new();
    if plateau.is_none() {
        notes.push("no usable scale".to_string());
    }
    Ok(ChiEstimate {
        chi: plateau.as_ref().map_or(0, |p| scan[p.start].chi),
        confidence,
        plateau,
        scan,
        net: None,
        subsample: Vec::new(),
        notes,
    })
}

/// Scan over a ladder resolved on the cloud itself.
pub fn chi_scan(
    coords: &[f64],
    dim: usize,
    spacing: Option<f64>,
    opts: &ScanOptions,
) -> Result<ChiEstimate, EstimatorError> {
    let scales = opts.ladder.resolve(coords, dim, spacing)?;
    scan_scales(coords, dim, &scales, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudEstimateOptions {
    pub thin: ThinOptions,
    pub scan: ScanOptions,
    pub subsample_trials: usize,
    pub subsample_fraction: f64,
    pub seed: u64,
}

impl Default for CloudEstimateOptions {
    fn default() -> Self {
        Self {
            thin: ThinOptions::default(),
            scan: ScanOptions::default(),
            subsample_trials: 3,
            subsample_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Thins the cloud, scans, and checks the plateau χ on random subsamples.
/// `reference` sets the smallest net spacing tried (usually ε).
pub fn estimate_cloud(
    coords: &[f64],
    dim: usize,
    reference: f64,
    opts: &CloudEstimateOptions,
) -> Result<ChiEstimate, EstimatorError> {
    if coords.is_empty() || dim == 0 {
        return Ok(ChiEstimate::empty("empty cloud: χ(∅) = 0"));
    }
    let net = thin_to_budget(coords, dim, reference, &opts.thin);
    let scales = opts.scan.ladder.resolve(&net.coords, dim, Some(net.spacing))?;
    let mut est = scan_scales(&net.coords, dim, &scales, &opts.scan)?;
    est.net = Some(NetSummary {
        raw_points: net.raw_points,
        net_points: net.len(),
        spacing: net.spacing,
    });
    let n = net.raw_points;
    let keep = ((n as f64 * opts.subsample_fraction).round() as usize).clamp(1, n);
    let tag = rng::tag(&[0x7375_6273, n as u64]);
    for t in 0..opts.subsample_trials {
        let mut r = rng::stream(opts.seed, tag, t as u64);
        let mut idx = index::sample(&mut r, n, keep).into_vec();
        idx.sort_unstable();
        let sub: Vec<f64> = idx
            .iter()
            .flat_map(|&i| coords[i * dim..(i + 1) * dim].iter().copied())
            .collect();
        let sub_net = greedy_net(&sub, dim, net.spacing);
        let trial = scan_scales(&sub_net, dim, &scales, &opts.scan)?;
        est.subsample.push(trial.plateau.map(|p| trial.scan[p.start].chi));
    }
    if est.is_stable() && est.subsample.iter().any(|c| *c != Some(est.chi)) {
        est.confidence = Confidence::Unstable;
        est.notes.push(format!(
            "subsample plateaus {:?} disagree with χ = {}",
            est.subsample, est.chi
        ));
    }
    Ok(est)
}

/// Static line chart of χ against log-scale, plateau shaded.
pub fn scan_svg(est: &ChiEstimate, title: &str) -> String {
    let (w, h, pad) = (640.0, 320.0, 48.0);
    let usable: Vec<&ComplexStats> = est.scan.iter().filter(|s| s.valid).collect();
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{pad}\" y=\"20\">{}</text>\n",
        xml_escape(title)
    );
    if est.scan.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let lx = |r: f64| r.ln();
    let (x0, x1) = (lx(est.scan[0].scale), lx(est.scan[est.scan.len() - 1].scale));
    let (mut c0, mut c1) = (est.chi, est.chi);
    for s in &usable {
        c0 = c0.min(s.chi);
        c1 = c1.max(s.chi);
    }
    let c1 = if c1 == c0 { c0 + 1 } else { c1 };
    let px = |r: f64| pad + (lx(r) - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
    let py = |c: i64| h - pad - (c - c0) as f64 / (c1 - c0) as f64 * (h - 2.0 * pad);
    if let Some(p) = &est.plateau {
        let (a, b) = (px(p.r_min), px(p.r_max));
        out.push_str(&format!(
            "<rect x=\"{a:.1}\" y=\"{pad}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#dde8f6\"/>\n",
            (b - a).max(2.0),
            h - 2.0 * pad
        ));
    }
    out.push_str(&format!(
        "<line x1=\"{pad}\" y1=\"{y}\" x2=\"{x}\" y2=\"{y}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{y}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{ty}\" text-anchor=\"middle\">log scale</text>\n",
        y = h - pad,
        x = w - pad,
        cx = w / 2.0,
        ty = h - 12.0
    ));
    for c in c0..=c1 {
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{c}</text>\n",
            pad - 6.0,
            py(c) + 4.0
        ));
    }
    let pts: Vec<String> = usable
        .iter()
        .map(|s| format!("{:.1},{:.1}", px(s.scale), py(s.chi)))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1.5\"/>\n",
        pts.join(" ")
    ));
    for s in &usable {
        let fill = if s.saturated { "#999999" } else { "#1f4e8c" };
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{fill}\"/>\n",
            px(s.scale),
            py(s.chi)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(chi: i64, usable: bool) -> ComplexStats {
        ComplexStats {
            scale: 1.0,
            counts: vec![],
            chi,
            raw_vertices: 0,
            raw_edges: 0,
            components: 0,
            valid: usable,
            saturated: false,
            note: None,
        }
    }

    #[test]
    fn plateau_rules() {
        let scan: Vec<_> = [(1, true), (1, true), (0, true), (0, true), (0, false), (2, true), (2, true)]
            .iter()
            .enumerate()
            .map(|(i, &(c, u))| ComplexStats { scale: 1.0 + i as f64, ..stats(c, u) })
            .collect();
        let p = find_plateau(&scan).unwrap();
        // Three runs of length 2: the earliest wins.
        assert_eq!((p.start, p.length), (0, 2));
        assert_eq!(find_plateau(&[stats(0, false)]), None);
    }

    #[test]
    fn ladder_is_geometric() {
        let l = Ladder { base: LadderBase::Absolute(0.1), ..Ladder::default() };
        let s = l.resolve(&[], 2, None).unwrap();
        assert_eq!(s.len(), 40);
        assert!((s[0] - 0.2).abs() < 1e-12 && (s[39] - 3.0).abs() < 1e-9);
        let short = Ladder { scales: 14, ..l };
        assert!(short.resolve(&[], 2, None).is_err());
    }
}
