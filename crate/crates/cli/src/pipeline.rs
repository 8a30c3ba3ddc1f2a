//! Measurement runs compared against the closed forms.

use std::f64::consts::TAU;

use anyhow::{bail, Context, Result};
use milnor_core::estimator::{estimate_stage, Confidence, StageEstimate, StageParams};
use milnor_core::formulas::{build_stage_report, StageReport};
use milnor_core::germ::rank::RankTolerance;
use milnor_core::sampler::{choose_radii, tameness_evidence, Radii, TamenessReport, TargetKind};
use milnor_core::MapGerm;
use serde::{Deserialize, Serialize};

pub const VERDICT_SCHEMA: &str = "milnor-verdict/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Unstable,
    Fail,
}

impl Verdict {
    /// The worse of two verdicts: FAIL over UNSTABLE over PASS.
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Unstable => 3,
            Verdict::Fail => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Unstable => "UNSTABLE",
            Verdict::Fail => "FAIL",
        }
    }

    fn compare(estimate: &StageEstimate, expected: i64) -> Verdict {
        if estimate.estimate.confidence == Confidence::Unstable {
            Verdict::Unstable
        } else if estimate.estimate.chi == expected {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub stage: usize,
    pub kind: TargetKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    /// `None` lets the radius probe pick ε.
    pub epsilon: Option<f64>,
    pub points: usize,
    pub seed: u64,
}

impl RunParams {
    fn stage_params(&self, radii: Radii) -> StageParams {
        let mut p = StageParams::new(radii, self.seed);
        p.points = self.points;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiSource {
    Catalog,
    Given,
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    #[serde(rename = "I")]
    pub stage: usize,
    pub kind: TargetKind,
    pub expected: i64,
    pub measured: i64,
    pub confidence: Confidence,
    pub components: Option<usize>,
    pub verdict: Verdict,
    pub estimate: StageEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbResult {
    pub expected: i64,
    pub measured: i64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageResult {
    pub theta: Vec<f64>,
    pub chi: i64,
    pub confidence: Confidence,
    pub estimate: StageEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenbookReport {
    #[serde(rename = "I")]
    pub stage: usize,
    pub pages: Vec<PageResult>,
    pub all_equal: bool,
    #[serde(rename = "chiF")]
    pub chi_f: i64,
    pub matches_chi_f: bool,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamenessCheck {
    pub expect_tame: bool,
    pub clean: bool,
    pub verdict: Verdict,
    pub evidence: TamenessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub germ: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "chiF")]
    pub chi_f: i64,
    pub chi_f_source: ChiSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_f_estimate: Option<StageEstimate>,
    pub radii: Radii,
    pub params: RunParams,
    pub expected: StageReport,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub db: Option<DbResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub openbook: Option<OpenbookReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tameness: Option<TamenessCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub verdict: Verdict,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    /// One row per check plus DB and page rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["I", "kind", "expected", "measured", "confidence", "verdict"])?;
        for c in &self.checks {
            w.write_record([
                c.stage.to_string(),
                c.kind.name().to_string(),
                c.expected.to_string(),
                c.measured.to_string(),
                confidence_str(c.confidence).to_string(),
                c.verdict.as_str().to_string(),
            ])?;
        }
        if let Some(db) = &self.db {
            w.write_record(["1", "db", &db.expected.to_string(), &db.measured.to_string(), "", db.verdict.as_str()])?;
        }
        if let Some(ob) = &self.openbook {
            for p in &ob.pages {
                w.write_record([
                    ob.stage.to_string(),
                    "page".to_string(),
                    ob.chi_f.to_string(),
                    p.chi.to_string(),
                    confidence_str(p.confidence).to_string(),
                    String::new(),
                ])?;
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn confidence_str(c: Confidence) -> &'static str {
    match c {
        Confidence::Stable => "stable",
        Confidence::Unstable => "unstable",
    }
}

/// Radius for all requested stages: the smallest ε the probe accepts.
pub fn resolve_radii(f: &MapGerm, stages: &[usize], params: &RunParams) -> Result<Radii> {
    if let Some(eps) = params.epsilon {
        let radii = Radii::from_epsilon(eps);
        radii.validate()?;
        return Ok(radii);
    }
    let mut best: Option<Radii> = None;
    for &stage in stages {
        let report = choose_radii(f, stage, 4000, params.seed, RankTolerance::default())
            .with_context(|| format!("choosing radii at stage {stage}"))?;
        if best.is_none_or(|b| report.radii.epsilon < b.epsilon) {
            best = Some(report.radii);
        }
    }
    best.context("no stage to choose radii for")
}

fn expected_value(report: &StageReport, check: Check) -> i64 {
    let row = report.row(check.stage as i64).expect("stage in range");
    match check.kind {
        TargetKind::Fiber => row.chi_fiber,
        TargetKind::Boundary => row.chi_boundary,
        TargetKind::Link => row.chi_link,
        TargetKind::Page => report.chi_f,
    }
}

pub struct VerifyRequest<'a> {
    pub germ: &'a MapGerm,
    pub label: String,
    pub checks: Vec<Check>,
    pub chi_f: Option<(i64, ChiSource)>,
    pub params: RunParams,
    pub openbook: Option<(usize, usize)>,
    pub expect_tame: Option<bool>,
    pub tameness_starts: usize,
    pub skipped: Option<String>,
}

/// Measures every check, bootstrapping χ(F_f) from the stage-K fibre when it
/// is not supplied.
pub fn verify(req: &VerifyRequest) -> Result<VerifyReport> {
    let f = req.germ;
    let (m, k) = (f.source_dim(), f.target_dim());
    for c in &req.checks {
        if c.stage == 0 || c.stage > k {
            bail!("stage {} outside 1..={k}", c.stage);
        }
        if c.kind == TargetKind::Page {
            bail!("pages are measured by the openbook command");
        }
    }
    let mut stages: Vec<usize> = req.checks.iter().map(|c| c.stage).collect();
    stages.push(k);
    if let Some((s, _)) = req.openbook {
        stages.push(s);
    }
    stages.sort_unstable();
    stages.dedup();
    let radii = resolve_radii(f, &stages, &req.params)?;
    let sp = req.params.stage_params(radii);

    let (chi_f, chi_f_source, chi_f_estimate) = match req.chi_f {
        Some((c, src)) => (c, src, None),
        None => {
            let est = estimate_stage(f, k, TargetKind::Fiber, &sp)?;
            (est.estimate.chi, ChiSource::Measured, Some(est))
        }
    };
    let expected = build_stage_report(m as i64, k as i64, chi_f)?;
    let mut verdict = match &chi_f_estimate {
        Some(e) if !e.estimate.is_stable() => Verdict::Unstable,
        _ => Verdict::Pass,
    };

    let mut checks = Vec::with_capacity(req.checks.len());
    for &check in &req.checks {
        let estimate = estimate_stage(f, check.stage, check.kind, &sp)?;
        let want = expected_value(&expected, check);
        let v = Verdict::compare(&estimate, want);
        verdict = verdict.and(v);
        checks.push(CheckResult {
            stage: check.stage,
            kind: check.kind,
            expected: want,
            measured: estimate.estimate.chi,
            confidence: estimate.estimate.confidence,
            components: estimate.estimate.plateau_components(),
            verdict: v,
            estimate,
        });
    }

    let find = |kind| checks.iter().find(|c| c.stage == 1 && c.kind == kind);
    let db = match (find(TargetKind::Boundary), find(TargetKind::Link)) {
        (Some(b), Some(l)) => {
            let measured = b.measured - l.measured;
            let v = if b.verdict == Verdict::Unstable || l.verdict == Verdict::Unstable {
                Verdict::Unstable
            } else if measured == expected.db {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            verdict = verdict.and(v);
            Some(DbResult { expected: expected.db, measured, verdict: v })
        }
        _ => None,
    };

    let openbook = match req.openbook {
        Some((stage, angles)) => {
            let ob = openbook_pages(f, stage, angles, chi_f, &sp)?;
            verdict = verdict.and(ob.verdict);
            Some(ob)
        }
        None => None,
    };

    let tameness = match req.expect_tame {
        Some(expect_tame) => {
            let evidence = tameness_evidence(f, &radii, req.tameness_starts, req.params.seed)?;
            let clean = evidence.is_clean();
            let v = if clean == expect_tame { Verdict::Pass } else { Verdict::Fail };
            verdict = verdict.and(v);
            Some(TamenessCheck { expect_tame, clean, verdict: v, evidence })
        }
        None => None,
    };

    Ok(VerifyReport {
        schema: VERDICT_SCHEMA.to_string(),
        germ: req.label.clone(),
        m,
        k,
        chi_f,
        chi_f_source,
        chi_f_estimate,
        radii,
        params: req.params.clone(),
        expected,
        checks,
        db,
        openbook,
        tameness,
        skipped: req.skipped.clone(),
        verdict,
    })
}

/// Page directions: both signs when `K - I = 1`, otherwise `angles` points
/// on the unit circle of the first two coordinates.
pub fn page_directions(codim: usize, angles: usize) -> Vec<Vec<f64>> {
    if codim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    (0..angles)
        .map(|j| {
            let a = TAU * j as f64 / angles as f64;
            let mut t = vec![0.0; codim];
            t[0] = a.cos();
            t[1] = a.sin();
            t
        })
        .collect()
}

/// Estimates χ of the pages at `stage`. Pages must agree with each other;
/// agreement with χ(F_f) is reported separately.
pub fn openbook_pages(
    f: &MapGerm,
    stage: usize,
    angles: usize,
    chi_f: i64,
    sp: &StageParams,
) -> Result<OpenbookReport> {
    let k = f.target_dim();
    if angles == 0 {
        bail!("the number of page angles must be positive");
    }
    if stage == 0 || stage >= k {
        bail!("open-book pages need 1 ≤ I < K, got I = {stage}, K = {k}");
    }
    let codim = k - stage;
    let mut notes = Vec::new();
    if codim == 1 && angles != 2 {
        notes.push("K − I = 1: the two pages are the sign halves".to_string());
    }
    let mut pages = Vec::new();
    for theta in page_directions(codim, angles) {
        let mut p = sp.clone();
        p.theta = Some(theta.clone());
        let estimate = estimate_stage(f, stage, TargetKind::Page, &p)?;
        pages.push(PageResult {
            theta,
            chi: estimate.estimate.chi,
            confidence: estimate.estimate.confidence,
            estimate,
        });
    }
    let all_equal = pages.windows(2).all(|w| w[0].chi == w[1].chi);
    let matches_chi_f = all_equal && pages[0].chi == chi_f;
    let verdict = if pages.iter().any(|p| p.confidence == Confidence::Unstable) {
        Verdict::Unstable
    } else if all_equal {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(OpenbookReport {
        stage,
        pages,
        all_equal,
        chi_f,
        matches_chi_f,
        verdict,
        notes,
    })
}
