//! Closed-form Euler characteristics of the stage fibres, boundaries and
//! links, given `(M, K, χ(F_f))`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{self, sphere_chi, CHI_BF, CHI_F};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("hypothesis M>K≥2 violated (M={m}, K={k})")]
    Hypothesis { m: i64, k: i64 },
    #[error("stage I={i} out of range {lo}..={hi}")]
    StageRange { i: i64, lo: i64, hi: i64 },
    #[error("requires odd M, got M={m}")]
    EvenSource { m: i64 },
    #[error("internal invariant breach: {0}")]
    InvariantBreach(String),
}

fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn check_hypothesis(m: i64, k: i64) -> Result<(), FormulaError> {
    if m > k && k >= 2 {
        Ok(())
    } else {
        Err(FormulaError::Hypothesis { m, k })
    }
}

fn check_stage(i: i64, lo: i64, hi: i64) -> Result<(), FormulaError> {
    if (lo..=hi).contains(&i) {
        Ok(())
    } else {
        Err(FormulaError::StageRange { i, lo, hi })
    }
}

/// `χ(∂F_f)`: 0 if `M-K` is even, `2χ(F_f)` otherwise.
pub fn chi_boundary_f(m: i64, k: i64, chi_f: i64) -> Result<i64, FormulaError> {
    check_hypothesis(m, k)?;
    Ok(if (m - k) % 2 == 0 { 0 } else { 2 * chi_f })
}

/// `χ(∂F_I) = χ(F_f)·χ(S^{M-I-1})`.
pub fn chi_boundary(m: i64, k: i64, i: i64, chi_f: i64) -> Result<i64, FormulaError> {
    check_hypothesis(m, k)?;
    check_stage(i, 1, k)?;
    Ok(chi_f * (1 + sign(m - i - 1)))
}

/// The same value computed through the parity of `M-K`:
/// `χ(F_f)·χ(S^{K-I-1})` when `M-K` is even, `χ(F_f)·χ(S^{K-I})` when odd.
pub fn chi_boundary_by_parity(m: i64, k: i64, i: i64, chi_f: i64) -> Result<i64, FormulaError> {
    check_hypothesis(m, k)?;
    check_stage(i, 1, k)?;
    let n = if (m - k) % 2 == 0 { k - i - 1 } else { k - i };
    Ok(chi_f * sphere_chi(n as i32))
}

/// `χ(∂F_{I+1}) - χ(∂F_I) = 2(-1)^{M-I}χ(F_f)`.
pub fn le_greuel_boundary(m: i64, k: i64, i: i64, chi_f: i64) -> Result<i64, FormulaError> {
    check_hypothesis(m, k)?;
    check_stage(i, 1, k - 1)?;
    let v = 2 * sign(m - i) * chi_f;
    let diff = chi_boundary(m, k, i + 1, chi_f)? - chi_boundary(m, k, i, chi_f)?;
    if v != diff {
        return Err(FormulaError::InvariantBreach(format!(
            "boundary difference {diff} != {v} at M={m} K={k} I={i}"
        )));
    }
    Ok(v)
}

/// `χ(L_I) = χ(S^{M-1}) + (-1)^{M-I-1}χ(F_f)χ(S^{I-1})`.
pub fn chi_link(m: i64, k: i64, i: i64, chi_f: i64) -> Result<i64, FormulaError> {
    check_hypothesis(m, k)?;
    check_stage(i, 1, k)?;
    Ok((1 + sign(m - 1)) + sign(m - i - 1) * chi_f * (1 + sign(i - 1)))
}

/// `χ(L_{I+1}) - χ(L_I) = 2(-1)^{M-I}χ(F_f)`.
pub fn le_greuel_link(m: i64, k: i64, i: i64, chi_f: i64) -> Result<i64, FormulaError> {
    check_hypothesis(m, k)?;
    check_stage(i, 1, k - 1)?;
    let v = 2 * sign(m - i) * chi_f;
    let diff = chi_link(m, k, i + 1, chi_f)? - chi_link(m, k, i, chi_f)?;
    if v != diff {
        return Err(FormulaError::InvariantBreach(format!(
            "link difference {diff} != {v} at M={m} K={k} I={i}"
        )));
    }
    Ok(v)
}

/// `DB(f) = χ(∂F_1) - χ(L_1)`; the same difference at every stage.
pub fn db_invariant(m: i64, k: i64, chi_f: i64) -> Result<i64, FormulaError> {
    let db = chi_boundary(m, k, 1, chi_f)? - chi_link(m, k, 1, chi_f)?;
    for i in 2..=k {
        let d = chi_boundary(m, k, i, chi_f)? - chi_link(m, k, i, chi_f)?;
        if d != db {
            return Err(FormulaError::InvariantBreach(format!(
                "boundary-link difference {d} at I={i} differs from DB={db}"
            )));
        }
    }
    Ok(db)
}

/// Whether `χ(∂F_I) = χ(L_I)`; for odd `M` and `I ≥ 2` this holds exactly
/// when `χ(F_f) = 1`, at every stage.
pub fn carac2_predicate(m: i64, k: i64, i: i64, chi_f: i64) -> Result<bool, FormulaError> {
    check_hypothesis(m, k)?;
    if m % 2 == 0 {
        return Err(FormulaError::EvenSource { m });
    }
    check_stage(i, 2, k)?;
    let holds = chi_boundary(m, k, i, chi_f)? == chi_link(m, k, i, chi_f)?;
    if holds != (chi_f == 1) {
        return Err(FormulaError::InvariantBreach(format!(
            "boundary=link is {holds} with chi_F={chi_f} at M={m} K={k} I={i}"
        )));
    }
    for j in 2..=k {
        if (chi_boundary(m, k, j, chi_f)? == chi_link(m, k, j, chi_f)?) != holds {
            return Err(FormulaError::InvariantBreach(format!(
                "boundary=link depends on the stage at M={m} K={k}"
            )));
        }
    }
    Ok(holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityClass {
    EvenM,
    OddM,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRow {
    #[serde(rename = "I")]
    pub stage: i64,
    pub chi_fiber: i64,
    pub chi_boundary: i64,
    pub chi_link: i64,
    pub boundary_minus_link: i64,
}

/// Every closed-form value for one `(M, K, χ(F_f))`, stages `1..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "K")]
    pub k: i64,
    #[serde(rename = "chiF")]
    pub chi_f: i64,
    pub chi_boundary_f: i64,
    pub stages: Vec<StageRow>,
    pub db: i64,
    pub parity_class: ParityClass,
}

impl StageReport {
    pub fn row(&self, i: i64) -> Option<&StageRow> {
        self.stages.iter().find(|r| r.stage == i)
    }

    pub fn boundaries(&self) -> Vec<i64> {
        self.stages.iter().map(|r| r.chi_boundary).collect()
    }

    pub fn links(&self) -> Vec<i64> {
        self.stages.iter().map(|r| r.chi_link).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One row per stage: `I,chi_fiber,chi_boundary,chi_link,boundary_minus_link`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.stages {
            w.serialize(row).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn from_csv_rows(text: &str) -> Result<Vec<StageRow>, csv::Error> {
        csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
    }
}

fn breach(msg: String) -> FormulaError {
    FormulaError::InvariantBreach(msg)
}

/// Builds the report and checks every cross-consistency relation, failing
/// on any breach.
pub fn build_stage_report(m: i64, k: i64, chi_f: i64) -> Result<StageReport, FormulaError> {
    check_hypothesis(m, k)?;
    let bf = chi_boundary_f(m, k, chi_f)?;
    let mut stages = Vec::with_capacity(k as usize);
    for i in 1..=k {
        let b = chi_boundary(m, k, i, chi_f)?;
        let l = chi_link(m, k, i, chi_f)?;
        stages.push(StageRow {
            stage: i,
            chi_fiber: chi_f,
            chi_boundary: b,
            chi_link: l,
            boundary_minus_link: b - l,
        });
    }
    let db = db_invariant(m, k, chi_f)?;
    let report = StageReport {
        m,
        k,
        chi_f,
        chi_boundary_f: bf,
        stages,
        db,
        parity_class: if m % 2 == 0 { ParityClass::EvenM } else { ParityClass::OddM },
    };
    check_report(&report)?;
    Ok(report)
}

fn check_report(r: &StageReport) -> Result<(), FormulaError> {
    let (m, k, chi_f) = (r.m, r.k, r.chi_f);
    if r.row(k).map(|row| row.chi_boundary) != Some(r.chi_boundary_f) {
        return Err(breach(format!("∂F_K differs from ∂F_f at M={m} K={k}")));
    }
    for row in &r.stages {
        let i = row.stage;
        if row.chi_boundary != chi_boundary_by_parity(m, k, i, chi_f)? {
            return Err(breach(format!("parity form disagrees at I={i}")));
        }
        if row.chi_boundary != symbolic_boundary(m, k, i, chi_f)? {
            return Err(breach(format!("decomposition route disagrees at I={i}")));
        }
        if tube_sphere_total(m, k, i, chi_f)? != sphere_chi((m - 1) as i32) {
            return Err(breach(format!("tube/sphere gluing fails at I={i}")));
        }
        if m % 2 == 0 && row.chi_boundary != row.chi_link {
            return Err(breach(format!("even M but boundary != link at I={i}")));
        }
        if i + 2 <= k {
            let next = r.row(i + 2).expect("row present");
            if next.chi_boundary != row.chi_boundary || next.chi_link != row.chi_link {
                return Err(breach(format!("period-2 fails at I={i}")));
            }
        }
        if i < k {
            let lb = le_greuel_boundary(m, k, i, chi_f)?;
            let ll = le_greuel_link(m, k, i, chi_f)?;
            if lb != ll {
                return Err(breach(format!("differences of boundaries and links disagree at I={i}")));
            }
            // ∂F_I is the double of F_{I+1}.
            let next = r.row(i + 1).expect("row present");
            if 2 * next.chi_fiber - next.chi_boundary != row.chi_boundary {
                return Err(breach(format!("doubling fails at I={i}")));
            }
        }
    }
    Ok(())
}

/// `χ(∂F_I)` through the decomposition `(∂F_f × D^{K-I}) ∪ (F_f × S^{K-I-1})`.
pub fn symbolic_boundary(m: i64, k: i64, i: i64, chi_f: i64) -> Result<i64, FormulaError> {
    let e = space::boundary_decomposition(m, k, i).map_err(space_err)?;
    let bf = chi_boundary_f(m, k, chi_f)?;
    let v = space::chi(&e).substitute_all(&[(CHI_F, chi_f), (CHI_BF, bf)]);
    v.as_integer()
        .ok_or_else(|| breach(format!("unsubstituted symbols in {v}")))
}

/// `χ(F_I×S^{I-1}) + χ(L_I) - χ(∂F_I×S^{I-1})` with closed forms substituted.
pub fn tube_sphere_total(m: i64, k: i64, i: i64, chi_f: i64) -> Result<i64, FormulaError> {
    let e = space::tube_sphere_decomposition(m, k, i).map_err(space_err)?;
    let (sf, sbf) = space::stage_symbols(i);
    let v = space::chi(&e).substitute_all(&[
        (&sf, chi_f),
        (&sbf, chi_boundary(m, k, i, chi_f)?),
        (&space::link_symbol(i), chi_link(m, k, i, chi_f)?),
    ]);
    v.as_integer()
        .ok_or_else(|| breach(format!("unsubstituted symbols in {v}")))
}

fn space_err(e: space::SpaceError) -> FormulaError {
    match e {
        space::SpaceError::Hypothesis { m, k } => FormulaError::Hypothesis { m, k },
        space::SpaceError::StageRange { i, lo, hi } => FormulaError::StageRange { i, lo, hi },
    }
}
