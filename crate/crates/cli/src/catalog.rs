//! Built-in germs with known χ(F_f) and the checks run against them.

use std::sync::OnceLock;

use anyhow::{anyhow, Context, Result};
use milnor_core::formulas::{build_stage_report, StageReport};
use milnor_core::germ::parse_germ;
use milnor_core::sampler::TargetKind;
use milnor_core::MapGerm;
use serde::{Deserialize, Serialize};

use crate::pipeline::Check;

const INDEX: &str = include_str!("../catalog/catalog.toml");

const GERMS: &[(&str, &str)] = &[
    ("linear-3-2.toml", include_str!("../catalog/linear-3-2.toml")),
    ("linear-4-3.toml", include_str!("../catalog/linear-4-3.toml")),
    ("zw-4-2.toml", include_str!("../catalog/zw-4-2.toml")),
    ("zwbar-4-2.toml", include_str!("../catalog/zwbar-4-2.toml")),
    ("isolated-odd.toml", include_str!("../catalog/isolated-odd.toml")),
    ("ramified-t2.toml", include_str!("../catalog/ramified-t2.toml")),
    ("nontame-demo.toml", include_str!("../catalog/nontame-demo.toml")),
    ("icis-6-4.toml", include_str!("../catalog/icis-6-4.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// 0 selects every stage.
    pub stage: usize,
    pub kinds: Vec<TargetKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenbookSpec {
    pub stage: usize,
    pub angles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub name: String,
    pub germ: String,
    pub chi_f: i64,
    pub chi_f_note: String,
    pub tags: Vec<String>,
    pub epsilon: f64,
    pub points: usize,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub openbook: Option<OpenbookSpec>,
    #[serde(default)]
    pub skipped: Option<String>,
    #[serde(default)]
    pub expect_tame: Option<bool>,
}

#[derive(Deserialize)]
struct Index {
    entry: Vec<CatalogEntry>,
}

pub fn entries() -> &'static [CatalogEntry] {
    static ENTRIES: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        toml::from_str::<Index>(INDEX)
            .expect("built-in catalog index parses")
            .entry
    })
}

pub fn find(name: &str) -> Result<&'static CatalogEntry> {
    entries().iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = entries().iter().map(|e| e.name.as_str()).collect();
        anyhow!("unknown catalog entry '{name}' (known: {})", names.join(", "))
    })
}

impl CatalogEntry {
    pub fn germ_source(&self) -> &'static str {
        GERMS
            .iter()
            .find(|(file, _)| *file == self.germ)
            .map(|(_, text)| *text)
            .unwrap_or_else(|| panic!("catalog germ file {} is not embedded", self.germ))
    }

    pub fn map_germ(&self) -> Result<MapGerm> {
        parse_germ(self.germ_source()).with_context(|| format!("catalog germ {}", self.germ))
    }

    pub fn expected(&self, k: usize) -> Result<StageReport> {
        let m = self.map_germ()?.source_dim();
        Ok(build_stage_report(m as i64, k as i64, self.chi_f)?)
    }

    pub fn checks(&self, k: usize) -> Vec<Check> {
        let mut out = Vec::new();
        for check in &self.checks {
            let stages = if check.stage == 0 { 1..=k } else { check.stage..=check.stage };
            for stage in stages {
                for &kind in &check.kinds {
                    out.push(Check { stage, kind });
                }
            }
        }
        out.sort_by_key(|c| (c.stage, c.kind.code()));
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses_and_has_a_report() {
        let mut names = std::collections::BTreeSet::new();
        for e in entries() {
            assert!(names.insert(e.name.clone()), "duplicate {}", e.name);
            let f = e.map_germ().unwrap();
            assert_eq!(f.name.as_deref(), Some(e.name.as_str()));
            let r = e.expected(f.target_dim()).unwrap();
            assert_eq!(r, build_stage_report(f.source_dim() as i64, f.target_dim() as i64, e.chi_f).unwrap());
            assert!(e.checks(f.target_dim()).iter().all(|c| c.stage >= 1 && c.stage <= f.target_dim()));
        }
        assert_eq!(names.len(), GERMS.len());
    }

    #[test]
    fn required_entries_present() {
        for name in ["linear-3-2", "zw-4-2", "zwbar-4-2", "ramified-t2", "isolated-odd", "nontame-demo"] {
            find(name).unwrap();
        }
        assert!(find("nope").is_err());
    }
}
