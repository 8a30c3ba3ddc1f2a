//! Argument parsing and command dispatch.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use milnor_core::estimator::{estimate_stage, scan_svg};
use milnor_core::formulas::build_stage_report;
use milnor_core::germ::parse_germ;
use milnor_core::sampler::{
    sample_boundary, sample_fiber, sample_link, sample_openbook_page, tameness_evidence,
    SamplerConfig, TargetKind,
};
use milnor_core::MapGerm;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog;
use crate::pipeline::{
    confidence_str, openbook_pages, resolve_radii, verify, Check, ChiSource, RunParams, Verdict,
    VerifyReport, VerifyRequest,
};

/// Exit code for usage errors and violated hypotheses.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "milnor",
    version,
    about = "Euler characteristics of Milnor fibres, boundaries and links: closed forms and sampled estimates"
)]
pub struct Cli {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for reports, clouds and run records.
    #[arg(long, global = true, env = "MILNOR_OUT_DIR", default_value = "milnor-out")]
    pub out_dir: PathBuf,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Fiber,
    Boundary,
    Link,
    Page,
}

impl From<Kind> for TargetKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Fiber => TargetKind::Fiber,
            Kind::Boundary => TargetKind::Boundary,
            Kind::Link => TargetKind::Link,
            Kind::Page => TargetKind::Page,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sampling {
    /// Ball radius ε; η = ε/20. Chosen by the rank probe when omitted.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Points sampled per target.
    #[arg(long, default_value_t = 4000)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form χ of ∂F_I, L_I and F_I at every stage, and DB(f).
    Formulas {
        #[arg(long)]
        m: i64,
        #[arg(long)]
        k: i64,
        #[arg(long = "chi-f", allow_negative_numbers = true)]
        chi_f: i64,
    },
    /// Sample and estimate χ at one or all stages and compare to the closed forms.
    Verify {
        /// Germ file (TOML).
        germ: PathBuf,
        /// Stage I; every stage when omitted.
        #[arg(long)]
        stage: Option<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Kind::Fiber, Kind::Boundary, Kind::Link])]
        kinds: Vec<Kind>,
        /// χ(F_f); measured on the stage-K fibre when omitted.
        #[arg(long = "chi-f", allow_negative_numbers = true)]
        chi_f: Option<i64>,
        #[command(flatten)]
        sampling: Sampling,
        /// Also write an SVG chart of each scan.
        #[arg(long)]
        svg: bool,
    },
    /// Estimate χ of open-book pages of ∂F_I over several directions.
    Openbook {
        germ: PathBuf,
        #[arg(long)]
        stage: usize,
        #[arg(long, default_value_t = 8)]
        angles: usize,
        #[arg(long = "chi-f", allow_negative_numbers = true)]
        chi_f: Option<i64>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Search the ball for critical points off V(f) and check the rank diagram.
    Tameness {
        germ: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        starts: usize,
    },
    /// List or run the built-in germ catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Export a raw point cloud (.csv with --format csv, binary .mpcl otherwise).
    Sample {
        germ: PathBuf,
        #[arg(long)]
        stage: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Page direction in R^(K−I), comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta: Option<Vec<f64>>,
        #[command(flatten)]
        sampling: Sampling,
        /// Output file; defaults to a name in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// Print the entries.
    List,
    /// Run one entry, or all of them with --all.
    Run {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        #[arg(long)]
        svg: bool,
    },
}

/// Everything needed to replay a run, plus when it happened.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub schema: &'static str,
    pub version: &'static str,
    pub argv: Vec<String>,
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub threads: Option<usize>,
    pub format: Format,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub exit_code: i32,
}

fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

struct Session<'a> {
    cli: &'a Cli,
    outputs: Vec<String>,
    verdicts: BTreeMap<String, Verdict>,
}

impl Session<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.cli.out_dir)
            .with_context(|| format!("creating {}", self.cli.out_dir.display()))?;
        let path = self.cli.out_dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    fn write_report(&mut self, stem: &str, report: &VerifyReport, svg: bool) -> Result<()> {
        let text = match self.cli.format {
            Format::Json => report.to_json(),
            Format::Csv => report.to_csv()?,
        };
        let path = self.write(&format!("{stem}.{}", self.cli.format.ext()), &text)?;
        println!("{} {}: {}", report.verdict.as_str(), report.germ, path.display());
        if svg {
            for c in &report.checks {
                let title = format!("{} I={} {}", report.germ, c.stage, c.kind.name());
                let name = format!("{stem}-I{}-{}.svg", c.stage, c.kind.name());
                self.write(&name, &scan_svg(&c.estimate.estimate, &title))?;
            }
        }
        self.verdicts.insert(stem.to_string(), report.verdict);
        Ok(())
    }
}

fn load_germ(path: &Path) -> Result<MapGerm> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_germ(&text).with_context(|| format!("parsing {}", path.display()))
}

fn germ_label(f: &MapGerm, path: &Path) -> String {
    f.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "germ".into())
    })
}

fn print_report(report: &VerifyReport) {
    println!("{} (M={}, K={}, chiF={})", report.germ, report.m, report.k, report.chi_f);
    for c in &report.checks {
        println!(
            "  I={} {:<8} expected {:>3}  measured {:>3}  {:<8} {}",
            c.stage,
            c.kind.name(),
            c.expected,
            c.measured,
            confidence_str(c.confidence),
            c.verdict.as_str()
        );
    }
    if let Some(db) = &report.db {
        println!("  DB          expected {:>3}  measured {:>3}           {}", db.expected, db.measured, db.verdict.as_str());
    }
    if let Some(ob) = &report.openbook {
        let chis: Vec<String> = ob.pages.iter().map(|p| p.chi.to_string()).collect();
        println!("  pages at I={}: [{}] {}", ob.stage, chis.join(", "), ob.verdict.as_str());
    }
    if let Some(t) = &report.tameness {
        println!(
            "  tameness: {} hits, expected {} {}",
            t.evidence.hits.len(),
            if t.expect_tame { "tame" } else { "not tame" },
            t.verdict.as_str()
        );
    }
}

fn run_catalog_entry(entry: &catalog::CatalogEntry, seed: u64) -> Result<VerifyReport> {
    let f = entry.map_germ()?;
    let k = f.target_dim();
    verify(&VerifyRequest {
        germ: &f,
        label: entry.name.clone(),
        checks: entry.checks(k),
        chi_f: Some((entry.chi_f, ChiSource::Catalog)),
        params: RunParams { epsilon: Some(entry.epsilon), points: entry.points, seed },
        openbook: entry.openbook.as_ref().map(|o| (o.stage, o.angles)),
        expect_tame: entry.expect_tame,
        tameness_starts: 1000,
        skipped: entry.skipped.clone(),
    })
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<i32> {
    if let Some(n) = cli.threads {
        // A pool may already exist when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let started = now_unix();
    let mut s = Session { cli, outputs: Vec::new(), verdicts: BTreeMap::new() };
    let (name, params, code) = dispatch(cli, &mut s)?;
    let record = RunRecord {
        schema: "milnor-run/1",
        version: env!("CARGO_PKG_VERSION"),
        argv,
        command: name.clone(),
        params,
        seed: cli.seed,
        threads: cli.threads,
        format: cli.format,
        started_unix: started,
        finished_unix: now_unix(),
        outputs: s.outputs.clone(),
        verdicts: s.verdicts.clone(),
        exit_code: code,
    };
    let text = serde_json::to_string_pretty(&record)? + "\n";
    if !s.outputs.is_empty() {
        s.write(&format!("{name}.run.json"), &text)?;
    }
    Ok(code)
}

fn dispatch(cli: &Cli, s: &mut Session) -> Result<(String, serde_json::Value, i32)> {
    let seed = cli.seed;
    match &cli.command {
        Command::Formulas { m, k, chi_f } => {
            let report = build_stage_report(*m, *k, *chi_f)?;
            let text = match cli.format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
            };
            let stem = format!("formulas-m{m}-k{k}-chi{chi_f}");
            s.write(&format!("{stem}.{}", cli.format.ext()), &text)?;
            println!("M={m} K={k} chiF={chi_f} chi_bF={} ({:?})", report.chi_boundary_f, report.parity_class);
            println!("  I  chi_F_I  chi_bF_I  chi_L_I");
            for r in &report.stages {
                println!("{:>3}  {:>7}  {:>8}  {:>7}", r.stage, r.chi_fiber, r.chi_boundary, r.chi_link);
            }
            println!("DB = {}", report.db);
            let params = serde_json::json!({ "m": m, "k": k, "chi_f": chi_f });
            Ok((stem, params, 0))
        }
        Command::Verify { germ, stage, kinds, chi_f, sampling, svg } => {
            let f = load_germ(germ)?;
            let label = germ_label(&f, germ);
            let stages: Vec<usize> = match stage {
                Some(i) => vec![*i],
                None => (1..=f.target_dim()).collect(),
            };
            let checks = stages
                .iter()
                .flat_map(|&st| kinds.iter().map(move |&kd| Check { stage: st, kind: kd.into() }))
                .collect();
            let report = verify(&VerifyRequest {
                germ: &f,
                label: label.clone(),
                checks,
                chi_f: chi_f.map(|c| (c, ChiSource::Given)),
                params: RunParams { epsilon: sampling.epsilon, points: sampling.points, seed },
                openbook: None,
                expect_tame: None,
                tameness_starts: 0,
                skipped: None,
            })?;
            print_report(&report);
            let stem = format!("verify-{label}");
            s.write_report(&stem, &report, *svg)?;
            let params = serde_json::json!({
                "germ": germ, "stage": stage, "kinds": kinds, "chi_f": chi_f, "sampling": sampling,
            });
            Ok((stem, params, report.verdict.exit_code()))
        }
        Command::Openbook { germ, stage, angles, chi_f, sampling } => {
            let f = load_germ(germ)?;
            let label = germ_label(&f, germ);
            let run = RunParams { epsilon: sampling.epsilon, points: sampling.points, seed };
            if *angles == 0 {
                bail!("--angles must be positive");
            }
            let radii = resolve_radii(&f, &[*stage, f.target_dim()], &run)?;
            let mut sp = milnor_core::estimator::StageParams::new(radii, seed);
            sp.points = sampling.points;
            let chi_f = match chi_f {
                Some(c) => *c,
                None => estimate_stage(&f, f.target_dim(), TargetKind::Fiber, &sp)?.estimate.chi,
            };
            let report = openbook_pages(&f, *stage, *angles, chi_f, &sp)?;
            let chis: Vec<String> = report.pages.iter().map(|p| p.chi.to_string()).collect();
            println!(
                "{label} I={stage}: pages [{}], chiF={chi_f}, all equal: {}, equal to chiF: {}",
                chis.join(", "),
                report.all_equal,
                report.matches_chi_f
            );
            let stem = format!("openbook-{label}-I{stage}");
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Csv => {
                    let mut out = String::from("theta,chi,confidence\n");
                    for p in &report.pages {
                        let t: Vec<String> = p.theta.iter().map(|v| v.to_string()).collect();
                        out += &format!("\"{}\",{},{}\n", t.join(" "), p.chi, confidence_str(p.confidence));
                    }
                    out
                }
            };
            s.write(&format!("{stem}.{}", cli.format.ext()), &text)?;
            s.verdicts.insert(stem.clone(), report.verdict);
            println!("{}", report.verdict.as_str());
            let params = serde_json::json!({
                "germ": germ, "stage": stage, "angles": angles, "chi_f": chi_f, "sampling": sampling,
            });
            Ok((stem, params, report.verdict.exit_code()))
        }
        Command::Tameness { germ, epsilon, starts } => {
            let f = load_germ(germ)?;
            let label = germ_label(&f, germ);
            let run = RunParams { epsilon: *epsilon, points: 0, seed };
            let stages: Vec<usize> = (1..=f.target_dim()).collect();
            let radii = resolve_radii(&f, &stages, &run)?;
            let report = tameness_evidence(&f, &radii, *starts, seed)?;
            let verdict = if report.is_clean() { Verdict::Pass } else { Verdict::Fail };
            println!(
                "{label}: {} of {} searches converged, {} critical points off V(f) {}",
                report.converged,
                report.starts,
                report.hits.len(),
                verdict.as_str()
            );
            for c in &report.inclusions {
                println!("  {}: {} violations", c.relation, c.violations);
            }
            let stem = format!("tameness-{label}");
            s.write(&format!("{stem}.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            s.verdicts.insert(stem.clone(), verdict);
            let params = serde_json::json!({ "germ": germ, "epsilon": epsilon, "starts": starts });
            Ok((stem, params, verdict.exit_code()))
        }
        Command::Catalog { action: CatalogAction::List } => {
            println!("{:<14} {:>2} {:>2} {:>5}  tags", "name", "M", "K", "chiF");
            for e in catalog::entries() {
                let f = e.map_germ()?;
                println!(
                    "{:<14} {:>2} {:>2} {:>5}  {}",
                    e.name,
                    f.source_dim(),
                    f.target_dim(),
                    e.chi_f,
                    e.tags.join(",")
                );
            }
            Ok(("catalog-list".into(), serde_json::Value::Null, 0))
        }
        Command::Catalog { action: CatalogAction::Run { name, all, svg } } => {
            let entries: Vec<&catalog::CatalogEntry> = match (name, all) {
                (Some(n), false) => vec![catalog::find(n)?],
                (None, true) => catalog::entries().iter().collect(),
                _ => bail!("give an entry name or --all"),
            };
            let reports: Vec<Result<VerifyReport>> =
                entries.par_iter().map(|e| run_catalog_entry(e, seed)).collect();
            let mut code = 0;
            for report in reports {
                let report = report?;
                print_report(&report);
                s.write_report(&format!("catalog-{}", report.germ), &report, *svg)?;
                code = code.max(report.verdict.exit_code());
            }
            let stem = match name {
                Some(n) => format!("catalog-{n}"),
                None => "catalog-all".into(),
            };
            let params = serde_json::json!({ "name": name, "all": all, "svg": svg });
            Ok((stem, params, code))
        }
        Command::Sample { germ, stage, kind, theta, sampling, output } => {
            let f = load_germ(germ)?;
            let label = germ_label(&f, germ);
            let kind: TargetKind = (*kind).into();
            let run = RunParams { epsilon: sampling.epsilon, points: sampling.points, seed };
            let radii = resolve_radii(&f, &[*stage], &run)?;
            let cfg = SamplerConfig::default();
            let mut y = vec![0.0; *stage];
            if let Some(first) = y.first_mut() {
                *first = radii.eta;
            }
            let n = sampling.points;
            let cloud = match kind {
                TargetKind::Fiber => sample_fiber(&f, *stage, &y, &radii, n, seed, &cfg)?,
                TargetKind::Boundary => sample_boundary(&f, *stage, &y, &radii, n, seed, &cfg)?,
                TargetKind::Link => sample_link(&f, *stage, &radii, n, seed, &cfg)?,
                TargetKind::Page => {
                    let theta = theta.as_deref().context("--kind page needs --theta")?;
                    sample_openbook_page(&f, *stage, &y, theta, &radii, n, seed, &cfg)?.cloud
                }
            };
            let ext = match cli.format {
                Format::Csv => "csv",
                Format::Json => "mpcl",
            };
            let stem = format!("sample-{label}-I{stage}-{}", kind.name());
            let path = match output {
                Some(p) => p.clone(),
                None => {
                    fs::create_dir_all(&cli.out_dir)?;
                    cli.out_dir.join(format!("{stem}.{ext}"))
                }
            };
            cloud.save(&path).with_context(|| format!("writing {}", path.display()))?;
            s.outputs.push(path.display().to_string());
            println!(
                "{} points ({} proposals, {} near-singular) -> {}",
                cloud.len(),
                cloud.stats.proposals,
                cloud.singular.len(),
                path.display()
            );
            let params = serde_json::json!({
                "germ": germ, "stage": stage, "kind": kind, "theta": theta, "sampling": sampling, "output": output,
            });
            Ok((stem, params, 0))
        }
    }
}
