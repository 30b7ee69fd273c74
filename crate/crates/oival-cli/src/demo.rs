//! Selection demos: sample plan plus covers in, deterministic trace out.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use oival::covers::{AnyCover, CoverJson};
use oival::select::{
    bs_select, crown_run, gm_tables, jordan_run, menger_two_pass, tower_select, uid_select, utgg_select, verify_cover,
    verify_gamma, Run, Sample, SelectConfig, Selection,
};
use oival::seqcore::{parse_point, FinSet, Point};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::plan::ScalePlan;
use crate::{canon, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    TwoPass,
    Bs,
    Uid,
    Utgg,
    Tower,
    Jordan,
    Crown,
}

impl Procedure {
    pub fn name(self) -> &'static str {
        match self {
            Procedure::TwoPass => "two-pass",
            Procedure::Bs => "bs",
            Procedure::Uid => "uid",
            Procedure::Utgg => "utgg",
            Procedure::Tower => "tower",
            Procedure::Jordan => "jordan",
            Procedure::Crown => "crown",
        }
    }

    /// Size rule checked on every counted cover.
    fn cardinality(self) -> &'static str {
        match self {
            Procedure::TwoPass => "finite",
            Procedure::Bs => "at_most_n_on_I",
            Procedure::Uid => "at_most_n_plus_1",
            Procedure::Utgg => "exactly_2",
            Procedure::Tower | Procedure::Jordan | Procedure::Crown => "exactly_1",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookahead: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_witnesses: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_cap: Option<u64>,
    /// Crown ab-steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
    /// Members per family kept by the disjointness pass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub take: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePlan {
    /// Finite points as `{…}` specs.
    pub fin: Vec<String>,
    pub ordered: ScalePlan,
    pub split: usize,
    #[serde(default)]
    pub select: SelectParams,
}

impl SamplePlan {
    pub fn build(&self) -> Result<Sample> {
        let fin = self
            .fin
            .iter()
            .map(|s| match parse_point(s) {
                Ok(Point::Finite(f)) => Ok(f),
                Ok(Point::Infinite(_)) => Err(UsageError(format!("fin point {s:?} is infinite")).into()),
                Err(e) => Err(UsageError(format!("fin point {s:?}: {e}")).into()),
            })
            .collect::<Result<Vec<FinSet>>>()?;
        let ordered = self.ordered.build().context("building the ordered part")?;
        Ok(Sample::new(fin, ordered, self.split)?)
    }

    pub fn config(&self, horizon: u64) -> SelectConfig {
        let d = SelectConfig::default();
        SelectConfig {
            horizon,
            lookahead: self.select.lookahead.unwrap_or(d.lookahead),
            min_witnesses: self.select.min_witnesses.unwrap_or(d.min_witnesses),
            search_cap: self.select.search_cap.unwrap_or(d.search_cap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub procedure: Procedure,
    pub horizon: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inputs {
    pub sample: SamplePlan,
    pub covers: Vec<CoverJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub point: String,
    pub threshold: u64,
    pub budget: u64,
    pub misses: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    /// `gamma`: per-point misses against budgets; `cover`: every point covered once.
    pub kind: &'static str,
    pub counted: u64,
    pub points: Vec<PointReport>,
    pub uncovered: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cardinality {
    pub rule: &'static str,
    pub checked: u64,
    /// Cover indices whose selection breaks the rule.
    pub violations: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub config: DemoConfig,
    pub inputs: Inputs,
    pub inputs_digest: String,
    pub sample_points: Vec<String>,
    pub selection: Selection,
    pub witness_i: Vec<u64>,
    pub witness_per_cover: Vec<Vec<u64>>,
    pub report: Verification,
    pub cardinality: Cardinality,
    pub details: Value,
    pub notes: Vec<String>,
    pub verdict: String,
}

impl Trace {
    pub fn certified(&self) -> bool {
        self.verdict.ends_with("-certified")
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    canon::parse(path, &text)
}

pub fn read_inputs(sample: &Path, covers: &Path) -> Result<Inputs> {
    Ok(Inputs { sample: read_json(sample)?, covers: read_json(covers)? })
}

fn build_covers(covers: &[CoverJson]) -> Result<Vec<AnyCover>> {
    covers
        .iter()
        .enumerate()
        .map(|(i, c)| c.build().map_err(|e| UsageError(format!("cover {}: {e}", i + 1)).into()))
        .collect()
}

fn cardinality(proc_: Procedure, selection: &Selection, counted: &[u64], witness_i: &[u64]) -> Cardinality {
    let rule = proc_.cardinality();
    let mut violations = Vec::new();
    let mut checked = 0;
    for &n in counted {
        let len = selection.groups.get(n as usize - 1).map_or(0, Vec::len) as u64;
        let ok = match proc_ {
            Procedure::TwoPass => continue,
            Procedure::Bs => {
                if witness_i.binary_search(&n).is_err() {
                    continue;
                }
                len <= n
            }
            Procedure::Uid => len <= n + 1,
            Procedure::Utgg => len == 2,
            Procedure::Tower | Procedure::Jordan | Procedure::Crown => len == 1,
        };
        checked += 1;
        if !ok {
            violations.push(n);
        }
    }
    Cardinality { rule, checked, violations }
}

fn gamma_report(covers: &[AnyCover], run: &Run, points: &[Point], names: &[String]) -> Result<Verification> {
    let rep = verify_gamma(covers, &run.selection, points, &run.counted, &run.thresholds)?;
    let points = names
        .iter()
        .enumerate()
        .map(|(i, p)| PointReport {
            point: p.clone(),
            threshold: run.thresholds.get(i).copied().unwrap_or(0),
            budget: rep.budgets[i],
            misses: rep.misses[i].clone(),
        })
        .collect();
    Ok(Verification { kind: "gamma", counted: rep.counted, points, uncovered: Vec::new(), passed: rep.passed })
}

pub fn run_demo(config: &DemoConfig, inputs: &Inputs) -> Result<Trace> {
    if config.horizon == 0 {
        bail!(UsageError("horizon must be at least 1".into()));
    }
    let covers = build_covers(&inputs.covers)?;
    let sample = inputs.sample.build()?;
    let cfg = inputs.sample.config(config.horizon);
    let points = sample.points();
    let names: Vec<String> = points.iter().map(ToString::to_string).collect();
    let digest = canon::digest(&json!({ "config": config, "inputs": inputs }))?;
    let gm_stages = cfg.horizon + cfg.lookahead;
    let take = inputs.sample.select.take.unwrap_or(4);
    let ctx = |p: Procedure| format!("{} selection", p.name());
    let (run, details) = match config.procedure {
        Procedure::TwoPass => {
            let tp = menger_two_pass(&covers, &sample, &cfg).with_context(|| ctx(config.procedure))?;
            let uncovered = verify_cover(&covers, &tp.selection, &points)?;
            let report = Verification {
                kind: "cover",
                counted: cfg.horizon,
                points: Vec::new(),
                uncovered: uncovered.iter().map(|&p| names[p].clone()).collect(),
                passed: uncovered.is_empty(),
            };
            let details = json!({ "placements": tp.placements, "leftovers": tp.leftovers });
            let counted: Vec<u64> = (1..=cfg.horizon).collect();
            let card = cardinality(config.procedure, &tp.selection, &counted, &[]);
            let verdict = if report.passed { "cover-certified" } else { "not-certified" };
            return Ok(Trace {
                config: config.clone(),
                inputs: inputs.clone(),
                inputs_digest: digest,
                sample_points: names,
                selection: tp.selection,
                witness_i: Vec::new(),
                witness_per_cover: Vec::new(),
                report,
                cardinality: card,
                details,
                notes: Vec::new(),
                verdict: verdict.into(),
            });
        }
        Procedure::Bs | Procedure::Uid | Procedure::Tower => {
            let gm = gm_tables(&covers, 0, gm_stages)?;
            let run = match config.procedure {
                Procedure::Bs => bs_select(&covers, &sample, &gm, &cfg),
                Procedure::Uid => uid_select(&covers, &sample, &gm, &cfg),
                _ => tower_select(&covers, &sample, &gm, &cfg),
            }
            .with_context(|| ctx(config.procedure))?;
            (run, json!({ "gm_stages": gm_stages }))
        }
        Procedure::Utgg => {
            let gm = gm_tables(&covers, 1, gm_stages)?;
            let run = utgg_select(&covers, &sample, &gm, &cfg).with_context(|| ctx(config.procedure))?;
            (run, json!({ "gm_stages": gm_stages }))
        }
        Procedure::Jordan => {
            let j = jordan_run(&covers, &sample, take, &cfg).with_context(|| ctx(config.procedure))?;
            let details = json!({
                "chain": j.chain,
                "betas": j.steps.iter().map(|s| s.beta).collect::<Vec<_>>(),
                "stage": j.diagonal.stage,
            });
            (j.run, details)
        }
        Procedure::Crown => {
            let stages = inputs.sample.select.stages.unwrap_or(3);
            let c = crown_run(&covers, &sample, stages, take, &cfg).with_context(|| ctx(config.procedure))?;
            let details = json!({
                "alphas": c.alphas,
                "betas": c.steps.iter().map(|s| s.beta).collect::<Vec<_>>(),
                "chain": c.chain,
                "stage": c.diagonal.stage,
            });
            (c.run, details)
        }
    };
    let report = gamma_report(&covers, &run, &points, &names)?;
    let card = cardinality(config.procedure, &run.selection, &run.counted, &run.witness_i);
    let ok = report.passed && card.violations.is_empty() && run.selection.respects_kind();
    Ok(Trace {
        config: config.clone(),
        inputs: inputs.clone(),
        inputs_digest: digest,
        sample_points: names,
        selection: run.selection,
        witness_i: run.witness_i,
        witness_per_cover: run.witness_per_cover,
        report,
        cardinality: card,
        details,
        notes: run.notes,
        verdict: if ok { "gamma-certified" } else { "not-certified" }.into(),
    })
}

/// One bundled demo: file names are relative to the fixture directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoEntry {
    pub name: String,
    pub procedure: Procedure,
    pub sample: String,
    pub covers: String,
    pub horizon: u64,
    pub seed: u64,
}

pub fn fixture_dir() -> PathBuf {
    match std::env::var_os("OIVAL_FIXTURES") {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")),
    }
}

pub fn manifest(dir: &Path) -> Result<Vec<DemoEntry>> {
    read_json(&dir.join("demos.json"))
}

impl DemoEntry {
    pub fn config(&self) -> DemoConfig {
        DemoConfig { procedure: self.procedure, horizon: self.horizon, seed: self.seed }
    }

    pub fn inputs(&self, dir: &Path) -> Result<Inputs> {
        read_inputs(&dir.join(&self.sample), &dir.join(&self.covers))
    }
}
