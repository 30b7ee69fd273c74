//! Build plans: scale and tower prefixes, and hitting-set embeddings on top of them.

use anyhow::{bail, Context, Result};
use oival::construct::{build_prefix, OracleFamily, OracleRole, PairCertificate, ScaleKind, ScalePrefix};
use oival::hitting::{check_kun, kun_embed, max_window, perturb, sparse_embed, BlockPartition, BlockSelector, Width};
use oival::seqcore::{parse_partition, parse_seq, IncSeq, Outcome};
use serde::{Deserialize, Serialize};

use crate::UsageError;

fn default_role() -> OracleRole {
    OracleRole::Unbounded
}

fn default_rounds() -> u64 {
    8
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalePlan {
    pub kind: ScaleKind,
    pub oracle: Vec<String>,
    pub steps: usize,
    pub horizon: u64,
    /// Leading witnesses kept per certificate in the emitted schedule.
    #[serde(default = "default_rounds")]
    pub rounds: u64,
    #[serde(default = "default_role")]
    pub role: OracleRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embed {
    Kun,
    Sparse,
    Perturb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingPlan {
    pub partition: String,
    /// `"const k"` or `"id"`.
    pub width: String,
    pub base: ScalePlan,
    pub embed: Embed,
    /// Number of base members embedded.
    pub steps: usize,
    pub horizon: u64,
    /// Selector positions; each entry yields one embedded point per base member.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Plan {
    Hitting(HittingPlan),
    Scale(ScalePlan),
}

pub fn parse_width(s: &str) -> Result<Width> {
    let s = s.trim();
    if s == "id" {
        return Ok(Width::Id);
    }
    let k = s
        .strip_prefix("const")
        .map(str::trim)
        .and_then(|k| k.parse::<u64>().ok())
        .filter(|&k| k > 0)
        .ok_or_else(|| UsageError(format!("width {s:?}: expected \"const k\" with k >= 1 or \"id\"")))?;
    Ok(Width::Const(k))
}

fn spec(s: &str) -> Result<IncSeq> {
    parse_seq(s).map_err(|e| UsageError(format!("sequence spec {s:?}: {e}")).into())
}

impl ScalePlan {
    pub fn oracle(&self) -> Result<OracleFamily> {
        let members = self.oracle.iter().map(|s| spec(s)).collect::<Result<Vec<_>>>()?;
        OracleFamily::new(members, self.role).map_err(|e| UsageError(format!("oracle: {e}")).into())
    }

    pub fn build(&self) -> Result<ScalePrefix> {
        if self.kind == ScaleKind::Unbounded {
            bail!(UsageError("scale plans take kind le_star, sqe or tower".into()));
        }
        Ok(build_prefix(self.kind, &self.oracle()?, self.steps, self.horizon)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleOutput {
    pub kind: ScaleKind,
    pub members: Vec<String>,
    pub certificates: Vec<Schedule>,
    pub valid: bool,
}

/// A pair certificate with its witness list cut to the plan's rounds.
#[derive(Debug, Clone, Serialize)]
pub struct Schedule {
    pub earlier: usize,
    pub later: usize,
    pub holds: bool,
    pub witnesses: Vec<u64>,
    pub witness_count: usize,
    pub violations: Vec<u64>,
}

fn schedule(c: &PairCertificate, rounds: u64) -> Schedule {
    let w = c.verdict.witnesses();
    let violations = match &c.verdict.outcome {
        Outcome::FailsAt(_) => c.verdict.violations.clone(),
        _ => Vec::new(),
    };
    Schedule {
        earlier: c.earlier,
        later: c.later,
        holds: c.verdict.holds(),
        witnesses: w.iter().take(rounds as usize).copied().collect(),
        witness_count: w.len(),
        violations,
    }
}

pub fn run_scale(plan: &ScalePlan) -> Result<ScaleOutput> {
    let prefix = plan.build()?;
    let certs = prefix.certificates(plan.horizon)?;
    let certificates: Vec<Schedule> = certs.iter().map(|c| schedule(c, plan.rounds)).collect();
    Ok(ScaleOutput {
        kind: prefix.kind,
        members: prefix.members.iter().map(ToString::to_string).collect(),
        valid: certificates.iter().all(|c| c.holds),
        certificates,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddedPoint {
    /// 1-based base member.
    pub member: usize,
    pub selector: String,
    pub point: String,
    /// Block indices `t` used, where the embedding has them.
    pub blocks: Vec<u64>,
    /// `kun`: pointwise `s <= s'`; `sparse`: window bound; `perturb`: block count match.
    pub check: bool,
    pub measure: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HittingOutput {
    pub base: Vec<String>,
    pub points: Vec<EmbeddedPoint>,
    pub valid: bool,
}

pub struct Built {
    pub part: BlockPartition,
    pub points: Vec<IncSeq>,
    pub output: HittingOutput,
}

impl HittingPlan {
    pub fn partition(&self) -> Result<BlockPartition> {
        parse_partition(&self.partition).map_err(|e| UsageError(format!("partition {:?}: {e}", self.partition)).into())
    }

    pub fn selectors(&self) -> Result<Vec<BlockSelector>> {
        let part = self.partition()?;
        let width = parse_width(&self.width)?;
        match &self.positions {
            None => Ok(vec![BlockSelector::first(part, width)?]),
            Some(ps) => ps
                .iter()
                .map(|p| {
                    BlockSelector::new(part.clone(), width, Some(p.clone()), Vec::new())
                        .map_err(|e| UsageError(format!("positions {p:?}: {e}")).into())
                })
                .collect(),
        }
    }
}

pub fn run_hitting(plan: &HittingPlan) -> Result<Built> {
    let base = plan.base.build()?;
    if plan.steps > base.members.len() {
        bail!(UsageError(format!("steps {} exceed the {} base members", plan.steps, base.members.len())));
    }
    let part = plan.partition()?;
    let selectors = plan.selectors()?;
    let h = plan.horizon;
    let mut points = Vec::new();
    let mut out = Vec::new();
    for (j, s) in base.members[..plan.steps].iter().enumerate() {
        for g in &selectors {
            let (sp, blocks, check, measure) = match plan.embed {
                Embed::Kun => {
                    let Width::Const(k) = g.width() else { bail!(UsageError("kun needs a constant width".into())) };
                    let e = kun_embed(k, g, s, h)?;
                    let ok = check_kun(k, s, &e)?;
                    (e.s_prime, e.t_prefix, ok, k)
                }
                Embed::Sparse => {
                    let Width::Const(k) = g.width() else { bail!(UsageError("sparse needs a constant width".into())) };
                    let e = sparse_embed(s, k, g, h)?;
                    let w = max_window(s, &e.s_prime, h)?;
                    (e.s_prime, e.t_prefix, w <= k, w)
                }
                Embed::Perturb => {
                    let sp = perturb(s, g);
                    // |s' ∩ I_n| = |g(n)| exactly on the blocks n ∈ s.
                    let mut ok = true;
                    let mut hit = 0;
                    for n in 1..=h {
                        let inside = sp.count_le(*part.block(n)?.end())? - sp.count_le(part.start(n)? - 1)?;
                        let want = if s.contains(n)? { g.size(n)? } else { 0 };
                        ok &= inside == want;
                        hit += u64::from(want > 0);
                    }
                    (sp, Vec::new(), ok, hit)
                }
            };
            out.push(EmbeddedPoint {
                member: j + 1,
                selector: g.to_string(),
                point: sp.to_string(),
                blocks,
                check,
                measure,
            });
            points.push(sp);
        }
    }
    let output = HittingOutput {
        base: base.members.iter().map(ToString::to_string).collect(),
        valid: out.iter().all(|p| p.check),
        points: out,
    };
    Ok(Built { part, points, output })
}

/// Reads a plan file; parse failures name the line and field.
pub fn read_plan(path: &std::path::Path) -> Result<Plan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    // Dispatch first, then parse typed from the text so errors keep their positions.
    let v: serde_json::Value = crate::canon::parse(path, &text)?;
    if v.get("embed").is_some() {
        Ok(Plan::Hitting(crate::canon::parse(path, &text)?))
    } else {
        Ok(Plan::Scale(crate::canon::parse(path, &text)?))
    }
}
