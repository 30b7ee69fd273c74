//! Seeded invariant suites behind `oival verify`.

use std::collections::BTreeMap;

use anyhow::Result;
use oival::construct::{interval_union_dominator, split_by_g};
use oival::covers::{cantor_defeater, column_cover, gm_extract, reclaw_map, ClopenSet, CoverStream, Omitting};
use oival::hitting::{
    check_guard, check_kun, defeat_gamma_selection, greedy_selection, kun_embed, perturbation_guard, sparse_embed,
    BlockPartition, BlockSelector, HitError, Width,
};
use oival::seqcore::{omit0_check, parse_seq, FinSet, IncSeq, Outcome, Point, SeqError};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::demo::{fixture_dir, manifest, run_demo};
use crate::gen::{rng, Ea, EaShape};
use crate::plan::{read_plan, run_hitting, Plan};
use crate::UsageError;

pub const SUITES: [&str; 9] =
    ["tilde", "omit0", "splitter", "dominator", "gm", "selectors", "hitting", "defeater", "reclaw"];

/// Overrides from the command line; `None` keeps the suite default.
#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub horizon: Option<u64>,
    pub rounds: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    /// Inputs as seq-specs.
    pub inputs: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub horizon: u64,
    pub rounds: u64,
    pub cases: u64,
    pub checks: u64,
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
    pub stats: BTreeMap<String, Value>,
}

/// Counterexamples kept per report.
const KEEP: usize = 25;

struct Acc {
    r: SuiteReport,
}

impl Acc {
    fn new(suite: &str, seed: u64, horizon: u64, rounds: u64) -> Self {
        Acc {
            r: SuiteReport {
                suite: suite.into(),
                seed,
                horizon,
                rounds,
                cases: 0,
                checks: 0,
                passed: true,
                counterexamples: Vec::new(),
                stats: BTreeMap::new(),
            },
        }
    }

    fn fail(&mut self, inputs: Vec<String>, detail: String) {
        self.r.passed = false;
        if self.r.counterexamples.len() < KEEP {
            self.r.counterexamples.push(Counterexample { inputs, detail });
        }
    }

    fn stat(&mut self, key: &str, v: impl Serialize) {
        self.r.stats.insert(key.into(), json!(v));
    }

    fn done(self) -> SuiteReport {
        self.r
    }
}

pub fn run_suite(name: &str, cfg: SuiteConfig) -> Result<SuiteReport> {
    if let (Some(h), Some(r)) = (cfg.horizon, cfg.rounds) {
        if r == 0 || h < r {
            return Err(UsageError(format!("need horizon >= rounds >= 1, got horizon {h}, rounds {r}")).into());
        }
    }
    match name {
        "tilde" => tilde(cfg),
        "omit0" => omit0(cfg),
        "splitter" => splitter(cfg),
        "dominator" => dominator(cfg),
        "gm" => gm(cfg),
        "selectors" => selectors(cfg),
        "hitting" => hitting(cfg),
        "defeater" => defeater(cfg),
        "reclaw" => reclaw(cfg),
        _ => Err(UsageError(format!("UnknownSuite: {name:?}; known suites: {}", SUITES.join(", "))).into()),
    }
}

const SLOW: EaShape = EaShape { max_elem: 60, max_len: 6, max_gap: 40, steps: (1, 4) };

/// `ỹ` strictly increasing with `y <= ỹ` pointwise, against brute-force iteration.
fn tilde(cfg: SuiteConfig) -> Result<SuiteReport> {
    let (h, rounds) = (cfg.horizon.unwrap_or(10_000), cfg.rounds.unwrap_or(1000));
    let mut acc = Acc::new("tilde", cfg.seed, h, rounds);
    let mut r = rng(cfg.seed, 1);
    let mut full = 0u64;
    for _ in 0..rounds {
        let y = Ea::random(&mut r, SLOW);
        acc.r.cases += 1;
        let t = IncSeq::tilde(y.seq());
        let mut vals = Vec::new();
        for v in t.iter().take(h as usize) {
            match v {
                Ok(v) => vals.push(v),
                Err(SeqError::Overflow(_)) => break,
                Err(e) => {
                    acc.fail(vec![y.spec()], format!("evaluation error {e}"));
                    break;
                }
            }
        }
        full += u64::from(vals.len() as u64 == h);
        let naive = y.naive_tilde(vals.len());
        if naive != vals {
            acc.fail(vec![y.spec()], "tilde differs from brute-force iteration".into());
        }
        for (i, &v) in vals.iter().enumerate() {
            let n = i as u64 + 1;
            acc.r.checks += 1;
            if i > 0 && vals[i - 1] >= v {
                acc.fail(vec![y.spec()], format!("not increasing at {n}"));
            }
            if y.at(n).is_some_and(|yn| yn > v) {
                acc.fail(vec![y.spec()], format!("y({n}) > tilde(y)({n})"));
            }
        }
    }
    acc.stat("cases_reaching_horizon", full);
    Ok(acc.done())
}

/// `y(ỹ(n)) <= x(ỹ(n))` at every omitted open `ỹ`-interval from `min x^c` on,
/// with the checked index set recomputed by brute force.
fn omit0(cfg: SuiteConfig) -> Result<SuiteReport> {
    let (h, rounds) = (cfg.horizon.unwrap_or(1000), cfg.rounds.unwrap_or(1000));
    let mut acc = Acc::new("omit0", cfg.seed, h, rounds);
    let mut r = rng(cfg.seed, 2);
    let mut witnessed = 0u64;
    // Sparse x against slowly growing ỹ, so that omitted intervals are common.
    let x_shape = EaShape { max_elem: 60, max_len: 6, max_gap: 40, steps: (2, 16) };
    let y_shape = EaShape { max_elem: 30, max_len: 4, max_gap: 10, steps: (1, 2) };
    while acc.r.cases < rounds {
        let x = Ea::random(&mut r, x_shape);
        let y = Ea::random(&mut r, y_shape);
        let Some(k) = x.min_missing() else { continue };
        acc.r.cases += 1;
        let inputs = vec![x.spec(), y.spec()];
        let v = omit0_check(&Point::Infinite(x.seq()), &y.seq(), h)?;
        let ty = y.naive_tilde(h as usize + 1);
        let mut want = Vec::new();
        let mut bad = None;
        for n in k..ty.len() as u64 {
            let (lo, hi) = (ty[n as usize - 1], ty[n as usize]);
            if hi > lo + 1 && x.count_in(lo + 1, hi - 1) > 0 {
                continue;
            }
            let (Some(yv), Some(xv)) = (y.at(lo), x.at(lo)) else { break };
            if yv > xv {
                bad = Some(n);
                break;
            }
            want.push(n);
        }
        acc.r.checks += want.len() as u64;
        witnessed += u64::from(!want.is_empty());
        match (&v.outcome, bad) {
            (Outcome::HoldsWithWitnesses(w), None) if *w == want => {}
            (_, Some(n)) => acc.fail(inputs, format!("inequality fails at omitted interval {n}")),
            (o, None) => acc.fail(inputs, format!("library verdict {o:?} differs from brute force {want:?}")),
        }
    }
    acc.stat("cases_with_omitted_intervals", witnessed);
    Ok(acc.done())
}

/// The first `count` elements of `a = ⋃_n [t(2n-1), t(2n))` (or of `a^c`, which
/// adds `[1, t(1))` and the other gaps). When `t` has ended, its last block is unbounded.
fn block_elements(t: &[u64], compl: bool, count: usize, ended: bool) -> Vec<u64> {
    let mut bounds: Vec<(u64, u64)> = Vec::new();
    let rest = if compl {
        bounds.push((1, t.first().copied().unwrap_or(u64::MAX)));
        t.get(1..).unwrap_or(&[])
    } else {
        t
    };
    let pairs = rest.chunks_exact(2);
    let tail = pairs.remainder().first().copied();
    bounds.extend(pairs.map(|w| (w[0], w[1])));
    if let (Some(lo), true) = (tail, ended) {
        bounds.push((lo, u64::MAX));
    }
    let mut out = Vec::with_capacity(count);
    for (lo, hi) in bounds {
        for v in lo..hi {
            if out.len() == count {
                return out;
            }
            out.push(v);
        }
    }
    out
}

/// `a(1..=h)` and `a^c(1..=h)` from brute-force tilde values.
fn halves(g: &Ea, h: usize) -> (Vec<u64>, Vec<u64>) {
    let mut n = 64;
    loop {
        let t = g.naive_tilde(n);
        let ended = t.len() < n;
        let (a, ac) = (block_elements(&t, false, h, ended), block_elements(&t, true, h, ended));
        if ended || (a.len() == h && ac.len() == h) {
            return (a, ac);
        }
        n *= 2;
    }
}

/// `split_by_g`: the two halves tile `[1, h]` and each collects at least 50
/// `≤∞` witnesses, recounted from a brute-force `g̃`.
fn splitter(cfg: SuiteConfig) -> Result<SuiteReport> {
    let (h, rounds) = (cfg.horizon.unwrap_or(10_000), cfg.rounds.unwrap_or(500));
    let need = 50;
    let mut acc = Acc::new("splitter", cfg.seed, h, rounds);
    let mut r = rng(cfg.seed, 3);
    let mut fewest = u64::MAX;
    let shape = EaShape { max_elem: 30, max_len: 5, max_gap: 10, steps: (1, 2) };
    for _ in 0..rounds {
        let g = Ea::random(&mut r, shape);
        acc.r.cases += 1;
        let inputs = vec![g.spec()];
        let s = split_by_g(&g.seq(), h)?;
        let (a, ac) = (s.a.upto(h)?, s.a_compl.upto(h)?);
        let mut all: Vec<u64> = a.iter().chain(&ac).copied().collect();
        all.sort_unstable();
        acc.r.checks += 1;
        if all != (1..=h).collect::<Vec<_>>() {
            acc.fail(inputs.clone(), "a and a^c do not tile [1, h]".into());
        }
        let (an, acn) = halves(&g, h as usize);
        let count = |xs: &[u64]| (0..xs.len()).filter(|&i| g.at(i as u64 + 1).is_some_and(|gv| gv <= xs[i])).count() as u64;
        let (wa, wc) = (count(&an), count(&acn));
        acc.r.checks += 2;
        if wa != s.witnesses_a.len() as u64 || wc != s.witnesses_compl.len() as u64 {
            acc.fail(inputs.clone(), format!("witness counts {wa}/{wc} differ from the library's"));
        }
        fewest = fewest.min(wa.min(wc));
        if wa < need || wc < need {
            acc.fail(inputs, format!("only {wa} and {wc} witnesses up to {h}"));
        }
    }
    acc.stat("fewest_witnesses", fewest);
    Ok(acc.done())
}

/// `interval_union_dominator`: every family member gets at least 25 `≤∞` witnesses
/// up to `h`, recounted against `c = ⋃_{n ∈ b} [a(n), a(n+1))`.
fn dominator(cfg: SuiteConfig) -> Result<SuiteReport> {
    let (h, rounds) = (cfg.horizon.unwrap_or(100_000), cfg.rounds.unwrap_or(200));
    let need = 25;
    let mut acc = Acc::new("dominator", cfg.seed, h, rounds);
    let mut r = rng(cfg.seed, 4);
    let ys_shape = EaShape { max_elem: 30, max_len: 5, max_gap: 10, steps: (1, 1) };
    let a_shape = EaShape { max_elem: 30, max_len: 5, max_gap: 10, steps: (1, 3) };
    let mut fewest = u64::MAX;
    for _ in 0..rounds {
        let size = r.gen_range(1..=8);
        let ys: Vec<Ea> = (0..size).map(|_| Ea::random(&mut r, ys_shape)).collect();
        let a = Ea::random(&mut r, a_shape);
        acc.r.cases += 1;
        let mut inputs: Vec<String> = ys.iter().map(Ea::spec).collect();
        inputs.push(a.spec());
        let seqs: Vec<IncSeq> = ys.iter().map(Ea::seq).collect();
        let d = match interval_union_dominator(&seqs, &a.seq(), need, h) {
            Ok(d) => d,
            Err(e) => {
                acc.fail(inputs, e.to_string());
                continue;
            }
        };
        // c(1), …, c(h) from the index set b and brute-force a.
        let mut c = Vec::with_capacity(h as usize);
        'fill: for n in d.b.iter() {
            let n = n?;
            let (Some(lo), Some(hi)) = (a.at(n), a.at(n + 1)) else { break };
            for v in lo..hi {
                if c.len() == h as usize {
                    break 'fill;
                }
                c.push(v);
            }
        }
        for (i, y) in ys.iter().enumerate() {
            let w = (0..c.len()).filter(|&j| y.at(j as u64 + 1).is_some_and(|yv| yv <= c[j])).count() as u64;
            acc.r.checks += 1;
            fewest = fewest.min(w);
            if w != d.witnesses[i].len() as u64 || w < need {
                acc.fail(inputs.clone(), format!("member {}: {w} witnesses, library {}", i + 1, d.witnesses[i].len()));
            }
        }
    }
    acc.stat("fewest_witnesses", fewest);
    Ok(acc.done())
}

fn subsets_of(coords: &[u64]) -> impl Iterator<Item = FinSet> + '_ {
    (0..1u64 << coords.len()).map(move |m| {
        FinSet::new(coords.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &c)| c).collect())
            .expect("distinct coordinates")
    })
}

/// gm on the omitting cover: omission (or at most `k` points per window) forces
/// membership in the window's group, over every trace.
fn gm(cfg: SuiteConfig) -> Result<SuiteReport> {
    let n = cfg.horizon.unwrap_or(8);
    let mut acc = Acc::new("gm", cfg.seed, n, 4);
    let mut counts = BTreeMap::new();
    for k in 0..=3u64 {
        acc.r.cases += 1;
        let g = gm_extract(&Omitting, k, n)?;
        let label = format!("k={k}");
        let mut distinct = g.members.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if g.a[0] != 1 || distinct.len() != g.members.len() {
            acc.fail(vec!["Om".into()], format!("{label}: a(1) = {} or repeated members", g.a[0]));
        }
        let members: BTreeMap<u64, ClopenSet> =
            g.members.iter().map(|&i| Ok((i, Omitting.member(i)?))).collect::<Result<_>>()?;
        let mut traces = 0u64;
        if k == 0 {
            // Every trace at depth a(N+1).
            let depth = g.a[n as usize];
            if depth > 24 {
                acc.fail(vec!["Om".into()], format!("a({}) = {depth} exceeds 24", n + 1));
                continue;
            }
            let coords: Vec<u64> = (1..=depth).collect();
            for s in subsets_of(&coords) {
                traces += 1;
                for (j, grp) in g.groups.iter().enumerate() {
                    let (lo, hi) = (g.a[j], g.a[j + 1]);
                    acc.r.checks += 1;
                    if s.elems().iter().all(|&e| e <= lo || e >= hi) && !grp.iter().any(|m| members[m].contains_set(&s)) {
                        acc.fail(vec!["Om".into(), s.to_string()], format!("{label}: window {} omitted, not in U", j + 1));
                    }
                }
            }
        } else {
            // Membership in the group depends only on the window and the members'
            // supports, so every trace is decided by its projection onto them.
            for (j, grp) in g.groups.iter().enumerate() {
                let (lo, hi) = (g.b[j], g.b[j + 1]);
                let mut coords: Vec<u64> = (lo + 1..hi).collect();
                for m in grp {
                    coords.extend_from_slice(members[m].support());
                }
                coords.sort_unstable();
                coords.dedup();
                if coords.len() > 24 {
                    acc.fail(vec!["Om".into()], format!("{label}: window {} depends on {} coordinates", j + 1, coords.len()));
                    continue;
                }
                for s in subsets_of(&coords) {
                    traces += 1;
                    acc.r.checks += 1;
                    let inside = s.elems().iter().filter(|&&e| e > lo && e < hi).count() as u64;
                    if inside <= k && !grp.iter().any(|m| members[m].contains_set(&s)) {
                        acc.fail(vec!["Om".into(), s.to_string()], format!("{label}: window {} has {inside} points, not in the group", j + 1));
                    }
                }
            }
        }
        counts.insert(label, json!({ "traces": traces, "a": g.a, "b": g.b }));
    }
    acc.stat("exhaustive", counts);
    Ok(acc.done())
}

/// Every bundled demo except two-pass: verifier passes and the size rule holds.
fn selectors(cfg: SuiteConfig) -> Result<SuiteReport> {
    let dir = fixture_dir();
    let entries = manifest(&dir)?;
    let mut acc = Acc::new("selectors", cfg.seed, cfg.horizon.unwrap_or(1000), entries.len() as u64);
    let mut per = BTreeMap::new();
    for e in &entries {
        let mut config = e.config();
        if let Some(h) = cfg.horizon {
            config.horizon = h;
        }
        let inputs = e.inputs(&dir)?;
        acc.r.cases += 1;
        let members = inputs.sample.ordered.steps;
        let ncov = inputs.covers.len();
        let tag = vec![e.name.clone()];
        if !(8..=24).contains(&members) || !(3..=6).contains(&ncov) {
            acc.fail(tag.clone(), format!("fixture shape: {members} members, {ncov} covers"));
        }
        let t = match run_demo(&config, &inputs) {
            Ok(t) => t,
            Err(err) => {
                acc.fail(tag, format!("{err:#}"));
                continue;
            }
        };
        acc.r.checks += t.cardinality.checked + t.report.points.len() as u64;
        let worst = t.report.points.iter().map(|p| p.misses.len() as i64 - p.threshold as i64).max().unwrap_or(0);
        if !t.certified() {
            acc.fail(
                tag,
                format!(
                    "verdict {}: cardinality violations {:?}, worst excess {worst}",
                    t.verdict,
                    &t.cardinality.violations[..t.cardinality.violations.len().min(10)]
                ),
            );
        }
        per.insert(
            e.name.clone(),
            json!({
                "procedure": e.procedure,
                "verdict": t.verdict,
                "counted": t.report.counted,
                "cardinality_checked": t.cardinality.checked,
                "worst_excess": worst,
            }),
        );
    }
    acc.stat("demos", per);
    Ok(acc.done())
}

fn linear_block(m: u64) -> (u64, u64) {
    (m * (m - 1) / 2 + 1, m * (m + 1) / 2)
}

/// `s' = ⋃_{m ∈ t} g(m)` for the first-`k` selector on the linear partition, by hand.
fn linear_union(t: &[u64], k: u64) -> Vec<u64> {
    t.iter().flat_map(|&m| {
        let (lo, hi) = linear_block(m);
        lo..=hi.min(lo + k - 1)
    })
    .collect()
}

/// kun and sparse embeddings at horizon `h`, then the guard's brute-force oracle.
fn hitting(cfg: SuiteConfig) -> Result<SuiteReport> {
    let (h, rounds) = (cfg.horizon.unwrap_or(10_000), cfg.rounds.unwrap_or(200));
    let embeds = 40u64;
    let mut acc = Acc::new("hitting", cfg.seed, h, rounds);
    let mut r = rng(cfg.seed, 7);
    let shape = EaShape { max_elem: 40, max_len: 5, max_gap: 20, steps: (1, 5) };
    let mut widest = 0u64;
    for _ in 0..embeds {
        let s = Ea::random(&mut r, shape);
        let k = r.gen_range(1..=3u64);
        let g = BlockSelector::first(BlockPartition::Linear, Width::Const(k))?;
        let inputs = vec![s.spec(), g.to_string()];
        acc.r.cases += 2;

        let e = kun_embed(k, &g, &s.seq(), h)?;
        let sp = linear_union(&e.t_prefix, k);
        acc.r.checks += h;
        let below = (1..=h).all(|i| sp.get(i as usize - 1).is_some_and(|&v| s.at(i).is_some_and(|sv| sv <= v)));
        if !below || !check_kun(k, &s.seq(), &e)? {
            acc.fail(inputs.clone(), "kun: s(i) <= s'(i) fails".into());
        }

        let e = sparse_embed(&s.seq(), k, &g, h)?;
        let sp = linear_union(&e.t_prefix, k);
        let mut worst = 0;
        for n in 1..=h {
            let (Some(lo), Some(hi)) = (s.at(n), s.at(n + 2)) else { break };
            let i = sp.partition_point(|&v| v <= lo);
            let j = sp.partition_point(|&v| v < hi);
            worst = worst.max((j - i) as u64);
            acc.r.checks += 1;
        }
        widest = widest.max(worst);
        if worst > k {
            acc.fail(inputs, format!("sparse: a window holds {worst} > {k} points"));
        }
    }

    // Guard over a = 2ℕ for f ≡ 1 and f = id; s leaves out random whole c-intervals.
    let bound = 200u64;
    let a = parse_seq("arith(2,2)")?;
    let mut guarded = BTreeMap::new();
    for width in [Width::Const(1), Width::Id] {
        let c = perturbation_guard(width, &a, bound)?;
        let g = BlockSelector::first(BlockPartition::Linear, width)?;
        let mut count = 0u64;
        for _ in 0..rounds {
            acc.r.cases += 1;
            let omit: Vec<bool> = (0..c.len()).map(|_| r.gen_bool(0.5)).collect();
            let keep: Vec<bool> = (0..bound).map(|_| r.gen_bool(0.5)).collect();
            let s: Vec<u64> = (1..=bound)
                .filter(|&v| {
                    let i = c.partition_point(|&x| x < v);
                    let inside = i > 0 && i < c.len() && c[i - 1] < v && v < c[i];
                    keep[v as usize - 1] && !(inside && omit[i - 1])
                })
                .collect();
            let p = Point::finite(s.clone())?;
            let inputs = vec![p.to_string(), g.to_string()];
            // b = ⋃ g[s]: the first width(m) elements of each linear block I_m, m ∈ s.
            let mut b = vec![false; bound as usize + 1];
            for &m in &s {
                let (lo, hi) = linear_block(m);
                for v in lo..=hi.min(lo + width.at(m) - 1).min(bound) {
                    b[v as usize] = true;
                }
            }
            let mut checked = Vec::new();
            for n in 0..c.len() - 1 {
                let (lo, hi) = (c[n], c[n + 1]);
                if hi > bound {
                    break;
                }
                if s.iter().any(|&v| lo < v && v < hi) {
                    continue;
                }
                checked.push(n as u64 + 1);
                acc.r.checks += 1;
                let found = (1..=bound / 2).any(|i| {
                    let (al, ah) = (2 * i, 2 * i + 2);
                    al >= lo && ah <= hi && (al + 1..ah).all(|v| !b[v as usize])
                });
                if !found {
                    acc.fail(inputs.clone(), format!("c-interval {} has no omitted a-interval", n + 1));
                }
            }
            count += checked.len() as u64;
            let (lib, failed) = check_guard(&c, &a, &g, &p, bound)?;
            if lib != checked || !failed.is_empty() {
                acc.fail(inputs, format!("library guard check {lib:?}/{failed:?} differs"));
            }
        }
        guarded.insert(width.to_string(), json!({ "c": c, "intervals_checked": count }));
    }
    acc.stat("embeddings", embeds);
    acc.stat("widest_sparse_window", widest);
    acc.stat("guard", guarded);
    Ok(acc.done())
}

/// Greedy selections against the bundled hitting fixtures, and the Cantor defeater.
fn defeater(cfg: SuiteConfig) -> Result<SuiteReport> {
    let (h, rounds) = (cfg.horizon.unwrap_or(200), cfg.rounds.unwrap_or(100));
    let need = 20u64;
    let mut acc = Acc::new("defeater", cfg.seed, h, rounds);
    let dir = fixture_dir();
    let mut per = BTreeMap::new();
    // (fixture, group sizes it defeats, group sizes that survive it)
    let plans: [(&str, &[u64], &[u64]); 2] = [("one_per_block", &[1], &[2]), ("identity_width", &[1, 2, 3], &[])];
    for (name, ks, survivors) in plans {
        let Plan::Hitting(plan) = read_plan(&dir.join("defeat").join(format!("{name}.json")))? else {
            return Err(UsageError(format!("defeat/{name}.json is not a hitting plan")).into());
        };
        let built = run_hitting(&plan)?;
        let sample: Vec<Point> = built.points.iter().cloned().map(Point::Infinite).collect();
        for &k in ks {
            acc.r.cases += 1;
            let tag = vec![format!("{name} k={k}")];
            let selection = greedy_selection(&built.part, &sample, k, h)?;
            match defeat_gamma_selection(&built.part, &sample, &selection, need) {
                Ok(rep) => {
                    // g(n) ⊆ x at each listed failure, rechecked.
                    let x = &sample[rep.point];
                    let mut recount = Vec::new();
                    for (i, grp) in selection.iter().enumerate() {
                        let mut all = true;
                        for &m in grp {
                            all &= x.contains(m)?;
                        }
                        if all {
                            recount.push(i as u64 + 1);
                        }
                    }
                    acc.r.checks += h;
                    if recount != rep.failures || (rep.failures.len() as u64) < need {
                        acc.fail(tag, format!("{} failures, recount {}", rep.failures.len(), recount.len()));
                    }
                    per.insert(format!("{name}/k={k}"), json!({ "point": x.to_string(), "failures": rep.failures.len() }));
                }
                Err(e) => acc.fail(tag, e.to_string()),
            }
        }
        // One point per block cannot contain a whole pair.
        for &k in survivors {
            acc.r.cases += 1;
            acc.r.checks += 1;
            let selection = greedy_selection(&built.part, &sample, k, h)?;
            match defeat_gamma_selection(&built.part, &sample, &selection, 1) {
                Err(HitError::NoDefeaterInSample { .. }) => {
                    per.insert(format!("{name}/k={k}"), json!("survives"));
                }
                other => acc.fail(vec![format!("{name} k={k}")], format!("expected no defeater, got {other:?}")),
            }
        }
    }

    let mut r = rng(cfg.seed, 8);
    let bound = 40u64;
    let mut xs: Vec<Point> = Vec::new();
    while xs.len() < 8 {
        let elems: Vec<u64> = (1..=30).filter(|_| r.gen_bool(0.3)).collect();
        let p = Point::finite(elems)?;
        if !xs.contains(&p) {
            xs.push(p);
        }
    }
    let selections: Vec<u64> = (0..rounds).map(|_| r.gen_range(1..=xs.len() as u64)).collect();
    let d = cantor_defeater(&xs, &selections, bound)?;
    acc.r.cases += 1;
    acc.r.checks += rounds;
    let exact = (1..=rounds).all(|n| {
        d.f.decode(n, bound).ok() == xs[selections[n as usize - 1] as usize - 1].upto(bound).ok()
    });
    if d.certified != (1..=rounds).collect::<Vec<_>>() || !exact {
        acc.fail(xs.iter().map(ToString::to_string).collect(), format!("certified {} of {rounds}", d.certified.len()));
    }
    acc.stat("greedy", per);
    acc.stat("cantor_certified", d.certified.len());
    Ok(acc.done())
}

/// Points agreeing up to the reported modulus get the same value, and the
/// value of column cover `n` is `x(n)`.
fn reclaw(cfg: SuiteConfig) -> Result<SuiteReport> {
    let rounds = cfg.rounds.unwrap_or(500);
    let (columns, max_m) = (5u64, 19u64);
    let mut acc = Acc::new("reclaw", cfg.seed, max_m, rounds);
    let covers: Vec<Vec<ClopenSet>> = (1..=columns).map(|n| column_cover(n, max_m)).collect::<Result<_, _>>()?;
    let mut r = rng(cfg.seed, 9);
    while acc.r.cases < rounds {
        let xv: Vec<u64> = (1..=max_m).filter(|_| r.gen_bool(0.45)).collect();
        if (xv.len() as u64) < columns {
            continue;
        }
        acc.r.cases += 1;
        let x = Point::finite(xv.clone())?;
        let fx = reclaw_map(&covers, &x)?;
        let modulus = fx.iter().map(|v| v.modulus).max().unwrap_or(0);
        let mut yv: Vec<u64> = xv.iter().copied().filter(|&e| e <= modulus).collect();
        yv.extend((modulus + 1..=2 * max_m).filter(|_| r.gen_bool(0.5)));
        let y = Point::finite(yv)?;
        let inputs = vec![x.to_string(), y.to_string()];
        let fy = reclaw_map(&covers, &y)?;
        for (i, (a, b)) in fx.iter().zip(&fy).enumerate() {
            acc.r.checks += 1;
            if a.value != b.value || a.value != xv[i] {
                acc.fail(inputs.clone(), format!("cover {}: values {} and {}, x({}) = {}", i + 1, a.value, b.value, i + 1, xv[i]));
            }
        }
    }
    Ok(acc.done())
}
