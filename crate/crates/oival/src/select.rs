//! Selection procedures over finite samples, with independent verifiers.
//!
//! The cover sequence `𝒰_1, 𝒰_2, …` is the given list of covers repeated
//! cyclically up to the horizon. Selections record member indices of the
//! underlying cover streams, never positions inside derived families.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::construct::{disjointify, ConstructError, ScalePrefix};
use crate::covers::{clopen_modulus, ClopenError, ClopenSet, CoverError, CoverStream, Family, GmOutput};
use crate::covers::gm_extract;
use crate::seqcore::{relate, FinSet, IncSeq, Point, Rel, SeqError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectError {
    #[error("split index {split} exceeds the {len} ordered members")]
    BadSplit { split: usize, len: usize },
    #[error("fin part lists {0} twice")]
    DuplicateFin(FinSet),
    #[error("cover {cover}: the prefix of {len} members ends outside sample point {point}")]
    PrefixTooShort { cover: u64, point: usize, len: u64 },
    #[error("no index up to {0} qualifies for I")]
    EmptyI(u64),
    #[error("cover {0}: I_n has no element in range")]
    EmptyIAt(u64),
    #[error("sample point {0} lies in no member up to the search cap")]
    NotCoverable(usize),
    #[error("no ordered member from index {0} on omits enough intervals")]
    TowerExhausted(usize),
    #[error("chain element {0} does not contain its predecessor")]
    NotAChain(usize),
    #[error("cover {0} is not marked free of finite subcovers")]
    NotMarked(u64),
    #[error("gm outputs: {0}")]
    GmShape(String),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Clopen(#[from] ClopenError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

pub type SelectResult<T> = Result<T, SelectError>;

/// `Fin`-prefix plus ordered members; members before `split_index` form the
/// small part together with `fin_part`, the member at `split_index` is `s_α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub fin_part: Vec<FinSet>,
    pub ordered_part: ScalePrefix,
    pub split_index: usize,
}

impl Sample {
    pub fn new(fin_part: Vec<FinSet>, ordered_part: ScalePrefix, split_index: usize) -> SelectResult<Self> {
        let len = ordered_part.members.len();
        if split_index > len {
            return Err(SelectError::BadSplit { split: split_index, len });
        }
        let mut seen = HashSet::new();
        for f in &fin_part {
            if !seen.insert(f) {
                return Err(SelectError::DuplicateFin(f.clone()));
            }
        }
        Ok(Sample { fin_part, ordered_part, split_index })
    }

    /// Fin points first, then ordered members in order.
    pub fn points(&self) -> Vec<Point> {
        let fin = self.fin_part.iter().cloned().map(Point::Finite);
        fin.chain(self.ordered_part.members.iter().cloned().map(Point::Infinite)).collect()
    }

    pub fn small_points(&self) -> Vec<Point> {
        let fin = self.fin_part.iter().cloned().map(Point::Finite);
        let below = self.ordered_part.members[..self.split_index].iter().cloned().map(Point::Infinite);
        fin.chain(below).collect()
    }

    pub fn split_member(&self) -> Option<&IncSeq> {
        self.ordered_part.members.get(self.split_index)
    }

    /// Position of ordered member `j` in `points()`.
    pub fn position(&self, j: usize) -> usize {
        self.fin_part.len() + j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    One,
    Pair,
    KBounded(u64),
    NPlusOneBounded,
    Finite,
}

/// `groups[n-1]` lists the member indices chosen from cover `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub kind: SelectionKind,
    pub groups: Vec<Vec<u64>>,
    /// Covers whose pair repeats one member.
    pub flagged: Vec<u64>,
}

impl Selection {
    pub fn empty(kind: SelectionKind) -> Self {
        Selection { kind, groups: Vec::new(), flagged: Vec::new() }
    }

    pub fn respects_kind(&self) -> bool {
        self.groups.iter().enumerate().all(|(i, g)| {
            let n = i as u64 + 1;
            let distinct = g.iter().collect::<HashSet<_>>().len();
            match self.kind {
                SelectionKind::One => g.len() == 1,
                SelectionKind::Pair => g.len() == 2 && (distinct == 2 || self.flagged.contains(&n)),
                SelectionKind::KBounded(k) => g.len() as u64 <= k && distinct == g.len(),
                SelectionKind::NPlusOneBounded => g.len() as u64 <= n + 1 && distinct == g.len(),
                SelectionKind::Finite => distinct == g.len(),
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Picks are at least the cover index, so each point is hit infinitely often.
    Cofinal,
    Cofinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectConfig {
    /// Number of covers `𝒰_1, …, 𝒰_horizon`.
    pub horizon: u64,
    /// Extra gm stages past the horizon.
    pub lookahead: u64,
    /// Least `|I|` accepted when a split is searched for.
    pub min_witnesses: u64,
    /// Longest member search for a single point or prefix.
    pub search_cap: u64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig { horizon: 1000, lookahead: 256, min_witnesses: 8, search_cap: 4096 }
    }
}

/// Output of a selector, ready for `verify_gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub selection: Selection,
    /// Cover indices over which the Γ check ranges.
    pub counted: Vec<u64>,
    /// Common witness set `I`, when the procedure has one.
    pub witness_i: Vec<u64>,
    /// Per-cover witness sets `I_n`, truncated to the part consumed.
    pub witness_per_cover: Vec<Vec<u64>>,
    /// Per sample point, the misses the construction itself allows.
    pub thresholds: Vec<u64>,
    pub notes: Vec<String>,
}

fn cover_slot(len: usize, n: u64) -> usize {
    ((n - 1) % len as u64) as usize
}

fn cover_at<C: CoverStream>(covers: &[C], n: u64) -> &C {
    &covers[cover_slot(covers.len(), n)]
}

fn contains_all(u: &ClopenSet, points: &[Point]) -> SelectResult<Option<usize>> {
    for (i, x) in points.iter().enumerate() {
        if !u.contains(x)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// One gm output per distinct cover.
pub fn gm_tables<C: CoverStream>(covers: &[C], k: u64, stages: u64) -> SelectResult<Vec<GmOutput>> {
    Ok(covers.iter().map(|c| gm_extract(c, k, stages)).collect::<Result<_, _>>()?)
}

fn check_gm<C: CoverStream>(covers: &[C], gm: &[GmOutput], k: u64, stages: u64) -> SelectResult<()> {
    if gm.len() != covers.len() {
        return Err(SelectError::GmShape(format!("{} outputs for {} covers", gm.len(), covers.len())));
    }
    for g in gm {
        if g.k != k {
            return Err(SelectError::GmShape(format!("k = {} where {k} is needed", g.k)));
        }
        if (g.groups.len() as u64) < stages {
            return Err(SelectError::GmShape(format!("{} stages where {stages} are needed", g.groups.len())));
        }
    }
    Ok(())
}

fn require_marked<C: CoverStream>(covers: &[C]) -> SelectResult<()> {
    match covers.iter().position(|c| !c.no_finite_subcover()) {
        Some(i) => Err(SelectError::NotMarked(i as u64 + 1)),
        None => Ok(()),
    }
}

/// Per point, per cover, the least `f` with `x ∈ U^n_j` for `j ∈ [f, M_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaPick {
    /// One-based position in each prefix.
    pub g: Vec<u64>,
    pub f: Vec<Vec<u64>>,
}

/// Pointwise maximum of the functions `f_x` over `points`; the chosen member
/// `U^n_{g(n)}` then contains every point.
pub fn gamma_select_small(prefixes: &[Vec<ClopenSet>], points: &[Point], mode: Mode) -> SelectResult<GammaPick> {
    let mut g = Vec::with_capacity(prefixes.len());
    let mut f = vec![Vec::with_capacity(prefixes.len()); points.len()];
    for (i, prefix) in prefixes.iter().enumerate() {
        let n = i as u64 + 1;
        let len = prefix.len() as u64;
        if len == 0 {
            return Err(SelectError::PrefixTooShort { cover: n, point: 0, len });
        }
        let lo = match mode {
            Mode::Cofinite => 1,
            Mode::Cofinal => n.min(len),
        };
        let mut best = lo;
        for (p, x) in points.iter().enumerate() {
            if !prefix[len as usize - 1].contains(x)? {
                return Err(SelectError::PrefixTooShort { cover: n, point: p, len });
            }
            let mut m = len;
            while m > lo && prefix[m as usize - 2].contains(x)? {
                m -= 1;
            }
            f[p].push(m);
            best = best.max(m);
        }
        g.push(best);
    }
    Ok(GammaPick { g, f })
}

/// Members at `candidates`, taken until the last one holds every point.
fn gamma_prefix<C: CoverStream>(
    cover: &C,
    candidates: impl IntoIterator<Item = u64>,
    points: &[Point],
    cap: u64,
    n: u64,
) -> SelectResult<(Vec<u64>, Vec<ClopenSet>)> {
    let (mut idx, mut sets) = (Vec::new(), Vec::new());
    let mut last_miss = 0;
    for m in candidates.into_iter().take(cap as usize) {
        if cover.len().is_some_and(|l| m > l) {
            break;
        }
        let u = cover.member(m)?;
        let miss = contains_all(&u, points)?;
        idx.push(m);
        sets.push(u);
        match miss {
            None => return Ok((idx, sets)),
            Some(p) => last_miss = p,
        }
    }
    Err(SelectError::PrefixTooShort { cover: n, point: last_miss, len: idx.len() as u64 })
}

/// Least member index up to `cap` containing `x`.
fn least_member<C: CoverStream>(cover: &C, x: &Point, cap: u64) -> SelectResult<Option<u64>> {
    let top = cover.len().map_or(cap, |l| l.min(cap));
    for m in 1..=top {
        if cover.member(m)?.contains(x)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Open interval `⟬a(m), a(m+1)⟭` as a closed range, `None` when empty.
fn open_range(lo: u64, hi: u64) -> Option<(u64, u64)> {
    (hi > lo + 1).then(|| (lo + 1, hi - 1))
}

fn omits_open(x: &Point, lo: u64, hi: u64) -> SelectResult<bool> {
    Ok(match open_range(lo, hi) {
        Some((l, h)) => x.count_in(l, h)? == 0,
        None => true,
    })
}

fn count_at_most(indices: &[u64], v: u64) -> u64 {
    indices.partition_point(|&n| n <= v) as u64
}

/// Least `k` from which the relation's violations stop, zero if there are none.
fn crossing(rel: Rel, a: &IncSeq, b: &IncSeq, horizon: u64) -> SelectResult<Option<u64>> {
    Ok(relate(rel, a, b, horizon)?.violations.last().copied())
}

/// Covers the small part of a Fin-prefix plus scale sample for every `n ∈ I`.
///
/// Off `I` nothing is chosen; on `I` the first `n` gm members are taken, and
/// the small part is covered by extra members (`bs`) or one extra member (`uid`).
fn finite_core<C: CoverStream>(
    covers: &[C],
    sample: &Sample,
    gm: &[GmOutput],
    cfg: &SelectConfig,
    uid: bool,
) -> SelectResult<Run> {
    let h = cfg.horizon;
    let kind = if uid { SelectionKind::NPlusOneBounded } else { SelectionKind::Finite };
    if covers.is_empty() {
        return Ok(empty_run(kind));
    }
    require_marked(covers)?;
    check_gm(covers, gm, 0, h)?;
    let small = sample.small_points();
    let split = sample.split_member();
    let mut indices = Vec::new();
    for n in 1..=h {
        let keep = match split {
            None => true,
            Some(s) => gm[cover_slot(covers.len(), n)].a[n as usize] < s.nth(n)?,
        };
        if keep {
            indices.push(n);
        }
    }
    if indices.is_empty() {
        return Err(SelectError::EmptyI(h));
    }
    let mut groups = vec![Vec::new(); h as usize];
    let mut uid_prefixes = Vec::new();
    let mut uid_members = Vec::new();
    for &n in &indices {
        let cover = cover_at(covers, n);
        let fam: Vec<u64> =
            if split.is_some() { gm[cover_slot(covers.len(), n)].members[..n as usize].to_vec() } else { Vec::new() };
        if uid {
            let cands = (1..).filter(|m| !fam.contains(m));
            let (idx, sets) = gamma_prefix(cover, cands, &small, cfg.search_cap, n)?;
            uid_prefixes.push(sets);
            uid_members.push(idx);
        } else {
            let sets = fam.iter().map(|&m| cover.member(m)).collect::<Result<Vec<_>, _>>()?;
            let mut extra = Vec::new();
            for (p, x) in small.iter().enumerate() {
                let mut covered = false;
                for u in &sets {
                    if u.contains(x)? {
                        covered = true;
                        break;
                    }
                }
                for &m in &extra {
                    if !covered && cover.member(m)?.contains(x)? {
                        covered = true;
                    }
                }
                if !covered {
                    let m = least_member(cover, x, cfg.search_cap)?.ok_or(SelectError::NotCoverable(p))?;
                    if !fam.contains(&m) {
                        extra.push(m);
                    }
                }
            }
            extra.sort_unstable();
            extra.dedup();
            let mut g = fam.clone();
            g.extend(extra);
            groups[n as usize - 1] = g;
        }
        if uid {
            groups[n as usize - 1] = fam;
        }
    }
    if uid {
        let pick = gamma_select_small(&uid_prefixes, &small, Mode::Cofinite)?;
        for (j, &n) in indices.iter().enumerate() {
            groups[n as usize - 1].push(uid_members[j][pick.g[j] as usize - 1]);
        }
    }
    let mut thresholds = vec![0; sample.points().len()];
    if let Some(s_alpha) = split {
        for (j, s) in sample.ordered_part.members.iter().enumerate().skip(sample.split_index + 1) {
            if let Some(v) = crossing(Rel::LeStar, s_alpha, s, h)? {
                thresholds[sample.position(j)] = count_at_most(&indices, v);
            }
        }
    }
    let counted = indices.clone();
    Ok(Run {
        selection: Selection { kind, groups, flagged: Vec::new() },
        counted,
        witness_i: if split.is_some() { indices } else { Vec::new() },
        witness_per_cover: Vec::new(),
        thresholds,
        notes: Vec::new(),
    })
}

fn empty_run(kind: SelectionKind) -> Run {
    Run {
        selection: Selection::empty(kind),
        counted: Vec::new(),
        witness_i: Vec::new(),
        witness_per_cover: Vec::new(),
        thresholds: Vec::new(),
        notes: Vec::new(),
    }
}

/// `ℱ_n = {U^n_1, …, U^n_n} ∪ 𝒢_n` on `I = {n : a_n(n+1) < s_α(n)}`, empty off `I`.
/// `𝒢_n` adds, for each small point outside the gm members, its least member.
pub fn bs_select<C: CoverStream>(covers: &[C], sample: &Sample, gm: &[GmOutput], cfg: &SelectConfig) -> SelectResult<Run> {
    finite_core(covers, sample, gm, cfg, false)
}

/// As `bs_select`, but the small part is covered by one gamma-selected member
/// outside the gm members, so `|ℱ_n| = n + 1` on `I`.
pub fn uid_select<C: CoverStream>(covers: &[C], sample: &Sample, gm: &[GmOutput], cfg: &SelectConfig) -> SelectResult<Run> {
    finite_core(covers, sample, gm, cfg, true)
}

/// Greedy common `b`: each closed `b`-interval holds two consecutive points
/// of every `b_j`.
fn common_b(bs: &[&[u64]]) -> Vec<u64> {
    let mut b = vec![1u64];
    loop {
        let cur = *b.last().unwrap();
        let mut next = cur;
        for bj in bs {
            let p = bj.partition_point(|&v| v < cur);
            match bj.get(p + 1) {
                Some(&v) => next = next.max(v),
                None => return b,
            }
        }
        b.push(next);
    }
}

/// Least `i` with `⟦b_n(i), b_n(i+1)⟧ ⊆ ⟦lo, hi⟧`.
fn inner_interval(bn: &[u64], lo: u64, hi: u64) -> Option<u64> {
    let p = bn.partition_point(|&v| v < lo);
    (bn.get(p + 1).is_some_and(|&v| v <= hi)).then_some(p as u64 + 1)
}

/// Pairs `W^n_{g(n)} = U^n_{2i-1} ∪ U^n_{2i}` with `g(n) ∈ I`, `g(n) >= c(n)`.
pub fn utgg_select<C: CoverStream>(covers: &[C], sample: &Sample, gm: &[GmOutput], cfg: &SelectConfig) -> SelectResult<Run> {
    let h = cfg.horizon;
    if covers.is_empty() {
        return Ok(empty_run(SelectionKind::Pair));
    }
    require_marked(covers)?;
    let small = sample.small_points();
    let Some(s_alpha) = sample.split_member() else {
        // No tail: one gamma-selected member per cover, repeated.
        let mut prefixes = Vec::new();
        let mut idx = Vec::new();
        for n in 1..=h {
            let (i, sets) = gamma_prefix(cover_at(covers, n), 1.., &small, cfg.search_cap, n)?;
            prefixes.push(sets);
            idx.push(i);
        }
        let pick = gamma_select_small(&prefixes, &small, Mode::Cofinite)?;
        let groups = (0..h as usize).map(|j| vec![idx[j][pick.g[j] as usize - 1]; 2]).collect();
        let mut run = empty_run(SelectionKind::Pair);
        run.selection = Selection { kind: SelectionKind::Pair, groups, flagged: (1..=h).collect() };
        run.counted = (1..=h).collect();
        run.thresholds = vec![0; sample.points().len()];
        run.notes.push("no tail part: each pair repeats its single member".into());
        return Ok(run);
    };
    check_gm(covers, gm, 1, h)?;
    let b_lists: Vec<&[u64]> = gm.iter().map(|g| g.b.as_slice()).collect();
    let b = common_b(&b_lists);
    let top = b.len() as u64 - 1;
    let mut witness_i = Vec::new();
    for m in 1..=top {
        if omits_open(&Point::Infinite(s_alpha.clone()), b[m as usize - 1], b[m as usize])? {
            witness_i.push(m);
        }
    }
    if witness_i.is_empty() {
        return Err(SelectError::EmptyI(top));
    }
    let mut prefixes = Vec::new();
    let mut per_cover = Vec::new();
    for n in 1..=h {
        let g = &gm[cover_slot(covers.len(), n)];
        let cover = cover_at(covers, n);
        let mut sets = Vec::new();
        let mut used = Vec::new();
        let mut done = false;
        for &m in witness_i.iter().filter(|&&m| m >= n) {
            let Some(i) = inner_interval(&g.b, b[m as usize - 1], b[m as usize]) else { continue };
            let pair = &g.groups[i as usize - 1];
            let w = cover.member(pair[0])?.union(&cover.member(pair[1])?)?;
            let full = contains_all(&w, &small)?.is_none();
            sets.push(w);
            used.push(m);
            if full {
                done = true;
                break;
            }
        }
        if used.is_empty() {
            return Err(SelectError::EmptyIAt(n));
        }
        if !done {
            let point = small.iter().position(|x| !sets.last().unwrap().contains(x).unwrap_or(false)).unwrap_or(0);
            return Err(SelectError::PrefixTooShort { cover: n, point, len: used.len() as u64 });
        }
        prefixes.push(sets);
        per_cover.push(used);
    }
    let pick = gamma_select_small(&prefixes, &small, Mode::Cofinite)?;
    let mut groups = Vec::with_capacity(h as usize);
    for n in 1..=h {
        let j = n as usize - 1;
        let g = &gm[cover_slot(covers.len(), n)];
        let m = per_cover[j][pick.g[j] as usize - 1];
        let i = inner_interval(&g.b, b[m as usize - 1], b[m as usize]).expect("checked above");
        groups.push(g.groups[i as usize - 1].clone());
    }
    let mut thresholds = vec![0; sample.points().len()];
    for (j, s) in sample.ordered_part.members.iter().enumerate().skip(sample.split_index + 1) {
        if let Some(v) = crossing(Rel::Sqe, s_alpha, s, h)? {
            thresholds[sample.position(j)] = (s.nth(v)?).min(h);
        }
    }
    Ok(Run {
        selection: Selection { kind: SelectionKind::Pair, groups, flagged: Vec::new() },
        counted: (1..=h).collect(),
        witness_i,
        witness_per_cover: per_cover,
        thresholds,
        notes: vec![format!("common b has {} points", b.len())],
    })
}

/// One member per cover, `U^n_{g(n)}` with `g(n) ∈ I_n = {m >= n : t_α omits ⟬a_n(m), a_n(m+1)⟭}`.
pub fn tower_select<C: CoverStream>(covers: &[C], sample: &Sample, gm: &[GmOutput], cfg: &SelectConfig) -> SelectResult<Run> {
    let h = cfg.horizon;
    if covers.is_empty() {
        return Ok(empty_run(SelectionKind::One));
    }
    check_gm(covers, gm, 0, h)?;
    let small = sample.small_points();
    let t_alpha = sample.split_member().map(|t| Point::Infinite(t.clone()));
    let mut prefixes = Vec::new();
    let mut per_cover = Vec::new();
    for n in 1..=h {
        let g = &gm[cover_slot(covers.len(), n)];
        let cover = cover_at(covers, n);
        let stages = g.members.len() as u64;
        let mut sets = Vec::new();
        let mut used = Vec::new();
        let mut done = false;
        for m in n..=stages {
            if let Some(t) = &t_alpha {
                if !omits_open(t, g.a[m as usize - 1], g.a[m as usize])? {
                    continue;
                }
            }
            let u = cover.member(g.members[m as usize - 1])?;
            let full = contains_all(&u, &small)?.is_none();
            sets.push(u);
            used.push(m);
            if full {
                done = true;
                break;
            }
        }
        if used.is_empty() {
            return Err(SelectError::EmptyIAt(n));
        }
        if !done {
            let point = small.iter().position(|x| !sets.last().unwrap().contains(x).unwrap_or(false)).unwrap_or(0);
            return Err(SelectError::PrefixTooShort { cover: n, point, len: used.len() as u64 });
        }
        prefixes.push(sets);
        per_cover.push(used);
    }
    let pick = gamma_select_small(&prefixes, &small, Mode::Cofinite)?;
    let groups = (1..=h)
        .map(|n| {
            let j = n as usize - 1;
            let m = per_cover[j][pick.g[j] as usize - 1];
            vec![gm[cover_slot(covers.len(), n)].members[m as usize - 1]]
        })
        .collect();
    let mut thresholds = vec![0; sample.points().len()];
    if let Some(t) = sample.split_member() {
        for (j, s) in sample.ordered_part.members.iter().enumerate().skip(sample.split_index + 1) {
            if let Some(k) = crossing(Rel::SubStar, s, t, h)? {
                thresholds[sample.position(j)] = (k - 1).min(h);
            }
        }
    }
    let chosen: Vec<u64> = (0..h as usize).map(|j| per_cover[j][pick.g[j] as usize - 1]).collect();
    Ok(Run {
        selection: Selection { kind: SelectionKind::One, groups, flagged: Vec::new() },
        counted: (1..=h).collect(),
        witness_i: chosen,
        witness_per_cover: per_cover,
        thresholds,
        notes: Vec::new(),
    })
}

/// Per-point misses of a selection over the counted covers, rechecked from the covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub misses: Vec<Vec<u64>>,
    pub budgets: Vec<u64>,
    pub counted: u64,
    pub passed: bool,
}

/// Slack allowed beyond each construction threshold.
pub const MISS_SLACK: u64 = 2;

/// Accepts when every point misses at most `threshold + MISS_SLACK` counted
/// covers and every budget is at most a quarter of the counted covers.
pub fn verify_gamma<C: CoverStream>(
    covers: &[C],
    selection: &Selection,
    points: &[Point],
    counted: &[u64],
    thresholds: &[u64],
) -> SelectResult<Report> {
    let mut cache: HashMap<(usize, u64), ClopenSet> = HashMap::new();
    let mut misses = vec![Vec::new(); points.len()];
    for &n in counted {
        let group = selection.groups.get(n as usize - 1).map(Vec::as_slice).unwrap_or(&[]);
        let slot = cover_slot(covers.len().max(1), n);
        let mut members = Vec::with_capacity(group.len());
        for &m in group {
            let u = match cache.get(&(slot, m)) {
                Some(u) => u.clone(),
                None => {
                    let u = covers[slot].member(m)?;
                    cache.insert((slot, m), u.clone());
                    u
                }
            };
            members.push(u);
        }
        for (i, x) in points.iter().enumerate() {
            let mut hit = false;
            for u in &members {
                if u.contains(x)? {
                    hit = true;
                    break;
                }
            }
            if !hit {
                misses[i].push(n);
            }
        }
    }
    let budgets: Vec<u64> = (0..points.len()).map(|i| thresholds.get(i).copied().unwrap_or(0) + MISS_SLACK).collect();
    let counted_len = counted.len() as u64;
    let passed = misses.iter().zip(&budgets).all(|(m, &b)| m.len() as u64 <= b)
        && budgets.iter().all(|&b| 4 * b <= counted_len);
    Ok(Report { misses, budgets, counted: counted_len, passed })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPass {
    pub selection: Selection,
    /// `(point, cover, member)` per placement, first pass before second.
    pub placements: Vec<(usize, u64, u64)>,
    /// Sample points the first pass left uncovered.
    pub leftovers: Vec<usize>,
}

/// Covers the Fin part in a first pass and the ordered points it left
/// uncovered in a second; point `i` of a pass goes to cover `i mod horizon`,
/// falling back to later covers when that one has no member for it.
pub fn menger_two_pass<C: CoverStream>(covers: &[C], sample: &Sample, cfg: &SelectConfig) -> SelectResult<TwoPass> {
    let h = cfg.horizon;
    let points = sample.points();
    if covers.is_empty() || points.is_empty() {
        return Ok(TwoPass { selection: Selection::empty(SelectionKind::Finite), placements: Vec::new(), leftovers: Vec::new() });
    }
    let mut groups: Vec<Vec<u64>> = vec![Vec::new(); h as usize];
    let mut placements = Vec::new();
    let mut place = |p: usize, start: u64, groups: &mut Vec<Vec<u64>>| -> SelectResult<()> {
        for off in 0..h {
            let n = (start + off) % h + 1;
            if let Some(m) = least_member(cover_at(covers, n), &points[p], cfg.search_cap)? {
                if !groups[n as usize - 1].contains(&m) {
                    groups[n as usize - 1].push(m);
                }
                placements.push((p, n, m));
                return Ok(());
            }
        }
        Err(SelectError::NotCoverable(p))
    };
    let fin = sample.fin_part.len();
    for p in 0..fin {
        place(p, p as u64, &mut groups)?;
    }
    let mut leftovers = Vec::new();
    for (p, x) in points.iter().enumerate().skip(fin) {
        let mut covered = false;
        'scan: for (i, g) in groups.iter().enumerate() {
            for &m in g {
                if cover_at(covers, i as u64 + 1).member(m)?.contains(x)? {
                    covered = true;
                    break 'scan;
                }
            }
        }
        if !covered {
            leftovers.push(p);
        }
    }
    for (j, &p) in leftovers.iter().enumerate() {
        place(p, (fin + j) as u64, &mut groups)?;
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    Ok(TwoPass { selection: Selection { kind: SelectionKind::Finite, groups, flagged: Vec::new() }, placements, leftovers })
}

/// Whether every point lies in some chosen member.
pub fn verify_cover<C: CoverStream>(covers: &[C], selection: &Selection, points: &[Point]) -> SelectResult<Vec<usize>> {
    let mut uncovered = Vec::new();
    for (p, x) in points.iter().enumerate() {
        let mut hit = false;
        'scan: for (i, g) in selection.groups.iter().enumerate() {
            for &m in g {
                if cover_at(covers, i as u64 + 1).member(m)?.contains(x)? {
                    hit = true;
                    break 'scan;
                }
            }
        }
        if !hit {
            uncovered.push(p);
        }
    }
    Ok(uncovered)
}

/// A finite family prefix: member indices with their sets.
pub type MemberList = Vec<(u64, ClopenSet)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thinned {
    /// Per family, per class, the member indices of that class.
    pub classes: Vec<Vec<Vec<u64>>>,
    /// Per family, the kept members in family order.
    pub kept: Vec<Vec<u64>>,
    /// Kept members of all families interleaved: `(family, member)`.
    pub sequence: Vec<(usize, u64)>,
}

/// Splits each family into `classes` residue classes of positions, then keeps
/// from each class the tail on which every point lies in every member.
pub fn sinf_thin(families: &[MemberList], points: &[Point], classes: u64) -> SelectResult<Thinned> {
    let classes = classes.max(1);
    let residues = (1..=classes).map(|j| IncSeq::arith(j, classes)).collect::<Result<Vec<_>, _>>()?;
    let mut all_classes = Vec::with_capacity(families.len());
    let mut prefixes = Vec::new();
    let mut owners = Vec::new();
    for (f, fam) in families.iter().enumerate() {
        let take = fam.len() / classes as usize;
        if take == 0 {
            return Err(SelectError::PrefixTooShort { cover: f as u64 + 1, point: 0, len: fam.len() as u64 });
        }
        let split = disjointify(&residues, take)?;
        let mut fam_classes = Vec::with_capacity(split.len());
        for positions in split {
            let mut sorted = positions;
            sorted.sort_unstable();
            prefixes.push(sorted.iter().map(|&p| fam[p as usize - 1].1.clone()).collect::<Vec<_>>());
            owners.push(f);
            fam_classes.push(sorted);
        }
        all_classes.push(fam_classes);
    }
    let pick = gamma_select_small(&prefixes, points, Mode::Cofinite).map_err(|e| match e {
        SelectError::PrefixTooShort { cover, point, len } => {
            SelectError::PrefixTooShort { cover: owners[cover as usize - 1] as u64 + 1, point, len }
        }
        other => other,
    })?;
    let mut kept_pos: Vec<Vec<u64>> = vec![Vec::new(); families.len()];
    let mut s = 0;
    for (f, fam_classes) in all_classes.iter().enumerate() {
        for positions in fam_classes {
            kept_pos[f].extend_from_slice(&positions[pick.g[s] as usize - 1..]);
            s += 1;
        }
        kept_pos[f].sort_unstable();
    }
    let kept: Vec<Vec<u64>> = kept_pos
        .iter()
        .enumerate()
        .map(|(f, ps)| ps.iter().map(|&p| families[f][p as usize - 1].0).collect())
        .collect();
    let classes_out = all_classes
        .iter()
        .enumerate()
        .map(|(f, cs)| cs.iter().map(|ps| ps.iter().map(|&p| families[f][p as usize - 1].0).collect()).collect())
        .collect();
    let longest = kept.iter().map(Vec::len).max().unwrap_or(0);
    let mut sequence = Vec::new();
    for r in 0..longest {
        for (f, k) in kept.iter().enumerate() {
            if let Some(&m) = k.get(r) {
                sequence.push((f, m));
            }
        }
    }
    Ok(Thinned { classes: classes_out, kept, sequence })
}

/// Round `k` gives each of the first `k` families its next member not yet
/// used by any family, until each has `take` members or runs out.
pub fn pairwise_disjoint(families: &[MemberList], take: usize) -> Vec<MemberList> {
    let mut used: HashSet<ClopenSet> = HashSet::new();
    let mut out: Vec<MemberList> = vec![Vec::new(); families.len()];
    let mut cursors = vec![0usize; families.len()];
    let mut k = 0;
    loop {
        k += 1;
        let mut active = false;
        for i in 0..k.min(families.len()) {
            if out[i].len() >= take {
                continue;
            }
            while let Some((m, u)) = families[i].get(cursors[i]) {
                cursors[i] += 1;
                if used.insert(u.clone()) {
                    out[i].push((*m, u.clone()));
                    break;
                }
            }
            if out[i].len() < take && cursors[i] < families[i].len() {
                active = true;
            }
        }
        if !active && k >= families.len() {
            return out;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagonal {
    pub selection: Selection,
    /// Families after the disjointness pass.
    pub disjoint: Vec<Vec<u64>>,
    /// Per cover, the members left after its staged thinning.
    pub kept: Vec<Vec<u64>>,
    /// Per cover `n`, the chain element `X_min(n,k)` it was last thinned for.
    pub stage: Vec<usize>,
}

/// Staged thinning along an increasing chain `X_1 ⊆ … ⊆ X_k`: family `n` is
/// thinned for `X_1, …, X_min(n,k)` in turn and contributes its first survivor.
pub fn jordan_diagonal(chain: &[Vec<Point>], families: &[MemberList], take: usize, classes: u64) -> SelectResult<Diagonal> {
    for i in 1..chain.len() {
        if !chain[i - 1].iter().all(|x| chain[i].contains(x)) {
            return Err(SelectError::NotAChain(i + 1));
        }
    }
    if families.is_empty() {
        return Ok(Diagonal {
            selection: Selection::empty(SelectionKind::One),
            disjoint: Vec::new(),
            kept: Vec::new(),
            stage: Vec::new(),
        });
    }
    let disjoint = pairwise_disjoint(families, take);
    let mut groups = Vec::with_capacity(families.len());
    let mut kept_all = Vec::with_capacity(families.len());
    let mut stage = Vec::with_capacity(families.len());
    for (i, fam) in disjoint.iter().enumerate() {
        let n = i + 1;
        let last = n.min(chain.len());
        let mut cur = fam.clone();
        for x in &chain[..last] {
            let r = classes.min(cur.len() as u64).max(1);
            let t = sinf_thin(std::slice::from_ref(&cur), x, r).map_err(|e| match e {
                SelectError::PrefixTooShort { point, len, .. } => {
                    SelectError::PrefixTooShort { cover: n as u64, point, len }
                }
                other => other,
            })?;
            let keep: HashSet<u64> = t.kept[0].iter().copied().collect();
            cur.retain(|(m, _)| keep.contains(m));
        }
        let first = cur.first().ok_or(SelectError::PrefixTooShort { cover: n as u64, point: 0, len: 0 })?;
        groups.push(vec![first.0]);
        kept_all.push(cur.iter().map(|(m, _)| *m).collect());
        stage.push(last);
    }
    Ok(Diagonal {
        selection: Selection { kind: SelectionKind::One, groups, flagged: Vec::new() },
        disjoint: disjoint.iter().map(|f| f.iter().map(|(m, _)| *m).collect()).collect(),
        kept: kept_all,
        stage,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbStep {
    pub alpha: usize,
    pub beta: usize,
    /// `a(1), …` from the gm run restricted to members holding the small part.
    pub a: Vec<u64>,
    pub members: Vec<u64>,
    /// `I = {m : t_β omits ⟬a(m), a(m+1)⟭}`.
    pub omitted: Vec<u64>,
}

impl AbStep {
    /// `{U_m : m ∈ I}` as member indices.
    pub fn family(&self) -> Vec<u64> {
        self.omitted.iter().map(|&m| self.members[m as usize - 1]).collect()
    }
}

/// gm run over the members containing every point of `Fin ∪ {t_β : β < alpha}`
/// in the sample, then the least `β >= min_beta` with at least
/// `cfg.min_witnesses` omitted open `a`-intervals.
pub fn ab_step<C: CoverStream>(
    cover: &C,
    sample: &Sample,
    alpha: usize,
    min_beta: usize,
    stages: u64,
    cfg: &SelectConfig,
) -> SelectResult<AbStep> {
    let tower = &sample.ordered_part.members;
    let small: Vec<Point> = sample
        .fin_part
        .iter()
        .cloned()
        .map(Point::Finite)
        .chain(tower[..alpha.min(tower.len())].iter().cloned().map(Point::Infinite))
        .collect();
    let mut a = vec![1u64];
    let mut members = Vec::new();
    let mut rejected = Vec::new();
    for _ in 0..stages {
        let cur = *a.last().unwrap();
        let mut tries = 0;
        let i = loop {
            let mut exclude = members.clone();
            exclude.extend_from_slice(&rejected);
            let i = cover.omega_query(&Family::PowerSet(cur), &exclude)?;
            if contains_all(&cover.member(i)?, &small)?.is_none() {
                break i;
            }
            rejected.push(i);
            tries += 1;
            if tries > cfg.search_cap {
                return Err(CoverError::OmegaQueryFailed.into());
            }
        };
        a.push(clopen_modulus(&cover.member(i)?, cur)?);
        members.push(i);
    }
    for (beta, member) in tower.iter().enumerate().skip(min_beta) {
        let t = Point::Infinite(member.clone());
        let mut omitted = Vec::new();
        for m in 1..=stages {
            if omits_open(&t, a[m as usize - 1], a[m as usize])? {
                omitted.push(m);
            }
        }
        if omitted.len() as u64 >= cfg.min_witnesses {
            return Ok(AbStep { alpha, beta, a, members, omitted });
        }
    }
    Err(SelectError::TowerExhausted(min_beta))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrownRun {
    pub steps: Vec<AbStep>,
    /// `α_1 < α_2 < …`; the last entry is the final `α`.
    pub alphas: Vec<usize>,
    /// Sample positions of each chain element `Y_n`.
    pub chain: Vec<Vec<usize>>,
    pub diagonal: Diagonal,
    pub run: Run,
}

/// `stages` ab-steps with strictly increasing split indices, the chain
/// `Y_n = X_{<α_n} ∪ X_{>=α}` (with `Y_n = X` past the stages), then the
/// staged diagonal over the families `{U_m : m ∈ I}`.
pub fn crown_run<C: CoverStream>(
    covers: &[C],
    sample: &Sample,
    stages: usize,
    take: usize,
    cfg: &SelectConfig,
) -> SelectResult<CrownRun> {
    let h = cfg.horizon;
    let points = sample.points();
    if covers.is_empty() {
        return Ok(CrownRun {
            steps: Vec::new(),
            alphas: Vec::new(),
            chain: Vec::new(),
            diagonal: jordan_diagonal(&[], &[], take, 2)?,
            run: empty_run(SelectionKind::One),
        });
    }
    // The disjointness pass draws up to `take` members per cover from a shared pool.
    let gm_stages = 2 * h * take as u64 + cfg.lookahead;
    let len = sample.ordered_part.members.len();
    let stages = stages.min(h as usize);
    let mut alphas = vec![0usize];
    let mut steps = Vec::new();
    for n in 1..=stages as u64 {
        let alpha = *alphas.last().unwrap();
        let step = ab_step(cover_at(covers, n), sample, alpha, alpha + 1, gm_stages, cfg)?;
        alphas.push(step.beta);
        steps.push(step);
    }
    let alpha = *alphas.last().unwrap();
    let closing = closing_steps(covers, sample, alpha, gm_stages, cfg)?;
    let fin = sample.fin_part.len();
    let y = |an: usize| -> Vec<usize> {
        (0..fin).chain((0..an.min(len)).map(|j| fin + j)).chain((alpha..len).map(|j| fin + j)).collect()
    };
    let mut chain_pos: Vec<Vec<usize>> = alphas[..stages].iter().map(|&an| y(an)).collect();
    chain_pos.push((0..points.len()).collect());
    let chain: Vec<Vec<Point>> = chain_pos.iter().map(|ps| ps.iter().map(|&p| points[p].clone()).collect()).collect();
    let mut families = Vec::with_capacity(h as usize);
    for n in 1..=h {
        let cover = cover_at(covers, n);
        let step = if (n as usize) <= stages { &steps[n as usize - 1] } else { &closing[cover_slot(covers.len(), n)] };
        let fam = step.family().into_iter().map(|m| Ok((m, cover.member(m)?))).collect::<SelectResult<MemberList>>()?;
        families.push(fam);
    }
    let staged_chain = chain;
    let diagonal = jordan_diagonal(&staged_chain, &families, take, 2)?;
    let mut thresholds = vec![0u64; points.len()];
    for (p, t) in thresholds.iter_mut().enumerate() {
        let first = staged_chain.iter().position(|c| c.contains(&points[p])).unwrap_or(staged_chain.len());
        *t = first as u64;
    }
    let run = Run {
        selection: diagonal.selection.clone(),
        counted: (1..=h).collect(),
        witness_i: Vec::new(),
        witness_per_cover: steps.iter().map(|s| s.omitted.clone()).collect(),
        thresholds,
        notes: vec![format!("alphas {:?}", alphas)],
    };
    Ok(CrownRun { steps, alphas, chain: chain_pos, diagonal, run })
}

/// One ab-step per cover slot at split `alpha`; the family must be Γ on all
/// of the sample, so `β` may not exceed `alpha`.
fn closing_steps<C: CoverStream>(
    covers: &[C],
    sample: &Sample,
    alpha: usize,
    gm_stages: u64,
    cfg: &SelectConfig,
) -> SelectResult<Vec<AbStep>> {
    covers
        .iter()
        .map(|c| {
            let step = ab_step(c, sample, alpha, 0, gm_stages, cfg)?;
            if step.beta > alpha {
                return Err(SelectError::TowerExhausted(alpha));
            }
            Ok(step)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JordanRun {
    /// One closing step per cover slot.
    pub steps: Vec<AbStep>,
    /// Sample positions of `X_1 = small part` and `X_2 = X`.
    pub chain: Vec<Vec<usize>>,
    pub diagonal: Diagonal,
    pub run: Run,
}

/// The staged diagonal over the two-element chain `small part ⊆ X`, with the
/// cyclic families `{U_m : m ∈ I}` of one closing step per cover slot.
pub fn jordan_run<C: CoverStream>(covers: &[C], sample: &Sample, take: usize, cfg: &SelectConfig) -> SelectResult<JordanRun> {
    let h = cfg.horizon;
    let points = sample.points();
    if covers.is_empty() {
        return Ok(JordanRun {
            steps: Vec::new(),
            chain: Vec::new(),
            diagonal: jordan_diagonal(&[], &[], take, 2)?,
            run: empty_run(SelectionKind::One),
        });
    }
    let gm_stages = 2 * h * take as u64 + cfg.lookahead;
    let steps = closing_steps(covers, sample, sample.split_index, gm_stages, cfg)?;
    let small = sample.small_points().len();
    let chain_pos = vec![(0..small).collect::<Vec<_>>(), (0..points.len()).collect()];
    let chain: Vec<Vec<Point>> = chain_pos.iter().map(|ps| ps.iter().map(|&p| points[p].clone()).collect()).collect();
    let mut families = Vec::with_capacity(h as usize);
    for n in 1..=h {
        let cover = cover_at(covers, n);
        let step = &steps[cover_slot(covers.len(), n)];
        families.push(step.family().into_iter().map(|m| Ok((m, cover.member(m)?))).collect::<SelectResult<MemberList>>()?);
    }
    let diagonal = jordan_diagonal(&chain, &families, take, 2)?;
    let thresholds = (0..points.len()).map(|p| u64::from(p >= small)).collect();
    let run = Run {
        selection: diagonal.selection.clone(),
        counted: (1..=h).collect(),
        witness_i: Vec::new(),
        witness_per_cover: steps.iter().map(|s| s.omitted.clone()).collect(),
        thresholds,
        notes: Vec::new(),
    };
    Ok(JordanRun { steps, chain: chain_pos, diagonal, run })
}

/// Searches the ordered part from the end for the first member whose
/// witness count reaches `min`.
pub fn scan_split(members: &[IncSeq], min: u64, count: impl Fn(&IncSeq) -> SelectResult<u64>) -> SelectResult<Option<usize>> {
    for j in (0..members.len()).rev() {
        if count(&members[j])? >= min {
            return Ok(Some(j));
        }
    }
    Ok(None)
}
