//! Block partitions, block selectors and hitting-set tools.

mod block;

pub use block::{BlockPartition, BlockSelector, Width};

use serde::{Deserialize, Serialize};

use crate::covers::ClopenSet;
use crate::seqcore::{relate, IncSeq, Point, Rel, SeqError, SeqResult};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HitError {
    #[error("{m} is not in block {n}")]
    MOutOfBlock { n: u64, m: u64 },
    #[error("no sample point hits the selection {threshold} times")]
    NoDefeaterInSample { threshold: u64 },
    #[error("selection groups have inconsistent sizes")]
    GroupShape,
    #[error("selector needs a constant width")]
    NeedsConstWidth,
    #[error(transparent)]
    Seq(#[from] SeqError),
}

pub type HitResult<T> = Result<T, HitError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Linear,
    Doubling,
}

pub fn default_partition(growth: Growth) -> BlockPartition {
    match growth {
        Growth::Linear => BlockPartition::Linear,
        Growth::Doubling => BlockPartition::Doubling,
    }
}

/// `{x : m ∉ x}` for `m ∈ I_n`.
pub fn basic_open(part: &BlockPartition, n: u64, m: u64) -> HitResult<ClopenSet> {
    if !part.block(n)?.contains(&m) {
        return Err(HitError::MOutOfBlock { n, m });
    }
    Ok(ClopenSet::avoiding(m))
}

/// Whether `g(n) ⊆ s`.
pub fn hits(s: &Point, g: &BlockSelector, n: u64) -> SeqResult<bool> {
    for v in g.choose(n)? {
        if !s.contains(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `|{n <= horizon : g(n) ⊆ s}|`.
pub fn hitting_count(s: &Point, g: &BlockSelector, horizon: u64) -> SeqResult<u64> {
    let mut c = 0;
    for n in 1..=horizon {
        if hits(s, g, n)? {
            c += 1;
        }
    }
    Ok(c)
}

/// `⋃_{n ∈ s} g(n)`.
pub fn perturb(s: &IncSeq, g: &BlockSelector) -> IncSeq {
    IncSeq::blocks(s.clone(), g.clone())
}

/// An index prefix `t` and the block union `s' = ⋃_{m ∈ t} g(m)`.
///
/// Both are certified only up to the horizon they were built for; `t`
/// continues past its prefix with the step of its last two entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub t: IncSeq,
    pub t_prefix: Vec<u64>,
    pub s_prime: IncSeq,
    pub horizon: u64,
}

fn continue_list(prefix: Vec<u64>) -> SeqResult<IncSeq> {
    let last = *prefix.last().expect("non-empty prefix");
    let step = match prefix.len() {
        1 => 1,
        l => last - prefix[l - 2],
    };
    IncSeq::list(prefix, last + step, step)
}

fn const_width(g: &BlockSelector) -> HitResult<u64> {
    match g.width() {
        Width::Const(k) => Ok(k),
        Width::Id => Err(HitError::NeedsConstWidth),
    }
}

/// Least block index `>= from` holding at least `k` elements.
fn first_full_block(part: &BlockPartition, k: u64, from: u64) -> SeqResult<u64> {
    let mut m = from.max(1);
    while part.len(m)? < k {
        m += 1;
    }
    Ok(m)
}

/// Blocks `m_1 < m_2 < …` with `s(kn) < min I_{m_n}`, so `s <= ⋃ g(m_n)` pointwise.
pub fn kun_embed(k: u64, g: &BlockSelector, s: &IncSeq, horizon: u64) -> HitResult<Embedding> {
    if const_width(g)? != k {
        return Err(HitError::NeedsConstWidth);
    }
    let part = g.partition();
    let rounds = horizon.div_ceil(k) + 1;
    let mut t: Vec<u64> = Vec::with_capacity(rounds as usize);
    for n in 1..=rounds {
        let bound = s.nth(k * n)?;
        let next = t.last().map_or(1, |m| m + 1).max(part.block_of(bound)? + 1);
        t.push(first_full_block(part, k, next)?);
    }
    let t_seq = continue_list(t.clone())?;
    let s_prime = perturb(&t_seq, g);
    Ok(Embedding { t: t_seq, t_prefix: t, s_prime, horizon })
}

/// Re-checks `s(kn) < s'(k(n-1)+1)` and `s(i) <= s'(i)` up to the embedding's horizon.
pub fn check_kun(k: u64, s: &IncSeq, e: &Embedding) -> SeqResult<bool> {
    let h = e.horizon;
    let sp = e.s_prime.prefix(h + k)?;
    let sv = s.prefix(h + k)?;
    let counting = (1..=h.div_ceil(k)).all(|n| sv[(k * n - 1) as usize] < sp[(k * (n - 1)) as usize]);
    let pointwise = (0..h as usize).all(|i| sv[i] <= sp[i]);
    Ok(counting && pointwise)
}

/// Blocks spaced so that two points of `s` separate consecutive chosen blocks;
/// then every window `⟬s(n), s(n+2)⟭` meets at most one chosen block.
pub fn sparse_embed(s: &IncSeq, k: u64, g: &BlockSelector, horizon: u64) -> HitResult<Embedding> {
    if const_width(g)? != k {
        return Err(HitError::NeedsConstWidth);
    }
    let part = g.partition();
    let top = s.nth(horizon + 2)?;
    let mut t = vec![first_full_block(part, k, 1)?];
    let mut j = 1u64;
    loop {
        let last_max = *g.choose(*t.last().unwrap())?.last().expect("non-empty block choice");
        if last_max > top {
            break;
        }
        while s.nth(j)? <= last_max {
            j += 1;
        }
        let need = s.nth(j + 1)?;
        let next = (t.last().unwrap() + 1).max(part.block_of(need)? + 1);
        t.push(first_full_block(part, k, next)?);
    }
    let t_seq = continue_list(t.clone())?;
    let s_prime = perturb(&t_seq, g);
    Ok(Embedding { t: t_seq, t_prefix: t, s_prime, horizon })
}

/// Largest `|s' ∩ ⟬s(n), s(n+2)⟭|` over `n <= horizon`.
pub fn max_window(s: &IncSeq, s_prime: &IncSeq, horizon: u64) -> SeqResult<u64> {
    let sv = s.prefix(horizon + 2)?;
    let pts = s_prime.upto(sv[horizon as usize + 1])?;
    Ok((0..horizon as usize)
        .map(|i| {
            let lo = pts.partition_point(|&v| v <= sv[i]);
            let hi = pts.partition_point(|&v| v < sv[i + 2]);
            (hi - lo) as u64
        })
        .max()
        .unwrap_or(0))
}

/// A subset `s' ⊆ g[ℕ]` whose closed intervals each hold two points of `s`,
/// so `s ⊑ s'`. Built up to `horizon` intervals.
pub fn subset_refinement(s: &IncSeq, g: &BlockSelector, horizon: u64) -> HitResult<IncSeq> {
    let image = perturb(&IncSeq::identity(), g);
    let mut it = image.iter();
    let mut next_image = |at_least: u64| -> SeqResult<u64> {
        loop {
            match it.next() {
                Some(v) => {
                    let v = v?;
                    if v >= at_least {
                        return Ok(v);
                    }
                }
                None => return Err(SeqError::DescriptorExhausted(0)),
            }
        }
    };
    let mut out = vec![next_image(1)?];
    let mut j = 1u64;
    while (out.len() as u64) <= horizon + 1 {
        let cur = *out.last().unwrap();
        while s.nth(j)? < cur {
            j += 1;
        }
        out.push(next_image(s.nth(j + 1)?)?);
    }
    Ok(continue_list(out)?)
}

/// `c(n+1) = a(i + d(n) + 1)` with `i` least such that `a(i) >= c(n)` and
/// `d(n) = Σ_{m <= c(n)} f(m)`: the open interval `⟬c(n), c(n+1)⟭` then holds
/// `d(n) + 1` disjoint open `a`-intervals. Stops at the first term above `limit`
/// or at the first term that leaves u64.
pub fn perturbation_guard(width: Width, a: &IncSeq, limit: u64) -> SeqResult<Vec<u64>> {
    let mut c = vec![1u64];
    while *c.last().unwrap() <= limit {
        let cur = *c.last().unwrap();
        let d = match width {
            Width::Const(k) => k.checked_mul(cur),
            Width::Id => cur.checked_mul(cur + 1).map(|v| v / 2),
        };
        let Some(d) = d else { break };
        let i0 = a.count_le(cur - 1)? + 1;
        match i0.checked_add(d + 1).map(|i| a.nth(i)) {
            Some(Ok(v)) => c.push(v),
            Some(Err(SeqError::Overflow(_))) | None => break,
            Some(Err(e)) => return Err(e),
        }
    }
    Ok(c)
}

/// For each `n` whose `c`-interval lies below `check_bound` and is omitted by `s`,
/// whether some open `a`-interval inside it is omitted by `⋃ g[s]`.
/// Returns the checked `n` and any that failed.
pub fn check_guard(c: &[u64], a: &IncSeq, g: &BlockSelector, s: &Point, check_bound: u64) -> SeqResult<(Vec<u64>, Vec<u64>)> {
    let part = g.partition();
    let in_b = |x: u64| -> SeqResult<bool> {
        let n = part.block_of(x)?;
        Ok(s.contains(n)? && g.choose(n)?.binary_search(&x).is_ok())
    };
    let (mut checked, mut failed) = (Vec::new(), Vec::new());
    for (i, w) in c.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        if hi > check_bound {
            break;
        }
        if s.count_in(lo + 1, hi - 1)? > 0 {
            continue;
        }
        checked.push(i as u64 + 1);
        let mut found = false;
        let mut j = 1u64;
        loop {
            let (al, ah) = (a.nth(j)?, a.nth(j + 1)?);
            if ah > hi {
                break;
            }
            if al >= lo && ah > al + 1 {
                let mut empty = true;
                for x in al + 1..ah {
                    if in_b(x)? {
                        empty = false;
                        break;
                    }
                }
                if empty {
                    found = true;
                    break;
                }
            }
            j += 1;
        }
        if !found {
            failed.push(i as u64 + 1);
        }
    }
    Ok((checked, failed))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefeatReport {
    /// The selector induced by the selection, in DSL form.
    pub induced: String,
    /// Sample index of the defeating point.
    pub point: usize,
    /// Every `n` with `g(n) ⊆ x`, where the chosen sets all miss `x`.
    pub failures: Vec<u64>,
}

/// The selector `g(n) = {m : O^n_m chosen}` induced by a selection of basic opens.
pub fn induced_selector(part: &BlockPartition, selection: &[Vec<u64>]) -> HitResult<BlockSelector> {
    let widest = selection.iter().map(Vec::len).max().unwrap_or(1) as u64;
    for (i, grp) in selection.iter().enumerate() {
        let n = i as u64 + 1;
        for &m in grp {
            if !part.block(n)?.contains(&m) {
                return Err(HitError::MOutOfBlock { n, m });
            }
        }
    }
    // Groups of size min(k, |I_n|) read as constant width k, groups of size min(n, |I_n|) as width id.
    BlockSelector::new(part.clone(), Width::Const(widest), None, selection.to_vec())
        .or_else(|_| BlockSelector::new(part.clone(), Width::Id, None, selection.to_vec()))
        .map_err(|_| HitError::GroupShape)
}

/// Finds the sample point most often outside the selected basic opens.
pub fn defeat_gamma_selection(
    part: &BlockPartition,
    sample: &[Point],
    selection: &[Vec<u64>],
    threshold: u64,
) -> HitResult<DefeatReport> {
    if selection.is_empty() {
        return Err(HitError::NoDefeaterInSample { threshold });
    }
    let g = induced_selector(part, selection)?;
    let horizon = selection.len() as u64;
    let mut best: Option<(usize, Vec<u64>)> = None;
    for (i, x) in sample.iter().enumerate() {
        let mut failures = Vec::new();
        for n in 1..=horizon {
            if hits(x, &g, n)? {
                failures.push(n);
            }
        }
        if best.as_ref().is_none_or(|(_, f)| failures.len() > f.len()) {
            best = Some((i, failures));
        }
    }
    match best {
        Some((point, failures)) if failures.len() as u64 >= threshold => {
            Ok(DefeatReport { induced: g.to_string(), point, failures })
        }
        _ => Err(HitError::NoDefeaterInSample { threshold }),
    }
}

/// Selects, per block, the `k` elements contained in the fewest sample points;
/// ties go to the smallest element.
pub fn greedy_selection(part: &BlockPartition, sample: &[Point], k: u64, horizon: u64) -> SeqResult<Vec<Vec<u64>>> {
    (1..=horizon)
        .map(|n| {
            let mut scored: Vec<(usize, u64)> = Vec::new();
            for m in part.block(n)? {
                let mut hits = 0;
                for x in sample {
                    if x.contains(m)? {
                        hits += 1;
                    }
                }
                scored.push((hits, m));
            }
            scored.sort_unstable();
            let mut chosen: Vec<u64> = scored.iter().take(k as usize).map(|&(_, m)| m).collect();
            chosen.sort_unstable();
            Ok(chosen)
        })
        .collect()
}

/// `relate(⊑, s, s')` re-check used by refinement plans.
pub fn refinement_holds(s: &IncSeq, s_prime: &IncSeq, horizon: u64) -> SeqResult<bool> {
    let v = relate(Rel::Sqe, s, s_prime, horizon)?;
    Ok(v.violations.iter().all(|&n| n <= 1))
}
