//! Finite-stage diagonal constructions: splitters, interval omission,
//! interval-union dominators, and scale and tower builders.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::seqcore::{omitted_indices, relate, Bracket, IncSeq, Point, Rel, SeqError, SeqResult, Verdict, SCAN_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructError {
    #[error("the family is empty")]
    EmptyFamily,
    #[error("oracle member {0} repeats an earlier member")]
    DuplicateOracle(usize),
    #[error("{0} needs a closed-form arithmetic tail")]
    NeedsLinearTail(String),
    #[error("no closed form found below the scan limit")]
    NoClosedForm,
    #[error("prefix kind {found:?} does not match {wanted:?}")]
    KindMismatch { wanted: ScaleKind, found: ScaleKind },
    #[error("member {0} is not almost contained in an earlier member")]
    NotATower(usize),
    #[error("member {0} has no index up to the horizon with s(n) <= g(n)")]
    EmptyTransform(usize),
    #[error("the family has an empty intersection up to {0}")]
    CenteredCheckFailed(u64),
    #[error("witness target {wanted} not reached: {found} found")]
    TooFewWitnesses { wanted: u64, found: u64 },
    #[error(transparent)]
    Seq(#[from] SeqError),
}

pub type ConstructResult<T> = Result<T, ConstructError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleRole {
    Dominating,
    Unbounded,
}

/// Finite stand-in for an enumerated family of functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleFamily {
    members: Vec<IncSeq>,
    pub role: OracleRole,
}

impl OracleFamily {
    pub fn new(members: Vec<IncSeq>, role: OracleRole) -> ConstructResult<Self> {
        if members.is_empty() {
            return Err(ConstructError::EmptyFamily);
        }
        for (i, m) in members.iter().enumerate() {
            if members[..i].contains(m) {
                return Err(ConstructError::DuplicateOracle(i));
            }
        }
        Ok(OracleFamily { members, role })
    }

    pub fn members(&self) -> &[IncSeq] {
        &self.members
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    LeStar,
    Sqe,
    Tower,
    Unbounded,
}

impl ScaleKind {
    /// Relation required between members `i < j`, as `(rel, earlier_first)`.
    fn order(self) -> Option<(Rel, bool)> {
        match self {
            ScaleKind::LeStar => Some((Rel::LeStar, true)),
            ScaleKind::Sqe => Some((Rel::Sqe, true)),
            ScaleKind::Tower => Some((Rel::SubStar, false)),
            ScaleKind::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalePrefix {
    pub kind: ScaleKind,
    pub members: Vec<IncSeq>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub earlier: usize,
    pub later: usize,
    pub verdict: Verdict,
}

impl ScalePrefix {
    pub fn new(kind: ScaleKind) -> Self {
        ScalePrefix { kind, members: Vec::new() }
    }

    /// Verdicts for every pair `i < j` (1-based) under the kind's order.
    pub fn certificates(&self, horizon: u64) -> SeqResult<Vec<PairCertificate>> {
        let Some((rel, earlier_first)) = self.kind.order() else { return Ok(Vec::new()) };
        let mut out = Vec::new();
        for j in 0..self.members.len() {
            for i in 0..j {
                let (a, b) = if earlier_first { (i, j) } else { (j, i) };
                let verdict = relate(rel, &self.members[a], &self.members[b], horizon)?;
                out.push(PairCertificate { earlier: i + 1, later: j + 1, verdict });
            }
        }
        Ok(out)
    }

    pub fn is_valid(&self, horizon: u64) -> SeqResult<bool> {
        Ok(self.certificates(horizon)?.iter().all(|c| c.verdict.holds()))
    }
}

fn tail_of(x: &IncSeq) -> ConstructResult<(u64, u64, u64)> {
    x.linear_tail().ok_or_else(|| ConstructError::NeedsLinearTail(x.to_string()))
}

/// `prefix` followed by `start, start + step, …`.
fn eventually_arith(prefix: Vec<u64>, start: u64, step: u64) -> SeqResult<IncSeq> {
    IncSeq::list(prefix, start, step)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub a: IncSeq,
    pub a_compl: IncSeq,
    /// Indices `n <= horizon` with `g(n) <= a(n)`.
    pub witnesses_a: Vec<u64>,
    /// Indices `n <= horizon` with `g(n) <= a^c(n)`.
    pub witnesses_compl: Vec<u64>,
}

/// `a = ⋃_n ⟦tilde g(2n-1), tilde g(2n)⟬`; both `a` and its complement
/// infinitely often dominate `g`.
pub fn split_by_g(g: &IncSeq, horizon: u64) -> ConstructResult<Split> {
    let t = IncSeq::tilde(g.clone());
    let a = IncSeq::iunion(IncSeq::arith(1, 2)?, t.clone());
    let a_compl = IncSeq::compl(a.clone(), IncSeq::iunion(IncSeq::arith(2, 2)?, t))?;
    let witnesses_a = relate(Rel::LeInf, g, &a, horizon)?.witnesses().to_vec();
    let witnesses_compl = relate(Rel::LeInf, g, &a_compl, horizon)?.witnesses().to_vec();
    Ok(Split { a, a_compl, witnesses_a, witnesses_compl })
}

/// The set `ℕ ∖ ⋃ gaps`, continued past the last gap with the given step.
/// Gaps are closed, increasing, and separated by at least one kept natural.
fn gapped(gaps: &[(u64, u64)], tail_step: u64) -> SeqResult<IncSeq> {
    let Some(&(_, last)) = gaps.last() else {
        return IncSeq::arith(1, tail_step);
    };
    let mut bounds = Vec::with_capacity(2 * gaps.len() + 2);
    if gaps[0].0 > 1 {
        bounds.extend([1, gaps[0].0]);
    }
    for w in gaps.windows(2) {
        bounds.extend([w[0].1 + 1, w[1].0]);
    }
    bounds.push(last + 1);
    let base = eventually_arith(bounds.clone(), last + 2, 1)?;
    let runs = bounds.len() as u64 / 2;
    let index = match tail_step {
        1 => eventually_arith((0..runs).map(|i| 2 * i + 1).collect(), 2 * runs + 1, 1)?,
        2 => IncSeq::arith(1, 2)?,
        _ => return Err(SeqError::Invalid("tail step must be 1 or 2".into())),
    };
    Ok(IncSeq::iunion(index, base))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Omission {
    pub s: IncSeq,
    /// The closed gaps removed, in order.
    pub gaps: Vec<(u64, u64)>,
    /// Per family member, the closed interval indices the gaps cover.
    pub witnesses: Vec<Vec<u64>>,
}

fn omit_round_robin(ys: &[IncSeq], rounds: u64, tail_step: u64) -> ConstructResult<Omission> {
    if ys.is_empty() {
        return Err(ConstructError::EmptyFamily);
    }
    let mut gaps = Vec::new();
    let mut own: Vec<Vec<u64>> = vec![Vec::new(); ys.len()];
    let mut next = 1u64;
    for _ in 0..rounds {
        for (i, y) in ys.iter().enumerate() {
            let n = y.count_le(next - 1)? + 1;
            let (lo, hi) = (y.nth(n)?, y.nth(n + 1)?);
            gaps.push((lo, hi));
            own[i].push(n);
            next = hi + 2;
        }
    }
    let s = gapped(&gaps, tail_step)?;
    let horizon = own.iter().flatten().copied().max().unwrap_or(0);
    let x = Point::Infinite(s.clone());
    let witnesses = ys
        .iter()
        .map(|y| omitted_indices(&x, y, Bracket::Closed, horizon))
        .collect::<SeqResult<Vec<_>>>()?;
    Ok(Omission { s, gaps, witnesses })
}

/// Cycles through `ys`, each stage skipping one whole closed `y`-interval past the
/// previous gap; every member ends up with at least `rounds` omitted closed intervals.
pub fn omit_closed_family(ys: &[IncSeq], rounds: u64) -> ConstructResult<Omission> {
    omit_round_robin(ys, rounds, 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dominator {
    /// Index set; co-infinite.
    pub b: IncSeq,
    /// `⋃_{n ∈ b} ⟦a(n), a(n+1)⟬`.
    pub c: IncSeq,
    /// Per member `y`, closed `quot(tilde y, a)`-interval indices omitted by `b`.
    pub omitted: Vec<Vec<u64>>,
    /// Per member `y`, indices `n <= horizon` with `y(n) <= c(n)`.
    pub witnesses: Vec<Vec<u64>>,
    /// Infinite part of `ℕ ∖ b`.
    pub b_compl_cert: IncSeq,
}

/// Gaps in `b` over the quotients `quot(tilde y, a)` leave closed `tilde y`-intervals
/// outside `c`, each of which gives a witness for `y <=∞ c`. Gaps are added one
/// round at a time until every member has `rounds` witnesses up to `horizon`.
pub fn interval_union_dominator(ys: &[IncSeq], a: &IncSeq, rounds: u64, horizon: u64) -> ConstructResult<Dominator> {
    if ys.is_empty() {
        return Err(ConstructError::EmptyFamily);
    }
    let quots: Vec<IncSeq> = ys.iter().map(|y| IncSeq::quot(IncSeq::tilde(y.clone()), a.clone())).collect();
    let yvs = ys.iter().map(|y| prefix_upto_overflow(y, horizon)).collect::<SeqResult<Vec<_>>>()?;
    let mut gaps = 1;
    loop {
        let om = omit_round_robin(&quots, gaps, 2)?;
        let c = IncSeq::iunion(om.s.clone(), a.clone());
        let cv = prefix_upto_overflow(&c, horizon)?;
        let witnesses: Vec<Vec<u64>> = yvs
            .iter()
            .map(|yv| (0..yv.len().min(cv.len())).filter(|&i| yv[i] <= cv[i]).map(|i| i as u64 + 1).collect())
            .collect();
        let found = witnesses.iter().map(|w| w.len() as u64).min().unwrap_or(0);
        let top = om.gaps.last().map_or(0, |g| g.1);
        if found >= rounds {
            let b_compl_cert = IncSeq::arith(top + 2, 2)?;
            return Ok(Dominator { b: om.s, c, omitted: om.witnesses, witnesses, b_compl_cert });
        }
        // Later gaps lie beyond `c(horizon)` and cannot add witnesses.
        let past = cv.last().is_none_or(|&v| a.nth(top).map_or(true, |t| t > v));
        if past || gaps >= rounds.saturating_mul(64) {
            return Err(ConstructError::TooFewWitnesses { wanted: rounds, found });
        }
        gaps += 1;
    }
}

/// `x(1), …, x(horizon)`, stopping early where values leave u64.
fn prefix_upto_overflow(x: &IncSeq, horizon: u64) -> SeqResult<Vec<u64>> {
    let mut out = Vec::with_capacity(horizon as usize);
    for v in x.iter().take(horizon as usize) {
        match v {
            Ok(v) => out.push(v),
            Err(SeqError::Overflow(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitStep {
    pub s: IncSeq,
    pub s_compl: IncSeq,
    /// Per member `y`, witnesses for `y <=∞ s`.
    pub witnesses: Vec<Vec<u64>>,
    /// Witnesses for `a <=∞ s^c`.
    pub compl_witnesses: Vec<u64>,
    /// Open `tilde a`-interval indices omitted by `s^c`.
    pub compl_omitted: Vec<u64>,
}

/// `s = ⋃_{n ∈ b} ⟦tilde a(n), tilde a(n+1)⟬` for a co-infinite dominator index set `b`:
/// `ys <=∞ s`, and `s^c` omits the open `tilde a`-intervals indexed by `b`, so `a <=∞ s^c`.
pub fn split_step(ys: &[IncSeq], a: &IncSeq, rounds: u64, horizon: u64) -> ConstructResult<SplitStep> {
    let ta = IncSeq::tilde(a.clone());
    let d = interval_union_dominator(ys, &ta, rounds, horizon)?;
    let cert = IncSeq::iunion(d.b_compl_cert.clone(), ta.clone());
    let s_compl = IncSeq::compl(d.c.clone(), cert)?;
    let compl_witnesses = relate(Rel::LeInf, a, &s_compl, horizon)?.witnesses().to_vec();
    let compl_omitted = omitted_indices(&Point::Infinite(s_compl.clone()), &ta, Bracket::Open, horizon)?;
    if (compl_witnesses.len() as u64) < rounds {
        return Err(ConstructError::TooFewWitnesses { wanted: rounds, found: compl_witnesses.len() as u64 });
    }
    Ok(SplitStep { s: d.c, s_compl, witnesses: d.witnesses, compl_witnesses, compl_omitted })
}

/// `max(prior ∪ {f}) + 1` in closed form.
fn pointwise_max_plus_one(xs: &[IncSeq]) -> ConstructResult<IncSeq> {
    let tails = xs.iter().map(tail_of).collect::<ConstructResult<Vec<_>>>()?;
    let at = |i: usize, n: u64| xs[i].nth(n);
    let steepest = tails.iter().map(|t| t.2).max().expect("non-empty");
    let settled = tails.iter().map(|t| t.0).max().expect("non-empty");
    let mut prefix = Vec::new();
    for n in 1..SCAN_LIMIT {
        let vals = (0..xs.len()).map(|i| at(i, n)).collect::<SeqResult<Vec<u64>>>()?;
        let top = *vals.iter().max().expect("non-empty");
        // From here on a steepest member at the maximum stays there.
        let leader = (0..xs.len()).find(|&i| vals[i] == top && tails[i].2 == steepest);
        if n >= settled && leader.is_some() {
            return Ok(eventually_arith(prefix, top + 1, steepest)?);
        }
        prefix.push(top + 1);
    }
    Err(ConstructError::NoClosedForm)
}

/// Least `S >= 1` with `S + (n-1)D >= f(n)` for all `n`, given `D >= slope(f)`.
fn start_above(f: &IncSeq, d: u64) -> ConstructResult<u64> {
    let (n0, _, _) = tail_of(f)?;
    let mut s = 1u64;
    for n in 1..=n0 {
        let v = f.nth(n)?;
        s = s.max(v.saturating_sub((n - 1) * d));
    }
    Ok(s)
}

/// One step of a `<=*`- or `⊑`-scale above `prior` that also bounds `f`.
///
/// `<=*`: the pointwise maximum plus one. `⊑`: an arithmetic progression whose
/// step is twice every prior step, so each closed interval holds two points of
/// every prior member, started high enough to dominate `f`.
pub fn scale_step(kind: ScaleKind, prior: &ScalePrefix, f: &IncSeq) -> ConstructResult<IncSeq> {
    if prior.kind != kind {
        return Err(ConstructError::KindMismatch { wanted: kind, found: prior.kind });
    }
    match kind {
        ScaleKind::LeStar => {
            let mut all = prior.members.clone();
            all.push(f.clone());
            pointwise_max_plus_one(&all)
        }
        ScaleKind::Sqe => {
            let df = tail_of(f)?.2;
            let mut d = df;
            for p in &prior.members {
                d = d.max(2 * tail_of(p)?.2);
            }
            let mut start = start_above(f, d)?;
            loop {
                let s = IncSeq::arith(start, d)?;
                let fresh = prior.members.iter().all(|p| p.prefix(64).ok() != s.prefix(64).ok());
                if fresh {
                    return Ok(s);
                }
                start += 1;
            }
        }
        other => Err(ConstructError::KindMismatch { wanted: ScaleKind::LeStar, found: other }),
    }
}

/// Infinite `t' ⊆ t` with `f <= t'` pointwise: `t'(n) = t(c(n-1) + e)` with
/// `c = ⌈slope f / slope t⌉` and the least offset `e` that works.
fn dominating_subset(t: &IncSeq, f: &IncSeq) -> ConstructResult<IncSeq> {
    let (nt, _, dt) = tail_of(t)?;
    let (nf, _, df) = tail_of(f)?;
    let c = df.div_ceil(dt).max(1);
    let settle = nf.max(1);
    let mut e = 1u64;
    'search: loop {
        for n in 1..=settle {
            if t.nth(c * (n - 1) + e)? < f.nth(n)? {
                e += 1;
                continue 'search;
            }
        }
        break;
    }
    // Both sides are arithmetic once `t` is sampled in its tail and `f` is settled.
    let from = (1..).find(|&n| c * (n - 1) + e >= nt && n >= nf).expect("unbounded");
    let prefix = (1..from).map(|n| t.nth(c * (n - 1) + e)).collect::<SeqResult<Vec<_>>>()?;
    Ok(eventually_arith(prefix, t.nth(c * (from - 1) + e)?, c * dt)?)
}

/// Next tower member: below the last prior member (which is checked to be
/// almost contained in every earlier one) and pointwise above `f`.
pub fn tower_step(prior: &ScalePrefix, f: &IncSeq, horizon: u64) -> ConstructResult<IncSeq> {
    if prior.kind != ScaleKind::Tower {
        return Err(ConstructError::KindMismatch { wanted: ScaleKind::Tower, found: prior.kind });
    }
    let Some(last) = prior.members.last() else {
        return Ok(f.clone());
    };
    for (i, p) in prior.members.iter().enumerate().rev().skip(1) {
        if !relate(Rel::SubStar, last, p, horizon)?.holds() {
            return Err(ConstructError::NotATower(i + 1));
        }
    }
    dominating_subset(last, f)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerTransform {
    /// `t_α ∩ [1, horizon]` with `t_α = {n : s_α(n) <= g(n)}`.
    pub sets: Vec<Vec<u64>>,
    /// `(i, j, N)`: from `N` on `s_i <= s_j`, so `t_j ∖ t_i ⊆ [1, N)`.
    pub crossings: Vec<(usize, usize, u64)>,
}

/// `t_α := {n : s_α(n) <= g(n)}` on `[1, horizon]`, with each `⊆*` inclusion
/// certified by the explicit `<=*` crossing index.
pub fn tower_from_scale(scale: &ScalePrefix, g: &IncSeq, horizon: u64) -> ConstructResult<TowerTransform> {
    if scale.kind != ScaleKind::LeStar {
        return Err(ConstructError::KindMismatch { wanted: ScaleKind::LeStar, found: scale.kind });
    }
    let gv = g.prefix(horizon)?;
    let mut sets = Vec::with_capacity(scale.members.len());
    for (i, s) in scale.members.iter().enumerate() {
        let sv = s.prefix(horizon)?;
        let t: Vec<u64> = (0..horizon as usize).filter(|&k| sv[k] <= gv[k]).map(|k| k as u64 + 1).collect();
        if t.is_empty() {
            return Err(ConstructError::EmptyTransform(i + 1));
        }
        sets.push(t);
    }
    let mut crossings = Vec::new();
    for j in 0..scale.members.len() {
        for i in 0..j {
            let v = relate(Rel::LeStar, &scale.members[i], &scale.members[j], horizon)?;
            let from = v.violations.last().map_or(1, |l| l + 1);
            crossings.push((i + 1, j + 1, from));
        }
    }
    Ok(TowerTransform { sets, crossings })
}

/// Elements up to `bound` common to every member; a finite family's intersection
/// is its own pseudointersection.
pub fn pseudointersection(family: &[IncSeq], bound: u64) -> ConstructResult<Vec<u64>> {
    let Some((first, rest)) = family.split_first() else {
        return Err(ConstructError::EmptyFamily);
    };
    let lists = family.iter().map(|s| s.upto(bound)).collect::<SeqResult<Vec<_>>>()?;
    for i in 0..lists.len() {
        for j in 0..i {
            if !lists[i].iter().any(|v| lists[j].binary_search(v).is_ok()) {
                return Err(ConstructError::CenteredCheckFailed(bound));
            }
        }
    }
    let mut out = Vec::new();
    for v in first.upto(bound)? {
        if rest.iter().all(|s| s.contains(v).unwrap_or(false)) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(ConstructError::CenteredCheckFailed(bound));
    }
    Ok(out)
}

/// Closed form of `⋂ family` for members with arithmetic tails: a finite part
/// below the latest tail start, then a progression with step `lcm` of the tail steps.
fn intersection(family: &[IncSeq], horizon: u64) -> ConstructResult<IncSeq> {
    let mut from = 1u64;
    let mut step = 1u64;
    for x in family {
        let (_, v, d) = tail_of(x)?;
        from = from.max(v);
        step = lcm(step, d).ok_or(ConstructError::NoClosedForm)?;
    }
    if step > SCAN_LIMIT {
        return Err(ConstructError::NoClosedForm);
    }
    let all = |v: u64| -> SeqResult<bool> {
        for x in family {
            if !x.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut prefix = Vec::new();
    for v in 1..from {
        if all(v)? {
            prefix.push(v);
        }
    }
    // Membership is periodic past `from`, so one period decides whether the tail is empty.
    for v in from..from + step {
        if all(v)? {
            return Ok(eventually_arith(prefix, v, step)?);
        }
    }
    Err(ConstructError::CenteredCheckFailed(horizon))
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    (a / x).checked_mul(b)
}

/// Round `k` picks, for each `i <= k`, the least unused element of `A_i`;
/// stops once every `B_i` has `take` elements.
pub fn disjointify(families: &[IncSeq], take: usize) -> SeqResult<Vec<Vec<u64>>> {
    let mut used = BTreeSet::new();
    let mut out: Vec<Vec<u64>> = vec![Vec::new(); families.len()];
    let mut cursors = vec![1u64; families.len()];
    let mut k = 0;
    while out.iter().any(|b| b.len() < take) {
        k += 1;
        for i in 0..k.min(families.len()) {
            if out[i].len() >= take {
                continue;
            }
            loop {
                let v = families[i].nth(cursors[i])?;
                cursors[i] += 1;
                if used.insert(v) {
                    out[i].push(v);
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Runs `steps` stages of `kind`, drawing `f` from the oracle in order.
///
/// A tower stage needs `{last member, f}` centered at `horizon` and builds the
/// next member over `last ∩ f`, so it is contained in both.
pub fn build_prefix(kind: ScaleKind, oracle: &OracleFamily, steps: usize, horizon: u64) -> ConstructResult<ScalePrefix> {
    let mut prefix = ScalePrefix::new(kind);
    for i in 0..steps {
        let f = &oracle.members[i % oracle.members.len()];
        let next = match kind {
            ScaleKind::Tower => match prefix.members.last() {
                Some(last) => {
                    let pair = [last.clone(), f.clone()];
                    pseudointersection(&pair, horizon)?;
                    tower_step(&prefix, &intersection(&pair, horizon)?, horizon)?
                }
                None => tower_step(&prefix, f, horizon)?,
            },
            ScaleKind::LeStar | ScaleKind::Sqe => scale_step(kind, &prefix, f)?,
            ScaleKind::Unbounded => {
                return Err(ConstructError::KindMismatch { wanted: ScaleKind::LeStar, found: kind });
            }
        };
        prefix.members.push(next);
    }
    Ok(prefix)
}
