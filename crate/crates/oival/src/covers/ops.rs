use serde::{Deserialize, Serialize};

use super::clopen::ClopenSet;
use super::stream::{CoverError, CoverResult, CoverStream, Family};
use crate::seqcore::{FinSet, Outcome, Point, SeqResult, Verdict};

pub fn clopen_contains(u: &ClopenSet, x: &Point) -> SeqResult<bool> {
    u.contains(x)
}

/// Least `m` past both the depth of `u` and `bound`; every `x` with
/// `x ∩ [1, m) ⊆ [1, bound]` then lies in `u`. Requires `P([1, bound]) ⊆ u`.
pub fn clopen_modulus(u: &ClopenSet, bound: u64) -> CoverResult<u64> {
    if !u.contains_all_below(bound) {
        let low: Vec<u64> = u.support().iter().copied().filter(|&c| c <= bound).collect();
        let bad = (0..1u64 << low.len())
            .map(|m| FinSet::new(low.iter().enumerate().filter(|(j, _)| m >> j & 1 == 1).map(|(_, &c)| c).collect()).unwrap())
            .find(|s| !u.contains_set(s))
            .expect("some trace is outside");
        return Err(CoverError::NotAnOmegaWitness(bad));
    }
    Ok((u.depth() + 1).max(bound + 1))
}

/// `C_n ∖ (C_1 ∪ … ∪ C_{n-1})` for the first `count` members.
pub fn refine_disjoint(cover: &dyn CoverStream, count: u64) -> CoverResult<Vec<ClopenSet>> {
    let mut seen = ClopenSet::empty();
    let mut out = Vec::with_capacity(count as usize);
    for i in 1..=count {
        let c = cover.member(i)?;
        out.push(c.minus(&seen)?);
        seen = seen.union(&c)?;
    }
    Ok(out)
}

/// `V_m = U_1 ∪ … ∪ U_m`.
pub fn increasing_union_cover(members: &[ClopenSet]) -> CoverResult<Vec<ClopenSet>> {
    let mut acc = ClopenSet::empty();
    members
        .iter()
        .map(|u| {
            acc = acc.union(u)?;
            Ok(acc.clone())
        })
        .collect()
}

/// `{x : x(n) = m}` for `m = 1..=max_m`, the `n`-th column cover restricted to values `<= max_m`.
pub fn column_cover(n: u64, max_m: u64) -> CoverResult<Vec<ClopenSet>> {
    (1..=max_m)
        .map(|m| {
            let coords: Vec<u64> = (1..=m).collect();
            let below = (1usize << (m - 1)) - 1;
            let set = ClopenSet::from_packed_predicate(&coords, |i| {
                i >> (m - 1) & 1 == 1 && u64::from((i & below).count_ones()) == n - 1
            })?;
            Ok(set)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReclawValue {
    /// `f_x(n)`: the member of the `n`-th cover holding `x`.
    pub value: u64,
    /// Depth of that member; points agreeing with `x` up to it share the value.
    pub modulus: u64,
}

/// `f_x(n)` for each disjoint cover prefix.
pub fn reclaw_map(covers: &[Vec<ClopenSet>], x: &Point) -> CoverResult<Vec<ReclawValue>> {
    covers
        .iter()
        .enumerate()
        .map(|(i, cover)| {
            for (j, u) in cover.iter().enumerate() {
                if u.contains(x)? {
                    return Ok(ReclawValue { value: j as u64 + 1, modulus: u.depth() });
                }
            }
            Err(CoverError::NotCovered(i as u64 + 1))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmOutput {
    pub k: u64,
    /// `a(1), …, a((k+1)N + 1)` with `a(1) = 1`.
    pub a: Vec<u64>,
    /// Member index `U_n` chosen at stage `n` of the base construction.
    pub members: Vec<u64>,
    /// `b(n) = a((k+1)(n-1) + 1)` for `n = 1..=N+1`.
    pub b: Vec<u64>,
    /// `k + 1` consecutive members per window `⟬b(n), b(n+1)⟭`.
    pub groups: Vec<Vec<u64>>,
}

/// Picks fresh members `U_n ⊇ P([1, a(n)])` and sets `a(n+1)` to their modulus.
///
/// A point omitting `⟬a(n), a(n+1)⟭` lies in `U_n`; a point with at most `k`
/// elements in `⟬b(n), b(n+1)⟭` lies in the union of group `n`.
pub fn gm_extract(cover: &dyn CoverStream, k: u64, n: u64) -> CoverResult<GmOutput> {
    let stages = (k + 1) * n;
    let mut a = vec![1u64];
    let mut members = Vec::with_capacity(stages as usize);
    for _ in 0..stages {
        let cur = *a.last().unwrap();
        let i = cover.omega_query(&Family::PowerSet(cur), &members)?;
        let u = cover.member(i)?;
        a.push(clopen_modulus(&u, cur)?);
        members.push(i);
    }
    let step = (k + 1) as usize;
    let b = (0..=n as usize).map(|j| a[j * step]).collect();
    let groups = members.chunks(step).map(<[u64]>::to_vec).collect();
    Ok(GmOutput { k, a, members, b, groups })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub is_omega: bool,
    /// Sample indices of a subset no member contains, when `is_omega` is false.
    pub omega_counterexample: Option<Vec<usize>>,
    pub point_cofinite: Verdict,
    /// Per sample point, the member indices that miss it.
    pub misses: Vec<Vec<u64>>,
}

/// Checks the ω property over every subset of `sample` with at most
/// `subset_bound` points, and point-cofiniteness as "every miss lies in the
/// first half of the prefix".
pub fn classify(prefix: &[ClopenSet], sample: &[Point], subset_bound: usize) -> SeqResult<Classification> {
    let m = prefix.len() as u64;
    let table: Vec<Vec<bool>> =
        sample.iter().map(|x| prefix.iter().map(|u| u.contains(x)).collect()).collect::<SeqResult<_>>()?;
    let misses: Vec<Vec<u64>> = table
        .iter()
        .map(|row| (1..=m).filter(|&i| !row[i as usize - 1]).collect())
        .collect();
    if prefix.is_empty() {
        return Ok(Classification {
            is_omega: false,
            omega_counterexample: Some(Vec::new()),
            point_cofinite: Verdict { horizon: 0, outcome: Outcome::UnknownUpTo(0), violations: Vec::new() },
            misses,
        });
    }
    // Subsets of a contained family are contained, so maximal sizes suffice.
    let size = subset_bound.min(sample.len());
    let mut counterexample = None;
    for combo in combinations(sample.len(), size) {
        if !(0..prefix.len()).any(|j| combo.iter().all(|&p| table[p][j])) {
            counterexample = Some(combo);
            break;
        }
    }
    let last_miss = misses.iter().filter_map(|v| v.last().copied()).max();
    let outcome = match last_miss {
        Some(l) if l > m / 2 => Outcome::FailsAt(l),
        _ => Outcome::HoldsWithWitnesses((last_miss.unwrap_or(0) + 1..=m).collect()),
    };
    let mut violations: Vec<u64> = misses.iter().flatten().copied().collect();
    violations.sort_unstable();
    violations.dedup();
    Ok(Classification {
        is_omega: counterexample.is_none(),
        omega_counterexample: counterexample,
        point_cofinite: Verdict { horizon: m, outcome, violations },
        misses,
    })
}

/// All `size`-element subsets of `0..n` in lexicographic order.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    go(0, n, size, &mut cur, &mut out);
    out
}

/// `⟨n, k⟩ = 2^(n-1) (2k - 1)`, a bijection ℕ×ℕ → ℕ.
pub fn pair(n: u64, k: u64) -> Option<u128> {
    if n == 0 || k == 0 || n > 128 {
        return None;
    }
    (2 * k as u128 - 1).checked_mul(1u128.checked_shl(n as u32 - 1)?)
}

pub fn unpair(c: u128) -> Option<(u64, u64)> {
    if c == 0 {
        return None;
    }
    let n = c.trailing_zeros() as u64 + 1;
    let odd = c >> (n - 1);
    Some((n, u64::try_from(odd.div_ceil(2)).ok()?))
}

/// A sequence of points of P(ℕ), viewed as the single point `{⟨n,k⟩ : k ∈ f(n)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedFunction {
    values: Vec<Point>,
}

impl EncodedFunction {
    pub fn new(values: Vec<Point>) -> Self {
        EncodedFunction { values }
    }

    pub fn contains(&self, c: u128) -> SeqResult<bool> {
        let Some((n, k)) = unpair(c) else { return Ok(false) };
        match self.values.get(n as usize - 1) {
            Some(x) => x.contains(k),
            None => Ok(false),
        }
    }

    /// `f(n) ∩ [1, bound]`, read back through the encoding.
    pub fn decode(&self, n: u64, bound: u64) -> SeqResult<Vec<u64>> {
        let mut out = Vec::new();
        for k in 1..=bound {
            if self.contains(pair(n, k).expect("pair fits"))? {
                out.push(k);
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorDefeat {
    pub f: EncodedFunction,
    /// Indices `n` where `f(n) = x_{m_n}` was confirmed through the encoding,
    /// so `f ∉ {g : g(n) ≠ x_{m_n}}`.
    pub certified: Vec<u64>,
}

/// `f(n) = x_{m_n}`; the certificate compares decoded values with `x_{m_n}` on `[1, bound]`.
pub fn cantor_defeater(xs: &[Point], selections: &[u64], bound: u64) -> CoverResult<CantorDefeat> {
    for (i, x) in xs.iter().enumerate() {
        for y in &xs[..i] {
            if crate::seqcore::dist(x, y, bound).is_err() {
                return Err(CoverError::Format(format!("points {y} and {x} agree up to {bound}")));
            }
        }
    }
    let values = selections
        .iter()
        .map(|&m| xs.get((m as usize).wrapping_sub(1)).cloned().ok_or(CoverError::NoSuchMember(m)))
        .collect::<CoverResult<Vec<_>>>()?;
    let f = EncodedFunction::new(values);
    let mut certified = Vec::new();
    for (i, &m) in selections.iter().enumerate() {
        let n = i as u64 + 1;
        if f.decode(n, bound)? == xs[m as usize - 1].upto(bound)? {
            certified.push(n);
        }
    }
    Ok(CantorDefeat { f, certified })
}
