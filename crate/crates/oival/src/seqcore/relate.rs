use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::point::Point;
use super::seq::{IncSeq, SeqError, SeqResult, SCAN_LIMIT};
use super::interval::{omits, Interval};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    HoldsWithWitnesses(Vec<u64>),
    FailsAt(u64),
    UnknownUpTo(u64),
}

/// Horizon-bounded answer to an asymptotic question.
///
/// Witnesses are sorted and `<= horizon`; `violations` lists the offending
/// indices (elements, for `⊆*`) found up to the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub horizon: u64,
    pub outcome: Outcome,
    pub violations: Vec<u64>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, Outcome::HoldsWithWitnesses(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self.outcome, Outcome::FailsAt(_))
    }

    pub fn witnesses(&self) -> &[u64] {
        match &self.outcome {
            Outcome::HoldsWithWitnesses(w) => w,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rel {
    /// Pointwise `a(n) <= b(n)`.
    Le,
    /// `a(n) <= b(n)` for almost all `n`.
    LeStar,
    /// `a(n) <= b(n)` for infinitely many `n`.
    LeInf,
    /// Almost every closed `b`-interval holds two points of `a`.
    Sqe,
    /// `a ∖ b` finite.
    SubStar,
}

impl Rel {
    pub const ALL: [Rel; 5] = [Rel::Le, Rel::LeStar, Rel::LeInf, Rel::Sqe, Rel::SubStar];

    pub fn name(self) -> &'static str {
        match self {
            Rel::Le => "le",
            Rel::LeStar => "le_star",
            Rel::LeInf => "le_inf",
            Rel::Sqe => "sqe",
            Rel::SubStar => "subs",
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rel {
    type Err = SeqError;
    fn from_str(s: &str) -> SeqResult<Self> {
        Rel::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| SeqError::Invalid(format!("unknown relation {s:?}")))
    }
}

/// First `n` values, stopping early at the first unrepresentable one.
fn values(s: &IncSeq, n: u64) -> SeqResult<Vec<u64>> {
    let mut out = Vec::with_capacity(n.min(1 << 20) as usize);
    for v in s.iter().take(n as usize) {
        match v {
            Ok(v) => out.push(v),
            Err(SeqError::Overflow(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Tail region `[t, ∞)` on which the per-index predicate is periodic with period `p`.
#[derive(Debug, Clone, Copy)]
struct Periodic {
    t: u64,
    p: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least `n >= from` with `v0 + (n-n0)*d >= bound`.
fn first_reaching(n0: u64, v0: u64, d: u64, bound: u64, from: u64) -> u64 {
    let n = if v0 >= bound { n0 } else { n0 + (bound - v0).div_ceil(d) };
    n.max(from)
}

fn periodic_window(rel: Rel, a: &IncSeq, b: &IncSeq) -> Option<Periodic> {
    let (na, va, da) = a.linear_tail()?;
    let (nb, vb, db) = b.linear_tail()?;
    let n0 = na.max(nb);
    let w = match rel {
        Rel::Le => return None,
        Rel::LeStar | Rel::LeInf => {
            // a(n) - b(n) = k + n*(da - db) on [n0, ∞).
            let k = (va as i128 - (na as i128) * (da as i128)) - (vb as i128 - (nb as i128) * (db as i128));
            let slope = da as i128 - db as i128;
            let t = if slope == 0 {
                n0 as i128
            } else {
                // Sign of k + n*slope is constant once n exceeds |k|/|slope|.
                (n0 as i128).max(k.abs() / slope.abs() + 2)
            };
            Periodic { t: u64::try_from(t).ok()?, p: 1 }
        }
        Rel::Sqe => {
            // Closed b-intervals lying in a's arithmetic region shift by whole a-periods.
            let t = first_reaching(nb, vb, db, va, n0.max(nb));
            Periodic { t, p: da / gcd(da, db) }
        }
        Rel::SubStar => {
            let t = first_reaching(na, va, da, vb, na);
            Periodic { t, p: db / gcd(da, db) }
        }
    };
    (w.t.checked_add(w.p)? <= SCAN_LIMIT).then_some(w)
}

/// Per-index truth table of the relation's pointwise predicate on `1..=h`.
/// For `⊆*` the second vector holds the offending elements `a(n) ∉ b`.
fn table(rel: Rel, a: &IncSeq, b: &IncSeq, h: u64) -> SeqResult<(Vec<bool>, Vec<u64>)> {
    match rel {
        Rel::Le | Rel::LeStar | Rel::LeInf => {
            let (va, vb) = (values(a, h)?, values(b, h)?);
            let len = va.len().min(vb.len());
            Ok(((0..len).map(|i| va[i] <= vb[i]).collect(), Vec::new()))
        }
        Rel::Sqe => {
            let vb = values(b, h + 1)?;
            if vb.len() < 2 {
                return Ok((Vec::new(), Vec::new()));
            }
            let va = a.upto(*vb.last().unwrap())?;
            let ok = vb
                .windows(2)
                .map(|w| {
                    let lo = va.partition_point(|&v| v < w[0]);
                    let hi = va.partition_point(|&v| v <= w[1]);
                    hi - lo >= 2
                })
                .collect();
            Ok((ok, Vec::new()))
        }
        Rel::SubStar => {
            let va = values(a, h)?;
            let Some(&top) = va.last() else {
                return Ok((Vec::new(), Vec::new()));
            };
            let vb = b.upto(top)?;
            let ok: Vec<bool> = va.iter().map(|v| vb.binary_search(v).is_ok()).collect();
            let missing = va.iter().zip(&ok).filter(|(_, &o)| !o).map(|(&v, _)| v).collect();
            Ok((ok, missing))
        }
    }
}

/// Evaluates `a rel b` up to index `horizon`.
///
/// When both sides have arithmetic tails the answer is exact; the horizon is
/// extended past the region where the pointwise predicate becomes periodic.
/// Otherwise an eventual relation holds iff it has no violation in
/// `(h/2, h]`. The effective horizon shrinks when values leave `u64`.
pub fn relate(rel: Rel, a: &IncSeq, b: &IncSeq, horizon: u64) -> SeqResult<Verdict> {
    if horizon == 0 {
        return Err(SeqError::ZeroIndex);
    }
    let window = periodic_window(rel, a, b);
    let want = match window {
        Some(w) => horizon.max(w.t + w.p - 1),
        None => horizon,
    };
    let (ok, missing) = table(rel, a, b, want)?;
    let h = ok.len() as u64;
    if h == 0 {
        return Ok(Verdict { horizon: 0, outcome: Outcome::UnknownUpTo(0), violations: Vec::new() });
    }
    let exact = window.filter(|w| w.t + w.p - 1 <= h);
    let at = |n: u64| ok[(n - 1) as usize];
    let bad: Vec<u64> = (1..=h).filter(|&n| !at(n)).collect();
    let good: Vec<u64> = (1..=h).filter(|&n| at(n)).collect();
    let violations = if rel == Rel::SubStar { missing } else { bad.clone() };
    let outcome = match rel {
        Rel::Le => match bad.first() {
            Some(&n) => Outcome::FailsAt(n),
            None => Outcome::HoldsWithWitnesses(good),
        },
        Rel::LeInf => {
            let infinitely_often = match exact {
                Some(w) => Some((w.t..w.t + w.p).any(at)),
                None => (!good.is_empty()).then_some(true),
            };
            match infinitely_often {
                Some(true) => Outcome::HoldsWithWitnesses(good),
                Some(false) => Outcome::FailsAt(good.last().map_or(1, |&n| n + 1)),
                None => Outcome::UnknownUpTo(h),
            }
        }
        Rel::LeStar | Rel::Sqe | Rel::SubStar => {
            let tail_clean = match exact {
                Some(w) => (w.t..w.t + w.p).all(at),
                None => (h / 2 + 1..=h).all(at),
            };
            let last_bad = bad.last().copied();
            if tail_clean {
                let from = last_bad.map_or(1, |n| n + 1);
                Outcome::HoldsWithWitnesses((from..=h).collect())
            } else if exact.is_some() {
                Outcome::FailsAt(last_bad.expect("a violation exists in the periodic window"))
            } else {
                Outcome::UnknownUpTo(h)
            }
        }
    };
    Ok(Verdict { horizon: h, outcome, violations })
}

/// Whether the closed `b`-interval `n` contains a closed `a`-interval.
pub fn sqe_by_containment(a: &IncSeq, b: &IncSeq, n: u64) -> SeqResult<bool> {
    let (lo, hi) = (b.nth(n)?, b.nth(n + 1)?);
    let mut prev = None;
    for v in a.iter() {
        let v = v?;
        if v > hi {
            return Ok(false);
        }
        if let Some(p) = prev {
            if p >= lo && v <= hi {
                return Ok(true);
            }
        }
        prev = Some(v);
    }
    Ok(false)
}

/// Indices `n <= horizon` with `x ∩ [a(n), a(n+1)) ≠ ∅`.
pub fn quotient(x: &Point, a: &IncSeq, horizon: u64) -> SeqResult<Vec<u64>> {
    let ends = a.prefix(horizon + 1)?;
    let elems = x.upto(ends[horizon as usize] - 1)?;
    Ok((1..=horizon)
        .filter(|&n| {
            let (lo, hi) = (ends[n as usize - 1], ends[n as usize]);
            let i = elems.partition_point(|&v| v < lo);
            elems.get(i).is_some_and(|&v| v < hi)
        })
        .collect())
}

/// Checks `y(ỹ(n)) <= x(ỹ(n))` at every `n` in `[min x^c, horizon]` whose open
/// `ỹ`-interval `x` omits. Witnesses are the checked indices.
pub fn omit0_check(x: &Point, y: &IncSeq, horizon: u64) -> SeqResult<Verdict> {
    let k = match x.min_missing()? {
        None => return Err(SeqError::XEqualsN),
        Some(k) => k,
    };
    if x.is_finite() {
        return Err(SeqError::Invalid("the point must be infinite".into()));
    }
    let ty = values(&IncSeq::tilde(y.clone()), horizon + 1)?;
    let h = (ty.len() as u64).saturating_sub(1);
    let mut checked = Vec::new();
    for n in k..=h {
        let (lo, hi) = (ty[n as usize - 1], ty[n as usize]);
        if !omits(x, &Interval::new(lo, hi, false, false)?)? {
            continue;
        }
        let (yv, xv) = match (y.nth(lo), x.nth(lo)) {
            (Ok(yv), Ok(xv)) => (yv, xv),
            (Err(SeqError::Overflow(_)), _) | (_, Err(SeqError::Overflow(_))) => break,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if yv > xv {
            return Ok(Verdict { horizon: h, outcome: Outcome::FailsAt(n), violations: vec![n] });
        }
        checked.push(n);
    }
    Ok(Verdict { horizon: h, outcome: Outcome::HoldsWithWitnesses(checked), violations: Vec::new() })
}
