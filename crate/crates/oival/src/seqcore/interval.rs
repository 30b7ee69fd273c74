use std::fmt;

use serde::{Deserialize, Serialize};

use super::point::Point;
use super::seq::{IncSeq, SeqError, SeqResult};

/// Which endpoints of a natural interval are included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bracket {
    Open,
    Closed,
    ClosedOpen,
    OpenClosed,
}

impl Bracket {
    pub fn closures(self) -> (bool, bool) {
        match self {
            Bracket::Open => (false, false),
            Bracket::Closed => (true, true),
            Bracket::ClosedOpen => (true, false),
            Bracket::OpenClosed => (false, true),
        }
    }
}

/// Natural interval with endpoints `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: u64, hi: u64, lo_closed: bool, hi_closed: bool) -> SeqResult<Self> {
        if lo >= hi {
            return Err(SeqError::Invalid(format!("interval endpoints {lo} < {hi} required")));
        }
        Ok(Interval { lo, hi, lo_closed, hi_closed })
    }

    pub fn with(lo: u64, hi: u64, kind: Bracket) -> SeqResult<Self> {
        let (l, h) = kind.closures();
        Interval::new(lo, hi, l, h)
    }

    /// Least element; may exceed `last()` when the interval is empty.
    pub fn first(&self) -> u64 {
        if self.lo_closed {
            self.lo
        } else {
            self.lo + 1
        }
    }

    pub fn last(&self) -> u64 {
        if self.hi_closed {
            self.hi
        } else {
            self.hi - 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.first() > self.last()
    }

    pub fn len(&self) -> u64 {
        (self.last() + 1).saturating_sub(self.first())
    }

    pub fn contains(&self, k: u64) -> bool {
        self.first() <= k && k <= self.last()
    }

    pub fn elements(&self) -> std::ops::RangeInclusive<u64> {
        self.first()..=self.last()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { "[" } else { "(" };
        let r = if self.hi_closed { "]" } else { ")" };
        write!(f, "{l}{},{}{r}", self.lo, self.hi)
    }
}

/// The `n`-th `a`-interval, with endpoints `a(n)` and `a(n+1)`.
pub fn interval(a: &IncSeq, n: u64, kind: Bracket) -> SeqResult<Interval> {
    Interval::with(a.nth(n)?, a.nth(n + 1)?, kind)
}

pub fn omits(x: &Point, iv: &Interval) -> SeqResult<bool> {
    Ok(iv.is_empty() || x.count_in(iv.first(), iv.last())? == 0)
}

/// All `n <= horizon` whose `a`-interval of the given kind is omitted by `x`.
pub fn omitted_indices(x: &Point, a: &IncSeq, kind: Bracket, horizon: u64) -> SeqResult<Vec<u64>> {
    let ends = a.prefix(horizon + 1)?;
    let elems = x.upto(ends[horizon as usize])?;
    let mut out = Vec::new();
    for n in 1..=horizon {
        let iv = Interval::with(ends[n as usize - 1], ends[n as usize], kind)?;
        let from = elems.partition_point(|&v| v < iv.first());
        if iv.is_empty() || elems.get(from).is_none_or(|&v| v > iv.last()) {
            out.push(n);
        }
    }
    Ok(out)
}
