use std::fmt;

use serde::{Deserialize, Serialize};

use super::seq::{IncSeq, SeqError, SeqResult};

/// Sorted, duplicate-free finite subset of ℕ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FinSet(Vec<u64>);

impl FinSet {
    pub fn new(mut elems: Vec<u64>) -> SeqResult<Self> {
        if elems.contains(&0) {
            return Err(SeqError::Invalid("finite sets hold naturals starting at 1".into()));
        }
        elems.sort_unstable();
        elems.dedup();
        Ok(FinSet(elems))
    }

    pub fn empty() -> Self {
        FinSet(Vec::new())
    }

    pub fn elems(&self) -> &[u64] {
        &self.0
    }

    pub fn contains(&self, k: u64) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    pub fn count_le(&self, k: u64) -> u64 {
        self.0.partition_point(|&v| v <= k) as u64
    }

    pub fn max_elem(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<u64>> for FinSet {
    type Error = SeqError;
    fn try_from(v: Vec<u64>) -> SeqResult<Self> {
        FinSet::new(v)
    }
}

impl From<FinSet> for Vec<u64> {
    fn from(f: FinSet) -> Vec<u64> {
        f.0
    }
}

/// An element of P(ℕ): a finite set or an infinite increasing stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Finite(FinSet),
    Infinite(IncSeq),
}

impl Point {
    pub fn finite(elems: Vec<u64>) -> SeqResult<Self> {
        Ok(Point::Finite(FinSet::new(elems)?))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Point::Finite(_))
    }

    pub fn contains(&self, k: u64) -> SeqResult<bool> {
        match self {
            Point::Finite(f) => Ok(f.contains(k)),
            Point::Infinite(s) => s.contains(k),
        }
    }

    pub fn count_le(&self, k: u64) -> SeqResult<u64> {
        match self {
            Point::Finite(f) => Ok(f.count_le(k)),
            Point::Infinite(s) => s.count_le(k),
        }
    }

    /// Number of elements in `[lo, hi]`; zero when `lo > hi`.
    pub fn count_in(&self, lo: u64, hi: u64) -> SeqResult<u64> {
        if lo > hi {
            return Ok(0);
        }
        Ok(self.count_le(hi)? - self.count_le(lo - 1)?)
    }

    pub fn nth(&self, n: u64) -> SeqResult<u64> {
        match self {
            Point::Finite(f) => {
                if n == 0 {
                    return Err(SeqError::ZeroIndex);
                }
                f.elems().get((n - 1) as usize).copied().ok_or(SeqError::DescriptorExhausted(n))
            }
            Point::Infinite(s) => s.nth(n),
        }
    }

    /// Least natural outside the point; `None` for ℕ.
    pub fn min_missing(&self) -> SeqResult<Option<u64>> {
        match self {
            Point::Finite(f) => {
                let mut k = 1;
                for &v in f.elems() {
                    if v != k {
                        break;
                    }
                    k += 1;
                }
                Ok(Some(k))
            }
            Point::Infinite(s) => s.min_missing(),
        }
    }

    /// Elements `<= bound`.
    pub fn upto(&self, bound: u64) -> SeqResult<Vec<u64>> {
        match self {
            Point::Finite(f) => Ok(f.elems().iter().copied().take_while(|&v| v <= bound).collect()),
            Point::Infinite(s) => s.upto(bound),
        }
    }

    /// `x ∩ [1, depth]`.
    pub fn trace(&self, depth: u64) -> SeqResult<Vec<u64>> {
        self.upto(depth)
    }

    /// Membership table for `[1, bound]`, index `k` at position `k`.
    pub fn indicator(&self, bound: u64) -> SeqResult<Vec<bool>> {
        let mut out = vec![false; bound as usize + 1];
        for v in self.upto(bound)? {
            out[v as usize] = true;
        }
        Ok(out)
    }
}

impl From<IncSeq> for Point {
    fn from(s: IncSeq) -> Self {
        Point::Infinite(s)
    }
}

impl From<FinSet> for Point {
    fn from(f: FinSet) -> Self {
        Point::Finite(f)
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(s) => write!(f, "{s}"),
            Point::Infinite(s) => write!(f, "{s}"),
        }
    }
}

/// Exact rational `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `1 / min(a Δ b)`, searching the symmetric difference within `[1, bound]`.
pub fn dist(a: &Point, b: &Point, bound: u64) -> SeqResult<Ratio> {
    let (ea, eb) = (a.upto(bound)?, b.upto(bound)?);
    let first_diff = ea
        .iter()
        .zip(&eb)
        .find(|(x, y)| x != y)
        .map(|(x, y)| *x.min(y))
        .or_else(|| ea.get(eb.len()).or_else(|| eb.get(ea.len())).copied());
    first_diff
        .map(|k| Ratio { num: 1, den: k })
        .ok_or(SeqError::IndistinguishableUpToHorizon(bound))
}
