use std::fmt;

use crate::seqcore::{FinSet, Point, SeqResult};

/// Largest number of coordinates a clopen set may depend on.
pub const MAX_SUPPORT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClopenError {
    #[error("clopen set would depend on {0} coordinates (limit {MAX_SUPPORT})")]
    SupportTooLarge(usize),
    #[error("trace element {elem} exceeds depth {depth}")]
    TraceOutOfRange { elem: u64, depth: u64 },
}

/// Fixed bit-table over `2^len` assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Table {
    len: usize,
    words: Vec<u64>,
}

impl Table {
    fn new(len: usize) -> Self {
        Table { len, words: vec![0; (1usize << len).div_ceil(64)] }
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }
}

/// A clopen subset of P(ℕ): membership of `x` depends only on `x ∩ support`.
///
/// Assignment index bit `i` records whether `support[i] ∈ x`. The support is
/// kept minimal, which makes the representation canonical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    support: Vec<u64>,
    table: Table,
}

impl ClopenSet {
    fn from_parts(support: Vec<u64>, table: Table) -> Self {
        let mut c = ClopenSet { support, table };
        c.canonicalize();
        c
    }

    fn build(support: Vec<u64>, f: impl Fn(usize) -> bool) -> Result<Self, ClopenError> {
        if support.len() > MAX_SUPPORT {
            return Err(ClopenError::SupportTooLarge(support.len()));
        }
        let mut t = Table::new(support.len());
        for i in 0..1usize << support.len() {
            if f(i) {
                t.set(i);
            }
        }
        Ok(ClopenSet::from_parts(support, t))
    }

    pub fn universal() -> Self {
        let mut t = Table::new(0);
        t.set(0);
        ClopenSet { support: Vec::new(), table: t }
    }

    pub fn empty() -> Self {
        ClopenSet { support: Vec::new(), table: Table::new(0) }
    }

    /// `{x : m ∉ x}`.
    pub fn avoiding(m: u64) -> Self {
        let mut t = Table::new(1);
        t.set(0);
        ClopenSet { support: vec![m], table: t }
    }

    /// `{x : m ∈ x}`.
    pub fn holding(m: u64) -> Self {
        let mut t = Table::new(1);
        t.set(1);
        ClopenSet { support: vec![m], table: t }
    }

    /// Sets whose trace on `[1, depth]` lies in `traces`.
    pub fn from_traces(depth: u64, traces: &[FinSet]) -> Result<Self, ClopenError> {
        let support: Vec<u64> = (1..=depth).collect();
        if support.len() > MAX_SUPPORT {
            return Err(ClopenError::SupportTooLarge(support.len()));
        }
        let mut t = Table::new(support.len());
        for tr in traces {
            let mut idx = 0usize;
            for &e in tr.elems() {
                if e > depth {
                    return Err(ClopenError::TraceOutOfRange { elem: e, depth });
                }
                idx |= 1 << (e - 1);
            }
            t.set(idx);
        }
        Ok(ClopenSet::from_parts(support, t))
    }

    /// Sets `x` with `x ∩ [1, depth] = trace`.
    pub fn cylinder(depth: u64, trace: &FinSet) -> Result<Self, ClopenError> {
        ClopenSet::from_traces(depth, std::slice::from_ref(trace))
    }

    /// `{x : pred(x ∩ coords)}`, with the intersection given as a membership mask over `coords`.
    pub fn from_predicate(coords: &[u64], pred: impl Fn(&[bool]) -> bool) -> Result<Self, ClopenError> {
        let mut support = coords.to_vec();
        support.sort_unstable();
        support.dedup();
        let k = support.len();
        ClopenSet::build(support, |i| {
            let mask: Vec<bool> = (0..k).map(|b| i >> b & 1 == 1).collect();
            pred(&mask)
        })
    }

    /// Like `from_predicate`, with the membership mask packed into an integer:
    /// bit `i` is set when the `i`-th smallest coordinate lies in `x`.
    pub fn from_packed_predicate(coords: &[u64], pred: impl Fn(usize) -> bool) -> Result<Self, ClopenError> {
        let mut support = coords.to_vec();
        support.sort_unstable();
        support.dedup();
        ClopenSet::build(support, pred)
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    /// Largest coordinate the set depends on; 0 when it depends on none.
    pub fn depth(&self) -> u64 {
        self.support.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.table.count() == 0
    }

    pub fn is_universal(&self) -> bool {
        self.table.count() == 1u64 << self.support.len()
    }

    fn index_of(&self, mut has: impl FnMut(u64) -> SeqResult<bool>) -> SeqResult<usize> {
        let mut idx = 0usize;
        for (b, &c) in self.support.iter().enumerate() {
            if has(c)? {
                idx |= 1 << b;
            }
        }
        Ok(idx)
    }

    pub fn contains(&self, x: &Point) -> SeqResult<bool> {
        Ok(self.table.get(self.index_of(|c| x.contains(c))?))
    }

    pub fn contains_set(&self, x: &FinSet) -> bool {
        self.table.get(self.index_of(|c| Ok(x.contains(c))).expect("finite membership"))
    }

    /// Whether every subset of `[1, bound]` lies in the set.
    pub fn contains_all_below(&self, bound: u64) -> bool {
        let low: Vec<usize> = (0..self.support.len()).filter(|&b| self.support[b] <= bound).collect();
        (0..1usize << low.len()).all(|m| {
            let idx = low.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((m >> j & 1) << b));
            self.table.get(idx)
        })
    }

    fn combine(&self, other: &ClopenSet, op: impl Fn(bool, bool) -> bool) -> Result<Self, ClopenError> {
        let mut support = self.support.clone();
        support.extend_from_slice(&other.support);
        support.sort_unstable();
        support.dedup();
        let proj = |s: &ClopenSet| -> Vec<usize> {
            s.support.iter().map(|c| support.binary_search(c).unwrap()).collect()
        };
        let (pa, pb) = (proj(self), proj(other));
        let pick = |i: usize, p: &[usize]| p.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((i >> b & 1) << j));
        ClopenSet::build(support.clone(), |i| op(self.table.get(pick(i, &pa)), other.table.get(pick(i, &pb))))
    }

    pub fn union(&self, other: &ClopenSet) -> Result<Self, ClopenError> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &ClopenSet) -> Result<Self, ClopenError> {
        self.combine(other, |a, b| a && b)
    }

    pub fn minus(&self, other: &ClopenSet) -> Result<Self, ClopenError> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        let mut t = Table::new(self.support.len());
        for i in 0..1usize << self.support.len() {
            if !self.table.get(i) {
                t.set(i);
            }
        }
        ClopenSet { support: self.support.clone(), table: t }
    }

    pub fn is_subset(&self, other: &ClopenSet) -> Result<bool, ClopenError> {
        Ok(self.minus(other)?.is_empty())
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> Result<bool, ClopenError> {
        Ok(self.intersect(other)?.is_empty())
    }

    /// All traces on `[1, depth]` of members, as sorted sets in lexicographic order.
    /// Requires `depth >= self.depth()`.
    pub fn traces(&self, depth: u64) -> Result<Vec<FinSet>, ClopenError> {
        assert!(depth >= self.depth(), "trace depth below the set's depth");
        if depth as usize > MAX_SUPPORT {
            return Err(ClopenError::SupportTooLarge(depth as usize));
        }
        let mut out: Vec<Vec<u64>> = (0..1u64 << depth)
            .map(|m| (1..=depth).filter(|&e| m >> (e - 1) & 1 == 1).collect::<Vec<u64>>())
            .filter(|t| self.contains_set(&FinSet::new(t.clone()).expect("positive")))
            .collect();
        out.sort();
        Ok(out.into_iter().map(|t| FinSet::new(t).expect("positive")).collect())
    }

    fn canonicalize(&mut self) {
        let mut b = 0;
        while b < self.support.len() {
            let bit = 1usize << b;
            let inessential = (0..1usize << self.support.len())
                .filter(|i| i & bit == 0)
                .all(|i| self.table.get(i) == self.table.get(i | bit));
            if inessential {
                let mut t = Table::new(self.support.len() - 1);
                for i in 0..1usize << (self.support.len() - 1) {
                    let low = i & (bit - 1);
                    let high = (i >> b) << (b + 1);
                    if self.table.get(high | low) {
                        t.set(i);
                    }
                }
                self.support.remove(b);
                self.table = t;
            } else {
                b += 1;
            }
        }
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClopenSet({self})")
    }
}

/// Compact rendering: the support and the accepted assignments as hex.
impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return f.write_str(if self.table.get(0) { "all" } else { "none" });
        }
        if self.support.len() == 1 {
            let c = self.support[0];
            return if self.table.get(0) { write!(f, "{c}∉x") } else { write!(f, "{c}∈x") };
        }
        let s: Vec<String> = self.support.iter().map(u64::to_string).collect();
        write!(f, "on[{}]:", s.join(","))?;
        for w in self.table.words.iter().rev() {
            write!(f, "{w:016x}")?;
        }
        Ok(())
    }
}
