use std::fmt;
use std::ops::RangeInclusive;

use crate::seqcore::{IncSeq, SeqError, SeqResult};

/// Partition of ℕ into consecutive finite blocks `I_1, I_2, …` with `min I_1 = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BlockPartition {
    /// `|I_n| = n`.
    Linear,
    /// `|I_n| = 2^(n-1)`.
    Doubling,
    /// `|I_n| = w`.
    Const(u64),
    /// `min I_n = s(n)`; requires `s(1) = 1`.
    Bounds(IncSeq),
}

impl BlockPartition {
    pub fn constant(w: u64) -> SeqResult<Self> {
        if w == 0 {
            return Err(SeqError::Invalid("block width must be positive".into()));
        }
        Ok(BlockPartition::Const(w))
    }

    pub fn bounds(s: IncSeq) -> SeqResult<Self> {
        if s.nth(1)? != 1 {
            return Err(SeqError::Invalid("block boundaries must start at 1".into()));
        }
        Ok(BlockPartition::Bounds(s))
    }

    /// `min I_n`.
    pub fn start(&self, n: u64) -> SeqResult<u64> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        let of = || SeqError::Overflow(n);
        match self {
            BlockPartition::Linear => n
                .checked_mul(n - 1)
                .map(|v| v / 2 + 1)
                .ok_or_else(of),
            BlockPartition::Doubling => {
                if n > 64 {
                    Err(of())
                } else {
                    Ok(1u64 << (n - 1))
                }
            }
            BlockPartition::Const(w) => (n - 1).checked_mul(*w).and_then(|v| v.checked_add(1)).ok_or_else(of),
            BlockPartition::Bounds(s) => s.nth(n),
        }
    }

    /// Elements of `I_n`.
    pub fn block(&self, n: u64) -> SeqResult<RangeInclusive<u64>> {
        let lo = self.start(n)?;
        let hi = self.start(n + 1)?;
        Ok(lo..=hi - 1)
    }

    pub fn len(&self, n: u64) -> SeqResult<u64> {
        let b = self.block(n)?;
        Ok(b.end() - b.start() + 1)
    }

    /// The `n` with `k ∈ I_n`.
    pub fn block_of(&self, k: u64) -> SeqResult<u64> {
        if k == 0 {
            return Err(SeqError::ZeroIndex);
        }
        match self {
            BlockPartition::Linear => {
                // Largest n with n(n-1)/2 < k.
                let mut n = ((2.0 * k as f64).sqrt() as u64).max(1);
                while n > 1 && (n as u128) * (n as u128 - 1) / 2 >= k as u128 {
                    n -= 1;
                }
                while (n as u128 + 1) * (n as u128) / 2 < k as u128 {
                    n += 1;
                }
                Ok(n)
            }
            BlockPartition::Doubling => Ok(64 - u64::from(k.leading_zeros())),
            BlockPartition::Const(w) => Ok((k - 1) / w + 1),
            BlockPartition::Bounds(s) => s.count_le(k),
        }
    }
}

impl fmt::Display for BlockPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockPartition::Linear => write!(f, "linear"),
            BlockPartition::Doubling => write!(f, "doubling"),
            BlockPartition::Const(w) => write!(f, "const({w})"),
            BlockPartition::Bounds(s) => write!(f, "bounds({s})"),
        }
    }
}

/// Number of elements a selector picks from block `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Width {
    Const(u64),
    Id,
}

impl Width {
    pub fn at(self, n: u64) -> u64 {
        match self {
            Width::Const(k) => k,
            Width::Id => n,
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Width::Const(k) => write!(f, "{k}"),
            Width::Id => write!(f, "id"),
        }
    }
}

/// A choice `g(n) ⊆ I_n` of `min(f(n), |I_n|)` elements for every block.
///
/// Blocks covered by `pre` use the explicit sets; later blocks use the
/// 1-based positions `pos` when given, else the first elements of the block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockSelector {
    part: BlockPartition,
    width: Width,
    pos: Option<Vec<u64>>,
    pre: Vec<Vec<u64>>,
}

impl BlockSelector {
    pub fn new(part: BlockPartition, width: Width, pos: Option<Vec<u64>>, pre: Vec<Vec<u64>>) -> SeqResult<Self> {
        if width == Width::Const(0) {
            return Err(SeqError::Invalid("selector width must be positive".into()));
        }
        if let Some(p) = &pos {
            if width != Width::Const(p.len() as u64) {
                return Err(SeqError::Invalid("positions need a constant width equal to their count".into()));
            }
            if p.first() == Some(&0) || p.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SeqError::Invalid("positions must be strictly increasing and positive".into()));
            }
        }
        let mut sel = BlockSelector { part, width, pos, pre: Vec::new() };
        for (i, g) in pre.into_iter().enumerate() {
            let n = i as u64 + 1;
            let mut g = g;
            g.sort_unstable();
            g.dedup();
            let block = sel.part.block(n)?;
            if g.iter().any(|v| !block.contains(v)) {
                return Err(SeqError::Invalid(format!("override for block {n} leaves the block")));
            }
            if g.len() as u64 != sel.size(n)? {
                return Err(SeqError::Invalid(format!("override for block {n} has the wrong size")));
            }
            sel.pre.push(g);
        }
        Ok(sel)
    }

    /// Selector taking the first `f(n)` elements of each block.
    pub fn first(part: BlockPartition, width: Width) -> SeqResult<Self> {
        BlockSelector::new(part, width, None, Vec::new())
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.part
    }

    pub fn width(&self) -> Width {
        self.width
    }

    /// `|g(n)|`.
    pub fn size(&self, n: u64) -> SeqResult<u64> {
        Ok(self.width.at(n).min(self.part.len(n)?))
    }

    /// `g(n)`, sorted.
    pub fn choose(&self, n: u64) -> SeqResult<Vec<u64>> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        if let Some(g) = self.pre.get(n as usize - 1) {
            return Ok(g.clone());
        }
        let block = self.part.block(n)?;
        let (lo, len) = (*block.start(), block.end() - block.start() + 1);
        match &self.pos {
            Some(p) if p.last().is_some_and(|&l| l <= len) => Ok(p.iter().map(|&i| lo + i - 1).collect()),
            _ => Ok((lo..lo + self.size(n)?).collect()),
        }
    }
}

impl fmt::Display for BlockSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "part={};width={}", self.part, self.width)?;
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        if let Some(p) = &self.pos {
            write!(f, ";pos=({})", list(p))?;
        }
        if !self.pre.is_empty() {
            let groups: Vec<String> = self.pre.iter().map(|g| format!("({})", list(g))).collect();
            write!(f, ";pre=({})", groups.join(","))?;
        }
        Ok(())
    }
}
