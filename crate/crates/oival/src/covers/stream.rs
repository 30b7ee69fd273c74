use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::clopen::{ClopenError, ClopenSet};
use crate::hitting::BlockPartition;
use crate::seqcore::{FinSet, SeqError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoverError {
    #[error("no fresh member contains the requested family")]
    OmegaQueryFailed,
    #[error("member index {0} is outside the cover")]
    NoSuchMember(u64),
    #[error("clopen set is not an omega witness: the trace {0} ⊆ [1,bound] lies outside it")]
    NotAnOmegaWitness(FinSet),
    #[error("no member of cover {0} contains the point")]
    NotCovered(u64),
    #[error("cover format: {0}")]
    Format(String),
    #[error(transparent)]
    Clopen(#[from] ClopenError),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

pub type CoverResult<T> = Result<T, CoverError>;

/// Finite family of finite sets for an ω-query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Explicit(Vec<FinSet>),
    /// Every subset of `[1, bound]`.
    PowerSet(u64),
}

impl Family {
    /// Whether `u` contains every set of the family.
    pub fn inside(&self, u: &ClopenSet) -> bool {
        match self {
            Family::Explicit(sets) => sets.iter().all(|f| u.contains_set(f)),
            Family::PowerSet(b) => u.contains_all_below(*b),
        }
    }

    /// Largest natural mentioned by the family.
    pub fn top(&self) -> u64 {
        match self {
            Family::Explicit(sets) => sets.iter().filter_map(FinSet::max_elem).max().unwrap_or(0),
            Family::PowerSet(b) => *b,
        }
    }
}

/// An enumerated sequence of clopen sets `U_1, U_2, …`.
#[allow(clippy::len_without_is_empty)]
pub trait CoverStream {
    fn member(&self, i: u64) -> CoverResult<ClopenSet>;

    /// Number of members; `None` for an infinite stream.
    fn len(&self) -> Option<u64>;

    /// Least index outside `exclude` whose member contains every set of `family`.
    fn omega_query(&self, family: &Family, exclude: &[u64]) -> CoverResult<u64>;

    /// Whether the supplier certifies that no finite subfamily covers P(ℕ).
    fn no_finite_subcover(&self) -> bool;

    fn describe(&self) -> String;

    fn prefix(&self, n: u64) -> CoverResult<Vec<ClopenSet>> {
        (1..=n).map(|i| self.member(i)).collect()
    }
}

/// `U_m = {x : m ∉ x}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Omitting;

impl CoverStream for Omitting {
    fn member(&self, i: u64) -> CoverResult<ClopenSet> {
        if i == 0 {
            return Err(CoverError::NoSuchMember(0));
        }
        Ok(ClopenSet::avoiding(i))
    }

    fn len(&self) -> Option<u64> {
        None
    }

    fn omega_query(&self, family: &Family, exclude: &[u64]) -> CoverResult<u64> {
        let (used, from): (BTreeSet<u64>, u64) = match family {
            Family::Explicit(sets) => (sets.iter().flat_map(|f| f.elems().iter().copied()).collect(), 1),
            Family::PowerSet(b) => (BTreeSet::new(), b + 1),
        };
        Ok((from..).find(|m| !used.contains(m) && !exclude.contains(m)).expect("unbounded search"))
    }

    fn no_finite_subcover(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        "Om".into()
    }
}

/// `U_m = {x : I_m ⊄ x}` for the blocks `I_m` of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMissing {
    pub part: BlockPartition,
}

impl CoverStream for BlockMissing {
    fn member(&self, i: u64) -> CoverResult<ClopenSet> {
        if i == 0 {
            return Err(CoverError::NoSuchMember(0));
        }
        let coords: Vec<u64> = self.part.block(i)?.collect();
        Ok(ClopenSet::from_predicate(&coords, |mask| !mask.iter().all(|&b| b))?)
    }

    fn len(&self) -> Option<u64> {
        None
    }

    fn omega_query(&self, family: &Family, exclude: &[u64]) -> CoverResult<u64> {
        let first = self.part.block_of(family.top() + 1)?;
        // Every block from `first` on has an element beyond the family.
        let mut m = 1;
        loop {
            if !exclude.contains(&m) {
                if m >= first {
                    return Ok(m);
                }
                let block: Vec<u64> = self.part.block(m)?.collect();
                let hit = match family {
                    Family::Explicit(sets) => sets.iter().any(|f| block.iter().all(|&e| f.contains(e))),
                    Family::PowerSet(b) => block.iter().all(|&e| e <= *b),
                };
                if !hit {
                    return Ok(m);
                }
            }
            m += 1;
        }
    }

    fn no_finite_subcover(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("blocks({})", self.part)
    }
}

/// A finite user-supplied cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explicit {
    pub members: Vec<ClopenSet>,
    pub no_finite_subcover: bool,
}

impl CoverStream for Explicit {
    fn member(&self, i: u64) -> CoverResult<ClopenSet> {
        if i == 0 {
            return Err(CoverError::NoSuchMember(0));
        }
        self.members.get(i as usize - 1).cloned().ok_or(CoverError::NoSuchMember(i))
    }

    fn len(&self) -> Option<u64> {
        Some(self.members.len() as u64)
    }

    fn omega_query(&self, family: &Family, exclude: &[u64]) -> CoverResult<u64> {
        (1..=self.members.len() as u64)
            .find(|i| !exclude.contains(i) && family.inside(&self.members[*i as usize - 1]))
            .ok_or(CoverError::OmegaQueryFailed)
    }

    fn no_finite_subcover(&self) -> bool {
        self.no_finite_subcover
    }

    fn describe(&self) -> String {
        format!("explicit({})", self.members.len())
    }
}

/// Any supported cover, as read from JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyCover {
    Omitting(Omitting),
    Blocks(BlockMissing),
    Explicit(Explicit),
}

impl AnyCover {
    fn inner(&self) -> &dyn CoverStream {
        match self {
            AnyCover::Omitting(c) => c,
            AnyCover::Blocks(c) => c,
            AnyCover::Explicit(c) => c,
        }
    }
}

impl CoverStream for AnyCover {
    fn member(&self, i: u64) -> CoverResult<ClopenSet> {
        self.inner().member(i)
    }
    fn len(&self) -> Option<u64> {
        self.inner().len()
    }
    fn omega_query(&self, family: &Family, exclude: &[u64]) -> CoverResult<u64> {
        self.inner().omega_query(family, exclude)
    }
    fn no_finite_subcover(&self) -> bool {
        self.inner().no_finite_subcover()
    }
    fn describe(&self) -> String {
        self.inner().describe()
    }
}

/// JSON form of a cover. Explicit members list their traces at the common depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<Vec<FinSet>>>,
    #[serde(default)]
    pub no_finite_subcover: bool,
}

impl CoverJson {
    /// Canonical JSON for explicit members: traces at `depth`, each member's traces sorted.
    pub fn explicit(members: &[ClopenSet], no_finite_subcover: bool) -> CoverResult<Self> {
        let depth = members.iter().map(ClopenSet::depth).max().unwrap_or(0);
        let members = members.iter().map(|m| m.traces(depth)).collect::<Result<Vec<_>, _>>()?;
        Ok(CoverJson { generator: None, depth: Some(depth), members: Some(members), no_finite_subcover })
    }

    pub fn generator(name: &str) -> Self {
        CoverJson { generator: Some(name.into()), depth: None, members: None, no_finite_subcover: true }
    }

    pub fn build(&self) -> CoverResult<AnyCover> {
        match (&self.generator, &self.members) {
            (Some(g), None) => {
                if g == "Om" {
                    return Ok(AnyCover::Omitting(Omitting));
                }
                let inner = g
                    .strip_prefix("blocks(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| CoverError::Format(format!("unknown generator {g:?}")))?;
                let part = crate::seqcore::parse_partition(inner)
                    .map_err(|e| CoverError::Format(format!("generator {g:?}: {e}")))?;
                Ok(AnyCover::Blocks(BlockMissing { part }))
            }
            (None, Some(members)) => {
                let depth = self.depth.ok_or_else(|| CoverError::Format("explicit covers need a depth".into()))?;
                let members = members
                    .iter()
                    .map(|traces| ClopenSet::from_traces(depth, traces))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(AnyCover::Explicit(Explicit { members, no_finite_subcover: self.no_finite_subcover }))
            }
            _ => Err(CoverError::Format("give exactly one of generator and members".into())),
        }
    }
}
