//! Finitely described subsets of ℕ, natural intervals and horizon-bounded relations.

mod dsl;
mod interval;
mod point;
mod relate;
mod seq;

pub use dsl::{parse_partition, parse_point, parse_selector, parse_seq, ParseError};
pub use interval::{interval, omits, omitted_indices, Bracket, Interval};
pub use point::{dist, FinSet, Point, Ratio};
pub use relate::{omit0_check, quotient, relate, sqe_by_containment, Outcome, Rel, Verdict};
pub use seq::{Desc, Elements, IncSeq, SeqError, SeqResult, SCAN_LIMIT};
