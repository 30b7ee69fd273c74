//! Clopen subsets of P(ℕ), covers built from them, and extraction procedures over covers.

mod clopen;
mod ops;
mod stream;

pub use clopen::{ClopenError, ClopenSet, MAX_SUPPORT};
pub use ops::{
    cantor_defeater, classify, clopen_contains, clopen_modulus, column_cover, gm_extract, increasing_union_cover,
    pair, reclaw_map, refine_disjoint, unpair, CantorDefeat, Classification, EncodedFunction, GmOutput, ReclawValue,
};
pub use stream::{AnyCover, BlockMissing, CoverError, CoverJson, CoverResult, CoverStream, Explicit, Family, Omitting};
