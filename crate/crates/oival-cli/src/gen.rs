//! Seeded generators and brute-force reference arithmetic for the suites.

use oival::seqcore::{parse_seq, IncSeq};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One independent stream per suite, so suites do not shift each other's draws.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `prefix` followed by `start, start + step, …`; `start` exceeds every prefix entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ea {
    pub prefix: Vec<u64>,
    pub start: u64,
    pub step: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct EaShape {
    pub max_elem: u64,
    pub max_len: usize,
    pub max_gap: u64,
    pub steps: (u64, u64),
}

impl Ea {
    pub fn random(r: &mut ChaCha8Rng, shape: EaShape) -> Ea {
        let len = r.gen_range(0..=shape.max_len.min(shape.max_elem as usize));
        let mut prefix: Vec<u64> =
            sample(r, shape.max_elem as usize, len).into_iter().map(|i| i as u64 + 1).collect();
        prefix.sort_unstable();
        let start = prefix.last().copied().unwrap_or(0) + r.gen_range(1..=shape.max_gap);
        Ea { prefix, start, step: r.gen_range(shape.steps.0..=shape.steps.1) }
    }

    /// `self(n)`, or `None` past u64.
    pub fn at(&self, n: u64) -> Option<u64> {
        let len = self.prefix.len() as u64;
        if n <= len {
            Some(self.prefix[n as usize - 1])
        } else {
            (n - len - 1).checked_mul(self.step)?.checked_add(self.start)
        }
    }

    pub fn count_le(&self, k: u64) -> u64 {
        let p = self.prefix.iter().filter(|&&v| v <= k).count() as u64;
        p + if k < self.start { 0 } else { (k - self.start) / self.step + 1 }
    }

    pub fn count_in(&self, lo: u64, hi: u64) -> u64 {
        if hi < lo {
            return 0;
        }
        self.count_le(hi) - if lo == 0 { 0 } else { self.count_le(lo - 1) }
    }

    pub fn contains(&self, k: u64) -> bool {
        self.count_in(k, k) == 1
    }

    /// Least natural outside the set.
    pub fn min_missing(&self) -> Option<u64> {
        let mut k = 1;
        while self.contains(k) {
            if k >= self.start && self.step == 1 {
                return None;
            }
            k += 1;
        }
        Some(k)
    }

    pub fn spec(&self) -> String {
        if self.prefix.is_empty() {
            return format!("arith({},{})", self.start, self.step);
        }
        let p: Vec<String> = self.prefix.iter().map(u64::to_string).collect();
        format!("list({};arith({},{}))", p.join(","), self.start, self.step)
    }

    pub fn seq(&self) -> IncSeq {
        parse_seq(&self.spec()).expect("generated specs parse")
    }

    /// `ỹ(1), …, ỹ(n)` by iterating on `min y^c`, stopping before the first value past u64.
    /// For `y = ℕ` the iteration is `y` itself.
    pub fn naive_tilde(&self, n: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(n);
        match self.min_missing() {
            None => {
                for i in 1..=n as u64 {
                    out.push(i);
                }
            }
            Some(k) => {
                let mut cur = k;
                for _ in 0..n {
                    match self.at(cur) {
                        Some(v) => cur = v,
                        None => break,
                    }
                    out.push(cur);
                }
            }
        }
        out
    }
}
