use std::collections::VecDeque;
use std::fmt;
use std::iter::Peekable;
use std::sync::Arc;

use crate::hitting::BlockSelector;

/// Scans that must find a gap in a descriptor without closed-form structure stop here.
pub const SCAN_LIMIT: u64 = 1 << 22;

/// Number of certificate entries checked eagerly when a complement is built.
const CERT_EAGER: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeqError {
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("descriptor exhausted before index {0}")]
    DescriptorExhausted(u64),
    #[error("value overflow at index {0}")]
    Overflow(u64),
    #[error("invalid descriptor: {0}")]
    Invalid(String),
    #[error("points agree on [1,{0}]")]
    IndistinguishableUpToHorizon(u64),
    #[error("x is the full set of naturals")]
    XEqualsN,
    #[error("no decision within {0}")]
    Undecided(u64),
}

pub type SeqResult<T> = Result<T, SeqError>;

/// Finite description of a strictly increasing stream of naturals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Desc {
    Identity,
    /// `start + (n-1)*step`
    Arith { start: u64, step: u64 },
    /// `base^n`
    Pow { base: u64 },
    /// Explicit prefix, then `start + (n-len-1)*step`. `start` exceeds the last prefix entry.
    List { prefix: Vec<u64>, start: u64, step: u64 },
    /// Complement of `base`; `cert` enumerates elements outside `base`.
    Compl { base: IncSeq, cert: IncSeq },
    /// Union of the half-open blocks `[base(n), base(n+1))` over `n` in `index`.
    IUnion { index: IncSeq, base: IncSeq },
    Tilde(IncSeq),
    /// Indices `n` with `x ∩ [a(n), a(n+1)) ≠ ∅`.
    Quot { x: IncSeq, a: IncSeq },
    /// Union of the selector's blocks over `n` in `index`.
    Blocks { index: IncSeq, sel: BlockSelector },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IncSeq(Arc<Desc>);

impl fmt::Debug for IncSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IncSeq({self})")
    }
}

fn overflow(n: u64) -> SeqError {
    SeqError::Overflow(n)
}

impl IncSeq {
    pub fn desc(&self) -> &Desc {
        &self.0
    }

    fn wrap(d: Desc) -> Self {
        IncSeq(Arc::new(d))
    }

    pub fn identity() -> Self {
        Self::wrap(Desc::Identity)
    }

    pub fn arith(start: u64, step: u64) -> SeqResult<Self> {
        if start == 0 || step == 0 {
            return Err(SeqError::Invalid(format!("arith({start},{step}) needs positive arguments")));
        }
        Ok(Self::wrap(Desc::Arith { start, step }))
    }

    pub fn pow(base: u64) -> SeqResult<Self> {
        if base < 2 {
            return Err(SeqError::Invalid(format!("pow({base}) needs base at least 2")));
        }
        Ok(Self::wrap(Desc::Pow { base }))
    }

    pub fn list(prefix: Vec<u64>, start: u64, step: u64) -> SeqResult<Self> {
        if start == 0 || step == 0 {
            return Err(SeqError::Invalid("list tail needs positive arguments".into()));
        }
        if prefix.first() == Some(&0) || prefix.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SeqError::Invalid("list prefix must be strictly increasing and positive".into()));
        }
        if let Some(&last) = prefix.last() {
            if start <= last {
                return Err(SeqError::Invalid(format!("list tail start {start} must exceed {last}")));
            }
        }
        if prefix.is_empty() {
            return Self::arith(start, step);
        }
        Ok(Self::wrap(Desc::List { prefix, start, step }))
    }

    /// Complement of `base`. Every checked certificate entry must lie outside `base`.
    pub fn compl(base: IncSeq, cert: IncSeq) -> SeqResult<Self> {
        for n in 1..=CERT_EAGER {
            let c = match cert.nth(n) {
                Ok(c) => c,
                Err(SeqError::Overflow(_)) => break,
                Err(e) => return Err(e),
            };
            if base.contains(c)? {
                return Err(SeqError::Invalid(format!("certificate element {c} lies in the base set")));
            }
        }
        Ok(Self::wrap(Desc::Compl { base, cert }))
    }

    pub fn iunion(index: IncSeq, base: IncSeq) -> Self {
        Self::wrap(Desc::IUnion { index, base })
    }

    pub fn tilde(y: IncSeq) -> Self {
        Self::wrap(Desc::Tilde(y))
    }

    pub fn quot(x: IncSeq, a: IncSeq) -> Self {
        Self::wrap(Desc::Quot { x, a })
    }

    pub fn blocks(index: IncSeq, sel: BlockSelector) -> Self {
        Self::wrap(Desc::Blocks { index, sel })
    }

    /// `(n0, v0, d)` with `self(n) = v0 + (n-n0)*d` for all `n >= n0`, when known in closed form.
    pub fn linear_tail(&self) -> Option<(u64, u64, u64)> {
        match self.desc() {
            Desc::Identity => Some((1, 1, 1)),
            Desc::Arith { start, step } => Some((1, *start, *step)),
            Desc::List { prefix, start, step } => Some((prefix.len() as u64 + 1, *start, *step)),
            _ => None,
        }
    }

    pub fn nth(&self, n: u64) -> SeqResult<u64> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        match self.desc() {
            Desc::Identity => Ok(n),
            Desc::Arith { start, step } => arith_at(*start, *step, n - 1).ok_or(overflow(n)),
            Desc::Pow { base } => {
                let e = u32::try_from(n).map_err(|_| overflow(n))?;
                base.checked_pow(e).ok_or(overflow(n))
            }
            Desc::List { prefix, start, step } => {
                let len = prefix.len() as u64;
                if n <= len {
                    Ok(prefix[(n - 1) as usize])
                } else {
                    arith_at(*start, *step, n - len - 1).ok_or(overflow(n))
                }
            }
            Desc::Compl { base, cert } => {
                let bound = cert.nth(n)?;
                let available = bound - base.count_le(bound)?;
                if available < n {
                    return Err(SeqError::DescriptorExhausted(n));
                }
                let (mut lo, mut hi) = (n, bound);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if mid - base.count_le(mid)? >= n {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Ok(lo)
            }
            Desc::Tilde(y) if y.is_full()? => y.nth(n),
            _ => match self.iter().nth((n - 1) as usize) {
                Some(r) => r,
                None => Err(SeqError::DescriptorExhausted(n)),
            },
        }
    }

    /// Number of elements `<= k`.
    pub fn count_le(&self, k: u64) -> SeqResult<u64> {
        match self.desc() {
            Desc::Identity => Ok(k),
            Desc::Arith { start, step } => Ok(if k < *start { 0 } else { (k - start) / step + 1 }),
            Desc::Pow { base } => {
                let mut c = 0;
                let mut v = *base;
                while v <= k {
                    c += 1;
                    match v.checked_mul(*base) {
                        Some(w) => v = w,
                        None => break,
                    }
                }
                Ok(c)
            }
            Desc::List { prefix, start, step } => {
                let p = prefix.partition_point(|&v| v <= k) as u64;
                let t = if k < *start { 0 } else { (k - start) / step + 1 };
                Ok(p + t)
            }
            Desc::Compl { base, .. } => Ok(k - base.count_le(k)?),
            Desc::IUnion { index, base } => {
                let top = base.count_le(k)?;
                if top == 0 {
                    return Ok(0);
                }
                let mut total = 0u64;
                let mut bit = base.iter();
                let mut pos = 0u64;
                let mut cur = 0u64;
                let mut next = bit.next().ok_or(SeqError::DescriptorExhausted(1))??;
                for m in index.iter() {
                    let m = m?;
                    if m > top {
                        break;
                    }
                    while pos < m {
                        cur = next;
                        pos += 1;
                        next = match bit.next() {
                            Some(v) => v?,
                            None => return Err(SeqError::DescriptorExhausted(pos + 1)),
                        };
                    }
                    if m < top {
                        total += next - cur;
                    } else {
                        total += k - cur + 1;
                    }
                }
                Ok(total)
            }
            Desc::Tilde(y) if y.is_full()? => y.count_le(k),
            _ => {
                let mut c = 0;
                for v in self.iter() {
                    if v? > k {
                        break;
                    }
                    c += 1;
                }
                Ok(c)
            }
        }
    }

    pub fn contains(&self, k: u64) -> SeqResult<bool> {
        if k == 0 {
            return Ok(false);
        }
        match self.desc() {
            Desc::Identity => Ok(true),
            Desc::Arith { start, step } => Ok(k >= *start && (k - start).is_multiple_of(*step)),
            Desc::Pow { base } => {
                let mut v = *base;
                loop {
                    if v == k {
                        return Ok(true);
                    }
                    if v > k {
                        return Ok(false);
                    }
                    match v.checked_mul(*base) {
                        Some(w) => v = w,
                        None => return Ok(false),
                    }
                }
            }
            Desc::List { prefix, start, step } => {
                Ok(prefix.binary_search(&k).is_ok() || (k >= *start && (k - start).is_multiple_of(*step)))
            }
            Desc::Compl { base, .. } => Ok(!base.contains(k)?),
            Desc::IUnion { index, base } => {
                let n = base.count_le(k)?;
                Ok(n >= 1 && index.contains(n)?)
            }
            Desc::Quot { x, a } => {
                let lo = a.nth(k)?;
                let hi = a.nth(k + 1)?;
                Ok(x.count_le(hi - 1)? > x.count_le(lo - 1)?)
            }
            Desc::Blocks { index, sel } => {
                let n = sel.partition().block_of(k)?;
                Ok(index.contains(n)? && sel.choose(n)?.binary_search(&k).is_ok())
            }
            _ => {
                for v in self.iter() {
                    let v = v?;
                    if v >= k {
                        return Ok(v == k);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Least natural outside the set; `None` when the set is all of ℕ.
    pub fn min_missing(&self) -> SeqResult<Option<u64>> {
        match self.desc() {
            Desc::Identity => Ok(None),
            Desc::Arith { start, step } => Ok(if *start > 1 {
                Some(1)
            } else if *step == 1 {
                None
            } else {
                Some(2)
            }),
            Desc::Pow { .. } => Ok(Some(1)),
            Desc::List { prefix, start, step } => {
                for (i, &v) in prefix.iter().enumerate() {
                    if v != i as u64 + 1 {
                        return Ok(Some(i as u64 + 1));
                    }
                }
                let t = prefix.len() as u64 + 1;
                Ok(if *start != t {
                    Some(t)
                } else if *step == 1 {
                    None
                } else {
                    Some(t + 1)
                })
            }
            Desc::Compl { base, .. } => Ok(Some(base.nth(1)?)),
            Desc::IUnion { index, base } => {
                if base.nth(1)? > 1 {
                    return Ok(Some(1));
                }
                match index.min_missing()? {
                    None => Ok(None),
                    Some(m) => Ok(Some(base.nth(m)?)),
                }
            }
            Desc::Tilde(y) => Ok(if y.is_full()? { None } else { Some(1) }),
            Desc::Quot { .. } | Desc::Blocks { .. } => {
                let mut expected = 1u64;
                for v in self.iter() {
                    if v? != expected {
                        return Ok(Some(expected));
                    }
                    expected += 1;
                    if expected > SCAN_LIMIT {
                        break;
                    }
                }
                Err(SeqError::Undecided(SCAN_LIMIT))
            }
        }
    }

    pub fn is_full(&self) -> SeqResult<bool> {
        Ok(self.min_missing()?.is_none())
    }

    pub fn iter(&self) -> Elements<'_> {
        let inner: Box<dyn Iterator<Item = SeqResult<u64>> + '_> = match self.desc() {
            Desc::Identity => Box::new((1..=u64::MAX).map(Ok)),
            Desc::Arith { start, step } => Box::new(ArithIter::new(*start, *step, 1)),
            Desc::Pow { base } => Box::new(PowIter { base: *base, cur: Some(*base), idx: 1 }),
            Desc::List { prefix, start, step } => Box::new(
                prefix
                    .iter()
                    .map(|&v| Ok(v))
                    .chain(ArithIter::new(*start, *step, prefix.len() as u64 + 1)),
            ),
            Desc::Compl { base, cert } => Box::new(ComplIter {
                base: base.iter().peekable(),
                cert: cert.iter(),
                k: 0,
                n: 0,
            }),
            Desc::IUnion { index, base } => Box::new(IUnionIter {
                index: index.iter(),
                base: base.iter(),
                pos: 0,
                cur: 0,
                next: None,
                run: None,
            }),
            Desc::Tilde(y) => match y.min_missing() {
                Err(e) => Box::new(std::iter::once(Err(e))),
                Ok(None) => Box::new(y.iter()),
                Ok(Some(k)) => Box::new(TildeIter { y, cur: k, idx: 0 }),
            },
            Desc::Quot { x, a } => Box::new(QuotIter {
                x: x.iter().peekable(),
                a: a.iter(),
                n: 0,
                lo: 0,
                hi: None,
            }),
            Desc::Blocks { index, sel } => Box::new(BlocksIter {
                index: index.iter(),
                sel,
                pending: VecDeque::new(),
            }),
        };
        Elements { inner, done: false }
    }

    /// First `n` elements.
    pub fn prefix(&self, n: u64) -> SeqResult<Vec<u64>> {
        let mut out = Vec::with_capacity(n.min(1 << 20) as usize);
        let mut it = self.iter();
        for i in 1..=n {
            match it.next() {
                Some(v) => out.push(v?),
                None => return Err(SeqError::DescriptorExhausted(i)),
            }
        }
        Ok(out)
    }

    /// All elements `<= bound`.
    pub fn upto(&self, bound: u64) -> SeqResult<Vec<u64>> {
        let mut out = Vec::new();
        for v in self.iter() {
            match v {
                Ok(v) if v > bound => break,
                Ok(v) => out.push(v),
                Err(SeqError::Overflow(_)) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

fn arith_at(start: u64, step: u64, k: u64) -> Option<u64> {
    step.checked_mul(k).and_then(|v| v.checked_add(start))
}

/// Element stream; yields at most one error and then stops.
pub struct Elements<'a> {
    inner: Box<dyn Iterator<Item = SeqResult<u64>> + 'a>,
    done: bool,
}

impl Iterator for Elements<'_> {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let r = self.inner.next();
        if !matches!(r, Some(Ok(_))) {
            self.done = true;
        }
        r
    }
}

struct ArithIter {
    cur: Option<u64>,
    step: u64,
    idx: u64,
}

impl ArithIter {
    fn new(start: u64, step: u64, idx: u64) -> Self {
        ArithIter { cur: Some(start), step, idx }
    }
}

impl Iterator for ArithIter {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        let v = match self.cur {
            Some(v) => v,
            None => return Some(Err(overflow(self.idx))),
        };
        self.cur = v.checked_add(self.step);
        self.idx += 1;
        Some(Ok(v))
    }
}

struct PowIter {
    base: u64,
    cur: Option<u64>,
    idx: u64,
}

impl Iterator for PowIter {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        let v = match self.cur {
            Some(v) => v,
            None => return Some(Err(overflow(self.idx))),
        };
        self.cur = v.checked_mul(self.base);
        self.idx += 1;
        Some(Ok(v))
    }
}

struct ComplIter<'a> {
    base: Peekable<Elements<'a>>,
    cert: Elements<'a>,
    k: u64,
    n: u64,
}

impl Iterator for ComplIter<'_> {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        self.n += 1;
        let bound = match self.cert.next()? {
            Ok(b) => b,
            Err(e) => return Some(Err(e)),
        };
        loop {
            self.k += 1;
            if self.k > bound {
                return Some(Err(SeqError::DescriptorExhausted(self.n)));
            }
            loop {
                match self.base.peek() {
                    Some(Ok(b)) if *b < self.k => {
                        self.base.next();
                    }
                    Some(Err(_)) => {
                        // Base values beyond u64 cannot hide any representable k.
                        break;
                    }
                    _ => break,
                }
            }
            match self.base.peek() {
                Some(Ok(b)) if *b == self.k => continue,
                _ => return Some(Ok(self.k)),
            }
        }
    }
}

struct IUnionIter<'a> {
    index: Elements<'a>,
    base: Elements<'a>,
    /// Number of base values consumed; `cur = base(pos)` and `next = base(pos+1)`.
    pos: u64,
    cur: u64,
    next: Option<u64>,
    run: Option<(u64, u64)>,
}

impl IUnionIter<'_> {
    fn advance_base(&mut self) -> SeqResult<()> {
        let v = match self.next.take() {
            Some(v) => v,
            None => match self.base.next() {
                Some(r) => r?,
                None => return Err(SeqError::DescriptorExhausted(self.pos + 1)),
            },
        };
        self.cur = v;
        self.pos += 1;
        Ok(())
    }
}

impl Iterator for IUnionIter<'_> {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some((v, hi)) = self.run {
                if v < hi {
                    self.run = Some((v + 1, hi));
                    return Some(Ok(v));
                }
                self.run = None;
            }
            let m = match self.index.next()? {
                Ok(m) => m,
                Err(e) => return Some(Err(e)),
            };
            while self.pos < m {
                if let Err(e) = self.advance_base() {
                    return Some(Err(e));
                }
            }
            if self.next.is_none() {
                match self.base.next() {
                    Some(Ok(v)) => self.next = Some(v),
                    Some(Err(e)) => return Some(Err(e)),
                    None => return Some(Err(SeqError::DescriptorExhausted(self.pos + 1))),
                }
            }
            self.run = Some((self.cur, self.next.unwrap()));
        }
    }
}

struct TildeIter<'a> {
    y: &'a IncSeq,
    cur: u64,
    idx: u64,
}

impl Iterator for TildeIter<'_> {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        self.idx += 1;
        match self.y.nth(self.cur) {
            Ok(v) => {
                self.cur = v;
                Some(Ok(v))
            }
            Err(SeqError::Overflow(_)) => Some(Err(overflow(self.idx))),
            Err(e) => Some(Err(e)),
        }
    }
}

struct QuotIter<'a> {
    x: Peekable<Elements<'a>>,
    a: Elements<'a>,
    n: u64,
    lo: u64,
    hi: Option<u64>,
}

impl Iterator for QuotIter<'_> {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        loop {
            // Advance to the next block [lo, hi).
            let lo = match self.hi {
                Some(h) => h,
                None => match self.a.next()? {
                    Ok(v) => v,
                    Err(e) => return Some(Err(e)),
                },
            };
            let hi = match self.a.next()? {
                Ok(v) => v,
                Err(e) => return Some(Err(e)),
            };
            self.n += 1;
            self.lo = lo;
            self.hi = Some(hi);
            loop {
                match self.x.peek()? {
                    Ok(v) if *v < self.lo => {
                        self.x.next();
                    }
                    Ok(_) => break,
                    Err(_) => return self.x.next(),
                }
            }
            if let Some(Ok(v)) = self.x.peek() {
                if *v < hi {
                    return Some(Ok(self.n));
                }
            }
        }
    }
}

struct BlocksIter<'a> {
    index: Elements<'a>,
    sel: &'a BlockSelector,
    pending: VecDeque<u64>,
}

impl Iterator for BlocksIter<'_> {
    type Item = SeqResult<u64>;
    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(v) = self.pending.pop_front() {
                return Some(Ok(v));
            }
            let n = match self.index.next()? {
                Ok(n) => n,
                Err(e) => return Some(Err(e)),
            };
            match self.sel.choose(n) {
                Ok(g) => self.pending.extend(g),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

impl fmt::Display for IncSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.desc() {
            Desc::Identity => write!(f, "id"),
            Desc::Arith { start, step } => write!(f, "arith({start},{step})"),
            Desc::Pow { base } => write!(f, "pow({base})"),
            Desc::List { prefix, start, step } => {
                write!(f, "list(")?;
                for (i, v) in prefix.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ";arith({start},{step}))")
            }
            Desc::Compl { base, cert } => write!(f, "compl({base};cert={cert})"),
            Desc::IUnion { index, base } => write!(f, "iunion({index},{base})"),
            Desc::Tilde(y) => write!(f, "tilde({y})"),
            Desc::Quot { x, a } => write!(f, "quot({x},{a})"),
            Desc::Blocks { index, sel } => write!(f, "bunion({index};{sel})"),
        }
    }
}
