//! Text syntax for sequence descriptors.
//!
//! ```text
//! seq   := "id" | "arith(s,d)" | "pow(b)" | "list(n1,…,nk; arith(s,d))"
//!        | "compl(seq; cert=seq)" | "iunion(seq, seq)" | "tilde(seq)" | "quot(seq, seq)"
//!        | "bunion(seq; part=part; width=k|id [; pos=(i,…)] [; pre=((…),(…))])"
//! part  := "linear" | "doubling" | "const(w)" | "bounds(seq)"
//! point := "{n1,…,nk}" | seq
//! ```
//!
//! Whitespace is ignored and every integer must be at least 1.

use crate::hitting::{BlockPartition, BlockSelector, Width};

use super::point::{FinSet, Point};
use super::seq::{IncSeq, SeqError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src: src.as_bytes(), pos: 0 }
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(format!("expected '{}'", c as char))
        }
    }

    fn ident(&mut self) -> PResult<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.fail("expected a name");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        let at = self.pos;
        if self.ident()? != kw {
            self.pos = at;
            return self.fail(format!("expected '{kw}'"));
        }
        Ok(())
    }

    fn number(&mut self) -> PResult<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.fail("expected a positive integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<u64>() {
            Ok(0) => {
                self.pos = start;
                self.fail("integers must be at least 1")
            }
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.fail("integer out of range")
            }
        }
    }

    /// Comma-separated numbers up to (not including) `close`.
    fn numbers(&mut self, close: u8) -> PResult<Vec<u64>> {
        let mut out = Vec::new();
        if self.peek() == Some(close) {
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            if !self.eat(b',') {
                return Ok(out);
            }
        }
    }

    fn lift<T>(&self, at: usize, r: Result<T, SeqError>) -> PResult<T> {
        r.map_err(|e| ParseError { offset: at, message: e.to_string() })
    }

    fn seq(&mut self) -> PResult<IncSeq> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ident()?;
        if name == "id" {
            return Ok(IncSeq::identity());
        }
        self.expect(b'(')?;
        let s = match name {
            "arith" => {
                let s = self.number()?;
                self.expect(b',')?;
                let d = self.number()?;
                self.lift(at, IncSeq::arith(s, d))?
            }
            "pow" => {
                let b = self.number()?;
                self.lift(at, IncSeq::pow(b))?
            }
            "list" => {
                let prefix = self.numbers(b';')?;
                self.expect(b';')?;
                self.keyword("arith")?;
                self.expect(b'(')?;
                let s = self.number()?;
                self.expect(b',')?;
                let d = self.number()?;
                self.expect(b')')?;
                self.lift(at, IncSeq::list(prefix, s, d))?
            }
            "compl" => {
                let base = self.seq()?;
                self.expect(b';')?;
                self.keyword("cert")?;
                self.expect(b'=')?;
                let cert = self.seq()?;
                self.lift(at, IncSeq::compl(base, cert))?
            }
            "iunion" | "quot" => {
                let x = self.seq()?;
                self.expect(b',')?;
                let y = self.seq()?;
                if name == "iunion" {
                    IncSeq::iunion(x, y)
                } else {
                    IncSeq::quot(x, y)
                }
            }
            "tilde" => IncSeq::tilde(self.seq()?),
            "bunion" => {
                let index = self.seq()?;
                self.expect(b';')?;
                let sel = self.selector()?;
                IncSeq::blocks(index, sel)
            }
            other => {
                self.pos = at;
                return self.fail(format!("unknown sequence form '{other}'"));
            }
        };
        self.expect(b')')?;
        Ok(s)
    }

    fn partition(&mut self) -> PResult<BlockPartition> {
        self.skip_ws();
        let at = self.pos;
        match self.ident()? {
            "linear" => Ok(BlockPartition::Linear),
            "doubling" => Ok(BlockPartition::Doubling),
            "const" => {
                self.expect(b'(')?;
                let w = self.number()?;
                self.expect(b')')?;
                self.lift(at, BlockPartition::constant(w))
            }
            "bounds" => {
                self.expect(b'(')?;
                let s = self.seq()?;
                self.expect(b')')?;
                self.lift(at, BlockPartition::bounds(s))
            }
            other => {
                self.pos = at;
                self.fail(format!("unknown partition '{other}'"))
            }
        }
    }

    fn selector(&mut self) -> PResult<BlockSelector> {
        self.skip_ws();
        let at = self.pos;
        self.keyword("part")?;
        self.expect(b'=')?;
        let part = self.partition()?;
        self.expect(b';')?;
        self.keyword("width")?;
        self.expect(b'=')?;
        let width = if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            Width::Const(self.number()?)
        } else {
            self.keyword("id")?;
            Width::Id
        };
        let (mut pos, mut pre) = (None, Vec::new());
        while self.eat(b';') {
            let key_at = self.pos;
            match self.ident()? {
                "pos" if pos.is_none() => {
                    self.expect(b'=')?;
                    self.expect(b'(')?;
                    pos = Some(self.numbers(b')')?);
                    self.expect(b')')?;
                }
                "pre" if pre.is_empty() => {
                    self.expect(b'=')?;
                    self.expect(b'(')?;
                    loop {
                        self.expect(b'(')?;
                        pre.push(self.numbers(b')')?);
                        self.expect(b')')?;
                        if !self.eat(b',') {
                            break;
                        }
                    }
                    self.expect(b')')?;
                }
                other => {
                    self.pos = key_at;
                    return self.fail(format!("unexpected selector field '{other}'"));
                }
            }
        }
        self.lift(at, BlockSelector::new(part, width, pos, pre))
    }

    fn point(&mut self) -> PResult<Point> {
        if self.peek() == Some(b'{') {
            let at = self.pos;
            self.pos += 1;
            let elems = self.numbers(b'}')?;
            self.expect(b'}')?;
            return Ok(Point::Finite(self.lift(at, FinSet::new(elems))?));
        }
        Ok(Point::Infinite(self.seq()?))
    }

    fn finish<T>(&mut self, v: T) -> PResult<T> {
        if self.peek().is_some() {
            return self.fail("trailing input");
        }
        Ok(v)
    }
}

pub fn parse_seq(src: &str) -> Result<IncSeq, ParseError> {
    let mut p = Parser::new(src);
    let s = p.seq()?;
    p.finish(s)
}

pub fn parse_point(src: &str) -> Result<Point, ParseError> {
    let mut p = Parser::new(src);
    let x = p.point()?;
    p.finish(x)
}

pub fn parse_selector(src: &str) -> Result<BlockSelector, ParseError> {
    let mut p = Parser::new(src);
    let s = p.selector()?;
    p.finish(s)
}

pub fn parse_partition(src: &str) -> Result<BlockPartition, ParseError> {
    let mut p = Parser::new(src);
    let part = p.partition()?;
    p.finish(part)
}
