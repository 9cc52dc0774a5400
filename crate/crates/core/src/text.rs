//! Text syntax for ring descriptors and polynomials.
//!
//! ```text
//! ring zp p=<prime> prec=<N>
//! ring fpt p=<prime> prec=<N>
//! ring unram p=<prime> deg=<n> prec=<N>
//! ring field p=<prime> deg=<n>
//! ```
//!
//! Polynomials use the variables `X1..Xn`, integer literals, `+ - * ^` and
//! parentheses. The letter `t` (or `T`) names the ring generator: `θ` in an
//! extension, `T` in `F_p[T]/T^N`. Integer literals are mapped into the
//! owner ring.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{MultiPoly, PolyMap};
use crate::ring::{Elem, Ring};

/// Parse a ring descriptor line.
pub fn parse_ring(line: &str) -> Result<Ring> {
    parse_ring_at(line, 1, 1)
}

pub(crate) fn parse_ring_at(text: &str, line: usize, col0: usize) -> Result<Ring> {
    let mut words = Words::new(text, col0);
    match words.next() {
        Some((_, "ring")) => {}
        Some((c, w)) => return Err(Error::parse(line, c, format!("expected `ring`, found `{w}`"))),
        None => return Err(Error::parse(line, col0, "empty ring line")),
    }
    let (kcol, kind) = words
        .next()
        .ok_or_else(|| Error::parse(line, col0 + text.len(), "missing ring kind"))?;
    let (mut p, mut deg, mut prec) = (None, None, None);
    for (c, w) in words {
        let (key, val) = w
            .split_once('=')
            .ok_or_else(|| Error::parse(line, c, format!("expected key=value, found `{w}`")))?;
        let v: u64 = val
            .parse()
            .map_err(|_| Error::parse(line, c + key.len() + 1, format!("bad integer `{val}`")))?;
        let slot = match key {
            "p" => &mut p,
            "deg" => &mut deg,
            "prec" => &mut prec,
            _ => return Err(Error::parse(line, c, format!("unknown key `{key}`"))),
        };
        if slot.replace(v).is_some() {
            return Err(Error::parse(line, c, format!("duplicate key `{key}`")));
        }
    }
    let end = col0 + text.trim_end().len();
    let p = p.ok_or_else(|| Error::parse(line, end, "missing p=<prime>"))?;
    let small = |v: u64, what: &str| -> Result<u32> {
        u32::try_from(v).map_err(|_| Error::Validation(format!("{what}={v} is too large")))
    };
    let ring = match kind {
        "zp" | "fpt" => {
            if deg.is_some() {
                return Err(Error::parse(line, kcol, format!("`{kind}` takes no deg=")));
            }
            let prec = small(prec.ok_or_else(|| Error::parse(line, end, "missing prec=<N>"))?, "prec")?;
            if kind == "zp" {
                Ring::zp(p, prec)
            } else {
                Ring::fpt(p, prec)
            }
        }
        "unram" => {
            let deg = small(deg.ok_or_else(|| Error::parse(line, end, "missing deg=<n>"))?, "deg")?;
            let prec = small(prec.ok_or_else(|| Error::parse(line, end, "missing prec=<N>"))?, "prec")?;
            Ring::unramified(p, deg, prec)
        }
        "field" => {
            if prec.is_some_and(|v| v != 1) {
                return Err(Error::Validation("a residue field has precision 1".into()));
            }
            Ring::residue_field(p, small(deg.unwrap_or(1), "deg")?)
        }
        other => {
            return Err(Error::parse(
                line,
                kcol,
                format!("unknown ring kind `{other}` (expected zp, fpt, unram or field)"),
            ))
        }
    };
    ring.map_err(|e| match e {
        Error::InvalidInput(msg) => Error::Validation(msg),
        other => other,
    })
}

struct Words<'a> {
    text: &'a str,
    pos: usize,
    col0: usize,
}

impl<'a> Words<'a> {
    fn new(text: &'a str, col0: usize) -> Self {
        Words { text, pos: 0, col0 }
    }
}

impl<'a> Iterator for Words<'a> {
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let rest = &self.text[self.pos..];
        let start = rest.find(|c: char| !c.is_whitespace())?;
        let word_len = rest[start..]
            .find(char::is_whitespace)
            .unwrap_or(rest.len() - start);
        let col = self.col0 + self.pos + start;
        let word = &rest[start..start + word_len];
        self.pos += start + word_len;
        Some((col, word))
    }
}

/// Parsed polynomial expression, independent of any ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    /// 0-based variable index.
    Var(usize),
    /// The ring generator `t`.
    Gen,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// Evaluate into a polynomial over `ring` in `nvars` variables.
    pub fn to_poly(&self, ring: &Ring, nvars: usize) -> Result<MultiPoly> {
        Ok(match self {
            Expr::Int(k) => MultiPoly::constant(ring, nvars, ring.from_bigint(k)),
            Expr::Var(i) => MultiPoly::var(ring, nvars, *i).map_err(|_| {
                Error::Validation(format!("variable X{} out of range for n={nvars}", i + 1))
            })?,
            Expr::Gen => {
                let g: Elem = ring
                    .generator()
                    .ok_or_else(|| Error::Validation(format!("{ring} has no generator t")))?;
                MultiPoly::constant(ring, nvars, g)
            }
            Expr::Neg(a) => -&a.to_poly(ring, nvars)?,
            Expr::Add(a, b) => &a.to_poly(ring, nvars)? + &b.to_poly(ring, nvars)?,
            Expr::Sub(a, b) => &a.to_poly(ring, nvars)? - &b.to_poly(ring, nvars)?,
            Expr::Mul(a, b) => &a.to_poly(ring, nvars)? * &b.to_poly(ring, nvars)?,
            Expr::Pow(a, e) => a.to_poly(ring, nvars)?.pow(*e),
        })
    }

    /// Evaluate into a dense univariate integer polynomial in `X1`
    /// (coefficient of `X1^i` at index `i`, trailing zeros trimmed).
    pub fn to_integer_univariate(&self) -> Result<Vec<BigInt>> {
        let mut out = match self {
            Expr::Int(k) => vec![k.clone()],
            Expr::Var(0) => vec![BigInt::zero(), BigInt::from(1)],
            Expr::Var(i) => {
                return Err(Error::Validation(format!(
                    "univariate polynomial may only use X1, found X{}",
                    i + 1
                )))
            }
            Expr::Gen => {
                return Err(Error::Validation(
                    "integer polynomial cannot use the generator t".into(),
                ))
            }
            Expr::Neg(a) => a.to_integer_univariate()?.into_iter().map(|c| -c).collect(),
            Expr::Add(a, b) => int_add(&a.to_integer_univariate()?, &b.to_integer_univariate()?, 1),
            Expr::Sub(a, b) => int_add(&a.to_integer_univariate()?, &b.to_integer_univariate()?, -1),
            Expr::Mul(a, b) => int_mul(&a.to_integer_univariate()?, &b.to_integer_univariate()?),
            Expr::Pow(a, e) => {
                let base = a.to_integer_univariate()?;
                let mut acc = vec![BigInt::from(1)];
                for _ in 0..*e {
                    acc = int_mul(&acc, &base);
                }
                acc
            }
        };
        while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
            out.pop();
        }
        Ok(out)
    }
}

fn int_add(a: &[BigInt], b: &[BigInt], sign: i32) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            if sign > 0 {
                x + y
            } else {
                x - y
            }
        })
        .collect()
}

fn int_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Parse a polynomial over `ring` in `nvars` variables.
pub fn parse_poly(text: &str, ring: &Ring, nvars: usize) -> Result<MultiPoly> {
    parse_expr(text)?.to_poly(ring, nvars)
}

/// Parse a polynomial expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    parse_expr_at(text, 1, 1)
}

pub(crate) fn parse_expr_at(text: &str, line: usize, col0: usize) -> Result<Expr> {
    let tokens = tokenize(text, line, col0)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        line,
        end_col: col0 + text.len(),
    };
    let e = parser.expr()?;
    if let Some(t) = parser.tokens.get(parser.pos) {
        return Err(Error::parse(line, t.col, format!("unexpected `{}`", t.kind)));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Gen,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Int(k) => write!(f, "{k}"),
            Tok::Var(i) => write!(f, "X{}", i + 1),
            Tok::Gen => f.write_str("t"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Caret => f.write_str("^"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
        }
    }
}

struct Token {
    kind: Tok,
    col: usize,
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let col = col0 + i;
        let b = bytes[i];
        let kind = match b {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b't' | b'T' => Tok::Gen,
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let k: BigInt = text[start..i].parse().expect("digits");
                out.push(Token {
                    kind: Tok::Int(k),
                    col,
                });
                continue;
            }
            b'X' | b'x' => {
                let start = i + 1;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let idx: usize = text[start..i]
                    .parse()
                    .ok()
                    .filter(|&k: &usize| k >= 1)
                    .ok_or_else(|| Error::parse(line, col, "variables are named X1, X2, …"))?;
                out.push(Token {
                    kind: Tok::Var(idx - 1),
                    col,
                });
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::parse(line, col, format!("unexpected character `{ch}`")));
            }
        };
        out.push(Token { kind, col });
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn col(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col(), msg)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        match self.peek() {
            Some(Tok::Int(k)) => {
                let e = k
                    .to_u32()
                    .ok_or_else(|| self.err(format!("exponent {k} is too large")))?;
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), e))
            }
            Some(t) => Err(self.err(format!("expected an integer exponent, found `{t}`"))),
            None => Err(self.err("expected an integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.err("unexpected end of expression"));
        };
        self.pos += 1;
        match t {
            Tok::Int(k) => Ok(Expr::Int(k)),
            Tok::Var(i) => Ok(Expr::Var(i)),
            Tok::Gen => Ok(Expr::Gen),
            Tok::LParen => {
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            other => {
                self.pos -= 1;
                Err(self.err(format!("unexpected `{other}`")))
            }
        }
    }
}

/// A parsed input document: a ring line, an optional `map n=<int>` header
/// and one `F<k> = <polynomial>` line per component.
#[derive(Clone, Debug)]
pub struct Document {
    pub ring: Ring,
    pub dim: Option<usize>,
    /// Component expressions in order, kept for integer interpretations.
    pub exprs: Vec<Expr>,
    /// Present when all `dim` components were given.
    pub map: Option<PolyMap>,
}

/// Parse a document. Lines end at a newline or at `/`; `#` starts a
/// comment. Error positions refer to physical lines and columns.
pub fn parse_document(text: &str) -> Result<Document> {
    let mut ring: Option<Ring> = None;
    let mut dim: Option<usize> = None;
    let mut exprs: Vec<Expr> = Vec::new();
    let mut polys: Vec<MultiPoly> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for seg in body.split('/') {
            let col0 = offset + 1;
            offset += seg.len() + 1;
            let lead = seg.len() - seg.trim_start().len();
            let stmt = seg.trim();
            if stmt.is_empty() {
                continue;
            }
            let col = col0 + lead;
            let first = stmt.split_whitespace().next().unwrap_or("");
            if first == "ring" {
                if ring.is_some() {
                    return Err(Error::parse(line, col, "duplicate ring line"));
                }
                ring = Some(parse_ring_at(stmt, line, col)?);
                continue;
            }
            let Some(r) = &ring else {
                return Err(Error::parse(line, col, "the first line must be a ring descriptor"));
            };
            if first == "map" {
                if dim.is_some() {
                    return Err(Error::parse(line, col, "duplicate map header"));
                }
                if !exprs.is_empty() {
                    return Err(Error::parse(line, col, "map header after components"));
                }
                let rest = stmt[3..].trim();
                let n = rest
                    .strip_prefix("n=")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(line, col + 4, format!("expected n=<int>, found `{rest}`")))?;
                if n == 0 {
                    return Err(Error::Validation("a map needs at least one component".into()));
                }
                dim = Some(n);
                continue;
            }
            let Some(eq) = stmt.find('=') else {
                return Err(Error::parse(line, col, format!("unrecognised line `{stmt}`")));
            };
            let name = stmt[..eq].trim();
            let k: usize = name
                .strip_prefix('F')
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(line, col, format!("expected F<k>, found `{name}`")))?;
            if k != exprs.len() + 1 || dim.is_some_and(|n| k > n) {
                return Err(Error::Validation(format!(
                    "component F{k} out of order: expected F{}",
                    exprs.len() + 1
                )));
            }
            let e = parse_expr_at(&stmt[eq + 1..], line, col + eq + 1)?;
            if let Some(n) = dim {
                polys.push(e.to_poly(r, n)?);
            }
            exprs.push(e);
        }
    }
    let ring = ring.ok_or_else(|| Error::parse(1, 1, "missing ring line"))?;
    // Without a header the component count fixes n.
    if dim.is_none() && !exprs.is_empty() {
        let n = exprs.len();
        for e in &exprs {
            polys.push(e.to_poly(&ring, n)?);
        }
        dim = Some(n);
    }
    let map = match dim {
        Some(n) if polys.len() == n => Some(PolyMap::new(polys)?),
        Some(n) if !exprs.is_empty() => {
            return Err(Error::Validation(format!(
                "map n={n} has only {} components",
                exprs.len()
            )))
        }
        _ => None,
    };
    Ok(Document {
        ring,
        dim,
        exprs,
        map,
    })
}
