//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := "sigma" | "zeta" | "cn" | sum
//! sum    := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("-" | "+") unary | power
//! power  := atom ("^" "-"? integer)?
//! atom   := number "i"? | "i" | "P" | "P'" | "(" sum ")"
//! ```
//!
//! Every subexpression evaluates to a pair `(R1, R2)` meaning `R1 + P' * R2`;
//! products, quotients and powers that would make `P'` appear non-linearly are
//! rejected.

use std::fmt;

use num_complex::Complex64;

use super::{EllipticExpr, RationalFunction, ZeroDenominator};

const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: expected ", self.offset)?;
        match self.expected.as_slice() {
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Complex64, bool),
    P,
    PPrime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Keyword(&'static str),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(c, _) => format!("number {c}"),
            Tok::P => "'P'".into(),
            Tok::PPrime => "\"P'\"".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Keyword(k) => format!("'{k}'"),
            Tok::End => "end of input".into(),
        }
    }
}

const ATOM_START: &[&str] = &["number", "'i'", "'P'", "\"P'\"", "'('", "'-'"];

fn err(offset: usize, expected: &[&str], found: impl Into<String>) -> ParseError {
    ParseError { offset, expected: expected.iter().map(|s| s.to_string()).collect(), found: found.into() }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match ch {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((start, t));
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| err(start, &["number"], format!("'{text}'")))?;
            let integer = text.bytes().all(|b| b.is_ascii_digit());
            if i < bytes.len() && bytes[i] == b'i' && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric()) {
                i += 1;
                out.push((start, Tok::Num(Complex64::new(0.0, v), false)));
            } else {
                out.push((start, Tok::Num(Complex64::new(v, 0.0), integer)));
            }
            continue;
        }
        if ch.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word = &src[start..i];
            let tok = match word {
                "P" if bytes.get(i) == Some(&b'\'') => {
                    i += 1;
                    Tok::PPrime
                }
                "P" => Tok::P,
                "i" => Tok::Num(Complex64::new(0.0, 1.0), false),
                "sigma" => Tok::Keyword("sigma"),
                "zeta" => Tok::Keyword("zeta"),
                "cn" => Tok::Keyword("cn"),
                _ => return Err(err(start, ATOM_START, format!("'{word}'"))),
            };
            out.push((start, tok));
            continue;
        }
        let c = src[start..].chars().next().unwrap_or('?');
        return Err(err(start, ATOM_START, format!("'{c}'")));
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

/// `r1 + P' * r2`.
#[derive(Debug, Clone)]
struct Pair {
    r1: RationalFunction,
    r2: RationalFunction,
}

impl Pair {
    fn plain(r: RationalFunction) -> Self {
        Pair { r1: r, r2: RationalFunction::zero() }
    }

    fn has_prime(&self) -> bool {
        !self.r2.is_zero()
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn underflow(offset: usize) -> impl Fn(ZeroDenominator) -> ParseError {
    move |_| err(offset, &["denominator that is not identically zero"], "zero denominator")
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        err(self.offset(), expected, self.peek().describe())
    }

    fn sum(&mut self) -> Result<Pair, ParseError> {
        let mut acc = self.term()?;
        loop {
            let negate = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => return Ok(acc),
            };
            let (at, _) = self.bump();
            let mut rhs = self.term()?;
            if negate {
                rhs = Pair { r1: -&rhs.r1, r2: -&rhs.r2 };
            }
            acc = Pair {
                r1: acc.r1.checked_add(&rhs.r1).map_err(underflow(at))?,
                r2: acc.r2.checked_add(&rhs.r2).map_err(underflow(at))?,
            };
        }
    }

    fn term(&mut self) -> Result<Pair, ParseError> {
        let mut acc = self.unary()?;
        loop {
            let divide = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                _ => return Ok(acc),
            };
            let (at, _) = self.bump();
            let rhs_at = self.offset();
            let rhs = self.unary()?;
            if divide {
                if rhs.has_prime() {
                    return Err(err(rhs_at, &["divisor free of P'"], "P' in divisor"));
                }
                if rhs.r1.is_zero() {
                    return Err(err(rhs_at, &["nonzero divisor"], "zero"));
                }
                acc = Pair {
                    r1: acc.r1.checked_div(&rhs.r1).map_err(underflow(at))?,
                    r2: acc.r2.checked_div(&rhs.r1).map_err(underflow(at))?,
                };
            } else {
                if acc.has_prime() && rhs.has_prime() {
                    return Err(err(rhs_at, &["factor free of P'"], "second factor of P'"));
                }
                // (a1 + P' a2)(b1 + P' b2) with a2 b2 = 0
                let r1 = acc.r1.checked_mul(&rhs.r1).map_err(underflow(at))?;
                let cross1 = acc.r1.checked_mul(&rhs.r2).map_err(underflow(at))?;
                let cross2 = acc.r2.checked_mul(&rhs.r1).map_err(underflow(at))?;
                let r2 = cross1.checked_add(&cross2).map_err(underflow(at))?;
                acc = Pair { r1, r2 };
            }
        }
    }

    fn unary(&mut self) -> Result<Pair, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let v = self.unary()?;
                Ok(Pair { r1: -&v.r1, r2: -&v.r2 })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Pair, ParseError> {
        let base_at = self.offset();
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let exp_at = self.offset();
        let k = match self.bump().1 {
            Tok::Num(c, true) if c.re <= MAX_EXPONENT as f64 => c.re as i32,
            other => {
                return Err(err(exp_at, &["integer exponent up to 64"], other.describe()));
            }
        };
        let k = if negative { -k } else { k };
        if base.has_prime() {
            if k == 1 {
                return Ok(base);
            }
            return Err(err(base_at, &["base free of P'"], "P' raised to a power"));
        }
        if k < 0 && base.r1.is_zero() {
            return Err(err(base_at, &["nonzero base"], "zero"));
        }
        Ok(Pair::plain(base.r1.powi(k).map_err(underflow(exp_at))?))
    }

    fn atom(&mut self) -> Result<Pair, ParseError> {
        let (at, tok) = (self.offset(), self.peek().clone());
        match tok {
            Tok::Num(c, _) => {
                self.bump();
                Ok(Pair::plain(RationalFunction::constant(c)))
            }
            Tok::P => {
                self.bump();
                Ok(Pair::plain(RationalFunction::identity()))
            }
            Tok::PPrime => {
                self.bump();
                Ok(Pair { r1: RationalFunction::zero(), r2: RationalFunction::constant(Complex64::new(1.0, 0.0)) })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&["')'", "'+'", "'-'", "'*'", "'/'", "'^'"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Keyword(k) => Err(err(at, ATOM_START, format!("'{k}' (only valid alone)"))),
            _ => Err(self.unexpected(ATOM_START)),
        }
    }
}

fn parse_pair(toks: Vec<(usize, Tok)>) -> Result<Pair, ParseError> {
    let mut p = Parser { toks, pos: 0 };
    let pair = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(&["'+'", "'-'", "'*'", "'/'", "end of input"]));
    }
    Ok(pair)
}

/// Parses an expression; whitespace is ignored.
pub fn parse_expr(text: &str) -> Result<EllipticExpr, ParseError> {
    let toks = lex(text)?;
    if let [(_, Tok::Keyword(k)), (_, Tok::End)] = toks.as_slice() {
        return Ok(match *k {
            "sigma" => EllipticExpr::Sigma,
            "zeta" => EllipticExpr::Zeta,
            _ => EllipticExpr::JacobiCn,
        });
    }
    let pair = parse_pair(toks)?;
    Ok(EllipticExpr::WeierstrassCombo { r1: pair.r1, r2: pair.r2 })
}

/// Parses a constant such as `0.5-1.5i`, `-2i` or `3`.
pub fn parse_complex(text: &str) -> Result<Complex64, ParseError> {
    let pair = parse_pair(lex(text)?)?;
    match (pair.has_prime(), pair.r1.as_constant()) {
        (false, Some(c)) => Ok(c),
        _ => Err(err(0, &["complex constant"], format!("'{}'", text.trim()))),
    }
}
