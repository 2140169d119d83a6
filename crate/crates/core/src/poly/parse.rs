//! Expression parser producing expanded sparse normal form.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' natural)?
//! primary := integer | 'x' | 'y' | 'z' | '(' expr ')'
//! ```
//!
//! Exponents must be nonnegative integer literals. Multiplication is always
//! explicit: `x*y` parses, `xy` and `2x` do not. Products and powers are
//! expanded eagerly, so the result is always the sparse normal form.

use super::{Polynomial, Var};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {pos}: {message}")]
pub struct ParseError {
    /// Byte offset into the input where the problem was detected.
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(Var),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{}`", n),
            Tok::Var(v) => format!("variable `{}`", v.name()),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            b'^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i]
                    .parse()
                    .expect("digit run always parses as an integer");
                out.push((Tok::Int(n), start));
            }
            b'x' => {
                out.push((Tok::Var(Var::X), i));
                i += 1;
            }
            b'y' => {
                out.push((Tok::Var(Var::Y), i));
                i += 1;
            }
            b'z' => {
                out.push((Tok::Var(Var::Z), i));
                i += 1;
            }
            _ => {
                return Err(ParseError::new(
                    i,
                    format!(
                        "unexpected character `{}`; expected a term in x, y, z",
                        &text[i..].chars().next().unwrap()
                    ),
                ));
            }
        }
    }
    out.push((Tok::Eof, bytes.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                // A value token directly after a factor means implicit
                // multiplication, which the grammar rejects.
                Tok::Var(_) | Tok::Int(_) | Tok::LParen => {
                    let (t, pos) = self.peek().clone();
                    return Err(ParseError::new(
                        pos,
                        format!(
                            "unexpected {}; multiplication must be written explicitly with `*`",
                            t.describe()
                        ),
                    ));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if self.peek().0 == Tok::Minus {
            self.bump();
            Ok(-&self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.primary()?;
        if self.peek().0 != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (t, pos) = self.bump();
        let Tok::Int(n) = t else {
            return Err(ParseError::new(
                pos,
                format!(
                    "exponent must be a nonnegative integer literal, found {}",
                    t.describe()
                ),
            ));
        };
        let e = n.to_u32().ok_or_else(|| {
            ParseError::new(pos, format!("exponent {} is too large", n))
        })?;
        Ok(base.pow(e))
    }

    fn primary(&mut self) -> Result<Polynomial, ParseError> {
        let (t, pos) = self.bump();
        match t {
            Tok::Int(n) => Ok(Polynomial::constant(BigRational::from_integer(n))),
            Tok::Var(v) => Ok(Polynomial::variable(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                let (t, pos) = self.bump();
                if t == Tok::RParen {
                    Ok(inner)
                } else {
                    Err(ParseError::new(
                        pos,
                        format!("expected `)`, found {}", t.describe()),
                    ))
                }
            }
            other => Err(ParseError::new(
                pos,
                format!(
                    "expected an integer, a variable or `(`, found {}",
                    other.describe()
                ),
            )),
        }
    }
}

/// Parses an expression into expanded sparse normal form.
pub fn parse_poly(text: &str) -> Result<Polynomial, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, at: 0 };
    let poly = parser.expr()?;
    let (t, pos) = parser.peek().clone();
    if t != Tok::Eof {
        return Err(ParseError::new(
            pos,
            format!("unexpected {} after expression", t.describe()),
        ));
    }
    Ok(poly)
}
