//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := power (('*' | '/') power)*
//! power   := unary ('^' int)*
//! unary   := '-' unary | primary
//! primary := number | 'i' | 'z' digits | func '(' args ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds tighter than `^`, so `-z1^2` is `(-z1)^2`.

use thiserror::Error;

use super::Expr;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at position {pos}: {msg}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub msg: String,
}

/// Parses `text` as an expression in `z1..z{arity}`.
pub fn parse(text: &str, arity: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        arity,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected '{}'", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
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

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(match self.peek() {
                Some(got) => self.error(format!("expected '{}', found '{}'", c as char, got as char)),
                None => self.error(format!("expected '{}', found end of input", c as char)),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs.add(self.term()?);
            } else if self.eat(b'-') {
                lhs = lhs.sub(self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs.mul(self.power()?);
            } else if self.eat(b'/') {
                lhs = lhs.div(self.power()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.unary()?;
        while self.eat(b'^') {
            let n = if self.eat(b'(') {
                let n = self.integer()?;
                self.expect(b')')?;
                n
            } else {
                self.integer()?
            };
            base = base.pow(n);
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.primary()
        }
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        let negative = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let n: i32 = text.parse().map_err(|_| ParseError {
            pos: start,
            msg: format!("exponent {text} out of range"),
        })?;
        Ok(if negative { -n } else { n })
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            let b = *p;
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
            *p > b
        };
        let mut p = self.pos;
        let mut any = digits(&mut p);
        if p < s.len() && s[p] == b'.' {
            p += 1;
            any |= digits(&mut p);
        }
        if !any {
            return Err(self.error("malformed number"));
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) {
                p = q;
            }
        }
        let text = std::str::from_utf8(&s[start..p]).unwrap();
        let x: f64 = text.parse().map_err(|_| ParseError {
            pos: start,
            msg: format!("malformed number '{text}'"),
        })?;
        self.pos = p;
        if self.pos < s.len() && s[self.pos] == b'i' && !self.ident_continues(self.pos + 1) {
            self.pos += 1;
            return Ok(Expr::constant(C64::new(0.0, x)));
        }
        Ok(Expr::real(x))
    }

    fn ident_continues(&self, at: usize) -> bool {
        at < self.src.len() && (self.src[at].is_ascii_alphanumeric() || self.src[at] == b'_')
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if !c.is_ascii_alphabetic() {
            return Err(self.error(format!("unexpected '{}'", c as char)));
        }
        let start = self.pos;
        while self.ident_continues(self.pos) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "i" => Ok(Expr::constant(C64::new(0.0, 1.0))),
            "conj" | "exp" | "sin" | "cos" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(match name {
                    "conj" => arg.conj(),
                    "exp" => arg.exp(),
                    "sin" => arg.sin(),
                    _ => arg.cos(),
                })
            }
            "pow" => {
                self.expect(b'(')?;
                let base = self.expr()?;
                self.expect(b',')?;
                let n = self.integer()?;
                self.expect(b')')?;
                Ok(base.pow(n))
            }
            _ if name.starts_with('z') && name.len() > 1 && name[1..].bytes().all(|b| b.is_ascii_digit()) => {
                let index: usize = name[1..].parse().map_err(|_| ParseError {
                    pos: start,
                    msg: format!("bad variable '{name}'"),
                })?;
                if index == 0 || index > self.arity {
                    return Err(ParseError {
                        pos: start,
                        msg: format!("variable {name} exceeds arity {}", self.arity),
                    });
                }
                Ok(Expr::var(index - 1))
            }
            _ => Err(ParseError {
                pos: start,
                msg: format!("unknown identifier '{name}'"),
            }),
        }
    }
}
