//! Reader for the pretty-text frontend.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' '-'? INT)?
//! primary := NUMBER | '(' expr ')'
//!          | ('dx' | 'dy' | 'dz') '(' expr ')'
//!          | 'delta' '(' INT ',' INT ')'
//!          | ('sigma_t' | 'sigma_s') pos?
//!          | 'p' '[' INT ',' '0' ']' pos?
//!          | 'Q' '[' INT ',' INT ']' pos?
//!          | IDENT '[' INT ',' INT ']' pos?      (unknown field)
//!          | IDENT                              (symbol)
//! pos     := '@' '(' INT ',' INT ',' INT ')'
//! ```

use std::sync::Arc;

use super::expr::{Axis, Expr, FieldSample, HalfOffset, Param, Unknown};
use super::CasError;
use crate::sh::ShIndex;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Punct(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, CasError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &s[start..i];
            let v = text
                .parse::<f64>()
                .map_err(|_| CasError::Parse(format!("bad number '{text}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Ident(s[start..i].to_string()));
        } else if "+-*^()[],@".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else {
            return Err(CasError::Parse(format!("unexpected character '{c}' at {i}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn peek_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn eat(&mut self, c: char) -> Result<(), CasError> {
        if self.peek_punct(c) {
            self.at += 1;
            Ok(())
        } else {
            Err(CasError::Parse(format!(
                "expected '{c}' at token {} (found {:?})",
                self.at,
                self.peek()
            )))
        }
    }

    fn int(&mut self) -> Result<i32, CasError> {
        let neg = if self.peek_punct('-') {
            self.at += 1;
            true
        } else {
            false
        };
        match self.toks.get(self.at) {
            Some(Tok::Num(v)) if v.fract() == 0.0 => {
                self.at += 1;
                let v = *v as i32;
                Ok(if neg { -v } else { v })
            }
            other => Err(CasError::Parse(format!("expected integer, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, CasError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.peek_punct('+') {
                self.at += 1;
                terms.push(self.term()?);
            } else if self.peek_punct('-') {
                self.at += 1;
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, CasError> {
        let mut factors = vec![self.unary()?];
        while self.peek_punct('*') {
            self.at += 1;
            factors.push(self.unary()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::product(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr, CasError> {
        if self.peek_punct('-') {
            self.at += 1;
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Num(v) => Expr::num(-v),
                other => -other,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, CasError> {
        let base = self.primary()?;
        if self.peek_punct('^') {
            self.at += 1;
            let k = self.int()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn pos(&mut self) -> Result<HalfOffset, CasError> {
        if !self.peek_punct('@') {
            return Ok(HalfOffset::ZERO);
        }
        self.at += 1;
        self.eat('(')?;
        let x = self.int()?;
        self.eat(',')?;
        let y = self.int()?;
        self.eat(',')?;
        let z = self.int()?;
        self.eat(')')?;
        Ok(HalfOffset([x, y, z]))
    }

    fn index_pair(&mut self) -> Result<(i32, i32), CasError> {
        self.eat('[')?;
        let l = self.int()?;
        self.eat(',')?;
        let m = self.int()?;
        self.eat(']')?;
        Ok((l, m))
    }

    fn primary(&mut self) -> Result<Expr, CasError> {
        let tok = self
            .toks
            .get(self.at)
            .cloned()
            .ok_or_else(|| CasError::Parse("unexpected end of input".into()))?;
        self.at += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::num(v)),
            Tok::Punct('(') => {
                let e = self.expr()?;
                self.eat(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.named(&name),
            other => Err(CasError::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn named(&mut self, name: &str) -> Result<Expr, CasError> {
        let axis = match name {
            "dx" => Some(Axis::X),
            "dy" => Some(Axis::Y),
            "dz" => Some(Axis::Z),
            _ => None,
        };
        if let (Some(axis), true) = (axis, self.peek_punct('(')) {
            self.eat('(')?;
            let e = self.expr()?;
            self.eat(')')?;
            return Ok(Expr::deriv(axis, e));
        }
        if name == "delta" && self.peek_punct('(') {
            self.eat('(')?;
            let i = self.int()?;
            self.eat(',')?;
            let j = self.int()?;
            self.eat(')')?;
            return Ok(Expr::Delta(i, j));
        }
        let field = |param, pos| Expr::Field(FieldSample { param, pos });
        match name {
            "sigma_t" => return Ok(field(Param::SigmaT, self.pos()?)),
            "sigma_s" => return Ok(field(Param::SigmaS, self.pos()?)),
            _ => {}
        }
        if !self.peek_punct('[') {
            return Ok(Expr::sym(name));
        }
        let (l, m) = self.index_pair()?;
        let index = ShIndex::new(l, m).map_err(|e| CasError::Parse(e.to_string()))?;
        let pos = self.pos()?;
        Ok(match name {
            "p" if m == 0 => field(Param::Phase(l), pos),
            "p" => return Err(CasError::Parse("phase coefficients are zonal (m = 0)".into())),
            "Q" => field(Param::Emission(index), pos),
            _ => Expr::Unknown(Unknown {
                field: Arc::from(name),
                index,
                pos,
            }),
        })
    }
}

pub fn parse(text: &str) -> Result<Expr, CasError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(CasError::Parse(format!("trailing input at token {}", p.at)));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cas::pretty;

    #[test]
    fn reads_rendered_forms() {
        for text in [
            "6*x",
            "dx(L[1,-1])",
            "a - 0.5*b",
            "-0.5*sigma_t@(2,0,0)*L[1,1]@(1,0,0)*h^-1",
            "Q[2,-1] + p[3,0]*sigma_s",
            "dx((3*sigma_t)^-1*dx(L[0,0]))",
            "delta(1,1)*x",
        ] {
            let e = parse(text).unwrap();
            assert_eq!(pretty(&e), text, "round trip of {text}");
        }
    }

    #[test]
    fn exponent_numbers() {
        assert_eq!(parse("1e-3*x").unwrap(), 0.001 * Expr::sym("x"));
    }

    #[test]
    fn reports_garbage() {
        assert!(parse("x + * y").is_err());
        assert!(parse("L[1,2]").is_err());
        assert!(parse("x $ y").is_err());
    }
}
