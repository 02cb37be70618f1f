//! Infix expression parser producing expanded polynomials.
//!
//! Grammar: `+ - * ^ ( )`, integer or decimal literals, identifiers, and
//! division by a non-zero constant. Exponents must be non-negative integer
//! literals. Function calls and division by non-constants are rejected as
//! non-polynomial.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::poly::Poly;
use super::{Rational, Symbols};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("column {col}: unexpected {found}")]
    Syntax { col: usize, found: String },
    #[error("column {col}: unknown symbol `{name}`")]
    UnknownSymbol { col: usize, name: String },
    #[error("column {col}: non-polynomial expression: {reason}")]
    NonPolynomial { col: usize, reason: String },
}

impl ExprError {
    pub fn column(&self) -> usize {
        match self {
            ExprError::Syntax { col, .. }
            | ExprError::UnknownSymbol { col, .. }
            | ExprError::NonPolynomial { col, .. } => *col,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

impl Lexer {
    fn lex(src: &str) -> Result<Self, ExprError> {
        let chars: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = parse_decimal(&text).ok_or_else(|| ExprError::Syntax {
                    col,
                    found: format!("number `{text}`"),
                })?;
                toks.push((Tok::Num(value), col));
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
            } else if "+-*/^()".contains(c) {
                toks.push((Tok::Op(c), col));
                i += 1;
            } else if c == '\u{2212}' {
                toks.push((Tok::Op('-'), col));
                i += 1;
            } else {
                return Err(ExprError::Syntax {
                    col,
                    found: format!("character `{c}`"),
                });
            }
        }
        toks.push((Tok::End, chars.len() + 1));
        Ok(Lexer { toks })
    }
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let mut parts = text.split('.');
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if parts.next().is_some() || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(n, d))
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    syms: &'a Symbols,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ExprError {
        let found = match self.peek() {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of expression".to_string(),
        };
        ExprError::Syntax {
            col: self.col(),
            found,
        }
    }

    fn expr(&mut self) -> Result<Poly, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Op('/') => {
                    let col = self.col();
                    self.bump();
                    let d = self.unary()?;
                    match d.as_constant() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                        Some(_) => {
                            return Err(ExprError::NonPolynomial {
                                col,
                                reason: "division by zero".into(),
                            })
                        }
                        None => {
                            return Err(ExprError::NonPolynomial {
                                col,
                                reason: "division by a non-constant".into(),
                            })
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ExprError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-&self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, ExprError> {
        let base = self.atom()?;
        if self.peek() == &Tok::Op('^') {
            let col = self.col();
            self.bump();
            let neg = if self.peek() == &Tok::Op('-') {
                self.bump();
                true
            } else {
                false
            };
            match self.bump() {
                (Tok::Num(n), _) if !neg && n.is_integer() => {
                    let e: u32 = n.to_integer().try_into().map_err(|_| ExprError::NonPolynomial {
                        col,
                        reason: "exponent too large".into(),
                    })?;
                    return Ok(base.pow(e));
                }
                _ => {
                    return Err(ExprError::NonPolynomial {
                        col,
                        reason: "exponent must be a non-negative integer literal".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ExprError> {
        let col = self.col();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Poly::constant(self.syms, n))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() == &Tok::Op('(') {
                    return Err(ExprError::NonPolynomial {
                        col,
                        reason: format!("function call `{name}(...)`"),
                    });
                }
                match self.syms.index_of(&name) {
                    Some(idx) => Ok(Poly::var_idx(self.syms, idx)),
                    None => Err(ExprError::UnknownSymbol { col, name }),
                }
            }
            Tok::Op('(') => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != &Tok::Op(')') {
                    return Err(self.unexpected());
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parse an infix expression over `syms` into an expanded polynomial.
pub fn parse_expr(src: &str, syms: &Symbols) -> Result<Poly, ExprError> {
    let lexer = Lexer::lex(src)?;
    let mut parser = Parser {
        toks: lexer.toks,
        pos: 0,
        syms,
    };
    let p = parser.expr()?;
    if parser.peek() != &Tok::End {
        return Err(parser.unexpected());
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat;

    fn syms() -> Symbols {
        Symbols::new(["x", "y", "a", "b"])
    }

    #[test]
    fn expands_products() {
        let p = parse_expr("-a*(x - 2) - b*(y - 1/2)", &syms()).unwrap();
        assert_eq!(p.to_text(), "-x*a - y*b + 2*a + 1/2*b");
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_expr("0.25*x", &syms()).unwrap();
        assert_eq!(p.terms().next().unwrap().1, &rat(1, 4));
    }

    #[test]
    fn rejects_functions() {
        let err = parse_expr("sin(x)", &syms()).unwrap_err();
        assert!(matches!(err, ExprError::NonPolynomial { col: 1, .. }));
    }

    #[test]
    fn rejects_non_constant_division_and_bad_exponents() {
        assert!(matches!(
            parse_expr("x / y", &syms()),
            Err(ExprError::NonPolynomial { .. })
        ));
        assert!(matches!(
            parse_expr("x^-1", &syms()),
            Err(ExprError::NonPolynomial { .. })
        ));
        assert!(matches!(
            parse_expr("x^0.5", &syms()),
            Err(ExprError::NonPolynomial { .. })
        ));
    }

    #[test]
    fn unknown_symbol_reports_column() {
        let err = parse_expr("x + zeta", &syms()).unwrap_err();
        assert_eq!(
            err,
            ExprError::UnknownSymbol {
                col: 5,
                name: "zeta".into()
            }
        );
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_expr("x +", &syms()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("(x", &syms()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("x y", &syms()), Err(ExprError::Syntax { .. })));
    }
}
