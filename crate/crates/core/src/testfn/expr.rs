//! Expression strings for test functions and initial data.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' int)*
//! atom   := number | 'x' | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! The argument of `exp` must be affine in `x`. Columns in errors are 1-based.

use super::exppoly::{ExpPoly, ExpTerm};
use crate::error::{Error, Result};

const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    X,
    Exp,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let (t, col) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, col));
            if end {
                return Ok(out);
            }
        }
    }

    fn err(col: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            column: col,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let col = self.pos + 1;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, col));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'x' => Some(Tok::X),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, col));
        }
        if self.src[self.pos..].starts_with(b"exp") {
            self.pos += 3;
            return Ok((Tok::Exp, col));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(col);
        }
        Err(Self::err(col, format!("unexpected character '{}'", c as char)))
    }

    fn number(&mut self, col: usize) -> Result<(Tok, usize)> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        // exponent only when followed by a digit, so "2exp" is not swallowed
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < s.len() && (s[p] == b'+' || s[p] == b'-') {
                p += 1;
            }
            if p < s.len() && s[p].is_ascii_digit() {
                while p < s.len() && s[p].is_ascii_digit() {
                    p += 1;
                }
                self.pos = p;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(|v| (Tok::Num(v), col))
            .map_err(|_| Self::err(col, format!("malformed number '{text}'")))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn col(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if t != Tok::End {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(Lexer::err(self.col(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<ExpPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
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

    fn term(&mut self) -> Result<ExpPoly> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ExpPoly> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-&self.factor()?);
        }
        let mut base = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let col = self.col();
            let n = match self.bump() {
                Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= MAX_EXPONENT as f64 => v as u32,
                _ => {
                    return Err(Lexer::err(
                        col,
                        format!("exponent must be an integer in 0..={MAX_EXPONENT}"),
                    ))
                }
            };
            base = base.powi(n);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExpPoly> {
        let col = self.col();
        match self.bump() {
            Tok::Num(v) => Ok(ExpPoly::constant(v)),
            Tok::X => Ok(ExpPoly::x()),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Exp => {
                self.expect(Tok::LParen, "'(' after exp")?;
                let arg_col = self.col();
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                exp_of_affine(&arg).ok_or_else(|| {
                    Lexer::err(arg_col, "argument of exp must be affine in x (c0 + c1*x)")
                })
            }
            Tok::End => Err(Lexer::err(col, "unexpected end of expression")),
            t => Err(Lexer::err(col, format!("unexpected token {t:?}"))),
        }
    }
}

/// `exp(c0 + c1 x) = e^{c0} · e^{c1 x}`; `None` when the argument is not affine.
fn exp_of_affine(arg: &ExpPoly) -> Option<ExpPoly> {
    if !arg.is_polynomial() || arg.max_power() > 1 {
        return None;
    }
    let c = arg.poly_part(0.0);
    let c0 = c.first().copied().unwrap_or(0.0);
    let c1 = c.get(1).copied().unwrap_or(0.0);
    Some(ExpPoly::from_terms(vec![ExpTerm {
        coef: c0.exp(),
        power: 0,
        rate: c1,
    }]))
}

/// Parses an expression in `x` into its normalized exponential-polynomial form.
pub fn parse_expr(src: &str) -> Result<ExpPoly> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, i: 0 };
    if *p.peek() == Tok::End {
        return Err(Lexer::err(1, "empty expression"));
    }
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Lexer::err(p.col(), "trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> f64 {
        parse_expr(s).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_powers() {
        assert_eq!(ev("1 + 2*x^2", 3.0), 19.0);
        assert_eq!(ev("(1+x)^2", 2.0), 9.0);
        assert_eq!(ev("x^2^2", 2.0), 16.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2 - -x", 1.0), 3.0);
    }

    #[test]
    fn exponentials() {
        let x: f64 = 0.7;
        assert!((ev("-exp(-x)", x) + (-x).exp()).abs() < 1e-15);
        assert!((ev("exp(1 - 2*x)", x) - (1.0 - 2.0 * x).exp()).abs() < 1e-15);
        assert!((ev("1 - exp(-x)", x) - (1.0 - (-x).exp())).abs() < 1e-15);
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(ev("2.5e-1*x", 4.0), 1.0);
        assert_eq!(ev("1e2", 0.0), 100.0);
    }

    #[test]
    fn errors_carry_columns() {
        match parse_expr("x + * 2") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        match parse_expr("exp(x^2)") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("").is_err());
        assert!(parse_expr("x^1.5").is_err());
        assert!(parse_expr("(x").is_err());
        assert!(parse_expr("x y").is_err());
        assert!(parse_expr("sin(x)").is_err());
    }
}
