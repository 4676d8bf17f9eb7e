//! Parser for the small infix expression grammar used by catalog files:
//! symbols, `+ - * / ^`, integer literals, parentheses. `/` between two
//! integer literals is just exact rational division, so `3/20` reads as
//! the rational three-twentieths.

use num_bigint::BigInt;

use super::poly::Polynomial;
use super::ratfun::RationalFunction;
use super::{Alphabet, ExactError, Rat};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Sym(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(input: &str) -> Result<Vec<Tok>, ExactError> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s
                    .parse::<BigInt>()
                    .map_err(|_| ExactError::Parse(format!("bad number `{s}`")))?;
                out.push(Tok::Num(n));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                out.push(Tok::Sym(chars[start..i].iter().collect()));
            }
            other => {
                return Err(ExactError::Parse(format!(
                    "unexpected character `{other}` in `{input}`"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    alph: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RationalFunction, ExactError> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction, ExactError> {
        let mut acc = self.unary()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Star => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?)?;
                }
                Tok::Slash => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalFunction, ExactError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFunction, ExactError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            // Exponent: integer, possibly parenthesized negative.
            let neg = matches!(self.peek(), Some(Tok::Minus)) && {
                self.pos += 1;
                true
            };
            match self.next() {
                Some(Tok::Num(n)) => {
                    let e: i32 = n
                        .to_string()
                        .parse()
                        .map_err(|_| ExactError::Parse("exponent too large".into()))?;
                    base.pow(if neg { -e } else { e })
                }
                _ => Err(ExactError::Parse("expected integer exponent after ^".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<RationalFunction, ExactError> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(RationalFunction::constant(
                self.alph,
                Rat::from_integer(n),
            )),
            Some(Tok::Sym(s)) => RationalFunction::var(self.alph, &s),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(ExactError::Parse("missing closing parenthesis".into())),
                }
            }
            other => Err(ExactError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an infix expression into a rational function over `alph`.
pub fn parse_expr(alph: &Alphabet, input: &str) -> Result<RationalFunction, ExactError> {
    let toks = lex(input)?;
    let mut p = Parser {
        toks,
        pos: 0,
        alph,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ExactError::Parse(format!(
            "trailing input after position {} in `{input}`",
            p.pos
        )));
    }
    Ok(e)
}

/// Parses an expression that must be a polynomial (constant denominator).
pub fn parse_poly(alph: &Alphabet, input: &str) -> Result<Polynomial, ExactError> {
    let r = parse_expr(alph, input)?;
    r.as_polynomial().cloned().ok_or_else(|| {
        ExactError::Parse(format!("expected polynomial, got rational: `{input}`"))
    })
}

#[cfg(test)]
mod tests {
    use super::super::ratio;
    use super::*;

    #[test]
    fn parses_rational_literals() {
        let a = Alphabet::new(&["x"]).unwrap();
        let r = parse_expr(&a, "3/20").unwrap();
        assert_eq!(r.as_constant().unwrap(), ratio(3, 20));
    }

    #[test]
    fn precedence_and_unary() {
        let a = Alphabet::new(&["x", "y"]).unwrap();
        let r = parse_expr(&a, "-2*x*y + x^2 - (x - y)").unwrap();
        let alt = parse_expr(&a, "x^2 - 2*x*y - x + y").unwrap();
        assert_eq!(r, alt);
    }

    #[test]
    fn division_builds_rational_functions() {
        let a = Alphabet::new(&["p", "q"]).unwrap();
        let r = parse_expr(&a, "q + 1/p").unwrap();
        assert!(!r.is_polynomial());
        let back = r
            .mul(&parse_expr(&a, "p").unwrap())
            .unwrap();
        assert_eq!(back, parse_expr(&a, "q*p + 1").unwrap());
    }

    #[test]
    fn negative_exponents() {
        let a = Alphabet::new(&["p"]).unwrap();
        let r = parse_expr(&a, "p^-2").unwrap();
        assert_eq!(r, parse_expr(&a, "1/p^2").unwrap());
    }
}
