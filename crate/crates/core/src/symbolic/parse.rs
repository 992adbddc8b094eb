//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' integer)? | '-' factor
//! atom   := number | var | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'ln' | 'sqrt'
//! var    := ('q'|'p'|'v') integer '_' integer | 'lam' integer ('_' integer)?
//! ```
//!
//! Exponents may carry a leading `-`. Decimal literals without an exponent
//! part become exact rationals; literals with an `e`/`E` exponent, or too
//! many digits for a 64-bit rational, become floats.

use num_rational::Rational64;
use thiserror::Error;

use super::expr::{Expr, Func, VarKind, VarRef};
use super::num::Num;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable index 0 in '{name}' at byte {offset} (indices start at 1)")]
    ZeroIndex { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::ZeroIndex { offset, .. } => *offset,
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected '{}'", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::negate(self.term()?));
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

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat(b'*') {
                factors.push(self.factor()?);
            } else if self.eat(b'/') {
                factors.push(Expr::pow(self.factor()?, -1));
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            return Ok(Expr::negate(self.factor()?));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let negative = self.eat(b'-');
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.syntax("expected integer exponent"));
            }
            let magnitude: i64 = digits.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: "exponent out of range".into(),
            })?;
            let exp = if negative { -magnitude } else { magnitude };
            self.skip_ws();
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let e = match self.peek() {
            None => return Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                return Ok(inner);
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number()?,
            Some(c) if c.is_ascii_alphabetic() => self.identifier()?,
            Some(c) => return Err(self.syntax(format!("unexpected '{}'", c as char))),
        };
        self.skip_ws();
        Ok(e)
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let int_part = self.digits().to_string();
        let mut frac_part = String::new();
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac_part = self.digits().to_string();
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseError::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        let mut has_exponent = false;
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits().is_empty() {
                self.pos = save;
            } else {
                has_exponent = true;
            }
        }
        let literal = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if !has_exponent {
            if let Some(r) = exact_decimal(&int_part, &frac_part) {
                return Ok(Expr::constant(Num::Rational(r)));
            }
        }
        literal
            .parse::<f64>()
            .map(Expr::float)
            .map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number '{literal}'"),
            })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        if let Some(f) = Func::from_name(&name) {
            if !self.eat(b'(') {
                return Err(self.syntax(format!("expected '(' after '{name}'")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected ')'"));
            }
            return Ok(Expr::func(f, arg));
        }
        let kind = match name.as_str() {
            "q" => VarKind::Q,
            "p" => VarKind::P,
            "v" => VarKind::V,
            "lam" => VarKind::Lambda,
            _ => {
                return Err(ParseError::UnknownIdentifier {
                    offset: start,
                    name: self.full_token(start),
                })
            }
        };
        let index = self.index_number(start)?;
        let level = if self.peek() == Some(b'_') {
            self.pos += 1;
            Some(self.index_number(start)?)
        } else {
            None
        };
        if self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            return Err(ParseError::UnknownIdentifier {
                offset: start,
                name: self.full_token(start),
            });
        }
        let level = match (kind, level) {
            (VarKind::Lambda, l) => l.unwrap_or(0),
            (_, Some(l)) => l,
            (_, None) => {
                return Err(self.syntax(format!("expected '_<level>' after '{name}{index}'")))
            }
        };
        if index == 0 {
            return Err(ParseError::ZeroIndex {
                offset: start,
                name: self.full_token(start),
            });
        }
        Ok(Expr::var(VarRef::new(kind, index, level)))
    }

    fn index_number(&mut self, token_start: usize) -> Result<u32, ParseError> {
        let at = self.pos;
        let d = self.digits();
        if d.is_empty() {
            return Err(ParseError::Syntax {
                offset: at,
                message: format!("expected integer in '{}'", self.full_token(token_start)),
            });
        }
        d.parse().map_err(|_| ParseError::Syntax {
            offset: at,
            message: "index out of range".into(),
        })
    }

    fn full_token(&self, start: usize) -> String {
        let mut end = start;
        while end < self.src.len()
            && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
        {
            end += 1;
        }
        String::from_utf8_lossy(&self.src[start..end.max(self.pos.min(self.src.len()))])
            .into_owned()
    }
}

fn exact_decimal(int_part: &str, frac_part: &str) -> Option<Rational64> {
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let denom = 10i64.checked_pow(u32::try_from(frac_part.len()).ok()?)?;
    Some(Rational64::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: u32, j: u32) -> Expr {
        Expr::var(VarRef::q(i, j))
    }

    #[test]
    fn sum_of_vars() {
        assert_eq!(
            parse("q1_1 + q1_3").unwrap(),
            Expr::sum(vec![q(1, 1), q(1, 3)])
        );
    }

    #[test]
    fn variable_families() {
        assert_eq!(parse("q3_2").unwrap().as_var(), Some(VarRef::q(3, 2)));
        assert_eq!(parse("p1_0").unwrap().as_var(), Some(VarRef::p(1, 0)));
        assert_eq!(parse("v2_1").unwrap().as_var(), Some(VarRef::v(2, 1)));
        assert_eq!(parse("lam2").unwrap().as_var(), Some(VarRef::lambda(2)));
        assert_eq!(
            parse("lam2_3").unwrap().as_var(),
            Some(VarRef::lambda_derivative(2, 3))
        );
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.5").unwrap(), Expr::ratio(1, 2));
        assert_eq!(parse("2.25").unwrap(), Expr::ratio(9, 4));
        assert_eq!(parse(".5").unwrap(), Expr::ratio(1, 2));
        assert_eq!(parse("1.5e0").unwrap(), Expr::float(1.5));
        assert_eq!(parse("1e-3").unwrap(), Expr::float(1e-3));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-q1_2^2").unwrap();
        assert_eq!(e, Expr::negate(Expr::pow(q(1, 2), 2)));
    }

    #[test]
    fn javelin_lagrangian_shape() {
        let e = parse("0.5*(q1_1^2 - q1_2^2)").unwrap();
        let expected = Expr::product(vec![
            Expr::ratio(1, 2),
            Expr::sum(vec![
                Expr::pow(q(1, 1), 2),
                Expr::negate(Expr::pow(q(1, 2), 2)),
            ]),
        ]);
        assert_eq!(e, expected);
    }

    #[test]
    fn errors_carry_offsets() {
        let err = parse("q1_1 + * q1_2").unwrap_err();
        assert!(
            matches!(err, ParseError::Syntax { offset: 7, .. }),
            "{err:?}"
        );

        let err = parse("q1_1 + x2").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                offset: 7,
                name: "x2".into()
            }
        );

        let err = parse("tan(q1_0)").unwrap_err();
        assert!(matches!(
            err,
            ParseError::UnknownIdentifier { offset: 0, .. }
        ));

        let err = parse("2*q0_1").unwrap_err();
        assert!(
            matches!(err, ParseError::ZeroIndex { offset: 2, .. }),
            "{err:?}"
        );

        assert!(matches!(
            parse("lam0").unwrap_err(),
            ParseError::ZeroIndex { .. }
        ));
        assert!(matches!(
            parse("q1").unwrap_err(),
            ParseError::Syntax { .. }
        ));
        assert!(matches!(
            parse("(q1_1").unwrap_err(),
            ParseError::Syntax { .. }
        ));
        assert!(matches!(
            parse("").unwrap_err(),
            ParseError::Syntax { offset: 0, .. }
        ));
        assert!(matches!(
            parse("q1_1^x").unwrap_err(),
            ParseError::Syntax { .. }
        ));
    }

    #[test]
    fn negative_exponent() {
        assert_eq!(parse("q1_0^-2").unwrap(), Expr::pow(q(1, 0), -2));
    }
}
