use num_bigint::BigInt;
use num_rational::BigRational;

use super::{CycRat, RatFunc, ScalarError};

/// Parses a scalar literal such as `(2*t^2+1)/(t-3) + 1/2*i` over Q(zeta_m)(t).
pub fn parse_scalar(src: &str, m: u32) -> Result<RatFunc, ScalarError> {
    let mut p = Parser { s: src.as_bytes(), pos: 0, m };
    let v = p.expr()?;
    p.ws();
    if p.pos < p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    m: u32,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ScalarError {
        ScalarError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RatFunc, ScalarError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { acc.try_add(&rhs)? } else { acc.try_sub(&rhs)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc, ScalarError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == b'*' {
                acc.try_mul(&rhs)?
            } else {
                acc.try_div(&rhs).map_err(|e| match e {
                    ScalarError::DivisionByZero => ScalarError::Parse { pos: at, msg: "division by zero".into() },
                    e => e,
                })?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatFunc, ScalarError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFunc, ScalarError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.pos;
            let n = self.integer()?;
            let e: i64 = n.try_into().map_err(|_| ScalarError::Parse { pos: at, msg: "exponent too large".into() })?;
            let e = if neg { -e } else { e };
            return base.pow(e).map_err(|_| ScalarError::Parse { pos: at, msg: "zero to a negative power".into() });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, ScalarError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(txt.parse().unwrap())
    }

    fn atom(&mut self) -> Result<RatFunc, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b't') => {
                self.pos += 1;
                Ok(RatFunc::t(self.m))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(RatFunc::constant(CycRat::gen(self.m)))
            }
            Some(b'i') => {
                let v = RatFunc::imag_unit(self.m).ok_or_else(|| self.err("'i' needs a conductor divisible by 4"))?;
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RatFunc::from_rational(self.m, BigRational::from_integer(n)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_literal() {
        let v = parse_scalar("(2*t^2+1)/(t-3) + 1/2*i", 4).unwrap();
        let again = parse_scalar(&v.to_string(), 4).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_scalar("-t^2", 4).unwrap(), RatFunc::t(4).pow(2).unwrap().neg());
        assert_eq!(parse_scalar("2^-1", 4).unwrap().to_string(), "1/2");
        assert_eq!(parse_scalar("i*i", 4).unwrap(), RatFunc::from_int(4, -1));
        assert_eq!(parse_scalar("z^3", 3).unwrap(), RatFunc::one(3));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_scalar("1 + * 2", 4) {
            Err(ScalarError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_scalar("1/0", 4), Err(ScalarError::Parse { pos: 1, .. })));
        assert!(matches!(parse_scalar("i", 3), Err(ScalarError::Parse { .. })));
        assert!(matches!(parse_scalar("(t", 4), Err(ScalarError::Parse { pos: 2, .. })));
    }
}
