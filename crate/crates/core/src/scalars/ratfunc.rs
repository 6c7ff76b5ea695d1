use std::fmt;

use num_rational::BigRational;

use super::{CycRat, Poly, ScalarError};

/// Element of Q(zeta_m)(t): num/den with den monic and coprime to num.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Option<Poly>,
}

impl RatFunc {
    pub fn zero(m: u32) -> Self {
        RatFunc { num: Poly::zero(m), den: None }
    }

    pub fn one(m: u32) -> Self {
        RatFunc { num: Poly::one(m), den: None }
    }

    pub fn from_int(m: u32, n: i64) -> Self {
        Self::constant(CycRat::from_int(m, n))
    }

    pub fn from_rational(m: u32, r: BigRational) -> Self {
        Self::constant(CycRat::from_rational(m, r))
    }

    pub fn constant(a: CycRat) -> Self {
        RatFunc { num: Poly::constant(a), den: None }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: None }
    }

    /// The indeterminate t.
    pub fn t(m: u32) -> Self {
        Self::from_poly(Poly::monomial(m, 1))
    }

    pub fn imag_unit(m: u32) -> Option<Self> {
        CycRat::imag_unit(m).map(Self::constant)
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.conductor() != den.conductor() {
            return Err(ScalarError::ConductorMismatch(num.conductor(), den.conductor()));
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        let m = num.conductor();
        if num.is_zero() {
            return Self::zero(m);
        }
        if den.is_constant() {
            let inv = den.coeffs()[0].inv().unwrap();
            return RatFunc { num: num.scale(&inv), den: None };
        }
        let g = num.gcd(&den);
        if g.degree() == den.degree() {
            let inv = den.lead().unwrap().inv().unwrap();
            return RatFunc { num: num.divrem(&g).0.scale(&inv), den: None };
        }
        let (mut n, mut d) = if g.is_one() { (num, den) } else { (num.divrem(&g).0, den.divrem(&g).0) };
        let l = d.lead().unwrap().clone();
        if !l.is_one() {
            let inv = l.inv().unwrap();
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        RatFunc { num: n, den: Some(d) }
    }

    pub fn conductor(&self) -> u32 {
        self.num.conductor()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    /// The monic denominator.
    pub fn den(&self) -> Poly {
        self.den.clone().unwrap_or_else(|| Poly::one(self.conductor()))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_none()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_none()
    }

    /// Some(c) when the value is a constant.
    pub fn as_constant(&self) -> Option<CycRat> {
        if self.den.is_some() || !self.num.is_constant() {
            return None;
        }
        Some(self.num.coeffs().first().cloned().unwrap_or_else(|| CycRat::zero(self.conductor())))
    }

    /// deg num + deg den, the pivot weight used by elimination.
    pub fn total_degree(&self) -> usize {
        self.num.degree() + self.den.as_ref().map_or(0, |d| d.degree())
    }

    fn check(&self, o: &Self) -> Result<(), ScalarError> {
        if self.conductor() != o.conductor() {
            Err(ScalarError::ConductorMismatch(self.conductor(), o.conductor()))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        match (&self.den, &o.den) {
            (None, None) => Ok(Self::from_poly(self.num.add(&o.num))),
            (Some(a), Some(b)) if a == b => Ok(Self::normalize(self.num.add(&o.num), a.clone())),
            (None, Some(b)) => Ok(Self::normalize(self.num.mul(b).add(&o.num), b.clone())),
            (Some(a), None) => Ok(Self::normalize(self.num.add(&o.num.mul(a)), a.clone())),
            (Some(a), Some(b)) => {
                let n = self.num.mul(b).add(&o.num.mul(a));
                Ok(Self::normalize(n, a.mul(b)))
            }
        }
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, ScalarError> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(Self::zero(self.conductor()));
        }
        if self.den.is_none() && o.den.is_none() {
            return Ok(Self::from_poly(self.num.mul(&o.num)));
        }
        if let Some(c) = self.as_constant() {
            return Ok(RatFunc { num: o.num.scale(&c), den: o.den.clone() });
        }
        if let Some(c) = o.as_constant() {
            return Ok(RatFunc { num: self.num.scale(&c), den: self.den.clone() });
        }
        let (d1, d2) = (self.den(), o.den());
        let g1 = self.num.gcd(&d2);
        let g2 = o.num.gcd(&d1);
        let n1 = self.num.divrem(&g1).0;
        let d2 = d2.divrem(&g1).0;
        let n2 = o.num.divrem(&g2).0;
        let d1 = d1.divrem(&g2).0;
        Ok(Self::normalize(n1.mul(&n2), d1.mul(&d2)))
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::normalize(self.den(), self.num.clone()))
    }

    pub fn try_div(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        self.try_mul(&o.inv()?)
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<Self, ScalarError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.conductor());
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.try_mul(&b)?;
            }
            k >>= 1;
            if k > 0 {
                b = b.try_mul(&b)?;
            }
        }
        Ok(acc)
    }

    /// Conjugation of coefficients, with t treated as real.
    pub fn conj(&self) -> Self {
        RatFunc { num: self.num.conj(), den: self.den.as_ref().map(|d| d.conj()) }
    }

    /// Value at t = x, if the denominator does not vanish there.
    pub fn eval(&self, x: &CycRat) -> Result<CycRat, ScalarError> {
        let d = self.den().eval(x);
        self.num.eval(x).try_div(&d)
    }
}

fn fmt_poly(p: &Poly) -> String {
    let mut terms: Vec<String> = Vec::new();
    for (k, a) in p.coeffs().iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => "t".to_string(),
            _ => format!("t^{k}"),
        };
        let cs = a.to_string();
        let s = if mono.is_empty() {
            cs
        } else if a.is_one() {
            mono
        } else if a.neg().is_one() {
            format!("-{mono}")
        } else if a.support() == 1 {
            format!("{cs}*{mono}")
        } else {
            format!("({cs})*{mono}")
        };
        terms.push(s);
    }
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (n, t) in terms.iter().enumerate() {
        if n > 0 && !t.starts_with('-') {
            out.push('+');
        }
        out.push_str(t);
    }
    out
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.den {
            None => write!(f, "{}", fmt_poly(&self.num)),
            Some(d) => write!(f, "({})/({})", fmt_poly(&self.num), fmt_poly(d)),
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_common_factor() {
        let m = 4;
        let t = RatFunc::t(m);
        let one = RatFunc::one(m);
        let num = t.pow(2).unwrap().try_sub(&one).unwrap();
        let den = t.try_sub(&one).unwrap();
        let q = num.try_div(&den).unwrap();
        assert_eq!(q, t.try_add(&one).unwrap());
        assert!(q.is_polynomial());
    }

    #[test]
    fn denominators_are_monic() {
        let m = 4;
        let two_t = RatFunc::t(m).try_mul(&RatFunc::from_int(m, 2)).unwrap();
        let x = RatFunc::one(m).try_div(&two_t).unwrap();
        assert!(x.den().lead().unwrap().is_one());
        assert_eq!(x.to_string(), "(1/2)/(t)");
    }

    #[test]
    fn zero_is_canonical() {
        let m = 4;
        let t = RatFunc::t(m);
        let a = RatFunc::one(m).try_div(&t).unwrap();
        assert_eq!(a.try_sub(&a).unwrap(), RatFunc::zero(m));
    }
}
