use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ScalarError;

type Table = RwLock<HashMap<u32, &'static [i64]>>;

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Integer coefficients of the m-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_poly(m: u32) -> &'static [i64] {
    assert!(m >= 1, "conductor must be positive");
    if let Some(p) = table().read().unwrap().get(&m) {
        return p;
    }
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            num = int_div_exact(&num, cyclotomic_poly(d));
        }
    }
    let leaked: &'static [i64] = Box::leak(num.into_boxed_slice());
    table().write().unwrap().insert(m, leaked);
    leaked
}

fn int_div_exact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0i64; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db];
        q[k] = c;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= c * bi;
        }
    }
    debug_assert!(r.iter().all(|x| *x == 0));
    q
}

/// Euler totient, the degree of the m-th cyclotomic polynomial.
pub fn phi(m: u32) -> usize {
    cyclotomic_poly(m).len() - 1
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Element of Q(zeta_m) in the power basis 1, z, ..., z^(phi(m)-1).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycRat {
    m: u32,
    c: Vec<BigRational>,
}

impl CycRat {
    pub fn zero(m: u32) -> Self {
        CycRat { m, c: vec![BigRational::zero(); phi(m)] }
    }

    pub fn one(m: u32) -> Self {
        Self::from_rational(m, BigRational::one())
    }

    pub fn from_rational(m: u32, r: BigRational) -> Self {
        let mut x = Self::zero(m);
        x.c[0] = r;
        x
    }

    pub fn from_int(m: u32, n: i64) -> Self {
        Self::from_rational(m, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(m: u32, p: i64, q: i64) -> Self {
        Self::from_rational(m, BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// The generator z = exp(2 pi i / m).
    pub fn gen(m: u32) -> Self {
        Self::z_pow(m, 1)
    }

    /// z^k for any integer k, reduced.
    pub fn z_pow(m: u32, k: i64) -> Self {
        let e = k.rem_euclid(m as i64) as usize;
        let mut raw = vec![BigRational::zero(); e.max(1) + 1];
        raw[e] = BigRational::one();
        Self::reduce(m, raw)
    }

    /// The imaginary unit, available when 4 divides m.
    pub fn imag_unit(m: u32) -> Option<Self> {
        (m % 4 == 0).then(|| Self::z_pow(m, (m / 4) as i64))
    }

    /// Builds an element from arbitrary-length coefficients by reducing modulo Phi_m.
    pub fn from_coeffs(m: u32, coeffs: Vec<BigRational>) -> Self {
        Self::reduce(m, coeffs)
    }

    fn reduce(m: u32, mut raw: Vec<BigRational>) -> Self {
        let p = cyclotomic_poly(m);
        let d = p.len() - 1;
        while raw.len() > d {
            let top = raw.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let k = raw.len() - d;
            for (i, pi) in p[..d].iter().enumerate() {
                if *pi != 0 {
                    raw[k + i] -= &top * BigRational::from_integer(BigInt::from(*pi));
                }
            }
        }
        raw.resize(d, BigRational::zero());
        CycRat { m, c: raw }
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(|x| x.is_zero())
    }

    /// Some(q) when the element lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.c[1..].iter().all(|x| x.is_zero()).then(|| &self.c[0])
    }

    fn check(&self, o: &Self) -> Result<(), ScalarError> {
        if self.m != o.m {
            Err(ScalarError::ConductorMismatch(self.m, o.m))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        Ok(CycRat { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        Ok(CycRat { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() })
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        if let Some(r) = self.as_rational() {
            return Ok(o.scale(r));
        }
        if let Some(r) = o.as_rational() {
            return Ok(self.scale(r));
        }
        let n = self.c.len();
        let mut raw = vec![BigRational::zero(); 2 * n - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        Ok(Self::reduce(self.m, raw))
    }

    pub fn try_div(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        self.try_mul(&o.inv()?)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CycRat { m: self.m, c: self.c.iter().map(|a| a * r).collect() }
    }

    pub fn neg(&self) -> Self {
        CycRat { m: self.m, c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Self::from_rational(self.m, r.recip()));
        }
        if self.m == 4 {
            let (a, b) = (&self.c[0], &self.c[1]);
            let n = a * a + b * b;
            return Ok(CycRat { m: 4, c: vec![a / &n, -(b / &n)] });
        }
        let p: Vec<BigRational> = cyclotomic_poly(self.m)
            .iter()
            .map(|x| BigRational::from_integer(BigInt::from(*x)))
            .collect();
        let s = rat_poly_inverse_mod(&self.c, &p);
        Ok(Self::reduce(self.m, s))
    }

    /// Complex conjugation z -> z^(m-1).
    pub fn conj(&self) -> Self {
        let m = self.m as usize;
        let mut raw = vec![BigRational::zero(); m.max(2)];
        for (k, a) in self.c.iter().enumerate() {
            if !a.is_zero() {
                raw[(m - k) % m] += a;
            }
        }
        Self::reduce(self.m, raw)
    }

    /// Number of nonzero power-basis coefficients.
    pub fn support(&self) -> usize {
        self.c.iter().filter(|x| !x.is_zero()).count()
    }
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|x| x.is_zero()) {
        p.pop();
    }
}

fn rat_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return (vec![], r);
    }
    let lc = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] / &lc;
        if !c.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                r[k + i] -= &c * bi;
            }
        }
        q[k] = c;
    }
    trim(&mut r);
    (q, r)
}

fn rat_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn rat_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

/// s with s*a = 1 mod p, for a coprime to p.
fn rat_poly_inverse_mod(a: &[BigRational], p: &[BigRational]) -> Vec<BigRational> {
    let (mut r0, mut r1) = (p.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut s0, mut s1): (Vec<BigRational>, Vec<BigRational>) = (vec![], vec![BigRational::one()]);
    while r1.len() > 1 {
        let (q, r) = rat_divrem(&r0, &r1);
        let s = rat_sub(&s0, &rat_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    let c = r1[0].recip();
    s1.iter().map(|x| x * &c).collect()
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CycRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        for (k, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let unit = match k {
                0 => String::new(),
                1 if self.m == 4 => "i".to_string(),
                1 => "z".to_string(),
                _ => format!("z^{k}"),
            };
            let s = if unit.is_empty() {
                fmt_rational(a)
            } else if a.is_one() {
                unit
            } else if (-a).is_one() {
                format!("-{unit}")
            } else {
                format!("{}*{unit}", fmt_rational(a))
            };
            terms.push(s);
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (n, t) in terms.iter().enumerate() {
            if n > 0 && !t.starts_with('-') {
                out.push('+');
            }
            out.push_str(t);
        }
        write!(f, "{out}")
    }
}

impl fmt::Debug for CycRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), &[-1, 1]);
        assert_eq!(cyclotomic_poly(4), &[1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), &[1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), &[1, 0, -1, 0, 1]);
        assert_eq!(phi(20), 8);
    }

    #[test]
    fn gaussian_product() {
        let i = CycRat::imag_unit(4).unwrap();
        let half = CycRat::from_ratio(4, 1, 2);
        let a = half.try_add(&half.try_mul(&i).unwrap()).unwrap();
        let b = CycRat::one(4).try_sub(&i).unwrap();
        assert!(a.try_mul(&b).unwrap().is_one());
    }

    #[test]
    fn generator_has_order_m() {
        for m in [3u32, 5, 8, 12, 20] {
            let z = CycRat::gen(m);
            let mut p = CycRat::one(m);
            for _ in 0..m {
                p = p.try_mul(&z).unwrap();
            }
            assert!(p.is_one(), "m={m}");
            assert_eq!(z.conj(), CycRat::z_pow(m, -1));
        }
    }

    #[test]
    fn inverse_general_conductor() {
        let m = 12;
        let x = CycRat::gen(m).try_add(&CycRat::from_int(m, 3)).unwrap();
        assert!(x.try_mul(&x.inv().unwrap()).unwrap().is_one());
    }

    #[test]
    fn conductor_mismatch() {
        assert!(matches!(
            CycRat::one(4).try_add(&CycRat::one(12)),
            Err(ScalarError::ConductorMismatch(4, 12))
        ));
        assert!(matches!(CycRat::zero(4).inv(), Err(ScalarError::DivisionByZero)));
    }
}
