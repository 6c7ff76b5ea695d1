use super::CycRat;

/// Polynomial in t over Q(zeta_m), lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    m: u32,
    c: Vec<CycRat>,
}

impl Poly {
    pub fn zero(m: u32) -> Self {
        Poly { m, c: vec![] }
    }

    pub fn one(m: u32) -> Self {
        Poly { m, c: vec![CycRat::one(m)] }
    }

    pub fn constant(a: CycRat) -> Self {
        let m = a.conductor();
        Self::new(m, vec![a])
    }

    /// t^k
    pub fn monomial(m: u32, k: usize) -> Self {
        let mut c = vec![CycRat::zero(m); k + 1];
        c[k] = CycRat::one(m);
        Poly { m, c }
    }

    pub fn new(m: u32, mut c: Vec<CycRat>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { m, c }
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[CycRat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    /// Degree, with the zero polynomial given degree 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn lead(&self) -> Option<&CycRat> {
        self.c.last()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let z = CycRat::zero(self.m);
        let c = (0..n)
            .map(|k| {
                let a = self.c.get(k).unwrap_or(&z);
                let b = o.c.get(k).unwrap_or(&z);
                a.try_add(b).expect("conductor mismatch")
            })
            .collect();
        Poly::new(self.m, c)
    }

    pub fn neg(&self) -> Poly {
        Poly { m: self.m, c: self.c.iter().map(|x| x.neg()).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &CycRat) -> Poly {
        if a.is_zero() {
            return Poly::zero(self.m);
        }
        Poly { m: self.m, c: self.c.iter().map(|x| x.try_mul(a).expect("conductor mismatch")).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.m);
        }
        if self.c.len() == 1 {
            return o.scale(&self.c[0]);
        }
        if o.c.len() == 1 {
            return self.scale(&o.c[0]);
        }
        let mut c = vec![CycRat::zero(self.m); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] = c[i + j].try_add(&a.try_mul(b).unwrap()).unwrap();
                }
            }
        }
        Poly::new(self.m, c)
    }

    /// Quotient and remainder; panics if `b` is zero.
    pub fn divrem(&self, b: &Poly) -> (Poly, Poly) {
        assert!(!b.is_zero(), "polynomial division by zero");
        let db = b.degree();
        if self.c.len() <= db {
            return (Poly::zero(self.m), self.clone());
        }
        let inv = b.lead().unwrap().inv().unwrap();
        let mut r = self.c.clone();
        let mut q = vec![CycRat::zero(self.m); r.len() - db];
        for k in (0..q.len()).rev() {
            let c = r[k + db].try_mul(&inv).unwrap();
            if !c.is_zero() {
                for (i, bi) in b.c.iter().enumerate() {
                    r[k + i] = r[k + i].try_sub(&c.try_mul(bi).unwrap()).unwrap();
                }
            }
            q[k] = c;
        }
        (Poly::new(self.m, q), Poly::new(self.m, r))
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => self.clone(),
            Some(l) if l.is_one() => self.clone(),
            Some(l) => self.scale(&l.inv().unwrap()),
        }
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(&self, o: &Poly) -> Poly {
        if self.is_constant() && !self.is_zero() || o.is_constant() && !o.is_zero() {
            return Poly::one(self.m);
        }
        let (mut a, mut b) = (self.monic(), o.monic());
        while !b.is_zero() {
            let r = a.divrem(&b).1.monic();
            a = std::mem::replace(&mut b, r);
        }
        a
    }

    /// Coefficientwise complex conjugation.
    pub fn conj(&self) -> Poly {
        Poly { m: self.m, c: self.c.iter().map(|x| x.conj()).collect() }
    }

    pub fn eval(&self, x: &CycRat) -> CycRat {
        let mut acc = CycRat::zero(self.m);
        for a in self.c.iter().rev() {
            acc = acc.try_mul(x).unwrap().try_add(a).unwrap();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::new(4, c.iter().map(|x| CycRat::from_int(4, *x)).collect())
    }

    #[test]
    fn divrem_and_gcd() {
        let a = p(&[-1, 0, 1]);
        let b = p(&[-1, 1]);
        let (q, r) = a.divrem(&b);
        assert_eq!(q, p(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&p(&[2, 2])), p(&[1, 1]));
        assert_eq!(p(&[3]).gcd(&a), Poly::one(4));
    }

    #[test]
    fn trims_zeros() {
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[1, 2, 0]).degree(), 1);
    }
}
