//! Exact coefficient field Q(zeta_m)(t) and dense linear algebra over it.

mod cyclo;
mod matrix;
mod parse;
mod poly;
mod ratfunc;

use std::ops::{Add, Div, Mul, Neg, Sub};

pub use cyclo::{cyclotomic_poly, lcm, phi, CycRat};
pub use matrix::{FMatrix, Solution};
pub use parse::parse_scalar;
pub use poly::Poly;
pub use ratfunc::RatFunc;

/// Default conductor: Gaussian rationals.
pub const DEFAULT_CONDUCTOR: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),
    #[error("singular matrix")]
    Singular,
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

macro_rules! ops {
    ($t:ty) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, o: &$t) -> $t {
                self.try_add(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl Sub for &$t {
            type Output = $t;
            fn sub(self, o: &$t) -> $t {
                self.try_sub(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl Mul for &$t {
            type Output = $t;
            fn mul(self, o: &$t) -> $t {
                self.try_mul(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                <$t>::neg(self)
            }
        }
    };
}

ops!(CycRat);
ops!(RatFunc);
ops!(FMatrix);

impl Div for &CycRat {
    type Output = CycRat;
    fn div(self, o: &CycRat) -> CycRat {
        self.try_div(o).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    fn div(self, o: &RatFunc) -> RatFunc {
        self.try_div(o).unwrap_or_else(|e| panic!("{e}"))
    }
}
