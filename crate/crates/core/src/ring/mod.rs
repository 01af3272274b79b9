//! Scalar algebra shared by every formula in the crate.
//!
//! All closed forms are written once against the [`Ring`] trait and then
//! instantiated with exact rationals (evaluation at a rational point),
//! `Complex64` (numeric evaluation), or [`Series3`] (truncated power series in
//! the formal variables `r`, `y`, `z`).

mod rational;
mod scalar;
mod series;

pub use rational::{format_rational, parse_rational, rat, Rational};
pub use scalar::{scalar_arith, ArithOp, Scalar};
pub use series::{Mono, Series3, DEFAULT_MAX_DEGREE};

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

/// Errors raised by scalar arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("divisor is not a unit in its ring")]
    NonUnitDivisor,
    #[error("operands belong to different scalar variants")]
    VariantMismatch,
    #[error("requested z-degree {requested} exceeds truncation order {max_degree}")]
    TruncationExceeded { requested: u32, max_degree: u32 },
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// A commutative ring with a rational scalar action.
///
/// Methods take `&self` so generic formula code never consumes its inputs.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiply by a rational constant.
    fn scale(&self, c: &Rational) -> Self;
    /// Divide by a unit of the ring.
    fn div(&self, rhs: &Self) -> Result<Self, RingError>;
    /// Divide when the quotient exists in the ring even though the divisor
    /// may not be a unit. For series this admits divisors whose lowest
    /// z-degree part is a single monomial `c r^i y^j z^k`, provided both
    /// operands are divisible by `r^i y^j z^k`; the truncation order of the
    /// quotient drops by `k`.
    fn div_exact(&self, rhs: &Self) -> Result<Self, RingError> {
        self.div(rhs)
    }
    fn vanishes(&self) -> bool;
    fn one_like(&self) -> Self;

    fn square(&self) -> Self {
        self.mul(self)
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = self.one_like();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }
}

impl Ring for Rational {
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Rational) -> Self {
        self * c
    }
    fn div(&self, rhs: &Self) -> Result<Self, RingError> {
        if Zero::is_zero(rhs) {
            return Err(RingError::NonUnitDivisor);
        }
        Ok(self / rhs)
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
}

impl Ring for Complex64 {
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Rational) -> Self {
        self * c.to_f64().unwrap_or(f64::NAN)
    }
    fn div(&self, rhs: &Self) -> Result<Self, RingError> {
        if rhs.re == 0.0 && rhs.im == 0.0 {
            return Err(RingError::NonUnitDivisor);
        }
        Ok(self / rhs)
    }
    fn vanishes(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
}

/// The formal variables bound to a concrete ring: either a point of
/// evaluation or the indeterminates of a series ring.
#[derive(Clone, Debug)]
pub struct Vars<R> {
    pub r: R,
    pub y: R,
    pub z: R,
    pub one: R,
}

impl<R: Ring> Vars<R> {
    /// Embed a rational constant.
    pub fn c(&self, q: &Rational) -> R {
        self.one.scale(q)
    }

    pub fn int(&self, n: i64) -> R {
        self.c(&Rational::from_integer(n.into()))
    }

    pub fn zero(&self) -> R {
        self.one.sub(&self.one)
    }
}

impl Vars<Rational> {
    pub fn rational(r: Rational, y: Rational, z: Rational) -> Self {
        Vars { r, y, z, one: Rational::one() }
    }

    /// The point (1, 1, 1), where every probability generating function
    /// evaluates to its total mass.
    pub fn at_one() -> Self {
        Self::rational(Rational::one(), Rational::one(), Rational::one())
    }
}

impl Vars<Complex64> {
    pub fn complex(r: Complex64, y: Complex64, z: Complex64) -> Self {
        Vars { r, y, z, one: Complex64::new(1.0, 0.0) }
    }
}

impl Vars<Series3> {
    pub fn series(max_degree: u32) -> Self {
        Vars {
            r: Series3::monomial(Rational::one(), 1, 0, 0, max_degree),
            y: Series3::monomial(Rational::one(), 0, 1, 0, max_degree),
            z: Series3::monomial(Rational::one(), 0, 0, 1, max_degree),
            one: Series3::one(max_degree),
        }
    }
}

/// Evaluate a series at a complex point.
pub fn series_eval(s: &Series3, r: Complex64, y: Complex64, z: Complex64) -> Complex64 {
    s.eval_complex(r, y, z)
}

/// Extract one coefficient of a series.
pub fn series_coeff(s: &Series3, i: u32, j: u32, k: u32) -> Result<Rational, RingError> {
    s.coeff(i, j, k)
}
