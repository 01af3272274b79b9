use super::{Rational, Ring, RingError, Series3};
use num_complex::Complex64;

/// Dynamically typed carrier for the three scalar variants.
///
/// Generic code uses [`Ring`] directly; this enum exists for callers that
/// pick the variant at run time (the CLI, serialization).
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(Rational),
    Complex(Complex64),
    Series(Series3),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

fn apply<R: Ring>(op: ArithOp, x: &R, y: &R) -> Result<R, RingError> {
    Ok(match op {
        ArithOp::Add => x.add(y),
        ArithOp::Sub => x.sub(y),
        ArithOp::Mul => x.mul(y),
        ArithOp::Div => x.div(y)?,
    })
}

/// Apply one ring operation to two scalars of the same variant.
pub fn scalar_arith(op: ArithOp, x: &Scalar, y: &Scalar) -> Result<Scalar, RingError> {
    match (x, y) {
        (Scalar::Rational(p), Scalar::Rational(q)) => apply(op, p, q).map(Scalar::Rational),
        (Scalar::Complex(p), Scalar::Complex(q)) => apply(op, p, q).map(Scalar::Complex),
        (Scalar::Series(p), Scalar::Series(q)) => apply(op, p, q).map(Scalar::Series),
        _ => Err(RingError::VariantMismatch),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    #[test]
    fn mixing_variants_is_rejected() {
        let p = Scalar::Rational(rat(1, 2));
        let c = Scalar::Complex(Complex64::new(1.0, 0.0));
        assert_eq!(scalar_arith(ArithOp::Add, &p, &c), Err(RingError::VariantMismatch));
    }

    #[test]
    fn division_by_zero_rational_or_complex_fails() {
        let p = Scalar::Rational(rat(1, 2));
        let z = Scalar::Rational(rat(0, 1));
        assert_eq!(scalar_arith(ArithOp::Div, &p, &z), Err(RingError::NonUnitDivisor));
        let c = Scalar::Complex(Complex64::new(1.0, 2.0));
        let cz = Scalar::Complex(Complex64::new(0.0, 0.0));
        assert_eq!(scalar_arith(ArithOp::Div, &c, &cz), Err(RingError::NonUnitDivisor));
    }

    #[test]
    fn same_variant_arithmetic() {
        let p = Scalar::Rational(rat(1, 2));
        let q = Scalar::Rational(rat(1, 3));
        assert_eq!(scalar_arith(ArithOp::Sub, &p, &q).unwrap(), Scalar::Rational(rat(1, 6)));
        assert_eq!(scalar_arith(ArithOp::Div, &p, &q).unwrap(), Scalar::Rational(rat(3, 2)));
    }
}
