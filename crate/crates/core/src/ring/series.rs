use super::{Rational, Ring, RingError};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::btree_map::Entry as BEntry;
use std::collections::hash_map::Entry as HEntry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Truncation order used when none is requested.
pub const DEFAULT_MAX_DEGREE: u32 = 24;

/// Exponents of the monomial `r^i y^j z^k`.
///
/// Field order makes the derived `Ord` sort by z-degree first, which the
/// truncated product relies on to stop early.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub k: u32,
    pub i: u32,
    pub j: u32,
}

impl Mono {
    pub fn new(i: u32, j: u32, k: u32) -> Self {
        Mono { k, i, j }
    }
}

/// Truncated power series in `r, y, z` with rational coefficients, reduced
/// modulo `z^(max_degree + 1)`.
///
/// Coefficients are kept as integer numerators over one shared positive
/// denominator, so products and sums avoid a gcd per term; the whole series
/// is reduced once per operation.
#[derive(Clone, Debug)]
pub struct Series3 {
    max_degree: u32,
    den: BigInt,
    terms: BTreeMap<Mono, BigInt>,
}

impl Series3 {
    fn build(max_degree: u32, den: BigInt, mut terms: BTreeMap<Mono, BigInt>) -> Self {
        terms.retain(|m, c| m.k <= max_degree && !c.is_zero());
        if terms.is_empty() {
            return Series3 { max_degree, den: BigInt::one(), terms };
        }
        let mut g = den.abs();
        for c in terms.values() {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        let flip = den.is_negative();
        let (den, terms) = if g.is_one() && !flip {
            (den, terms)
        } else {
            let g = if flip { -g } else { g };
            let terms = terms.into_iter().map(|(m, c)| (m, c / &g)).collect();
            (den / &g, terms)
        };
        Series3 { max_degree, den, terms }
    }

    pub fn zero(max_degree: u32) -> Self {
        Series3 { max_degree, den: BigInt::one(), terms: BTreeMap::new() }
    }

    pub fn one(max_degree: u32) -> Self {
        Self::constant(Rational::one(), max_degree)
    }

    pub fn constant(c: Rational, max_degree: u32) -> Self {
        Self::monomial(c, 0, 0, 0, max_degree)
    }

    /// `c * r^i y^j z^k`, or zero when `k` exceeds the truncation order.
    pub fn monomial(c: Rational, i: u32, j: u32, k: u32, max_degree: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono::new(i, j, k), c.numer().clone());
        Self::build(max_degree, c.denom().clone(), terms)
    }

    /// Collect `(i, j, k, coefficient)` terms; repeated exponents are summed.
    pub fn from_terms<I>(terms: I, max_degree: u32) -> Self
    where
        I: IntoIterator<Item = (u32, u32, u32, Rational)>,
    {
        let mut acc = Self::zero(max_degree);
        for (i, j, k, c) in terms {
            acc = acc.add(&Self::monomial(c, i, j, k, max_degree));
        }
        acc
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `r^i y^j z^k`.
    pub fn coeff(&self, i: u32, j: u32, k: u32) -> Result<Rational, RingError> {
        if k > self.max_degree {
            return Err(RingError::TruncationExceeded { requested: k, max_degree: self.max_degree });
        }
        Ok(match self.terms.get(&Mono::new(i, j, k)) {
            Some(c) => Rational::new(c.clone(), self.den.clone()),
            None => Rational::zero(),
        })
    }

    /// All nonzero terms, ordered by z-degree, then r-degree, then y-degree.
    pub fn terms(&self) -> impl Iterator<Item = (Mono, Rational)> + '_ {
        self.terms.iter().map(move |(m, c)| (*m, Rational::new(c.clone(), self.den.clone())))
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(0, 0, 0).unwrap_or_else(|_| Rational::zero())
    }

    /// Lowest z-degree carrying a nonzero coefficient.
    pub fn min_z_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.k)
    }

    /// Keep only terms of z-degree exactly `k`.
    pub fn z_slice(&self, k: u32) -> Self {
        let terms = self
            .terms
            .range(Mono::new(0, 0, k)..Mono::new(0, 0, k + 1))
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        Self::build(self.max_degree, self.den.clone(), terms)
    }

    /// Reduce to a lower truncation order.
    pub fn truncate(&self, max_degree: u32) -> Self {
        if max_degree >= self.max_degree {
            return self.clone();
        }
        let terms = self.terms.range(..Mono::new(0, 0, max_degree + 1)).map(|(m, c)| (*m, c.clone())).collect();
        Self::build(max_degree, self.den.clone(), terms)
    }

    /// Exact division by `z^k`; the truncation order drops by `k`.
    pub fn shift_down(&self, k: u32) -> Result<Self, RingError> {
        self.div_monomial(Mono::new(0, 0, k))
    }

    /// Exact division by the monomial `r^i y^j z^k`; the truncation order
    /// drops by `k`. Fails unless every term is divisible.
    pub fn div_monomial(&self, m: Mono) -> Result<Self, RingError> {
        if m == Mono::new(0, 0, 0) {
            return Ok(self.clone());
        }
        if self.max_degree < m.k || self.terms.keys().any(|t| t.i < m.i || t.j < m.j || t.k < m.k) {
            return Err(RingError::NonUnitDivisor);
        }
        let terms = self.terms.iter().map(|(t, c)| (Mono::new(t.i - m.i, t.j - m.j, t.k - m.k), c.clone())).collect();
        Ok(Self::build(self.max_degree - m.k, self.den.clone(), terms))
    }

    fn unit_constant(&self) -> Result<Rational, RingError> {
        let c0 = self.z_slice(0);
        if c0.len() != 1 || !c0.terms.contains_key(&Mono::new(0, 0, 0)) {
            return Err(RingError::NonUnitDivisor);
        }
        Ok(self.constant_term())
    }

    /// Multiplicative inverse by long division in z-degree:
    /// `I_0 = 1/c_0`, `I_k = -(1/c_0) * sum_{j=1..k} S_j I_{k-j}`.
    pub fn inverse(&self) -> Result<Self, RingError> {
        let c0 = self.unit_constant()?;
        let d = self.max_degree;
        let inv_c0 = c0.recip();
        let neg_inv = -inv_c0.clone();
        let slices: Vec<Series3> = (0..=d).map(|k| self.z_slice(k)).collect();
        let mut parts: Vec<Series3> = Vec::with_capacity(d as usize + 1);
        parts.push(Series3::constant(inv_c0, d));
        for k in 1..=d as usize {
            let mut sum = Series3::zero(d);
            for j in 1..=k {
                if slices[j].is_empty() || parts[k - j].is_empty() {
                    continue;
                }
                sum = sum.add(&slices[j].mul(&parts[k - j]));
            }
            parts.push(sum.scale(&neg_inv));
        }
        let mut out = Series3::zero(d);
        for p in &parts {
            out = out.add(p);
        }
        Ok(out)
    }

    pub fn eval_complex(&self, r: Complex64, y: Complex64, z: Complex64) -> Complex64 {
        let (mi, mj, mk) = self.max_exponents();
        let pr = powers(r, mi);
        let py = powers(y, mj);
        let pz = powers(z, mk);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let c = Rational::new(c.clone(), self.den.clone()).to_f64().unwrap_or(f64::NAN);
            acc += pr[m.i as usize] * py[m.j as usize] * pz[m.k as usize] * c;
        }
        acc
    }

    pub fn eval_rational(&self, r: &Rational, y: &Rational, z: &Rational) -> Rational {
        let (mi, mj, mk) = self.max_exponents();
        let pr = powers(r.clone(), mi);
        let py = powers(y.clone(), mj);
        let pz = powers(z.clone(), mk);
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            acc += &pr[m.i as usize] * &py[m.j as usize] * &pz[m.k as usize] * Rational::from_integer(c.clone());
        }
        acc / Rational::from_integer(self.den.clone())
    }

    fn max_exponents(&self) -> (u32, u32, u32) {
        self.terms.keys().fold((0, 0, 0), |(a, b, c), m| (a.max(m.i), b.max(m.j), c.max(m.k)))
    }
}

fn powers<T: Clone + One + for<'a> std::ops::Mul<&'a T, Output = T>>(x: T, n: u32) -> Vec<T> {
    let mut v = Vec::with_capacity(n as usize + 1);
    v.push(T::one());
    for p in 1..=n as usize {
        let next = v[p - 1].clone() * &x;
        v.push(next);
    }
    v
}

impl PartialEq for Series3 {
    /// Equality in the coarser of the two truncated rings.
    fn eq(&self, other: &Self) -> bool {
        if self.max_degree == other.max_degree {
            return self.den == other.den && self.terms == other.terms;
        }
        let d = self.max_degree.min(other.max_degree);
        let (a, b) = (self.truncate(d), other.truncate(d));
        a.den == b.den && a.terms == b.terms
    }
}

impl Ring for Series3 {
    fn add(&self, rhs: &Self) -> Self {
        let d = self.max_degree.min(rhs.max_degree);
        if self.den == rhs.den {
            let mut terms: BTreeMap<Mono, BigInt> =
                self.terms.range(..Mono::new(0, 0, d + 1)).map(|(m, c)| (*m, c.clone())).collect();
            for (m, c) in rhs.terms.range(..Mono::new(0, 0, d + 1)) {
                match terms.entry(*m) {
                    BEntry::Occupied(mut e) => *e.get_mut() += c,
                    BEntry::Vacant(e) => {
                        e.insert(c.clone());
                    }
                }
            }
            return Self::build(d, self.den.clone(), terms);
        }
        let l = self.den.lcm(&rhs.den);
        let fa = &l / &self.den;
        let fb = &l / &rhs.den;
        let mut terms: BTreeMap<Mono, BigInt> =
            self.terms.range(..Mono::new(0, 0, d + 1)).map(|(m, c)| (*m, c * &fa)).collect();
        for (m, c) in rhs.terms.range(..Mono::new(0, 0, d + 1)) {
            let v = c * &fb;
            match terms.entry(*m) {
                BEntry::Occupied(mut e) => *e.get_mut() += v,
                BEntry::Vacant(e) => {
                    e.insert(v);
                }
            }
        }
        Self::build(d, l, terms)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// The product is known through z-degree `min(p₁ + v₂, p₂ + v₁)`, where
    /// `pᵢ` are truncation orders and `vᵢ` lowest z-degrees, capped at the
    /// larger of the two orders.
    fn mul(&self, rhs: &Self) -> Self {
        let (v1, v2) = match (self.min_z_degree(), rhs.min_z_degree()) {
            (Some(v1), Some(v2)) => (v1, v2),
            _ => return Self::zero(self.max_degree.min(rhs.max_degree)),
        };
        let (p1, p2) = (self.max_degree, rhs.max_degree);
        let d = (p1 + v2).min(p2 + v1).min(p1.max(p2));
        let (outer, inner) = if self.terms.len() <= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut acc: HashMap<Mono, BigInt> = HashMap::new();
        for (ma, ca) in &outer.terms {
            if ma.k > d {
                break;
            }
            for (mb, cb) in &inner.terms {
                if ma.k + mb.k > d {
                    break;
                }
                let key = Mono::new(ma.i + mb.i, ma.j + mb.j, ma.k + mb.k);
                let prod = ca * cb;
                match acc.entry(key) {
                    HEntry::Occupied(mut e) => *e.get_mut() += prod,
                    HEntry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        Self::build(d, &self.den * &rhs.den, acc.into_iter().collect())
    }

    fn neg(&self) -> Self {
        Series3 {
            max_degree: self.max_degree,
            den: self.den.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.max_degree);
        }
        let terms = self.terms.iter().map(|(m, v)| (*m, v * c.numer())).collect();
        Self::build(self.max_degree, &self.den * c.denom(), terms)
    }

    fn div(&self, rhs: &Self) -> Result<Self, RingError> {
        Ok(self.mul(&rhs.inverse()?))
    }

    fn div_exact(&self, rhs: &Self) -> Result<Self, RingError> {
        let k0 = rhs.min_z_degree().ok_or(RingError::NonUnitDivisor)?;
        let lead = rhs.z_slice(k0);
        if lead.len() != 1 {
            return Err(RingError::NonUnitDivisor);
        }
        let m = *lead.terms.keys().next().expect("one term");
        if m == Mono::new(0, 0, 0) {
            return self.div(rhs);
        }
        self.div_monomial(m)?.div(&rhs.div_monomial(m)?)
    }

    fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }

    fn one_like(&self) -> Self {
        Self::one(self.max_degree)
    }
}

impl fmt::Display for Series3 {
    /// Graded-lex listing: ascending total degree, and within one degree
    /// lexicographically descending in (r, y, z).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut list: Vec<(Mono, Rational)> = self.terms().collect();
        list.sort_by(|(a, _), (b, _)| {
            (a.i + a.j + a.k).cmp(&(b.i + b.j + b.k)).then((b.i, b.j, b.k).cmp(&(a.i, a.j, a.k)))
        });
        for (n, (m, c)) in list.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} * r^{} y^{} z^{}", c, m.i, m.j, m.k)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, Vars};

    fn z(d: u32) -> Series3 {
        Series3::monomial(rat(1, 1), 0, 0, 1, d)
    }

    #[test]
    fn difference_of_squares() {
        let d = 6;
        let one = Series3::one(d);
        let p = one.add(&z(d)).mul(&one.sub(&z(d)));
        let expect = one.sub(&Series3::monomial(rat(1, 1), 0, 0, 2, d));
        assert_eq!(p, expect);
    }

    #[test]
    fn geometric_series_inverse() {
        let d = 9;
        let inv = Series3::one(d).sub(&z(d)).inverse().unwrap();
        for k in 0..=d {
            assert_eq!(inv.coeff(0, 0, k).unwrap(), rat(1, 1));
        }
        assert_eq!(inv.len(), d as usize + 1);
    }

    #[test]
    fn omega_divided_by_itself() {
        let v = Vars::series(6);
        let c = rat(4, 9); // (1 - 1/3)^2
        let omega = v.one.sub(&v.r.square().mul(&v.y.square()).mul(&v.z.square()).scale(&c));
        assert_eq!(omega.div(&omega).unwrap(), Series3::one(6));
    }

    #[test]
    fn zero_constant_term_is_not_a_unit() {
        assert_eq!(z(5).inverse().unwrap_err(), RingError::NonUnitDivisor);
        let v = Vars::series(5);
        // 1 + y has a non-constant z^0 part and is rejected.
        assert_eq!(v.one.add(&v.y).inverse().unwrap_err(), RingError::NonUnitDivisor);
        assert_eq!(Series3::zero(5).inverse().unwrap_err(), RingError::NonUnitDivisor);
    }

    #[test]
    fn exact_division_by_z_power() {
        let v = Vars::series(8);
        let x = v.z.square().scale(&rat(-4, 1));
        let y = v.z.pow(3).add(&v.z.pow(5).mul(&v.r));
        let q = y.div_exact(&x).unwrap();
        assert_eq!(q.max_degree(), 6);
        assert_eq!(q.mul(&x.shift_down(2).unwrap()), y.shift_down(2).unwrap());
        assert!(v.one.div_exact(&x).is_err());
    }

    #[test]
    fn exact_division_by_leading_monomial_with_r() {
        let v = Vars::series(10);
        let g = v.r.mul(&v.z.square()).mul(&v.one.add(&v.r.mul(&v.z.square()).scale(&rat(1, 3))));
        let h = v.r.mul(&v.z.pow(3)).mul(&v.one.sub(&v.y.mul(&v.z)));
        let q = g.mul(&h).div_exact(&g).unwrap();
        assert_eq!(q, h);
        assert!(v.y.mul(&v.z.square()).div_exact(&g).is_err());
    }

    #[test]
    fn coefficient_access_and_truncation() {
        let s = Series3::monomial(rat(1, 1), 1, 0, 2, 4);
        assert_eq!(s.coeff(1, 0, 2).unwrap(), rat(1, 1));
        assert_eq!(s.coeff(0, 0, 2).unwrap(), rat(0, 1));
        assert!(matches!(s.coeff(0, 0, 5), Err(RingError::TruncationExceeded { .. })));
        assert!(Series3::monomial(rat(1, 1), 0, 0, 5, 4).is_empty());
    }

    #[test]
    fn evaluation_at_one_and_display() {
        let v = Vars::series(4);
        let c = rat(4, 9);
        let omega = v.one.sub(&v.r.square().mul(&v.y.square()).mul(&v.z.square()).scale(&c));
        assert_eq!(omega.eval_rational(&rat(1, 1), &rat(1, 1), &rat(1, 1)), rat(5, 9));
        let e = omega.eval_complex(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert!((e - Complex64::new(5.0 / 9.0, 0.0)).norm() < 1e-15);
        assert_eq!(omega.to_string(), "1 * r^0 y^0 z^0 + -4/9 * r^2 y^2 z^2");
        assert_eq!(Series3::zero(3).to_string(), "0");
    }

    #[test]
    fn mixed_truncation_orders_use_the_smaller() {
        let a = Series3::one(3).add(&z(3));
        let b = Series3::one(5).add(&z(5).pow(4));
        let s = a.add(&b);
        assert_eq!(s.max_degree(), 3);
        assert_eq!(s, Series3::constant(rat(2, 1), 3).add(&z(3)));
    }
}
