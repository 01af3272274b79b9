use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::ring::{Rational, Ring, Vars};
use num_traits::One;

/// The four transition kernels for a pair of persistence parameters.
#[derive(Clone, Debug)]
pub struct Kernels<R> {
    /// `ω = 1 − (1−a')(1−b') r²y²z²`
    pub omega: R,
    /// `k = (a'+b'−a'b')/ω`
    pub kk: R,
    /// `τ = 1 + (1−a')(1−b') r²z² y(1−y)`
    pub tau: R,
    /// `h = τ/ω`
    pub h: R,
}

pub fn kernels<R: Ring>(v: &Vars<R>, a: &Rational, b: &Rational) -> Result<Kernels<R>> {
    let one = Rational::one();
    let c = (&one - a) * (&one - b);
    let r2z2 = v.r.square().mul(&v.z.square());
    let omega = v.one.sub(&r2z2.mul(&v.y.square()).scale(&c));
    let s = a + b - a * b;
    let kk = v.c(&s).div(&omega)?;
    let tau = v.one.add(&r2z2.mul(&v.y).mul(&v.one.sub(&v.y)).scale(&c));
    let h = tau.div(&omega)?;
    Ok(Kernels { omega, kk, tau, h })
}

/// Turning probability `γ_m`: `1−a` below `f`, `1−b` from `f` on.
pub fn gamma_turn(m: u32, p: &ModelParams) -> Result<Rational> {
    if m > p.n {
        return Err(Error::IndexOutOfRange(format!("level {m} above N = {}", p.n)));
    }
    Ok(p.gamma(m))
}

/// Direction of a passage, for [`strata_pair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Up,
    Down,
}

/// The parameter pairs `[a,b]⁺_m` (upward) and `[a,b]⁻_n` (downward).
///
/// Upward: `(a,a)` for `m ≤ f−2`, `(a,b)` at `m = f−1`, `(b,b)` from `f`.
/// Downward: `(a,a)` for `n ≤ f−1`, `(a,b)` at `n = f`, `(b,b)` from `f+1`.
pub fn strata_pair(m: u32, dir: Dir, p: &ModelParams) -> Result<(Rational, Rational)> {
    if m > p.n + 1 {
        return Err(Error::IndexOutOfRange(format!("level {m} above N + 1 = {}", p.n + 1)));
    }
    let (a, b) = (p.a.clone(), p.b.clone());
    let f = p.f;
    Ok(match dir {
        Dir::Up if m + 2 <= f => (a.clone(), a),
        Dir::Up if m + 1 == f => (a, b),
        Dir::Up => (b.clone(), b),
        Dir::Down if m < f => (a.clone(), a),
        Dir::Down if m == f => (a, b),
        Dir::Down => (b.clone(), b),
    })
}
