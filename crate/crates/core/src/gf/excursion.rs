use super::kernels::{kernels, Dir};
use super::passage::Passage;
use crate::error::{Error, Result};
use crate::fib::{beta_homog, Strata};
use crate::params::ModelParams;
use crate::ring::{Rational, Ring, Vars};
use crate::ruin::{height_dist, height_tail};
use num_complex::Complex64;
use num_traits::One;

fn require_f3(p: &ModelParams) -> Result<()> {
    if p.f < 3 {
        return Err(Error::StrataTooLow(p.f));
    }
    Ok(())
}

/// `G_n`: joint generating function of runs, short runs and steps of an
/// excursion conditioned on height `n`.
///
/// `G_1 = r²y²z²`, `G_2 = r²z⁴ k[a,b]⁻_2`, and for `n ≥ 3` (needs `f ≥ 3`)
/// `G_n = a(2−a) z h_a g_{1,n} k[a,b]⁻_n g_{n,0}`.
pub fn excursion_gf_given_height<R: Ring>(n: u32, pas: &Passage<R>) -> Result<R> {
    let p = pas.params();
    let v = pas.vars();
    if n == 0 || n > p.n {
        return Err(Error::IndexOutOfRange(format!("height {n} outside 1..={}", p.n)));
    }
    let r2 = v.r.square();
    match n {
        1 => Ok(r2.mul(&v.y.square()).mul(&v.z.square())),
        2 => Ok(r2.mul(&v.z.pow(4)).mul(&pas.kernels_at(2, Dir::Down)?.kk)),
        _ => {
            require_f3(p)?;
            let j = initial_factor(pas)?;
            let km = &pas.kernels_at(n, Dir::Down)?.kk;
            Ok(j.mul(&pas.g(1, n)?).mul(km).mul(&pas.g(n, 0)?))
        }
    }
}

/// `J_a = a(2−a) z h_a`
fn initial_factor<R: Ring>(pas: &Passage<R>) -> Result<R> {
    let p = pas.params();
    let v = pas.vars();
    let ha = kernels(v, &p.a, &p.a)?.h;
    let two = Rational::from_integer(2.into());
    Ok(v.z.mul(&ha).scale(&(&p.a * (two - &p.a))))
}

fn homog_ratio<R: Ring>(st: &Strata<R>, use_b: bool, n: u32) -> Result<R> {
    let s = if use_b { st.star_b() } else { st.star_a() };
    Ok(s.q[n as usize].div(&s.w[n as usize])?)
}

/// The unnormalised `r²z² q̄_N / w̄_{1,N+1}` or its single-stratum reduction.
fn k_n_shape<R: Ring>(st: &Strata<R>, p: &ModelParams) -> Result<R> {
    let v = st.vars();
    let pre = v.r.square().mul(&v.z.square());
    let n = p.n;
    let body = if p.is_homogeneous() || p.f > n {
        homog_ratio(st, false, n)?
    } else if p.f == 1 {
        homog_ratio(st, true, n)?
    } else {
        st.qbar(n)?.div(&st.wbar(1, n + 1)?)?
    };
    Ok(pre.mul(&body))
}

/// `K_N = E[r^R y^V z^L | H ≤ N]` for one excursion.
///
/// With `f = 1` every level an excursion visits above 0 is in the upper
/// stratum, so the single-stratum formula in `b` applies; with `f > N` the
/// one in `a` applies.
pub fn k_n<R: Ring>(v: Vars<R>, p: &ModelParams) -> Result<R> {
    let st = Strata::new(v, &p.with_height(p.n.max(p.f)))?;
    let shape = k_n_shape(&st, p)?;
    Ok(shape.scale(&k_n_constant(p)?))
}

/// The constant `C` with `K_N = C r²z² q̄_N / w̄_{1,N+1}`, fixed by `K_N[1] = 1`.
pub fn k_n_constant(p: &ModelParams) -> Result<Rational> {
    let st = Strata::new(Vars::at_one(), &p.with_height(p.n.max(p.f)))?;
    Ok(k_n_shape(&st, p)?.recip())
}

/// `K_N = Σ_{n ≤ N} G_n P(H = n) / P(H ≤ N)`, assembled from the heights.
pub fn k_n_by_heights<R: Ring>(pas: &Passage<R>) -> Result<R> {
    let p = pas.params();
    let h = height_dist(p)?;
    let mut acc = pas.vars().zero();
    for n in 1..=p.n {
        acc = acc.add(&excursion_gf_given_height(n, pas)?.scale(&h.pmf[n as usize - 1]));
    }
    Ok(acc.scale(&h.le(p.n).recip()))
}

/// Joint generating function of the meander statistics `(R′, V′, L′)`:
/// `a(2−a) z h_a g_{1,N}` (needs `f ≥ 3`).
pub fn meander_gf<R: Ring>(pas: &Passage<R>) -> Result<R> {
    let p = pas.params();
    require_f3(p)?;
    Ok(initial_factor(pas)?.mul(&pas.g(1, p.n)?))
}

/// `K = lim K_N` in the single-stratum model:
/// `(1 − ½β_a − ½α_a)/(1−a)` with `α_a = sqrt(β_a² − 4x_a)` on the branch
/// `|β_a − α_a| ≤ |β_a + α_a|`.
pub fn k_infinity(a: &Rational, r: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    let v = Vars::complex(r, y, z);
    let tau = kernels(&v, a, a)?.tau;
    let af = Complex64::new(num_traits::ToPrimitive::to_f64(a).unwrap_or(f64::NAN), 0.0);
    let x = af * af * z * z * tau * tau;
    let beta = beta_homog(&v, a);
    let mut disc = beta * beta - 4.0 * x;
    // A double root shows up as rounding noise whose square root is ~1e-8.
    if disc.norm() <= 1e-14 * (beta * beta).norm().max(1.0) {
        disc = Complex64::new(0.0, 0.0);
    }
    let mut alpha = disc.sqrt();
    let (minus, plus) = ((beta - alpha).norm(), (beta + alpha).norm());
    let scale = beta.norm().max(1.0);
    if alpha.norm() > 1e-12 * scale && (minus - plus).abs() <= 1e-12 * scale {
        return Err(Error::BranchAmbiguity);
    }
    if minus > plus {
        alpha = -alpha;
    }
    Ok((1.0 - 0.5 * beta - 0.5 * alpha) / (1.0 - af))
}

/// `E[r^{R_N} y^{V_N} z^{L_N} u^{M_N}] = P(H ≥ N)/(1 − u P(H < N) K_{N−1})`
/// over the portion of the walk before its last visit to 0.
pub fn last_visit_gf(p: &ModelParams, r: Complex64, y: Complex64, z: Complex64, u: Complex64) -> Result<Complex64> {
    let ge = height_tail(p.n, p)?;
    let lt = Rational::one() - &ge;
    let k = if p.n >= 2 {
        k_n(Vars::complex(r, y, z), &p.with_height(p.n - 1))?
    } else {
        Complex64::new(0.0, 0.0)
    };
    let q = u * k * to_f64(&lt);
    if q.norm() >= 1.0 {
        return Err(Error::DivergentGeometricSum(q.norm()));
    }
    Ok(Complex64::new(to_f64(&ge), 0.0) / (1.0 - q))
}

fn to_f64(q: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}
