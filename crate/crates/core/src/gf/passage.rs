use super::kernels::{gamma_turn, kernels, strata_pair, Dir, Kernels};
use crate::error::{Error, Result};
use crate::fib::Strata;
use crate::params::ModelParams;
use crate::ring::{Rational, Ring, Vars};
use crate::ruin::{rho, u_factor};
use num_traits::One;
use std::collections::HashMap;

/// Kernels and strata arrays bound to one ring.
struct Shapes<S: Ring> {
    st: Strata<S>,
    ka: Kernels<S>,
    kb: Kernels<S>,
    kab: Kernels<S>,
}

impl<S: Ring> Shapes<S> {
    fn new(v: Vars<S>, p: &ModelParams) -> Result<Self> {
        let ka = kernels(&v, &p.a, &p.a)?;
        let kb = kernels(&v, &p.b, &p.b)?;
        let kab = kernels(&v, &p.a, &p.b)?;
        Ok(Shapes { st: Strata::new(v, p)?, ka, kb, kab })
    }

    fn kern(&self, pair: &(Rational, Rational), p: &ModelParams) -> &Kernels<S> {
        match (pair.0 == p.a, pair.1 == p.a) {
            (true, true) => &self.ka,
            (true, false) => &self.kab,
            _ => &self.kb,
        }
    }

    /// `g_{m,n}` up to its constant factor.
    fn shape(&self, m: u32, n: u32, p: &ModelParams) -> Result<S> {
        let v = &self.st.v;
        let f = p.f;
        let rz = |e: u32| v.r.mul(&v.z.pow(e));
        let at = self.ka.tau.scale(&p.a);
        let bt = self.kb.tau.scale(&p.b);
        let wa = |d: u32| self.st.sa.w[d as usize].clone();
        let wb = |d: u32| self.st.sb.w[d as usize].clone();
        let homog_a = |d: u32| self.ka.omega.mul(&rz(d)).mul(&at.pow(d - 2)).div(&wa(d));
        let homog_b = |d: u32| self.kb.omega.mul(&rz(d)).mul(&bt.pow(d - 2)).div(&wb(d));
        let num = if m < n {
            let d = n - m;
            if n <= f {
                return Ok(homog_a(d)?);
            }
            if m >= f {
                return Ok(homog_b(d)?);
            }
            let (l, j) = (f - m, n - f);
            if l == 1 {
                self.kab.omega.mul(&rz(j + 1)).mul(&bt.pow(j - 1))
            } else {
                self.ka.omega.mul(&rz(j + l)).mul(&self.kab.tau).mul(&at.pow(l - 2)).mul(&bt.pow(j - 1))
            }
        } else {
            let d = m - n;
            if m < f {
                return Ok(homog_a(d)?);
            }
            if n + 1 >= f {
                return Ok(homog_b(d)?);
            }
            let (j, l) = (m - f, f - n);
            if j == 0 {
                self.kab.omega.mul(&rz(l)).mul(&at.pow(l - 2))
            } else {
                self.kb.omega.mul(&rz(j + l)).mul(&self.kab.tau).mul(&at.pow(l - 2)).mul(&bt.pow(j - 1))
            }
        };
        Ok(num.div(&self.st.wbar(m, n)?)?)
    }
}

/// First-passage generating functions `g_{m,n}` and the factors `λ_{m,n}`
/// for one parameter set, in the ring of `v`.
pub struct Passage<R: Ring> {
    p: ModelParams,
    main: Shapes<R>,
    unit: Shapes<Rational>,
}

fn check_gap(m: u32, n: u32, p: &ModelParams) -> Result<()> {
    if m.max(n) > p.n {
        return Err(Error::IndexOutOfRange(format!("level {} above N = {}", m.max(n), p.n)));
    }
    if m.abs_diff(n) < 2 {
        return Err(Error::TooClose { m, n });
    }
    Ok(())
}

impl<R: Ring> Passage<R> {
    pub fn new(v: Vars<R>, p: &ModelParams) -> Result<Self> {
        Ok(Passage { p: p.clone(), main: Shapes::new(v, p)?, unit: Shapes::new(Vars::at_one(), p)? })
    }

    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    pub fn strata(&self) -> &Strata<R> {
        &self.main.st
    }

    pub fn vars(&self) -> &Vars<R> {
        &self.main.st.v
    }

    /// Kernels for the parameter pair `[a,b]^±_m`.
    pub fn kernels_at(&self, m: u32, dir: Dir) -> Result<&Kernels<R>> {
        Ok(self.main.kern(&strata_pair(m, dir, &self.p)?, &self.p))
    }

    /// `g_{m,n}` from the closed forms, normalised to total mass one.
    pub fn g(&self, m: u32, n: u32) -> Result<R> {
        check_gap(m, n, &self.p)?;
        let at_one = self.unit.shape(m, n, &self.p)?;
        Ok(self.main.shape(m, n, &self.p)?.scale(&at_one.recip()))
    }

    /// `g_{m,n}` with the explicit constants (`aΠ/(2−a)`, `Π/(2−b)`, …)
    /// instead of normalisation at `(1,1,1)`.
    pub fn g_explicit(&self, m: u32, n: u32) -> Result<R> {
        check_gap(m, n, &self.p)?;
        let (a, b, f) = (&self.p.a, &self.p.b, self.p.f);
        let two = Rational::from_integer(2.into());
        let pi = crate::ruin::pi_value(m, n, &self.p)?;
        let cross = a + b - a * b;
        let c = if (m < n && n <= f) || (m > n && m < f) {
            a / b * &pi / (&two - a)
        } else if (m < n && m >= f) || (m > n && n + 1 >= f) {
            &pi / (&two - b)
        } else if (m < n && m + 1 == f) || (m > n && m == f) {
            a * &pi / &cross
        } else if m < n {
            a * &pi / (&two - a)
        } else {
            a * &pi / (&two - b)
        };
        Ok(self.main.shape(m, n, &self.p)?.scale(&c))
    }

    /// `λ_{m,n} = (1 − 4γ_mγ_nρ_{m,n}ρ_{n,m} k⁺_m k⁻_n g_{m,n} g_{n,m})⁻¹`.
    pub fn lambda(&self, m: u32, n: u32) -> Result<R> {
        lambda_from(self, m, n, &self.g(m, n)?, &self.g(n, m)?)
    }

    /// `λ_{m,n} = w̄_{m,n} w̄_{m+1,n+1} / (w̄_{m,n+1} w̄_{m+1,n})`.
    pub fn lambda_ratio(&self, m: u32, n: u32) -> Result<R> {
        if m + 2 > n {
            return Err(Error::TooClose { m, n });
        }
        let st = &self.main.st;
        let num = st.wbar(m, n)?.mul(&st.wbar(m + 1, n + 1)?);
        let den = st.wbar(m, n + 1)?.mul(&st.wbar(m + 1, n)?);
        Ok(num.div(&den)?)
    }

    /// The table of `g` rebuilt from `g_{m,m±2} = r z²` through the path
    /// recurrences, with `λ` taken from its definition on entries already
    /// built. Distance three uses
    /// `g_{m,m+3} ∝ z h⁻_{m+2} g_{m,m+2} λ_{m,m+2}` and
    /// `g_{m+2,m−1} ∝ z h⁺_m g_{m+2,m} λ_{m,m+2}`; larger distances use
    /// `g_{m,n+1} ∝ g_{m,n} g_{m+1,n+1} λ_{m,n} / g_{m+1,n}` and
    /// `g_{n,m−1} ∝ g_{n,m} g_{n−1,m−1} λ_{m,n} / g_{n−1,m}`.
    pub fn recurrence_table(&self) -> Result<GfTable<R>> {
        let top = self.p.n;
        let v = self.vars();
        let mut t = GfTable { g: HashMap::new(), lambda: HashMap::new() };
        let rz2 = v.r.mul(&v.z.square());
        for m in 0..top.saturating_sub(1) {
            t.g.insert((m, m + 2), rz2.clone());
            t.g.insert((m + 2, m), rz2.clone());
        }
        for d in 2..top {
            for m in 0..=top - d {
                let n = m + d;
                let lam = lambda_from(self, m, n, &t.g[&(m, n)], &t.g[&(n, m)])?;
                let u = u_factor(m, n, &self.p)?;
                if d == 2 {
                    if n < top {
                        let h = &self.kernels_at(n, Dir::Down)?.h;
                        let h1 = self.unit.kern(&strata_pair(n, Dir::Down, &self.p)?, &self.p).h.clone();
                        let val = v.z.mul(h).mul(&t.g[&(m, n)]).mul(&lam);
                        t.g.insert((m, n + 1), val.scale(&(h1 * &u).recip()));
                    }
                    if m >= 1 {
                        let h = &self.kernels_at(m, Dir::Up)?.h;
                        let h1 = self.unit.kern(&strata_pair(m, Dir::Up, &self.p)?, &self.p).h.clone();
                        let val = v.z.mul(h).mul(&t.g[&(n, m)]).mul(&lam);
                        t.g.insert((n, m - 1), val.scale(&(h1 * &u).recip()));
                    }
                } else {
                    let inv_u = u.recip();
                    if n < top {
                        let ratio = t.g[&(m, n)].div_exact(&t.g[&(m + 1, n)])?;
                        let val = ratio.mul(&t.g[&(m + 1, n + 1)]).mul(&lam).scale(&inv_u);
                        t.g.insert((m, n + 1), val);
                    }
                    if m >= 1 {
                        let ratio = t.g[&(n, m)].div_exact(&t.g[&(n - 1, m)])?;
                        let val = ratio.mul(&t.g[&(n - 1, m - 1)]).mul(&lam).scale(&inv_u);
                        t.g.insert((n, m - 1), val);
                    }
                }
                t.lambda.insert((m, n), lam);
            }
        }
        Ok(t)
    }
}

fn lambda_from<R: Ring>(pas: &Passage<R>, m: u32, n: u32, g_mn: &R, g_nm: &R) -> Result<R> {
    if m + 2 > n {
        return Err(Error::TooClose { m, n });
    }
    let p = &pas.p;
    let four = Rational::from_integer(4.into());
    let c = four * gamma_turn(m, p)? * gamma_turn(n, p)? * rho(m, n, p)? * rho(n, m, p)?;
    let kp = &pas.kernels_at(m, Dir::Up)?.kk;
    let km = &pas.kernels_at(n, Dir::Down)?.kk;
    let prod = kp.mul(km).mul(g_mn).mul(g_nm).scale(&c);
    let one = &pas.vars().one;
    Ok(one.div(&one.sub(&prod))?)
}

/// Homogeneous `λ_n = (1 − a²(1−a)²r²z⁴x_a^{n−2}/w_n*(a)²)⁻¹`.
pub fn lambda_homog<R: Ring>(v: &Vars<R>, a: &Rational, n: u32) -> Result<R> {
    let h = crate::fib::homog_coeffs(v, a)?;
    let s = crate::fib::star_seq(&h, n);
    let one = Rational::one();
    let c = a * a * (&one - a) * (&one - a);
    let num = v.r.square().mul(&v.z.pow(4)).mul(&h.fib.x.pow(n - 2)).scale(&c);
    let inner = v.one.sub(&num.div(&s.w[n as usize].square())?);
    Ok(v.one.div(&inner)?)
}

/// First-passage generating functions and `λ` factors indexed by `(m, n)`.
#[derive(Clone, Debug)]
pub struct GfTable<R> {
    pub g: HashMap<(u32, u32), R>,
    pub lambda: HashMap<(u32, u32), R>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, Series3};

    fn params(a: (i64, i64), b: (i64, i64), f: u32, n: u32) -> ModelParams {
        ModelParams::from_fracs(a, b, f, n).unwrap()
    }

    #[test]
    fn distance_two_and_mass_one() {
        let p = params((1, 3), (3, 5), 3, 7);
        let pas = Passage::new(Vars::series(10), &p).unwrap();
        let rz2 = Series3::monomial(rat(1, 1), 1, 0, 2, 10);
        for m in 0..6 {
            assert_eq!(pas.g(m, m + 2).unwrap(), rz2);
            assert_eq!(pas.g(m + 2, m).unwrap(), rz2);
        }
        let at1 = Passage::new(Vars::at_one(), &p).unwrap();
        for m in 0..=7u32 {
            for n in 0..=7u32 {
                if m.abs_diff(n) >= 2 {
                    assert_eq!(at1.g(m, n).unwrap(), rat(1, 1));
                    assert_eq!(at1.g_explicit(m, n).unwrap(), rat(1, 1), "({m},{n})");
                }
            }
        }
    }

    #[test]
    fn explicit_constants_agree_with_normalisation() {
        let p = params((2, 7), (3, 4), 4, 9);
        let pas = Passage::new(Vars::rational(rat(3, 4), rat(1, 2), rat(2, 3)), &p).unwrap();
        for m in 0..=9u32 {
            for n in 0..=9u32 {
                if m.abs_diff(n) >= 2 {
                    assert_eq!(pas.g(m, n).unwrap(), pas.g_explicit(m, n).unwrap(), "({m},{n})");
                }
            }
        }
    }

    #[test]
    fn homogeneous_form() {
        let a = rat(2, 5);
        let p = params((2, 5), (2, 5), 3, 8);
        let v = Vars::series(12);
        let pas = Passage::new(v.clone(), &p).unwrap();
        let h = crate::fib::homog_coeffs(&v, &a).unwrap();
        let s = crate::fib::star_seq(&h, 8);
        let one = Rational::one();
        for n in 2..=8u32 {
            let ni = Rational::from_integer(n.into());
            let c = num_traits::pow(a.clone(), n as usize - 2) * (&ni - (&ni - &one) * &a) / (rat(2, 1) - &a);
            let want = h.omega.mul(&v.r).mul(&v.z.pow(n)).mul(&h.tau.pow(n - 2)).div(&s.w[n as usize]).unwrap().scale(&c);
            assert_eq!(pas.g(0, n).unwrap(), want, "n = {n}");
            if (2..8).contains(&n) {
                assert_eq!(pas.lambda(0, n).unwrap(), lambda_homog(&v, &a, n).unwrap());
            }
        }
    }

    #[test]
    fn lambda_two_ways() {
        let p = params((1, 3), (3, 5), 4, 9);
        let pas = Passage::new(Vars::series(12), &p).unwrap();
        for (m, n) in [(0, 2), (1, 4), (2, 5), (3, 5), (2, 6), (4, 7)] {
            assert_eq!(pas.lambda(m, n).unwrap(), pas.lambda_ratio(m, n).unwrap(), "({m},{n})");
        }
        let at1 = Passage::new(Vars::at_one(), &p).unwrap();
        assert!(at1.lambda(2, 5).unwrap() >= rat(1, 1));
    }

    #[test]
    fn recurrences_rebuild_closed_forms() {
        for (a, b, f) in [((1, 3), (3, 5), 3), ((3, 5), (1, 4), 4), ((1, 2), (1, 2), 2), ((1, 3), (2, 3), 1)] {
            let p = params(a, b, f, 7);
            let pas = Passage::new(Vars::series(16), &p).unwrap();
            let t = pas.recurrence_table().unwrap();
            for (&(m, n), g) in &t.g {
                assert_eq!(*g, pas.g(m, n).unwrap(), "f={f} ({m},{n})");
            }
            for (&(m, n), lam) in &t.lambda {
                assert_eq!(*lam, pas.lambda_ratio(m, n).unwrap(), "f={f} λ({m},{n})");
            }
        }
    }
}
