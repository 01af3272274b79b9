//! Fibonacci-type polynomial sequences.
//!
//! The basic pair `(q_n, w_n)` solves `v_{n+1} = β v_n − x v_{n−1}` with
//! `q_0 = 0, q_1 = 1` and `w_0 = w_1 = 1`. Specialising `(x, β)` to the
//! kernels of the walk gives the starred sequences `q_n*(a), w_n*(a)`, and
//! gluing two strata gives the arrays `w̄_{m,n}`, `q̄_n` in [`Strata`].

mod strata;

pub use strata::Strata;

use crate::error::{Error, Result};
use crate::gf::kernels;
use crate::ring::{Rational, Ring, Vars};
use num_complex::Complex64;
use num_traits::One;

/// Coefficients of a two-term recurrence `v_{n+1} = β v_n − x v_{n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FibCoeffs<R> {
    pub x: R,
    pub beta: R,
}

impl<R: Ring> FibCoeffs<R> {
    /// One recurrence step: `β v_n − x v_{n−1}`.
    pub fn step(&self, vn: &R, vprev: &R) -> R {
        self.beta.mul(vn).sub(&self.x.mul(vprev))
    }
}

/// `(q_n, w_n)` for `n = 0..=nmax` by recurrence.
pub fn fib_table<R: Ring>(nmax: u32, c: &FibCoeffs<R>) -> Vec<(R, R)> {
    let one = c.beta.one_like();
    let zero = one.sub(&one);
    let mut out = vec![(zero, one.clone())];
    if nmax >= 1 {
        out.push((one.clone(), one));
    }
    for n in 1..nmax as usize {
        let q = c.step(&out[n].0, &out[n - 1].0);
        let w = c.step(&out[n].1, &out[n - 1].1);
        out.push((q, w));
    }
    out
}

/// `(q_n, w_n)` by recurrence.
pub fn fib_pair<R: Ring>(n: u32, c: &FibCoeffs<R>) -> (R, R) {
    fib_table(n, c).pop().expect("table is nonempty")
}

/// Closed form `q_n = 2^{−n} α^{−1}((β+α)^n − (β−α)^n)`, `w_n = q_n − x q_{n−1}`
/// with `α = sqrt(β² − 4x)`.
pub fn fib_closed(n: u32, c: &FibCoeffs<Complex64>) -> Result<(Complex64, Complex64)> {
    let disc = c.beta * c.beta - 4.0 * c.x;
    let scale = (c.beta.norm().powi(2) + 4.0 * c.x.norm()).max(1.0);
    if disc.norm() < 1e-12 * scale {
        return Err(Error::DegenerateAlpha);
    }
    let alpha = disc.sqrt();
    let q = |k: u32| -> Complex64 {
        if k == 0 {
            return Complex64::new(0.0, 0.0);
        }
        ((c.beta + alpha).powu(k) - (c.beta - alpha).powu(k)) / (alpha * 2f64.powi(k as i32))
    };
    let qn = q(n);
    let wn = if n == 0 { Complex64::new(1.0, 0.0) } else { qn - c.x * q(n - 1) };
    Ok((qn, wn))
}

/// `β_a = 1 + z²(a² − (1−a)² r² (y² + a²(1−y)² z²))`.
pub fn beta_homog<R: Ring>(v: &Vars<R>, a: &Rational) -> R {
    let one = Rational::one();
    let a2 = a * a;
    let c = (&one - a) * (&one - a);
    let z2 = v.z.square();
    let omy = v.one.sub(&v.y);
    let inner = v.y.square().add(&omy.square().mul(&z2).scale(&a2));
    let bracket = v.c(&a2).sub(&v.r.square().mul(&inner).scale(&c));
    v.one.add(&z2.mul(&bracket))
}

/// Coefficients and seeds of the homogeneous starred sequences.
#[derive(Clone, Debug)]
pub struct HomogCoeffs<R> {
    /// `x_a = a²z²τ_a²` and `β_a`.
    pub fib: FibCoeffs<R>,
    /// `w_0* = (β_a − ω_a)/x_a`
    pub w0: R,
    /// `q_0* = −(1−y)(1 + y + (1−a)²r²y²z²(1−y))/τ_a²`
    pub q0: R,
    /// `q_1* = y²`
    pub q1: R,
    pub omega: R,
    pub tau: R,
}

pub fn homog_coeffs<R: Ring>(v: &Vars<R>, a: &Rational) -> Result<HomogCoeffs<R>> {
    let k = kernels(v, a, a)?;
    let one = Rational::one();
    let x = v.z.square().mul(&k.tau.square()).scale(&(a * a));
    let beta = beta_homog(v, a);
    let w0 = beta.sub(&k.omega).div_exact(&x)?;
    let omy = v.one.sub(&v.y);
    let c = (&one - a) * (&one - a);
    let inner = v.one.add(&v.y).add(&v.r.square().mul(&v.y.square()).mul(&v.z.square()).mul(&omy).scale(&c));
    let q0 = omy.mul(&inner).neg().div(&k.tau.square())?;
    let q1 = v.y.square();
    Ok(HomogCoeffs { fib: FibCoeffs { x, beta }, w0, q0, q1, omega: k.omega, tau: k.tau })
}

/// The starred sequences `q_n*(a)`, `w_n*(a)` for `n = 0..=nmax`.
#[derive(Clone, Debug)]
pub struct StarSeq<R> {
    pub q: Vec<R>,
    pub w: Vec<R>,
}

/// Starred sequences by direct recurrence: `w_1* = 1`, `w_2* = ω_a`,
/// `q_0*`, `q_1* = y²`, then `v_{n+1} = β_a v_n − x_a v_{n−1}`.
pub fn star_seq<R: Ring>(h: &HomogCoeffs<R>, nmax: u32) -> StarSeq<R> {
    let nmax = nmax.max(2) as usize;
    let one = h.omega.one_like();
    let mut w = vec![h.w0.clone(), one, h.omega.clone()];
    let mut q = vec![h.q0.clone(), h.q1.clone()];
    for n in 2..nmax {
        let next = h.fib.step(&w[n], &w[n - 1]);
        w.push(next);
    }
    for n in 1..nmax {
        let next = h.fib.step(&q[n], &q[n - 1]);
        q.push(next);
    }
    StarSeq { q, w }
}

/// Starred sequences through the basis `(q_n, w_n)(x_a, β_a)`:
/// `q_n* = (y² − q_0*) q_n + q_0* w_n` and `w_n* = (1 − w_0*) q_n + w_0* w_n`.
pub fn star_seq_via_basis<R: Ring>(h: &HomogCoeffs<R>, nmax: u32) -> StarSeq<R> {
    let basis = fib_table(nmax.max(2), &h.fib);
    let one = h.omega.one_like();
    let cq = (h.q1.sub(&h.q0), h.q0.clone());
    let cw = (one.sub(&h.w0), h.w0.clone());
    let (mut q, mut w) = (Vec::new(), Vec::new());
    for (qn, wn) in &basis {
        q.push(cq.0.mul(qn).add(&cq.1.mul(wn)));
        w.push(cw.0.mul(qn).add(&cw.1.mul(wn)));
    }
    StarSeq { q, w }
}

/// Cross-stratum coefficients `x(a,b) = b²z²τ(a,b)²`,
/// `β(a,b) = β_b − (b−a)b²(1−b)r²(1−y)²z⁴`.
pub fn mixed_coeffs<R: Ring>(v: &Vars<R>, a: &Rational, b: &Rational) -> Result<FibCoeffs<R>> {
    let one = Rational::one();
    let k = kernels(v, a, b)?;
    let x = v.z.square().mul(&k.tau.square()).scale(&(b * b));
    let corr = (b - a) * b * b * (&one - b);
    let omy = v.one.sub(&v.y);
    let beta = beta_homog(v, b).sub(&v.r.square().mul(&omy.square()).mul(&v.z.pow(4)).scale(&corr));
    Ok(FibCoeffs { x, beta })
}

/// A 2×2 matrix over a ring.
pub type Mat2<R> = [[R; 2]; 2];

/// The matrices gluing the two strata: `Q(b)`, `B`, `M = Q(b)⁻¹B`.
#[derive(Clone, Debug)]
pub struct CrossMatrices<R> {
    pub q: Mat2<R>,
    pub b: Mat2<R>,
    pub m: Mat2<R>,
    /// `κ(a,b) = ((b−a)/(1−a)) β(a,b) − x(a,b)`
    pub kappa: R,
    pub det_q: R,
}

impl<R: Ring> CrossMatrices<R> {
    /// `M · (u, v)ᵀ`.
    pub fn apply(&self, u: &R, v: &R) -> (R, R) {
        (self.m[0][0].mul(u).add(&self.m[0][1].mul(v)), self.m[1][0].mul(u).add(&self.m[1][1].mul(v)))
    }

    pub fn det_m(&self) -> R {
        self.m[0][0].mul(&self.m[1][1]).sub(&self.m[0][1].mul(&self.m[1][0]))
    }
}

pub fn cross_matrices<R: Ring>(v: &Vars<R>, a: &Rational, b: &Rational) -> Result<CrossMatrices<R>> {
    let one = Rational::one();
    let hb = homog_coeffs(v, b)?;
    let sb = star_seq(&hb, 2);
    let q = [[sb.q[1].clone(), sb.w[1].clone()], [sb.q[2].clone(), sb.w[2].clone()]];
    let det_q = q[0][0].mul(&q[1][1]).sub(&q[0][1].mul(&q[1][0]));
    if det_q.vanishes() {
        return Err(Error::SingularQ);
    }
    let mix = mixed_coeffs(v, a, b)?;
    let c1 = (b - a) / (&one - a);
    let c2 = (&one - b) / (&one - a);
    let kappa = mix.beta.scale(&c1).sub(&mix.x);
    let bm = [[v.c(&c1), v.c(&c2)], [kappa.clone(), mix.beta.scale(&c2)]];
    let adj = [[q[1][1].clone(), q[0][1].neg()], [q[1][0].neg(), q[0][0].clone()]];
    let mut m: Vec<Vec<R>> = Vec::new();
    for row in &adj {
        let mut out = Vec::new();
        for (top, bottom) in bm[0].iter().zip(&bm[1]) {
            let e = row[0].mul(top).add(&row[1].mul(bottom));
            out.push(e.div_exact(&det_q)?);
        }
        m.push(out);
    }
    let m = [[m[0][0].clone(), m[0][1].clone()], [m[1][0].clone(), m[1][1].clone()]];
    Ok(CrossMatrices { q, b: bm, m, kappa, det_q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, Series3};

    const D: u32 = 14;

    fn series_fib(x: Rational, beta: Rational) -> FibCoeffs<Rational> {
        FibCoeffs { x, beta }
    }

    #[test]
    fn first_terms() {
        let c = series_fib(rat(2, 7), rat(3, 5));
        assert_eq!(fib_pair(0, &c), (rat(0, 1), rat(1, 1)));
        assert_eq!(fib_pair(1, &c), (rat(1, 1), rat(1, 1)));
    }

    #[test]
    fn q5_at_beta_one() {
        let x = rat(3, 11);
        let (q5, _) = fib_pair(5, &series_fib(x.clone(), rat(1, 1)));
        // Unrolled: q2 = 1, q3 = 1 - x, q4 = 1 - 2x, q5 = 1 - 3x + x².
        assert_eq!(q5, rat(1, 1) - rat(3, 1) * &x + &x * &x);
    }

    #[test]
    fn w_is_shifted_q_at_beta_one() {
        let c = series_fib(rat(-5, 13), rat(1, 1));
        let t = fib_table(11, &c);
        for n in 0..=10 {
            assert_eq!(t[n].1, t[n + 1].0, "n = {n}");
        }
    }

    #[test]
    fn closed_form_matches_recurrence() {
        let c = FibCoeffs { x: Complex64::new(0.3, -0.7), beta: Complex64::new(1.1, 0.4) };
        for n in 1..=9 {
            let (q, w) = fib_pair(n, &c);
            let (qc, wc) = fib_closed(n, &c).unwrap();
            assert!((q - qc).norm() <= 1e-10 * q.norm().max(1.0), "q_{n}");
            assert!((w - wc).norm() <= 1e-10 * w.norm().max(1.0), "w_{n}");
        }
        let (q1, w1) = fib_closed(1, &c).unwrap();
        assert!((q1 - 1.0).norm() < 1e-14 && (w1 - 1.0).norm() < 1e-14);
    }

    #[test]
    fn repeated_root_is_degenerate() {
        let c = FibCoeffs { x: Complex64::new(1.0, 0.0), beta: Complex64::new(2.0, 0.0) };
        assert_eq!(fib_closed(5, &c), Err(Error::DegenerateAlpha));
        let (q, _) = fib_pair(5, &c);
        assert!((q - 5.0).norm() < 1e-14);
    }

    #[test]
    fn homogeneous_coefficients_at_one() {
        let v = Vars::at_one();
        let a = rat(2, 7);
        let h = homog_coeffs(&v, &a).unwrap();
        assert_eq!(h.fib.x, &a * &a);
        assert_eq!(h.fib.beta, rat(2, 1) * &a);
        assert_eq!(h.q1, rat(1, 1));
    }

    #[test]
    fn w2_from_w0_recurrence_is_omega() {
        let v = Vars::series(D);
        let h = homog_coeffs(&v, &rat(1, 3)).unwrap();
        let w2 = h.fib.step(&v.one, &h.w0);
        assert_eq!(w2, h.omega);
        // The simplified seed w0* = (1 − (1−a)²r²(1−y)²z²)/τ_a².
        let omy = v.one.sub(&v.y);
        let alt = v.one.sub(&v.r.square().mul(&omy.square()).mul(&v.z.square()).scale(&rat(4, 9)));
        assert_eq!(h.w0, alt.div(&h.tau.square()).unwrap());
    }

    #[test]
    fn starred_sequences_two_ways() {
        let v = Vars::series(D);
        for a in [rat(1, 3), rat(3, 5)] {
            let h = homog_coeffs(&v, &a).unwrap();
            let s1 = star_seq(&h, 9);
            let s2 = star_seq_via_basis(&h, 9);
            for n in 0..=9 {
                assert_eq!(s1.q[n], s2.q[n], "q*_{n}");
                assert_eq!(s1.w[n], s2.w[n], "w*_{n}");
            }
        }
    }

    #[test]
    fn mixed_reduces_to_homogeneous() {
        let v = Vars::series(D);
        let a = rat(2, 5);
        let mix = mixed_coeffs(&v, &a, &a).unwrap();
        let h = homog_coeffs(&v, &a).unwrap();
        assert_eq!(mix, h.fib);
        let (a, b) = (rat(1, 3), rat(3, 5));
        let ba = mixed_coeffs(&v, &b, &a).unwrap();
        let tau = kernels(&v, &a, &b).unwrap().tau;
        assert_eq!(ba.x, v.z.square().mul(&tau.square()).scale(&(&a * &a)));
    }

    #[test]
    fn cross_matrix_identities() {
        let v = Vars::series(D);
        let (a, b) = (rat(1, 3), rat(3, 5));
        let cm = cross_matrices(&v, &a, &b).unwrap();
        assert_eq!(cm.det_q, Series3::monomial(-(&b * &b), 0, 0, 2, D));
        let ha = homog_coeffs(&v, &a).unwrap();
        let sa = star_seq(&ha, 4);
        let (d1, d2) = cm.apply(&sa.w[1], &sa.w[2]);
        assert_eq!(d1, Series3::monomial(-(rat(2, 3) * rat(2, 5)), 2, 0, 2, D));
        assert_eq!(d2, Series3::one(D));
        // d(2) = (−(1−a)(1−b)r²z² β(b,a), β(b,a) − x(b,a)).
        let ba = mixed_coeffs(&v, &b, &a).unwrap();
        let (d1, d2) = cm.apply(&sa.w[2], &sa.w[3]);
        assert_eq!(d1, ba.beta.mul(&v.r.square()).mul(&v.z.square()).scale(&-(rat(2, 3) * rat(2, 5))));
        assert_eq!(d2, ba.beta.sub(&ba.x));
        // det M = −((1−b)/(1−a)) τ(a,b)².
        let tau = kernels(&v, &a, &b).unwrap().tau;
        assert_eq!(cm.det_m(), tau.square().scale(&-(rat(2, 5) / rat(2, 3))));
        // M Q = ... is B: Q M recovers B.
        for i in 0..2 {
            for j in 0..2 {
                let e = cm.q[i][0].mul(&cm.m[0][j]).add(&cm.q[i][1].mul(&cm.m[1][j]));
                assert_eq!(e, cm.b[i][j]);
            }
        }
    }

    #[test]
    fn generic_casoratian_reduction() {
        // β(v_{n+1}v_{n−1} − v_n²) = x^{n−1}(v₃v₀ − v₂v₁) for any seeds.
        let v = Vars::series(D);
        let c = FibCoeffs { x: v.z.add(&v.r.mul(&v.y)), beta: v.one.add(&v.z.square().scale(&rat(3, 2))) };
        let mut seq = vec![v.y.clone(), v.one.sub(&v.r)];
        for n in 1..9 {
            let next = c.step(&seq[n], &seq[n - 1]);
            seq.push(next);
        }
        let base = seq[3].mul(&seq[0]).sub(&seq[2].mul(&seq[1]));
        for n in 1..8 {
            let lhs = c.beta.mul(&seq[n + 1].mul(&seq[n - 1]).sub(&seq[n].square()));
            assert_eq!(lhs, c.x.pow(n as u32 - 1).mul(&base), "n = {n}");
        }
    }

    #[test]
    fn homogeneous_interlacing_and_hinge() {
        let v = Vars::series(16);
        for a in [rat(1, 3), rat(4, 5)] {
            let h = homog_coeffs(&v, &a).unwrap();
            let s = star_seq(&h, 11);
            let one = Rational::one();
            let c = &a * &a * (&one - &a) * (&one - &a);
            let r2z4 = v.r.square().mul(&v.z.pow(4));
            for n in 2..=10 {
                let lhs = s.w[n].square().sub(&s.w[n + 1].mul(&s.w[n - 1]));
                assert_eq!(lhs, r2z4.scale(&c).mul(&h.fib.x.pow(n as u32 - 2)), "n = {n}");
            }
            let lhs1 = s.w[1].square().sub(&s.w[2].mul(&s.w[0])).mul(&h.fib.x);
            assert_eq!(lhs1, r2z4.scale(&c));
            let hinge = v.r.square().mul(&v.z.square()).scale(&-((&one - &a) * (&one - &a)));
            for j in 1..=10 {
                assert_eq!(hinge.mul(&s.q[j]), s.w[j + 1].sub(&s.w[j]), "j = {j}");
            }
            for n in 1..=10 {
                let br = s.w[n].mul(&s.q[n + 1]).sub(&s.w[n + 1].mul(&s.q[n]));
                assert_eq!(br, v.z.square().scale(&(&a * &a)).mul(&h.fib.x.pow(n as u32 - 1)));
            }
        }
    }

    #[test]
    fn starred_values_at_one() {
        let v = Vars::at_one();
        let a = rat(3, 7);
        let s = star_seq(&homog_coeffs(&v, &a).unwrap(), 10);
        for l in 1..=10u32 {
            let al = num_traits::pow(a.clone(), l as usize - 1);
            let li = Rational::from_integer(l.into());
            assert_eq!(s.w[l as usize], &al * (&li - (&li - Rational::one()) * &a), "w*_{l}");
            assert_eq!(s.q[l as usize], &al * &li, "q*_{l}");
        }
    }
}
