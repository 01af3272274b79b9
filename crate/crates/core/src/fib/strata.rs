use super::{cross_matrices, homog_coeffs, mixed_coeffs, star_seq, CrossMatrices, FibCoeffs, HomogCoeffs, StarSeq};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::ring::{Rational, Ring, Vars};
use num_traits::One;
use std::collections::HashMap;
use std::sync::Mutex;

/// The two-strata arrays `w̄_{m,n}` and `q̄_n` for one parameter set.
///
/// Entries are computed on demand by the explicit recurrences and memoised.
/// Indices run over `0..=N+1`.
pub struct Strata<R: Ring> {
    pub(crate) v: Vars<R>,
    pub(crate) a: Rational,
    pub(crate) b: Rational,
    pub(crate) f: u32,
    pub(crate) n: u32,
    pub(crate) ha: HomogCoeffs<R>,
    pub(crate) hb: HomogCoeffs<R>,
    pub(crate) sa: StarSeq<R>,
    pub(crate) sb: StarSeq<R>,
    pub(crate) ab: FibCoeffs<R>,
    pub(crate) ba: FibCoeffs<R>,
    pub(crate) cross: CrossMatrices<R>,
    c1: Rational,
    c2: Rational,
    wcache: Mutex<HashMap<(u32, u32), R>>,
    qcache: Mutex<HashMap<u32, R>>,
}

impl<R: Ring> Strata<R> {
    pub fn new(v: Vars<R>, p: &ModelParams) -> Result<Self> {
        let (a, b) = (p.a.clone(), p.b.clone());
        let one = Rational::one();
        let ha = homog_coeffs(&v, &a)?;
        let hb = homog_coeffs(&v, &b)?;
        let len = p.n + 3;
        let sa = star_seq(&ha, len);
        let sb = star_seq(&hb, len);
        let ab = mixed_coeffs(&v, &a, &b)?;
        let ba = mixed_coeffs(&v, &b, &a)?;
        let cross = cross_matrices(&v, &a, &b)?;
        let c1 = (&b - &a) / (&one - &a);
        let c2 = (&one - &b) / (&one - &a);
        Ok(Strata {
            v,
            a,
            b,
            f: p.f,
            n: p.n,
            ha,
            hb,
            sa,
            sb,
            ab,
            ba,
            cross,
            c1,
            c2,
            wcache: Mutex::new(HashMap::new()),
            qcache: Mutex::new(HashMap::new()),
        })
    }

    pub fn vars(&self) -> &Vars<R> {
        &self.v
    }

    pub fn star_a(&self) -> &StarSeq<R> {
        &self.sa
    }

    pub fn star_b(&self) -> &StarSeq<R> {
        &self.sb
    }

    pub fn homog_a(&self) -> &HomogCoeffs<R> {
        &self.ha
    }

    pub fn homog_b(&self) -> &HomogCoeffs<R> {
        &self.hb
    }

    /// `(x(a,b), β(a,b))`
    pub fn mixed_ab(&self) -> &FibCoeffs<R> {
        &self.ab
    }

    /// `(x(b,a), β(b,a))`
    pub fn mixed_ba(&self) -> &FibCoeffs<R> {
        &self.ba
    }

    fn check(&self, m: u32) -> Result<()> {
        if m > self.n + 1 {
            return Err(Error::IndexOutOfRange(format!("index {m} above N + 1 = {}", self.n + 1)));
        }
        Ok(())
    }

    /// `w̄_{m,n}` for `m ≠ n`, by the stratum-wise recurrences.
    pub fn wbar(&self, m: u32, n: u32) -> Result<R> {
        if m == n {
            return Err(Error::EqualIndices);
        }
        self.check(m)?;
        self.check(n)?;
        if let Some(hit) = self.wcache.lock().expect("cache lock").get(&(m, n)) {
            return Ok(hit.clone());
        }
        let val = if m < n { self.wbar_up(m, n)? } else { self.wbar_down(m, n)? };
        self.wcache.lock().expect("cache lock").insert((m, n), val.clone());
        Ok(val)
    }

    fn wbar_up(&self, m: u32, n: u32) -> Result<R> {
        let f = self.f;
        let d = (n - m) as usize;
        if d == 1 {
            return Ok(self.v.one.clone());
        }
        if n <= f {
            return Ok(self.sa.w[d].clone());
        }
        if m >= f {
            return Ok(self.sb.w[d].clone());
        }
        let l = (f - m) as usize;
        Ok(match n - f {
            1 => self.sa.w[l + 1].scale(&self.c2).add(&self.sa.w[l].scale(&self.c1)),
            2 => self.ab.step(&self.wbar(m, f + 1)?, &self.wbar(m, f)?),
            _ => self.hb.fib.step(&self.wbar(m, n - 1)?, &self.wbar(m, n - 2)?),
        })
    }

    fn wbar_down(&self, s: u32, t: u32) -> Result<R> {
        let f = self.f;
        let d = (s - t) as usize;
        if d == 1 {
            return Ok(self.v.one.clone());
        }
        if s < f {
            return Ok(self.sa.w[d].clone());
        }
        if t + 1 >= f {
            return Ok(self.sb.w[d].clone());
        }
        let one = Rational::one();
        if t + 2 == f {
            let j = (s - f) as usize;
            let ca = (&one - &self.a) / (&one - &self.b);
            let cb = (&self.a - &self.b) / (&one - &self.b);
            return Ok(self.sb.w[j + 2].scale(&ca).add(&self.sb.w[j + 1].scale(&cb)));
        }
        if t + 3 == f {
            return Ok(self.ba.step(&self.wbar(s, f - 2)?, &self.wbar(s, f - 1)?));
        }
        Ok(self.ha.fib.step(&self.wbar(s, t + 1)?, &self.wbar(s, t + 2)?))
    }

    /// `w̄_{m,n}` through the cross matrix: for `m = f−ℓ < f < n = f+j`,
    /// `w̄ = d₁(ℓ) q_j*(b) + d₂(ℓ) w_j*(b)` with `d(ℓ) = M (w_ℓ*(a), w_{ℓ+1}*(a))ᵀ`.
    /// Downward entries use `w̄_{s,t} = w̄_{t+1,s+1}`.
    pub fn wbar_closed(&self, m: u32, n: u32) -> Result<R> {
        if m == n {
            return Err(Error::EqualIndices);
        }
        self.check(m)?;
        self.check(n)?;
        let (m, n) = if m < n { (m, n) } else { (n + 1, m + 1) };
        let f = self.f;
        let d = (n - m) as usize;
        if n <= f {
            return Ok(self.sa.w[d].clone());
        }
        if m >= f {
            return Ok(self.sb.w[d].clone());
        }
        let (l, j) = ((f - m) as usize, (n - f) as usize);
        let (d1, d2) = self.cross.apply(&self.sa.w[l], &self.sa.w[l + 1]);
        Ok(d1.mul(&self.sb.q[j]).add(&d2.mul(&self.sb.w[j])))
    }

    /// `q̄_n` for `0 ≤ n ≤ N+1`.
    pub fn qbar(&self, n: u32) -> Result<R> {
        self.check(n)?;
        if let Some(hit) = self.qcache.lock().expect("cache lock").get(&n) {
            return Ok(hit.clone());
        }
        let f = self.f;
        let val = if n < f {
            self.sa.q[n as usize].clone()
        } else if n == f {
            let f = f as usize;
            self.sa.q[f].scale(&self.c2).add(&self.sa.q[f - 1].scale(&self.c1))
        } else if n == f + 1 {
            self.ab.step(&self.qbar(f)?, &self.qbar(f - 1)?)
        } else {
            self.hb.fib.step(&self.qbar(n - 1)?, &self.qbar(n - 2)?)
        };
        self.qcache.lock().expect("cache lock").insert(n, val.clone());
        Ok(val)
    }

    /// `q̄_{f+j−1} = (q_j*(b), w_j*(b)) M (q_{f−1}*(a), q_f*(a))ᵀ` for `n ≥ f`;
    /// below that `q̄_n = q_n*(a)`.
    pub fn qbar_matrix(&self, n: u32) -> Result<R> {
        self.check(n)?;
        let f = self.f;
        if n < f {
            return Ok(self.sa.q[n as usize].clone());
        }
        let j = (n + 1 - f) as usize;
        let fu = f as usize;
        let (u, w) = self.cross.apply(&self.sa.q[fu - 1], &self.sa.q[fu]);
        Ok(self.sb.q[j].mul(&u).add(&self.sb.w[j].mul(&w)))
    }

    /// `[w̄]_{m,n} = w̄_{m,n} w̄_{m+1,n+1} − w̄_{m,n+1} w̄_{m+1,n}` for `m+1 < n`.
    pub fn bracket_w(&self, m: u32, n: u32) -> Result<R> {
        if m + 1 >= n {
            return Err(Error::TooClose { m, n });
        }
        Ok(self
            .wbar(m, n)?
            .mul(&self.wbar(m + 1, n + 1)?)
            .sub(&self.wbar(m, n + 1)?.mul(&self.wbar(m + 1, n)?)))
    }

    /// `[w̄]_{n,m} = w̄_{n,m} w̄_{n−1,m−1} − w̄_{n,m−1} w̄_{n−1,m}` for `m+1 < n`.
    pub fn bracket_w_down(&self, n: u32, m: u32) -> Result<R> {
        if m + 1 >= n || m == 0 {
            return Err(Error::TooClose { m, n });
        }
        Ok(self
            .wbar(n, m)?
            .mul(&self.wbar(n - 1, m - 1)?)
            .sub(&self.wbar(n, m - 1)?.mul(&self.wbar(n - 1, m)?)))
    }

    fn a2z2_xa_pow(&self, e: u32) -> R {
        self.v.z.square().scale(&(&self.a * &self.a)).mul(&self.ha.fib.x.pow(e))
    }

    /// Closed form of `[w̄]_{m,n}` as a product of powers of `x_a, x(a,b), x_b`.
    pub fn bracket_w_closed(&self, m: u32, n: u32) -> Result<R> {
        if m + 1 >= n {
            return Err(Error::TooClose { m, n });
        }
        let one = Rational::one();
        let (a, b, f) = (&self.a, &self.b, self.f);
        let r2z4 = self.v.r.square().mul(&self.v.z.pow(4));
        let mixed = (&one - a) * (&one - b);
        let xa = &self.ha.fib.x;
        let xb = &self.hb.fib.x;
        let d = n - m;
        Ok(if n < f {
            r2z4.scale(&(a * a * (&one - a) * (&one - a))).mul(&xa.pow(d - 2))
        } else if m >= f {
            r2z4.scale(&(b * b * (&one - b) * (&one - b))).mul(&xb.pow(d - 2))
        } else if n == f {
            r2z4.scale(&(a * a * &mixed)).mul(&xa.pow(f - m - 2))
        } else if m + 1 == f {
            r2z4.scale(&(b * b * &mixed)).mul(&xb.pow(n - f - 1))
        } else {
            r2z4
                .scale(&(a * a * &mixed))
                .mul(&xa.pow(f - m - 2))
                .mul(&self.ab.x)
                .mul(&xb.pow(n - f - 1))
        })
    }

    /// `[w̄, q̄]_n = w̄_{n,0} q̄_{n+1} − q̄_n w̄_{n+1,0}` for `n ≥ 1`.
    pub fn bracket_wq(&self, n: u32) -> Result<R> {
        if n == 0 {
            return Err(Error::EqualIndices);
        }
        Ok(self
            .wbar(n, 0)?
            .mul(&self.qbar(n + 1)?)
            .sub(&self.qbar(n)?.mul(&self.wbar(n + 1, 0)?)))
    }

    /// Closed form of `[w̄, q̄]_n`; needs `f ≥ 2` once `n ≥ f−1`.
    pub fn bracket_wq_closed(&self, n: u32) -> Result<R> {
        if n == 0 {
            return Err(Error::EqualIndices);
        }
        let f = self.f;
        if n + 2 <= f {
            return Ok(self.a2z2_xa_pow(n - 1));
        }
        if f < 2 {
            return Err(Error::StrataTooLow(f));
        }
        let base = self.a2z2_xa_pow(f - 2).scale(&self.c2);
        if n + 1 == f {
            return Ok(base);
        }
        let j = n + 1 - f;
        Ok(base.mul(&self.ab.x).mul(&self.hb.fib.x.pow(j - 1)))
    }
}
