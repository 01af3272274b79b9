//! One-sided first-passage probabilities `ρ_{m,n}`, the excursion height law
//! and the law of the number of completed excursions `M_N`.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::ring::Rational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

fn check_pair(m: u32, n: u32, p: &ModelParams) -> Result<()> {
    if m == n {
        return Err(Error::EqualIndices);
    }
    let top = m.max(n);
    if top > p.n + 1 {
        return Err(Error::IndexOutOfRange(format!("level {top} above N + 1 = {}", p.n + 1)));
    }
    Ok(())
}

/// The denominator `Π_{m,n}` of `ρ_{m,n}`.
///
/// Levels up to `N+1` are accepted so that tail probabilities such as
/// `P(H ≥ N+1)` can be expressed.
pub fn pi_value(m: u32, n: u32, p: &ModelParams) -> Result<Rational> {
    check_pair(m, n, p)?;
    let (a, b, f) = (&p.a, &p.b, p.f);
    let one = Rational::one();
    let ba = b / a;
    let int = |k: u32| Rational::from_integer(k.into());
    let within_a = |l: u32| &ba * (int(l) - int(l - 1) * a);
    let within_b = |j: u32| int(j) - int(j - 1) * b;
    Ok(if m < n {
        if n <= f {
            within_a(n - m)
        } else if m >= f {
            within_b(n - m)
        } else {
            let (l, j) = (f - m, n - f);
            int(j) + int(l) * &ba - int(l + j - 1) * b
        }
    } else if m < f {
        within_a(m - n)
    } else if n + 1 >= f {
        within_b(m - n)
    } else {
        let (j, l) = (m - f, f - n);
        int(j) + &one + int(l - 1) * &ba - int(l + j - 1) * b
    })
}

/// `ρ_{m,n}`: probability that a walk started at `m` with a fair first step
/// reaches `n` before crossing to the far side of `m`.
pub fn rho(m: u32, n: u32, p: &ModelParams) -> Result<Rational> {
    let pi = pi_value(m, n, p)?;
    let num = if m < p.f { &p.b / &p.a } else { Rational::one() };
    Ok(half() * num / pi)
}

/// Exact solution of `A x = rhs` by Gaussian elimination over the rationals.
pub(crate) fn solve_linear(mut a: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Result<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularSystem)?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            let pivot_row = a[col].clone();
            for (x, y) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &factor * y;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    Ok((0..n).map(|i| &rhs[i] / &a[i][i]).collect())
}

/// Probability of reaching `target` before leaving `lo..=hi`, from every
/// `(level, moving up)` state of the band other than the target.
pub(crate) fn band_hit(lo: u32, hi: u32, target: u32, p: &ModelParams) -> Result<HashMap<(u32, bool), Rational>> {
    let levels: Vec<u32> = (lo..=hi).filter(|&k| k != target).collect();
    let index = |k: u32, up: bool| -> Option<usize> {
        levels.iter().position(|&l| l == k).map(|i| 2 * i + usize::from(up))
    };
    let size = 2 * levels.len();
    let mut a = vec![vec![Rational::zero(); size]; size];
    let mut rhs = vec![Rational::zero(); size];
    for &k in &levels {
        let stay = p.persistence(k).clone();
        let turn = Rational::one() - &stay;
        for up in [false, true] {
            let row = index(k, up).expect("level in band");
            a[row][row] += Rational::one();
            for (next_up, w) in [(up, &stay), (!up, &turn)] {
                let next = if next_up { k as i64 + 1 } else { k as i64 - 1 };
                if next < lo as i64 || next > hi as i64 {
                    continue;
                }
                let next = next as u32;
                if next == target {
                    rhs[row] += w;
                } else {
                    let col = index(next, next_up).expect("level in band");
                    a[row][col] -= w;
                }
            }
        }
    }
    let sol = solve_linear(a, rhs)?;
    let mut out = HashMap::new();
    for &k in &levels {
        for up in [false, true] {
            out.insert((k, up), sol[index(k, up).expect("level in band")].clone());
        }
    }
    Ok(out)
}

/// `ρ_{m,n}` from the absorbing chain on (level, direction) confined to the
/// band between `m` and `n`.
pub fn rho_oracle(m: u32, n: u32, p: &ModelParams) -> Result<Rational> {
    check_pair(m, n, p)?;
    let up = n > m;
    let first = if up { m + 1 } else { m - 1 };
    if first == n {
        return Ok(half());
    }
    let hit = band_hit(m.min(n), m.max(n), n, p)?;
    Ok(half() * &hit[&(first, up)])
}

/// `u_{m,j} = (1 − 4γ_mγ_jρ_{m,j}ρ_{j,m})⁻¹` for `m < j`.
pub fn u_factor(m: u32, j: u32, p: &ModelParams) -> Result<Rational> {
    if j <= m {
        return Err(Error::IndexOutOfRange(format!("u_{{{m},{j}}} needs m < j")));
    }
    let four = Rational::from_integer(4.into());
    let prod = four * p.gamma(m) * p.gamma(j) * rho(m, j, p)? * rho(j, m, p)?;
    Ok((Rational::one() - prod).recip())
}

/// The table of `ρ` for every ordered pair in `[0, N]`, built from distances
/// one and two by the ratio recurrences
/// `ρ_{m,n+1} = ρ_{m,n}ρ_{m+1,n+1}/ρ_{m+1,n} · u_{m,n}` and
/// `ρ_{n,m−1} = ρ_{n,m}ρ_{n−1,m−1}/ρ_{n−1,m} · u_{m,n}`,
/// with `u` evaluated on already built entries.
pub fn rho_table_by_recurrence(p: &ModelParams) -> HashMap<(u32, u32), Rational> {
    let top = p.n;
    let mut t: HashMap<(u32, u32), Rational> = HashMap::new();
    for m in 0..top {
        t.insert((m, m + 1), half());
        t.insert((m + 1, m), half());
    }
    for m in 0..top.saturating_sub(1) {
        let (g0, g1, g2) = (p.gamma(m), p.gamma(m + 1), p.gamma(m + 2));
        t.insert((m, m + 2), half() * (Rational::one() - &g1) / (Rational::one() - &g0 * &g1));
        t.insert((m + 2, m), half() * (Rational::one() - &g1) / (Rational::one() - &g2 * &g1));
    }
    let four = Rational::from_integer(4.into());
    for d in 2..top {
        for m in 0..=top - d {
            let n = m + d;
            let u = (Rational::one() - &four * p.gamma(m) * p.gamma(n) * &t[&(m, n)] * &t[&(n, m)]).recip();
            if n < top {
                let v = &t[&(m, n)] * &t[&(m + 1, n + 1)] / &t[&(m + 1, n)] * &u;
                t.insert((m, n + 1), v);
            }
            if m >= 1 {
                let v = &t[&(n, m)] * &t[&(n - 1, m - 1)] / &t[&(n - 1, m)] * &u;
                t.insert((n, m - 1), v);
            }
        }
    }
    t
}

/// `ρ_{m,n+1} = (1−γ_n)ρ_{m,n}∏_{j=m}^{n−1}u_{j,n}` (upward, `m < n`) or
/// `ρ_{n,m−1} = (1−γ_m)ρ_{n,m}∏_{j=m+1}^{n}u_{m,j}` (downward), one step past a
/// known value.
pub fn rho_extend(m: u32, n: u32, upward: bool, p: &ModelParams) -> Result<Rational> {
    if n <= m {
        return Err(Error::IndexOutOfRange(format!("rho_extend needs m < n, got ({m},{n})")));
    }
    if upward {
        let mut acc = (Rational::one() - p.gamma(n)) * rho(m, n, p)?;
        for j in m..n {
            acc *= u_factor(j, n, p)?;
        }
        Ok(acc)
    } else {
        if m == 0 {
            return Err(Error::IndexOutOfRange("no level below 0".into()));
        }
        let mut acc = (Rational::one() - p.gamma(m)) * rho(n, m, p)?;
        for j in m + 1..=n {
            acc *= u_factor(m, j, p)?;
        }
        Ok(acc)
    }
}

/// Law of the height `H` (largest |level|) of one excursion from 0.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightDist {
    /// `pmf[n-1] = P(H = n)` for `1 ≤ n ≤ N`.
    pub pmf: Vec<Rational>,
    /// `cdf[n-1] = P(H ≤ n)`.
    pub cdf: Vec<Rational>,
    /// `P(H ≥ N+1)`
    pub tail: Rational,
}

impl HeightDist {
    pub fn le(&self, n: u32) -> Rational {
        match n {
            0 => Rational::zero(),
            n => self.cdf[(n as usize).min(self.cdf.len()) - 1].clone(),
        }
    }
}

/// `P(H ≥ n)` for `n ≥ 2`: `2 a₁ ρ_{1,n}` with `a₁` the persistence at level 1.
pub fn height_tail(n: u32, p: &ModelParams) -> Result<Rational> {
    if n < 2 {
        return Ok(Rational::one());
    }
    Ok(Rational::from_integer(2.into()) * p.persistence(1) * rho(1, n, p)?)
}

/// `P(H = 1) = 1 − a₁` and `P(H = n) = 4a₁ρ_{1,n}γ_nρ_{n,0}` for `2 ≤ n ≤ N`.
pub fn height_dist(p: &ModelParams) -> Result<HeightDist> {
    let a1 = p.persistence(1).clone();
    let four = Rational::from_integer(4.into());
    let mut pmf = vec![Rational::one() - &a1];
    for n in 2..=p.n {
        pmf.push(&four * &a1 * rho(1, n, p)? * p.gamma(n) * rho(n, 0, p)?);
    }
    let mut cdf = Vec::with_capacity(pmf.len());
    let mut acc = Rational::zero();
    for x in &pmf {
        acc += x;
        cdf.push(acc.clone());
    }
    Ok(HeightDist { pmf, cdf, tail: height_tail(p.n + 1, p)? })
}

/// `P(M_N = ν) = P(H < N)^ν P(H ≥ N)`: the number of excursions completed
/// before the first one reaching height `N`.
pub fn m_count_pmf(nu: u32, p: &ModelParams) -> Result<Rational> {
    let ge = height_tail(p.n, p)?;
    let lt = Rational::one() - &ge;
    Ok(num_traits::pow(lt, nu as usize) * ge)
}

/// Checks `Π_{m,n}Π_{n,m} − γ_mγ_n(b/a) = (j+1+ℓ(b/a)−(ℓ+j)b) Π_{m+1,n}` for
/// `m = f−ℓ`, `n = f+j` with `ℓ ≥ 1`, `j ≥ 0`, `ℓ+j ≥ 2`, `n ≤ N`.
pub fn pi_product_identity(p: &ModelParams) -> Result<Vec<(u32, u32, bool)>> {
    let (a, b, f) = (&p.a, &p.b, p.f);
    let ba = b / a;
    let mut out = Vec::new();
    for l in 1..=f {
        for j in 0..=p.n - f {
            if l + j < 2 {
                continue;
            }
            let (m, n) = (f - l, f + j);
            let lhs = pi_value(m, n, p)? * pi_value(n, m, p)? - p.gamma(m) * p.gamma(n) * &ba;
            let coef = Rational::from_integer((j + 1).into()) + Rational::from_integer(l.into()) * &ba
                - Rational::from_integer((l + j).into()) * b;
            let rhs = coef * pi_value(m + 1, n, p)?;
            out.push((m, n, (lhs - rhs).abs().is_zero()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    fn params(a: (i64, i64), b: (i64, i64), f: u32, n: u32) -> ModelParams {
        ModelParams::from_fracs(a, b, f, n).unwrap()
    }

    #[test]
    fn neighbours_and_homogeneous_values() {
        let p = params((2, 7), (2, 7), 3, 8);
        for m in 0..8 {
            assert_eq!(rho(m, m + 1, &p).unwrap(), rat(1, 2));
            assert_eq!(rho(m + 1, m, &p).unwrap(), rat(1, 2));
        }
        for l in 1..=8u32 {
            let expected = rat(1, 2) / (Rational::from_integer(l.into()) - Rational::from_integer((l - 1).into()) * &p.a);
            assert_eq!(rho(0, l, &p).unwrap(), expected);
            assert_eq!(rho(l, 0, &p).unwrap(), expected);
        }
    }

    #[test]
    fn crossing_two_levels() {
        let p = params((1, 3), (3, 5), 3, 8);
        let (a, b) = (&p.a, &p.b);
        let expected = rat(1, 2) * b / (Rational::one() - (Rational::one() - a) * (Rational::one() - b));
        assert_eq!(rho(2, 4, &p).unwrap(), expected);
        assert_eq!(pi_value(2, 4, &p).unwrap(), Rational::one() + b / a - b);
        for m in 0..7 {
            let g1 = p.gamma(m + 1);
            let want = rat(1, 2) * (Rational::one() - &g1) / (Rational::one() - p.gamma(m) * &g1);
            assert_eq!(rho(m, m + 2, &p).unwrap(), want, "m = {m}");
        }
    }

    #[test]
    fn fair_walk_oracle() {
        let p = params((1, 2), (1, 2), 2, 6);
        for l in 1..=6 {
            let want = rat(1, 2) / (Rational::from_integer(l.into()) - Rational::from_integer((l - 1).into()) * rat(1, 2));
            assert_eq!(rho_oracle(0, l, &p).unwrap(), want);
        }
    }

    #[test]
    fn closed_form_matches_linear_system() {
        for (a, b, f, n) in [((1, 3), (3, 5), 3, 8), ((3, 5), (1, 3), 4, 8), ((2, 5), (2, 5), 2, 7), ((1, 4), (5, 6), 1, 6)] {
            let p = params(a, b, f, n);
            for m in 0..=n + 1 {
                for k in 0..=n + 1 {
                    if m != k {
                        assert_eq!(rho(m, k, &p).unwrap(), rho_oracle(m, k, &p).unwrap(), "{a:?} {b:?} f={f} ({m},{k})");
                    }
                }
            }
        }
    }

    #[test]
    fn reflected_pi_symmetry() {
        let p = params((1, 3), (3, 5), 4, 9);
        for m in 0..9 {
            for n in m + 1..9 {
                assert_eq!(pi_value(m + 1, n + 1, &p).unwrap(), pi_value(n, m, &p).unwrap(), "({m},{n})");
            }
        }
    }

    #[test]
    fn recurrences_reproduce_table() {
        for (a, b, f) in [((1, 3), (3, 5), 3), ((3, 4), (1, 5), 5), ((1, 2), (1, 2), 2)] {
            let p = params(a, b, f, 8);
            let t = rho_table_by_recurrence(&p);
            assert_eq!(t.len(), 9 * 8);
            for (&(m, n), v) in &t {
                assert_eq!(*v, rho(m, n, &p).unwrap(), "({m},{n})");
            }
            for m in 0..8 {
                for n in m + 1..8 {
                    assert_eq!(rho_extend(m, n, true, &p).unwrap(), rho(m, n + 1, &p).unwrap());
                    if m > 0 {
                        assert_eq!(rho_extend(m, n, false, &p).unwrap(), rho(n, m - 1, &p).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn u_at_distance_one() {
        let p = params((1, 3), (3, 5), 3, 8);
        for m in 0..8 {
            let want = (Rational::one() - p.gamma(m) * p.gamma(m + 1)).recip();
            assert_eq!(u_factor(m, m + 1, &p).unwrap(), want);
        }
    }

    #[test]
    fn pi_identity() {
        let p = params((2, 7), (4, 5), 4, 9);
        let rows = pi_product_identity(&p).unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.2));
    }

    #[test]
    fn height_law() {
        let p = params((2, 7), (2, 7), 3, 8);
        let h = height_dist(&p).unwrap();
        assert_eq!(h.pmf[0], rat(5, 7));
        let n = Rational::from_integer(8.into());
        let want = &n * (Rational::one() - &p.a) / (&n - (&n - Rational::one()) * &p.a);
        assert_eq!(h.le(8), want);
        assert_eq!(h.le(8) + &h.tail, Rational::one());

        for (a, b, f, nn) in [((1, 3), (3, 5), 3, 8), ((3, 5), (1, 4), 2, 6), ((1, 3), (3, 5), 1, 5)] {
            let p = params(a, b, f, nn);
            let h = height_dist(&p).unwrap();
            for k in 1..=nn {
                assert_eq!(h.le(k) + height_tail(k + 1, &p).unwrap(), Rational::one(), "k = {k}");
            }
            let (a, b) = (&p.a, &p.b);
            let int = |k: u32| Rational::from_integer(k.into());
            let num = int(nn + 1 - f) * a + int(f - 1) * b - int(nn - 1) * a * b;
            let den = int(nn + 1 - f) * a + int(f - 1) * b - int(nn) * a * b;
            assert_eq!(h.le(nn).recip(), num / den);
        }
    }

    #[test]
    fn excursion_count_is_geometric() {
        let p = params((1, 3), (3, 5), 3, 6);
        let ge = height_tail(6, &p).unwrap();
        assert_eq!(m_count_pmf(0, &p).unwrap(), ge);
        let mut sum = Rational::zero();
        for nu in 0..=10 {
            sum += m_count_pmf(nu, &p).unwrap();
        }
        let lt = Rational::one() - &ge;
        assert_eq!(sum, Rational::one() - num_traits::pow(lt, 11));
    }

    #[test]
    fn wbar_at_one_carries_pi() {
        use crate::fib::Strata;
        use crate::ring::Vars;
        let p = params((1, 3), (3, 5), 4, 9);
        let s = Strata::new(Vars::at_one(), &p).unwrap();
        let (a, b) = (&p.a, &p.b);
        for l in 1..=4u32 {
            for j in 1..=5u32 {
                let (lo, hi) = (4 - l, 4 + j);
                let up = num_traits::pow(a.clone(), l as usize) * num_traits::pow(b.clone(), j as usize - 1);
                assert_eq!(s.wbar(lo, hi).unwrap(), up * pi_value(lo, hi, &p).unwrap(), "up ({lo},{hi})");
                let down = num_traits::pow(a.clone(), l as usize - 1) * num_traits::pow(b.clone(), j as usize);
                assert_eq!(s.wbar(hi, lo).unwrap(), down * pi_value(hi, lo, &p).unwrap(), "down ({hi},{lo})");
            }
        }
    }
}
