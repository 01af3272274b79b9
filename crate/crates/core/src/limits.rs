//! Limiting characteristic functions of the scaled meander and last-visit
//! statistics, and trapezoid Fourier inversion to densities.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `sinh(x)/x`, analytic at 0.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
    } else {
        x.sinh() / x
    }
}

/// `tanh(x)/x`, analytic at 0.
fn tanhc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 - x2 / 3.0 * (1.0 - 0.4 * x2)
    } else {
        x.tanh() / x
    }
}

/// Scale constants of the two-strata limit laws.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct LimitParams {
    pub a: f64,
    pub b: f64,
    pub eta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl LimitParams {
    pub fn new(a: f64, b: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("eta", eta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        let sigma1 = (a + b * b - 2.0 * a * b).sqrt();
        let sigma2 = (b + a * a - 2.0 * a * b).sqrt();
        Ok(LimitParams { a, b, eta, sigma1, sigma2, kappa1: eta * sigma1 / (1.0 - b), kappa2: (1.0 - eta) * sigma2 / (1.0 - a) })
    }

    /// Exponential decay rate of `|φ̂(t)|`.
    pub fn decay_rate(&self) -> f64 {
        self.kappa1 + self.kappa2
    }
}

/// Limiting characteristic function `φ̂` of the meander statistic `X_N`.
///
/// The denominator is divided by `t` analytically, so `t = 0` needs no
/// special case.
pub fn phi_hat(t: f64, lp: &LimitParams) -> Complex64 {
    let LimitParams { a, b, sigma1: s1, sigma2: s2, kappa1: k1, kappa2: k2, .. } = *lp;
    let (x1, x2) = (k1 * t, k2 * t);
    let den = Complex64::new(a * s1 * x1.cosh() * k2 * sinhc(x2) + b * s2 * k1 * sinhc(x1) * x2.cosh(), 0.0)
        + I * ((b - a) * (b - a) * k1 * k2 * t * sinhc(x1) * sinhc(x2));
    (b * k1 * s2 + a * k2 * s1) / den
}

/// `φ̂` for `b = 1 − a`, `η = a`, where `κ_1 = κ_2 = σ_1 = σ_2 = σ`.
pub fn special_phi_hat(t: f64, a: f64) -> Complex64 {
    let s = special_sigma(a);
    let c = (1.0 - 2.0 * a).powi(2);
    let x = s * t;
    s / (sinhc(x) * (Complex64::new(s * x.cosh(), 0.0) + I * (c * x.sinh())))
}

/// `σ = sqrt(1 − 3a + 3a²)`.
pub fn special_sigma(a: f64) -> f64 {
    (1.0 - 3.0 * a + 3.0 * a * a).sqrt()
}

/// Mean of the special-case law, `−(1−2a)²`.
pub fn special_mean(a: f64) -> f64 {
    -(1.0 - 2.0 * a).powi(2)
}

/// The complex factor `σ cosh(σt) + i(1−2a)² sinh(σt)` at complex `t`.
pub fn special_pole_factor(t: Complex64, a: f64) -> Complex64 {
    let s = special_sigma(a);
    let x = t * s;
    s * x.cosh() + I * (1.0 - 2.0 * a).powi(2) * x.sinh()
}

/// Zero of [`special_pole_factor`] closest to the origin.
pub fn special_pole(a: f64) -> Complex64 {
    let s = special_sigma(a);
    let c = (1.0 - 2.0 * a).powi(2);
    I * ((std::f64::consts::PI - (2.0 * s * c / (s * s - c * c)).atan()) / (2.0 * s))
}

/// `ψ̂`, with `ψ̂/φ̂` the limiting characteristic function of `𝒳_N`.
pub fn psi_hat(t: f64, lp: &LimitParams) -> Complex64 {
    let LimitParams { a, b, sigma1: s1, sigma2: s2, kappa1: k1, kappa2: k2, .. } = *lp;
    let (x1, x2) = (k1 * t, k2 * t);
    let abss = a * b * s1 * s2;
    let den = Complex64::new(abss * x1.cosh() * x2.cosh() + a * a * s1 * s1 * x1.sinh() * x2.sinh(), 0.0)
        + I * (a * s1 * (b - a) * (b - a) * x1.cosh() * x2.sinh());
    abss / den
}

/// Limiting characteristic function of the last-visit statistic `𝒳_N`.
pub fn xcal_cf(t: f64, lp: &LimitParams) -> Complex64 {
    psi_hat(t, lp) / phi_hat(t, lp)
}

fn homog_radius(s: f64, t: f64, a: f64) -> f64 {
    ((1.0 - a) * s * s + a * t * t).sqrt()
}

/// Joint limit of `(Y_1, Y_2)` for `a = b`: `q / sinh q`,
/// `q = sqrt((1−a)s² + at²)`.
pub fn joint_cf_homog(s: f64, t: f64, a: f64) -> Complex64 {
    Complex64::new(1.0 / sinhc(homog_radius(s, t, a)), 0.0)
}

/// Joint limit of `(Z_1, Z_2)` for `a = b`: `tanh(q)/q`.
pub fn z_joint_cf(s: f64, t: f64, a: f64) -> Complex64 {
    Complex64::new(tanhc(homog_radius(s, t, a)), 0.0)
}

/// `A_ζ = sqrt(((2ζ−1)a + (1−ζ)²)/(1−a))`, the scale of the `X_ζ` limit
/// `A_ζ t / sinh(A_ζ t)`.
pub fn a_zeta(zeta: f64, a: f64) -> f64 {
    (((2.0 * zeta - 1.0) * a + (1.0 - zeta).powi(2)) / (1.0 - a)).sqrt()
}

/// Limit law of `X_ζ` for `a = b`.
pub fn xzeta_cf(t: f64, zeta: f64, a: f64) -> Complex64 {
    Complex64::new(1.0 / sinhc(a_zeta(zeta, a) * t), 0.0)
}

/// `E[X] = −i φ'(0)` from central differences with one Richardson step.
pub fn cf_mean(cf: impl Fn(f64) -> Complex64, h: f64) -> f64 {
    let d = |h: f64| (cf(h) - cf(-h)) / (2.0 * h);
    let rich = (4.0 * d(h / 2.0) - d(h)) / 3.0;
    (-I * rich).re
}

/// Density values on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// `∫ x φ(x) dx` on the grid.
    pub mean: f64,
    /// Maximiser, refined by a parabola through the three best grid points.
    pub argmax: f64,
    /// Trapezoid integral of the density.
    pub mass: f64,
    /// Largest imaginary part left by the inversion.
    pub imag_residue: f64,
}

/// `n` equally spaced points from `lo` to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + step * k as f64).collect()
}

/// Smallest truncation `T` (scanning from `5/rate`) with `|cf(±T)| < 1e-13`.
pub fn choose_truncation(cf: impl Fn(f64) -> Complex64, rate: f64) -> f64 {
    let mut t = 5.0 / rate;
    while cf(t).norm().max(cf(-t).norm()) >= 1e-13 && t < 1e4 {
        t *= 1.1;
    }
    t
}

struct Quadrature {
    t0: f64,
    dt: f64,
    /// Trapezoid-weighted cf values at `t0 + k dt`.
    weighted: Vec<Complex64>,
}

impl Quadrature {
    fn new(cf: &(impl Fn(f64) -> Complex64 + Sync), t_max: f64, dt: f64) -> Result<Self> {
        let edge = cf(t_max).norm().max(cf(-t_max).norm());
        if edge >= 1e-12 {
            return Err(Error::TailNotDecayed(edge));
        }
        let k = (t_max / dt).round() as i64;
        let t0 = -(k as f64) * dt;
        let weighted = (0..=2 * k)
            .map(|j| {
                let w = if j == 0 || j == 2 * k { 0.5 } else { 1.0 };
                cf(t0 + j as f64 * dt) * (w * dt)
            })
            .collect();
        Ok(Quadrature { t0, dt, weighted })
    }

    /// `(1/2π) Σ e^{−itx} cf(t) w`, with the phase advanced by rotation and
    /// resynchronised every 1024 nodes.
    fn invert(&self, x: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, -self.dt * x);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phase = Complex64::new(0.0, 0.0);
        for (j, w) in self.weighted.iter().enumerate() {
            if j % 1024 == 0 {
                phase = Complex64::from_polar(1.0, -(self.t0 + j as f64 * self.dt) * x);
            }
            acc += phase * w;
            phase *= step;
        }
        acc / (2.0 * std::f64::consts::PI)
    }
}

fn summarise(xs: Vec<f64>, raw: Vec<Complex64>) -> DensityGrid {
    let values: Vec<f64> = raw.iter().map(|c| c.re).collect();
    let imag_residue = raw.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let h = if xs.len() > 1 { xs[1] - xs[0] } else { 0.0 };
    let trap = |f: &dyn Fn(usize) -> f64| {
        let n = xs.len();
        (0..n).map(|k| f(k) * if k == 0 || k + 1 == n { 0.5 } else { 1.0 }).sum::<f64>() * h
    };
    let mass = trap(&|k| values[k]);
    let mean = trap(&|k| xs[k] * values[k]);
    let best = (0..values.len()).max_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    let mut argmax = xs.get(best).copied().unwrap_or(f64::NAN);
    if best > 0 && best + 1 < values.len() {
        let (l, c, r) = (values[best - 1], values[best], values[best + 1]);
        let curv = l - 2.0 * c + r;
        if curv < 0.0 {
            argmax += 0.5 * h * (l - r) / curv;
        }
    }
    DensityGrid { xs, values, mean, argmax, mass, imag_residue }
}

/// Trapezoid inversion of `cf` on `[−T, T]` with step `dt`, evaluated on the
/// uniform grid `xs`.
pub fn invert_cf_sequential(cf: impl Fn(f64) -> Complex64 + Sync, xs: &[f64], t_max: f64, dt: f64) -> Result<DensityGrid> {
    let q = Quadrature::new(&cf, t_max, dt)?;
    let raw = xs.iter().map(|&x| q.invert(x)).collect();
    Ok(summarise(xs.to_vec(), raw))
}

/// [`invert_cf_sequential`] with grid points spread over the rayon pool.
#[cfg(feature = "parallel")]
pub fn invert_cf_parallel(cf: impl Fn(f64) -> Complex64 + Sync, xs: &[f64], t_max: f64, dt: f64) -> Result<DensityGrid> {
    use rayon::prelude::*;
    let q = Quadrature::new(&cf, t_max, dt)?;
    let raw = xs.par_iter().map(|&x| q.invert(x)).collect();
    Ok(summarise(xs.to_vec(), raw))
}

/// Inversion, in parallel when the `parallel` feature is on.
pub fn invert_cf(cf: impl Fn(f64) -> Complex64 + Sync, xs: &[f64], t_max: f64, dt: f64) -> Result<DensityGrid> {
    #[cfg(feature = "parallel")]
    {
        invert_cf_parallel(cf, xs, t_max, dt)
    }
    #[cfg(not(feature = "parallel"))]
    {
        invert_cf_sequential(cf, xs, t_max, dt)
    }
}
