use crate::error::{Error, Result};
use crate::ring::{rat, Rational};
use num_traits::{One, ToPrimitive, Zero};

/// Parameters of the two-strata chain.
///
/// Persistence is `a` at levels `0..f` and `b` at levels `f..N`; the first
/// increment is ±1 with probability 1/2 each.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub a: Rational,
    pub b: Rational,
    pub f: u32,
    pub n: u32,
    /// Threshold fraction `f ≈ eta * N` used by the limit laws.
    pub eta: Option<f64>,
}

impl ModelParams {
    pub fn new(a: Rational, b: Rational, f: u32, n: u32) -> Result<Self> {
        let p = ModelParams { a, b, f, n, eta: None };
        p.validate()?;
        Ok(p)
    }

    /// Shorthand for tests and examples: `a = an/ad`, `b = bn/bd`.
    pub fn from_fracs(a: (i64, i64), b: (i64, i64), f: u32, n: u32) -> Result<Self> {
        Self::new(rat(a.0, a.1), rat(b.0, b.1), f, n)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: &Rational| *x > Rational::zero() && *x < Rational::one();
        if !unit(&self.a) || !unit(&self.b) {
            return Err(Error::InvalidParams("persistence parameters must lie in (0, 1)".into()));
        }
        if self.f < 1 || self.f >= self.n {
            return Err(Error::InvalidParams(format!("need 1 <= f < N, got f = {}, N = {}", self.f, self.n)));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::InvalidParams("eta must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.a == self.b
    }

    /// Persistence at level `k`.
    pub fn persistence(&self, k: u32) -> &Rational {
        if k < self.f {
            &self.a
        } else {
            &self.b
        }
    }

    /// Turning probability `γ_k = 1 - a_k`.
    pub fn gamma(&self, k: u32) -> Rational {
        Rational::one() - self.persistence(k)
    }

    pub fn a_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
    }

    pub fn b_f64(&self) -> f64 {
        self.b.to_f64().unwrap_or(f64::NAN)
    }

    /// The same chain with a different absorbing level, skipping the
    /// `f < N` check (used for excursion laws with height cap below `f`).
    pub fn with_height(&self, n: u32) -> Self {
        ModelParams { n, ..self.clone() }
    }
}
