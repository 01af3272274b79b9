//! Monte Carlo simulation of the ruin chain with per-portion run statistics.
//!
//! Trajectory `i` of a batch draws from ChaCha8 seeded with the batch seed
//! and stream `i`, so results do not depend on scheduling or worker count.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

/// Largest number of steps simulated for one trajectory.
pub const STEP_CAP: u64 = 1_000_000_000;

/// Runs, short runs, long runs and steps over one portion of a path.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PortionStats {
    pub runs: u64,
    pub short_runs: u64,
    pub long_runs: u64,
    pub steps: u64,
}

impl PortionStats {
    fn absorb(&mut self, o: &PortionStats) {
        self.runs += o.runs;
        self.short_runs += o.short_runs;
        self.long_runs += o.long_runs;
        self.steps += o.steps;
    }
}

/// Statistics of one ruin trajectory started at 0.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrajectoryStats {
    /// Epoch of the last visit to 0.
    pub last_visit: u64,
    /// Excursions completed before the last visit.
    pub excursions: u64,
    /// Totals over the excursions before the last visit, each counted on its own.
    pub last_visit_portion: PortionStats,
    /// Totals from the last visit to absorption.
    pub meander: PortionStats,
}

impl TrajectoryStats {
    pub fn absorption_time(&self) -> u64 {
        self.last_visit + self.meander.steps
    }
}

/// Run bookkeeping for the portion in progress.
#[derive(Default)]
struct Tracker {
    portion: PortionStats,
    long: bool,
}

impl Tracker {
    fn start(&mut self) {
        self.portion = PortionStats { runs: 1, steps: 1, ..PortionStats::default() };
        self.long = false;
    }

    #[inline]
    fn step(&mut self, persist: bool) {
        self.portion.steps += 1;
        if persist {
            self.long = true;
        } else {
            self.portion.runs += 1;
            self.portion.short_runs += u64::from(!self.long);
            self.long = false;
        }
    }

    fn close(&mut self) -> PortionStats {
        let mut p = self.portion;
        p.short_runs += u64::from(!self.long);
        p.long_runs = p.runs - p.short_runs;
        p
    }
}

/// Decomposes a path started at 0 that ends on its first visit to `±N`.
pub fn stats_from_steps(steps: &[i8], n: u32) -> Result<TrajectoryStats> {
    let (&first, rest) = steps.split_first().ok_or(Error::EmptyPath)?;
    let mut out = TrajectoryStats::default();
    let mut t = Tracker::default();
    t.start();
    let (mut level, mut dir, mut epoch) = (i64::from(first), first, 1u64);
    for &s in rest {
        if level.unsigned_abs() >= u64::from(n) {
            return Err(Error::InvalidParams(format!("path continues after absorption at epoch {epoch}")));
        }
        if level == 0 {
            out.last_visit_portion.absorb(&t.close());
            out.excursions += 1;
            out.last_visit = epoch;
            t.start();
        } else {
            t.step(s == dir);
        }
        dir = s;
        level += i64::from(s);
        epoch += 1;
    }
    if level.unsigned_abs() != u64::from(n) {
        return Err(Error::InvalidParams(format!("path ends at level {level}, not at ±{n}")));
    }
    out.meander = t.close();
    Ok(out)
}

/// Persistence thresholds on a uniform `u64`.
#[derive(Copy, Clone)]
struct Thresholds {
    a: u64,
    b: u64,
    f: u64,
    n: u64,
}

impl Thresholds {
    fn new(p: &ModelParams) -> Self {
        let scale = |x: f64| (x * 2f64.powi(64)) as u64;
        Thresholds { a: scale(p.a_f64()), b: scale(p.b_f64()), f: u64::from(p.f), n: u64::from(p.n) }
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Trajectory `index` of the batch keyed by `seed`.
pub fn simulate_trajectory(p: &ModelParams, seed: u64, index: u64) -> Result<TrajectoryStats> {
    simulate_capped(&Thresholds::new(p), seed, index, STEP_CAP)
}

/// [`simulate_trajectory`] with an explicit step cap.
pub fn simulate_trajectory_capped(p: &ModelParams, seed: u64, index: u64, cap: u64) -> Result<TrajectoryStats> {
    simulate_capped(&Thresholds::new(p), seed, index, cap)
}

fn simulate_capped(th: &Thresholds, seed: u64, index: u64, cap: u64) -> Result<TrajectoryStats> {
    let mut rng = rng_for(seed, index);
    let mut out = TrajectoryStats::default();
    let mut t = Tracker::default();
    t.start();
    // The sign of the first step does not affect |X|, which starts moving up.
    rng.next_u64();
    let mut up = true;
    let mut level: u64 = 1;
    let mut epoch = 1u64;
    while level < th.n {
        if epoch >= cap {
            return Err(Error::StepCapExceeded { index });
        }
        let thr = if level < th.f { th.a } else { th.b };
        let persist = rng.next_u64() < thr;
        if level == 0 {
            out.last_visit_portion.absorb(&t.close());
            out.excursions += 1;
            out.last_visit = epoch;
            t.start();
        } else {
            t.step(persist);
        }
        // `up` is the direction of |X|: away from 0.
        up = if level == 0 { true } else if persist { up } else { !up };
        level = if up { level + 1 } else { level - 1 };
        epoch += 1;
    }
    out.meander = t.close();
    Ok(out)
}

/// `count` trajectories on the calling thread, in index order.
pub fn simulate_batch_sequential(p: &ModelParams, seed: u64, count: u64) -> Result<Vec<TrajectoryStats>> {
    let th = Thresholds::new(p);
    (0..count).map(|i| simulate_capped(&th, seed, i, STEP_CAP)).collect()
}

/// `count` trajectories across the rayon pool, in index order.
#[cfg(feature = "parallel")]
pub fn simulate_batch_parallel(p: &ModelParams, seed: u64, count: u64) -> Result<Vec<TrajectoryStats>> {
    use rayon::prelude::*;
    let th = Thresholds::new(p);
    (0..count).into_par_iter().map(|i| simulate_capped(&th, seed, i, STEP_CAP)).collect()
}

/// `count` trajectories, in parallel when the `parallel` feature is on.
pub fn simulate_batch(p: &ModelParams, seed: u64, count: u64) -> Result<Vec<TrajectoryStats>> {
    #[cfg(feature = "parallel")]
    {
        simulate_batch_parallel(p, seed, count)
    }
    #[cfg(not(feature = "parallel"))]
    {
        simulate_batch_sequential(p, seed, count)
    }
}

/// Scaled statistics with a known limit law.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum StatKind {
    /// Meander statistic `X_N`.
    X,
    /// Last-visit statistic `𝒳_N`.
    Xcal,
    /// Meander pair `(Y_1, Y_2)`, homogeneous only.
    Y1Y2,
    /// One-parameter meander family `X_ζ`, homogeneous only.
    Xzeta(f64),
    /// Last-visit pair `(Z_1, Z_2)`, homogeneous only.
    Z1Z2,
}

impl StatKind {
    pub fn dim(&self) -> usize {
        match self {
            StatKind::Y1Y2 | StatKind::Z1Z2 => 2,
            _ => 1,
        }
    }
}

/// Value of a scaled statistic; scalar kinds leave the second slot at 0.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ScaledSample {
    pub value: [f64; 2],
    pub dim: usize,
}

pub fn scaled_statistic(ts: &TrajectoryStats, p: &ModelParams, kind: StatKind) -> Result<ScaledSample> {
    let (a, b) = (p.a_f64(), p.b_f64());
    let n = f64::from(p.n);
    if (kind.dim() == 2 || matches!(kind, StatKind::Xzeta(_))) && !p.is_homogeneous() {
        return Err(Error::HomogeneousOnly);
    }
    let c = (1.0 - a) * (1.0 - b);
    let m = &ts.meander;
    let l = &ts.last_visit_portion;
    let (rp, vp, lp) = (m.runs as f64, m.short_runs as f64, m.steps as f64);
    let (r, v, ll, mm) = (l.runs as f64, l.short_runs as f64, l.steps as f64, ts.excursions as f64);
    let one = |x: f64| ScaledSample { value: [x / n, 0.0], dim: 1 };
    let two = |x: f64, y: f64| ScaledSample { value: [x / n, y / n], dim: 2 };
    Ok(match kind {
        StatKind::X => one(lp - (2.0 - a - b) / c * rp + vp / c),
        StatKind::Xcal => one(ll - (2.0 - a - b) / c * r + v / c - a * (b - a) / c * mm),
        StatKind::Y1Y2 => {
            let y1 = rp - vp / (1.0 - a);
            two(y1, lp - rp / (1.0 - a) - y1)
        }
        StatKind::Xzeta(z) => one(lp - (1.0 + z) / (1.0 - a) * rp + z / ((1.0 - a) * (1.0 - a)) * vp),
        StatKind::Z1Z2 => {
            let z1 = r - v / (1.0 - a) + a * mm;
            two(z1, ll - r / (1.0 - a) + a / (1.0 - a) * mm - z1)
        }
    })
}

/// Sample mean of complex values with the standard errors of its real and
/// imaginary parts.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: Complex64,
    pub se_re: f64,
    pub se_im: f64,
}

impl Estimate {
    /// `sqrt(se_re² + se_im²)`: the standard error of the complex mean.
    pub fn stderr(&self) -> f64 {
        self.se_re.hypot(self.se_im)
    }
}

pub fn mean_estimate(values: impl IntoIterator<Item = Complex64>) -> Result<Estimate> {
    let (mut n, mut s, mut sre, mut sim) = (0u64, Complex64::new(0.0, 0.0), 0.0, 0.0);
    for v in values {
        n += 1;
        s += v;
        sre += v.re * v.re;
        sim += v.im * v.im;
    }
    if n < 2 {
        return Err(Error::TooFewSamples);
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = |sq: f64, m: f64| ((sq - nf * m * m) / (nf - 1.0)).max(0.0);
    Ok(Estimate { value: mean, se_re: (var(sre, mean.re) / nf).sqrt(), se_im: (var(sim, mean.im) / nf).sqrt() })
}

/// Empirical `E[exp(i⟨t, x⟩)]`; `t` has one entry per sample component.
pub fn empirical_cf(samples: &[ScaledSample], t: &[f64]) -> Result<Estimate> {
    if let Some(s) = samples.iter().find(|s| s.dim != t.len()) {
        return Err(Error::InvalidParams(format!("cf argument has {} components, samples have {}", t.len(), s.dim)));
    }
    mean_estimate(samples.iter().map(|s| {
        let x: f64 = s.value.iter().zip(t).map(|(v, t)| v * t).sum();
        Complex64::from_polar(1.0, x)
    }))
}

/// Empirical `E[r^R y^V z^L u^M]` over the last-visit portions.
pub fn empirical_last_visit_pgf(ts: &[TrajectoryStats], r: Complex64, y: Complex64, z: Complex64, u: Complex64) -> Result<Estimate> {
    mean_estimate(ts.iter().map(|t| {
        let l = &t.last_visit_portion;
        r.powu(l.runs as u32) * y.powu(l.short_runs as u32) * z.powu(l.steps as u32) * u.powu(t.excursions as u32)
    }))
}

/// Empirical `E[r^{R′} y^{V′} z^{L′}]` over the meanders.
pub fn empirical_meander_pgf(ts: &[TrajectoryStats], r: Complex64, y: Complex64, z: Complex64) -> Result<Estimate> {
    mean_estimate(ts.iter().map(|t| {
        let m = &t.meander;
        r.powu(m.runs as u32) * y.powu(m.short_runs as u32) * z.powu(m.steps as u32)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{count_path_stats, parse_path};

    const RUIN_PATH: &str = "D D U U D U U U U D D D D D U D U U U U U D U U";

    #[test]
    fn ruin_path_replay() {
        let ts = stats_from_steps(&parse_path(RUIN_PATH).unwrap(), 4).unwrap();
        let l = ts.last_visit_portion;
        assert_eq!((ts.excursions, l.runs, l.short_runs, l.steps), (4, 10, 4, 18));
        assert_eq!((ts.meander.runs, ts.meander.short_runs, ts.meander.steps), (3, 1, 6));
        assert_eq!(ts.last_visit, 18);
        let p = ModelParams::from_fracs((1, 2), (1, 2), 2, 4).unwrap();
        assert_eq!(scaled_statistic(&ts, &p, StatKind::X).unwrap().value[0], -0.5);
    }

    #[test]
    fn replay_rejects_unfinished_paths() {
        assert!(stats_from_steps(&parse_path("UUD").unwrap(), 4).is_err());
        assert!(stats_from_steps(&parse_path("UUUUD").unwrap(), 4).is_err());
        assert_eq!(stats_from_steps(&[], 4), Err(Error::EmptyPath));
    }

    #[test]
    fn zeta_one_is_x() {
        let p = ModelParams::from_fracs((1, 3), (1, 3), 2, 5).unwrap();
        for i in 0..20 {
            let ts = simulate_trajectory(&p, 3, i).unwrap();
            let x = scaled_statistic(&ts, &p, StatKind::X).unwrap().value[0];
            let xz = scaled_statistic(&ts, &p, StatKind::Xzeta(1.0)).unwrap().value[0];
            assert!((x - xz).abs() < 1e-12);
        }
        assert_eq!(scaled_statistic(&TrajectoryStats::default(), &p, StatKind::Xcal).unwrap().value, [0.0, 0.0]);
        let q = ModelParams::from_fracs((1, 3), (1, 2), 2, 5).unwrap();
        assert_eq!(scaled_statistic(&TrajectoryStats::default(), &q, StatKind::Z1Z2), Err(Error::HomogeneousOnly));
    }

    #[test]
    fn reproducible_and_consistent() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 3, 8).unwrap();
        let a = simulate_batch(&p, 11, 300).unwrap();
        assert_eq!(a, simulate_batch_sequential(&p, 11, 300).unwrap());
        for t in &a {
            let (l, m) = (t.last_visit_portion, t.meander);
            assert_eq!(l.steps, t.last_visit);
            assert!(m.steps >= 8);
            assert_eq!(l.short_runs + l.long_runs, l.runs);
            assert_eq!(m.short_runs + m.long_runs, m.runs);
        }
        assert_ne!(a[0], simulate_trajectory(&p, 12, 0).unwrap());
    }

    #[test]
    fn step_cap() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 3, 50).unwrap();
        assert_eq!(simulate_trajectory_capped(&p, 1, 9, 10), Err(Error::StepCapExceeded { index: 9 }));
    }

    #[test]
    fn cf_estimator() {
        let s = vec![ScaledSample { value: [0.7, 0.0], dim: 1 }; 5];
        let e = empirical_cf(&s, &[0.0]).unwrap();
        assert_eq!((e.value, e.stderr()), (Complex64::new(1.0, 0.0), 0.0));
        let e = empirical_cf(&s, &[1.3]).unwrap();
        assert!((e.value - Complex64::from_polar(1.0, 0.91)).norm() < 1e-15);
        assert_eq!(empirical_cf(&s[..1], &[1.0]), Err(Error::TooFewSamples));
        assert!(empirical_cf(&s, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn simulated_runs_match_replay() {
        // Rebuild each trajectory's path from the same stream and count it independently.
        let p = ModelParams::from_fracs((2, 5), (3, 4), 2, 5).unwrap();
        for i in 0..50 {
            let mut rng = rng_for(5, i);
            let th = Thresholds::new(&p);
            let mut steps = vec![if rng.next_u64() >> 63 == 1 { 1i8 } else { -1 }];
            let mut x = i64::from(steps[0]);
            while x.unsigned_abs() < u64::from(p.n) {
                let k = x.unsigned_abs();
                let persist = rng.next_u64() < if k < th.f { th.a } else { th.b };
                let last = *steps.last().unwrap();
                let s = if persist { last } else { -last };
                steps.push(s);
                x += i64::from(s);
            }
            let sim = simulate_trajectory(&p, 5, i).unwrap();
            assert_eq!(sim, stats_from_steps(&steps, p.n).unwrap(), "trajectory {i}");
            let tail = &steps[sim.last_visit as usize..];
            let m = count_path_stats(tail).unwrap();
            assert_eq!((m.runs as u64, m.short_runs as u64), (sim.meander.runs, sim.meander.short_runs));
        }
    }
}
