//! Exact identity suites with machine-readable pass/fail reports.

use crate::error::{Error, Result};
use crate::fib::{FibCoeffs, Strata};
use crate::gf::{k_n, k_n_by_heights, Passage};
use crate::limits::{
    invert_cf, joint_cf_homog, phi_hat, special_mean, special_phi_hat, uniform_grid, xcal_cf, LimitParams,
};
use crate::oracle::{enum_excursions, enum_first_passage, symmetry_check};
use crate::params::ModelParams;
use crate::ring::{Rational, Ring, Series3, Vars};
use crate::ruin::{height_dist, pi_product_identity, pi_value, rho, rho_oracle, rho_table_by_recurrence};
use num_complex::Complex64;
use num_traits::One;
use serde::Serialize;
use std::fmt::{Debug, Display};

/// Outcome of one named identity over all its instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    /// First failing instance, with both sides.
    pub witness: Option<String>,
    /// Why the identity was not evaluated, if it was not.
    pub skipped: Option<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Check { name: name.to_string(), cases: 0, passed: true, witness: None, skipped: None }
    }

    fn record<T: PartialEq + Debug>(&mut self, at: impl Display, lhs: T, rhs: T) {
        self.cases += 1;
        if lhs != rhs && self.passed {
            self.passed = false;
            self.witness = Some(format!("{at}: {lhs:?} != {rhs:?}"));
        }
    }

    fn holds(&mut self, at: impl Display, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.passed {
            self.passed = false;
            self.witness = Some(format!("{at}: {}", detail()));
        }
    }

    fn fail(&mut self, at: impl Display, e: &Error) {
        self.cases += 1;
        if self.passed {
            self.passed = false;
            self.witness = Some(format!("{at}: {e}"));
        }
    }

    fn skip(mut self, why: impl Into<String>) -> Self {
        self.skipped = Some(why.into());
        self
    }
}

/// All checks of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn try_record<R: PartialEq + Debug>(c: &mut Check, at: impl Display, lhs: Result<R>, rhs: Result<R>) {
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => c.record(at, l, r),
        (Err(e), _) | (_, Err(e)) => c.fail(at, &e),
    }
}

/// Series truncation used by [`identities`].
pub const IDENTITY_DEGREE: u32 = 12;

fn casoratian(c: &mut Check, tag: &str, fib: &FibCoeffs<Series3>, seq: &[Series3]) {
    let base = seq[3].mul(&seq[0]).sub(&seq[2].mul(&seq[1]));
    for n in 1..seq.len() - 1 {
        let lhs = fib.beta.mul(&seq[n + 1].mul(&seq[n - 1]).sub(&seq[n].square()));
        c.record(format_args!("{tag} n={n}"), lhs, fib.x.pow(n as u32 - 1).mul(&base));
    }
}

/// Interlacing, bracket, symmetry and evaluation-at-one identities for the
/// strata arrays of `p`, in truncated series.
pub fn identities(p: &ModelParams) -> Result<Report> {
    p.validate()?;
    let v = Vars::series(IDENTITY_DEGREE);
    let st = Strata::new(v.clone(), p)?;
    let (n_top, f) = (p.n, p.f);
    let one = Rational::one();
    let mut checks = Vec::new();

    let mut c = Check::new("casoratian-reduction");
    for (tag, h, s) in [("a", st.homog_a(), st.star_a()), ("b", st.homog_b(), st.star_b())] {
        casoratian(&mut c, &format!("w*({tag})"), &h.fib, &s.w[..=n_top as usize]);
        casoratian(&mut c, &format!("q*({tag})"), &h.fib, &s.q[..=n_top as usize]);
    }
    checks.push(c);

    let mut inter = Check::new("homogeneous-interlacing");
    let mut starred = Check::new("starred-bracket");
    let mut hinge = Check::new("hinge");
    let r2z2 = v.r.square().mul(&v.z.square());
    let r2z4 = r2z2.mul(&v.z.square());
    for (tag, x, h, s) in [("a", &p.a, st.homog_a(), st.star_a()), ("b", &p.b, st.homog_b(), st.star_b())] {
        let sq = (&one - x) * (&one - x);
        for n in 2..=n_top as usize {
            let lhs = s.w[n].square().sub(&s.w[n + 1].mul(&s.w[n - 1]));
            let rhs = r2z4.scale(&(x * x * &sq)).mul(&h.fib.x.pow(n as u32 - 2));
            inter.record(format_args!("{tag} n={n}"), lhs, rhs);
        }
        for n in 1..=n_top as usize {
            let lhs = s.w[n].mul(&s.q[n + 1]).sub(&s.w[n + 1].mul(&s.q[n]));
            starred.record(format_args!("{tag} n={n}"), lhs, v.z.square().scale(&(x * x)).mul(&h.fib.x.pow(n as u32 - 1)));
            hinge.record(format_args!("{tag} j={n}"), r2z2.scale(&-sq.clone()).mul(&s.q[n]), s.w[n + 1].sub(&s.w[n]));
        }
    }
    checks.extend([inter, starred, hinge]);

    let names = ["bracket-within-a", "bracket-within-b", "bracket-top-at-f", "bracket-bottom-at-f-1", "bracket-straddling"];
    let mut brackets: Vec<Check> = names.iter().map(|n| Check::new(n)).collect();
    let mut down = Check::new("bracket-downward-equals-upward");
    for m in 0..n_top {
        for n in m + 2..=n_top {
            let case = if n < f {
                0
            } else if m >= f {
                1
            } else if n == f {
                2
            } else if m + 1 == f {
                3
            } else {
                4
            };
            let at = format!("[{m},{n}]");
            try_record(&mut brackets[case], &at, st.bracket_w(m, n), st.bracket_w_closed(m, n));
            if m >= 1 {
                try_record(&mut down, &at, st.bracket_w_down(n, m), st.bracket_w(m, n));
            }
        }
    }
    checks.extend(brackets.into_iter().map(|c| if c.cases == 0 { c.skip("no index pair in this case") } else { c }));
    checks.push(down);

    let mut refl = Check::new("wbar-reflection");
    let mut cross = Check::new("wbar-cross-matrix");
    for m in 0..=n_top + 1 {
        for n in 0..=n_top + 1 {
            if m == n {
                continue;
            }
            let at = format!("({m},{n})");
            try_record(&mut cross, &at, st.wbar(m, n), st.wbar_closed(m, n));
            if 1 <= m && m < n {
                try_record(&mut refl, &at, st.wbar(m, n), st.wbar(n - 1, m - 1));
            }
        }
    }
    let mut qb = Check::new("qbar-matrix-form");
    for n in 0..=n_top + 1 {
        try_record(&mut qb, format_args!("n={n}"), st.qbar(n), st.qbar_matrix(n));
    }
    checks.extend([refl, cross, qb]);

    let wq_names = ["wq-bracket-below", "wq-bracket-at-f-1", "wq-bracket-above"];
    let mut wq: Vec<Check> = wq_names.iter().map(|n| Check::new(n)).collect();
    for n in 1..=n_top {
        let case = if n + 2 <= f {
            0
        } else if n + 1 == f {
            1
        } else {
            2
        };
        if f < 2 && case > 0 {
            continue;
        }
        try_record(&mut wq[case], format_args!("n={n}"), st.bracket_wq(n), st.bracket_wq_closed(n));
    }
    checks.extend(wq.into_iter().map(|c| if c.cases == 0 { c.skip("no index in this case for this f") } else { c }));

    let mut at1 = Check::new("evaluation-at-one");
    let u = Strata::new(Vars::at_one(), p)?;
    let pw = |x: &Rational, e: u32| num_traits::pow(x.clone(), e as usize);
    let int = |k: u32| Rational::from_integer(k.into());
    for (x, s) in [(&p.a, u.star_a()), (&p.b, u.star_b())] {
        for l in 1..=n_top {
            let w = pw(x, l - 1) * (int(l) - int(l - 1) * x);
            at1.record(format_args!("w*_{l}"), s.w[l as usize].clone(), w);
            at1.record(format_args!("q*_{l}"), s.q[l as usize].clone(), pw(x, l - 1) * int(l));
        }
    }
    for l in 1..=f {
        for j in 1..=n_top - f {
            let (lo, hi) = (f - l, f + j);
            let up = pw(&p.a, l) * pw(&p.b, j - 1);
            try_record(&mut at1, format_args!("w̄({lo},{hi})"), u.wbar(lo, hi), pi_value(lo, hi, p).map(|x| x * up));
            let dn = pw(&p.a, l - 1) * pw(&p.b, j);
            try_record(&mut at1, format_args!("w̄({hi},{lo})"), u.wbar(hi, lo), pi_value(hi, lo, p).map(|x| x * dn));
        }
    }
    checks.push(at1);

    let mut lam = Check::new("interlacing-lambda");
    let pas = Passage::new(v, p)?;
    for m in 0..n_top {
        for n in m + 2..=n_top {
            try_record(&mut lam, format_args!("({m},{n})"), pas.lambda(m, n), pas.lambda_ratio(m, n));
        }
    }
    checks.push(lam);
    Ok(Report { suite: "identities".into(), checks })
}

/// `ρ` against the absorbing-chain solve, the ratio recurrences and the `Π`
/// product identity.
pub fn rho_suite(p: &ModelParams) -> Result<Report> {
    p.validate()?;
    let mut oracle = Check::new("rho-vs-absorbing-chain");
    for m in 0..=p.n {
        for n in 0..=p.n {
            if m != n {
                try_record(&mut oracle, format_args!("({m},{n})"), rho(m, n, p), rho_oracle(m, n, p));
            }
        }
    }
    let mut rec = Check::new("rho-ratio-recurrences");
    for ((m, n), val) in rho_table_by_recurrence(p) {
        try_record(&mut rec, format_args!("({m},{n})"), Ok(val), rho(m, n, p));
    }
    let mut prod = Check::new("pi-product-identity");
    for (m, n, ok) in pi_product_identity(p)? {
        prod.holds(format_args!("({m},{n})"), ok, || "identity fails".into());
    }
    if prod.cases == 0 {
        prod = prod.skip("no straddling pair");
    }
    let mut mass = Check::new("height-law-mass");
    let h = height_dist(p)?;
    let total: Rational = h.pmf.iter().sum::<Rational>() + &h.tail;
    mass.record("Σ P(H=n) + P(H>N)", total, Rational::one());
    mass.record("P(H≤N)", h.le(p.n), Rational::one() - &h.tail);
    Ok(Report { suite: "rho".into(), checks: vec![oracle, rec, prod, mass] })
}

/// Generating functions against the path enumeration, coefficient by
/// coefficient through `z^lmax`.
pub fn oracle_suite(p: &ModelParams, lmax: u32) -> Result<Report> {
    p.validate()?;
    let mut kn = Check::new("k_n-vs-enumeration");
    let enumerated = enum_excursions(p, lmax, p.n)?.to_series(lmax);
    let scaled = k_n(Vars::series(lmax), p)?.scale(&height_dist(p)?.le(p.n));
    kn.record(format_args!("N={} Lmax={lmax}", p.n), scaled, enumerated);

    let mut g = Check::new("g-vs-first-passage-enumeration");
    let pas = Passage::new(Vars::series(lmax), p)?;
    let mut mass = Check::new("first-passage-mass-vs-rho");
    for m in 0..=p.n {
        for n in 0..=p.n {
            if m.abs_diff(n) < 2 {
                continue;
            }
            let at = format!("({m},{n})");
            match (enum_first_passage(m, n, p, lmax), pas.g(m, n)) {
                (Ok((num, w)), Ok(gf)) => {
                    g.record(&at, num, gf.scale(&w));
                    let next = if n > m { m + 1 } else { m - 1 };
                    let want = rho(m, n, p)? * (Rational::one() - p.gamma(m) * p.gamma(next));
                    mass.record(&at, w, want);
                }
                (Err(e), _) | (_, Err(e)) => g.fail(&at, &e),
            }
        }
    }
    let mut heights = Check::new("k_n-from-heights");
    if p.f >= 3 {
        try_record(&mut heights, "Σ G_n P(H=n)", k_n_by_heights(&pas), k_n(Vars::series(lmax), p));
    } else {
        heights = heights.skip("excursion law given the height needs f ≥ 3");
    }
    Ok(Report { suite: "oracle".into(), checks: vec![kn, g, mass, heights] })
}

/// The runs symmetry for `a` over `2 ≤ n ≤ n_max`.
pub fn symmetry_suite(a: &Rational, n_max: u32) -> Result<Report> {
    let r = symmetry_check(a, n_max)?;
    let mut c = Check::new("runs-symmetry");
    c.cases = r.cells_checked;
    if let Some(f) = r.failures.first() {
        c.passed = false;
        c.witness = Some(format!("n={} k={} U={}: {} != {}", f.n, f.k, f.long_runs, f.lhs, f.rhs));
    }
    let mut low = Check::new("length-two-cells-differ");
    low.holds("n=1", !r.length_two.is_empty(), || "identity unexpectedly holds at n = 1".into());
    let mut checks = vec![c, low];
    if let Some(ok) = r.narayana {
        let mut nar = Check::new("narayana-symmetry");
        nar.holds("a=1/2", ok, || "P(L=2n,R=2k) != P(L=2n,R=2n-2k)".into());
        checks.push(nar);
    }
    Ok(Report { suite: "symmetry".into(), checks })
}

/// Numbers reported by [`limits_suite`] for the special-case density.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensitySummary {
    pub mean_from_cf: f64,
    pub mean_from_grid: f64,
    pub argmax: f64,
    pub mass: f64,
}

/// Density of the special-case law (`b = 1−a`, `η = a`) on `[−8, 8]`.
pub fn special_density(a: f64) -> Result<crate::limits::DensityGrid> {
    let t_max = crate::limits::choose_truncation(|t| special_phi_hat(t, a), 2.0 * crate::limits::special_sigma(a));
    invert_cf(|t| special_phi_hat(t, a), &uniform_grid(-8.0, 8.0, 1601), t_max, 1e-3)
}

/// Limit-law checks at `a`: the special-case density moments, the
/// homogeneous reductions and the `t/sinh t` inversion.
pub fn limits_suite(a: f64) -> Result<(Report, DensitySummary)> {
    let d = special_density(a)?;
    let mean_cf = crate::limits::cf_mean(|t| special_phi_hat(t, a), 1e-5);
    let mut checks = Vec::new();
    let mut mean = Check::new("special-mean");
    let want = special_mean(a);
    mean.holds("cf derivative", (mean_cf - want).abs() < 1e-5, || format!("{mean_cf} vs {want}"));
    mean.holds("grid", (d.mean - mean_cf).abs() < 1e-5, || format!("{} vs {mean_cf}", d.mean));
    checks.push(mean);
    let mut mass = Check::new("density-normalised");
    mass.holds("trapezoid", (d.mass - 1.0).abs() < 1e-4, || format!("mass {}", d.mass));
    let floor = d.values.iter().copied().fold(f64::INFINITY, f64::min);
    mass.holds("nonnegative", floor >= -1e-9, || format!("min {floor}"));
    mass.holds("real", d.imag_residue < 1e-8, || format!("imaginary residue {}", d.imag_residue));
    checks.push(mass);

    let pi = std::f64::consts::PI;
    let xs = uniform_grid(-6.0, 6.0, 1201);
    let s = invert_cf(|t| joint_cf_homog(t, t, 0.5), &xs, 40.0, 1e-3)?;
    let err = s.xs.iter().zip(&s.values).map(|(x, v)| (v - pi / 4.0 / (pi * x / 2.0).cosh().powi(2)).abs()).fold(0.0, f64::max);
    let mut sech = Check::new("sech-squared-density");
    sech.holds("max error", err < 1e-6, || format!("{err}"));
    checks.push(sech);

    let mut homog = Check::new("homogeneous-reductions");
    let a1 = (a / (1.0 - a)).sqrt();
    for eta in [0.1, 0.5, 0.9] {
        let lp = LimitParams::new(a, a, eta)?;
        for k in -5..=5 {
            let t = 0.4 * f64::from(k) + 0.05;
            let x = a1 * t;
            let e1 = (phi_hat(t, &lp) - Complex64::new(x / x.sinh(), 0.0)).norm();
            homog.holds(format_args!("phi eta={eta} t={t}"), e1 < 1e-12, || format!("{e1}"));
            let e2 = (xcal_cf(t, &lp) - Complex64::new(x.tanh() / x, 0.0)).norm();
            homog.holds(format_args!("xcal eta={eta} t={t}"), e2 < 1e-12, || format!("{e2}"));
            let e3 = (joint_cf_homog(t, t, a) - Complex64::new(t / t.sinh(), 0.0)).norm();
            homog.holds(format_args!("joint t={t}"), e3 < 1e-12, || format!("{e3}"));
        }
    }
    checks.push(homog);
    let summary = DensitySummary { mean_from_cf: mean_cf, mean_from_grid: d.mean, argmax: d.argmax, mass: d.mass };
    Ok((Report { suite: "limits".into(), checks }, summary))
}
