use crate::{Failure, Format, Law, OutArgs, PointArgs, Suite};
use num_complex::Complex64;
use ruin_core::gf::{k_infinity as k_inf, k_n, Passage};
use ruin_core::limits::{self, LimitParams};
use ruin_core::oracle::{enum_excursions, enum_first_passage, MAX_LENGTH};
use ruin_core::ring::{Mono, Rational, Ring, Series3, Vars};
use ruin_core::ruin::height_dist;
use ruin_core::sim::{self, ScaledSample, StatKind};
use ruin_core::verify;
use ruin_core::ModelParams;
use serde::Serialize;
use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

#[derive(Serialize)]
struct CoeffRow {
    runs: u32,
    #[serde(rename = "shortRuns")]
    short_runs: u32,
    #[serde(rename = "longRuns")]
    long_runs: u32,
    steps: u32,
    probability_num: String,
    probability_den: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<String>,
}

fn check_lmax(lmax: u32) -> Result<(), Failure> {
    if lmax > MAX_LENGTH {
        return Err(Failure::Usage(format!("--lmax {lmax} exceeds {MAX_LENGTH}")));
    }
    Ok(())
}

/// Rows for every monomial of `s`, with `s − reference` when given.
fn coeff_rows(s: &Series3, reference: Option<&Series3>) -> Result<(Vec<CoeffRow>, usize), Failure> {
    let mut monos: BTreeSet<Mono> = s.terms().map(|(m, _)| m).collect();
    if let Some(r) = reference {
        monos.extend(r.terms().map(|(m, _)| m));
    }
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for m in monos {
        let c = s.coeff(m.i, m.j, m.k).map_err(ruin_core::Error::from)?;
        let delta = match reference {
            Some(r) => {
                let d = &c - r.coeff(m.i, m.j, m.k).map_err(ruin_core::Error::from)?;
                if d != Rational::from_integer(0.into()) {
                    mismatches += 1;
                }
                Some(d.to_string())
            }
            None => None,
        };
        rows.push(CoeffRow {
            runs: m.i,
            short_runs: m.j,
            long_runs: m.i - m.j,
            steps: m.k,
            probability_num: c.numer().to_string(),
            probability_den: c.denom().to_string(),
            delta,
        });
    }
    Ok((rows, mismatches))
}

fn emit<T: Serialize>(rows: &[T], out: &OutArgs) -> Result<(), Failure> {
    let mut w = out.writer()?;
    match out.format {
        Format::Csv => {
            let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut w);
            for r in rows {
                cw.serialize(r)?;
            }
            cw.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn mismatch_outcome(mismatches: usize, what: &str) -> Result<(), Failure> {
    if mismatches > 0 {
        return Err(Failure::Verification(format!("{mismatches} {what} coefficients differ from the enumeration")));
    }
    Ok(())
}

pub fn exact_dist(p: &ModelParams, lmax: u32, verify: bool, out: &OutArgs) -> Result<(), Failure> {
    check_lmax(lmax)?;
    let k = k_n(Vars::series(lmax), p)?;
    let reference = if verify {
        let mass = height_dist(p)?.le(p.n);
        Some(enum_excursions(p, lmax, p.n)?.to_series(lmax).scale(&mass.recip()))
    } else {
        None
    };
    let (rows, mismatches) = coeff_rows(&k, reference.as_ref())?;
    emit(&rows, out)?;
    mismatch_outcome(mismatches, "K_N")
}

pub fn first_passage(p: &ModelParams, m: u32, n: u32, lmax: u32, verify: bool, out: &OutArgs) -> Result<(), Failure> {
    check_lmax(lmax)?;
    let g = Passage::new(Vars::series(lmax), p)?.g(m, n)?;
    let reference = if verify {
        let (num, mass) = enum_first_passage(m, n, p, lmax)?;
        Some(num.scale(&mass.recip()))
    } else {
        None
    };
    let (rows, mismatches) = coeff_rows(&g, reference.as_ref())?;
    emit(&rows, out)?;
    mismatch_outcome(mismatches, "g")
}

#[derive(Serialize)]
struct ComplexRow {
    re: f64,
    im: f64,
}

pub fn kn(p: &ModelParams, pt: &PointArgs, out: &OutArgs) -> Result<(), Failure> {
    let v = k_n(Vars::complex(pt.r, pt.y, pt.z), p)?;
    emit(&[ComplexRow { re: v.re, im: v.im }], out)
}

pub fn k_infinity(a: &Rational, pt: &PointArgs, out: &OutArgs) -> Result<(), Failure> {
    let v = k_inf(a, pt.r, pt.y, pt.z)?;
    emit(&[ComplexRow { re: v.re, im: v.im }], out)
}

#[derive(Serialize)]
struct TrajectoryRow {
    seed_index: u64,
    #[serde(rename = "M")]
    m: u64,
    #[serde(rename = "R")]
    r: u64,
    #[serde(rename = "V")]
    v: u64,
    #[serde(rename = "L")]
    l: u64,
    #[serde(rename = "Rp")]
    rp: u64,
    #[serde(rename = "Vp")]
    vp: u64,
    #[serde(rename = "Lp")]
    lp: u64,
    #[serde(rename = "lastVisit")]
    last_visit: u64,
    #[serde(rename = "absorptionTime")]
    absorption_time: u64,
}

#[derive(Serialize)]
struct CfRow {
    s: f64,
    t: f64,
    cf_re: f64,
    cf_im: f64,
    stderr: f64,
    limit_re: Option<f64>,
    limit_im: Option<f64>,
}

fn cf_argument(raw: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != dim {
        return Err(Failure::Usage(format!("argument {raw:?} needs {dim} component(s)")));
    }
    parts.iter().map(|x| crate::real(x).map_err(Failure::Usage)).collect()
}

fn limit_cf(p: &ModelParams, stat: StatKind, t: &[f64]) -> Option<Complex64> {
    let (a, b) = (p.a_f64(), p.b_f64());
    let eta = p.eta.unwrap_or(f64::from(p.f) / f64::from(p.n));
    let lp = LimitParams::new(a, b, eta).ok()?;
    Some(match stat {
        StatKind::X => limits::phi_hat(t[0], &lp),
        StatKind::Xcal => limits::xcal_cf(t[0], &lp),
        StatKind::Y1Y2 => limits::joint_cf_homog(t[0], t[1], a),
        StatKind::Xzeta(z) => limits::xzeta_cf(t[0], z, a),
        StatKind::Z1Z2 => limits::z_joint_cf(t[0], t[1], a),
    })
}

pub fn simulate(
    p: &ModelParams,
    samples: u64,
    seed: u64,
    stat: StatKind,
    ts: &[String],
    rows: Option<&Path>,
    out: &OutArgs,
) -> Result<(), Failure> {
    if samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let points: Vec<Vec<f64>> = ts.iter().map(|t| cf_argument(t, stat.dim())).collect::<Result<_, _>>()?;
    let traj = sim::simulate_batch(p, seed, samples)?;
    let scaled: Vec<ScaledSample> =
        traj.iter().map(|t| sim::scaled_statistic(t, p, stat)).collect::<Result<_, _>>()?;
    if let Some(path) = rows {
        let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        for (i, t) in traj.iter().enumerate() {
            let (l, m) = (&t.last_visit_portion, &t.meander);
            cw.serialize(TrajectoryRow {
                seed_index: i as u64,
                m: t.excursions,
                r: l.runs,
                v: l.short_runs,
                l: l.steps,
                rp: m.runs,
                vp: m.short_runs,
                lp: m.steps,
                last_visit: t.last_visit,
                absorption_time: t.absorption_time(),
            })?;
        }
        cw.flush()?;
    }
    let mut table = Vec::new();
    for t in &points {
        let (value, stderr) = if scaled.len() == 1 {
            let x: f64 = scaled[0].value.iter().zip(t).map(|(v, t)| v * t).sum();
            (Complex64::from_polar(1.0, x), f64::NAN)
        } else {
            let e = sim::empirical_cf(&scaled, t)?;
            (e.value, e.stderr())
        };
        let lim = limit_cf(p, stat, t);
        let (s, tt) = if t.len() == 2 { (t[0], t[1]) } else { (0.0, t[0]) };
        table.push(CfRow {
            s,
            t: tt,
            cf_re: value.re,
            cf_im: value.im,
            stderr,
            limit_re: lim.map(|c| c.re),
            limit_im: lim.map(|c| c.im),
        });
    }
    emit(&table, out)
}

pub struct DensityArgs {
    pub a: f64,
    pub b: Option<f64>,
    pub eta: Option<f64>,
    pub law: Law,
    pub xmin: f64,
    pub xmax: f64,
    pub points: usize,
    pub dt: f64,
    pub t_max: Option<f64>,
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    density: f64,
}

pub fn density(d: DensityArgs, out: &OutArgs) -> Result<(), Failure> {
    if d.points < 2 || d.xmax <= d.xmin || d.dt <= 0.0 {
        return Err(Failure::Usage("need --points >= 2, --xmax > --xmin and --dt > 0".into()));
    }
    let lp = LimitParams::new(d.a, d.b.unwrap_or(1.0 - d.a), d.eta.unwrap_or(d.a))?;
    let cf = move |t: f64| match d.law {
        Law::Meander => limits::phi_hat(t, &lp),
        Law::LastVisit => limits::xcal_cf(t, &lp),
    };
    let t_max = d.t_max.unwrap_or_else(|| limits::choose_truncation(cf, lp.decay_rate()));
    let grid = limits::invert_cf(cf, &limits::uniform_grid(d.xmin, d.xmax, d.points), t_max, d.dt)?;
    eprintln!(
        "mean(grid)={:.8} mean(cf)={:.8} argmax={:.6} mass={:.8}",
        grid.mean,
        limits::cf_mean(cf, 1e-5),
        grid.argmax,
        grid.mass
    );
    let rows: Vec<DensityRow> = grid.xs.iter().zip(&grid.values).map(|(&x, &density)| DensityRow { x, density }).collect();
    emit(&rows, out)
}

pub struct VerifyArgs {
    pub a: Option<Rational>,
    pub b: Option<Rational>,
    pub f: Option<u32>,
    pub n: Option<u32>,
    pub nmax: u32,
    pub lmax: u32,
}

impl VerifyArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        let need = |what: &str| Failure::Usage(format!("this suite needs --{what}"));
        let a = self.a.clone().ok_or_else(|| need("a"))?;
        let b = self.b.clone().unwrap_or_else(|| a.clone());
        Ok(ModelParams::new(a, b, self.f.ok_or_else(|| need("f"))?, self.n.ok_or_else(|| need("N"))?)?)
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    passed: bool,
    #[serde(flatten)]
    report: verify::Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<verify::DensitySummary>,
}

pub fn verify(suite: Suite, args: VerifyArgs, out: &OutArgs) -> Result<(), Failure> {
    let (report, density) = match suite {
        Suite::Identities => (verify::identities(&args.params()?)?, None),
        Suite::Rho => (verify::rho_suite(&args.params()?)?, None),
        Suite::Oracle => {
            check_lmax(args.lmax)?;
            (verify::oracle_suite(&args.params()?, args.lmax)?, None)
        }
        Suite::Symmetry => {
            let a = args.a.clone().ok_or_else(|| Failure::Usage("this suite needs --a".into()))?;
            (verify::symmetry_suite(&a, args.nmax)?, None)
        }
        Suite::Limits => {
            let a = args.a.as_ref().ok_or_else(|| Failure::Usage("this suite needs --a".into()))?;
            let a = num_traits::ToPrimitive::to_f64(a).unwrap_or(f64::NAN);
            let (r, d) = verify::limits_suite(a)?;
            (r, Some(d))
        }
    };
    let passed = report.passed();
    let name = report.suite.clone();
    let mut w = out.writer()?;
    serde_json::to_writer_pretty(&mut w, &VerifyOutput { passed, report, density })?;
    writeln!(w)?;
    w.flush()?;
    if !passed {
        return Err(Failure::Verification(format!("suite {name} failed")));
    }
    Ok(())
}
