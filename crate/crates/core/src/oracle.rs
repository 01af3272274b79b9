//! Brute-force weighted path enumeration: the ground truth for every
//! distributional statement at small sizes.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::ring::{Rational, Series3};
use crate::ruin::band_hit;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};

/// Longest path the enumerators accept.
pub const MAX_LENGTH: u32 = 30;

/// Default cap on visited transitions.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Run statistics of one lattice path.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathSignature {
    pub runs: u32,
    pub short_runs: u32,
    pub long_runs: u32,
    pub steps: u32,
    pub height: u32,
}

/// Exact joint law of [`PathSignature`] over a finite family of paths.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JointDist {
    pub mass: BTreeMap<PathSignature, Rational>,
    pub total: Rational,
}

impl JointDist {
    fn add(&mut self, sig: PathSignature, w: Rational) {
        self.total += &w;
        *self.mass.entry(sig).or_insert_with(Rational::zero) += w;
    }

    /// Mass of all signatures matching `keep`.
    pub fn marginal(&self, keep: impl Fn(&PathSignature) -> bool) -> Rational {
        self.mass.iter().filter(|(s, _)| keep(s)).map(|(_, w)| w).sum()
    }

    /// `Σ mass · r^runs y^short z^steps` truncated at `z^max_degree`.
    pub fn to_series(&self, max_degree: u32) -> Series3 {
        Series3::from_terms(
            self.mass.iter().map(|(s, w)| (s.runs, s.short_runs, s.steps, w.clone())),
            max_degree,
        )
    }
}

/// Parse a path written with `U`/`D` (case-insensitive, separators ignored).
pub fn parse_path(s: &str) -> Result<Vec<i8>> {
    let mut out = Vec::new();
    for c in s.chars() {
        match c.to_ascii_uppercase() {
            'U' | '+' => out.push(1),
            'D' | '-' => out.push(-1),
            c if c.is_whitespace() || c == ',' => {}
            c => return Err(Error::InvalidParams(format!("unexpected step symbol {c:?}"))),
        }
    }
    Ok(out)
}

/// Runs, short runs (length one), long runs, length and height (largest
/// distance from the start) of a ±1 step sequence.
pub fn count_path_stats(steps: &[i8]) -> Result<PathSignature> {
    let (&first, rest) = steps.split_first().ok_or(Error::EmptyPath)?;
    let (mut runs, mut short, mut len) = (1u32, 0u32, 1u32);
    let (mut level, mut height) = (i64::from(first), 1u32);
    let mut prev = first;
    for &s in rest {
        if s == prev {
            len += 1;
        } else {
            short += u32::from(len == 1);
            runs += 1;
            len = 1;
        }
        prev = s;
        level += i64::from(s);
        height = height.max(level.unsigned_abs() as u32);
    }
    short += u32::from(len == 1);
    Ok(PathSignature { runs, short_runs: short, long_runs: runs - short, steps: steps.len() as u32, height })
}

fn check_length(lmax: u32) -> Result<()> {
    if lmax > MAX_LENGTH {
        return Err(Error::InvalidParams(format!("Lmax = {lmax} exceeds {MAX_LENGTH}")));
    }
    Ok(())
}

fn check_cap(cap: u32, p: &ModelParams) -> Result<()> {
    if cap == 0 || cap > p.n {
        return Err(Error::IndexOutOfRange(format!("height cap {cap} outside 1..={}", p.n)));
    }
    Ok(())
}

struct Budget {
    left: u64,
    cap: u64,
}

impl Budget {
    fn new(cap: u64) -> Self {
        Budget { left: cap, cap }
    }

    fn spend(&mut self, n: u64) -> Result<()> {
        self.left = self.left.checked_sub(n).ok_or(Error::BudgetExceeded(self.cap))?;
        Ok(())
    }
}

/// Partial state of a path in the forward sweep. `long` marks a current run
/// of length at least two.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Walker {
    level: i32,
    up: bool,
    long: bool,
    runs: u32,
    short: u32,
    height: u32,
}

impl Walker {
    fn advance(self, persist: bool) -> Walker {
        let up = if persist { self.up } else { !self.up };
        let level = self.level + if up { 1 } else { -1 };
        let mut next = Walker { level, up, height: self.height.max(level.unsigned_abs()), ..self };
        if persist {
            next.long = true;
        } else {
            next.short += u32::from(!self.long);
            next.runs += 1;
            next.long = false;
        }
        next
    }

    fn finish(self, steps: u32) -> PathSignature {
        let short = self.short + u32::from(!self.long);
        PathSignature { runs: self.runs, short_runs: short, long_runs: self.runs - short, steps, height: self.height }
    }
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Exact law of `(R, V, L, H)` over excursions from 0 (both signs, fair first
/// step) with `L ≤ lmax` and `H ≤ height_cap`.
pub fn enum_excursions(p: &ModelParams, lmax: u32, height_cap: u32) -> Result<JointDist> {
    enum_excursions_with_budget(p, lmax, height_cap, DEFAULT_BUDGET)
}

pub fn enum_excursions_with_budget(p: &ModelParams, lmax: u32, height_cap: u32, budget: u64) -> Result<JointDist> {
    check_length(lmax)?;
    check_cap(height_cap, p)?;
    let mut budget = Budget::new(budget);
    let mut dist = JointDist::default();
    let mut front: HashMap<Walker, Rational> = HashMap::new();
    for up in [true, false] {
        let w = Walker { level: if up { 1 } else { -1 }, up, long: false, runs: 1, short: 0, height: 1 };
        front.insert(w, half());
    }
    for steps in 2..=lmax {
        let mut next: HashMap<Walker, Rational> = HashMap::new();
        budget.spend(2 * front.len() as u64)?;
        for (w, weight) in front {
            let stay = p.persistence(w.level.unsigned_abs());
            for (persist, pr) in [(true, stay.clone()), (false, Rational::one() - stay)] {
                let n = w.advance(persist);
                if n.height > height_cap {
                    continue;
                }
                let nw = &weight * pr;
                if n.level == 0 {
                    dist.add(n.finish(steps), nw);
                } else {
                    *next.entry(n).or_insert_with(Rational::zero) += nw;
                }
            }
        }
        front = next;
    }
    Ok(dist)
}

/// Every excursion path with its weight, by depth-first search.
pub fn excursion_paths(p: &ModelParams, lmax: u32, height_cap: u32) -> Result<Vec<(Vec<i8>, Rational)>> {
    check_length(lmax)?;
    check_cap(height_cap, p)?;
    let mut budget = Budget::new(DEFAULT_BUDGET);
    let mut out = Vec::new();
    let mut path = Vec::new();
    for first in [1i8, -1] {
        path.push(first);
        dfs(p, lmax, height_cap, i32::from(first), half(), &mut path, &mut out, &mut budget)?;
        path.pop();
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    p: &ModelParams,
    lmax: u32,
    cap: u32,
    level: i32,
    weight: Rational,
    path: &mut Vec<i8>,
    out: &mut Vec<(Vec<i8>, Rational)>,
    budget: &mut Budget,
) -> Result<()> {
    if level == 0 {
        out.push((path.clone(), weight));
        return Ok(());
    }
    if path.len() as u32 == lmax {
        return Ok(());
    }
    let last = *path.last().expect("path starts nonempty");
    let stay = p.persistence(level.unsigned_abs());
    for (step, pr) in [(last, stay.clone()), (-last, Rational::one() - stay)] {
        budget.spend(1)?;
        let next = level + i32::from(step);
        if next.unsigned_abs() > cap {
            continue;
        }
        path.push(step);
        dfs(p, lmax, cap, next, &weight * pr, path, out, budget)?;
        path.pop();
    }
    Ok(())
}

/// The law of [`enum_excursions`], built from [`excursion_paths`] and
/// [`count_path_stats`].
pub fn enum_excursions_by_paths(p: &ModelParams, lmax: u32, height_cap: u32) -> Result<JointDist> {
    let mut dist = JointDist::default();
    for (path, w) in excursion_paths(p, lmax, height_cap)? {
        dist.add(count_path_stats(&path)?, w);
    }
    Ok(dist)
}

/// One-sided first passage from `m` to `n` whose first two steps point
/// towards `n`.
///
/// Returns the weighted sum of `r^R y^V z^L` over such passages with
/// `L ≤ lmax`, and the exact total weight of the event over all lengths. The
/// fair first step is included in both, so their ratio is the conditional
/// generating function truncated at `z^lmax`.
pub fn enum_first_passage(m: u32, n: u32, p: &ModelParams, lmax: u32) -> Result<(Series3, Rational)> {
    check_length(lmax)?;
    if m.abs_diff(n) < 2 {
        return Err(Error::TooClose { m, n });
    }
    if m.max(n) > p.n {
        return Err(Error::IndexOutOfRange(format!("level {} above N = {}", m.max(n), p.n)));
    }
    let up = n > m;
    let d: i32 = if up { 1 } else { -1 };
    let (lo, hi) = (m.min(n) as i32, m.max(n) as i32);
    let start = half() * p.persistence((m as i32 + d) as u32);
    let mut budget = Budget::new(DEFAULT_BUDGET);
    let mut terms: Vec<(u32, u32, u32, Rational)> = Vec::new();
    let mut front: HashMap<Walker, Rational> = HashMap::new();
    let w0 = Walker { level: m as i32 + 2 * d, up, long: true, runs: 1, short: 0, height: 0 };
    if w0.level == n as i32 {
        terms.push((1, 0, 2, start.clone()));
    } else {
        front.insert(w0, start.clone());
    }
    for steps in 3..=lmax {
        let mut next: HashMap<Walker, Rational> = HashMap::new();
        budget.spend(2 * front.len() as u64)?;
        for (w, weight) in front {
            let stay = p.persistence(w.level as u32);
            for (persist, pr) in [(true, stay.clone()), (false, Rational::one() - stay)] {
                let nx = w.advance(persist);
                if nx.level < lo || nx.level > hi {
                    continue;
                }
                let nw = &weight * pr;
                if nx.level == n as i32 {
                    let s = nx.finish(steps);
                    terms.push((s.runs, s.short_runs, steps, nw));
                } else {
                    *next.entry(nx).or_insert_with(Rational::zero) += nw;
                }
            }
        }
        front = next;
    }
    let second = (m as i32 + 2 * d) as u32;
    let mass = if second == n {
        start
    } else {
        start * &band_hit(lo as u32, hi as u32, n, p)?[&(second, up)]
    };
    Ok((Series3::from_terms(terms, lmax), mass))
}

/// One failing cell of the runs symmetry check.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryCell {
    /// Half the excursion length.
    pub n: u32,
    /// Half the number of runs on the left-hand side.
    pub k: u32,
    /// Number of long runs.
    pub long_runs: u32,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Outcome of [`symmetry_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub a: Rational,
    pub n_max: u32,
    /// Cells with `2 ≤ n ≤ n_max` compared.
    pub cells_checked: usize,
    /// Cells with `n ≥ 2` where the identity fails.
    pub failures: Vec<SymmetryCell>,
    /// The `n = 1` cells, where the identity is not claimed.
    pub length_two: Vec<SymmetryCell>,
    /// For `a = 1/2`: whether `P(L=2n, R=2k) = P(L=2n, R=2n−2k)` for all
    /// `n ≥ 2`.
    pub narayana: Option<bool>,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.narayana != Some(false)
    }
}

fn homogeneous_law(a: &Rational, n_max: u32) -> Result<JointDist> {
    let p = ModelParams::new(a.clone(), a.clone(), 1, n_max + 1)?;
    enum_excursions(&p, 2 * n_max, n_max)
}

/// Checks `(1−a) P_a(L=2n, R=2k, U=ℓ) = a P_{1−a}(L=2n, R=2n−2k, U=ℓ)`
/// for `2 ≤ n ≤ n_max` by enumerating the homogeneous excursion laws for
/// `a` and `1 − a`.
pub fn symmetry_check(a: &Rational, n_max: u32) -> Result<SymmetryReport> {
    if !(2..=12).contains(&n_max) {
        return Err(Error::InvalidParams(format!("nMax = {n_max} outside 2..=12")));
    }
    let one = Rational::one();
    let b = &one - a;
    let law = |d: &JointDist| {
        let mut m: BTreeMap<(u32, u32, u32), Rational> = BTreeMap::new();
        for (s, w) in &d.mass {
            *m.entry((s.steps, s.runs, s.long_runs)).or_insert_with(Rational::zero) += w;
        }
        m
    };
    let pa = law(&homogeneous_law(a, n_max)?);
    let pb = law(&homogeneous_law(&b, n_max)?);
    let get = |m: &BTreeMap<(u32, u32, u32), Rational>, key| m.get(&key).cloned().unwrap_or_else(Rational::zero);
    let mut report = SymmetryReport {
        a: a.clone(),
        n_max,
        cells_checked: 0,
        failures: Vec::new(),
        length_two: Vec::new(),
        narayana: None,
    };
    for n in 1..=n_max {
        for k in 0..=n {
            for l in 0..=2 * n {
                let lhs = &b * get(&pa, (2 * n, 2 * k, l));
                let rhs = a * get(&pb, (2 * n, 2 * n - 2 * k, l));
                let cell = SymmetryCell { n, k, long_runs: l, lhs, rhs };
                if n == 1 {
                    if cell.lhs != cell.rhs {
                        report.length_two.push(cell);
                    }
                    continue;
                }
                report.cells_checked += 1;
                if cell.lhs != cell.rhs {
                    report.failures.push(cell);
                }
            }
        }
    }
    if *a == half() {
        let runs = |n: u32, r: u32| -> Rational {
            pa.iter().filter(|((l, rr, _), _)| *l == 2 * n && *rr == r).map(|(_, w)| w).sum()
        };
        let ok = (2..=n_max).all(|n| (0..=n).all(|k| runs(n, 2 * k) == runs(n, 2 * n - 2 * k)));
        report.narayana = Some(ok);
    }
    Ok(report)
}

/// CSV header matching [`csv_rows`].
pub const CSV_HEADER: [&str; 7] =
    ["runs", "shortRuns", "longRuns", "steps", "height", "probability_num", "probability_den"];

/// One record per signature, exact probability as numerator/denominator.
pub fn csv_rows(d: &JointDist) -> impl Iterator<Item = [String; 7]> + '_ {
    d.mass.iter().map(|(s, w)| {
        [
            s.runs.to_string(),
            s.short_runs.to_string(),
            s.long_runs.to_string(),
            s.steps.to_string(),
            s.height.to_string(),
            w.numer().to_string(),
            w.denom().to_string(),
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{k_n, Passage};
    use crate::ring::{rat, Ring, Vars};
    use num_traits::ToPrimitive;
    use crate::ruin::{height_dist, rho};

    const RUNS_PATH: &str = "D D U D U U D D D D U D U U U D U D D D U U D D U D D";
    const RUIN_PATH: &str = "D D U U D U U U U D D D D D U D U U U U U D U U";

    #[test]
    fn path_statistics() {
        let s = count_path_stats(&parse_path("UD").unwrap()).unwrap();
        assert_eq!((s.runs, s.short_runs, s.long_runs, s.steps, s.height), (2, 2, 0, 2, 1));
        let s = count_path_stats(&parse_path(RUNS_PATH).unwrap()).unwrap();
        assert_eq!((s.runs, s.short_runs, s.long_runs), (15, 7, 8));
        assert_eq!(count_path_stats(&[]), Err(Error::EmptyPath));
    }

    #[test]
    fn ruin_path_excursions() {
        let steps = parse_path(RUIN_PATH).unwrap();
        // Split at returns to 0 up to the last visit.
        let mut level = 0i32;
        let mut pieces = Vec::new();
        let mut cur = Vec::new();
        for &s in &steps {
            cur.push(s);
            level += i32::from(s);
            if level == 0 {
                pieces.push(std::mem::take(&mut cur));
            }
        }
        let stats: Vec<_> = pieces.iter().map(|p| count_path_stats(p).unwrap()).collect();
        assert_eq!(stats.iter().map(|s| s.runs).collect::<Vec<_>>(), [2, 2, 2, 4]);
        assert_eq!(stats.iter().map(|s| s.short_runs).collect::<Vec<_>>(), [0, 2, 0, 2]);
        assert_eq!(pieces.len(), 4);
        let meander = count_path_stats(&cur).unwrap();
        assert_eq!((meander.runs, meander.short_runs, meander.steps), (3, 1, 6));
    }

    #[test]
    fn length_two_and_four() {
        let a = rat(2, 7);
        let p = ModelParams::new(a.clone(), a.clone(), 1, 4).unwrap();
        let d = enum_excursions(&p, 4, 4).unwrap();
        let one = Rational::one();
        assert_eq!(d.marginal(|s| s.steps == 2 && s.runs == 2 && s.short_runs == 2), &one - &a);
        assert_eq!(d.marginal(|s| s.steps == 4 && s.runs == 2), &a * &a * (&one - &a));
    }

    #[test]
    fn sweep_matches_path_listing() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 2, 4).unwrap();
        assert_eq!(enum_excursions(&p, 14, 4).unwrap(), enum_excursions_by_paths(&p, 14, 4).unwrap());
        for (path, _) in excursion_paths(&p, 12, 3).unwrap() {
            let s = count_path_stats(&path).unwrap();
            assert_eq!(s.short_runs + s.long_runs, s.runs);
            assert!(s.short_runs + 2 * s.long_runs <= s.steps);
            assert!(s.steps % 2 == 0 && s.runs % 2 == 0);
        }
    }

    #[test]
    fn mass_approaches_height_law() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 3, 5).unwrap();
        let target = height_dist(&p).unwrap().le(5);
        let mut prev = Rational::zero();
        for l in [6, 10, 14, 18] {
            let t = enum_excursions(&p, l, 5).unwrap().total;
            assert!(t >= prev && t <= target);
            prev = t;
        }
        assert!((&target - &prev).to_f64().unwrap() < 0.05);
    }

    #[test]
    fn budget_is_enforced() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 3, 5).unwrap();
        assert_eq!(enum_excursions_with_budget(&p, 20, 5, 50), Err(Error::BudgetExceeded(50)));
    }

    #[test]
    fn k_n_against_enumeration() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 3, 5).unwrap();
        let lmax = 16;
        let enumerated = enum_excursions(&p, lmax, 5).unwrap().to_series(lmax);
        let scaled = k_n(Vars::series(lmax), &p).unwrap().scale(&height_dist(&p).unwrap().le(5));
        assert_eq!(scaled, enumerated);
    }

    #[test]
    fn passage_initial_cases() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 3, 6).unwrap();
        let (num, mass) = enum_first_passage(0, 2, &p, 10).unwrap();
        assert_eq!(num.div(&Series3::constant(mass, 10)).unwrap(), Series3::monomial(rat(1, 1), 1, 0, 2, 10));
        let (num, mass) = enum_first_passage(2, 0, &p, 10).unwrap();
        assert_eq!(num.div(&Series3::constant(mass, 10)).unwrap(), Series3::monomial(rat(1, 1), 1, 0, 2, 10));
    }

    #[test]
    fn passage_mass_from_rho() {
        let p = ModelParams::from_fracs((1, 3), (3, 5), 3, 6).unwrap();
        for (m, n) in [(0, 3), (1, 5), (2, 6), (5, 1), (6, 2), (4, 0)] {
            let (_, mass) = enum_first_passage(m, n, &p, 4).unwrap();
            let next = if n > m { m + 1 } else { m - 1 };
            let want = rho(m, n, &p).unwrap() * (Rational::one() - p.gamma(m) * p.gamma(next));
            assert_eq!(mass, want, "({m}, {n})");
        }
    }

    #[test]
    fn passage_series_against_closed_forms() {
        let lmax = 16;
        for (a, b, f) in [((1, 3), (3, 5), 3), ((3, 5), (1, 4), 2), ((1, 2), (1, 2), 1)] {
            let p = ModelParams::from_fracs(a, b, f, 6).unwrap();
            let pas = Passage::new(Vars::series(lmax), &p).unwrap();
            for (m, n) in [(0, 3), (1, 5), (2, 6), (3, 6), (0, 4), (5, 1), (6, 2), (4, 0), (6, 3), (3, 0)] {
                let (num, mass) = enum_first_passage(m, n, &p, lmax).unwrap();
                let g = pas.g(m, n).unwrap();
                assert_eq!(num, g.scale(&mass), "f = {f}, ({m}, {n})");
            }
        }
    }

    #[test]
    fn runs_symmetry() {
        for a in [rat(1, 3), rat(1, 2), rat(3, 4)] {
            let r = symmetry_check(&a, 5).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(!r.length_two.is_empty());
        }
        assert_eq!(symmetry_check(&rat(1, 2), 5).unwrap().narayana, Some(true));
        assert!(symmetry_check(&rat(1, 2), 13).is_err());
    }
}
