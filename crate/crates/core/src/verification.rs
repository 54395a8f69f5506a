//! Executable checks of the tail-bound machinery.
//!
//! Monotonicity and domination facts about `g(eps, mu)` are scanned on
//! grids; tail bounds are compared with exact binomial tails; the coverage
//! guarantee and the Chernoff domination are checked by simulation.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chernoff_opt::{ChernoffObjective, FailureIndicator, PerformanceModel, ScenarioDistribution, ScenarioSet};
use crate::error::{Error, Result};
use crate::estimator::{estimate_with_plan, within_absolute, within_relative, BernoulliSource, SampleSource};
use crate::seed::derive_seed;
use crate::sum::NeumaierSum;
use crate::tail_bounds::{
    hoeffding_exponent, hoeffding_exponent_deps, hoeffding_exponent_dmu, minimum_sample_size, ErrorSpec,
};

/// Slack for strict inequalities evaluated in floating point.
pub const SCAN_TOLERANCE: f64 = 1e-12;

/// Minimum distance of scan grids from open-interval endpoints.
pub const MIN_OFFSET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// Tail bounds versus exact binomial tails.
    L1,
    /// Monotonicity of `g(+-eps, .)` in `mu`.
    L2,
    /// `g(eps, mu)` against `g(-eps, mu)` on either side of 1/2.
    L3,
    /// Monotonicity of `mu -> g(+-eps mu, mu)`.
    L4,
    /// Uniform lower-tail bound for `mu <= eps_a/eps_r`.
    L5,
    /// Uniform upper-tail bound for `mu > eps_a/eps_r`.
    L6,
    Coverage,
    Domination,
}

/// A checked point and the values that decided it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub check: String,
    pub point: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub lemma_id: LemmaId,
    pub grid_description: String,
    pub points_checked: usize,
    /// Smallest observed slack of the tested inequality; negative beyond
    /// the tolerance means a violation.
    pub min_margin: f64,
    pub violations: Vec<ScanPoint>,
    /// Per-point figures worth reporting even when they pass (coverage rates).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub summary: Vec<ScanPoint>,
    pub passed: bool,
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "[{}] {:?}: {} ({} points, min margin {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.lemma_id,
            self.grid_description,
            self.points_checked,
            self.min_margin
        )?;
        for s in &self.summary {
            writeln!(f, "    {} at {:?}: {:?}", s.check, s.point, s.values)?;
        }
        for v in self.violations.iter().take(10) {
            writeln!(f, "    violation {} at {:?}: {:?}", v.check, v.point, v.values)?;
        }
        if self.violations.len() > 10 {
            writeln!(f, "    ... {} more", self.violations.len() - 10)?;
        }
        Ok(())
    }
}

/// Collects margins and violations while a scan runs.
struct Tally {
    checked: usize,
    min_margin: f64,
    violations: Vec<ScanPoint>,
}

impl Tally {
    fn new() -> Self {
        Self { checked: 0, min_margin: f64::INFINITY, violations: Vec::new() }
    }

    /// Records `margin >= -tolerance` as the required inequality.
    fn require(&mut self, check: &str, point: &[f64], margin: f64, tolerance: f64, values: &[f64]) {
        self.checked += 1;
        self.min_margin = self.min_margin.min(margin);
        if margin.is_nan() || margin < -tolerance {
            self.violations.push(ScanPoint { check: check.into(), point: point.to_vec(), values: values.to_vec() });
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.min_margin = self.min_margin.min(other.min_margin);
        self.violations.extend(other.violations);
    }

    fn report(self, lemma_id: LemmaId, grid_description: String, summary: Vec<ScanPoint>) -> ScanReport {
        let passed = self.violations.is_empty();
        ScanReport {
            lemma_id,
            grid_description,
            points_checked: self.checked,
            min_margin: self.min_margin,
            violations: self.violations,
            summary,
            passed,
        }
    }
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc.total());
    }
    out
}

fn check_binomial_args(n: u64, mu: f64, k: i64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("binomial tail needs n >= 1".into()));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!("binomial tail needs mu in (0, 1), got {mu}")));
    }
    if k < 0 || k as u64 > n {
        return Err(Error::Domain(format!("k = {k} is outside 0..={n}")));
    }
    Ok(())
}

fn binomial_sum(n: u64, mu: f64, js: impl Iterator<Item = u64>) -> f64 {
    let lf = ln_factorials(n);
    let (ln_p, ln_q) = (mu.ln(), (-mu).ln_1p());
    let mut acc = NeumaierSum::new();
    for j in js {
        let ln_term = lf[n as usize] - lf[j as usize] - lf[(n - j) as usize] + j as f64 * ln_p + (n - j) as f64 * ln_q;
        acc += ln_term.exp();
    }
    acc.total().min(1.0)
}

/// `Pr{S <= k}` for `S ~ Binomial(n, mu)`, summed over `j = 0..=k` in
/// ascending order from log-space terms.
pub fn binomial_tail_exact(n: u64, mu: f64, k: i64) -> Result<f64> {
    check_binomial_args(n, mu, k)?;
    Ok(binomial_sum(n, mu, 0..=k as u64))
}

/// `Pr{S >= k}`, summed directly over `j = k..=n`.
pub fn binomial_upper_tail_exact(n: u64, mu: f64, k: i64) -> Result<f64> {
    check_binomial_args(n, mu, k)?;
    Ok(binomial_sum(n, mu, k as u64..=n))
}

/// `Pr{mean <= x}` where the event boundary is rounded outward so that the
/// returned tail is never smaller than the exact one.
fn lower_event_tail(n: u64, mu: f64, x: f64) -> f64 {
    let k = (n as f64 * x + 1e-9).floor();
    if k < 0.0 {
        0.0
    } else {
        binomial_sum(n, mu, 0..=(k as u64).min(n))
    }
}

/// `Pr{mean >= x}`, rounded outward like [`lower_event_tail`].
fn upper_event_tail(n: u64, mu: f64, x: f64) -> f64 {
    let k = (n as f64 * x - 1e-9).ceil().max(0.0);
    if k > n as f64 {
        0.0
    } else {
        binomial_sum(n, mu, k as u64..=n)
    }
}

/// Grid for the monotonicity/domination scans: `eps` plus a step and an
/// endpoint offset applied to every open interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub eps: f64,
    pub step: f64,
    pub offset: f64,
}

impl GridSpec {
    pub fn new(eps: f64) -> Self {
        Self { eps, step: 1e-3, offset: MIN_OFFSET }
    }

    fn points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (a, b) = (lo + self.offset, hi - self.offset);
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let x = a + i as f64 * self.step;
            if x > b + 1e-15 {
                break;
            }
            out.push(x.min(b));
            i += 1;
        }
        out
    }
}

fn scan_monotone<F, D>(tally: &mut Tally, label: &str, mus: &[f64], increasing: bool, value: F, slope: D) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let sign = if increasing { 1.0 } else { -1.0 };
    let mut prev: Option<(f64, f64)> = None;
    for &mu in mus {
        let v = value(mu)?;
        let d = slope(mu)?;
        tally.require(&format!("{label} derivative"), &[mu], sign * d, SCAN_TOLERANCE, &[d]);
        if let Some((pm, pv)) = prev {
            tally.require(&format!("{label} difference"), &[pm, mu], sign * (v - pv), SCAN_TOLERANCE, &[pv, v]);
        }
        prev = Some((mu, v));
    }
    Ok(())
}

/// Scans the L2, L3 or L4 statement on its open intervals.
pub fn lemma_scan(lemma_id: LemmaId, grid: &GridSpec) -> Result<ScanReport> {
    let eps = grid.eps;
    if !(grid.step > 0.0 && grid.step.is_finite()) {
        return Err(Error::InvalidGrid(format!("step = {} must be positive", grid.step)));
    }
    if grid.offset.is_nan() || grid.offset < MIN_OFFSET {
        return Err(Error::InvalidGrid(format!("offset = {} must be at least {MIN_OFFSET}", grid.offset)));
    }
    let eps_limit = match lemma_id {
        LemmaId::L2 | LemmaId::L3 => 0.5,
        LemmaId::L4 => 1.0,
        other => return Err(Error::InvalidGrid(format!("{other:?} is not a grid scan"))),
    };
    if !(eps > 0.0 && eps < eps_limit) {
        return Err(Error::InvalidGrid(format!("eps = {eps} must lie in (0, {eps_limit})")));
    }

    let mut tally = Tally::new();
    let g = hoeffding_exponent;
    match lemma_id {
        LemmaId::L2 => {
            let intervals = [
                ("g(+eps) increasing", eps, (0.0, 0.5 - eps), true),
                ("g(+eps) decreasing", eps, (0.5, 1.0 - eps), false),
                ("g(-eps) increasing", -eps, (eps, 0.5), true),
                ("g(-eps) decreasing", -eps, (0.5 + eps, 1.0), false),
            ];
            for (label, e, (lo, hi), inc) in intervals {
                let mus = grid.points(lo, hi);
                scan_monotone(&mut tally, label, &mus, inc, |m| g(e, m), |m| hoeffding_exponent_dmu(e, m))?;
            }
        }
        LemmaId::L3 => {
            for mu in grid.points(eps, 0.5) {
                let (up, down) = (g(eps, mu)?, g(-eps, mu)?);
                tally.require("g(+eps) > g(-eps)", &[mu], up - down, SCAN_TOLERANCE, &[up, down]);
            }
            for mu in grid.points(0.5, 1.0 - eps) {
                let (up, down) = (g(eps, mu)?, g(-eps, mu)?);
                tally.require("g(+eps) < g(-eps)", &[mu], down - up, SCAN_TOLERANCE, &[up, down]);
            }
        }
        LemmaId::L4 => {
            // d/dmu g(s mu, mu) = s dg/deps + dg/dmu
            for (label, s, hi) in [("g(eps mu, mu)", eps, 1.0 / (1.0 + eps)), ("g(-eps mu, mu)", -eps, 1.0)] {
                let mus = grid.points(0.0, hi);
                scan_monotone(
                    &mut tally,
                    label,
                    &mus,
                    false,
                    |m| g(s * m, m),
                    |m| Ok(s * hoeffding_exponent_deps(s * m, m)? + hoeffding_exponent_dmu(s * m, m)?),
                )?;
            }
        }
        _ => unreachable!(),
    }
    let desc = format!("eps = {eps}, step = {}, offset = {}", grid.step, grid.offset);
    Ok(tally.report(lemma_id, desc, Vec::new()))
}

/// Compares exact binomial tails with the uniform bounds of the L5/L6
/// statements at each `mu`.
///
/// L5: `Pr{mean <= mu - eps_a} <= exp(n g(-eps_a, eps_a/eps_r))` for `0 < mu <= eps_a/eps_r`.
/// L6: `Pr{mean >= (1 + eps_r) mu} <= exp(n g(eps_a, eps_a/eps_r))` for `eps_a/eps_r < mu < 1`.
pub fn lemma56_check(lemma_id: LemmaId, spec: &ErrorSpec, mu_grid: &[f64], n: u64) -> Result<ScanReport> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if mu_grid.is_empty() {
        return Err(Error::InvalidGrid("mu grid is empty".into()));
    }
    let (eps_a, eps_r) = (spec.eps_a(), spec.eps_r());
    let worst = spec.worst_case_mean();
    let in_range = |mu: f64| match lemma_id {
        LemmaId::L5 => mu > 0.0 && mu <= worst,
        LemmaId::L6 => mu > worst && mu < 1.0,
        _ => false,
    };
    if !matches!(lemma_id, LemmaId::L5 | LemmaId::L6) {
        return Err(Error::InvalidGrid(format!("{lemma_id:?} is not a uniform-bound check")));
    }
    if let Some(bad) = mu_grid.iter().find(|&&m| !in_range(m)) {
        return Err(Error::InvalidGrid(format!("mu = {bad} lies outside the {lemma_id:?} range")));
    }

    let bound = match lemma_id {
        LemmaId::L5 => (n as f64 * hoeffding_exponent(-eps_a, worst)?).exp(),
        _ => (n as f64 * hoeffding_exponent(eps_a, worst)?).exp(),
    };
    let mut tally = Tally::new();
    for &mu in mu_grid {
        let tail = match lemma_id {
            LemmaId::L5 => lower_event_tail(n, mu, mu - eps_a),
            _ => upper_event_tail(n, mu, (1.0 + eps_r) * mu),
        };
        tally.require("exact tail <= uniform bound", &[mu], bound - tail, 0.0, &[tail, bound]);
    }
    let desc = format!("eps_a = {eps_a}, eps_r = {eps_r}, n = {n}, {} mu points", mu_grid.len());
    Ok(tally.report(lemma_id, desc, Vec::new()))
}

/// Evenly spaced interior points of `(lo, hi]` (or `(lo, hi)` when `closed_hi` is false).
pub fn interior_grid(lo: f64, hi: f64, count: usize, closed_hi: bool) -> Vec<f64> {
    let parts = if closed_hi { count } else { count + 1 };
    (1..=count).map(|i| lo + (hi - lo) * i as f64 / parts as f64).collect()
}

/// Exact assertion `exp(n g(+-eps, mu)) >= Pr{tail}` at `points` random
/// `(n <= max_n, mu, eps)` triples, both tails where their domain allows.
pub fn lemma1_random_check(points: usize, max_n: u64, seed: u64) -> Result<ScanReport> {
    if points == 0 || max_n == 0 {
        return Err(Error::InvalidGrid("need at least one point and max_n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<(u64, f64, f64, f64)> = (0..points)
        .map(|_| {
            let n = rng.random_range(1..=max_n);
            let mu = rng.random_range(0.01..0.99);
            let up = rng.random_range(0.02..0.98) * (1.0 - mu);
            let down = rng.random_range(0.02..0.98) * mu;
            (n, mu, up, down)
        })
        .collect();
    let tallies: Vec<Result<Tally>> = triples
        .par_iter()
        .map(|&(n, mu, up, down)| {
            let mut t = Tally::new();
            let bound = (n as f64 * hoeffding_exponent(up, mu)?).exp();
            let tail = upper_event_tail(n, mu, mu + up);
            t.require("upper", &[n as f64, mu, up], bound - tail, 0.0, &[tail, bound]);
            let bound = (n as f64 * hoeffding_exponent(-down, mu)?).exp();
            let tail = lower_event_tail(n, mu, mu - down);
            t.require("lower", &[n as f64, mu, down], bound - tail, 0.0, &[tail, bound]);
            Ok(t)
        })
        .collect();
    let mut tally = Tally::new();
    for t in tallies {
        tally.merge(t?);
    }
    let desc = format!("{points} random (n <= {max_n}, mu, eps) triples, seed {seed}");
    Ok(tally.report(LemmaId::L1, desc, Vec::new()))
}

/// Three-sigma allowance on a violation rate with nominal level `delta`.
pub fn coverage_threshold(delta: f64, trials: u64) -> f64 {
    delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt()
}

/// Runs `trials` planned estimates on Bernoulli(mu) for each mu and checks
/// that the rate of mixed-criterion failures stays within the allowance.
pub fn coverage_experiment(spec: &ErrorSpec, mu_grid: &[f64], trials: u64, seed: u64) -> Result<ScanReport> {
    if trials == 0 {
        return Err(Error::Domain("coverage experiment needs at least one trial".into()));
    }
    if mu_grid.is_empty() {
        return Err(Error::InvalidGrid("mu grid is empty".into()));
    }
    if let Some(bad) = mu_grid.iter().find(|&&m| !(m > 0.0 && m < 1.0)) {
        return Err(Error::InvalidGrid(format!("mu = {bad} is not in (0, 1)")));
    }
    let threshold = coverage_threshold(spec.delta(), trials);
    let counts: Vec<Result<(u64, u64, u64)>> = mu_grid
        .par_iter()
        .enumerate()
        .map(|(idx, &mu)| {
            let mut source = BernoulliSource::new(mu, derive_seed(seed, idx as u64))?;
            let (mut failures, mut abs_ok, mut rel_ok) = (0u64, 0u64, 0u64);
            for _ in 0..trials {
                let cert = estimate_with_plan(&mut source, spec)?;
                let a = within_absolute(cert.mu_hat, mu, spec.eps_a());
                let r = within_relative(cert.mu_hat, mu, spec.eps_r());
                abs_ok += u64::from(a);
                rel_ok += u64::from(r);
                failures += u64::from(!(a || r));
            }
            debug_assert_eq!(source.draws_made(), trials * minimum_sample_size(spec)?.n);
            Ok((failures, abs_ok, rel_ok))
        })
        .collect();

    let mut tally = Tally::new();
    let mut summary = Vec::new();
    for (&mu, c) in mu_grid.iter().zip(counts) {
        let (failures, abs_ok, rel_ok) = c?;
        let rate = failures as f64 / trials as f64;
        tally.require("violation rate <= allowance", &[mu], threshold - rate, 0.0, &[rate, threshold]);
        summary.push(ScanPoint {
            check: "violation rate, absolute hits, relative hits".into(),
            point: vec![mu],
            values: vec![rate, abs_ok as f64 / trials as f64, rel_ok as f64 / trials as f64],
        });
    }
    let desc = format!(
        "eps_a = {}, eps_r = {}, delta = {}, {trials} trials per mu, seed {seed}, allowance {threshold:.5}",
        spec.eps_a(),
        spec.eps_r(),
        spec.delta()
    );
    Ok(tally.report(LemmaId::Coverage, desc, summary))
}

/// Sampling box for the domination experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationBox {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for DominationBox {
    fn default() -> Self {
        Self { lambda_min: 1e-3, lambda_max: 1.9, theta_min: -1.0, theta_max: 1.0 }
    }
}

/// At random `(lambda, theta)` checks `exp(-lambda Y) >= 1{Y <= 0}` on every
/// scenario and `g(lambda, theta) >= p_hat - 3 se` against fresh draws.
pub fn domination_experiment<M: PerformanceModel + ?Sized>(
    model: &M,
    distribution: &ScenarioDistribution,
    spec: &ErrorSpec,
    points: usize,
    bounds: &DominationBox,
    seed: u64,
) -> Result<ScanReport> {
    if points == 0 {
        return Err(Error::InvalidGrid("need at least one point".into()));
    }
    if !(bounds.lambda_min > 0.0 && bounds.lambda_min <= bounds.lambda_max && bounds.theta_min <= bounds.theta_max) {
        return Err(Error::InvalidGrid(format!("bad sampling box {bounds:?}")));
    }
    let n = usize::try_from(minimum_sample_size(spec)?.n).map_err(|_| Error::Domain("sample size too large".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (bounds.lambda_min.ln(), bounds.lambda_max.ln());
    let mut tally = Tally::new();

    for p in 0..points {
        let lambda = if ln_lo == ln_hi { bounds.lambda_min } else { rng.random_range(ln_lo..ln_hi).exp() };
        let theta: Vec<f64> = (0..model.dim_theta())
            .map(|_| {
                if bounds.theta_min == bounds.theta_max {
                    bounds.theta_min
                } else {
                    rng.random_range(bounds.theta_min..bounds.theta_max)
                }
            })
            .collect();
        let scenarios = ScenarioSet::generate(distribution, n, derive_seed(seed, 2 * p as u64 + 1))?;

        let mut point = vec![lambda];
        point.extend_from_slice(&theta);
        for row in scenarios.rows() {
            let y = model.evaluate(&theta, row);
            let kernel = (-lambda * y).exp();
            let indicator = if y <= 0.0 { 1.0 } else { 0.0 };
            tally.require("exp(-lambda Y) >= 1{Y <= 0}", &point, kernel - indicator, 0.0, &[y, kernel]);
        }

        let obj = ChernoffObjective::new(model, &scenarios)?;
        let moment = obj.empirical_moment(lambda, &theta)?;
        let mut fresh =
            FailureIndicator::new(model, &theta, distribution.stream(derive_seed(seed, 2 * p as u64 + 2))?)?;
        let mut hits = NeumaierSum::new();
        for _ in 0..n {
            hits += fresh.next_sample().unwrap_or(f64::NAN);
        }
        let p_hat = hits.total() / n as f64;
        let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
        tally.require("moment >= p_hat - 3 se", &point, moment - (p_hat - 3.0 * se), 0.0, &[moment, p_hat, se]);
    }
    let desc = format!(
        "{points} points, lambda in [{}, {}] (log-uniform), theta in [{}, {}], {n} scenarios, seed {seed}",
        bounds.lambda_min, bounds.lambda_max, bounds.theta_min, bounds.theta_max
    );
    Ok(tally.report(LemmaId::Domination, desc, Vec::new()))
}

/// The mean grid used by the standard coverage suite.
pub const COVERAGE_MUS: [f64; 7] = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95];

/// Every grid scan and exact-tail check, with the standard parameters.
pub fn lemma_suite(seed: u64) -> Result<Vec<ScanReport>> {
    let mut reports = vec![lemma1_random_check(1000, 200, seed)?];
    for eps in [0.05, 0.1, 0.2, 0.3] {
        reports.push(lemma_scan(LemmaId::L2, &GridSpec::new(eps))?);
        reports.push(lemma_scan(LemmaId::L3, &GridSpec::new(eps))?);
    }
    for eps in [0.1, 0.3, 0.5, 0.9] {
        reports.push(lemma_scan(LemmaId::L4, &GridSpec::new(eps))?);
    }
    let spec = ErrorSpec::new(0.05, 0.2, 0.05)?;
    let n = minimum_sample_size(&spec)?.n;
    let worst = spec.worst_case_mean();
    reports.push(lemma56_check(LemmaId::L5, &spec, &interior_grid(0.0, worst, 10, true), n)?);
    reports.push(lemma56_check(LemmaId::L6, &spec, &interior_grid(worst, 1.0, 10, false), n)?);
    Ok(reports)
}
