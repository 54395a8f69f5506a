//! Certified estimation of the mean of a `[0, 1]`-bounded random variable.
//!
//! Two workflows are supported. [`estimate_with_plan`] sizes the sample from
//! an [`ErrorSpec`] before drawing anything; [`estimate_from_batch`] takes an
//! already collected batch and reports the risk its length certifies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use crate::tail_bounds::{achieved_confidence, minimum_sample_size, validate_tolerances, ErrorSpec};

/// A stream of i.i.d. draws of `X`.
///
/// Implementations are single-owner. Values are not range-checked here;
/// the estimators reject anything outside `[0, 1]`.
pub trait SampleSource {
    /// Next draw, or `None` when the source is exhausted.
    fn next_sample(&mut self) -> Option<f64>;

    fn draws_made(&self) -> u64;
}

/// Bernoulli(p) draws from a seeded ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct BernoulliSource {
    p: f64,
    seed: u64,
    rng: ChaCha8Rng,
    draws: u64,
}

impl BernoulliSource {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("Bernoulli parameter {p} is not in [0, 1]")));
        }
        Ok(Self { p, seed, rng: ChaCha8Rng::seed_from_u64(seed), draws: 0 })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl SampleSource for BernoulliSource {
    fn next_sample(&mut self) -> Option<f64> {
        self.draws += 1;
        Some(if self.rng.random::<f64>() < self.p { 1.0 } else { 0.0 })
    }

    fn draws_made(&self) -> u64 {
        self.draws
    }
}

/// Draws produced by a closure over a seeded ChaCha8 stream.
pub struct SeededSource<F> {
    seed: u64,
    rng: ChaCha8Rng,
    draw: F,
    draws: u64,
}

impl<F> SeededSource<F>
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    pub fn new(seed: u64, draw: F) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed), draw, draws: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl<F> SampleSource for SeededSource<F>
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    fn next_sample(&mut self) -> Option<f64> {
        self.draws += 1;
        Some((self.draw)(&mut self.rng))
    }

    fn draws_made(&self) -> u64 {
        self.draws
    }
}

/// Replays a fixed list of values, then reports exhaustion.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    values: Vec<f64>,
    pos: usize,
}

impl ReplaySource {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, pos: 0 }
    }
}

impl SampleSource for ReplaySource {
    fn next_sample(&mut self) -> Option<f64> {
        let v = self.values.get(self.pos).copied();
        if v.is_some() {
            self.pos += 1;
        }
        v
    }

    fn draws_made(&self) -> u64 {
        self.pos as u64
    }
}

/// The same value forever.
#[derive(Debug, Clone)]
pub struct ConstantSource {
    value: f64,
    draws: u64,
}

impl ConstantSource {
    pub fn new(value: f64) -> Self {
        Self { value, draws: 0 }
    }
}

impl SampleSource for ConstantSource {
    fn next_sample(&mut self) -> Option<f64> {
        self.draws += 1;
        Some(self.value)
    }

    fn draws_made(&self) -> u64 {
        self.draws
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Planned,
    PostHoc,
}

/// An estimate together with the mixed-criterion guarantee it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mu_hat: f64,
    pub n: u64,
    pub eps_a: f64,
    pub eps_r: f64,
    /// `min(1, 2 exp(n g(eps_a, eps_a/eps_r)))`.
    pub delta_achieved: f64,
    /// False when `delta_achieved` was capped at 1.
    pub guaranteed: bool,
    pub kind: CertificateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const BOUNDARY_NOTE: &str =
    "estimate is on the boundary of [0, 1]; the guarantee assumes the true mean lies in the open interval (0, 1)";

impl Certificate {
    fn issue(mu_hat: f64, n: u64, eps_a: f64, eps_r: f64, kind: CertificateKind) -> Result<Self> {
        let conf = achieved_confidence(n, eps_a, eps_r)?;
        let note = (mu_hat == 0.0 || mu_hat == 1.0).then(|| BOUNDARY_NOTE.to_string());
        Ok(Self { mu_hat, n, eps_a, eps_r, delta_achieved: conf.delta, guaranteed: conf.guaranteed, kind, note })
    }

    /// Whether this estimate meets the mixed criterion for a given true mean.
    pub fn covers(&self, mu: f64) -> bool {
        mixed_criterion_holds(self.mu_hat, mu, self.eps_a, self.eps_r)
    }
}

/// `|mu_hat - mu| < eps_a`.
pub fn within_absolute(mu_hat: f64, mu: f64, eps_a: f64) -> bool {
    (mu_hat - mu).abs() < eps_a
}

/// `|mu_hat - mu| < eps_r * mu`.
pub fn within_relative(mu_hat: f64, mu: f64, eps_r: f64) -> bool {
    (mu_hat - mu).abs() < eps_r * mu
}

/// The union event: within the absolute tolerance or within the relative one.
pub fn mixed_criterion_holds(mu_hat: f64, mu: f64, eps_a: f64, eps_r: f64) -> bool {
    within_absolute(mu_hat, mu, eps_a) || within_relative(mu_hat, mu, eps_r)
}

/// Compensated mean of a nonempty slice.
pub fn stable_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("cannot average an empty sequence"));
    }
    let sum: NeumaierSum = values.iter().copied().collect();
    Ok(sum.total() / values.len() as f64)
}

fn check_unit(index: usize, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::SampleOutOfRange { index, value })
    }
}

/// Draws exactly `minimum_sample_size(spec).n` values and averages them.
pub fn estimate_with_plan<S: SampleSource + ?Sized>(source: &mut S, spec: &ErrorSpec) -> Result<Certificate> {
    let plan = minimum_sample_size(spec)?;
    let mut sum = NeumaierSum::new();
    for i in 0..plan.n {
        let value = source.next_sample().ok_or(Error::SourceExhausted { needed: plan.n, drawn: i })?;
        check_unit(i as usize, value)?;
        sum += value;
    }
    let mu_hat = sum.total() / plan.n as f64;
    Certificate::issue(mu_hat, plan.n, spec.eps_a(), spec.eps_r(), CertificateKind::Planned)
}

/// Post-hoc certificate for a fixed batch: only the risk is derived.
pub fn estimate_from_batch(values: &[f64], eps_a: f64, eps_r: f64) -> Result<Certificate> {
    validate_tolerances(eps_a, eps_r)?;
    if values.is_empty() {
        return Err(Error::Empty("batch has no values"));
    }
    for (i, &v) in values.iter().enumerate() {
        check_unit(i, v)?;
    }
    let mu_hat = stable_mean(values)?;
    Certificate::issue(mu_hat, values.len() as u64, eps_a, eps_r, CertificateKind::PostHoc)
}

/// A parsed batch value and the 1-based line it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchValue {
    pub line: usize,
    pub value: f64,
}

/// Parses one decimal value per line. Blank lines are skipped; anything
/// else that is not a number in `[0, 1]` is rejected with its line number.
pub fn parse_batch(text: &str) -> Result<Vec<BatchValue>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = trimmed
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("`{trimmed}` is not a decimal number") })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Parse { line, message: format!("value {value} lies outside [0, 1]") });
        }
        out.push(BatchValue { line, value });
    }
    if out.is_empty() {
        return Err(Error::Empty("batch file contains no values"));
    }
    Ok(out)
}
