//! Probability minimization through the empirical Chernoff objective.
//!
//! `Pr{Y(theta, delta) <= 0} <= inf_{lambda > 0} E[exp(-lambda Y)]`, so the
//! failure probability is pushed down by minimizing a scenario average of
//! `exp(-lambda Y)` over `(lambda, theta)`. The scenario count comes from
//! the same sample-size rule used by the estimator, and the final
//! `theta` is certified on fresh draws that the optimizer never saw.

mod descent;
mod model;
mod objective;
mod scenario;

pub use descent::{minimize, OptimizationOutcome, OptimizationSettings, RunMetadata, Termination};
pub use model::{Affine, ModelId, PerformanceModel, QuadraticWell, RegistryModel, UniformGap};
pub use objective::{ChernoffObjective, GradientSource, MomentGradient};
pub use scenario::{DistributionStream, Replay, ScenarioDistribution, ScenarioSet, ScenarioSource};

use crate::error::{dimension_error, Error, Result};
use crate::estimator::{estimate_with_plan, Certificate, SampleSource};
use crate::seed::derive_seed;
use crate::tail_bounds::{minimum_sample_size, ErrorSpec};

/// Scenario count for the objective: the estimator's sample size for `spec`.
pub fn scenario_sample_size(spec: &ErrorSpec) -> Result<u64> {
    Ok(minimum_sample_size(spec)?.n)
}

/// Turns a scenario stream into failure indicators `1{Y(theta, delta) <= 0}`.
pub struct FailureIndicator<'a, M: ?Sized, S> {
    model: &'a M,
    theta: &'a [f64],
    scenarios: S,
    buf: Vec<f64>,
    draws: u64,
}

impl<'a, M: PerformanceModel + ?Sized, S: ScenarioSource> FailureIndicator<'a, M, S> {
    pub fn new(model: &'a M, theta: &'a [f64], scenarios: S) -> Result<Self> {
        if scenarios.dim() != model.dim_delta() {
            return Err(dimension_error("scenario source", model.dim_delta(), scenarios.dim()));
        }
        if theta.len() != model.dim_theta() {
            return Err(dimension_error("theta", model.dim_theta(), theta.len()));
        }
        let buf = vec![0.0; model.dim_delta()];
        Ok(Self { model, theta, scenarios, buf, draws: 0 })
    }
}

impl<M: PerformanceModel + ?Sized, S: ScenarioSource> SampleSource for FailureIndicator<'_, M, S> {
    fn next_sample(&mut self) -> Option<f64> {
        if !self.scenarios.next_scenario(&mut self.buf) {
            return None;
        }
        self.draws += 1;
        let y = self.model.evaluate(self.theta, &self.buf);
        // NaN maps outside [0, 1] so the estimator rejects it
        Some(if y.is_nan() {
            f64::NAN
        } else if y <= 0.0 {
            1.0
        } else {
            0.0
        })
    }

    fn draws_made(&self) -> u64 {
        self.draws
    }
}

/// Certified estimate of `Pr{Y(theta, delta) <= 0}` from
/// `minimum_sample_size(spec).n` fresh scenarios.
pub fn certify_probability<M, S>(model: &M, theta: &[f64], spec: &ErrorSpec, scenarios: S) -> Result<Certificate>
where
    M: PerformanceModel + ?Sized,
    S: ScenarioSource,
{
    let mut source = FailureIndicator::new(model, theta, scenarios)?;
    estimate_with_plan(&mut source, spec)
}

/// How many scenarios the objective is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioCount {
    Fixed(usize),
    /// Sized by [`scenario_sample_size`].
    FromSpec(ErrorSpec),
}

/// Scenario generation, optimization and fresh-sample certification in one run.
///
/// Scenarios are drawn with `seed`; certification draws use an independent
/// stream derived from it.
#[derive(Debug, Clone)]
pub struct Pipeline<'a, M: ?Sized> {
    pub model: &'a M,
    pub distribution: &'a ScenarioDistribution,
    pub count: ScenarioCount,
    pub seed: u64,
    pub settings: OptimizationSettings,
    pub certify: Option<ErrorSpec>,
}

impl<M: PerformanceModel + ?Sized> Pipeline<'_, M> {
    pub fn certification_seed(&self) -> u64 {
        derive_seed(self.seed, 1)
    }

    pub fn scenarios(&self) -> Result<ScenarioSet> {
        if self.distribution.dim() != self.model.dim_delta() {
            return Err(dimension_error("scenario distribution", self.model.dim_delta(), self.distribution.dim()));
        }
        let n = match self.count {
            ScenarioCount::Fixed(n) => n,
            ScenarioCount::FromSpec(spec) => usize::try_from(scenario_sample_size(&spec)?)
                .map_err(|_| Error::Domain("scenario count does not fit in memory".into()))?,
        };
        ScenarioSet::generate(self.distribution, n, self.seed)
    }

    pub fn run(&self) -> Result<OptimizationOutcome> {
        let scenarios = self.scenarios()?;
        self.run_on(&scenarios)
    }

    /// Optimizes over the given scenarios; certification still uses fresh draws.
    pub fn run_on(&self, scenarios: &ScenarioSet) -> Result<OptimizationOutcome> {
        let obj = ChernoffObjective::new(self.model, scenarios)?;
        let mut outcome = minimize(&obj, &self.settings)?;
        if let ScenarioCount::FromSpec(spec) = self.count {
            outcome.metadata.scenario_spec = Some(spec);
        }
        if let Some(spec) = self.certify {
            let seed = self.certification_seed();
            let stream = self.distribution.stream(seed)?;
            outcome.certificate = Some(certify_probability(self.model, &outcome.theta_star, &spec, stream)?);
            outcome.metadata.certification_seed = Some(seed);
        }
        Ok(outcome)
    }
}
