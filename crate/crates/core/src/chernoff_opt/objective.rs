//! The empirical Chernoff objective `g(lambda, theta) = mean_i exp(-lambda Y(theta, delta_i))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::PerformanceModel;
use super::scenario::ScenarioSet;
use crate::error::{dimension_error, Error, Result};
use crate::sum::NeumaierSum;

/// Rows per parallel work unit. Partial sums are merged in chunk order, so
/// the result does not depend on the number of worker threads.
const CHUNK: usize = 512;

/// Largest exponent `x` with `exp(x)` finite.
const MAX_EXPONENT: f64 = 709.782_712_893_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientSource {
    Analytic,
    FiniteDifference,
}

/// Value and partial derivatives of the objective at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentGradient {
    pub value: f64,
    pub d_lambda: f64,
    pub d_theta: Vec<f64>,
    pub source: GradientSource,
}

pub struct ChernoffObjective<'a, M: PerformanceModel + ?Sized> {
    model: &'a M,
    scenarios: &'a ScenarioSet,
    fd_fallback: bool,
}

impl<'a, M: PerformanceModel + ?Sized> ChernoffObjective<'a, M> {
    /// Finite-difference fallback is enabled by default.
    pub fn new(model: &'a M, scenarios: &'a ScenarioSet) -> Result<Self> {
        if scenarios.dim() != model.dim_delta() {
            return Err(dimension_error("scenario rows", model.dim_delta(), scenarios.dim()));
        }
        Ok(Self { model, scenarios, fd_fallback: true })
    }

    pub fn with_finite_difference_fallback(mut self, enabled: bool) -> Self {
        self.fd_fallback = enabled;
        self
    }

    pub fn model(&self) -> &M {
        self.model
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        self.scenarios
    }

    fn check_point(&self, lambda: f64, theta: &[f64]) -> Result<()> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda = {lambda} must be positive and finite")));
        }
        if theta.len() != self.model.dim_theta() {
            return Err(dimension_error("theta", self.model.dim_theta(), theta.len()));
        }
        Ok(())
    }

    fn weight(&self, lambda: f64, theta: &[f64], i: usize) -> Result<(f64, f64)> {
        let y = self.model.evaluate(theta, self.scenarios.row(i));
        let exponent = -lambda * y;
        if !y.is_finite() || exponent > MAX_EXPONENT {
            return Err(Error::Overflow { scenario: i, exponent });
        }
        Ok((y, exponent.exp()))
    }

    /// Runs `f` over fixed-size chunks in parallel and returns the per-chunk
    /// results in chunk order; the first error by scenario index wins.
    fn map_chunks<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(std::ops::Range<usize>) -> Result<T> + Sync,
    {
        let n = self.scenarios.len();
        let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
        let parts: Vec<Result<T>> = starts.par_iter().map(|&s| f(s..(s + CHUNK).min(n))).collect();
        parts.into_iter().collect()
    }

    /// `mean_i exp(-lambda Y(theta, delta_i))`.
    pub fn empirical_moment(&self, lambda: f64, theta: &[f64]) -> Result<f64> {
        self.check_point(lambda, theta)?;
        let parts = self.map_chunks(|range| {
            let mut acc = NeumaierSum::new();
            for i in range {
                acc += self.weight(lambda, theta, i)?.1;
            }
            Ok(acc)
        })?;
        let mut total = NeumaierSum::new();
        for p in &parts {
            total.merge(p);
        }
        Ok(total.total() / self.scenarios.len() as f64)
    }

    /// Value and gradient. `d_lambda = -mean(Y e^{-lambda Y})`,
    /// `d_theta_j = -lambda mean(dY/dtheta_j e^{-lambda Y})`.
    ///
    /// Uses the model's analytic `dY/dtheta` when available, otherwise
    /// central differences of the objective in each `theta_j` with step
    /// `1e-6 (1 + |theta_j|)`.
    pub fn empirical_moment_gradient(&self, lambda: f64, theta: &[f64]) -> Result<MomentGradient> {
        self.check_point(lambda, theta)?;
        let analytic = self.model.gradient_theta(theta, self.scenarios.row(0)).is_some();
        if !analytic && !self.fd_fallback {
            return Err(Error::MissingGradient);
        }
        let dim = theta.len();
        let parts = self.map_chunks(|range| {
            let mut value = NeumaierSum::new();
            let mut d_lambda = NeumaierSum::new();
            let mut d_theta = vec![NeumaierSum::new(); if analytic { dim } else { 0 }];
            for i in range {
                let (y, w) = self.weight(lambda, theta, i)?;
                value += w;
                d_lambda += -y * w;
                if analytic {
                    let dy = self.model.gradient_theta(theta, self.scenarios.row(i)).ok_or(Error::MissingGradient)?;
                    if dy.len() != dim {
                        return Err(dimension_error("model gradient", dim, dy.len()));
                    }
                    for (acc, g) in d_theta.iter_mut().zip(&dy) {
                        *acc += -lambda * g * w;
                    }
                }
            }
            Ok((value, d_lambda, d_theta))
        })?;

        let n = self.scenarios.len() as f64;
        let mut value = NeumaierSum::new();
        let mut d_lambda = NeumaierSum::new();
        let mut d_theta_acc = vec![NeumaierSum::new(); if analytic { dim } else { 0 }];
        for (v, dl, dt) in &parts {
            value.merge(v);
            d_lambda.merge(dl);
            for (acc, p) in d_theta_acc.iter_mut().zip(dt) {
                acc.merge(p);
            }
        }

        let (d_theta, source) = if analytic {
            (d_theta_acc.iter().map(|s| s.total() / n).collect(), GradientSource::Analytic)
        } else {
            (self.finite_difference_theta(lambda, theta)?, GradientSource::FiniteDifference)
        };
        Ok(MomentGradient { value: value.total() / n, d_lambda: d_lambda.total() / n, d_theta, source })
    }

    fn finite_difference_theta(&self, lambda: f64, theta: &[f64]) -> Result<Vec<f64>> {
        let mut probe = theta.to_vec();
        let mut out = Vec::with_capacity(theta.len());
        for j in 0..theta.len() {
            let h = 1e-6 * (1.0 + theta[j].abs());
            probe[j] = theta[j] + h;
            let up = self.empirical_moment(lambda, &probe)?;
            probe[j] = theta[j] - h;
            let down = self.empirical_moment(lambda, &probe)?;
            probe[j] = theta[j];
            out.push((up - down) / (2.0 * h));
        }
        Ok(out)
    }

    /// Smallest objective value over a grid of `lambda`, an empirical
    /// stand-in for `inf_{lambda > 0} E[exp(-lambda Y)]`.
    pub fn chernoff_upper_bound(&self, theta: &[f64], lambda_grid: &[f64]) -> Result<f64> {
        if lambda_grid.is_empty() {
            return Err(Error::Empty("lambda grid is empty"));
        }
        let mut best = f64::INFINITY;
        for &lambda in lambda_grid {
            best = best.min(self.empirical_moment(lambda, theta)?);
        }
        Ok(best)
    }
}
