//! Joint gradient descent on `(nu, theta)` with `lambda = exp(nu)`.

use serde::{Deserialize, Serialize};

use super::model::PerformanceModel;
use super::objective::{ChernoffObjective, GradientSource, MomentGradient};
use crate::error::{dimension_error, Error, Result};
use crate::estimator::Certificate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizationSettings {
    /// Starting point; an empty vector means all zeros.
    pub theta0: Vec<f64>,
    /// Starting `ln lambda`.
    pub nu0: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub backtrack_shrink: f64,
    pub armijo_c: f64,
    pub initial_step: f64,
    pub lambda_cap: f64,
}

impl Default for OptimizationSettings {
    fn default() -> Self {
        Self {
            theta0: Vec::new(),
            nu0: 0.0,
            max_iters: 500,
            grad_tol: 1e-8,
            backtrack_shrink: 0.5,
            armijo_c: 1e-4,
            initial_step: 1.0,
            lambda_cap: 50.0,
        }
    }
}

impl OptimizationSettings {
    pub fn validate(&self, dim_theta: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSettings(msg));
        if !self.theta0.is_empty() && self.theta0.len() != dim_theta {
            return Err(dimension_error("theta0", dim_theta, self.theta0.len()));
        }
        if self.theta0.iter().any(|v| !v.is_finite()) || !self.nu0.is_finite() {
            return bad("theta0 and nu0 must be finite".into());
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return bad(format!("grad_tol = {} must be positive", self.grad_tol));
        }
        if !(self.backtrack_shrink > 0.0 && self.backtrack_shrink < 1.0) {
            return bad(format!("backtrack_shrink = {} must lie in (0, 1)", self.backtrack_shrink));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad(format!("armijo_c = {} must lie in (0, 1)", self.armijo_c));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad(format!("initial_step = {} must be positive", self.initial_step));
        }
        if !(self.lambda_cap > 0.0 && self.lambda_cap.is_finite()) {
            return bad(format!("lambda_cap = {} must be positive", self.lambda_cap));
        }
        if self.nu0.exp() > self.lambda_cap {
            return bad(format!("initial lambda {} exceeds lambda_cap {}", self.nu0.exp(), self.lambda_cap));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTol,
    MaxIters,
    StepUnderflow,
}

/// Provenance attached to an optimization run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetadata {
    pub n_scenarios: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_spec: Option<crate::tail_bounds::ErrorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification_seed: Option<u64>,
    pub gradient_source: Option<GradientSource>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationOutcome {
    pub theta_star: Vec<f64>,
    pub lambda_star: f64,
    /// Objective after each accepted step, starting with the initial value.
    pub objective_trace: Vec<f64>,
    /// `lambda` along the same iterates.
    pub lambda_trace: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    /// Fresh-sample certificate of `Pr{Y(theta_star, delta) <= 0}`, if requested.
    pub certificate: Option<Certificate>,
    pub metadata: RunMetadata,
}

impl OptimizationOutcome {
    /// `iteration,lambda,objective` rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,lambda,objective\n");
        for (i, (l, f)) in self.lambda_trace.iter().zip(&self.objective_trace).enumerate() {
            out.push_str(&format!("{i},{l:?},{f:?}\n"));
        }
        out
    }
}

struct Iterate {
    nu: f64,
    theta: Vec<f64>,
    eval: MomentGradient,
}

impl Iterate {
    fn lambda(&self) -> f64 {
        self.nu.exp()
    }

    /// Gradient in `(nu, theta)` coordinates.
    fn gradient(&self) -> (f64, &[f64]) {
        (self.lambda() * self.eval.d_lambda, &self.eval.d_theta)
    }
}

/// Backtracking (Armijo) gradient descent on the objective.
///
/// `lambda` is reparameterised as `exp(nu)` and `nu` is projected onto
/// `nu <= ln(lambda_cap)`. A `nu` component that pushes against the cap is
/// dropped from the search direction and from the stopping test.
pub fn minimize<M: PerformanceModel + ?Sized>(
    obj: &ChernoffObjective<'_, M>,
    settings: &OptimizationSettings,
) -> Result<OptimizationOutcome> {
    let dim = obj.model().dim_theta();
    settings.validate(dim)?;
    let nu_cap = settings.lambda_cap.ln();
    let theta0 = if settings.theta0.is_empty() { vec![0.0; dim] } else { settings.theta0.clone() };

    let start_error = || Error::NonFiniteStart { lambda: settings.nu0.exp(), theta: theta0.clone() };
    let eval = match obj.empirical_moment_gradient(settings.nu0.exp(), &theta0) {
        Ok(e) if e.value.is_finite() => e,
        Ok(_) | Err(Error::Overflow { .. }) => return Err(start_error()),
        Err(e) => return Err(e),
    };
    let gradient_source = eval.source;
    let mut x = Iterate { nu: settings.nu0, theta: theta0, eval };
    let mut objective_trace = vec![x.eval.value];
    let mut lambda_trace = vec![x.lambda()];

    // shrink until the trial step is ~1e-16 of the initial one
    let max_backtracks = ((1e-16f64).ln() / settings.backtrack_shrink.ln()).ceil() as usize;

    let mut iterations = 0;
    let termination = loop {
        let (mut d_nu, d_theta) = x.gradient();
        if x.nu >= nu_cap && d_nu < 0.0 {
            d_nu = 0.0;
        }
        let direction: Vec<f64> = std::iter::once(-d_nu).chain(d_theta.iter().map(|g| -g)).collect();
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= settings.grad_tol {
            break Termination::GradientTol;
        }
        if iterations >= settings.max_iters {
            break Termination::MaxIters;
        }

        let mut step = settings.initial_step;
        let mut any_finite = false;
        let mut overflowed = false;
        let mut accepted = None;
        for _ in 0..=max_backtracks {
            let nu = (x.nu + step * direction[0]).min(nu_cap);
            let theta: Vec<f64> = x.theta.iter().zip(&direction[1..]).map(|(t, d)| t + step * d).collect();
            if nu == x.nu && theta == x.theta {
                break;
            }
            match obj.empirical_moment(nu.exp(), &theta) {
                Ok(value) if value.is_finite() => {
                    any_finite = true;
                    // directional term uses the projected displacement
                    let slope = -direction[0] * (nu - x.nu)
                        - direction[1..]
                            .iter()
                            .zip(theta.iter().zip(&x.theta))
                            .map(|(d, (t, t0))| d * (t - t0))
                            .sum::<f64>();
                    if value <= x.eval.value + settings.armijo_c * slope {
                        accepted = Some((nu, theta));
                        break;
                    }
                }
                Ok(_) | Err(Error::Overflow { .. }) => overflowed = true,
                Err(e) => return Err(e),
            }
            step *= settings.backtrack_shrink;
        }

        let Some((nu, theta)) = accepted else {
            if overflowed && !any_finite {
                return Err(Error::SearchOverflow { lambda: x.lambda(), theta: x.theta });
            }
            break Termination::StepUnderflow;
        };
        let eval = obj.empirical_moment_gradient(nu.exp(), &theta)?;
        x = Iterate { nu, theta, eval };
        iterations += 1;
        objective_trace.push(x.eval.value);
        lambda_trace.push(x.lambda());
    };

    Ok(OptimizationOutcome {
        lambda_star: x.lambda(),
        theta_star: x.theta,
        objective_trace,
        lambda_trace,
        iterations,
        termination,
        certificate: None,
        metadata: RunMetadata {
            n_scenarios: obj.scenarios().len(),
            scenario_seed: obj.scenarios().seed(),
            gradient_source: Some(gradient_source),
            notes: match gradient_source {
                GradientSource::FiniteDifference => {
                    vec!["theta-gradient by central differences; kinks in Y enter as approximation error".into()]
                }
                GradientSource::Analytic => Vec::new(),
            },
            ..RunMetadata::default()
        },
    })
}
