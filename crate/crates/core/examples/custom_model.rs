//! A user-defined performance function plugged into the optimizer.
//!
//! Two-component load `Y = capacity - (theta_1 * d_1 + (1 - theta_1) * d_2)`
//! with a fixed capacity; theta_1 splits the load between two noisy
//! channels of different spread. No analytic gradient is supplied, so the
//! objective falls back to finite differences.

use probcert::chernoff_opt::{
    certify_probability, minimize, ChernoffObjective, OptimizationSettings, PerformanceModel, ScenarioDistribution,
    ScenarioSet,
};
use probcert::ErrorSpec;

struct SplitLoad {
    capacity: f64,
}

impl PerformanceModel for SplitLoad {
    fn dim_theta(&self) -> usize {
        1
    }

    fn dim_delta(&self) -> usize {
        2
    }

    fn evaluate(&self, theta: &[f64], delta: &[f64]) -> f64 {
        let w = theta[0];
        let a = 1.0 + 0.2 * delta[0];
        let b = 1.0 + 0.6 * delta[1];
        self.capacity - (w * a + (1.0 - w) * b)
    }
}

fn main() -> probcert::Result<()> {
    let model = SplitLoad { capacity: 1.5 };
    let dist = ScenarioDistribution::Normal { mean: 0.0, std: 1.0, dim: 2 };
    let scenarios = ScenarioSet::generate(&dist, 4000, 5)?;
    let obj = ChernoffObjective::new(&model, &scenarios)?.with_finite_difference_fallback(true);

    let out = minimize(&obj, &OptimizationSettings { theta0: vec![0.5], ..Default::default() })?;
    println!(
        "weight on the quiet channel = {:.3}, lambda* = {:.3}, {:?} after {} iterations, gradient {:?}",
        out.theta_star[0], out.lambda_star, out.termination, out.iterations, out.metadata.gradient_source
    );

    let spec = ErrorSpec::new(0.01, 0.2, 0.05)?;
    for w in [0.5, out.theta_star[0]] {
        let cert = certify_probability(&model, &[w], &spec, dist.stream(99)?)?;
        println!("weight {w:.3}: overload probability ~ {:.4} (n = {})", cert.mu_hat, cert.n);
    }
    Ok(())
}
