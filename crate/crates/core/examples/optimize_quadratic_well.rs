//! Minimize Pr{|theta - Delta| >= 1} for Delta ~ N(0, 0.5^2) through the
//! empirical Chernoff surrogate, then certify the optimum on fresh draws.

use probcert::chernoff_opt::{OptimizationSettings, Pipeline, QuadraticWell, ScenarioCount, ScenarioDistribution};
use probcert::ErrorSpec;

fn main() -> probcert::Result<()> {
    let spec = ErrorSpec::new(0.05, 0.2, 0.05)?;
    let dist = ScenarioDistribution::Normal { mean: 0.0, std: 0.5, dim: 1 };
    let pipeline = Pipeline {
        model: &QuadraticWell,
        distribution: &dist,
        count: ScenarioCount::Fixed(5000),
        seed: 7,
        settings: OptimizationSettings { theta0: vec![0.4], ..Default::default() },
        certify: Some(spec),
    };
    let out = pipeline.run()?;

    for (i, (g, l)) in out.objective_trace.iter().zip(&out.lambda_trace).enumerate().step_by(5) {
        println!("iter {i:>3}  lambda = {l:.4}  surrogate = {g:.6}");
    }
    println!(
        "theta* = {:.4}, lambda* = {:.4} after {} iterations ({:?})",
        out.theta_star[0], out.lambda_star, out.iterations, out.termination
    );
    if let Some(c) = &out.certificate {
        println!("Pr{{Y <= 0}} at theta* ~ {:.4} (n = {}, delta = {:.4})", c.mu_hat, c.n, c.delta_achieved);
    }
    println!("population value at 0: {:.4}", 0.045_500_263_896_358_41);
    Ok(())
}
