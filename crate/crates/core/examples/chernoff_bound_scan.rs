//! The surrogate as a function of lambda for fixed theta, next to the
//! empirical failure frequency it bounds.

use probcert::chernoff_opt::{ChernoffObjective, PerformanceModel, ScenarioDistribution, ScenarioSet, UniformGap};

fn main() -> probcert::Result<()> {
    let dist = ScenarioDistribution::Uniform { low: 0.0, high: 1.0, dim: 1 };
    let scenarios = ScenarioSet::generate(&dist, 10_000, 3)?;
    let obj = ChernoffObjective::new(&UniformGap, &scenarios)?;

    for theta in [0.5, 0.8, 0.95] {
        let freq = scenarios.rows().filter(|d| UniformGap.evaluate(&[theta], d) <= 0.0).count() as f64
            / scenarios.len() as f64;
        let grid: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
        let bound = obj.chernoff_upper_bound(&[theta], &grid)?;
        println!("theta = {theta}: failure frequency {freq:.4}, best bound over grid {bound:.4}");
        for lambda in [0.5, 2.0, 5.0, 10.0] {
            println!("    lambda = {lambda:>4}: {:.5}", obj.empirical_moment(lambda, &[theta])?);
        }
    }
    Ok(())
}
