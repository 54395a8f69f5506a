use probcert::chernoff_opt::{
    minimize, ChernoffObjective, OptimizationSettings, QuadraticWell, ScenarioDistribution, ScenarioSet, Termination,
};

fn well_scenarios() -> ScenarioSet {
    ScenarioSet::generate(&ScenarioDistribution::Normal { mean: 0.0, std: 0.5, dim: 1 }, 5000, 11).unwrap()
}

#[test]
fn converges_from_off_center_start() {
    let scenarios = well_scenarios();
    let obj = ChernoffObjective::new(&QuadraticWell, &scenarios).unwrap();
    let settings = OptimizationSettings { theta0: vec![0.3], ..Default::default() };
    let out = minimize(&obj, &settings).unwrap();
    assert_eq!(out.termination, Termination::GradientTol);
    assert!(out.theta_star[0].abs() <= 0.15, "{:?}", out.theta_star);
    // Population optimum is lambda = 1.5, but exp(lambda Y) has infinite
    // variance past lambda = 1, so the empirical optimum is noisy.
    assert!(out.lambda_star > 0.8 && out.lambda_star < 2.0, "{}", out.lambda_star);
    assert!(out.objective_trace.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn start_above_trivial_bound_drifts_to_small_lambda() {
    // At theta = 0.8 the surrogate exceeds 1 for every lambda, so descent
    // heads for the trivial bound at lambda -> 0.
    let scenarios = well_scenarios();
    let obj = ChernoffObjective::new(&QuadraticWell, &scenarios).unwrap();
    let settings = OptimizationSettings { theta0: vec![0.8], max_iters: 50, ..Default::default() };
    let out = minimize(&obj, &settings).unwrap();
    assert!(out.objective_trace[0] > 1.0);
    assert!(out.lambda_star < 0.05);
    assert!(*out.objective_trace.last().unwrap() >= 1.0);
}
