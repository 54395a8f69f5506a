//! Sample sizes for a few mixed absolute/relative error specs, and the
//! confidence a smaller budget would actually buy.
//!
//! `cargo run --example plan_sample_size`

use probcert::tail_bounds::{achieved_confidence, minimum_sample_size, ErrorSpec};

fn main() -> probcert::Result<()> {
    println!("{:>8} {:>8} {:>8} {:>8} {:>12}", "eps_a", "eps_r", "delta", "n", "delta(n)");
    for (eps_a, eps_r, delta) in [(0.05, 0.2, 0.05), (0.02, 0.2, 0.05), (0.01, 0.1, 0.01), (0.001, 0.05, 1e-3)] {
        let plan = minimum_sample_size(&ErrorSpec::new(eps_a, eps_r, delta)?)?;
        let achieved = achieved_confidence(plan.n, eps_a, eps_r)?;
        println!("{eps_a:>8} {eps_r:>8} {delta:>8} {:>8} {:>12.6}", plan.n, achieved.delta);
    }

    let budget = 300;
    let c = achieved_confidence(budget, 0.05, 0.2)?;
    println!("\nwith only {budget} samples at (0.05, 0.2): delta = {:.4}", c.delta);

    // Every violated constraint is reported at once.
    if let Err(e) = ErrorSpec::new(0.5, 0.2, 1.5) {
        println!("rejected: {e}");
    }
    Ok(())
}
