//! Monte Carlo check that planned estimates meet the mixed criterion at
//! the promised rate.
//!
//! `cargo run --release --example coverage_experiment -- [trials] [seed]`

use probcert::verification::{coverage_experiment, coverage_threshold, COVERAGE_MUS};
use probcert::ErrorSpec;

fn main() -> probcert::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let spec = ErrorSpec::new(0.05, 0.2, 0.05)?;
    let report = coverage_experiment(&spec, &COVERAGE_MUS, trials, seed)?;
    println!("allowance {:.4}", coverage_threshold(spec.delta(), trials));
    println!("{:>6} {:>10} {:>10} {:>10}", "mu", "violate", "|err|<ea", "|err|<er*mu");
    for row in &report.summary {
        println!("{:>6} {:>10.4} {:>10.4} {:>10.4}", row.point[0], row.values[0], row.values[1], row.values[2]);
    }
    println!("passed: {}", report.passed);
    Ok(())
}
