//! Post-hoc certificate for values that were already collected.
//!
//! Pass a file with one value in [0, 1] per line, or run without arguments
//! to use a synthetic batch.

use probcert::estimator::{estimate_from_batch, parse_batch};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => (0..800).map(|i| format!("{}\n", if i % 9 == 0 { 1.0 } else { 0.0 })).collect(),
    };
    let values: Vec<f64> = parse_batch(&text)?.into_iter().map(|b| b.value).collect();

    for (eps_a, eps_r) in [(0.05, 0.2), (0.02, 0.2), (0.01, 0.5)] {
        let cert = estimate_from_batch(&values, eps_a, eps_r)?;
        let status = if cert.guaranteed { "" } else { "  (vacuous)" };
        println!(
            "eps_a = {eps_a:<5} eps_r = {eps_r:<4} mu_hat = {:.4}  n = {}  delta = {:.4}{status}",
            cert.mu_hat, cert.n, cert.delta_achieved
        );
    }
    Ok(())
}
