//! Planned estimation: draw exactly as many samples as the spec needs.

use probcert::estimator::{estimate_with_plan, BernoulliSource, SeededSource};
use probcert::ErrorSpec;
use rand::Rng;

fn main() -> probcert::Result<()> {
    let spec = ErrorSpec::new(0.02, 0.2, 0.05)?;

    let mut coin = BernoulliSource::new(0.3, 42)?;
    let cert = estimate_with_plan(&mut coin, &spec)?;
    println!("Bernoulli(0.3): mu_hat = {:.4} from n = {}, delta = {:.4}", cert.mu_hat, cert.n, cert.delta_achieved);
    println!("  criterion holds for the true mean: {}", cert.covers(0.3));

    // Any [0, 1]-valued simulation works; here the fraction of hits in
    // ten throws at the unit quarter-disc.
    let mut sim = SeededSource::new(7, |rng| {
        let hits = (0..10)
            .filter(|_| {
                let (x, y): (f64, f64) = (rng.random(), rng.random());
                x * x + y * y <= 1.0
            })
            .count();
        hits as f64 / 10.0
    });
    let cert = estimate_with_plan(&mut sim, &spec)?;
    println!("pi/4 ~ {:.4} (true {:.4})", cert.mu_hat, std::f64::consts::FRAC_PI_4);
    Ok(())
}
