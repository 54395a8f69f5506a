use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use probcert::estimator::{estimate_with_plan, stable_mean, ConstantSource};
use probcert::tail_bounds::ErrorSpec;
use probcert::verification::{binomial_tail_exact, binomial_upper_tail_exact};

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// `Pr{S <= k}` for `k = 0..=n`, `S ~ Bin(n, mu)`, in exact rational arithmetic.
fn lower_tails_rational(n: u64, mu: &BigRational) -> Vec<BigRational> {
    let q = BigRational::one() - mu;
    let mut choose = BigInt::one();
    let mut total = BigRational::zero();
    let mut tails = Vec::with_capacity(n as usize + 1);
    for j in 0..=n {
        if j > 0 {
            choose = choose * BigInt::from(n - j + 1) / BigInt::from(j);
        }
        total += BigRational::from_integer(choose.clone()) * mu.pow(j as i32) * q.pow((n - j) as i32);
        tails.push(total.clone());
    }
    tails
}

fn close(got: f64, exact: f64) -> bool {
    (got - exact).abs() <= 1e-13 * exact + 1e-300
}

#[test]
fn binomial_tails_match_rationals() {
    for n in 1..=30u64 {
        for mu in [0.01, 0.1, 0.3, 0.5, 0.77, 0.99] {
            let tails = lower_tails_rational(n, &rational(mu));
            for k in 0..=n {
                let exact = tails[k as usize].to_f64().unwrap();
                let lower = binomial_tail_exact(n, mu, k as i64).unwrap();
                assert!(close(lower, exact), "lower n={n} mu={mu} k={k}: {lower} vs {exact}");

                let upper_exact = match k {
                    0 => 1.0,
                    _ => (BigRational::one() - &tails[k as usize - 1]).to_f64().unwrap(),
                };
                let upper = binomial_upper_tail_exact(n, mu, k as i64).unwrap();
                assert!(close(upper, upper_exact), "upper n={n} mu={mu} k={k}: {upper} vs {upper_exact}");
            }
        }
    }
}

#[test]
fn fair_coin_tail_at_seven_of_ten() {
    assert!(close(binomial_upper_tail_exact(10, 0.5, 7).unwrap(), 176.0 / 1024.0));
    assert!(close(binomial_upper_tail_exact(10, 0.5, 8).unwrap(), 56.0 / 1024.0));
}

#[test]
fn stable_mean_of_alternating_magnitudes() {
    let values: Vec<f64> = (0..1_000_000).map(|i| if i % 2 == 0 { 1e-8 } else { 1.0 }).collect();
    let half = BigRational::from_integer(BigInt::from(500_000));
    let exact = (half.clone() * rational(1e-8) + half) / BigRational::from_integer(BigInt::from(1_000_000));
    let exact = exact.to_f64().unwrap();
    let got = stable_mean(&values).unwrap();
    assert!(((got - exact) / exact).abs() <= 1e-15, "{got} vs {exact}");
}

#[test]
fn constant_source_gives_exact_mean() {
    let spec = ErrorSpec::new(0.05, 0.2, 0.05).unwrap();
    let cert = estimate_with_plan(&mut ConstantSource::new(0.7), &spec).unwrap();
    assert_eq!(cert.mu_hat, 0.7);
    assert_eq!(cert.n, 577);
    assert!(cert.delta_achieved < 0.05);
}
