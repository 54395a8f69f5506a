//! Hoeffding exponents, tail bounds and sample sizes for the mixed
//! absolute/relative error criterion.
//!
//! For i.i.d. samples in `[0, 1]` with mean `mu`, the sample mean over `n`
//! draws satisfies
//!
//! ```text
//! Pr{ mean >= mu + eps } <= exp(n * g( eps, mu))
//! Pr{ mean <= mu - eps } <= exp(n * g(-eps, mu))
//! ```
//!
//! where `g(eps, mu) = (mu+eps) ln(mu/(mu+eps)) + (1-mu-eps) ln((1-mu)/(1-mu-eps))`.
//! Requiring `|mean - mu| < eps_a` or `|mean - mu| < eps_r * mu` with
//! probability above `1 - delta` reduces to `2 exp(n g(eps_a, eps_a/eps_r)) < delta`
//! whenever `eps_a/eps_r + eps_a <= 1/2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(1 + x) ln(1 + x) - x`, accurate for small `|x|`.
///
/// Non-negative for `x > -1`, zero only at `x = 0`.
fn entropy_gap(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_{k>=2} (-1)^k x^k / (k (k-1))
        let mut power = x * x;
        let mut acc = 0.0;
        for k in 2..64u32 {
            let k = f64::from(k);
            let term = power / (k * (k - 1.0));
            acc += term;
            if term.abs() <= 1e-18 * acc.abs() {
                break;
            }
            power *= -x;
        }
        acc
    } else if x == -1.0 {
        1.0
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

/// `x - ln(1 + x)`, accurate for small `|x|`.
fn log_gap(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_{k>=2} (-1)^k x^k / k
        let mut power = x * x;
        let mut acc = 0.0;
        for k in 2..64u32 {
            let term = power / f64::from(k);
            acc += term;
            if term.abs() <= 1e-18 * acc.abs() {
                break;
            }
            power *= -x;
        }
        acc
    } else {
        x - x.ln_1p()
    }
}

fn check_exponent_domain(eps: f64, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!("mu = {mu} must lie in (0, 1)")));
    }
    let shifted = mu + eps;
    if !(eps.is_finite() && shifted > 0.0 && shifted < 1.0) {
        return Err(Error::Domain(format!("mu + eps = {shifted} must lie in (0, 1) (mu = {mu}, eps = {eps})")));
    }
    Ok(())
}

/// The Hoeffding exponent `g(eps, mu)` for either sign of `eps`.
///
/// Evaluated as `-mu * h(eps/mu) - (1-mu) * h(-eps/(1-mu))` with
/// `h(x) = (1+x) ln(1+x) - x`, which avoids the O(eps) cancellation of the
/// two-logarithm form. Returns exactly `0.0` at `eps == 0`.
pub fn hoeffding_exponent(eps: f64, mu: f64) -> Result<f64> {
    check_exponent_domain(eps, mu)?;
    if eps == 0.0 {
        return Ok(0.0);
    }
    let rest = 1.0 - mu;
    Ok(-mu * entropy_gap(eps / mu) - rest * entropy_gap(-eps / rest))
}

/// `dg/dmu = ln[mu (1-mu-eps) / ((mu+eps)(1-mu))] + eps/mu + eps/(1-mu)`.
pub fn hoeffding_exponent_dmu(eps: f64, mu: f64) -> Result<f64> {
    check_exponent_domain(eps, mu)?;
    if eps == 0.0 {
        return Ok(0.0);
    }
    Ok(log_gap(eps / mu) - log_gap(-eps / (1.0 - mu)))
}

/// `dg/deps = ln[mu (1-mu-eps) / ((mu+eps)(1-mu))]`.
pub fn hoeffding_exponent_deps(eps: f64, mu: f64) -> Result<f64> {
    check_exponent_domain(eps, mu)?;
    Ok((-eps / (1.0 - mu)).ln_1p() - (eps / mu).ln_1p())
}

fn check_count(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("sample count n must be at least 1".into()));
    }
    Ok(())
}

/// Bound on `Pr{mean >= mu + eps}`; requires `0 < eps < 1 - mu < 1`.
pub fn upper_tail_bound(n: u64, eps: f64, mu: f64) -> Result<f64> {
    check_count(n)?;
    if !(eps > 0.0 && mu > 0.0 && eps < 1.0 - mu) {
        return Err(Error::Domain(format!("upper tail needs 0 < eps < 1 - mu < 1, got eps = {eps}, mu = {mu}")));
    }
    Ok((n as f64 * hoeffding_exponent(eps, mu)?).exp())
}

/// Bound on `Pr{mean <= mu - eps}`; requires `0 < eps < mu < 1`.
pub fn lower_tail_bound(n: u64, eps: f64, mu: f64) -> Result<f64> {
    check_count(n)?;
    if !(eps > 0.0 && eps < mu && mu < 1.0) {
        return Err(Error::Domain(format!("lower tail needs 0 < eps < mu < 1, got eps = {eps}, mu = {mu}")));
    }
    Ok((n as f64 * hoeffding_exponent(-eps, mu)?).exp())
}

/// A violated hypothesis on `(eps_a, eps_r, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum SpecViolation {
    EpsAOutOfRange {
        eps_a: f64,
    },
    EpsROutOfRange {
        eps_r: f64,
    },
    DeltaOutOfRange {
        delta: f64,
    },
    /// `eps_a/eps_r + eps_a` exceeds one half.
    RatioConstraint {
        value: f64,
    },
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecViolation::EpsAOutOfRange { eps_a } => write!(f, "eps_a = {eps_a} is not in (0, 1)"),
            SpecViolation::EpsROutOfRange { eps_r } => write!(f, "eps_r = {eps_r} is not in (0, 1)"),
            SpecViolation::DeltaOutOfRange { delta } => write!(f, "delta = {delta} is not in (0, 1)"),
            SpecViolation::RatioConstraint { value } => {
                write!(f, "eps_a/eps_r + eps_a = {value} exceeds 1/2")
            }
        }
    }
}

fn unit_open(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn tolerance_violations(eps_a: f64, eps_r: f64) -> Vec<SpecViolation> {
    let mut out = Vec::new();
    if !unit_open(eps_a) {
        out.push(SpecViolation::EpsAOutOfRange { eps_a });
    }
    if !unit_open(eps_r) {
        out.push(SpecViolation::EpsROutOfRange { eps_r });
    } else if eps_a.is_finite() {
        let value = eps_a / eps_r + eps_a;
        if value > 0.5 {
            out.push(SpecViolation::RatioConstraint { value });
        }
    }
    out
}

/// Checks the `(eps_a, eps_r)` pair on its own, for uses that carry no `delta`.
pub fn validate_tolerances(eps_a: f64, eps_r: f64) -> Result<()> {
    let v = tolerance_violations(eps_a, eps_r);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(v))
    }
}

/// Builds an [`ErrorSpec`], reporting every violated condition at once.
pub fn validate_spec(eps_a: f64, eps_r: f64, delta: f64) -> Result<ErrorSpec> {
    let mut v = tolerance_violations(eps_a, eps_r);
    if !unit_open(delta) {
        v.push(SpecViolation::DeltaOutOfRange { delta });
    }
    if v.is_empty() {
        Ok(ErrorSpec { eps_a, eps_r, delta })
    } else {
        Err(Error::InvalidSpec(v))
    }
}

/// Mixed-criterion parameters: absolute tolerance, relative tolerance, risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ErrorSpec {
    eps_a: f64,
    eps_r: f64,
    delta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    eps_a: f64,
    eps_r: f64,
    delta: f64,
}

impl TryFrom<RawSpec> for ErrorSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        validate_spec(raw.eps_a, raw.eps_r, raw.delta)
    }
}

impl ErrorSpec {
    pub fn new(eps_a: f64, eps_r: f64, delta: f64) -> Result<Self> {
        validate_spec(eps_a, eps_r, delta)
    }

    pub fn eps_a(&self) -> f64 {
        self.eps_a
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The mean `eps_a / eps_r` at which both tolerances coincide.
    pub fn worst_case_mean(&self) -> f64 {
        self.eps_a / self.eps_r
    }
}

/// The least sample count satisfying the strict sample-size inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub n: u64,
    pub spec: ErrorSpec,
    /// `g(eps_a, eps_a/eps_r)`, strictly negative.
    pub worst_case_exponent: f64,
    /// Right-hand side of the sample-size inequality; `n` is the least
    /// integer strictly above it.
    pub threshold: f64,
}

/// `eps_r ln(2/delta) / [(eps_a + eps_a eps_r) ln(1+eps_r) + (eps_r - eps_a - eps_a eps_r) ln(1 - eps_a eps_r/(eps_r - eps_a))]`.
pub fn sample_size_threshold(spec: &ErrorSpec) -> f64 {
    let (a, r) = (spec.eps_a, spec.eps_r);
    let denom = (a + a * r) * r.ln_1p() + (r - a - a * r) * (-(a * r) / (r - a)).ln_1p();
    r * (std::f64::consts::LN_2 - spec.delta.ln()) / denom
}

fn raw_confidence(n: u64, exponent: f64) -> f64 {
    2.0 * (n as f64 * exponent).exp()
}

/// Smallest `n` with `2 exp(n g(eps_a, eps_a/eps_r)) < delta`.
///
/// Starts from `floor(threshold) + 1` and then nudges by one in either
/// direction if rounding put the candidate on the wrong side of `delta`.
pub fn minimum_sample_size(spec: &ErrorSpec) -> Result<SamplePlan> {
    let spec = validate_spec(spec.eps_a, spec.eps_r, spec.delta)?;
    let exponent = hoeffding_exponent(spec.eps_a, spec.worst_case_mean())?;
    let threshold = sample_size_threshold(&spec);
    if !(threshold.is_finite() && threshold > 0.0 && exponent < 0.0) {
        return Err(Error::Domain(format!("sample-size threshold {threshold} is not a positive finite number")));
    }
    let mut n = threshold.floor() as u64 + 1;
    while raw_confidence(n, exponent) >= spec.delta {
        n += 1;
    }
    while n > 1 && raw_confidence(n - 1, exponent) < spec.delta {
        n -= 1;
    }
    Ok(SamplePlan { n, spec, worst_case_exponent: exponent, threshold })
}

/// Risk certified by `n` samples at the given tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AchievedConfidence {
    /// `min(1, 2 exp(n g(eps_a, eps_a/eps_r)))`.
    pub delta: f64,
    /// False when the uncapped value reached 1, i.e. the bound says nothing.
    pub guaranteed: bool,
}

pub fn achieved_confidence(n: u64, eps_a: f64, eps_r: f64) -> Result<AchievedConfidence> {
    check_count(n)?;
    validate_tolerances(eps_a, eps_r)?;
    let raw = raw_confidence(n, hoeffding_exponent(eps_a, eps_a / eps_r)?);
    Ok(if raw >= 1.0 {
        AchievedConfidence { delta: 1.0, guaranteed: false }
    } else {
        AchievedConfidence { delta: raw, guaranteed: true }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(eps: f64, mu: f64) -> f64 {
        hoeffding_exponent(eps, mu).unwrap()
    }

    // Direct two-logarithm form, used as an independent check away from eps = 0.
    fn g_naive(eps: f64, mu: f64) -> f64 {
        (mu + eps) * (mu / (mu + eps)).ln() + (1.0 - mu - eps) * ((1.0 - mu) / (1.0 - mu - eps)).ln()
    }

    #[test]
    fn exponent_reference_values() {
        assert!((g(0.1, 0.5) - -0.020_135_513_550_688_87).abs() < 1e-15);
        assert!((g(0.2, 0.5) - -0.082_282_878_505_051_85).abs() < 1e-15);
        assert!((g(-0.2, 0.5) - g(0.2, 0.5)).abs() < 1e-15);
        assert!(g(1e-5, 0.3).abs() < 1e-8);
        assert!(g(1e-5, 0.3) < 0.0);
        assert_eq!(g(0.0, 0.3), 0.0);
    }

    #[test]
    fn exponent_matches_naive_form() {
        for &mu in &[0.05, 0.3, 0.5, 0.77] {
            for &eps in &[0.01, 0.02, 0.04] {
                for e in [eps, -eps] {
                    let (a, b) = (g(e, mu), g_naive(e, mu));
                    assert!((a - b).abs() <= 1e-10 * b.abs(), "{e} {mu}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn exponent_small_eps_is_quadratic() {
        // g(eps, mu) ~ -eps^2 / (2 mu (1 - mu)) as eps -> 0
        let mu = 0.3;
        for &eps in &[1e-4, 1e-6, 1e-8] {
            let expected = -eps * eps / (2.0 * mu * (1.0 - mu));
            assert!((g(eps, mu) / expected - 1.0).abs() < 10.0 * eps);
        }
    }

    #[test]
    fn exponent_domain_errors() {
        assert!(hoeffding_exponent(0.6, 0.5).is_err());
        assert!(hoeffding_exponent(-0.5, 0.5).is_err());
        assert!(hoeffding_exponent(0.1, 0.0).is_err());
        assert!(hoeffding_exponent(0.1, 1.0).is_err());
        assert!(hoeffding_exponent(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn nonpositive_and_symmetric_on_grid() {
        for i in 1..=400 {
            let eps = 1e-3 * i as f64;
            for j in 0..=90 {
                let mu = 0.05 + 0.01 * j as f64;
                for e in [eps, -eps] {
                    let mirrored = (1.0 - mu) - e;
                    if mu + e <= 0.0 || mu + e >= 1.0 || mirrored <= 0.0 || mirrored >= 1.0 {
                        continue;
                    }
                    assert!(g(e, mu) < 0.0);
                    let sym = g(-e, 1.0 - mu);
                    assert!((g(e, mu) - sym).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn derivative_reference_values() {
        let d = hoeffding_exponent_dmu(0.1, 0.5).unwrap();
        assert!((d - ((0.8f64 / 1.2).ln() + 0.4)).abs() < 1e-15);
        assert!((d - -0.005_465_108_108_164_4).abs() < 1e-6);
        let dm = hoeffding_exponent_dmu(-0.1, 0.5).unwrap();
        assert!((dm - 0.005_465_108_108_164_4).abs() < 1e-6);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-6;
        for &(eps, mu) in &[(0.1, 0.4), (-0.1, 0.4), (0.05, 0.2), (0.3, 0.6)] {
            let fd = (g(eps, mu + h) - g(eps, mu - h)) / (2.0 * h);
            let d = hoeffding_exponent_dmu(eps, mu).unwrap();
            assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "{eps} {mu}: {fd} vs {d}");
            let fde = (g(eps + h, mu) - g(eps - h, mu)) / (2.0 * h);
            let de = hoeffding_exponent_deps(eps, mu).unwrap();
            assert!((fde - de).abs() <= 1e-6 * de.abs().max(1e-3));
        }
    }

    #[test]
    fn tail_bound_values() {
        assert!((upper_tail_bound(100, 0.1, 0.5).unwrap() - 0.1335).abs() < 1e-4);
        assert!((lower_tail_bound(10, 0.2, 0.5).unwrap() - 0.4392).abs() < 1e-4);
        assert!((upper_tail_bound(1, 1e-9, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((lower_tail_bound(1, 1e-9, 0.3).unwrap() - 1.0).abs() < 1e-12);
        assert!(upper_tail_bound(0, 0.1, 0.5).is_err());
        assert!(upper_tail_bound(5, 0.6, 0.5).is_err());
        assert!(lower_tail_bound(5, 0.5, 0.5).is_err());
        assert!(lower_tail_bound(5, -0.1, 0.5).is_err());
    }

    #[test]
    fn reference_plans() {
        let plan = minimum_sample_size(&ErrorSpec::new(0.05, 0.2, 0.05).unwrap()).unwrap();
        assert_eq!(plan.n, 577);
        assert!((plan.threshold - 576.256_226_614_986).abs() < 1e-9);
        let plan = minimum_sample_size(&ErrorSpec::new(0.02, 0.2, 0.05).unwrap()).unwrap();
        assert_eq!(plan.n, 1755);
        assert!((plan.threshold - 1_754.542_525_174_315).abs() < 1e-8);
    }

    #[test]
    fn spec_validation() {
        assert!(validate_spec(0.02, 0.2, 0.05).is_ok());
        match validate_spec(0.3, 0.5, 0.1) {
            Err(Error::InvalidSpec(v)) => {
                assert_eq!(v.len(), 1);
                assert!(matches!(v[0], SpecViolation::RatioConstraint { value } if (value - 0.9).abs() < 1e-12));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            validate_spec(0.05, 0.05, 0.1),
            Err(Error::InvalidSpec(ref v)) if v == &[SpecViolation::RatioConstraint { value: 1.05 }]
        ));
        assert!(matches!(
            validate_spec(0.01, 0.1, 1.0),
            Err(Error::InvalidSpec(ref v)) if v == &[SpecViolation::DeltaOutOfRange { delta: 1.0 }]
        ));
        match validate_spec(0.0, 1.5, -1.0) {
            Err(Error::InvalidSpec(v)) => assert_eq!(v.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_deserialization_validates() {
        let ok: ErrorSpec = serde_json::from_str(r#"{"eps_a":0.05,"eps_r":0.2,"delta":0.05}"#).unwrap();
        assert_eq!(ok, ErrorSpec::new(0.05, 0.2, 0.05).unwrap());
        assert!(serde_json::from_str::<ErrorSpec>(r#"{"eps_a":0.3,"eps_r":0.5,"delta":0.1}"#).is_err());
    }

    #[test]
    fn confidence_values() {
        let c = achieved_confidence(577, 0.05, 0.2).unwrap();
        assert!(c.guaranteed);
        assert!((c.delta - 0.049_762_504_168_196).abs() < 1e-12);
        assert!(achieved_confidence(576, 0.05, 0.2).unwrap().delta >= 0.05);
        let one = achieved_confidence(1, 0.05, 0.2).unwrap();
        assert_eq!(one, AchievedConfidence { delta: 1.0, guaranteed: false });
        assert!(achieved_confidence(0, 0.05, 0.2).is_err());
        assert!(achieved_confidence(10, 0.3, 0.5).is_err());
        let mut prev = 1.0;
        for n in (600..100_000).step_by(997) {
            let d = achieved_confidence(n, 0.05, 0.2).unwrap().delta;
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-30);
    }

    fn valid_spec() -> impl Strategy<Value = ErrorSpec> {
        (0.01f64..0.99, 0.02f64..1.0, -13.0f64..-0.7).prop_map(|(r, frac, log_delta)| {
            let a = frac * r / (2.0 * (1.0 + r));
            ErrorSpec::new(a, r, log_delta.exp()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn plan_is_tight(spec in valid_spec()) {
            let plan = minimum_sample_size(&spec).unwrap();
            let at = achieved_confidence(plan.n, spec.eps_a(), spec.eps_r()).unwrap();
            prop_assert!(at.delta < spec.delta());
            if plan.n > 1 {
                let below = achieved_confidence(plan.n - 1, spec.eps_a(), spec.eps_r()).unwrap();
                prop_assert!(spec.delta() <= below.delta);
            }
        }

        #[test]
        fn threshold_forms_agree(spec in valid_spec()) {
            let lhs = sample_size_threshold(&spec);
            let g = hoeffding_exponent(spec.eps_a(), spec.worst_case_mean()).unwrap();
            let rhs = (2.0 / spec.delta()).ln() / -g;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }

        #[test]
        fn exponent_monotone_in_mu_lemma2(eps in 0.001f64..0.49, t in 0.0f64..1.0) {
            // inside (0, 1/2 - eps) the derivative is positive
            let mu = 1e-3 + t * (0.5 - eps - 2e-3);
            prop_assume!(mu > 0.0 && mu < 0.5 - eps);
            prop_assert!(hoeffding_exponent_dmu(eps, mu).unwrap() > -1e-12);
        }
    }
}
