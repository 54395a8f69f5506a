//! Double-double arithmetic (~32 significant digits) for test oracles.
//!
//! Only what the sample-size oracle needs: + - * /, exp, ln.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DD = DD { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    /// Exact-to-32-digits value of `num / den`.
    pub fn ratio(num: i64, den: i64) -> Self {
        DD::from_f64(num as f64) / DD::from_f64(den as f64)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn scale(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DD { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn exp(self) -> Self {
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * DD::from_f64(k);
        let r = r.scale(-10);
        // Taylor series of exp(r) - 1
        let mut term = r;
        let mut sum = r;
        for i in 2..30 {
            term = term * r / DD::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)^2 - 1 = s (2 + s), applied 10 times
        for _ in 0..10 {
            sum = sum * (DD::from_f64(2.0) + sum);
        }
        (sum + DD::ONE).scale(k as i32)
    }

    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0);
        let mut y = DD::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - DD::ONE;
        }
        y
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b * DD::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DD::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from_f64(q3)
    }
}

/// `g(eps, mu)` from its defining two-logarithm formula.
pub fn hoeffding_exponent(eps: DD, mu: DD) -> DD {
    let one = DD::ONE;
    (mu + eps) * (mu / (mu + eps)).ln() + (one - mu - eps) * ((one - mu) / (one - mu - eps)).ln()
}

/// Sample-size threshold written exactly as the closed form.
pub fn threshold_closed_form(eps_a: DD, eps_r: DD, delta: DD) -> DD {
    let one = DD::ONE;
    let two = DD::from_f64(2.0);
    let denom = (eps_a + eps_a * eps_r) * (one + eps_r).ln()
        + (eps_r - eps_a - eps_a * eps_r) * (one - eps_a * eps_r / (eps_r - eps_a)).ln();
    eps_r * (two / delta).ln() / denom
}

/// The same threshold via `ln(2/delta) / -g(eps_a, eps_a/eps_r)`.
pub fn threshold_by_exponent(eps_a: DD, eps_r: DD, delta: DD) -> DD {
    let two = DD::from_f64(2.0);
    (two / delta).ln() / -hoeffding_exponent(eps_a, eps_a / eps_r)
}

/// `floor(x) + 1` for a positive double-double.
pub fn next_integer_above(x: DD) -> u64 {
    let f = x.hi.floor();
    let frac = (x - DD::from_f64(f)).to_f64();
    let base = if frac < 0.0 { f - 1.0 } else { f };
    base as u64 + 1
}
