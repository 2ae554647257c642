//! Floating-point helpers shared by the summation and bound code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// Neumaier (improved Kahan–Babuška) running sum.
///
/// Terms are folded in call order, so a fixed term order gives a
/// bit-reproducible result.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Γ(x) for x > 0: exact factorial at positive integers up to 170,
/// Lanczos approximation otherwise.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 && x.fract() == 0.0 && x <= 171.0 {
        let n = x as u32;
        return (1..n).fold(1.0f64, |acc, k| acc * k as f64);
    }
    statrs::function::gamma::gamma(x)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x > 0.0 && x.fract() == 0.0 && x <= 171.0 {
        return gamma(x).ln();
    }
    statrs::function::gamma::ln_gamma(x)
}

/// num / den rounded to the nearest binary64 (ties to even).
///
/// `den` must be positive.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    assert!(den.is_positive(), "denominator must be positive");
    if num.is_zero() {
        return 0.0;
    }
    let neg = num.is_negative();
    let a = num.abs();
    // Scale so the integer quotient carries 55..=56 significant bits; the
    // lowest bit then sits below the rounding position and can absorb the
    // sticky remainder flag.
    let shift: i64 = 55 - (a.bits() as i64 - den.bits() as i64);
    let (scaled_num, scaled_den) = if shift >= 0 {
        (a << shift as usize, den.clone())
    } else {
        (a, den << (-shift) as usize)
    };
    let (q, r) = scaled_num.div_rem(&scaled_den);
    let mut q = q.to_u64().expect("quotient fits in 57 bits");
    if !r.is_zero() {
        q |= 1;
    }
    // u64 -> f64 rounds to nearest even; the power of two scale is exact
    // for every magnitude that occurs here.
    let v = q as f64 * (2f64).powi(-(shift as i32));
    if neg {
        -v
    } else {
        v
    }
}
