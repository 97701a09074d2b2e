use alloc::format;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{domain, Result};

/// Exact value of Γ(k/2) for odd `k`: `numerator / denominator · √π`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfIntegerGamma {
    pub numerator: BigInt,
    /// Always positive; the fraction is kept in lowest terms.
    pub denominator: BigInt,
    /// Power of √π multiplying the fraction. Always 1 for odd `k`.
    pub sqrt_pi_power: u8,
}

impl HalfIntegerGamma {
    fn from_rational(r: BigRational) -> Self {
        // `Ratio` normalizes to lowest terms with a positive denominator.
        let (numerator, denominator) = r.into();
        Self {
            numerator,
            denominator,
            sqrt_pi_power: 1,
        }
    }

    /// The rational factor in front of √π.
    pub fn rational(&self) -> BigRational {
        BigRational::new(self.numerator.clone(), self.denominator.clone())
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rational().to_f64().unwrap_or(f64::NAN);
        if self.sqrt_pi_power == 1 {
            r * PI.sqrt()
        } else {
            r
        }
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }
}

/// Γ(k/2) for odd `k`, exactly, via Γ(1/2) = √π and Γ(x+1) = xΓ(x).
pub fn gamma_half_integer(k: i64) -> Result<HalfIntegerGamma> {
    if k % 2 == 0 {
        return Err(domain(format!(
            "gamma_half_integer needs an odd k (Γ(k/2) at a half-integer), got {k}"
        )));
    }
    let mut r = BigRational::one();
    if k > 1 {
        // Γ(k/2) = (k-2)/2 · (k-4)/2 · … · 1/2 · √π
        let mut j = 1;
        while j < k {
            r *= BigRational::new(BigInt::from(j), BigInt::from(2));
            j += 2;
        }
    } else if k < 1 {
        // Γ(x) = Γ(x+1)/x, stepping down from 1/2.
        let mut j = -1;
        while j >= k {
            r /= BigRational::new(BigInt::from(j), BigInt::from(2));
            j -= 2;
        }
    }
    Ok(HalfIntegerGamma::from_rational(r))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (original − 1)
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// ln|Γ(x)| and the sign of Γ(x). Poles (non-positive integers) give +∞.
pub fn ln_gamma(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, f64::NAN);
    }
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        let s = (PI * x).sin();
        let (lg, _) = ln_gamma(1.0 - x);
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        return ((PI / s.abs()).ln() - lg, sign);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    let lg = 0.5 * (2.0 * PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln();
    (lg, 1.0)
}

/// Γ(x) for real `x`. Half-integers and small positive integers are exact.
pub fn gamma(x: f64) -> f64 {
    let twice = 2.0 * x;
    if twice == twice.round() && twice.abs() < 341.0 {
        let k = twice as i64;
        if k % 2 != 0 {
            if let Ok(g) = gamma_half_integer(k) {
                return g.to_f64();
            }
        } else if x > 0.0 && x <= 171.0 {
            let mut f = 1.0;
            let mut j = 2.0;
            while j < x {
                f *= j;
                j += 1.0;
            }
            return f;
        } else if x <= 0.0 {
            return f64::NAN;
        }
    }
    let (lg, sign) = ln_gamma(x);
    sign * lg.exp()
}
