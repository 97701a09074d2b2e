use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Monotone cubic Hermite interpolant on a uniform grid (Fritsch–Carlson
/// limiting of centred-difference slopes).
#[derive(Debug, Clone)]
pub(crate) struct MonotoneCubic {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        debug_assert!(n >= 2);
        let secant: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut slopes = Vec::with_capacity(n);
        slopes.push(secant[0]);
        for i in 1..n - 1 {
            slopes.push(0.5 * (secant[i - 1] + secant[i]));
        }
        slopes.push(secant[n - 2]);
        for (i, &d) in secant.iter().enumerate() {
            if d == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let mut a = slopes[i] / d;
            let mut b = slopes[i + 1] / d;
            if a < 0.0 {
                slopes[i] = 0.0;
                a = 0.0;
            }
            if b < 0.0 {
                slopes[i + 1] = 0.0;
                b = 0.0;
            }
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                slopes[i] = t * a * d;
                slopes[i + 1] = t * b * d;
            }
        }
        Self { x0, h, values, slopes }
    }

    /// Clamped to the end values outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let pos = (x - self.x0) / self.h;
        if !(pos > 0.0) {
            return self.values[0];
        }
        if pos >= last as f64 {
            return self.values[last];
        }
        let i = (pos as usize).min(last - 1);
        let t = pos - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i]
            + h10 * self.h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.h * self.slopes[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hits_nodes_and_is_monotone() {
        let vals: Vec<f64> = (0..20)
            .map(|i| if i < 8 { 0.0 } else { (i as f64 - 7.0).min(5.0) })
            .collect();
        let f = MonotoneCubic::new(0.0, 0.5, vals.clone());
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(f.eval(0.5 * i as f64), *v);
        }
        let mut prev = f.eval(-1.0);
        for k in 0..2000 {
            let v = f.eval(k as f64 * 0.005);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn smooth_data_is_accurate() {
        let h = 0.01;
        let vals: Vec<f64> = (0..=100).map(|i| (i as f64 * h).tanh()).collect();
        let f = MonotoneCubic::new(0.0, h, vals);
        for k in 0..97 {
            let x = 0.0137 + k as f64 * 0.0101;
            assert!((f.eval(x) - x.tanh()).abs() < 1e-6);
        }
    }
}
