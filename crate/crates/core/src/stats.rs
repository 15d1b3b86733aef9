//! Sample moments and compensated accumulation.

use alloc::vec::Vec;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if libm::fabs(self.sum) >= libm::fabs(value) {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

pub fn sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(values.iter().copied());
    acc.value()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    sum(values) / values.len() as f64
}

/// Population variance (divides by `n`).
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    let mut acc = CompensatedSum::new();
    acc.extend(values.iter().map(|v| (v - m) * (v - m)));
    acc.value() / values.len() as f64
}

pub fn std_dev(values: &[f64]) -> f64 {
    libm::sqrt(variance(values))
}

/// Moment coefficient of skewness `m3 / m2^(3/2)`.
pub fn skewness(values: &[f64]) -> f64 {
    let m = mean(values);
    let (mut m2, mut m3) = (CompensatedSum::new(), CompensatedSum::new());
    for &v in values {
        let d = v - m;
        m2.add(d * d);
        m3.add(d * d * d);
    }
    let n = values.len() as f64;
    let (m2, m3) = (m2.value() / n, m3.value() / n);
    if m2 <= 0.0 {
        return 0.0;
    }
    m3 / libm::pow(m2, 1.5)
}

pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut acc = CompensatedSum::new();
    acc.extend(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    acc.value() / x.len() as f64
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let denom = libm::sqrt(variance(x) * variance(y));
    if denom == 0.0 {
        return 0.0;
    }
    covariance(x, y) / denom
}

/// Sample autocorrelation at `lag` using the full-sample mean and variance
/// (the usual biased estimator).
pub fn autocorrelation(values: &[f64], lag: usize) -> f64 {
    let n = values.len();
    if lag >= n {
        return f64::NAN;
    }
    let m = mean(values);
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for t in 0..n {
        let d = values[t] - m;
        den.add(d * d);
        if t + lag < n {
            num.add(d * (values[t + lag] - m));
        }
    }
    if den.value() == 0.0 {
        return 0.0;
    }
    num.value() / den.value()
}

pub fn autocorrelations(values: &[f64], max_lag: usize) -> Vec<f64> {
    (1..=max_lag).map(|k| autocorrelation(values, k)).collect()
}

/// Linear-interpolation quantile of an already sorted slice, `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = libm::floor(pos) as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = pos - lo as f64;
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1e16);
        for _ in 0..10 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 10.0);
    }

    #[test]
    fn moments_of_small_sample() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert!((variance(&x) - 1.25).abs() < 1e-15);
        assert!(skewness(&x).abs() < 1e-15);
        assert!((skewness(&[0.0, 0.0, 0.0, 1.0]) - 1.1547005383792515).abs() < 1e-12);
        assert!((correlation(&x, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_interpolates() {
        let s = [0.0, 10.0, 20.0];
        assert_eq!(quantile_sorted(&s, 0.5), 10.0);
        assert_eq!(quantile_sorted(&s, 0.25), 5.0);
        assert_eq!(quantile_sorted(&s, 1.0), 20.0);
    }
}
