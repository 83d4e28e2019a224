//! Small statistics helpers shared by the estimator and the Monte Carlo
//! harness.

use statrs::distribution::{ContinuousCDF, Normal};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
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

/// Sample mean with its standard error; the error is 0 for fewer than two
/// values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
                count,
            };
        }
        let n = count as f64;
        let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
        let se = if count > 1 {
            let ss = xs
                .iter()
                .map(|x| (x - mean).powi(2))
                .collect::<CompensatedSum>()
                .value();
            (ss / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { mean, se, count }
    }

    /// Unbiased sample variance recovered from the standard error.
    pub fn variance(&self) -> f64 {
        self.se * self.se * self.count as f64
    }
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Two-sided standard normal quantile for a confidence level, e.g. 1.959964 for 0.95.
pub fn two_sided_z(level: f64) -> f64 {
    if level <= 0.0 {
        return 0.0;
    }
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and N(0, 1).
pub fn ks_normal(xs: &[f64]) -> f64 {
    let mut s: Vec<f64> = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance; both inputs must be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Ordinary least squares slope of `ys` on `xs`, with its standard error
/// propagated from independent per-point standard errors `y_se`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub se: f64,
}

pub fn ols_slope(xs: &[f64], ys: &[f64], y_se: &[f64]) -> SlopeFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let var: f64 = xs
        .iter()
        .zip(y_se)
        .map(|(x, s)| ((x - mx) / sxx).powi(2) * s * s)
        .sum();
    SlopeFit {
        slope,
        intercept: my - slope * mx,
        se: var.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn z_quantiles() {
        assert!((two_sided_z(0.95) - 1.959963984540054).abs() < 1e-9);
        assert_eq!(two_sided_z(0.0), 0.0);
        assert!((two_sided_z(0.5) - 0.6744897501960817).abs() < 1e-9);
    }

    #[test]
    fn slope_of_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 0.25 * x).collect();
        let f = ols_slope(&xs, &ys, &[0.1; 4]);
        assert!((f.slope + 0.25).abs() < 1e-14);
        assert!((f.intercept - 0.5).abs() < 1e-14);
        // var = s^2 / sxx with sxx = 5
        assert!((f.se - (0.01f64 / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ks_of_quantile_grid_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n)
            .map(|i| Normal::standard().inverse_cdf((i as f64 + 0.5) / n as f64))
            .collect();
        assert!((ks_normal(&xs) - 0.5 / n as f64).abs() < 1e-9);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 10.0).collect();
        assert!(ks_normal(&shifted) > 0.99);
    }

    #[test]
    fn ks_two_sample_basic() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
    }

    #[test]
    fn mean_se_basic() {
        let m = MeanSe::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((m.variance() - 1.0).abs() < 1e-14);
    }
}
