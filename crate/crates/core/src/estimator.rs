//! Power variations and the windowed spot volatility estimator
//! `Sigma(p, dn, hn)_t = dn^(1 - p/2) (B(p)_{t+hn} - B(p)_t) / (m_p hn)`.

use statrs::function::gamma::ln_gamma;

use crate::error::{check, Error, Result};
use crate::grid::{grid_floor, le_tol};
use crate::models::{Observations, Path};
use crate::stats::CompensatedSum;

/// `E|U|^p` for `U ~ N(0, 1)`, i.e. `2^(p/2) Gamma((p + 1)/2) / sqrt(pi)`.
///
/// Integer orders go through the recursion `m_{p+2} = (p + 1) m_p`, which is
/// exact for even `p`.
pub fn abs_moment(p: f64) -> f64 {
    assert!(p >= 0.0, "abs_moment needs p >= 0, got {p}");
    if p.fract() == 0.0 && p <= 340.0 {
        let k = p as u32;
        let mut m = if k.is_multiple_of(2) {
            1.0
        } else {
            (2.0 / std::f64::consts::PI).sqrt()
        };
        let mut j = k % 2;
        while j < k {
            m *= (j + 1) as f64;
            j += 2;
        }
        return m;
    }
    (0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0)) - 0.5 * std::f64::consts::PI.ln()).exp()
}

#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 4.0 {
        let y = x * x;
        y * y
    } else {
        x.abs().powf(p)
    }
}

/// Whether the central limit theory covers the chosen power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerValidity {
    /// `p = 2` or `p >= 3`.
    CltBacked,
    /// Consistent by the law of large numbers only.
    LlnOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub p: f64,
    pub delta_n: f64,
    pub h_n: f64,
}

impl EstimatorConfig {
    pub fn new(p: f64, delta_n: f64, h_n: f64) -> Result<Self> {
        check(p >= 1.0 && p.is_finite(), "p", "must be >= 1")?;
        check(delta_n > 0.0 && delta_n.is_finite(), "delta_n", "must be positive")?;
        check(
            h_n > delta_n && h_n.is_finite(),
            "h_n",
            format!("window {h_n} must exceed the observation step {delta_n}"),
        )?;
        Ok(Self { p, delta_n, h_n })
    }

    /// Window with `r_n = n^rho` observations for `delta_n = 1/n`.
    pub fn from_rho(p: f64, n: usize, rho: f64) -> Result<Self> {
        let n_f = n as f64;
        Self::new(p, 1.0 / n_f, n_f.powf(rho - 1.0))
    }

    /// Like [`Self::from_rho`] but with `r_n = round(n^rho)` (at least 2), so
    /// every grid-aligned window holds exactly `r_n` increments.
    pub fn from_rho_whole(p: f64, n: usize, rho: f64) -> Result<Self> {
        let n_f = n as f64;
        let r = n_f.powf(rho).round().max(2.0);
        Self::new(p, 1.0 / n_f, r / n_f)
    }

    /// Observations per window, `h_n / delta_n`.
    pub fn r_n(&self) -> f64 {
        self.h_n / self.delta_n
    }

    pub fn validity(&self) -> PowerValidity {
        if self.p == 2.0 || self.p >= 3.0 {
            PowerValidity::CltBacked
        } else {
            PowerValidity::LlnOnly
        }
    }

    fn scale(&self) -> f64 {
        self.delta_n.powf(1.0 - self.p / 2.0) / (abs_moment(self.p) * self.h_n)
    }

    fn check_obs(&self, obs: &Observations) -> Result<()> {
        check(
            (self.delta_n - obs.delta_n).abs() <= 1e-12 * obs.delta_n,
            "delta_n",
            format!(
                "config step {} does not match observation step {}",
                self.delta_n, obs.delta_n
            ),
        )
    }
}

/// Increment indices `i` of the window at `t`: `[t/dn] + 1 ..= [(t + hn)/dn]`.
pub fn window_indices(t: f64, delta_n: f64, h_n: f64) -> (usize, usize) {
    (grid_floor(t, delta_n) + 1, grid_floor(t + h_n, delta_n))
}

/// `sum_{i=1}^{[t/dn]} |X_{i dn} - X_{(i-1) dn}|^p`.
pub fn power_variation(obs: &Observations, p: f64, t: f64) -> Result<f64> {
    let max = obs.horizon();
    if !(t >= 0.0) || !le_tol(t, max, obs.delta_n) {
        return Err(Error::OutOfRange { t, max });
    }
    let k = grid_floor(t, obs.delta_n).min(obs.n_increments());
    Ok(obs.increments().take(k).map(|d| abs_pow(d, p)).sum())
}

/// The windowed estimate of `sigma_t^p` from one pass over the window.
pub fn sigma_p_estimate(obs: &Observations, cfg: &EstimatorConfig, t: f64) -> Result<f64> {
    cfg.check_obs(obs)?;
    let max = obs.horizon() - cfg.h_n;
    if !(t >= 0.0) || !le_tol(t, max, obs.delta_n) {
        return Err(Error::OutOfRange { t, max });
    }
    let (lo, hi) = window_indices(t, cfg.delta_n, cfg.h_n);
    let hi = hi.min(obs.n_increments());
    let sum: f64 = obs.x_obs[lo - 1..=hi]
        .windows(2)
        .map(|w| abs_pow(w[1] - w[0], cfg.p))
        .sum();
    Ok(cfg.scale() * sum)
}

/// Prefix sums of `|increment|^p`, for evaluating many windows on one path.
#[derive(Debug, Clone)]
pub struct PowerVariation {
    p: f64,
    delta_n: f64,
    prefix: Vec<f64>,
}

impl PowerVariation {
    pub fn new(obs: &Observations, p: f64) -> Self {
        let mut prefix = Vec::with_capacity(obs.x_obs.len());
        let mut acc = 0.0;
        prefix.push(0.0);
        for d in obs.increments() {
            acc += abs_pow(d, p);
            prefix.push(acc);
        }
        Self {
            p,
            delta_n: obs.delta_n,
            prefix,
        }
    }

    pub fn horizon(&self) -> f64 {
        (self.prefix.len() - 1) as f64 * self.delta_n
    }

    /// `B(p)_t`.
    pub fn at(&self, t: f64) -> f64 {
        self.prefix[grid_floor(t, self.delta_n).min(self.prefix.len() - 1)]
    }

    /// Estimate at `t` without range checks beyond clamping to the data.
    #[inline]
    pub fn estimate_unchecked(&self, cfg: &EstimatorConfig, scale: f64, t: f64) -> f64 {
        let (lo, hi) = window_indices(t, cfg.delta_n, cfg.h_n);
        let last = self.prefix.len() - 1;
        (scale * (self.prefix[hi.min(last)] - self.prefix[(lo - 1).min(last)])).max(0.0)
    }

    pub fn estimate(&self, cfg: &EstimatorConfig, t: f64) -> Result<f64> {
        let max = self.horizon() - cfg.h_n;
        if !(t >= 0.0) || !le_tol(t, max, self.delta_n) {
            return Err(Error::OutOfRange { t, max });
        }
        debug_assert_eq!(cfg.p, self.p);
        Ok(self.estimate_unchecked(cfg, cfg.scale(), t))
    }

    pub fn scale_for(cfg: &EstimatorConfig) -> f64 {
        cfg.scale()
    }
}

/// Estimates of `sigma_t^p` and `sigma_t` on a time grid, with optional
/// confidence bounds for `sigma_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolEstimateSeries {
    pub p: f64,
    pub times: Vec<f64>,
    pub sigma_p_hat: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub ci: Option<Vec<(f64, f64)>>,
}

impl VolEstimateSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Observation times inside `[h_n, T - h_n]`.
pub fn default_grid(obs: &Observations, cfg: &EstimatorConfig) -> Vec<f64> {
    let t_max = obs.horizon() - cfg.h_n;
    (0..=obs.n_increments())
        .map(|i| i as f64 * obs.delta_n)
        .filter(|&t| t >= cfg.h_n - 1e-9 * obs.delta_n && le_tol(t, t_max, obs.delta_n))
        .collect()
}

pub fn estimate_series(
    obs: &Observations,
    cfg: &EstimatorConfig,
    grid: &[f64],
) -> Result<VolEstimateSeries> {
    cfg.check_obs(obs)?;
    let pv = PowerVariation::new(obs, cfg.p);
    let sigma_p_hat = grid
        .iter()
        .map(|&t| pv.estimate(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let sigma_hat = sigma_p_hat.iter().map(|s| s.powf(1.0 / cfg.p)).collect();
    Ok(VolEstimateSeries {
        p: cfg.p,
        times: grid.to_vec(),
        sigma_p_hat,
        sigma_hat,
        ci: None,
    })
}

/// Left-endpoint Riemann sum of `v^(p/2)` over the fine grid up to `t`.
pub fn integrated_pvar_oracle(path: &Path, p: f64, t: f64) -> Result<f64> {
    let max = path.steps() as f64 * path.dt_fine;
    if !(t >= 0.0) || !le_tol(t, max, path.dt_fine) {
        return Err(Error::OutOfRange { t, max });
    }
    let k = grid_floor(t, path.dt_fine).min(path.steps());
    let half = p / 2.0;
    let s: CompensatedSum = path.v[..k].iter().map(|v| v.powf(half)).collect();
    Ok(s.value() * path.dt_fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SeedSpec;
    use crate::models::{simulate, simulate_observed, subsample, ModelSpec};
    use crate::stats::MeanSe;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    fn obs_from_increments(delta_n: f64, inc: &[f64]) -> Observations {
        let mut x = vec![0.0];
        for d in inc {
            x.push(x.last().unwrap() + d);
        }
        Observations::new(delta_n, x).unwrap()
    }

    /// Simpson quadrature of `int |u|^p phi(u) du` on [-12, 12].
    fn moment_quadrature(p: f64) -> f64 {
        let f = |u: f64| u.abs().powf(p) * (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let m = 400_000;
        let h = 24.0 / m as f64;
        let mut s = f(-12.0) + f(12.0);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(-12.0 + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn moments_known_values() {
        assert_eq!(abs_moment(0.0), 1.0);
        assert_eq!(abs_moment(2.0), 1.0);
        assert_eq!(abs_moment(4.0), 3.0);
        assert_eq!(abs_moment(8.0), 105.0);
        assert!((abs_moment(1.0) - 0.797_884_560_802_865_4).abs() < 1e-15);
        for p in [1.0, 2.5, 3.0, 4.0] {
            assert!((abs_moment(p) / moment_quadrature(p) - 1.0).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn moments_match_gamma_form() {
        for p in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 7.3] {
            let closed = 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt();
            assert!((abs_moment(p) / closed - 1.0).abs() < 1e-12, "p = {p}");
        }
    }

    proptest! {
        #[test]
        fn moment_recursion(p in 0.0f64..30.0) {
            let lhs = abs_moment(p + 2.0);
            let rhs = (p + 1.0) * abs_moment(p);
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
        }

        #[test]
        fn power_variation_homogeneous(
            inc in proptest::collection::vec(-1.0f64..1.0, 1..40),
            c in 0.1f64..10.0,
        ) {
            let o = obs_from_increments(1.0, &inc);
            let scaled: Vec<f64> = inc.iter().map(|d| d * c).collect();
            let s = obs_from_increments(1.0, &scaled);
            let t = inc.len() as f64;
            for p in [2.0, 4.0] {
                let a = power_variation(&o, p, t).unwrap();
                let b = power_variation(&s, p, t).unwrap();
                prop_assert!((b - c.powf(p) * a).abs() <= 1e-9 * b.max(1e-300));
            }
        }

        #[test]
        fn power_variation_additive(inc in proptest::collection::vec(-1.0f64..1.0, 2..40), split in 0usize..40) {
            let o = obs_from_increments(0.5, &inc);
            let s = split.min(inc.len());
            let t_end = inc.len() as f64 * 0.5;
            let whole = power_variation(&o, 3.0, t_end).unwrap();
            let head = power_variation(&o, 3.0, s as f64 * 0.5).unwrap();
            let tail: f64 = inc[s..].iter().map(|d| d.abs().powi(3)).sum();
            prop_assert!((whole - head - tail).abs() < 1e-12);
        }
    }

    #[test]
    fn power_variation_small_cases() {
        let o = obs_from_increments(1.0, &[1.0, -2.0, 3.0]);
        assert_eq!(power_variation(&o, 2.0, 3.0).unwrap(), 14.0);
        assert_eq!(power_variation(&o, 2.0, 0.99).unwrap(), 0.0);
        assert_eq!(power_variation(&o, 2.0, 2.5).unwrap(), 5.0);
        assert!(power_variation(&o, 2.0, 3.5).is_err());
        let pv = PowerVariation::new(&o, 2.0);
        assert_eq!(pv.at(3.0), 14.0);
        assert_eq!(pv.at(1.0), 1.0);
    }

    #[test]
    fn constant_increments_give_c_pow_p_over_m_p() {
        let dn: f64 = 0.01;
        let c = 0.7;
        let inc = vec![c * dn.sqrt(); 100];
        let o = obs_from_increments(dn, &inc);
        for p in [2.0, 3.0, 4.0] {
            let cfg = EstimatorConfig::new(p, dn, 0.2).unwrap();
            let s = sigma_p_estimate(&o, &cfg, 0.3).unwrap();
            let want = c.powf(p) / abs_moment(p);
            assert!((s / want - 1.0).abs() < 1e-12, "p {p}: {s} vs {want}");
        }
    }

    #[test]
    fn flat_window_is_zero_and_range_checked() {
        let mut inc = vec![0.1; 10];
        inc.extend(vec![0.0; 10]);
        let o = obs_from_increments(0.1, &inc);
        let cfg = EstimatorConfig::new(2.0, 0.1, 0.5).unwrap();
        assert_eq!(sigma_p_estimate(&o, &cfg, 1.2).unwrap(), 0.0);
        assert!(sigma_p_estimate(&o, &cfg, 1.5).is_ok());
        assert!(matches!(sigma_p_estimate(&o, &cfg, 1.6), Err(Error::OutOfRange { .. })));
        assert!(sigma_p_estimate(&o, &cfg, -0.1).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::new(2.0, 0.01, 0.01).is_err());
        assert!(EstimatorConfig::new(0.5, 0.01, 0.1).is_err());
        let cfg = EstimatorConfig::new(2.5, 0.01, 0.1).unwrap();
        assert_eq!(cfg.validity(), PowerValidity::LlnOnly);
        assert!((cfg.r_n() - 10.0).abs() < 1e-12);
        assert_eq!(EstimatorConfig::new(3.0, 0.01, 0.1).unwrap().validity(), PowerValidity::CltBacked);
        let w = EstimatorConfig::from_rho(2.0, 10_000, 0.5).unwrap();
        assert!((w.h_n - 0.01).abs() < 1e-15);
        let w = EstimatorConfig::from_rho_whole(2.0, 10_000, 0.4).unwrap();
        assert!((w.r_n() - 40.0).abs() < 1e-12);
        let o = obs_from_increments(1e-4, &vec![1e-2; 10_000]);
        let (lo, hi) = window_indices(0.5, o.delta_n, w.h_n);
        assert_eq!(hi + 1 - lo, 40);
    }

    #[test]
    fn series_single_point_and_homogeneity() {
        let path = simulate(&ModelSpec::standard_ou(), 1.0, 1e-4, SeedSpec::new(1, 0)).unwrap();
        let obs = subsample(&path, 1e-3).unwrap();
        let cfg = EstimatorConfig::new(2.0, 1e-3, 0.05).unwrap();
        let one = estimate_series(&obs, &cfg, &[0.4]).unwrap();
        let direct = sigma_p_estimate(&obs, &cfg, 0.4).unwrap();
        assert!((one.sigma_p_hat[0] - direct).abs() <= 1e-12 * direct);

        let c = 1.7;
        let scaled = Observations::new(1e-3, obs.x_obs.iter().map(|x| x * c).collect()).unwrap();
        for p in [2.0, 4.0] {
            let cfg = EstimatorConfig::new(p, 1e-3, 0.05).unwrap();
            let grid = default_grid(&obs, &cfg);
            let a = estimate_series(&obs, &cfg, &grid).unwrap();
            let b = estimate_series(&scaled, &cfg, &grid).unwrap();
            for i in 0..a.len() {
                assert!((b.sigma_p_hat[i] / (c.powf(p) * a.sigma_p_hat[i]) - 1.0).abs() < 1e-9);
                assert!((b.sigma_hat[i] / (c * a.sigma_hat[i]) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn default_grid_bounds() {
        let o = obs_from_increments(0.01, &[0.01; 100]);
        let cfg = EstimatorConfig::new(2.0, 0.01, 0.1).unwrap();
        let g = default_grid(&o, &cfg);
        assert_eq!(g.len(), 81);
        assert!((g[0] - 0.1).abs() < 1e-12);
        assert!((g.last().unwrap() - 0.9).abs() < 1e-12);
        assert!(estimate_series(&o, &cfg, &g).is_ok());
        assert!(estimate_series(&o, &cfg, &[0.95]).is_err());
    }

    #[test]
    fn oracle_edge_cases() {
        let path = simulate(&ModelSpec::constant(0.2, 0.0), 1.0, 1e-3, SeedSpec::new(0, 0)).unwrap();
        let a = integrated_pvar_oracle(&path, 2.0, 1.0).unwrap();
        assert!((a - 0.04).abs() < 0.04 * 1e-3);
        assert!((integrated_pvar_oracle(&path, 0.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(integrated_pvar_oracle(&path, 2.0, 1.5).is_err());
    }

    #[test]
    fn p2_and_p4_estimate_the_same_sigma() {
        let n = 10_000;
        let mut diffs = Vec::new();
        let mut scatter = Vec::new();
        for i in 0..20 {
            let op = simulate_observed(&ModelSpec::standard_ou(), 1.0, 1e-6, 1e-4, SeedSpec::new(3, i), &[]).unwrap();
            let c2 = EstimatorConfig::from_rho(2.0, n, 0.5).unwrap();
            let c4 = EstimatorConfig::from_rho(4.0, n, 0.5).unwrap();
            let grid = default_grid(&op.obs, &c2);
            let s2 = estimate_series(&op.obs, &c2, &grid).unwrap();
            let s4 = estimate_series(&op.obs, &c4, &grid).unwrap();
            for (k, &t) in grid.iter().enumerate() {
                let truth = op.true_sigma(crate::grid::grid_floor(t, 1e-4));
                diffs.push((s2.sigma_hat[k] - s4.sigma_hat[k]).abs());
                scatter.push((s2.sigma_hat[k] - truth).abs());
            }
        }
        let d = MeanSe::of(&diffs).mean;
        let s = MeanSe::of(&scatter).mean;
        assert!(d < 3.0 * s, "{d} vs {s}");
    }
}
