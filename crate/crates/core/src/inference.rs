//! Asymptotic variances, confidence intervals for `sigma_t^p` and `sigma_t`,
//! and window selection.

use crate::error::{check, Error, Result};
use crate::estimator::{abs_moment, EstimatorConfig};
use crate::stats::two_sided_z;

/// `(m_{2p} - m_p^2) / m_p^2 * sigma^(2p)`: variance of the fast-window limit.
pub fn phi1(p: f64, sigma: f64) -> f64 {
    let mp = abs_moment(p);
    (abs_moment(2.0 * p) - mp * mp) / (mp * mp) * sigma.powf(2.0 * p)
}

/// `(p^2 / 3) sigma^(2p - 2) |eta|^2`: contribution of the volatility's own
/// Brownian part in the balanced regime.
pub fn phi2(p: f64, sigma: f64, eta_sq: f64) -> f64 {
    p * p / 3.0 * sigma.powf(2.0 * p - 2.0) * eta_sq
}

/// `|eta|^2` of `sigma = sqrt(v)` when `v` follows the OU dynamics with
/// diffusion `beta_vol`; singular at `v = 0`.
pub fn ou_eta_sq(beta_vol: f64, rho: f64, v: f64) -> f64 {
    let s = 2.0 * v.sqrt();
    let e1 = beta_vol * rho / s;
    let e2 = beta_vol * (1.0 - rho * rho).max(0.0).sqrt() / s;
    e1 * e1 + e2 * e2
}

/// `sqrt(m_{2p} - m_p^2) / m_p`, the relative standard deviation of the
/// fast-window limit.
pub fn relative_sd(p: f64) -> f64 {
    let mp = abs_moment(p);
    (abs_moment(2.0 * p) - mp * mp).sqrt() / mp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_sigma: f64,
    pub hi_sigma: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains_sigma_p(&self, s: f64) -> bool {
        self.lo <= s && s <= self.hi
    }
}

/// Interval for `sigma_t^p` obtained by inverting
/// `sqrt(r_n) |est - s| m_p / (s sqrt(m_{2p} - m_p^2)) <= z`.
pub fn confidence_interval(
    estimate: f64,
    cfg: &EstimatorConfig,
    level: f64,
) -> Result<ConfidenceInterval> {
    check(estimate >= 0.0, "estimate", "must be >= 0")?;
    check((0.0..1.0).contains(&level), "level", "must lie in [0, 1)")?;
    let z = two_sided_z(level);
    let mp = abs_moment(cfg.p);
    let k = (abs_moment(2.0 * cfg.p) - mp * mp).sqrt();
    let r_n = cfg.r_n();
    let a = mp * r_n.sqrt();
    if a <= z * k {
        return Err(Error::WindowTooSmall {
            level,
            r_n,
            min_r_n: (z * k / mp).powi(2),
        });
    }
    let lo = a * estimate / (a + z * k);
    let hi = a * estimate / (a - z * k);
    let root = 1.0 / cfg.p;
    Ok(ConfidenceInterval {
        lo,
        hi,
        lo_sigma: lo.powf(root),
        hi_sigma: hi.powf(root),
        level,
    })
}

/// Half-width of the asymptotic band for `|Sigma / sigma^p - 1|`.
pub fn relative_error_band(cfg: &EstimatorConfig, level: f64) -> f64 {
    two_sided_z(level) * relative_sd(cfg.p) / cfg.r_n().sqrt()
}

/// Window length for `r_n = n^rho` and the convergence-rate exponent it buys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowChoice {
    pub h_n: f64,
    pub r_n: f64,
    /// Error decays like `n^(-rate_exponent)`.
    pub rate_exponent: f64,
    /// True when the estimator noise, not the volatility's own motion,
    /// dominates the error.
    pub noise_dominated: bool,
}

/// `h_n = n^(rho - 1)`. With `jump_q = None` the volatility has a Brownian
/// part; `Some(q)`, `q` in `[1, 2]`, is a pure-jump volatility of finite
/// `q`-variation.
pub fn choose_window(n: usize, rho: f64, jump_q: Option<f64>) -> Result<WindowChoice> {
    check(n >= 2, "n", "needs at least 2 observations")?;
    check(rho > 0.0 && rho < 1.0, "rho", "must lie in (0, 1)")?;
    let n_f = n as f64;
    let (noise_dominated, other) = match jump_q {
        None => (rho < 0.5, (1.0 - rho) / 2.0),
        Some(q) => {
            check((1.0..=2.0).contains(&q), "q", "must lie in [1, 2]")?;
            (rho <= 2.0 / (2.0 + q), (1.0 - rho) / q)
        }
    };
    Ok(WindowChoice {
        h_n: n_f.powf(rho - 1.0),
        r_n: n_f.powf(rho),
        rate_exponent: if noise_dominated { rho / 2.0 } else { other },
        noise_dominated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CltRegime {
    /// `h_n / sqrt(dn) -> 0`, normalised by `sqrt(h_n / dn)`.
    FastWindow { rate_factor: f64 },
    /// `sqrt(dn) / h_n -> beta`, normalised by `1 / sqrt(h_n)`.
    Balanced { beta_limit: f64, rate_factor: f64 },
    /// Pure-jump volatility of finite variation with `h_n^3 / dn -> 0`.
    JumpFiniteVariation { rate_factor: f64 },
    /// Pure-jump volatility with `h_n^3 / dn` not small: the limit carries a
    /// bias term that is not computed here.
    JumpBiased { rate_factor: f64 },
}

impl CltRegime {
    /// Classifies a finite `(dn, h_n)` by evaluating each limiting criterion
    /// at the given values (`< 1` counts as "-> 0").
    pub fn classify(cfg: &EstimatorConfig, pure_jump: bool) -> Self {
        let (dn, h) = (cfg.delta_n, cfg.h_n);
        let fast = (h / dn).sqrt();
        if pure_jump {
            if h.powi(3) / dn < 1.0 {
                Self::JumpFiniteVariation { rate_factor: fast }
            } else {
                Self::JumpBiased { rate_factor: fast }
            }
        } else if h / dn.sqrt() < 1.0 {
            Self::FastWindow { rate_factor: fast }
        } else {
            Self::Balanced {
                beta_limit: dn.sqrt() / h,
                rate_factor: 1.0 / h.sqrt(),
            }
        }
    }

    pub fn rate_factor(&self) -> f64 {
        match *self {
            Self::FastWindow { rate_factor }
            | Self::Balanced { rate_factor, .. }
            | Self::JumpFiniteVariation { rate_factor }
            | Self::JumpBiased { rate_factor } => rate_factor,
        }
    }

    /// Whether the plug-in interval is asymptotically valid.
    pub fn supports_interval(&self) -> bool {
        matches!(self, Self::FastWindow { .. } | Self::JumpFiniteVariation { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FastWindow { .. } => "FastWindow",
            Self::Balanced { .. } => "Balanced",
            Self::JumpFiniteVariation { .. } => "JumpFiniteVariation",
            Self::JumpBiased { .. } => "JumpBiased",
        }
    }
}
