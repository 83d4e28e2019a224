//! Seedable random sampling: Gaussian increments and tempered stable
//! subordinator increments.
//!
//! Every stream is a ChaCha8 keystream keyed on `master_seed` with the
//! ChaCha stream word set to `stream_id`, so the sequence for a given
//! [`SeedSpec`] does not depend on which thread draws it or in what order
//! other streams are consumed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

use crate::error::{check, Error, Result};

pub type StreamRng = ChaCha8Rng;

/// Default small-jump truncation level for the compound Poisson sampler.
pub const DEFAULT_CUTOFF_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives an unrelated master seed for a sub-experiment (e.g. one per
    /// observation count) while keeping `stream_id` semantics intact.
    pub fn derive(master_seed: u64, tag: u64) -> u64 {
        splitmix64(master_seed ^ splitmix64(tag.wrapping_add(0x5bd1_e995)))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Tempered stable subordinator with Lévy density `exp(-lambda y) / y^(1+beta)`
/// on `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperedStableParams {
    pub lambda: f64,
    pub beta: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff_eps: f64,
}

fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF_EPS
}

impl TemperedStableParams {
    pub fn new(lambda: f64, beta: f64, cutoff_eps: f64) -> Result<Self> {
        let p = Self {
            lambda,
            beta,
            cutoff_eps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.lambda > 0.0 && self.lambda.is_finite(),
            "lambda",
            "must be positive",
        )?;
        check(
            self.beta > 0.0 && self.beta < 1.0,
            "beta",
            "must lie in (0, 1)",
        )?;
        check(
            self.cutoff_eps > 0.0 && self.cutoff_eps <= 1.0,
            "cutoff_eps",
            "must lie in (0, 1]",
        )
    }

    pub fn is_inverse_gaussian(&self) -> bool {
        self.beta == 0.5
    }

    /// First moment of the Lévy measure, `E[Z_1] = Gamma(1 - beta) lambda^(beta - 1)`.
    pub fn mean_rate(&self) -> f64 {
        gamma(1.0 - self.beta) * self.lambda.powf(self.beta - 1.0)
    }

    /// Second moment of the Lévy measure, `Var[Z_1] = Gamma(2 - beta) lambda^(beta - 2)`.
    pub fn variance_rate(&self) -> f64 {
        gamma(2.0 - self.beta) * self.lambda.powf(self.beta - 2.0)
    }
}

/// Increment sampler for a fixed time step, with all per-step constants
/// precomputed.
#[derive(Debug, Clone)]
pub enum SubordinatorStep {
    /// Exact inverse Gaussian increments (beta = 1/2).
    InverseGaussian { mean: f64, shape: f64 },
    /// Compound Poisson jumps above `eps` plus the compensating drift of the
    /// truncated small jumps.
    Truncated {
        count: Option<Poisson<f64>>,
        rate: f64,
        eps: f64,
        lambda: f64,
        inv_beta: f64,
        drift: f64,
    },
}

impl SubordinatorStep {
    /// Exact sampler when `beta = 1/2`, truncated sampler otherwise.
    pub fn new(params: &TemperedStableParams, dt: f64) -> Result<Self> {
        if params.is_inverse_gaussian() {
            Self::inverse_gaussian(params, dt)
        } else {
            Self::truncated(params, dt)
        }
    }

    pub fn inverse_gaussian(params: &TemperedStableParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if !params.is_inverse_gaussian() {
            return Err(Error::NotInverseGaussian(params.beta));
        }
        check(dt > 0.0 && dt.is_finite(), "dt", "must be positive")?;
        // Levy density e^{-lambda y} y^{-3/2} is the IG(delta, gamma) subordinator
        // with delta = sqrt(2 pi) and gamma = sqrt(2 lambda).
        let delta = (2.0 * std::f64::consts::PI).sqrt();
        let gamma_ = (2.0 * params.lambda).sqrt();
        Ok(Self::InverseGaussian {
            mean: delta * dt / gamma_,
            shape: (delta * dt).powi(2),
        })
    }

    pub fn truncated(params: &TemperedStableParams, dt: f64) -> Result<Self> {
        if params.cutoff_eps >= 1.0 {
            return Err(Error::DegenerateCutoff(params.cutoff_eps));
        }
        params.validate()?;
        check(dt > 0.0 && dt.is_finite(), "dt", "must be positive")?;
        let TemperedStableParams {
            lambda,
            beta,
            cutoff_eps: eps,
        } = *params;
        let x = lambda * eps;
        let s = 1.0 - beta;
        let g = gamma(s);
        // Gamma(-beta, x) = (x^{-beta} e^{-x} - Gamma(1 - beta, x)) / beta
        let upper = (x.powf(-beta) * (-x).exp() - gamma_ur(s, x) * g) / beta;
        let rate = dt * lambda.powf(beta) * upper;
        let drift = dt * lambda.powf(beta - 1.0) * gamma_lr(s, x) * g;
        let count = if rate > 0.0 {
            Some(Poisson::new(rate).map_err(|e| Error::InvalidParameter {
                name: "cutoff_eps",
                reason: format!("jump intensity {rate}: {e}"),
            })?)
        } else {
            None
        };
        Ok(Self::Truncated {
            count,
            rate,
            eps,
            lambda,
            inv_beta: 1.0 / beta,
            drift,
        })
    }

    /// Mean jump count per step of the truncated sampler (0 for the exact one).
    pub fn jump_intensity(&self) -> f64 {
        match self {
            Self::InverseGaussian { .. } => 0.0,
            Self::Truncated { rate, .. } => *rate,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::InverseGaussian { mean, shape } => sample_inverse_gaussian(rng, mean, shape),
            Self::Truncated {
                ref count,
                eps,
                rate: _,
                lambda,
                inv_beta,
                drift,
            } => {
                let k = count.as_ref().map_or(0.0, |c| c.sample(rng)) as u64;
                let mut total = drift;
                for _ in 0..k {
                    total += sample_tempered_jump(rng, eps, lambda, inv_beta);
                }
                total
            }
        }
    }
}

/// Michael-Schucany-Haas transformation for IG(mean, shape).
#[inline]
pub fn sample_inverse_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, shape: f64) -> f64 {
    let nu: f64 = rng.sample(StandardNormal);
    let y = nu * nu;
    let w = mean * y / (2.0 * shape);
    // mean * (1 + w - sqrt(w^2 + 2w)), rationalised against cancellation
    let x = mean / (1.0 + w + (w * w + 2.0 * w).sqrt());
    let u: f64 = rng.random();
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

/// One jump from the Lévy density restricted to `[eps, inf)`: Pareto proposal
/// `eps * U^(-1/beta)` accepted with probability `exp(-lambda (y - eps))`.
#[inline]
fn sample_tempered_jump<R: Rng + ?Sized>(rng: &mut R, eps: f64, lambda: f64, inv_beta: f64) -> f64 {
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let y = eps * u.powf(-inv_beta);
        let a: f64 = rng.random();
        if a < (-lambda * (y - eps)).exp() {
            return y;
        }
    }
}

pub fn sample_normal(seed: SeedSpec, count: usize) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..count).map(|_| rng.sample(StandardNormal)).collect()
}

/// Exact increment over `dt` for the beta = 1/2 subordinator.
pub fn sample_ig_increment(seed: SeedSpec, dt: f64, params: &TemperedStableParams) -> Result<f64> {
    Ok(sample_ig_increments(seed, dt, params, 1)?[0])
}

pub fn sample_ig_increments(
    seed: SeedSpec,
    dt: f64,
    params: &TemperedStableParams,
    count: usize,
) -> Result<Vec<f64>> {
    let step = SubordinatorStep::inverse_gaussian(params, dt)?;
    let mut rng = seed.rng();
    Ok((0..count).map(|_| step.sample(&mut rng)).collect())
}

/// Truncated compound Poisson increment over `dt`, valid for any beta in (0, 1).
pub fn sample_ts_increment_generic(
    seed: SeedSpec,
    dt: f64,
    params: &TemperedStableParams,
) -> Result<f64> {
    Ok(sample_ts_increments_generic(seed, dt, params, 1)?[0])
}

pub fn sample_ts_increments_generic(
    seed: SeedSpec,
    dt: f64,
    params: &TemperedStableParams,
    count: usize,
) -> Result<Vec<f64>> {
    let step = SubordinatorStep::truncated(params, dt)?;
    let mut rng = seed.rng();
    Ok((0..count).map(|_| step.sample(&mut rng)).collect())
}
