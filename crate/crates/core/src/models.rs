//! Fine-grid Euler simulation of the price/volatility models and
//! subsampling onto the observation grid.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::grid::{grid_floor, le_tol};
use crate::kernel::{SeedSpec, SubordinatorStep, TemperedStableParams, DEFAULT_CUTOFF_EPS};

/// Log-price `dX = (r - v/2) dt + sqrt(v) dW1` with one of three spot
/// variance dynamics `v = sigma^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", deny_unknown_fields)]
pub enum ModelSpec {
    ConstantVol {
        sigma: f64,
        #[serde(default)]
        r: f64,
        #[serde(default)]
        x0: f64,
    },
    /// `dv = a (m - v) dt + beta_vol (rho dW1 + sqrt(1 - rho^2) dW2)`, clamped at 0.
    OuVol {
        r: f64,
        a: f64,
        m: f64,
        beta_vol: f64,
        rho: f64,
        x0: f64,
        v0: f64,
    },
    /// `dv = -mu v dt + dZ` with `Z` a tempered stable subordinator.
    BnsJump {
        r: f64,
        mu: f64,
        ts: TemperedStableParams,
        x0: f64,
        v0: f64,
    },
}

impl ModelSpec {
    pub fn constant(sigma: f64, r: f64) -> Self {
        Self::ConstantVol { sigma, r, x0: 0.0 }
    }

    /// Ornstein-Uhlenbeck variance with r = 0.05, rho = 0, a = 1, m = 0.05,
    /// beta = 0.05, X0 = log 50, v0 = m.
    pub fn standard_ou() -> Self {
        Self::OuVol {
            r: 0.05,
            a: 1.0,
            m: 0.05,
            beta_vol: 0.05,
            rho: 0.0,
            x0: 50f64.ln(),
            v0: 0.05,
        }
    }

    /// Tempered stable driven variance with r = 0.05, mu = 1, lambda = 1,
    /// beta = 1/2, X0 = log 50, v0 = 0.05.
    pub fn standard_bns() -> Self {
        Self::BnsJump {
            r: 0.05,
            mu: 1.0,
            ts: TemperedStableParams {
                lambda: 1.0,
                beta: 0.5,
                cutoff_eps: DEFAULT_CUTOFF_EPS,
            },
            x0: 50f64.ln(),
            v0: 0.05,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ConstantVol { .. } => "ConstantVol",
            Self::OuVol { .. } => "OuVol",
            Self::BnsJump { .. } => "BnsJump",
        }
    }

    pub fn x0(&self) -> f64 {
        match *self {
            Self::ConstantVol { x0, .. } | Self::OuVol { x0, .. } | Self::BnsJump { x0, .. } => x0,
        }
    }

    pub fn v0(&self) -> f64 {
        match *self {
            Self::ConstantVol { sigma, .. } => sigma * sigma,
            Self::OuVol { v0, .. } | Self::BnsJump { v0, .. } => v0,
        }
    }

    /// True when the volatility has no Brownian component.
    pub fn is_pure_jump(&self) -> bool {
        matches!(self, Self::BnsJump { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::ConstantVol { sigma, r, x0 } => {
                check(sigma >= 0.0 && sigma.is_finite(), "sigma", "must be >= 0")?;
                check(r.is_finite() && x0.is_finite(), "r", "must be finite")
            }
            Self::OuVol {
                r,
                a,
                m,
                beta_vol,
                rho,
                x0,
                v0,
            } => {
                check(a > 0.0, "a", "must be positive")?;
                check(m > 0.0, "m", "must be positive")?;
                check(beta_vol >= 0.0, "beta_vol", "must be >= 0")?;
                check((-1.0..=1.0).contains(&rho), "rho", "must lie in [-1, 1]")?;
                check(v0 >= 0.0, "v0", "must be >= 0")?;
                check(r.is_finite() && x0.is_finite(), "r", "must be finite")
            }
            Self::BnsJump {
                r, mu, ts, x0, v0, ..
            } => {
                check(mu > 0.0, "mu", "must be positive")?;
                check(v0 >= 0.0, "v0", "must be >= 0")?;
                check(r.is_finite() && x0.is_finite(), "r", "must be finite")?;
                ts.validate()
            }
        }
    }
}

/// Fine-grid simulation output: `x[k]`, `v[k]` at time `k * dt_fine`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub dt_fine: f64,
    pub t_end: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Euler steps whose variance update went negative and was set to 0.
    pub clamped_steps: usize,
}

impl Path {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.x.len() - 1
    }

    pub fn clamp_fraction(&self) -> f64 {
        self.clamped_steps as f64 / self.steps().max(1) as f64
    }
}

/// Log-prices observed at `i * delta_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub delta_n: f64,
    pub x_obs: Vec<f64>,
}

impl Observations {
    pub fn new(delta_n: f64, x_obs: Vec<f64>) -> Result<Self> {
        check(delta_n > 0.0 && delta_n.is_finite(), "delta_n", "must be positive")?;
        check(!x_obs.is_empty(), "x_obs", "needs at least one observation")?;
        Ok(Self { delta_n, x_obs })
    }

    /// Number of increments.
    pub fn n_increments(&self) -> usize {
        self.x_obs.len() - 1
    }

    /// Time of the last observation.
    pub fn horizon(&self) -> f64 {
        self.n_increments() as f64 * self.delta_n
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.x_obs.windows(2).map(|w| w[1] - w[0])
    }
}

/// A simulation recorded only on the observation grid, plus the fine-grid
/// Riemann sums of `v^(p/2)` over the whole horizon for requested powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPath {
    pub obs: Observations,
    /// Spot variance at each observation time.
    pub v_obs: Vec<f64>,
    pub dt_fine: f64,
    pub fine_steps: usize,
    pub clamped_steps: usize,
    /// `(p, A(p)_T)` with `T` the last observation time.
    pub integrated_pvar: Vec<(f64, f64)>,
}

impl ObservedPath {
    pub fn true_sigma(&self, i: usize) -> f64 {
        self.v_obs[i].sqrt()
    }

    pub fn clamp_fraction(&self) -> f64 {
        self.clamped_steps as f64 / self.fine_steps.max(1) as f64
    }
}

fn fine_steps(t_end: f64, dt_fine: f64) -> Result<usize> {
    check(t_end > 0.0 && t_end.is_finite(), "t_end", "must be positive")?;
    check(dt_fine > 0.0 && dt_fine <= t_end, "dt_fine", "must lie in (0, t_end]")?;
    Ok(grid_floor(t_end, dt_fine))
}

/// Runs the Euler scheme for `steps` steps and hands every state
/// `(k, x_k, v_k)` to `sink`, `k = 0..=steps`. Returns the clamp count.
fn euler<F: FnMut(usize, f64, f64)>(
    model: &ModelSpec,
    steps: usize,
    dt: f64,
    seed: SeedSpec,
    mut sink: F,
) -> Result<usize> {
    model.validate()?;
    let mut rng = seed.rng();
    let sdt = dt.sqrt();
    let mut x = model.x0();
    let mut v = model.v0();
    let mut clamped = 0usize;
    sink(0, x, v);
    match *model {
        ModelSpec::ConstantVol { sigma, r, .. } => {
            let drift = (r - 0.5 * sigma * sigma) * dt;
            let vol = sigma * sdt;
            for k in 1..=steps {
                let z: f64 = rng.sample(StandardNormal);
                x += drift + vol * z;
                sink(k, x, v);
            }
        }
        ModelSpec::OuVol {
            r,
            a,
            m,
            beta_vol,
            rho,
            ..
        } => {
            let rho_c = (1.0 - rho * rho).max(0.0).sqrt();
            for k in 1..=steps {
                let dw1 = sdt * rng.sample::<f64, _>(StandardNormal);
                let dw2 = sdt * rng.sample::<f64, _>(StandardNormal);
                let x_next = x + (r - 0.5 * v) * dt + v.sqrt() * dw1;
                let mut v_next = v + a * (m - v) * dt + beta_vol * (rho * dw1 + rho_c * dw2);
                if v_next < 0.0 {
                    v_next = 0.0;
                    clamped += 1;
                }
                x = x_next;
                v = v_next;
                sink(k, x, v);
            }
        }
        ModelSpec::BnsJump { r, mu, ts, .. } => {
            let decay = mu * dt;
            if decay >= 1.0 {
                return Err(Error::UnstableStep(decay));
            }
            let jumps = SubordinatorStep::new(&ts, dt)?;
            for k in 1..=steps {
                let dw1 = sdt * rng.sample::<f64, _>(StandardNormal);
                let dz = jumps.sample(&mut rng);
                x += (r - 0.5 * v) * dt + v.sqrt() * dw1;
                v = v * (1.0 - decay) + dz;
                sink(k, x, v);
            }
        }
    }
    Ok(clamped)
}

pub fn simulate(model: &ModelSpec, t_end: f64, dt_fine: f64, seed: SeedSpec) -> Result<Path> {
    let steps = fine_steps(t_end, dt_fine)?;
    let mut x = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    let clamped_steps = euler(model, steps, dt_fine, seed, |_, xk, vk| {
        x.push(xk);
        v.push(vk);
    })?;
    Ok(Path {
        dt_fine,
        t_end,
        x,
        v,
        clamped_steps,
    })
}

/// Same random path as [`simulate`] followed by [`subsample`], without
/// materialising the fine grid.
pub fn simulate_observed(
    model: &ModelSpec,
    t_end: f64,
    dt_fine: f64,
    delta_n: f64,
    seed: SeedSpec,
    powers: &[f64],
) -> Result<ObservedPath> {
    let steps = fine_steps(t_end, dt_fine)?;
    let stride = stride_of(delta_n, dt_fine)?;
    let n_obs = steps / stride + 1;
    let last = (n_obs - 1) * stride;
    let mut x_obs = Vec::with_capacity(n_obs);
    let mut v_obs = Vec::with_capacity(n_obs);
    let half: Vec<f64> = powers.iter().map(|p| p / 2.0).collect();
    let mut sums = vec![crate::stats::CompensatedSum::new(); powers.len()];
    let clamped_steps = euler(model, last, dt_fine, seed, |k, xk, vk| {
        if k % stride == 0 {
            x_obs.push(xk);
            v_obs.push(vk);
        }
        if k < last {
            for (s, h) in sums.iter_mut().zip(&half) {
                s.add(vk.powf(*h));
            }
        }
    })?;
    let integrated_pvar = powers
        .iter()
        .zip(&sums)
        .map(|(&p, s)| (p, s.value() * dt_fine))
        .collect();
    Ok(ObservedPath {
        obs: Observations { delta_n, x_obs },
        v_obs,
        dt_fine,
        fine_steps: last,
        clamped_steps,
        integrated_pvar,
    })
}

fn stride_of(delta_n: f64, dt_fine: f64) -> Result<usize> {
    let ratio = delta_n / dt_fine;
    let k = ratio.round();
    // absolute slack on the ratio: tolerates representation error of typical
    // grids (1/n over 1/(100 n)) but rejects genuinely off-grid steps
    if !(k >= 1.0) || (ratio - k).abs() > 1e-12 {
        return Err(Error::NonIntegerStride { delta_n, dt_fine });
    }
    Ok(k as usize)
}

pub fn subsample(path: &Path, delta_n: f64) -> Result<Observations> {
    let stride = stride_of(delta_n, path.dt_fine)?;
    Ok(Observations {
        delta_n,
        x_obs: path.x.iter().step_by(stride).copied().collect(),
    })
}

/// `sqrt(v)` at the fine-grid point at or immediately before `t`.
pub fn true_sigma_at(path: &Path, t: f64) -> Result<f64> {
    let max = path.steps() as f64 * path.dt_fine;
    if !(t >= 0.0) || !le_tol(t, max, path.dt_fine) {
        return Err(Error::OutOfRange { t, max });
    }
    let k = grid_floor(t, path.dt_fine).min(path.steps());
    Ok(path.v[k].sqrt())
}
