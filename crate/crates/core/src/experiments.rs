//! Monte Carlo harness: mean relative error tables, interval coverage and
//! convergence-rate fits over independent simulated paths.
//!
//! Each path is keyed by `(derived master seed for n, path index)` and
//! evaluated independently; the per-path results are collected in path order
//! and reduced sequentially with compensated sums, so reports do not depend
//! on the number of worker threads.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csv_io::fmt_f64;
use crate::error::{check, Error, Result};
use crate::estimator::{EstimatorConfig, PowerValidity, PowerVariation};
use crate::grid::grid_floor;
use crate::inference::{choose_window, confidence_interval, relative_sd, CltRegime};
use crate::kernel::SeedSpec;
use crate::models::{simulate_observed, ModelSpec, Observations, ObservedPath, Path};
use crate::stats::{ks_normal, ols_slope, CompensatedSum, MeanSe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    ErrorTable,
    Coverage,
    RateFit,
}

impl ExperimentMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ErrorTable => "error_table",
            Self::Coverage => "coverage",
            Self::RateFit => "rate_fit",
        }
    }
}

/// Observation step is `1/n`; the fine simulation step is `1/(n * oversample)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    pub n_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub t_probe: f64,
    pub t_end: f64,
    pub oversample: usize,
    pub level: f64,
    /// Round `r_n = n^rho` to a whole number of observations per window.
    pub whole_window: bool,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        check(self.n_paths >= 1, "n_paths", "must be >= 1")?;
        check(!self.n_values.is_empty(), "n_values", "must not be empty")?;
        check(!self.rho_values.is_empty(), "rho_values", "must not be empty")?;
        check(!self.p_values.is_empty(), "p_values", "must not be empty")?;
        check(self.n_values.iter().all(|&n| n >= 2), "n_values", "each n must be >= 2")?;
        check(
            self.rho_values.iter().all(|&r| r > 0.0 && r < 1.0),
            "rho_values",
            "each rho must lie in (0, 1)",
        )?;
        check(self.p_values.iter().all(|&p| p >= 1.0), "p_values", "each p must be >= 1")?;
        check(self.t_end > 0.0, "t_end", "must be positive")?;
        check(
            self.t_probe > 0.0 && self.t_probe < self.t_end,
            "t_probe",
            "must lie in (0, t_end)",
        )?;
        check((0.0..1.0).contains(&self.level), "level", "must lie in [0, 1)")?;
        let min_over = if matches!(self.model, ModelSpec::ConstantVol { .. }) { 1 } else { 100 };
        check(
            self.oversample >= min_over,
            "oversample",
            format!("must be >= {min_over} for {}", self.model.name()),
        )?;
        for &n in &self.n_values {
            for &rho in &self.rho_values {
                let cfg = self.config(2.0, n, rho)?;
                check(
                    self.t_probe + cfg.h_n <= self.t_end,
                    "rho_values",
                    format!("window {} at n = {n} does not fit after t_probe", cfg.h_n),
                )?;
            }
        }
        Ok(())
    }

    pub fn config(&self, p: f64, n: usize, rho: f64) -> Result<EstimatorConfig> {
        if self.whole_window {
            EstimatorConfig::from_rho_whole(p, n, rho)
        } else {
            EstimatorConfig::from_rho(p, n, rho)
        }
    }

    /// Predicted exponent of the error decay in `n`. A constant volatility
    /// has no motion inside the window, so only the `r_n^(-1/2)` noise term
    /// remains at every `rho`.
    pub fn predicted_exponent(&self, n: usize, rho: f64) -> Result<f64> {
        match self.model {
            ModelSpec::ConstantVol { .. } => Ok(rho / 2.0),
            _ => Ok(choose_window(n.max(2), rho, self.model.is_pure_jump().then_some(1.0))?.rate_exponent),
        }
    }
}

/// Mean of `|sigma_hat(k/n) - sigma(k/n)| / sigma(k/n)` over
/// `k = 1..` with `k/n <= T - h_n`; points with zero true volatility are
/// skipped and counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeError {
    pub value: f64,
    pub points: usize,
    pub excluded: usize,
}

/// Mean relative error of the estimated volatility path against a fine
/// simulated path (truth read with `true_sigma_at`).
pub fn mean_relative_error(path: &Path, obs: &Observations, cfg: &EstimatorConfig) -> Result<RelativeError> {
    let stride = grid_floor(obs.delta_n, path.dt_fine).max(1);
    let v_obs: Vec<f64> = path.v.iter().step_by(stride).copied().collect();
    relative_error_on_grid(obs, &v_obs, cfg)
}

fn relative_error_on_grid(obs: &Observations, v_obs: &[f64], cfg: &EstimatorConfig) -> Result<RelativeError> {
    let pv = PowerVariation::new(obs, cfg.p);
    let t_max = obs.horizon() - cfg.h_n;
    check(t_max >= obs.delta_n, "h_n", "window longer than the observed horizon")?;
    let k_max = grid_floor(t_max, obs.delta_n).min(v_obs.len() - 1);
    let scale = PowerVariation::scale_for(cfg);
    let root = 1.0 / cfg.p;
    let mut acc = CompensatedSum::new();
    let (mut points, mut excluded) = (0usize, 0usize);
    for (k, &v) in v_obs.iter().enumerate().take(k_max + 1).skip(1) {
        let sigma = v.sqrt();
        if !(sigma > 0.0) {
            excluded += 1;
            continue;
        }
        let est = pv.estimate_unchecked(cfg, scale, k as f64 * obs.delta_n);
        let hat = if cfg.p == 2.0 { est.sqrt() } else { est.powf(root) };
        acc.add((hat - sigma).abs() / sigma);
        points += 1;
    }
    Ok(RelativeError {
        value: if points > 0 { acc.value() / points as f64 } else { f64::NAN },
        points,
        excluded,
    })
}

#[derive(Debug, Clone, Copy)]
struct ProbeSample {
    rel_err: f64,
    studentized: f64,
    covered: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default)]
struct CellSample {
    e_n: Option<RelativeError>,
    probe: Option<ProbeSample>,
}

#[derive(Debug, Clone)]
struct PathSample {
    cells: Vec<CellSample>,
    clamp_frac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentizedSummary {
    pub mean: f64,
    pub variance: f64,
    /// Kolmogorov-Smirnov distance to N(0, 1).
    pub ks: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub p: f64,
    pub n: usize,
    pub rho: f64,
    pub h_n: f64,
    pub r_n: f64,
    pub n_paths: usize,
    /// Mean over paths of the per-path mean relative error.
    pub mean_e: Option<MeanSe>,
    pub excluded_points: usize,
    /// Mean over paths of `|sigma_hat / sigma - 1|` at the probe time.
    pub probe_err: MeanSe,
    pub probe_excluded: usize,
    /// Empirical interval coverage at the probe time and its standard error.
    pub coverage: Option<(f64, f64)>,
    pub studentized: StudentizedSummary,
    pub regime: CltRegime,
    /// Predicted `n`-exponent of the error decay.
    pub predicted_rate: f64,
    pub clamp_frac: f64,
}

/// Least squares slope of `log(error)` on `log(n)` for one `(p, rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub p: f64,
    pub rho: f64,
    pub slope: f64,
    pub se: f64,
    pub intercept: f64,
    pub predicted_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub model: String,
    pub mode: ExperimentMode,
    pub level: f64,
    pub n_paths: usize,
    pub cells: Vec<CellReport>,
    pub fits: Vec<RateFit>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn cell(&self, p: f64, n: usize, rho: f64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.p == p && c.n == n && (c.rho - rho).abs() < 1e-12)
    }

    pub fn fit(&self, p: f64, rho: f64) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.p == p && (f.rho - rho).abs() < 1e-12)
    }

    /// Window exponent with the smallest mean error for `(p, n)`; uses the
    /// path error when available and the probe error otherwise.
    pub fn best_rho(&self, p: f64, n: usize) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.p == p && c.n == n)
            .map(|c| (c.rho, c.mean_e.map_or(c.probe_err.mean, |m| m.mean)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(rho, _)| rho)
    }

    /// One row per cell: `p,n,rho,mean_E,se_E,coverage,se_cov,fitted_rate,clamp_frac`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = String::from("p,n,rho,mean_E,se_E,coverage,se_cov,fitted_rate,clamp_frac\n");
        for c in &self.cells {
            let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.p,
                c.n,
                c.rho,
                opt(c.mean_e.map(|m| m.mean)),
                opt(c.mean_e.map(|m| m.se)),
                opt(c.coverage.map(|x| x.0)),
                opt(c.coverage.map(|x| x.1)),
                opt(self.fit(c.p, c.rho).map(|f| f.slope)),
                fmt_f64(c.clamp_frac),
            );
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Probe-time statistics per cell.
    pub fn write_probe_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = String::from(
            "p,n,rho,n_paths,regime,mean_probe_err,se_probe_err,stud_mean,stud_var,stud_ks,probe_excluded\n",
        );
        for c in &self.cells {
            let s = &c.studentized;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                c.p,
                c.n,
                c.rho,
                c.n_paths,
                c.regime.name(),
                fmt_f64(c.probe_err.mean),
                fmt_f64(c.probe_err.se),
                fmt_f64(s.mean),
                fmt_f64(s.variance),
                fmt_f64(s.ks),
                c.probe_excluded,
            );
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn pretty(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} experiment on {} ({} paths per cell, level {})",
            self.mode.name(),
            self.model,
            self.n_paths,
            self.level
        );
        let mut ps: Vec<f64> = Vec::new();
        let mut rhos: Vec<f64> = Vec::new();
        let mut ns: Vec<usize> = Vec::new();
        for c in &self.cells {
            if !ps.contains(&c.p) {
                ps.push(c.p);
            }
            if !rhos.iter().any(|r| (r - c.rho).abs() < 1e-12) {
                rhos.push(c.rho);
            }
            if !ns.contains(&c.n) {
                ns.push(c.n);
            }
        }
        let what = match self.mode {
            ExperimentMode::ErrorTable => "mean relative error E_n",
            _ => "probe relative error",
        };
        for &p in &ps {
            let _ = writeln!(s, "\np = {p}: {what} (mean +- se, %)");
            let _ = write!(s, "{:>10}", "n");
            for r in &rhos {
                let _ = write!(s, "{:>22}", format!("rho = {r:.3}"));
            }
            s.push('\n');
            for &n in &ns {
                let _ = write!(s, "{n:>10}");
                for &r in &rhos {
                    let cell = self.cell(p, n, r);
                    let txt = cell
                        .map(|c| {
                            let m = c.mean_e.unwrap_or(c.probe_err);
                            format!("{:.2} +- {:.2}", 100.0 * m.mean, 100.0 * m.se)
                        })
                        .unwrap_or_default();
                    let _ = write!(s, "{txt:>22}");
                }
                s.push('\n');
            }
            for &n in &ns {
                if let Some(r) = self.best_rho(p, n) {
                    let _ = writeln!(s, "  best rho at n = {n}: {r}");
                }
            }
        }
        if self.mode == ExperimentMode::Coverage {
            let _ = writeln!(s, "\ncoverage at t_probe:");
            for c in &self.cells {
                if let Some((cov, se)) = c.coverage {
                    let st = &c.studentized;
                    let _ = writeln!(
                        s,
                        "  p = {} n = {} rho = {}: {:.4} +- {:.4}  studentized mean {:.4} var {:.4} KS {:.4} [{}]",
                        c.p, c.n, c.rho, cov, se, st.mean, st.variance, st.ks, c.regime.name()
                    );
                }
            }
        }
        for f in &self.fits {
            let _ = writeln!(
                s,
                "slope p = {} rho = {}: {:.4} +- {:.4} (predicted {:.4})",
                f.p, f.rho, f.slope, f.se, f.predicted_slope
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

/// Runs plans on a dedicated worker pool, or on rayon's global pool.
#[derive(Default)]
pub struct Harness {
    pool: Option<rayon::ThreadPool>,
}

impl Harness {
    pub fn with_threads(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "threads",
                reason: e.to_string(),
            })?;
        Ok(Self { pool: Some(pool) })
    }

    pub fn run_error_table(&self, plan: &ExperimentPlan) -> Result<ExperimentReport> {
        self.run(plan, ExperimentMode::ErrorTable, plan.level)
    }

    pub fn coverage_experiment(&self, plan: &ExperimentPlan, level: f64) -> Result<ExperimentReport> {
        self.run(plan, ExperimentMode::Coverage, level)
    }

    pub fn rate_fit(&self, plan: &ExperimentPlan) -> Result<ExperimentReport> {
        let mut ns = plan.n_values.clone();
        ns.sort_unstable();
        ns.dedup();
        if ns.len() < 3 {
            return Err(Error::TooFewPoints(ns.len()));
        }
        self.run(plan, ExperimentMode::RateFit, plan.level)
    }

    pub fn run_mode(&self, plan: &ExperimentPlan, mode: ExperimentMode) -> Result<ExperimentReport> {
        match mode {
            ExperimentMode::ErrorTable => self.run_error_table(plan),
            ExperimentMode::Coverage => self.coverage_experiment(plan, plan.level),
            ExperimentMode::RateFit => self.rate_fit(plan),
        }
    }

    fn run(&self, plan: &ExperimentPlan, mode: ExperimentMode, level: f64) -> Result<ExperimentReport> {
        plan.validate()?;
        check((0.0..1.0).contains(&level), "level", "must lie in [0, 1)")?;
        let mut warnings = Vec::new();
        for &p in &plan.p_values {
            if EstimatorConfig::new(p, 0.5, 1.0)?.validity() == PowerValidity::LlnOnly {
                warnings.push(format!("p = {p} is outside {{2}} U [3, inf): LLN-only, no CLT guarantee"));
            }
        }
        let mut cells = Vec::new();
        for &n in &plan.n_values {
            let configs: Vec<EstimatorConfig> = plan
                .p_values
                .iter()
                .flat_map(|&p| plan.rho_values.iter().map(move |&rho| (p, rho)))
                .map(|(p, rho)| plan.config(p, n, rho))
                .collect::<Result<_>>()?;
            let master = SeedSpec::derive(plan.seed, n as u64);
            let job = |i: usize| path_sample(plan, mode, level, n, &configs, SeedSpec::new(master, i as u64));
            let samples: Vec<PathSample> = match &self.pool {
                Some(pool) => pool.install(|| (0..plan.n_paths).into_par_iter().map(job).collect::<Result<_>>()),
                None => (0..plan.n_paths).into_par_iter().map(job).collect::<Result<_>>(),
            }?;
            let clamp_frac = MeanSe::of(&samples.iter().map(|s| s.clamp_frac).collect::<Vec<_>>()).mean;
            if clamp_frac > 0.0 {
                warnings.push(format!(
                    "n = {n}: variance clamped at 0 on {:.3e} of fine steps",
                    clamp_frac
                ));
            }
            for (j, cfg) in configs.iter().enumerate() {
                let rho = plan.rho_values[j % plan.rho_values.len()];
                cells.push(aggregate(plan, mode, n, rho, cfg, j, &samples, clamp_frac, &mut warnings)?);
            }
        }
        let fits = match mode {
            ExperimentMode::Coverage => Vec::new(),
            _ => fit_rates(plan, mode, &cells),
        };
        Ok(ExperimentReport {
            model: plan.model.name().to_string(),
            mode,
            level,
            n_paths: plan.n_paths,
            cells,
            fits,
            warnings,
        })
    }
}

pub fn run_error_table(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    Harness::default().run_error_table(plan)
}

pub fn coverage_experiment(plan: &ExperimentPlan, level: f64) -> Result<ExperimentReport> {
    Harness::default().coverage_experiment(plan, level)
}

pub fn rate_fit(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    Harness::default().rate_fit(plan)
}

fn path_sample(
    plan: &ExperimentPlan,
    mode: ExperimentMode,
    level: f64,
    n: usize,
    configs: &[EstimatorConfig],
    seed: SeedSpec,
) -> Result<PathSample> {
    let delta_n = 1.0 / n as f64;
    let dt_fine = delta_n / plan.oversample as f64;
    let probe_k = grid_floor(plan.t_probe, delta_n);
    let t_probe = probe_k as f64 * delta_n;
    let horizon = match mode {
        ExperimentMode::ErrorTable => plan.t_end,
        // the estimates at the probe only need the path up to the widest window
        _ => {
            let h_max = configs.iter().map(|c| c.h_n).fold(0.0, f64::max);
            let last = grid_floor(t_probe + h_max, delta_n) + 1;
            (last as f64 * delta_n).min(plan.t_end)
        }
    };
    let op: ObservedPath = simulate_observed(&plan.model, horizon, dt_fine, delta_n, seed, &[])?;
    let mut cells = vec![CellSample::default(); configs.len()];
    let mut current_p = f64::NAN;
    let mut pv: Option<PowerVariation> = None;
    for (cfg, cell) in configs.iter().zip(cells.iter_mut()) {
        if cfg.p != current_p {
            pv = Some(PowerVariation::new(&op.obs, cfg.p));
            current_p = cfg.p;
        }
        let pv = pv.as_ref().unwrap();
        if mode == ExperimentMode::ErrorTable {
            cell.e_n = Some(relative_error_on_grid(&op.obs, &op.v_obs, cfg)?);
        }
        let sigma_p = op.v_obs[probe_k].powf(cfg.p / 2.0);
        if sigma_p > 0.0 {
            let est = pv.estimate(cfg, t_probe)?;
            let studentized = cfg.r_n().sqrt() * (est - sigma_p) / (sigma_p * relative_sd(cfg.p));
            let covered = confidence_interval(est, cfg, level)
                .ok()
                .map(|ci| ci.contains_sigma_p(sigma_p));
            cell.probe = Some(ProbeSample {
                rel_err: ((est / sigma_p).powf(1.0 / cfg.p) - 1.0).abs(),
                studentized,
                covered,
            });
        }
    }
    Ok(PathSample {
        cells,
        clamp_frac: op.clamp_fraction(),
    })
}

#[allow(clippy::too_many_arguments)]
fn aggregate(
    plan: &ExperimentPlan,
    mode: ExperimentMode,
    n: usize,
    rho: f64,
    cfg: &EstimatorConfig,
    j: usize,
    samples: &[PathSample],
    clamp_frac: f64,
    warnings: &mut Vec<String>,
) -> Result<CellReport> {
    let regime = CltRegime::classify(cfg, plan.model.is_pure_jump());
    if mode == ExperimentMode::Coverage && !regime.supports_interval() {
        warnings.push(format!(
            "p = {} n = {n} rho = {rho}: regime {} does not support the plug-in interval",
            cfg.p,
            regime.name()
        ));
    }
    let mean_e = if mode == ExperimentMode::ErrorTable {
        let vals: Vec<f64> = samples
            .iter()
            .filter_map(|s| s.cells[j].e_n)
            .map(|e| e.value)
            .filter(|v| v.is_finite())
            .collect();
        Some(MeanSe::of(&vals))
    } else {
        None
    };
    let excluded_points = samples
        .iter()
        .filter_map(|s| s.cells[j].e_n)
        .map(|e| e.excluded)
        .sum();
    let probes: Vec<ProbeSample> = samples.iter().filter_map(|s| s.cells[j].probe).collect();
    let probe_excluded = samples.len() - probes.len();
    let probe_err = MeanSe::of(&probes.iter().map(|p| p.rel_err).collect::<Vec<_>>());
    let z: Vec<f64> = probes.iter().map(|p| p.studentized).collect();
    let zs = MeanSe::of(&z);
    let studentized = StudentizedSummary {
        mean: zs.mean,
        variance: zs.variance(),
        ks: if z.is_empty() { f64::NAN } else { ks_normal(&z) },
        count: z.len(),
    };
    let flags: Vec<bool> = probes.iter().filter_map(|p| p.covered).collect();
    let coverage = if flags.is_empty() || flags.len() < probes.len() {
        if mode == ExperimentMode::Coverage {
            let c = confidence_interval(1.0, cfg, plan.level).err();
            warnings.push(format!(
                "p = {} n = {n} rho = {rho}: no interval ({})",
                cfg.p,
                c.map(|e| e.to_string()).unwrap_or_default()
            ));
        }
        None
    } else {
        let hits = flags.iter().filter(|&&b| b).count() as f64;
        let m = flags.len() as f64;
        let c = hits / m;
        Some((c, (c * (1.0 - c) / m).sqrt()))
    };
    let predicted_rate = plan.predicted_exponent(n, rho)?;
    Ok(CellReport {
        p: cfg.p,
        n,
        rho,
        h_n: cfg.h_n,
        r_n: cfg.r_n(),
        n_paths: samples.len(),
        mean_e,
        excluded_points,
        probe_err,
        probe_excluded,
        coverage,
        studentized,
        regime,
        predicted_rate,
        clamp_frac,
    })
}

fn fit_rates(plan: &ExperimentPlan, mode: ExperimentMode, cells: &[CellReport]) -> Vec<RateFit> {
    let mut fits = Vec::new();
    for &p in &plan.p_values {
        for &rho in &plan.rho_values {
            let pts: Vec<(f64, MeanSe)> = cells
                .iter()
                .filter(|c| c.p == p && (c.rho - rho).abs() < 1e-12)
                .map(|c| {
                    let m = match mode {
                        ExperimentMode::ErrorTable => c.mean_e.unwrap_or(c.probe_err),
                        _ => c.probe_err,
                    };
                    (c.n as f64, m)
                })
                .filter(|(_, m)| m.mean > 0.0 && m.mean.is_finite())
                .collect();
            let mut distinct: Vec<f64> = pts.iter().map(|x| x.0).collect();
            distinct.dedup();
            if distinct.len() < 3 {
                continue;
            }
            let xs: Vec<f64> = pts.iter().map(|(n, _)| n.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|(_, m)| m.mean.ln()).collect();
            let se: Vec<f64> = pts.iter().map(|(_, m)| m.se / m.mean).collect();
            let f = ols_slope(&xs, &ys, &se);
            let predicted = plan.predicted_exponent(2, rho).unwrap_or(f64::NAN);
            fits.push(RateFit {
                p,
                rho,
                slope: f.slope,
                se: f.se,
                intercept: f.intercept,
                predicted_slope: -predicted,
            });
        }
    }
    fits
}
