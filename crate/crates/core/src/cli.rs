//! Command-line front end: `simulate`, `estimate`, `experiment`, `presets`.
//!
//! Every command reads one TOML file (or a shipped preset) with sections
//! `[model]`, `[simulate]`, `[estimate]` and `[experiment]`; flags override
//! the seed, path count, thread count and output directory. The whole config
//! is validated before any computation starts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::csv_io;
use crate::error::{Error, Result};
use crate::estimator::{default_grid, estimate_series, EstimatorConfig, PowerValidity};
use crate::experiments::{ExperimentMode, ExperimentPlan, Harness};
use crate::inference::confidence_interval;
use crate::kernel::SeedSpec;
use crate::models::{simulate, subsample, true_sigma_at, ModelSpec, Path};

pub const PRESETS: &[(&str, &str)] = &[
    ("paper_table_5_1", include_str!("../presets/paper_table_5_1.toml")),
    ("paper_table_5_2", include_str!("../presets/paper_table_5_2.toml")),
    ("coverage_default", include_str!("../presets/coverage_default.toml")),
    ("rate_fit_jump", include_str!("../presets/rate_fit_jump.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Parser)]
#[command(name = "spotvol", version, about = "Spot volatility from windowed power variations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Shipped preset name (see `presets`).
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Master seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo paths.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a fine-grid path and its observations.
    Simulate(Common),
    /// Estimate spot volatility on observations.
    Estimate(Common),
    /// Run a Monte Carlo experiment plan.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Override the number of paths per cell.
        #[arg(long)]
        n_paths: Option<usize>,
    },
    /// List shipped presets, or print one.
    Presets { name: Option<String> },
}

fn default_t_end() -> f64 {
    1.0
}
fn default_oversample() -> usize {
    100
}
fn default_true() -> bool {
    true
}
fn default_level() -> f64 {
    0.95
}
fn default_t_probe() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Observations per unit time; `delta_n = 1/n`.
    pub n: usize,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default = "default_true")]
    pub write_observations: bool,
}

impl SimulateSection {
    pub fn delta_n(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn dt_fine(&self) -> f64 {
        self.delta_n() / self.oversample as f64
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    /// `t,x` observations file; without it the `[simulate]` section is run.
    pub observations: Option<PathBuf>,
    /// `t,x,v` fine path giving the true volatility.
    pub truth: Option<PathBuf>,
    pub p: f64,
    pub h_n: Option<f64>,
    /// Window exponent: `h_n = n^(rho - 1)` with `n = 1/delta_n`.
    pub rho: Option<f64>,
    #[serde(default = "default_level")]
    pub level: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub mode: ExperimentMode,
    pub n_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t_probe")]
    pub t_probe: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_true")]
    pub whole_window: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    pub simulate: Option<SimulateSection>,
    pub estimate: Option<EstimateSection>,
    pub experiment: Option<ExperimentSection>,
}

fn cfg_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Re-keys a validation error under its config section.
fn in_section(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => cfg_err(&format!("{section}.{name}"), reason),
        Error::UnstableStep(x) => cfg_err(
            &format!("{section}.mu"),
            format!("explicit scheme unstable: mu * dt_fine = {x} >= 1"),
        ),
        other => other,
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "<root>".into());
            cfg_err(&key, msg)
        })
    }

    pub fn load(common: &Common) -> Result<Self> {
        let text = match (&common.config, &common.preset) {
            (Some(p), _) => fs::read_to_string(p).map_err(|e| cfg_err("--config", format!("{}: {e}", p.display())))?,
            (None, Some(name)) => preset(name)
                .ok_or_else(|| cfg_err("--preset", format!("unknown preset `{name}`")))?
                .to_string(),
            (None, None) => return Err(cfg_err("--config", "either --config or --preset is required")),
        };
        Self::parse(&text)
    }

    fn model(&self) -> Result<&ModelSpec> {
        let m = self.model.as_ref().ok_or_else(|| cfg_err("model", "missing section"))?;
        m.validate().map_err(|e| in_section("model", e))?;
        Ok(m)
    }

    pub fn validated_simulation(&self) -> Result<(&ModelSpec, &SimulateSection)> {
        let model = self.model()?;
        let sim = self.simulate.as_ref().ok_or_else(|| cfg_err("simulate", "missing section"))?;
        if sim.n < 1 {
            return Err(cfg_err("simulate.n", "must be >= 1"));
        }
        if !(sim.t_end > 0.0) {
            return Err(cfg_err("simulate.t_end", "must be positive"));
        }
        if sim.oversample < 1 {
            return Err(cfg_err("simulate.oversample", "must be >= 1"));
        }
        if sim.dt_fine() > sim.t_end {
            return Err(cfg_err("simulate.n", "observation step exceeds t_end"));
        }
        if let ModelSpec::BnsJump { mu, .. } = *model {
            let d = mu * sim.dt_fine();
            if d >= 1.0 {
                return Err(in_section("model", Error::UnstableStep(d)));
            }
        }
        Ok((model, sim))
    }

    pub fn experiment_plan(&self) -> Result<(ExperimentMode, ExperimentPlan)> {
        let model = self.model()?.clone();
        let e = self.experiment.as_ref().ok_or_else(|| cfg_err("experiment", "missing section"))?;
        let plan = ExperimentPlan {
            model,
            n_values: e.n_values.clone(),
            rho_values: e.rho_values.clone(),
            p_values: e.p_values.clone(),
            n_paths: e.n_paths,
            seed: e.seed,
            t_probe: e.t_probe,
            t_end: e.t_end,
            oversample: e.oversample,
            level: e.level,
            whole_window: e.whole_window,
        };
        Ok((e.mode, plan))
    }
}

fn create(dir: &FsPath, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    let f = File::create(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    Ok(BufWriter::new(f))
}

pub fn cmd_simulate(cfg: &RunConfig, common: &Common) -> Result<Vec<PathBuf>> {
    let (model, sim) = cfg.validated_simulation()?;
    let seed = SeedSpec::new(common.seed.unwrap_or(sim.seed), sim.stream);
    let path = simulate(model, sim.t_end, sim.dt_fine(), seed)?;
    let mut written = Vec::new();
    csv_io::write_path(&path, create(&common.out, "path.csv")?)?;
    written.push(common.out.join("path.csv"));
    if sim.write_observations {
        let obs = subsample(&path, sim.delta_n())?;
        csv_io::write_observations(&obs, create(&common.out, "observations.csv")?)?;
        written.push(common.out.join("observations.csv"));
    }
    if path.clamped_steps > 0 {
        eprintln!(
            "note: variance clamped at 0 on {} of {} fine steps",
            path.clamped_steps,
            path.steps()
        );
    }
    Ok(written)
}

pub fn cmd_estimate(cfg: &RunConfig, common: &Common) -> Result<Vec<PathBuf>> {
    let est = cfg.estimate.as_ref().ok_or_else(|| cfg_err("estimate", "missing section"))?;
    if !(0.0..1.0).contains(&est.level) {
        return Err(cfg_err("estimate.level", "must lie in [0, 1)"));
    }
    let read = |p: &PathBuf| File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())));
    let (obs, truth): (_, Option<Path>) = match &est.observations {
        Some(p) => {
            let obs = csv_io::read_observations(read(p)?)?;
            let truth = match &est.truth {
                Some(t) => Some(csv_io::read_path(read(t)?)?),
                None => None,
            };
            (obs, truth)
        }
        None => {
            let (model, sim) = cfg.validated_simulation()?;
            let seed = SeedSpec::new(common.seed.unwrap_or(sim.seed), sim.stream);
            let path = simulate(model, sim.t_end, sim.dt_fine(), seed)?;
            (subsample(&path, sim.delta_n())?, Some(path))
        }
    };
    let h_n = match (est.h_n, est.rho) {
        (Some(h), None) => h,
        (None, Some(rho)) => (1.0 / obs.delta_n).powf(rho - 1.0),
        _ => return Err(cfg_err("estimate.h_n", "give exactly one of h_n or rho")),
    };
    let ecfg = EstimatorConfig::new(est.p, obs.delta_n, h_n).map_err(|e| in_section("estimate", e))?;
    if ecfg.validity() == PowerValidity::LlnOnly {
        eprintln!(
            "warning: p = {} is LLN-only (central limit theory needs p = 2 or p >= 3); intervals are indicative",
            est.p
        );
    }
    let grid = default_grid(&obs, &ecfg);
    if grid.is_empty() {
        return Err(cfg_err("estimate.h_n", "window leaves no evaluation points"));
    }
    let mut series = estimate_series(&obs, &ecfg, &grid)?;
    match series
        .sigma_p_hat
        .iter()
        .map(|&s| confidence_interval(s, &ecfg, est.level).map(|ci| (ci.lo_sigma, ci.hi_sigma)))
        .collect::<Result<Vec<_>>>()
    {
        Ok(ci) => series.ci = Some(ci),
        Err(e) => eprintln!("warning: confidence interval columns left empty: {e}"),
    }
    let truth_col = truth
        .as_ref()
        .map(|p| grid.iter().map(|&t| true_sigma_at(p, t)).collect::<Result<Vec<_>>>())
        .transpose()?;
    csv_io::write_series(&series, truth_col.as_deref(), create(&common.out, "estimate.csv")?)?;
    Ok(vec![common.out.join("estimate.csv")])
}

pub fn cmd_experiment(cfg: &RunConfig, common: &Common, n_paths: Option<usize>) -> Result<Vec<PathBuf>> {
    let (mode, mut plan) = cfg.experiment_plan()?;
    if let Some(s) = common.seed {
        plan.seed = s;
    }
    if let Some(k) = n_paths {
        plan.n_paths = k;
    }
    plan.validate().map_err(|e| in_section("experiment", e))?;
    let harness = match common.threads {
        Some(t) => Harness::with_threads(t)?,
        None => Harness::default(),
    };
    let report = harness.run_mode(&plan, mode)?;
    report.write_csv(create(&common.out, "report.csv")?)?;
    report.write_probe_csv(create(&common.out, "probe.csv")?)?;
    print!("{}", report.pretty());
    Ok(vec![common.out.join("report.csv"), common.out.join("probe.csv")])
}

fn error_kind(e: &Error) -> (&'static str, String) {
    match e {
        Error::Config { key, .. } => ("config", key.clone()),
        Error::InvalidParameter { name, .. } => ("config", (*name).to_string()),
        Error::Io(_) => ("io", String::new()),
        Error::UnstableStep(_) => ("config", "model.mu".into()),
        _ => ("run", String::new()),
    }
}

/// Runs the CLI and returns the process exit code. Failures print one
/// `error kind=.. key=.. message=".."` line to stderr.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Presets { name } => match name {
            None => {
                for (n, _) in PRESETS {
                    println!("{n}");
                }
                Ok(Vec::new())
            }
            Some(n) => match preset(n) {
                Some(t) => {
                    print!("{t}");
                    Ok(Vec::new())
                }
                None => Err(cfg_err("presets", format!("unknown preset `{n}`"))),
            },
        },
        Command::Simulate(c) => RunConfig::load(c).and_then(|cfg| cmd_simulate(&cfg, c)),
        Command::Estimate(c) => RunConfig::load(c).and_then(|cfg| cmd_estimate(&cfg, c)),
        Command::Experiment { common, n_paths } => {
            RunConfig::load(common).and_then(|cfg| cmd_experiment(&cfg, common, *n_paths))
        }
    };
    match result {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            let (kind, key) = error_kind(&e);
            eprintln!(
                "error kind={kind} key={} message={:?}",
                if key.is_empty() { "-" } else { &key },
                e.to_string()
            );
            if matches!(e, Error::Config { .. } | Error::InvalidParameter { .. } | Error::UnstableStep(_)) {
                2
            } else {
                1
            }
        }
    }
}
