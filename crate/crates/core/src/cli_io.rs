//! Run configuration, command dispatch and result files.
//!
//! Every run validates its [`RunConfig`], writes it back as `config.json` in
//! the output directory, then writes JSON summaries and CSV curves. Failures
//! are serialized to `error.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escaping::{
    classify_against, log_spaced, solve_escaping_profile, EscapeOptions, Initialization,
};
use crate::field_oracle::{
    initial_state, minimize_full_energy, CylinderGrid, FieldInit, OracleOptions, OracleSummary,
};
use crate::grid::{build_grid, write_columns, RadialGrid};
use crate::harmonic::{harmonic_residual, solve_harmonic_theta, HarmonicOptions, HarmonicSeed};
use crate::nonescaping::{energy_i, profile_residual, solve_nonescaping_profile, SolverOptions};
use crate::potential::PotentialSpec;
use crate::spectral::{ell, locate_threshold};

/// Environment variable holding the worker count for parallel sweeps.
pub const WORKERS_ENV: &str = "GLV_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Non-escaping profile f_ε.
    Profile,
    /// ℓ(ε) on a grid of ε values.
    Spectrum,
    /// Threshold ε_N.
    EpsilonN,
    /// Escaping profile at one ε.
    Escape,
    /// Escaped / non-escaped classification around ε_N.
    Dichotomy,
    /// Harmonic-map limit profile.
    Harmonic,
    /// Full-field cylinder minimization.
    Oracle,
    /// Independent (N, ε) escaping solves, one subdirectory each.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OracleStart {
    Random,
    Embed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub cells: usize,
    pub epsilon: Option<f64>,
    /// Explicit ε list; takes precedence over the log-spaced grid.
    pub epsilons: Option<Vec<f64>>,
    /// Number of log-spaced ε values.
    pub eps_grid: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    /// `quadratic` or a path to a `t,W,Wp` CSV table.
    pub potential: String,
    pub strictly_convex: bool,
    pub tolerance: f64,
    pub escape_tolerance: f64,
    pub threshold_tolerance: f64,
    pub oracle_tolerance: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub seed: u64,
    pub harmonic_seed: HarmonicSeed,
    pub oracle_start: OracleStart,
    /// Write the raw oracle field to `field.bin`.
    pub dump: bool,
    /// Dimensions for `sweep`; defaults to `[N]`.
    pub dims: Vec<usize>,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Profile,
            n: 2,
            cells: 512,
            epsilon: None,
            epsilons: None,
            eps_grid: 12,
            eps_min: 0.02,
            eps_max: 2.0,
            potential: "quadratic".into(),
            strictly_convex: true,
            tolerance: 1e-10,
            escape_tolerance: 1e-9,
            threshold_tolerance: 1e-6,
            oracle_tolerance: 1e-6,
            k: 64,
            layers: 16,
            seed: 42,
            harmonic_seed: HarmonicSeed::Escaping,
            oracle_start: OracleStart::Random,
            dump: false,
            dims: Vec::new(),
            output: PathBuf::from("out"),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Check every numeric field against the preconditions of the command.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("N = {} must be at least 2", self.n)));
        }
        if self.cells < crate::grid::MIN_CELLS {
            return Err(Error::Config(format!("J = {} must be at least {}", self.cells, crate::grid::MIN_CELLS)));
        }
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("escape tolerance", self.escape_tolerance),
            ("threshold tolerance", self.threshold_tolerance),
            ("oracle tolerance", self.oracle_tolerance),
        ] {
            positive(name, v)?;
        }
        if let Some(e) = self.epsilon {
            positive("epsilon", e)?;
        }
        if let Some(list) = &self.epsilons {
            for e in list {
                positive("epsilon", *e)?;
            }
        }
        match self.command {
            Command::Profile | Command::Escape | Command::Oracle => {
                if self.epsilon.is_none() {
                    return Err(Error::Config(format!("{:?} needs --epsilon", self.command)));
                }
            }
            Command::Spectrum | Command::Sweep => {
                positive("eps-min", self.eps_min)?;
                positive("eps-max", self.eps_max)?;
                if self.eps_min > self.eps_max {
                    return Err(Error::Config("eps-min exceeds eps-max".into()));
                }
            }
            Command::Dichotomy => {
                if !(2..=6).contains(&self.n) {
                    return Err(Error::Config(format!("dichotomy needs 2 ≤ N ≤ 6, got {}", self.n)));
                }
            }
            Command::EpsilonN | Command::Harmonic => {}
        }
        if matches!(self.command, Command::Spectrum | Command::Dichotomy | Command::Sweep)
            && self.epsilons.is_none()
            && self.eps_grid == 0
        {
            return Err(Error::Config("eps-grid must be at least 1".into()));
        }
        if self.command == Command::Oracle {
            if self.n != 2 {
                return Err(Error::Config("the cylinder oracle is built for N = 2".into()));
            }
            if self.k < 32 || !self.k.is_multiple_of(2) || self.layers < 8 {
                return Err(Error::Config(format!(
                    "oracle needs even K ≥ 32 and L ≥ 8, got K = {}, L = {}",
                    self.k, self.layers
                )));
            }
        }
        if self.command == Command::Sweep && self.dims.iter().any(|&d| d < 2) {
            return Err(Error::Config("sweep dimensions must be at least 2".into()));
        }
        if self.potential != "quadratic" && !Path::new(&self.potential).is_file() {
            return Err(Error::Config(format!(
                "potential must be `quadratic` or a CSV file, `{}` is neither",
                self.potential
            )));
        }
        Ok(())
    }

    pub fn load_potential(&self) -> Result<PotentialSpec> {
        if self.potential == "quadratic" {
            Ok(PotentialSpec::quadratic())
        } else {
            PotentialSpec::load_csv(Path::new(&self.potential), self.strictly_convex)
        }
    }

    fn radial_grid(&self, n: usize) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(build_grid(n, self.cells)?))
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            ..SolverOptions::default()
        }
    }

    fn escape_options(&self) -> EscapeOptions {
        EscapeOptions {
            tolerance: self.escape_tolerance,
            init: Initialization::EigenfunctionBump,
            ..EscapeOptions::default()
        }
    }

    fn epsilon_list(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.epsilons {
            Some(list) => list.clone(),
            None => log_spaced(lo, hi, self.eps_grid),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Command-line flags, mapped onto [`RunConfig`].
#[derive(Debug, Parser)]
#[command(name = "glvortex", version, about = "Radial Ginzburg-Landau vortex sheet solver")]
pub struct Cli {
    /// Subcommand to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Replay a saved config.json; other flags are ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[arg(long = "J", default_value_t = 512)]
    pub cells: usize,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long = "eps-grid", default_value_t = 12)]
    pub eps_grid: usize,
    #[arg(long = "eps-min", default_value_t = 0.02)]
    pub eps_min: f64,
    #[arg(long = "eps-max", default_value_t = 2.0)]
    pub eps_max: f64,
    #[arg(long, default_value = "quadratic")]
    pub potential: String,
    /// Mark a tabulated potential as not strictly convex.
    #[arg(long = "non-convex")]
    pub non_convex: bool,
    #[arg(long = "tol", default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long = "escape-tol", default_value_t = 1e-9)]
    pub escape_tolerance: f64,
    #[arg(long = "threshold-tol", default_value_t = 1e-6)]
    pub threshold_tolerance: f64,
    #[arg(long = "oracle-tol", default_value_t = 1e-6)]
    pub oracle_tolerance: f64,
    #[arg(long = "K", default_value_t = 64)]
    pub k: usize,
    #[arg(long = "L", default_value_t = 16)]
    pub layers: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "harmonic-seed", value_enum, default_value = "escaping")]
    pub harmonic_seed: HarmonicSeedArg,
    #[arg(long = "oracle-start", value_enum, default_value = "random")]
    pub oracle_start: OracleStart,
    #[arg(long)]
    pub dump: bool,
    /// Comma-separated dimensions for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long = "out", default_value = "out")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HarmonicSeedArg {
    Escaping,
    Equator,
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            let mut cfg = RunConfig::from_json(&fs::read_to_string(path)?)?;
            cfg.command = self.command;
            return Ok(cfg);
        }
        Ok(RunConfig {
            command: self.command,
            n: self.n,
            cells: self.cells,
            epsilon: self.epsilon,
            epsilons: self.epsilons,
            eps_grid: self.eps_grid,
            eps_min: self.eps_min,
            eps_max: self.eps_max,
            potential: self.potential,
            strictly_convex: !self.non_convex,
            tolerance: self.tolerance,
            escape_tolerance: self.escape_tolerance,
            threshold_tolerance: self.threshold_tolerance,
            oracle_tolerance: self.oracle_tolerance,
            k: self.k,
            layers: self.layers,
            seed: self.seed,
            harmonic_seed: match self.harmonic_seed {
                HarmonicSeedArg::Escaping => HarmonicSeed::Escaping,
                HarmonicSeedArg::Equator => HarmonicSeed::Equator,
            },
            oracle_start: self.oracle_start,
            dump: self.dump,
            dims: self.dims.unwrap_or_default(),
            output: self.output,
        })
    }
}

/// Parse command-line arguments (including the program name) into a config.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    cli.into_config()
}

/// Process exit status for an error: 2 for configuration and I/O, 3 for solver failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 2,
        _ => 3,
    }
}

/// Size the global worker pool from `GLV_WORKERS` if set.
pub fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    if workers == 0 {
        return Err(Error::Config(format!("{WORKERS_ENV} must be at least 1")));
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
        log::debug!("worker pool already initialised: {e}");
    }
    Ok(())
}

/// Write `columns` to `<dir>/<name>.csv` (header row, 17 significant digits, LF).
pub fn export_curve(dir: &Path, name: &str, columns: &[(&str, &[f64])]) -> Result<PathBuf> {
    let file_name = if name.ends_with(".csv") { name.to_string() } else { format!("{name}.csv") };
    let path = dir.join(file_name);
    let mut buf = Vec::new();
    write_columns(&mut buf, columns)?;
    fs::write(&path, buf)?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct ErrorReport {
    kind: &'static str,
    message: String,
    exit_code: i32,
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Sizing(_) => "sizing",
        Error::LengthMismatch { .. } => "length_mismatch",
        Error::Domain(_) => "domain",
        Error::NonConvergence { .. } => "non_convergence",
        Error::NumericalBreakdown(_) => "numerical_breakdown",
        Error::EpsilonMismatch { .. } => "epsilon_mismatch",
        Error::NoThreshold { .. } => "no_threshold",
        Error::BracketFailure { .. } => "bracket_failure",
        Error::BoundaryViolation(_) => "boundary_violation",
        Error::Divergent(_) => "divergent",
        Error::Config(_) => "config",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
    }
}

/// Files produced by a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

/// Validate, echo the config, dispatch, and serialize any failure to `error.json`.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let result = config.validate().and_then(|_| {
        fs::create_dir_all(&config.output)?;
        let mut out = RunOutput::default();
        out.files.push(write_json(&config.output, "config.json", config)?);
        dispatch(config, &config.output, &mut out)?;
        Ok(out)
    });
    if let Err(e) = &result {
        let report = ErrorReport {
            kind: error_kind(e),
            message: e.to_string(),
            exit_code: exit_code(e),
        };
        if fs::create_dir_all(&config.output).is_ok() {
            if let Err(io) = write_json(&config.output, "error.json", &report) {
                log::warn!("could not write error.json: {io}");
            }
        }
    }
    result
}

fn dispatch(cfg: &RunConfig, dir: &Path, out: &mut RunOutput) -> Result<()> {
    let spec = cfg.load_potential()?;
    match cfg.command {
        Command::Profile => run_profile(cfg, &spec, dir, out),
        Command::Spectrum => run_spectrum(cfg, &spec, dir, out),
        Command::EpsilonN => {
            let grid = cfg.radial_grid(cfg.n)?;
            let t = locate_threshold(&spec, cfg.n, &grid, cfg.threshold_tolerance, &cfg.solver_options())?;
            out.files.push(write_json(dir, "epsilon_n.json", &t)?);
            Ok(())
        }
        Command::Escape => run_escape(cfg, &spec, cfg.n, cfg.epsilon.unwrap_or_default(), dir, out),
        Command::Dichotomy => {
            let grid = cfg.radial_grid(cfg.n)?;
            let opts = cfg.escape_options();
            let t = locate_threshold(&spec, cfg.n, &grid, cfg.threshold_tolerance, &cfg.solver_options())?;
            let eps = cfg.epsilon_list(t.epsilon_n / 8.0, 4.0 * t.epsilon_n);
            let report = classify_against(&spec, &grid, t.epsilon_n, &eps, cfg.threshold_tolerance, &opts);
            out.files.push(write_json(dir, "dichotomy.json", &report)?);
            Ok(())
        }
        Command::Harmonic => run_harmonic(cfg, dir, out),
        Command::Oracle => run_oracle(cfg, &spec, dir, out),
        Command::Sweep => run_sweep(cfg, &spec, dir, out),
    }
}

#[derive(Debug, Serialize)]
struct ProfileSummary {
    #[serde(rename = "N")]
    n: usize,
    epsilon: f64,
    residual: f64,
    energy: crate::nonescaping::EnergyBreakdown,
}

fn run_profile(cfg: &RunConfig, spec: &PotentialSpec, dir: &Path, out: &mut RunOutput) -> Result<()> {
    let epsilon = cfg.epsilon.unwrap_or_default();
    let grid = cfg.radial_grid(cfg.n)?;
    let pair = solve_nonescaping_profile(spec, &grid, epsilon, &cfg.solver_options())?;
    out.files.push(export_curve(
        dir,
        "profile",
        &[("r", grid.nodes()), ("f", &pair.f), ("g", &pair.g)],
    )?);
    let summary = ProfileSummary {
        n: cfg.n,
        epsilon,
        residual: profile_residual(spec, &pair)?,
        energy: energy_i(spec, &pair)?,
    };
    out.files.push(write_json(dir, "profile.json", &summary)?);
    Ok(())
}

fn run_spectrum(cfg: &RunConfig, spec: &PotentialSpec, dir: &Path, out: &mut RunOutput) -> Result<()> {
    let grid = cfg.radial_grid(cfg.n)?;
    let eps = cfg.epsilon_list(cfg.eps_min, cfg.eps_max);
    let opts = cfg.solver_options();
    let ells = eps
        .par_iter()
        .map(|&e| ell(spec, &grid, e, &opts))
        .collect::<Result<Vec<f64>>>()?;
    out.files.push(export_curve(dir, "spectrum", &[("epsilon", &eps), ("ell", &ells)])?);
    Ok(())
}

#[derive(Debug, Serialize)]
struct EscapeSummary {
    #[serde(rename = "N")]
    n: usize,
    epsilon: f64,
    escaped: bool,
    g0: f64,
    energy: crate::nonescaping::EnergyBreakdown,
    #[serde(rename = "I_nonescaping")]
    i_nonescaping: f64,
    residual: f64,
    iterations: usize,
}

fn run_escape(cfg: &RunConfig, spec: &PotentialSpec, n: usize, epsilon: f64, dir: &Path, out: &mut RunOutput) -> Result<()> {
    let grid = cfg.radial_grid(n)?;
    let res = solve_escaping_profile(spec, &grid, epsilon, &cfg.escape_options())?;
    let base = solve_nonescaping_profile(spec, &grid, epsilon, &cfg.solver_options())?;
    out.files.push(export_curve(
        dir,
        "escape",
        &[("r", grid.nodes()), ("f", &res.pair.f), ("g", &res.pair.g)],
    )?);
    let summary = EscapeSummary {
        n,
        epsilon,
        escaped: res.escaped,
        g0: res.pair.g[0],
        energy: res.energy,
        i_nonescaping: energy_i(spec, &base)?.total,
        residual: res.residual,
        iterations: res.iterations,
    };
    out.files.push(write_json(dir, "escape.json", &summary)?);
    Ok(())
}

#[derive(Debug, Serialize)]
struct HarmonicSummary {
    #[serde(rename = "N")]
    n: usize,
    energy: f64,
    escaped: bool,
    residual: f64,
}

fn run_harmonic(cfg: &RunConfig, dir: &Path, out: &mut RunOutput) -> Result<()> {
    let grid = cfg.radial_grid(cfg.n)?;
    let th = solve_harmonic_theta(cfg.n, &grid, cfg.harmonic_seed, &HarmonicOptions::default())?;
    let (f, g) = (th.f(), th.g());
    out.files.push(export_curve(
        dir,
        "harmonic",
        &[("r", grid.nodes()), ("theta", &th.theta), ("f", &f), ("g", &g)],
    )?);
    let summary = HarmonicSummary {
        n: cfg.n,
        energy: th.energy(),
        escaped: th.escaping,
        residual: harmonic_residual(cfg.n, &th)?,
    };
    out.files.push(write_json(dir, "harmonic.json", &summary)?);
    Ok(())
}

fn run_oracle(cfg: &RunConfig, spec: &PotentialSpec, dir: &Path, out: &mut RunOutput) -> Result<()> {
    let epsilon = cfg.epsilon.unwrap_or_default();
    let cyl = Arc::new(CylinderGrid::new(cfg.k, cfg.layers)?);
    let (init, pair) = match cfg.oracle_start {
        OracleStart::Random => (FieldInit::Random { seed: cfg.seed }, None),
        OracleStart::Embed => {
            let grid = cfg.radial_grid(2)?;
            let res = solve_escaping_profile(spec, &grid, epsilon, &cfg.escape_options())?;
            (FieldInit::Embed, Some(res.pair))
        }
    };
    let start = initial_state(&cyl, epsilon, init, pair.as_ref())?;
    let opts = OracleOptions {
        tolerance: cfg.oracle_tolerance,
        ..OracleOptions::default()
    };
    let state = minimize_full_energy(spec, start, &opts)?;
    out.files.push(write_json(dir, "oracle.json", &OracleSummary::of(&state))?);
    if cfg.dump {
        let path = dir.join("field.bin");
        state.save_binary(&path)?;
        out.files.push(path);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepJob {
    #[serde(rename = "N")]
    n: usize,
    epsilon: f64,
    directory: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_sweep(cfg: &RunConfig, spec: &PotentialSpec, dir: &Path, out: &mut RunOutput) -> Result<()> {
    let dims = if cfg.dims.is_empty() { vec![cfg.n] } else { cfg.dims.clone() };
    let eps = cfg.epsilon_list(cfg.eps_min, cfg.eps_max);
    let jobs: Vec<(usize, f64)> = dims.iter().flat_map(|&n| eps.iter().map(move |&e| (n, e))).collect();
    let results: Vec<(SweepJob, Vec<PathBuf>)> = jobs
        .par_iter()
        .map(|&(n, e)| {
            let name = format!("N{n}_eps{e:.6e}");
            let sub = dir.join(&name);
            let mut job_out = RunOutput::default();
            let outcome = fs::create_dir_all(&sub)
                .map_err(Error::from)
                .and_then(|_| run_escape(cfg, spec, n, e, &sub, &mut job_out));
            let job = SweepJob {
                n,
                epsilon: e,
                directory: name,
                error: outcome.err().map(|err| err.to_string()),
            };
            (job, job_out.files)
        })
        .collect();
    let mut summary = Vec::with_capacity(results.len());
    for (job, files) in results {
        out.files.extend(files);
        summary.push(job);
    }
    out.files.push(write_json(dir, "sweep.json", &summary)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig {
            command: Command::Dichotomy,
            epsilons: Some(vec![0.1, 0.2]),
            ..RunConfig::default()
        };
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn validation_catches_bad_ranges() {
        let mut cfg = RunConfig {
            command: Command::Profile,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.epsilon = Some(-1.0);
        assert!(cfg.validate().is_err());
        cfg.epsilon = Some(0.5);
        assert!(cfg.validate().is_ok());
        cfg.cells = 8;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parse_flags() {
        let cfg = parse_args(["glvortex", "epsilon-n", "--N", "3", "--potential", "quadratic"]).unwrap();
        assert_eq!(cfg.command, Command::EpsilonN);
        assert_eq!(cfg.n, 3);
        assert!(parse_args(["glvortex", "bogus"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(
            exit_code(&Error::NonConvergence {
                iterations: 1,
                residual: 1.0
            }),
            3
        );
    }
}
