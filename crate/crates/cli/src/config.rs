//! Command-line flags, the optional TOML config file, and their merge into a
//! [`RunConfig`]. Flags win over file values, which win over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pll_lockin_core::{LoopParams, StartPoint};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "pll-lockin", version, about = "Lock-in ranges of type 2 PLLs with piecewise-linear phase detectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// Flat TOML file with default values for any flag
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Loop filter time constant tau1 [s]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau1: Option<f64>,
    /// Loop filter time constant tau2 [s]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau2: Option<f64>,
    /// VCO gain [rad/(s V)]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kvco: Option<f64>,
    /// Rising slope of the phase detector characteristic
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Frequency error after the step [rad/s]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized batches
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients, equilibria, exact lock-in ranges and published estimates
    Analyze,
    /// Single trajectory after a frequency step or from a free initial state
    Simulate(SimulateArgs),
    /// Phase portrait dataset of the reduced system with the analytic separatrix
    Portrait(PortraitArgs),
    /// Exact ranges and estimates over a parameter grid
    Sweep(SweepArgs),
    /// Randomized cross-check of the closed forms against simulation
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartArg {
    Stable,
    Saddle,
}

impl From<StartArg> for StartPoint {
    fn from(s: StartArg) -> Self {
        match s {
            StartArg::Stable => StartPoint::Stable,
            StartArg::Saddle => StartPoint::Saddle,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    /// Frequency error before the step (default: -omega)
    #[arg(long, allow_negative_numbers = true)]
    pub omega_before: Option<f64>,
    /// Equilibrium of the pre-step system the loop starts in
    #[arg(long, value_enum)]
    pub start: Option<StartArg>,
    /// Free initial loop-filter state; switches to a run without a step
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Free initial phase error; switches to a run without a step
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
    /// Integration horizon [s]
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct PortraitArgs {
    /// Separatrix samples on [-pi, pi]
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Trajectory seeds along theta_e
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Trajectory seeds along y
    #[arg(long)]
    pub n_y: Option<usize>,
    /// Half-height of the seed grid in y (default: 1.5 y_l)
    #[arg(long)]
    pub y_max: Option<f64>,
    /// Length of each trajectory in reduced time
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    /// Grid as `v1,v2,...` or `start:stop:n`
    #[arg(long)]
    pub tau1_grid: Option<String>,
    #[arg(long)]
    pub tau2_grid: Option<String>,
    #[arg(long)]
    pub kvco_grid: Option<String>,
    #[arg(long)]
    pub k_grid: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct VerifyArgs {
    /// Random parameter sets, spread evenly over the three cases
    #[arg(long)]
    pub sets: Option<usize>,
    /// Bisection resolution relative to the Gardner estimate
    #[arg(long)]
    pub bisect_rel_tol: Option<f64>,
}

/// Every key the config file may contain.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub kvco: Option<f64>,
    pub k: Option<f64>,
    pub omega: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub omega_before: Option<f64>,
    pub start: Option<StartArg>,
    pub x0: Option<f64>,
    pub theta0: Option<f64>,
    pub t_max: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub n_samples: Option<usize>,
    pub n_theta: Option<usize>,
    pub n_y: Option<usize>,
    pub y_max: Option<f64>,
    pub duration: Option<f64>,
    pub tau1_grid: Option<String>,
    pub tau2_grid: Option<String>,
    pub kvco_grid: Option<String>,
    pub k_grid: Option<String>,
    pub sets: Option<usize>,
    pub bisect_rel_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulateMode {
    Step { omega_before: f64, start: StartPoint },
    Free { x0: f64, theta0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub params: LoopParams,
    pub omega: f64,
    pub mode: SimulateMode,
    pub t_max: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitConfig {
    pub params: LoopParams,
    pub n_samples: usize,
    pub n_theta: usize,
    pub n_y: usize,
    pub y_max: Option<f64>,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub tau1: Vec<f64>,
    pub tau2: Vec<f64>,
    pub k_vco: Vec<f64>,
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub sets: usize,
    pub bisect_rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandConfig {
    Analyze { params: LoopParams, omega: Option<f64> },
    Simulate(SimulateConfig),
    Portrait(PortraitConfig),
    Sweep(SweepConfig),
    Verify(VerifyConfig),
}

/// Fully resolved run: one subcommand plus output and seed settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 0;

fn required(name: &str, flag: Option<f64>, file: Option<f64>) -> CliResult<f64> {
    flag.or(file)
        .ok_or_else(|| CliError::Usage(format!("missing --{name} (flag or config key `{name}`)")))
}

fn positive_count(name: &str, v: usize, min: usize) -> CliResult<usize> {
    if v < min {
        return Err(CliError::Usage(format!("--{} must be at least {min}, got {v}", name.replace('_', "-"))));
    }
    Ok(v)
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{} must be finite and > 0, got {v}", name.replace('_', "-"))))
    }
}

/// Parses `v1,v2,...` or `start:stop:n`. The result must be non-empty and
/// strictly increasing.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Usage(format!("grid `{spec}`: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{}` is not a number", s.trim())));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:n"));
        }
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("n must be a positive integer"))?;
        match n {
            0 => return Err(bad("n must be a positive integer")),
            1 => vec![start],
            _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(num).collect::<CliResult<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("values must be strictly increasing"));
    }
    Ok(values)
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> CliResult<Self> {
        let common = cli.common;
        let file = match &common.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let params = || -> CliResult<LoopParams> {
            Ok(LoopParams::new(
                required("tau1", common.tau1, file.tau1)?,
                required("tau2", common.tau2, file.tau2)?,
                required("kvco", common.kvco, file.kvco)?,
                required("k", common.k, file.k)?,
            )?)
        };
        let omega = common.omega.or(file.omega);

        let command = match cli.command {
            Command::Analyze => CommandConfig::Analyze { params: params()?, omega },
            Command::Simulate(a) => {
                let params = params()?;
                let omega = omega.ok_or_else(|| CliError::Usage("simulate needs --omega".into()))?;
                let x0 = a.x0.or(file.x0);
                let theta0 = a.theta0.or(file.theta0);
                let mode = if x0.is_some() || theta0.is_some() {
                    SimulateMode::Free {
                        x0: x0.unwrap_or(params.equilibrium_x(omega)),
                        theta0: theta0.unwrap_or(0.0),
                    }
                } else {
                    SimulateMode::Step {
                        omega_before: a.omega_before.or(file.omega_before).unwrap_or(-omega),
                        start: a.start.or(file.start).unwrap_or(StartArg::Stable).into(),
                    }
                };
                let t_max = a.t_max.or(file.t_max).map(|t| positive("t_max", t)).transpose()?;
                CommandConfig::Simulate(SimulateConfig {
                    params,
                    omega,
                    mode,
                    t_max,
                    rel_tol: positive("rel_tol", a.rel_tol.or(file.rel_tol).unwrap_or(1e-9))?,
                    abs_tol: positive("abs_tol", a.abs_tol.or(file.abs_tol).unwrap_or(1e-12))?,
                })
            }
            Command::Portrait(a) => CommandConfig::Portrait(PortraitConfig {
                params: params()?,
                n_samples: positive_count("n_samples", a.n_samples.or(file.n_samples).unwrap_or(256), 16)?,
                n_theta: positive_count("n_theta", a.n_theta.or(file.n_theta).unwrap_or(13), 1)?,
                n_y: positive_count("n_y", a.n_y.or(file.n_y).unwrap_or(9), 1)?,
                y_max: a.y_max.or(file.y_max).map(|v| positive("y_max", v)).transpose()?,
                duration: positive("duration", a.duration.or(file.duration).unwrap_or(4.0))?,
            }),
            Command::Sweep(a) => {
                let axis = |name: &str, grid: Option<String>, single: Option<f64>| -> CliResult<Vec<f64>> {
                    match (grid, single) {
                        (Some(g), _) => parse_grid(&g),
                        (None, Some(v)) => Ok(vec![v]),
                        (None, None) => Err(CliError::Usage(format!("sweep needs --{name}-grid or --{name}"))),
                    }
                };
                CommandConfig::Sweep(SweepConfig {
                    tau1: axis("tau1", a.tau1_grid.or(file.tau1_grid), common.tau1.or(file.tau1))?,
                    tau2: axis("tau2", a.tau2_grid.or(file.tau2_grid), common.tau2.or(file.tau2))?,
                    k_vco: axis("kvco", a.kvco_grid.or(file.kvco_grid), common.kvco.or(file.kvco))?,
                    k: axis("k", a.k_grid.or(file.k_grid), common.k.or(file.k))?,
                })
            }
            Command::Verify(a) => CommandConfig::Verify(VerifyConfig {
                sets: positive_count("sets", a.sets.or(file.sets).unwrap_or(30), 1)?,
                bisect_rel_tol: positive("bisect_rel_tol", a.bisect_rel_tol.or(file.bisect_rel_tol).unwrap_or(1e-5))?,
            }),
        };
        Ok(RunConfig {
            command,
            out: common.out.or(file.out),
            format: common.format.or(file.format).unwrap_or_default(),
            seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> CliResult<RunConfig> {
        let mut full = vec!["pll-lockin"];
        full.extend_from_slice(args);
        RunConfig::resolve(Cli::try_parse_from(full).unwrap())
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        for bad in ["", "1,,2", "3,2", "1:2", "1:2:0", "0:0:3", "a,b", "1,nan"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "tau1 = 0.0633\ntau2 = 0.0225\nkvco = 250.0\nk = 0.6366197723675814\nomega = 50.0\nformat = \"json\"\nseed = 9\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = resolve(&["analyze", "--config", p, "--kvco", "300"]).unwrap();
        match cfg.command {
            CommandConfig::Analyze { params, omega } => {
                assert_eq!(params.k_vco, 300.0);
                assert_eq!(params.tau1, 0.0633);
                assert_eq!(omega, Some(50.0));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!((cfg.format, cfg.seed), (Format::Json, 9));
        let cfg = resolve(&["analyze", "--config", p, "--format", "csv", "--seed", "4"]).unwrap();
        assert_eq!((cfg.format, cfg.seed), (Format::Csv, 4));
    }

    #[test]
    fn unknown_file_key_rejected() {
        assert!(FileConfig::parse("tau3 = 1.0").is_err());
        assert!(FileConfig::parse("[section]\ntau1 = 1.0").is_err());
    }

    #[test]
    fn validation_errors_are_usage_errors() {
        let e = resolve(&["analyze", "--tau1", "0.0633", "--tau2", "0.0225", "--kvco", "250", "--k", "0.3"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("`k`"), "{e}");
        let e = resolve(&["analyze", "--tau1", "0.0633"]).unwrap_err();
        assert!(e.to_string().contains("--tau2"));
        assert!(resolve(&["sweep", "--tau1-grid", "2,1", "--tau2", "1", "--kvco", "1", "--k", "1"]).is_err());
    }

    #[test]
    fn simulate_modes() {
        let base = ["simulate", "--tau1", "0.0633", "--tau2", "0.0225", "--kvco", "250", "--k", "1", "--omega", "60"];
        match resolve(&base).unwrap().command {
            CommandConfig::Simulate(s) => assert_eq!(s.mode, SimulateMode::Step { omega_before: -60.0, start: StartPoint::Stable }),
            other => panic!("{other:?}"),
        }
        let mut free = base.to_vec();
        free.extend(["--theta0", "-1.5"]);
        match resolve(&free).unwrap().command {
            CommandConfig::Simulate(s) => {
                assert!(matches!(s.mode, SimulateMode::Free { theta0, .. } if theta0 == -1.5))
            }
            other => panic!("{other:?}"),
        }
    }
}
