//! Command-line flags, the optional TOML config file and their merge.

use std::path::{Path, PathBuf};

use bandwagon::{Distribution, Gaussian, Logistic};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::io::read_table;

/// Demand, pricing and phase diagrams for goods with social influence.
#[derive(Debug, Parser)]
#[command(name = "bandwagon", version, about)]
pub struct Cli {
    /// What to compute.
    #[command(subcommand)]
    pub command: Command,
    /// Parameters shared by the subcommands.
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Subcommands.
#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Inverse demand curves p_hat = D(j; eta) for each --j.
    Demand,
    /// Customers' phase diagram: p_hat_L(j), p_hat_U(j) and critical points.
    PhaseCustomer,
    /// Monopolist's phase diagram: every h-line and critical points.
    PhaseSupply,
    /// Profit maxima and optimal strategy at one (j, h).
    Optimize,
    /// Dynamic runs: price sweeps, pricing policies, finite populations.
    Simulate(SimulateArgs),
    /// Moments, critical scalars and supply regularity of the distribution.
    CheckDist,
    /// Expansions near B or the null-price line against the exact solver.
    Asymptotics(AsymptoticsArgs),
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// logistic, gaussian or table:<path to x,F csv>.
    #[arg(long, global = true)]
    pub dist: Option<String>,
    /// Social strength, comma-separated for several curves.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub j: Option<Vec<f64>>,
    /// Mean willingness to pay net of cost.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub h: Option<f64>,
    /// Shifted price, or a lo,hi range for sweeps.
    #[arg(
        long = "p-hat",
        global = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub p_hat: Option<Vec<f64>>,
    /// Number of grid points (eta samples, j samples, sweep steps or epsilons).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed of the agent population.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file of key = value defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Flags of `simulate`.
#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Scenario to run.
    #[arg(long, value_enum)]
    pub policy: Option<Policy>,
    /// Initial demand branch (tatonnement, best-response).
    #[arg(long, value_enum)]
    pub start: Option<StartBranch>,
    /// Price decrement of the tatonnement.
    #[arg(long)]
    pub step: Option<f64>,
    /// Population size for best-response runs.
    #[arg(long)]
    pub agents: Option<usize>,
}

/// Flags of `asymptotics`.
#[derive(Debug, Clone, Default, Args)]
pub struct AsymptoticsArgs {
    /// Which expansion.
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
}

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Comma-separated values.
    Csv,
    /// JSON.
    Json,
}

/// Simulation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Up and down price sweep showing hysteresis.
    Sweep,
    /// Introductory pricing.
    Introductory,
    /// Tatonnement from the optimal price.
    Tatonnement,
    /// Least-regret fallback comparison.
    Minimax,
    /// Finite agent population best response at one price.
    BestResponse,
}

/// Initial demand branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartBranch {
    /// No buyers.
    Low,
    /// Everybody buys.
    High,
}

/// Expansion selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    /// j = j_B, h = h_B + epsilon.
    FixedJ,
    /// h = h_B, j = j_B + epsilon.
    FixedH,
    /// h = h_0(j) + epsilon at fixed --j.
    NullPrice,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dist: Option<String>,
    j: Option<OneOrMany>,
    h: Option<f64>,
    p_hat: Option<OneOrMany>,
    grid: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
    policy: Option<Policy>,
    start: Option<StartBranch>,
    step: Option<f64>,
    agents: Option<usize>,
    regime: Option<RegimeArg>,
}

/// Validated parameters of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Subcommand.
    pub command: Command,
    /// Willingness-to-pay law.
    pub dist: Distribution,
    /// Social strengths.
    pub j: Vec<f64>,
    /// Mean willingness to pay net of cost.
    pub h: Option<f64>,
    /// Shifted price(s).
    pub p_hat: Option<Vec<f64>>,
    /// Grid size.
    pub grid: Option<usize>,
    /// Output directory, if given.
    pub out: Option<PathBuf>,
    /// Output format, if given.
    pub format: Option<Format>,
    /// Population seed.
    pub seed: u64,
    /// Simulation scenario.
    pub policy: Policy,
    /// Initial branch.
    pub start: StartBranch,
    /// Tatonnement step.
    pub step: f64,
    /// Population size.
    pub agents: usize,
    /// Expansion.
    pub regime: RegimeArg,
}

impl RunConfig {
    /// Merges flags over the config file and validates the result.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let file = match &cli.common.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let c = cli.common;
        let (sim, asym) = match &cli.command {
            Command::Simulate(s) => (s.clone(), AsymptoticsArgs::default()),
            Command::Asymptotics(a) => (SimulateArgs::default(), a.clone()),
            _ => Default::default(),
        };
        let dist_name = c.dist.or(file.dist).unwrap_or_else(|| "logistic".into());
        let cfg = RunConfig {
            command: cli.command,
            dist: parse_dist(&dist_name)?,
            j: c.j.or(file.j.map(OneOrMany::into_vec)).unwrap_or_default(),
            h: c.h.or(file.h),
            p_hat: c.p_hat.or(file.p_hat.map(OneOrMany::into_vec)),
            grid: c.grid.or(file.grid),
            out: c.out.or(file.out),
            format: c.format.or(file.format),
            seed: c.seed.or(file.seed).unwrap_or(0),
            policy: sim.policy.or(file.policy).unwrap_or(Policy::Sweep),
            start: sim.start.or(file.start).unwrap_or(StartBranch::Low),
            step: sim.step.or(file.step).unwrap_or(1e-3),
            agents: sim.agents.or(file.agents).unwrap_or(10_000),
            regime: asym.regime.or(file.regime).unwrap_or(RegimeArg::FixedJ),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if let Some(bad) = self.j.iter().find(|j| !(j.is_finite() && **j >= 0.0)) {
            return Err(CliError::config(format!(
                "--j must be finite and non-negative, got {bad}"
            )));
        }
        if matches!(self.h, Some(h) if !h.is_finite()) {
            return Err(CliError::config("--h must be finite"));
        }
        if let Some(p) = &self.p_hat {
            if p.is_empty() || p.len() > 2 || p.iter().any(|x| !x.is_finite()) {
                return Err(CliError::config(
                    "--p-hat takes one value or a lo,hi pair of finite numbers",
                ));
            }
        }
        if matches!(self.grid, Some(n) if n < 2) {
            return Err(CliError::config("--grid must be at least 2"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(CliError::config("--step must be positive"));
        }
        if self.agents == 0 {
            return Err(CliError::config("--agents must be positive"));
        }
        Ok(())
    }

    /// The single `j` of a point query.
    pub fn single_j(&self) -> Result<f64> {
        match self.j.as_slice() {
            [j] => Ok(*j),
            [] => Err(CliError::config("--j is required")),
            _ => Err(CliError::config("this command takes a single --j")),
        }
    }

    /// Requested format, or the subcommand's default.
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    /// `h`, required.
    pub fn require_h(&self) -> Result<f64> {
        self.h.ok_or_else(|| CliError::config("--h is required"))
    }
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Parses `logistic`, `gaussian` or `table:<path>`.
pub fn parse_dist(name: &str) -> Result<Distribution> {
    match name {
        "logistic" => Ok(Distribution::Logistic(Logistic)),
        "gaussian" | "normal" => Ok(Distribution::Gaussian(Gaussian)),
        other => match other.strip_prefix("table:") {
            Some(path) => Ok(Distribution::Tabulated(read_table(Path::new(path))?)),
            None => Err(CliError::config(format!(
                "unknown distribution '{other}' (expected logistic, gaussian or table:<path>)"
            ))),
        },
    }
}
