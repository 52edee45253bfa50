use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use deepcycle::analysis::DEFAULT_TRANSITION_HOURS;
use deepcycle::emission::{DynamicEmissionParams, StaticEmissionParams};
use deepcycle::grid::{ieee30_mod, load_case, CaseData, IEEE30_MOD_CASE};
use deepcycle::milp::{Branching, ExternalSolver, SolverOptions};
use deepcycle::uc::RampCostLevel;
use serde::{Deserialize, Serialize};

pub const OUT_ENV: &str = "DEEPCYCLE_OUT";
pub const DEFAULT_OUT: &str = "deepcycle-out";
pub const BUNDLED: &str = "bundled";

/// Every setting a config file may supply. Keys match the long flag names
/// with `-` replaced by `_`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    pub out: Option<PathBuf>,
    pub levels: Option<Vec<String>>,
    pub wind: Option<WindMode>,
    pub carbon_price: Option<f64>,
    pub damage_mult: Option<f64>,
    pub mip_gap: Option<f64>,
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub branching: Option<String>,
    pub seed: Option<u64>,
    pub external_solver: Option<String>,
    pub jobs: Option<usize>,
    pub tau: Option<f64>,
    pub static_params: Option<StaticEmissionParams>,
    pub dynamic_params: Option<DynamicEmissionParams>,
    pub samples: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub g_max: Option<f64>,
    pub count: Option<usize>,
    pub noise: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<(FileConfig, String)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok((cfg, text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WindMode {
    On,
    Off,
    Both,
}

impl WindMode {
    pub fn settings(self) -> Vec<bool> {
        match self {
            WindMode::On => vec![true],
            WindMode::Off => vec![false],
            WindMode::Both => vec![true, false],
        }
    }
}

pub fn wind_label(on: bool) -> &'static str {
    if on {
        "wind_on"
    } else {
        "wind_off"
    }
}

/// A level is a default label (`zeros`, `low`, `high`, `very_high`) or
/// `label:ru:rd`.
pub fn parse_level(s: &str) -> Result<RampCostLevel> {
    let s = s.trim();
    if let Some(level) = RampCostLevel::by_label(s) {
        return Ok(level);
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 || parts[0].is_empty() {
        bail!("unknown ramp-cost level {s:?}; use one of zeros, low, high, very_high or label:ru:rd");
    }
    let ru: f64 = parts[1].parse().with_context(|| format!("ramp-up cost in {s:?}"))?;
    let rd: f64 = parts[2].parse().with_context(|| format!("ramp-down cost in {s:?}"))?;
    let level = RampCostLevel::new(parts[0], ru, rd);
    level.check()?;
    Ok(level)
}

pub fn parse_levels(items: &[String]) -> Result<Vec<RampCostLevel>> {
    let levels: Vec<RampCostLevel> = items
        .iter()
        .flat_map(|i| i.split(','))
        .filter(|s| !s.trim().is_empty())
        .map(parse_level)
        .collect::<Result<_>>()?;
    if levels.is_empty() {
        bail!("no ramp-cost levels given");
    }
    let mut labels: Vec<&str> = levels.iter().map(|l| l.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        bail!("duplicate ramp-cost level labels");
    }
    Ok(levels)
}

/// Where a case comes from, with the exact bytes that were read.
#[derive(Debug, Clone)]
pub struct CaseInput {
    pub source: String,
    pub text: String,
    pub case: CaseData,
}

pub fn load_case_input(spec: &str) -> Result<CaseInput> {
    if spec == BUNDLED {
        return Ok(CaseInput {
            source: BUNDLED.into(),
            text: IEEE30_MOD_CASE.into(),
            case: ieee30_mod(),
        });
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading case {spec}"))?;
    let case = load_case(spec).with_context(|| format!("loading case {spec}"))?;
    Ok(CaseInput {
        source: spec.into(),
        text,
        case,
    })
}

/// Output root: flag, then config file, then the environment, then
/// `./deepcycle-out`.
pub fn resolve_out(flag: Option<PathBuf>, file: &FileConfig) -> PathBuf {
    flag.or_else(|| file.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Fails early when `dir` cannot be created or written.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", dir.display()))?;
    let _ = std::fs::remove_file(probe);
    Ok(())
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SolverArgs {
    /// Relative MIP gap at which the search stops.
    #[arg(long)]
    pub mip_gap: Option<f64>,
    /// Wall-clock limit per solve, seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// `pseudocost` (default) or `most-fractional`.
    #[arg(long)]
    pub branching: Option<String>,
    /// External solver command; `{mps}` and `{sol}` are replaced by the
    /// problem and solution file paths.
    #[arg(long)]
    pub external_solver: Option<String>,
}

impl SolverArgs {
    pub fn resolve(&self, file: &FileConfig) -> Result<SolverOptions> {
        let mut opts = SolverOptions::default();
        if let Some(g) = self.mip_gap.or(file.mip_gap) {
            opts.mip_gap = g;
        }
        if let Some(t) = self.time_limit.or(file.time_limit) {
            if !(t > 0.0 && t.is_finite()) {
                bail!("time limit must be a positive number of seconds");
            }
            opts.time_limit = Some(Duration::from_secs_f64(t));
        }
        opts.node_limit = self.node_limit.or(file.node_limit);
        if let Some(b) = self.branching.as_deref().or(file.branching.as_deref()) {
            opts.branching = match b {
                "pseudocost" => Branching::Pseudocost,
                "most-fractional" | "most_fractional" => Branching::MostFractional,
                other => bail!("unknown branching rule {other:?}"),
            };
        }
        opts.external_solver = self
            .external_solver
            .clone()
            .or_else(|| file.external_solver.clone())
            .map(ExternalSolver::new);
        opts.check()?;
        Ok(opts)
    }
}

/// Transition time for emission accounting and emission blocks.
pub fn resolve_tau(flag: Option<f64>, file: &FileConfig) -> f64 {
    flag.or(file.tau).unwrap_or(DEFAULT_TRANSITION_HOURS)
}
