use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::LabError;

#[derive(Debug, Parser)]
#[command(name = "cohomolab", version, about = "Twisted cohomology and deformation experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Clone, Args)]
pub struct GlobalArgs {
    /// Preset group (Z, F2, Z2, Z3, T2) or a presentation file.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Complex file; defaults to the presentation complex of the group.
    #[arg(long, global = true)]
    pub complex: Option<PathBuf>,
    /// Representation: trivial:d, char:p/q[,p/q..], circle:N, rot:p/q, unitary:d, or a file.
    #[arg(long, global = true)]
    pub rep: Option<String>,
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Comma-separated epsilon grid.
    #[arg(long, global = true)]
    pub eps: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Absolute rank threshold replacing the relative default.
    #[arg(long = "rank-tol", global = true)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "COHOMOLAB_JOBS")]
    pub jobs: Option<usize>,
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cohomology dimensions and Kazhdan constants in every degree.
    Cohomology,
    /// Random deformations over an epsilon grid, one CSV row per (seed, epsilon).
    Sweep(SweepArgs),
    /// Circle discretizations: Kazhdan constant, certified epsilon and the flattening counterexample.
    Scaling(ScalingArgs),
    /// Runs the invariant suite over all bundled fixtures.
    Verify(VerifyArgs),
    /// Local rigidity certificate from the adjoint representation.
    Weil,
}

#[derive(Debug, Default, Clone, Args)]
pub struct SweepArgs {
    /// conjugation, derivation, diagonal, diagonal-scaled, flatten or free.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Mode count for the flatten strategy.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Block split for the derivation strategy.
    #[arg(long)]
    pub split: Option<usize>,
}

#[derive(Debug, Default, Clone, Args)]
pub struct ScalingArgs {
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
}

#[derive(Debug, Default, Clone, Args)]
pub struct VerifyArgs {
    /// Comma-separated check groups to run.
    #[arg(long)]
    pub only: Option<String>,
}

/// Flags merged with the optional config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub preset: Option<String>,
    pub complex: Option<PathBuf>,
    pub rep: Option<String>,
    pub degree: Option<usize>,
    pub eps: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub rank_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub strategy: Option<String>,
    pub modes: Option<usize>,
    pub split: Option<usize>,
    pub n_list: Vec<usize>,
    pub only: Option<Vec<String>>,
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Input(format!("{}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| LabError::Input(format!("{}: {e}", path.display())))?;
    let scalar = |v: &toml::Value| match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        _ => None,
    };
    let mut map = BTreeMap::new();
    for (k, v) in &table {
        let value = match v {
            toml::Value::Array(items) => items.iter().map(scalar).collect::<Option<Vec<_>>>().map(|xs| xs.join(",")),
            other => scalar(other),
        }
        .ok_or_else(|| LabError::Input(format!("{}: unsupported value for {k}", path.display())))?;
        map.insert(k.replace('_', "-"), value);
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, LabError> {
    v.parse().map_err(|_| LabError::Input(format!("invalid value {v:?} for {key}")))
}

pub fn parse_eps_grid(s: &str) -> Result<Vec<f64>, LabError> {
    let grid = s
        .split(',')
        .map(|t| parse_value::<f64>("eps", t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(LabError::Input(format!("epsilon grid must be finite and nonnegative: {s}")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Input(format!("epsilon grid must be strictly increasing: {s}")));
    }
    Ok(grid)
}

pub fn parse_n_list(s: &str) -> Result<Vec<usize>, LabError> {
    let list = s.split(',').map(|t| parse_value::<usize>("n-list", t.trim())).collect::<Result<Vec<_>, _>>()?;
    if list.iter().any(|&n| n < 3) {
        return Err(LabError::Input(format!("every N must be at least 3: {s}")));
    }
    Ok(list)
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self, LabError> {
        let g = &cli.global;
        let cfg = match &g.config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        let known = [
            "preset", "complex", "rep", "degree", "eps", "trials", "seed", "rank-tol", "out", "jobs", "strategy", "modes",
            "split", "n-list", "only",
        ];
        if let Some(k) = cfg.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(LabError::Input(format!("unknown config key {k:?}")));
        }
        let get = |k: &str| cfg.get(k).cloned();
        let num = |k: &str| -> Result<Option<usize>, LabError> { get(k).map(|v| parse_value(k, &v)).transpose() };

        let (strategy, modes, split, n_list, only) = match &cli.command {
            Command::Sweep(a) => (a.strategy.clone(), a.modes, a.split, None, None),
            Command::Scaling(a) => (None, None, None, a.n_list.clone(), None),
            Command::Verify(a) => (None, None, None, None, a.only.clone()),
            _ => (None, None, None, None, None),
        };
        let eps = match g.eps.clone().or_else(|| get("eps")) {
            Some(s) => parse_eps_grid(&s)?,
            None => vec![0.01, 0.05, 0.1],
        };
        let trials = g.trials.or(num("trials")?).unwrap_or(10);
        if trials == 0 {
            return Err(LabError::Input("trials must be at least 1".into()));
        }
        let n_list = match n_list.or_else(|| get("n-list")) {
            Some(s) => parse_n_list(&s)?,
            None => vec![4, 8, 16, 64],
        };
        let rank_tol = match g.rank_tol {
            Some(t) => Some(t),
            None => get("rank-tol").map(|v| parse_value("rank-tol", &v)).transpose()?,
        };
        if let Some(t) = rank_tol {
            if !(t >= 0.0) {
                return Err(LabError::Input(format!("rank tolerance must be nonnegative, got {t}")));
            }
        }
        Ok(Self {
            preset: g.preset.clone().or_else(|| get("preset")),
            complex: g.complex.clone().or_else(|| get("complex").map(PathBuf::from)),
            rep: g.rep.clone().or_else(|| get("rep")),
            degree: g.degree.or(num("degree")?),
            eps,
            trials,
            seed: match g.seed {
                Some(s) => s,
                None => get("seed").map(|v| parse_value("seed", &v)).transpose()?.unwrap_or(0),
            },
            rank_tol,
            out: g.out.clone().or_else(|| get("out").map(PathBuf::from)),
            jobs: g.jobs.or(num("jobs")?),
            strategy: strategy.or_else(|| get("strategy")),
            modes: modes.or(num("modes")?),
            split: split.or(num("split")?),
            n_list,
            only: only.or_else(|| get("only")).map(|s| s.split(',').map(|t| t.trim().to_string()).collect()),
        })
    }
}
