//! Run configuration: a flat key-value file with one section per
//! component, merged with command-line overrides. The effective
//! configuration is echoed verbatim into every report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::baselines::StabilityConfig;
use crate::episode::{EpisodeConfig, PenaltyMode, Theta5Route};
use crate::error::{Error, Result};
use crate::solver::EnetSettings;

/// mRMR gene budget: fixed, or matched to another method's mean panel
/// size within the same benchmark run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MrmrBudget {
    Fixed(usize),
    Matched(String),
}

/// Effective configuration of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub matrix: PathBuf,
    pub labels: PathBuf,
    pub network: Option<PathBuf>,
    pub transposed: bool,
    pub network_threshold: u32,
    pub network_binary: bool,
    pub out_dir: PathBuf,
    pub methods: Vec<String>,
    pub outer_folds: usize,
    pub seed: u64,
    /// Worker threads; 0 keeps the library default.
    pub parallelism: usize,
    pub consensus_num: usize,
    pub consensus_den: usize,
    pub eval_l2: f64,
    pub min_psi: f64,
    pub dump_cv_curves: bool,
    pub mrmr_budget: MrmrBudget,
    pub mrmr_bins: usize,
    #[serde(serialize_with = "serialize_episode")]
    pub episode: EpisodeConfig,
    #[serde(serialize_with = "serialize_stability")]
    pub stability: StabilityConfig,
}

fn serialize_episode<S: serde::Serializer>(
    cfg: &EpisodeConfig,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    let route = match cfg.theta5_route {
        Theta5Route::BiasFeature => "bias".to_string(),
        Theta5Route::Perturbation { sigma } => format!("perturb:{sigma}"),
    };
    let penalty = match cfg.penalty_mode {
        PenaltyMode::Policy => "policy".to_string(),
        PenaltyMode::UniformScaled(s) => format!("uniform:{s}"),
    };
    let value = serde_json::json!({
        "episodes": cfg.episodes,
        "inner_folds": cfg.inner_folds,
        "max_iterations": cfg.max_iterations,
        "tolerance": cfg.tolerance,
        "sparsity_weight": cfg.sparsity_weight,
        "learning_rate": cfg.learning_rate,
        "baseline_decay": cfg.baseline_decay,
        "min_genes": cfg.min_genes,
        "l1_ratio": cfg.enet.l1_ratio,
        "n_alphas": cfg.enet.n_alphas,
        "eps_ratio": cfg.enet.eps_ratio,
        "solver_tol": cfg.enet.tol,
        "solver_max_iter": cfg.enet.max_iter,
        "penalty_mode": penalty,
        "theta5_route": route,
        "m_frac_override": cfg.m_frac_override,
        "batch_episodes": cfg.batch_episodes,
        "reward_folds": cfg.reward_folds,
        "reward_l2": cfg.reward_l2,
    });
    value.serialize(ser)
}

fn serialize_stability<S: serde::Serializer>(
    cfg: &StabilityConfig,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    let value = serde_json::json!({
        "n_lambdas": cfg.n_lambdas,
        "lambda_low": cfg.lambda_range.0,
        "lambda_high": cfg.lambda_range.1,
        "subsamples": cfg.n_subsamples,
        "threshold": cfg.threshold,
        "fraction": cfg.subsample_fraction,
    });
    value.serialize(ser)
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            matrix: PathBuf::new(),
            labels: PathBuf::new(),
            network: None,
            transposed: false,
            network_threshold: 700,
            network_binary: false,
            out_dir: PathBuf::from("out"),
            methods: vec!["rl".into()],
            outer_folds: 10,
            seed: 42,
            parallelism: 0,
            consensus_num: 6,
            consensus_den: 10,
            eval_l2: 1.0,
            min_psi: 0.5,
            dump_cv_curves: false,
            mrmr_budget: MrmrBudget::Fixed(10),
            mrmr_bins: 10,
            episode: EpisodeConfig::default(),
            stability: StabilityConfig::default(),
        }
    }
}

/// Parsed key-value file: section -> key -> value.
pub type ConfigFile = BTreeMap<String, BTreeMap<String, String>>;

/// Parse a flat `[section]` / `key = value` file. Blank lines and `#`
/// comments are skipped.
pub fn parse_config_file<P: AsRef<Path>>(path: P) -> Result<ConfigFile> {
    let path_str = path.as_ref().display().to_string();
    let content = std::fs::read_to_string(path.as_ref())?;
    let mut out: ConfigFile = BTreeMap::new();
    let mut section = String::from("run");
    for (no, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path_str.clone(),
            line: no + 1,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        out.entry(section.clone())
            .or_default()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn parse_as<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Invalid(format!("config [{section}] {key} = '{value}' is not valid")))
}

impl RunConfig {
    /// Apply a parsed config file over the defaults.
    pub fn apply_file(&mut self, file: &ConfigFile) -> Result<()> {
        for (section, entries) in file {
            for (key, value) in entries {
                self.apply(section, key, value)?;
            }
        }
        Ok(())
    }

    /// Apply one setting; unrecognised keys are errors so typos surface.
    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        match (section, key) {
            ("run", "seed") => self.seed = parse_as(section, key, value)?,
            ("run", "outer_folds") => self.outer_folds = parse_as(section, key, value)?,
            ("run", "parallelism") => self.parallelism = parse_as(section, key, value)?,
            ("run", "methods") => {
                self.methods = value.split(',').map(|s| s.trim().to_string()).collect()
            }
            ("run", "out_dir") => self.out_dir = PathBuf::from(value),
            ("run", "consensus") => {
                let (num, den) = value.split_once('/').ok_or_else(|| {
                    Error::Invalid(format!("consensus must look like 6/10, got '{value}'"))
                })?;
                self.consensus_num = parse_as(section, key, num.trim())?;
                self.consensus_den = parse_as(section, key, den.trim())?;
            }
            ("run", "dump_cv_curves") => self.dump_cv_curves = parse_as(section, key, value)?,
            ("data", "matrix") => self.matrix = PathBuf::from(value),
            ("data", "labels") => self.labels = PathBuf::from(value),
            ("data", "network") => self.network = Some(PathBuf::from(value)),
            ("data", "transposed") => self.transposed = parse_as(section, key, value)?,
            ("data", "network_threshold") => {
                self.network_threshold = parse_as(section, key, value)?
            }
            ("data", "network_binary") => self.network_binary = parse_as(section, key, value)?,
            ("rl", "episodes") => self.episode.episodes = parse_as(section, key, value)?,
            ("rl", "inner_folds") => self.episode.inner_folds = parse_as(section, key, value)?,
            ("rl", "max_iterations") => {
                self.episode.max_iterations = parse_as(section, key, value)?
            }
            ("rl", "tolerance") => self.episode.tolerance = parse_as(section, key, value)?,
            ("rl", "sparsity_weight") => {
                self.episode.sparsity_weight = parse_as(section, key, value)?
            }
            ("rl", "learning_rate") => self.episode.learning_rate = parse_as(section, key, value)?,
            ("rl", "baseline_decay") => {
                self.episode.baseline_decay = parse_as(section, key, value)?
            }
            ("rl", "min_genes") => self.episode.min_genes = parse_as(section, key, value)?,
            ("rl", "l1_ratio") => self.episode.enet.l1_ratio = parse_as(section, key, value)?,
            ("rl", "n_alphas") => self.episode.enet.n_alphas = parse_as(section, key, value)?,
            ("rl", "eps_ratio") => self.episode.enet.eps_ratio = parse_as(section, key, value)?,
            ("rl", "solver_tol") => self.episode.enet.tol = parse_as(section, key, value)?,
            ("rl", "solver_max_iter") => {
                self.episode.enet.max_iter = parse_as(section, key, value)?
            }
            ("rl", "batch_episodes") => {
                self.episode.batch_episodes = parse_as(section, key, value)?
            }
            ("rl", "reward_folds") => self.episode.reward_folds = parse_as(section, key, value)?,
            ("rl", "reward_l2") => self.episode.reward_l2 = parse_as(section, key, value)?,
            ("rl", "m_frac") => self.episode.m_frac_override = Some(parse_as(section, key, value)?),
            ("rl", "theta5_route") => {
                self.episode.theta5_route = parse_theta5_route(value)?;
            }
            ("rl", "penalty_mode") => {
                self.episode.penalty_mode = parse_penalty_mode(value)?;
            }
            ("stability", "n_lambdas") => self.stability.n_lambdas = parse_as(section, key, value)?,
            ("stability", "lambda_low") => {
                self.stability.lambda_range.0 = parse_as(section, key, value)?
            }
            ("stability", "lambda_high") => {
                self.stability.lambda_range.1 = parse_as(section, key, value)?
            }
            ("stability", "subsamples") => {
                self.stability.n_subsamples = parse_as(section, key, value)?
            }
            ("stability", "threshold") => self.stability.threshold = parse_as(section, key, value)?,
            ("stability", "fraction") => {
                self.stability.subsample_fraction = parse_as(section, key, value)?
            }
            ("mrmr", "k") => self.mrmr_budget = parse_mrmr_budget(value)?,
            ("mrmr", "bins") => self.mrmr_bins = parse_as(section, key, value)?,
            ("eval", "l2") => self.eval_l2 = parse_as(section, key, value)?,
            ("eval", "min_psi") => self.min_psi = parse_as(section, key, value)?,
            _ => {
                return Err(Error::Invalid(format!(
                    "unknown config key [{section}] {key}"
                )))
            }
        }
        Ok(())
    }

    /// JSON echo of the effective configuration for report embedding.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn parse_theta5_route(value: &str) -> Result<Theta5Route> {
    if value == "bias" {
        return Ok(Theta5Route::BiasFeature);
    }
    if let Some(sigma) = value.strip_prefix("perturb:") {
        let sigma: f64 = sigma
            .parse()
            .map_err(|_| Error::Invalid(format!("bad perturbation sigma '{sigma}'")))?;
        if sigma <= 0.0 {
            return Err(Error::Invalid("perturbation sigma must be positive".into()));
        }
        return Ok(Theta5Route::Perturbation { sigma });
    }
    Err(Error::Invalid(format!(
        "theta5_route must be 'bias' or 'perturb:<sigma>', got '{value}'"
    )))
}

pub fn parse_penalty_mode(value: &str) -> Result<PenaltyMode> {
    if value == "policy" {
        return Ok(PenaltyMode::Policy);
    }
    if let Some(scale) = value.strip_prefix("uniform:") {
        let scale: f64 = scale
            .parse()
            .map_err(|_| Error::Invalid(format!("bad penalty scale '{scale}'")))?;
        return Ok(PenaltyMode::UniformScaled(scale));
    }
    Err(Error::Invalid(format!(
        "penalty_mode must be 'policy' or 'uniform:<scale>', got '{value}'"
    )))
}

pub fn parse_mrmr_budget(value: &str) -> Result<MrmrBudget> {
    if let Some(name) = value.strip_prefix("matched:") {
        return Ok(MrmrBudget::Matched(name.trim().to_string()));
    }
    Ok(MrmrBudget::Fixed(value.parse().map_err(|_| {
        Error::Invalid(format!(
            "mrmr k must be a count or 'matched:<method>', got '{value}'"
        ))
    })?))
}

/// Solver settings for non-RL consumers of the shared grid defaults.
pub fn enet_settings_of(cfg: &RunConfig) -> EnetSettings {
    cfg.episode.enet.clone()
}
