//! Run configuration: defaults, an optional line-oriented `key=value` config
//! file, and command-line flags, in increasing precedence. The config file
//! path comes from `--config`, else the `CLOSED_WORDS_CONFIG` environment
//! variable, else `closed-words.cfg` in the working directory when present.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use closed_words::{DEFAULT_ENUMERATION_BUDGET, DEFAULT_KAPPA, DEFAULT_MU_SCAN_BUDGET};

pub const CONFIG_ENV_VAR: &str = "CLOSED_WORDS_CONFIG";
pub const DEFAULT_CONFIG_FILE: &str = "closed-words.cfg";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub q: usize,
    pub cache_dir: PathBuf,
    pub workers: usize,
    pub enumeration_budget: u64,
    pub mu_scan_budget: u64,
    pub kappa: f64,
    pub output_format: OutputFormat,
}

/// The flag values that may override the file; all optional.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigFlags {
    /// Path to a key=value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Alphabet size (>= 2)
    #[arg(long, global = true)]
    pub q: Option<usize>,
    /// Directory for cached census files
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for census scans
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Maximum q^n for exhaustive scans
    #[arg(long, global = true)]
    pub enumeration_budget: Option<u64>,
    /// Maximum q^m for mu pattern scans
    #[arg(long, global = true)]
    pub mu_scan_budget: Option<u64>,
    /// Short-border exponent (> 1)
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Report format
    #[arg(long, global = true, value_enum)]
    pub output_format: Option<OutputFormat>,
    /// Omit the generated-at line from reports (for byte-exact comparison)
    #[arg(long, global = true)]
    pub suppress_timestamp: bool,
}

impl Config {
    fn defaults() -> Config {
        Config {
            q: 2,
            cache_dir: PathBuf::from("census-cache"),
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            mu_scan_budget: DEFAULT_MU_SCAN_BUDGET,
            kappa: DEFAULT_KAPPA,
            output_format: OutputFormat::Csv,
        }
    }

    pub fn resolve(flags: &ConfigFlags) -> Result<Config> {
        let mut config = Config::defaults();
        if let Some(path) = config_file_path(flags) {
            config
                .apply_file(&path)
                .with_context(|| format!("reading config file {}", path.display()))?;
        }
        config.apply_flags(flags);
        config.validate()?;
        Ok(config)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        for (index, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value, got {line:?}", index + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            let context = || format!("line {}: bad value for {key}", index + 1);
            match key {
                "q" => self.q = value.parse().with_context(context)?,
                "cache_dir" => self.cache_dir = PathBuf::from(value),
                "workers" => self.workers = value.parse().with_context(context)?,
                "enumeration_budget" => {
                    self.enumeration_budget = value.parse().with_context(context)?
                }
                "mu_scan_budget" => self.mu_scan_budget = value.parse().with_context(context)?,
                "kappa" => self.kappa = value.parse().with_context(context)?,
                "output_format" => {
                    self.output_format = match value {
                        "csv" => OutputFormat::Csv,
                        "json" => OutputFormat::Json,
                        other => bail!("line {}: unknown output_format {other:?}", index + 1),
                    }
                }
                other => bail!("line {}: unknown config key {other:?}", index + 1),
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, flags: &ConfigFlags) {
        if let Some(q) = flags.q {
            self.q = q;
        }
        if let Some(dir) = &flags.cache_dir {
            self.cache_dir = dir.clone();
        }
        if let Some(workers) = flags.workers {
            self.workers = workers;
        }
        if let Some(budget) = flags.enumeration_budget {
            self.enumeration_budget = budget;
        }
        if let Some(budget) = flags.mu_scan_budget {
            self.mu_scan_budget = budget;
        }
        if let Some(kappa) = flags.kappa {
            self.kappa = kappa;
        }
        if let Some(format) = flags.output_format {
            self.output_format = format;
        }
    }

    fn validate(&self) -> Result<()> {
        if self.q < 2 {
            bail!("q must be at least 2, got {}", self.q);
        }
        if self.workers < 1 {
            bail!("workers must be at least 1");
        }
        if self.enumeration_budget < 1 || self.mu_scan_budget < 1 {
            bail!("budgets must be positive");
        }
        if !(self.kappa.is_finite() && self.kappa > 1.0) {
            bail!("kappa must be a finite real > 1, got {}", self.kappa);
        }
        Ok(())
    }
}

fn config_file_path(flags: &ConfigFlags) -> Option<PathBuf> {
    if let Some(path) = &flags.config {
        return Some(path.clone());
    }
    if let Some(path) = env::var_os(CONFIG_ENV_VAR) {
        return Some(PathBuf::from(path));
    }
    let default = PathBuf::from(DEFAULT_CONFIG_FILE);
    default.exists().then_some(default)
}

/// Parses an `n` argument: an inclusive range `lo..hi`, a single value, or a
/// comma-separated list. Returns the values sorted and deduplicated.
pub fn parse_n_spec(spec: &str) -> Result<Vec<u64>> {
    let mut ns: Vec<u64> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse().context("bad range start")?;
        let hi: u64 = hi.trim().parse().context("bad range end")?;
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|part| {
                part.trim()
                    .parse::<u64>()
                    .with_context(|| format!("bad n value {part:?}"))
            })
            .collect::<Result<_>>()?
    };
    ns.sort_unstable();
    ns.dedup();
    Ok(ns)
}
