//! Run configuration: command-line flags over a `key = value` config file over
//! built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use sampled_sde::model::builtin_initial_conditions;
use sampled_sde::{
    builtin_model, DeltaRule, EnsembleConfig, Functional, GridTemplate, ModelSpec, ReferenceScheme,
    ScaleParams, TimeGrid,
};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }
}

/// Every setting is optional here; missing ones fall through to the config file
/// and then to defaults. The same keys (flag names without the leading dashes)
/// are accepted in the config file.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Settings {
    /// Builtin model: example1, example2, example3 or example4.
    #[arg(long)]
    pub model: Option<String>,
    /// Initial condition(s), comma separated. Defaults to the model's own.
    #[arg(long)]
    pub x0: Option<String>,
    /// Noise size(s): `0.03125`, `2^-5`, `2^-5,2^-6` or `2^-4..2^-7`.
    #[arg(long)]
    pub eps: Option<String>,
    /// Fixed sampling period δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// δ = r·ε (default r = 2).
    #[arg(long)]
    pub delta_ratio: Option<f64>,
    /// δ = ε^a with a > 1.
    #[arg(long)]
    pub delta_exponent: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Euler steps per sampling period.
    #[arg(long)]
    pub steps_per_sample: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Moment order of the LLN/CLT functionals.
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file (simulate, rates) or directory (table).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// lln_sup, clt_sup or mean_resid_sup.
    #[arg(long)]
    pub functional: Option<String>,
    /// Scheme for the deterministic reference path: rk4 or euler.
    #[arg(long)]
    pub reference: Option<String>,
    /// Report every grid point instead of at most 4096.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub full_resolution: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| CliError::config(key, format!("`{value}`: {e}")))
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse_config(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(
                    "config file",
                    format!("line {}: expected `key = value`", n + 1),
                )
            })?;
            s.set(key.trim(), value.trim())?;
        }
        Ok(s)
    }

    pub fn load_config(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Settings::parse_config(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key.replace('_', "-").as_str() {
            "model" => self.model = Some(v.to_string()),
            "x0" => self.x0 = Some(v.to_string()),
            "eps" => self.eps = Some(v.to_string()),
            "delta" => self.delta = Some(parse_value(key, v)?),
            "delta-ratio" => self.delta_ratio = Some(parse_value(key, v)?),
            "delta-exponent" => self.delta_exponent = Some(parse_value(key, v)?),
            "horizon" => self.horizon = Some(parse_value(key, v)?),
            "steps-per-sample" => self.steps_per_sample = Some(parse_value(key, v)?),
            "paths" => self.paths = Some(parse_value(key, v)?),
            "p" => self.p = Some(parse_value(key, v)?),
            "seed" => self.seed = Some(parse_value(key, v)?),
            "threads" => self.threads = Some(parse_value(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => {
                self.format =
                    Some(Format::from_str(v, true).map_err(|e| CliError::config("format", e))?)
            }
            "functional" => self.functional = Some(v.to_string()),
            "reference" => self.reference = Some(v.to_string()),
            "full-resolution" => self.full_resolution = Some(parse_value(key, v)?),
            _ => {
                return Err(CliError::config(
                    "config file",
                    format!("unknown key `{key}`"),
                ))
            }
        }
        Ok(())
    }

    /// `self` wins wherever it is set. The three δ settings move as one unit so
    /// that a flag never combines with a conflicting δ from the file.
    pub fn overlay(self, lower: Settings) -> Settings {
        let delta_set =
            self.delta.is_some() || self.delta_ratio.is_some() || self.delta_exponent.is_some();
        let (delta, delta_ratio, delta_exponent) = if delta_set {
            (self.delta, self.delta_ratio, self.delta_exponent)
        } else {
            (lower.delta, lower.delta_ratio, lower.delta_exponent)
        };
        Settings {
            model: self.model.or(lower.model),
            x0: self.x0.or(lower.x0),
            eps: self.eps.or(lower.eps),
            delta,
            delta_ratio,
            delta_exponent,
            horizon: self.horizon.or(lower.horizon),
            steps_per_sample: self.steps_per_sample.or(lower.steps_per_sample),
            paths: self.paths.or(lower.paths),
            p: self.p.or(lower.p),
            seed: self.seed.or(lower.seed),
            threads: self.threads.or(lower.threads),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
            functional: self.functional.or(lower.functional),
            reference: self.reference.or(lower.reference),
            full_resolution: self.full_resolution.or(lower.full_resolution),
        }
    }
}

/// How δ is obtained from ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSpec {
    Fixed(f64),
    Rule(DeltaRule),
}

impl DeltaSpec {
    pub fn scale(&self, eps: f64) -> Result<ScaleParams> {
        Ok(match self {
            DeltaSpec::Fixed(d) => ScaleParams::new(eps, *d)?,
            DeltaSpec::Rule(r) => r.scale(eps)?,
        })
    }
}

/// Which subcommand a configuration is resolved for. It picks the default ε
/// and x0 lists and the extra checks (single values for `simulate`, a δ rule
/// for `rates`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Simulate,
    Table,
    Rates,
    Check,
}

/// A fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: String,
    pub x0: Vec<f64>,
    pub eps: Vec<f64>,
    pub delta: DeltaSpec,
    pub horizon: f64,
    pub steps_per_sample: usize,
    pub n_paths: usize,
    pub p: u32,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub functional: Functional,
    pub reference: ReferenceScheme,
    pub full_resolution: bool,
}

pub const DEFAULT_HORIZON: f64 = 128.0;
pub const DEFAULT_STEPS_PER_SAMPLE: usize = 16;
pub const DEFAULT_PATHS: usize = 300;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_DELTA_RATIO: f64 = 2.0;

/// The ε values tabulated for each builtin model.
pub fn default_table_eps(model: &str) -> Vec<f64> {
    match model {
        "example3" | "example4" => vec![0.125, 0.0625, 0.03125],
        _ => vec![0.03125, 0.015625, 0.0078125],
    }
}

impl RunConfig {
    pub fn resolve(s: Settings, purpose: Purpose) -> Result<RunConfig> {
        let model = s.model.unwrap_or_else(|| "example1".to_string());
        builtin_model(&model)?;
        let x0 = match &s.x0 {
            Some(v) => parse_real_list("x0", v)?,
            None => {
                let all = builtin_initial_conditions(&model)?;
                match purpose {
                    Purpose::Simulate => all[..1].to_vec(),
                    _ => all.to_vec(),
                }
            }
        };
        let eps = match &s.eps {
            Some(v) => parse_eps_list(v)?,
            None => match purpose {
                Purpose::Rates => parse_eps_list("2^-4..2^-7")?,
                Purpose::Simulate => default_table_eps(&model)[..1].to_vec(),
                _ => default_table_eps(&model),
            },
        };
        let delta = match (s.delta, s.delta_ratio, s.delta_exponent) {
            (None, None, None) => DeltaSpec::Rule(DeltaRule::Ratio(DEFAULT_DELTA_RATIO)),
            (Some(d), None, None) => DeltaSpec::Fixed(d),
            (None, Some(r), None) => DeltaSpec::Rule(DeltaRule::Ratio(r)),
            (None, None, Some(a)) => DeltaSpec::Rule(DeltaRule::Exponent(a)),
            _ => {
                return Err(CliError::config(
                    "delta",
                    "give at most one of delta, delta-ratio, delta-exponent",
                ))
            }
        };
        let functional = match &s.functional {
            None => Functional::LlnSup,
            Some(f) => Functional::parse(f).ok_or_else(|| {
                CliError::config(
                    "functional",
                    format!("`{f}` (expected lln_sup, clt_sup or mean_resid_sup)"),
                )
            })?,
        };
        let reference = match &s.reference {
            None => ReferenceScheme::Rk4,
            Some(r) => ReferenceScheme::parse(r).ok_or_else(|| {
                CliError::config("reference", format!("`{r}` (expected rk4 or euler)"))
            })?,
        };
        let cfg = RunConfig {
            model,
            x0,
            eps,
            delta,
            horizon: s.horizon.unwrap_or(DEFAULT_HORIZON),
            steps_per_sample: s.steps_per_sample.unwrap_or(DEFAULT_STEPS_PER_SAMPLE),
            n_paths: s.paths.unwrap_or(DEFAULT_PATHS),
            p: s.p.unwrap_or(2),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            threads: s.threads,
            out: s.out,
            format: s.format.unwrap_or_default(),
            functional,
            reference,
            full_resolution: s.full_resolution.unwrap_or(false),
        };
        cfg.validate(purpose)?;
        Ok(cfg)
    }

    /// Checks every invariant that can be checked before simulating.
    fn validate(&self, purpose: Purpose) -> Result<()> {
        if self.x0.is_empty() {
            return Err(CliError::config("x0", "empty list"));
        }
        if self.eps.is_empty() {
            return Err(CliError::config("eps", "empty list"));
        }
        for &e in &self.eps {
            if !(e.is_finite() && e > 0.0) {
                return Err(CliError::config(
                    "eps",
                    format!("{e} must be finite and > 0"),
                ));
            }
        }
        if purpose == Purpose::Simulate {
            if self.eps.len() != 1 {
                return Err(CliError::config("eps", "simulate takes a single value"));
            }
            if self.x0.len() != 1 {
                return Err(CliError::config("x0", "simulate takes a single value"));
            }
        }
        if purpose == Purpose::Rates && matches!(self.delta, DeltaSpec::Fixed(_)) {
            return Err(CliError::config(
                "delta",
                "a ladder needs delta-ratio or delta-exponent",
            ));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads", "must be >= 1"));
        }
        if purpose != Purpose::Check {
            for &eps in &self.eps {
                let s = self.delta.scale(eps)?;
                self.grid(s.delta)?;
            }
            self.ensemble()?;
        }
        Ok(())
    }

    pub fn model_at(&self, x0: f64) -> Result<ModelSpec> {
        Ok(builtin_model(&self.model)?.with_x0(x0))
    }

    pub fn template(&self) -> GridTemplate {
        GridTemplate {
            horizon: self.horizon,
            steps_per_sample: self.steps_per_sample,
            reference: self.reference,
        }
    }

    pub fn grid(&self, delta: f64) -> Result<TimeGrid> {
        Ok(self.template().grid(delta)?)
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig> {
        let cfg = EnsembleConfig::new(self.n_paths, self.seed, self.p)?;
        Ok(if self.full_resolution {
            cfg.full_resolution()
        } else {
            cfg
        })
    }
}

fn parse_real(field: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix("2^") {
        let k: f64 = parse_value(field, k)?;
        return Ok(2f64.powf(k));
    }
    parse_value(field, s)
}

fn parse_real_list(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|v| parse_real(field, v)).collect()
}

/// Comma-separated noise sizes; an item `2^a..2^b` with integer exponents
/// expands to every power of two from `2^a` to `2^b` inclusive.
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        match item.split_once("..") {
            Some((a, b)) => {
                let exp = |v: &str| -> Result<i32> {
                    let k = v.trim().strip_prefix("2^").ok_or_else(|| {
                        CliError::config("eps", format!("range bound `{v}` must be 2^k"))
                    })?;
                    parse_value("eps", k)
                };
                let (a, b) = (exp(a)?, exp(b)?);
                let step = if b >= a { 1 } else { -1 };
                let mut k = a;
                loop {
                    out.push(2f64.powi(k));
                    if k == b {
                        break;
                    }
                    k += step;
                }
            }
            None => out.push(parse_real("eps", item)?),
        }
    }
    Ok(out)
}
