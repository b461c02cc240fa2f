//! Run configuration: defaults, config-file parsing, and precedence.
//!
//! Precedence is explicit flag > environment (`ZETALAB_WORKERS`) > config
//! file > built-in default. Unknown config keys are rejected so a typo'd
//! sweep never runs silently on defaults.

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

use zetalab::ladder::LadderConfig;
use zetalab::zeta::PrecisionPolicy;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub domain_hi: f64,
    pub gamma: f64,
    pub c0: f64,
    pub newton_tol: f64,
    pub max_newton_iters: u32,
    pub rs_correction_terms: u32,
    pub em_crossover: f64,
    pub em_terms: u32,
    pub target_rel_err: f64,
    pub resolution: f64,
    pub workers: usize,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

impl RunConfig {
    pub fn ladder_config(&self) -> LadderConfig {
        LadderConfig {
            gamma: self.gamma,
            c0: self.c0,
            newton_tol: self.newton_tol,
            max_newton_iters: self.max_newton_iters,
            domain_hi: self.domain_hi,
        }
    }

    pub fn policy(&self) -> PrecisionPolicy {
        PrecisionPolicy {
            rs_correction_terms: self.rs_correction_terms,
            em_crossover: self.em_crossover,
            em_terms: self.em_terms,
            target_rel_err: self.target_rel_err,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.ladder_config()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        self.policy()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if !(self.resolution > 0.0) {
            return Err(CliError::Usage("resolution must be positive".into()));
        }
        Ok(())
    }
}

/// Raw `key = value` lines; `#` starts a comment.
pub fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {} is not 'key = value': {line:?}",
                lineno + 1
            )));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_key<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("config key {key} = {raw:?}: {e}"))),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "domain_hi",
    "gamma",
    "c0",
    "newton_tol",
    "max_newton_iters",
    "rs_correction_terms",
    "em_crossover",
    "em_terms",
    "target_rel_err",
    "resolution",
    "workers",
    "format",
];

/// Merge flags over environment over config-file values over defaults.
pub struct ConfigSources {
    pub file: BTreeMap<String, String>,
    pub flags: FlagOverrides,
}

#[derive(Debug, Default, Clone)]
pub struct FlagOverrides {
    pub domain_hi: Option<f64>,
    pub gamma: Option<f64>,
    pub c0: Option<f64>,
    pub newton_tol: Option<f64>,
    pub max_newton_iters: Option<u32>,
    pub rs_correction_terms: Option<u32>,
    pub em_crossover: Option<f64>,
    pub em_terms: Option<u32>,
    pub target_rel_err: Option<f64>,
    pub resolution: Option<f64>,
    pub workers: Option<usize>,
    pub format: Option<OutputFormat>,
}

impl ConfigSources {
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        for key in self.file.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("unknown config key {key:?}")));
            }
        }
        let lad = LadderConfig::default();
        let pol = PrecisionPolicy::default();
        let f = &self.file;
        let o = self.flags;

        let env_workers = match std::env::var("ZETALAB_WORKERS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|e| {
                CliError::Usage(format!("ZETALAB_WORKERS = {v:?}: {e}"))
            })?),
            Err(_) => None,
        };

        let config = RunConfig {
            schema_version: SCHEMA_VERSION,
            domain_hi: o
                .domain_hi
                .or(parse_key(f, "domain_hi")?)
                .unwrap_or(lad.domain_hi),
            gamma: o.gamma.or(parse_key(f, "gamma")?).unwrap_or(lad.gamma),
            c0: o.c0.or(parse_key(f, "c0")?).unwrap_or(lad.c0),
            newton_tol: o
                .newton_tol
                .or(parse_key(f, "newton_tol")?)
                .unwrap_or(lad.newton_tol),
            max_newton_iters: o
                .max_newton_iters
                .or(parse_key(f, "max_newton_iters")?)
                .unwrap_or(lad.max_newton_iters),
            rs_correction_terms: o
                .rs_correction_terms
                .or(parse_key(f, "rs_correction_terms")?)
                .unwrap_or(pol.rs_correction_terms),
            em_crossover: o
                .em_crossover
                .or(parse_key(f, "em_crossover")?)
                .unwrap_or(pol.em_crossover),
            em_terms: o
                .em_terms
                .or(parse_key(f, "em_terms")?)
                .unwrap_or(pol.em_terms),
            target_rel_err: o
                .target_rel_err
                .or(parse_key(f, "target_rel_err")?)
                .unwrap_or(pol.target_rel_err),
            resolution: o.resolution.or(parse_key(f, "resolution")?).unwrap_or(2.0),
            workers: o
                .workers
                .or(env_workers)
                .or(parse_key(f, "workers")?)
                .unwrap_or(0),
            format: o
                .format
                .or(parse_key(f, "format")?)
                .unwrap_or(OutputFormat::Json),
        };
        config.validate()?;
        Ok(config)
    }
}
