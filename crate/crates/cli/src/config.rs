//! Flat key/value configuration with a typed schema per experiment.
//!
//! Resolution order: schema defaults, then the config file (top to bottom),
//! then `--set key=value` overrides in the order given, then dedicated flags
//! (`--seed`, `--trials`, `--out`). Unknown keys are rejected before any
//! computation starts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{CliError, Result};

/// A typed parameter value. Lists are comma separated in text form.
/// `UInt` exists for the seed, which must cover the full 64-bit range.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    UInt(u64),
    Real(f64),
    Text(String),
    IntList(Vec<i64>),
    RealList(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamKind {
    Int,
    UInt,
    Real,
    Text,
    IntList,
    RealList,
}

impl ParamValue {
    fn kind(&self) -> ParamKind {
        match self {
            ParamValue::Int(_) => ParamKind::Int,
            ParamValue::UInt(_) => ParamKind::UInt,
            ParamValue::Real(_) => ParamKind::Real,
            ParamValue::Text(_) => ParamKind::Text,
            ParamValue::IntList(_) => ParamKind::IntList,
            ParamValue::RealList(_) => ParamKind::RealList,
        }
    }

    /// Canonical text form, used for metadata headers. Reals keep enough
    /// digits to round-trip.
    pub fn render(&self) -> String {
        fn real(v: f64) -> String {
            if v.is_infinite() {
                if v > 0.0 { "inf".into() } else { "-inf".into() }
            } else {
                format!("{v}")
            }
        }
        match self {
            ParamValue::Int(v) => format!("{v}"),
            ParamValue::UInt(v) => format!("{v}"),
            ParamValue::Real(v) => real(*v),
            ParamValue::Text(v) => v.clone(),
            ParamValue::IntList(v) => v
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            ParamValue::RealList(v) => {
                v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(",")
            }
        }
    }
}

fn parse_int(key: &str, raw: &str) -> Result<i64> {
    raw.trim()
        .parse::<i64>()
        .map_err(|_| CliError::Config(format!("`{key}`: expected an integer, got `{raw}`")))
}

fn parse_real(key: &str, raw: &str) -> Result<f64> {
    let v = raw
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("`{key}`: expected a real number, got `{raw}`")))?;
    if v.is_nan() {
        return Err(CliError::Config(format!("`{key}`: NaN is not a valid value")));
    }
    Ok(v)
}

fn parse_value(key: &str, kind: ParamKind, raw: &str) -> Result<ParamValue> {
    let trimmed = raw.trim();
    match kind {
        ParamKind::Int => Ok(ParamValue::Int(parse_int(key, trimmed)?)),
        ParamKind::UInt => Ok(ParamValue::UInt(trimmed.parse::<u64>().map_err(|_| {
            CliError::Config(format!(
                "`{key}`: expected an unsigned 64-bit integer, got `{raw}`"
            ))
        })?)),
        ParamKind::Real => Ok(ParamValue::Real(parse_real(key, trimmed)?)),
        ParamKind::Text => {
            if trimmed.is_empty() {
                return Err(CliError::Config(format!("`{key}`: empty value")));
            }
            Ok(ParamValue::Text(trimmed.to_string()))
        }
        ParamKind::IntList => {
            if trimmed.is_empty() {
                return Err(CliError::Config(format!("`{key}`: empty list")));
            }
            let items = trimmed
                .split(',')
                .map(|part| parse_int(key, part))
                .collect::<Result<Vec<_>>>()?;
            Ok(ParamValue::IntList(items))
        }
        ParamKind::RealList => {
            if trimmed.is_empty() {
                return Err(CliError::Config(format!("`{key}`: empty list")));
            }
            let items = trimmed
                .split(',')
                .map(|part| parse_real(key, part))
                .collect::<Result<Vec<_>>>()?;
            Ok(ParamValue::RealList(items))
        }
    }
}

/// Declares the full key set of one experiment together with typed defaults.
/// Every experiment implicitly carries `seed` (Int, 0) and `out` (Text, "out").
#[derive(Debug, Clone)]
pub struct Schema {
    experiment: &'static str,
    defaults: BTreeMap<&'static str, ParamValue>,
}

impl Schema {
    pub fn new(experiment: &'static str, entries: Vec<(&'static str, ParamValue)>) -> Self {
        let mut defaults = BTreeMap::new();
        defaults.insert("seed", ParamValue::UInt(0));
        defaults.insert("out", ParamValue::Text("out".into()));
        for (key, value) in entries {
            let prior = defaults.insert(key, value);
            assert!(prior.is_none(), "duplicate schema key `{key}`");
        }
        Schema {
            experiment,
            defaults,
        }
    }

    pub fn experiment(&self) -> &'static str {
        self.experiment
    }

    /// Applies file pairs then override pairs on top of the defaults.
    /// Any key absent from the schema aborts resolution.
    pub fn resolve(&self, pairs: &[(String, String)]) -> Result<ScenarioConfig> {
        let mut params: BTreeMap<String, ParamValue> = self
            .defaults
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        for (key, raw) in pairs {
            let Some(default) = self.defaults.get(key.as_str()) else {
                let known = self
                    .defaults
                    .keys()
                    .copied()
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(CliError::Config(format!(
                    "unknown key `{key}` for experiment `{}` (known keys: {known})",
                    self.experiment
                )));
            };
            let value = parse_value(key, default.kind(), raw)?;
            params.insert(key.clone(), value);
        }
        Ok(ScenarioConfig {
            experiment: self.experiment,
            params,
        })
    }
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                index + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", index + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// A fully resolved, validated parameter set for one experiment run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    experiment: &'static str,
    params: BTreeMap<String, ParamValue>,
}

impl ScenarioConfig {
    pub fn experiment(&self) -> &'static str {
        self.experiment
    }

    /// All parameters in key order, for metadata emission.
    pub fn params(&self) -> &BTreeMap<String, ParamValue> {
        &self.params
    }

    pub fn seed(&self) -> Result<u64> {
        match self.get("seed")? {
            ParamValue::UInt(v) => Ok(*v),
            other => Err(type_error("seed", "unsigned 64-bit integer", other)),
        }
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        Ok(PathBuf::from(self.text("out")?))
    }

    fn get(&self, key: &str) -> Result<&ParamValue> {
        self.params
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
    }

    pub fn int(&self, key: &str) -> Result<i64> {
        match self.get(key)? {
            ParamValue::Int(v) => Ok(*v),
            other => Err(type_error(key, "integer", other)),
        }
    }

    /// Integer parameter constrained to a non-negative count.
    pub fn count(&self, key: &str) -> Result<usize> {
        let raw = self.int(key)?;
        usize::try_from(raw)
            .map_err(|_| CliError::Config(format!("`{key}` must be >= 0, got {raw}")))
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            ParamValue::Real(v) => Ok(*v),
            ParamValue::Int(v) => Ok(*v as f64),
            other => Err(type_error(key, "real", other)),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.get(key)? {
            ParamValue::Text(v) => Ok(v),
            other => Err(type_error(key, "text", other)),
        }
    }

    pub fn int_list(&self, key: &str) -> Result<&[i64]> {
        match self.get(key)? {
            ParamValue::IntList(v) => Ok(v),
            other => Err(type_error(key, "integer list", other)),
        }
    }

    /// Integer list constrained to positive counts.
    pub fn count_list(&self, key: &str) -> Result<Vec<usize>> {
        self.int_list(key)?
            .iter()
            .map(|&raw| {
                usize::try_from(raw).ok().filter(|&v| v > 0).ok_or_else(|| {
                    CliError::Config(format!("`{key}` entries must be >= 1, got {raw}"))
                })
            })
            .collect()
    }

    pub fn real_list(&self, key: &str) -> Result<&[f64]> {
        match self.get(key)? {
            ParamValue::RealList(v) => Ok(v),
            other => Err(type_error(key, "real list", other)),
        }
    }
}

fn type_error(key: &str, wanted: &str, got: &ParamValue) -> CliError {
    CliError::Config(format!(
        "`{key}` holds a {} but was read as {wanted}",
        match got.kind() {
            ParamKind::Int => "integer",
            ParamKind::UInt => "unsigned integer",
            ParamKind::Real => "real",
            ParamKind::Text => "text value",
            ParamKind::IntList => "integer list",
            ParamKind::RealList => "real list",
        }
    ))
}
