//! Run configuration: a flat `key = value` file merged with command-line
//! overrides, then checked key by key.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyon_otto::otto::DEFAULT_TAIL_TOL;
use anyon_otto::{CycleMedium, FormulaVariant, MediumKind, OttoCycleSpec, SumAccuracy, SweepAxis};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required key `{0}`")]
    Missing(String),

    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("unknown key `{0}`")]
    Unknown(String),

    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },

    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "medium", "beta_h", "beta_l", "eps0", "alpha_h", "alpha_l", "alpha", "l1", "l2", "alpha1",
    "alpha2", "length", "sweep", "grid", "out", "format", "rel_tol", "tail_tol", "seed", "variant",
];

/// Raw settings before interpretation; later insertions win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    path: origin.to_string(),
                    line: i + 1,
                });
            };
            raw.set(key, value.trim())?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = normalize_key(key);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::Unknown(key));
        }
        self.entries.insert(key, value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .filter(|v| !v.is_empty())
    }

    /// Copies every entry of `other` over this one.
    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(text) = self.get(key) else {
            return Ok(None);
        };
        let v: f64 = text
            .parse()
            .map_err(|_| ConfigError::invalid(key, format!("`{text}` is not a number")))?;
        if !v.is_finite() {
            return Err(ConfigError::invalid(key, "must be finite"));
        }
        Ok(Some(v))
    }

    fn required(&self, key: &str) -> Result<f64, ConfigError> {
        self.number(key)?
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Inclusive, evenly spaced grid `start:stop:steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let bad = |reason: &str| ConfigError::invalid("grid", format!("`{text}`: {reason}"));
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [start, stop, steps] = parts[..] else {
            return Err(bad("expected start:stop:steps"));
        };
        let start: f64 = start.parse().map_err(|_| bad("start is not a number"))?;
        let stop: f64 = stop.parse().map_err(|_| bad("stop is not a number"))?;
        let steps: usize = steps
            .parse()
            .map_err(|_| bad("steps must be a non-negative integer"))?;
        if !(start.is_finite() && stop.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        Ok(Self { start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| match i {
                    0 => self.start,
                    i if i == n - 1 => self.stop,
                    i => self.start + (self.stop - self.start) * (i as f64) / ((n - 1) as f64),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axis: SweepAxis,
    pub grid: Grid,
}

/// Which subcommand the configuration is interpreted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cycle,
    Sweep,
    Validate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Cycle template; `None` only in validate mode. In sweep mode the swept
    /// parameter holds the first grid value (or a placeholder for an empty
    /// grid) and is checked row by row.
    pub spec: Option<OttoCycleSpec>,
    pub sweep: Option<SweepPlan>,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub accuracy: SumAccuracy,
    pub tail_tol: f64,
    pub seed: u64,
    pub variant: FormulaVariant,
}

fn check_positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(
            key,
            format!("must be positive, got {v}"),
        ))
    }
}

fn check_coupling(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(
            key,
            format!("CS coupling must be non-negative, got {v}"),
        ))
    }
}

fn medium_keys(kind: MediumKind) -> &'static [&'static str] {
    match kind {
        MediumKind::Ring => &["eps0", "alpha_h", "alpha_l"],
        MediumKind::CsVolume => &["alpha", "l1", "l2"],
        MediumKind::CsCoupling => &["alpha1", "alpha2", "length"],
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig, mode: Mode) -> Result<Self, ConfigError> {
        let rel_tol = raw
            .number("rel_tol")?
            .unwrap_or(SumAccuracy::DEFAULT_REL_TOL);
        let accuracy = SumAccuracy::new(rel_tol, SumAccuracy::DEFAULT_MAX_TERMS)
            .map_err(|e| ConfigError::invalid("rel_tol", e.to_string()))?;
        let tail_tol = raw.number("tail_tol")?.unwrap_or(DEFAULT_TAIL_TOL);
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(ConfigError::invalid(
                "tail_tol",
                format!("must lie in (0, 1), got {tail_tol}"),
            ));
        }
        let seed = match raw.get("seed") {
            None => DEFAULT_SEED,
            Some(s) => s.parse().map_err(|_| {
                ConfigError::invalid("seed", format!("`{s}` is not an unsigned integer"))
            })?,
        };
        let variant = match raw.get("variant") {
            None => FormulaVariant::Rederived,
            Some(s) => s
                .parse()
                .map_err(|e: anyon_otto::Error| ConfigError::invalid("variant", e.to_string()))?,
        };
        let out = raw.get("out").map(PathBuf::from);

        let sweep = match mode {
            Mode::Sweep => {
                let axis_text = raw
                    .get("sweep")
                    .ok_or_else(|| ConfigError::Missing("sweep".into()))?;
                let axis: SweepAxis = axis_text
                    .parse()
                    .map_err(|e: anyon_otto::Error| ConfigError::invalid("sweep", e.to_string()))?;
                let grid = Grid::parse(
                    raw.get("grid")
                        .ok_or_else(|| ConfigError::Missing("grid".into()))?,
                )?;
                Some(SweepPlan { axis, grid })
            }
            _ => None,
        };

        let formats = parse_formats(raw.get("format"), mode)?;
        let spec = match mode {
            Mode::Validate => None,
            _ => Some(build_spec(raw, sweep.as_ref(), tail_tol)?),
        };
        if mode == Mode::Sweep && out.is_none() && formats != [Format::Csv] {
            return Err(ConfigError::Missing("out".into()));
        }
        if mode == Mode::Cycle && formats.contains(&Format::Svg) {
            return Err(ConfigError::invalid("format", "svg output needs a sweep"));
        }

        Ok(Self {
            spec,
            sweep,
            out,
            formats,
            accuracy,
            tail_tol,
            seed,
            variant,
        })
    }
}

fn parse_formats(text: Option<&str>, mode: Mode) -> Result<Vec<Format>, ConfigError> {
    let Some(text) = text else {
        return Ok(match mode {
            Mode::Sweep => vec![Format::Csv],
            _ => vec![Format::Json],
        });
    };
    let mut formats = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f = match part.to_ascii_lowercase().as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            "svg" => Format::Svg,
            other => {
                return Err(ConfigError::invalid(
                    "format",
                    format!("unknown format `{other}`"),
                ))
            }
        };
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    if formats.is_empty() {
        return Err(ConfigError::invalid("format", "no output format given"));
    }
    formats.sort();
    Ok(formats)
}

fn build_spec(
    raw: &RawConfig,
    sweep: Option<&SweepPlan>,
    tail_tol: f64,
) -> Result<OttoCycleSpec, ConfigError> {
    let medium_text = raw
        .get("medium")
        .ok_or_else(|| ConfigError::Missing("medium".into()))?;
    let kind: MediumKind = medium_text
        .parse()
        .map_err(|e: anyon_otto::Error| ConfigError::invalid("medium", e.to_string()))?;

    for other in [
        MediumKind::Ring,
        MediumKind::CsVolume,
        MediumKind::CsCoupling,
    ] {
        if other == kind {
            continue;
        }
        for key in medium_keys(other) {
            if raw.get(key).is_some() && !medium_keys(kind).contains(key) {
                return Err(ConfigError::invalid(
                    key,
                    format!("does not apply to the {kind} medium"),
                ));
            }
        }
    }
    if let Some(plan) = sweep {
        if !plan.axis.applies_to(kind) {
            return Err(ConfigError::invalid(
                "sweep",
                format!("`{}` does not apply to the {kind} medium", plan.axis),
            ));
        }
    }

    // The swept key may be absent; its value is set per row and checked there.
    let swept = sweep.map(|p| p.axis.as_str());
    let placeholder = sweep.map(|p| p.grid.values().first().copied().unwrap_or(p.grid.start));
    let value =
        |key: &str, default: Option<f64>, check: fn(&str, f64) -> Result<f64, ConfigError>| {
            if swept == Some(key) {
                return Ok(raw.number(key)?.or(placeholder).unwrap_or(0.0));
            }
            let v = match default {
                Some(d) => raw.number(key)?.unwrap_or(d),
                None => raw.required(key)?,
            };
            check(key, v)
        };
    let any = |_: &str, v: f64| Ok(v);

    let beta_h = value("beta_h", None, check_positive)?;
    let beta_l = value("beta_l", None, check_positive)?;
    let medium = match kind {
        MediumKind::Ring => CycleMedium::Ring {
            eps0: value("eps0", Some(1.0), check_positive)?,
            alpha_h: value("alpha_h", None, any)?,
            alpha_l: value("alpha_l", None, any)?,
        },
        MediumKind::CsVolume => CycleMedium::CsVolume {
            alpha: value("alpha", None, check_coupling)?,
            l1: value("l1", None, check_positive)?,
            l2: value("l2", None, check_positive)?,
        },
        MediumKind::CsCoupling => CycleMedium::CsCoupling {
            length: value("length", Some(1.0), check_positive)?,
            alpha1: value("alpha1", None, check_coupling)?,
            alpha2: value("alpha2", None, check_coupling)?,
        },
    };
    let spec = OttoCycleSpec {
        medium,
        beta_h,
        beta_l,
        tail_tol,
    };
    if swept.is_none() {
        spec.validate()
            .map_err(|e| ConfigError::invalid("medium", e.to_string()))?;
    }
    Ok(spec)
}
