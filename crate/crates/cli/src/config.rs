//! Experiment configuration: defaults, `key = value` files, JSON sidecars
//! and command-line flags, merged in that order of increasing precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use fpplab::estimators::ScaleRule;
use fpplab::WeightDistribution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config file {path}, line {line}: {message}")]
    Syntax { path: PathBuf, line: usize, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ThreePointGap,
    TimeConstant,
    Midpoint,
    Confinement,
    GoodRatio,
    Claim1,
    Claim2,
    GoalChain,
    MwCertificate,
    TauNorm,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::ThreePointGap => "three-point-gap",
            Self::TimeConstant => "time-constant",
            Self::Midpoint => "midpoint",
            Self::Confinement => "confinement",
            Self::GoodRatio => "good-ratio",
            Self::Claim1 => "claim1",
            Self::Claim2 => "claim2",
            Self::GoalChain => "goal-chain",
            Self::MwCertificate => "mw-certificate",
            Self::TauNorm => "tau-norm",
        }
    }

    /// Experiments built on the shift field, which needs `κ ∈ (0, 1/2)`.
    pub fn uses_kappa(self) -> bool {
        matches!(self, Self::Claim1 | Self::Claim2 | Self::GoalChain | Self::TauNorm)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, false).map_err(|_| invalid("experiment", format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// I.i.d. weights.
    #[default]
    None,
    /// Cheap horizontal axis, expensive elsewhere.
    Corridor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    Horizontal,
    Vertical,
}

/// A fully resolved experiment. Serialized verbatim into the JSON sidecar;
/// reading that sidecar back reproduces the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dist: String,
    pub n_values: Vec<u32>,
    pub m: Option<u32>,
    pub kappa: f64,
    pub delta: Option<f64>,
    pub mask_factor: f64,
    pub scale: Option<u32>,
    pub replicates: usize,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
    pub max_seconds: Option<u64>,
    pub coupling: f64,
    pub crossing_ratio: f64,
    pub detect_factor: Option<f64>,
    pub good_measure: f64,
    pub fixture: Fixture,
    pub scale_rule: ScaleRule,
    pub direction: Direction,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        Self {
            experiment,
            dist: "uniform:1:1.5".into(),
            n_values: vec![16, 32, 64],
            m: None,
            kappa: 0.1,
            delta: None,
            mask_factor: 2.0,
            scale: None,
            replicates: 1000,
            master_seed: 0,
            out: None,
            max_seconds: None,
            coupling: 1.0,
            crossing_ratio: 0.3,
            detect_factor: None,
            good_measure: 0.75,
            fixture: Fixture::None,
            scale_rule: ScaleRule::DeskScale,
            direction: Direction::Horizontal,
        }
    }

    pub fn distribution(&self) -> Result<WeightDistribution, ConfigError> {
        self.dist.parse().map_err(|e| invalid("dist", format!("`{}`: {e}", self.dist)))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.distribution()?;
        if self.n_values.is_empty() {
            return Err(invalid("n", "no sizes given"));
        }
        if self.replicates == 0 {
            return Err(invalid("reps", "must be positive"));
        }
        if !(self.mask_factor > 1.0) {
            return Err(invalid("c", format!("mask factor must exceed 1, got {}", self.mask_factor)));
        }
        if self.experiment.uses_kappa() && !(self.kappa > 0.0 && self.kappa < 0.5) {
            return Err(invalid(
                "kappa",
                format!("{} lies outside (0, 1/2); the log(n)^(1/2 - kappa) growth needs 1/2 - kappa > 0", self.kappa),
            ));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(invalid("delta", "must be positive"));
            }
        }
        if let Some(m) = self.m {
            if self.experiment.uses_kappa() && m < 2 {
                return Err(invalid("m", "the shift field needs m >= 2"));
            }
        }
        if self.scale == Some(0) {
            return Err(invalid("scale", "must be positive"));
        }
        if !(self.coupling > 0.0 && self.coupling <= 1.0) {
            return Err(invalid("coupling", "must lie in (0, 1]"));
        }
        if !(self.good_measure > 0.0 && self.good_measure < 1.0) {
            return Err(invalid("good_measure", "must lie in (0, 1)"));
        }
        if let Some(d) = self.detect_factor {
            if !(d > self.mask_factor) {
                return Err(invalid("detect_factor", "must exceed the mask factor c"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Partial configuration; unset fields defer to a lower layer.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigPatch {
    pub experiment: Option<Experiment>,
    pub dist: Option<String>,
    pub n_values: Option<Vec<u32>>,
    pub m: Option<u32>,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub mask_factor: Option<f64>,
    pub scale: Option<u32>,
    pub replicates: Option<usize>,
    pub master_seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub max_seconds: Option<u64>,
    pub coupling: Option<f64>,
    pub crossing_ratio: Option<f64>,
    pub detect_factor: Option<f64>,
    pub good_measure: Option<f64>,
    pub fixture: Option<Fixture>,
    pub scale_rule: Option<ScaleRule>,
    pub direction: Option<Direction>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl ConfigPatch {
    /// Fields set in `top` win.
    pub fn merged(mut self, top: &ConfigPatch) -> Self {
        overlay!(self, top; experiment, dist, n_values, m, kappa, delta, mask_factor, scale, replicates,
            master_seed, out, max_seconds, coupling, crossing_ratio, detect_factor, good_measure, fixture,
            scale_rule, direction);
        self
    }

    pub fn from_config(c: &ExperimentConfig) -> Self {
        Self {
            experiment: Some(c.experiment),
            dist: Some(c.dist.clone()),
            n_values: Some(c.n_values.clone()),
            m: c.m,
            kappa: Some(c.kappa),
            delta: c.delta,
            mask_factor: Some(c.mask_factor),
            scale: c.scale,
            replicates: Some(c.replicates),
            master_seed: Some(c.master_seed),
            out: c.out.clone(),
            max_seconds: c.max_seconds,
            coupling: Some(c.coupling),
            crossing_ratio: Some(c.crossing_ratio),
            detect_factor: c.detect_factor,
            good_measure: Some(c.good_measure),
            fixture: Some(c.fixture),
            scale_rule: Some(c.scale_rule),
            direction: Some(c.direction),
        }
    }

    /// Apply to defaults and validate.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let experiment = self.experiment.ok_or_else(|| invalid("experiment", "not given"))?;
        let mut c = ExperimentConfig::defaults(experiment);
        if let Some(v) = &self.dist {
            c.dist = v.clone();
        }
        if let Some(v) = &self.n_values {
            c.n_values = v.clone();
        }
        if self.m.is_some() {
            c.m = self.m;
        }
        if let Some(v) = self.kappa {
            c.kappa = v;
        }
        if self.delta.is_some() {
            c.delta = self.delta;
        }
        if let Some(v) = self.mask_factor {
            c.mask_factor = v;
        }
        if self.scale.is_some() {
            c.scale = self.scale;
        }
        if let Some(v) = self.replicates {
            c.replicates = v;
        }
        if let Some(v) = self.master_seed {
            c.master_seed = v;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.max_seconds.is_some() {
            c.max_seconds = self.max_seconds;
        }
        if let Some(v) = self.coupling {
            c.coupling = v;
        }
        if let Some(v) = self.crossing_ratio {
            c.crossing_ratio = v;
        }
        if self.detect_factor.is_some() {
            c.detect_factor = self.detect_factor;
        }
        if let Some(v) = self.good_measure {
            c.good_measure = v;
        }
        if let Some(v) = self.fixture {
            c.fixture = v;
        }
        if let Some(v) = self.scale_rule {
            c.scale_rule = v;
        }
        if let Some(v) = self.direction {
            c.direction = v;
        }
        c.validate()?;
        Ok(c)
    }

    /// Set one field from its textual form, as used in config files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            value.parse().map_err(|e| invalid(key, format!("`{value}`: {e}")))
        }
        fn choice<T: ValueEnum>(key: &str, value: &str) -> Result<T, ConfigError> {
            T::from_str(value, true).map_err(|e| invalid(key, e))
        }
        match key {
            "experiment" => self.experiment = Some(value.parse()?),
            "dist" => self.dist = Some(value.to_string()),
            "n" | "n_values" => self.n_values = Some(parse_list(value)?),
            "m" => self.m = Some(num(key, value)?),
            "kappa" => self.kappa = Some(num(key, value)?),
            "delta" => self.delta = Some(num(key, value)?),
            "c" | "mask_factor" => self.mask_factor = Some(num(key, value)?),
            "scale" => self.scale = Some(num(key, value)?),
            "reps" | "replicates" => self.replicates = Some(num(key, value)?),
            "seed" | "master_seed" => self.master_seed = Some(num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "max_seconds" => self.max_seconds = Some(num(key, value)?),
            "coupling" => self.coupling = Some(num(key, value)?),
            "a" | "crossing_ratio" => self.crossing_ratio = Some(num(key, value)?),
            "detect_factor" => self.detect_factor = Some(num(key, value)?),
            "good_measure" => self.good_measure = Some(num(key, value)?),
            "fixture" => self.fixture = Some(choice(key, value)?),
            "scale_rule" => {
                self.scale_rule = Some(match value {
                    "desk-scale" => ScaleRule::DeskScale,
                    "asymptotic" => ScaleRule::Asymptotic,
                    _ => return Err(invalid(key, format!("`{value}`: expected desk-scale or asymptotic"))),
                })
            }
            "direction" => self.direction = Some(choice(key, value)?),
            _ => return Err(invalid(key, "unknown key")),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_kv(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut patch = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            patch.set(key.trim(), value.trim()).map_err(|e| ConfigError::Syntax {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(patch)
    }

    /// Read a config file: a JSON sidecar (or bare JSON config) when the
    /// text starts with `{`, `key = value` lines otherwise.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        if text.trim_start().starts_with('{') {
            let syntax = |e: serde_json::Error| ConfigError::Syntax {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            };
            let value: serde_json::Value = serde_json::from_str(&text).map_err(syntax)?;
            let inner = value.get("config").cloned().unwrap_or(value);
            let cfg: ExperimentConfig = serde_json::from_value(inner).map_err(syntax)?;
            return Ok(Self::from_config(&cfg));
        }
        Self::from_kv(&text, path)
    }
}

/// Comma-separated sizes, e.g. `8,16,32`.
pub fn parse_list(s: &str) -> Result<Vec<u32>, ConfigError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e| invalid("n", format!("`{t}`: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_parsing_and_precedence() {
        let file =
            ConfigPatch::from_kv("experiment = midpoint\nreps = 100 # comment\n\nn = 8, 16\n", Path::new("x")).unwrap();
        assert_eq!(file.replicates, Some(100));
        assert_eq!(file.n_values, Some(vec![8, 16]));
        let flags = ConfigPatch { replicates: Some(500), ..Default::default() };
        let cfg = file.merged(&flags).resolve().unwrap();
        assert_eq!(cfg.replicates, 500);
        assert_eq!(cfg.experiment, Experiment::Midpoint);
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let err = ConfigPatch::from_kv("reps = 3\nbogus\n", Path::new("f.cfg")).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = ConfigPatch::from_kv("colour = red\n", Path::new("f.cfg")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn validation_names_the_field() {
        let mut p = ConfigPatch { experiment: Some(Experiment::Claim1), kappa: Some(0.6), ..Default::default() };
        let err = p.resolve().unwrap_err().to_string();
        assert!(err.starts_with("kappa"), "{err}");
        p.experiment = Some(Experiment::ThreePointGap);
        assert!(p.resolve().is_ok());
        p.dist = Some("gamma:1:2".into());
        assert!(p.resolve().unwrap_err().to_string().starts_with("dist"));
        assert!("warp".parse::<Experiment>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = ConfigPatch { experiment: Some(Experiment::GoalChain), delta: Some(0.1 + 0.2), ..Default::default() }
            .resolve()
            .unwrap();
        let back: ExperimentConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(ConfigPatch::from_config(&cfg).resolve().unwrap(), cfg);
    }
}
