//! Experiment configuration files.
//!
//! TOML with sections; unknown keys are rejected. Every error that can be
//! tied to a key carries the `file:line:` of that key.

use std::fmt;
use std::path::{Path, PathBuf};

use pitchfork::analysis::mc::{InitialCondition, McConfig, ModelKind};
use pitchfork::model::{NormalFormParams, PotentialConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Parameter values; anything left out keeps its library default.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub c1_time: Option<f64>,
    pub delta: Option<f64>,
    pub h0: Option<f64>,
    pub k_exit: Option<f64>,
    pub sandwich_c: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "T")]
    pub t_start_abs: Option<f64>,
    pub t2: Option<f64>,
    pub h_rel: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Epsilon,
    Sigma,
    Alpha,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::Sigma => "sigma",
            SweepParameter::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedGrid {
    /// ε ∈ {σ², σ^{5/3}, σ^{4/3}, σ, σ^{2/3}}.
    Threshold,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    #[serde(default)]
    pub values: Vec<f64>,
    pub grid: Option<NamedGrid>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    pub epsilon: Vec<f64>,
    #[serde(default = "zero_list")]
    pub alpha: Vec<f64>,
    #[serde(default = "one_list")]
    pub beta: Vec<f64>,
    /// Monte Carlo paths per row; 0 reports the closed form only.
    #[serde(default)]
    pub n_paths: usize,
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

fn one_list() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "default_compare_starts")]
    pub x0: Vec<f64>,
}

fn default_compare_starts() -> Vec<f64> {
    vec![0.5, -0.5]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem; defaults to the subcommand name.
    pub name: Option<String>,
    #[serde(default)]
    pub format: Format,
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), name: None, format: Format::Csv }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Zero bias: run q̃ instead of q.
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub sweep: Option<SweepSection>,
    pub linear: Option<LinearSection>,
    pub compare: Option<CompareSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_model() -> ModelKind {
    ModelKind::Overdamped
}

fn default_n_paths() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{}:{}: {}", self.file, l, c, self.message),
            (Some(l), None) => write!(f, "{}:{}: {}", self.file, l, self.message),
            _ => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A parsed config together with its source text, kept for error anchoring
/// and the provenance hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    pub file: String,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, col)
}

/// 1-based line of the first `key = ...` assignment, optionally restricted
/// to one `[section]`.
pub fn locate_key(src: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.split(']').next().map(|s| s.trim().to_string());
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let lhs = lhs.trim().trim_matches('"');
        if lhs == key && section.is_none_or(|s| current.as_deref() == Some(s)) {
            return Some(i + 1);
        }
    }
    None
}

impl LoadedConfig {
    pub fn parse(source: String, file: impl Into<String>) -> Result<Self, ConfigError> {
        let file = file.into();
        match toml::from_str::<ExperimentConfig>(&source) {
            Ok(config) => Ok(Self { config, source, file }),
            Err(e) => {
                let (line, column) = match e.span() {
                    Some(span) => {
                        let (l, c) = line_col(&source, span.start);
                        (Some(l), Some(c))
                    }
                    None => (None, None),
                };
                Err(ConfigError { file, line, column, message: e.message().trim().to_string() })
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let file = path.display().to_string();
        let source = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { file: file.clone(), line: None, column: None, message: e.to_string() })?;
        Self::parse(source, file)
    }

    /// Error anchored at `key`, searched in `section` first and then anywhere.
    pub fn error_at(&self, section: Option<&str>, key: &str, message: impl Into<String>) -> ConfigError {
        let line = locate_key(&self.source, section, key).or_else(|| locate_key(&self.source, None, key));
        ConfigError { file: self.file.clone(), line, column: None, message: message.into() }
    }

    /// Library error mapped onto the key it names, if any.
    pub fn lib_error(&self, e: &pitchfork::Error) -> ConfigError {
        match e {
            pitchfork::Error::InvalidParam { name, .. } => {
                let section = match *name {
                    "T" | "t2" | "h_rel" => "grid",
                    "n_paths" => "",
                    _ => "params",
                };
                let section = (!section.is_empty()).then_some(section);
                self.error_at(section, name, e.to_string())
            }
            _ => ConfigError { file: self.file.clone(), line: None, column: None, message: e.to_string() },
        }
    }

    /// Normal-form parameters with the config's overrides applied.
    pub fn params(&self) -> Result<NormalFormParams, ConfigError> {
        let s = &self.config.params;
        let epsilon = s.epsilon.ok_or_else(|| self.error_at(None, "params", "[params] needs `epsilon`"))?;
        let mut p = match (s.sigma, s.alpha) {
            (Some(_), Some(_)) => {
                return Err(self.error_at(Some("params"), "alpha", "set either `sigma` or `alpha`, not both"));
            }
            (Some(sigma), None) => NormalFormParams::new(epsilon, sigma),
            (None, Some(alpha)) => NormalFormParams::with_alpha(epsilon, alpha),
            (None, None) => {
                return Err(self.error_at(None, "params", "[params] needs `sigma` or `alpha`"));
            }
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.beta, s.beta);
        set(&mut p.kappa, s.kappa);
        set(&mut p.gamma, s.gamma);
        set(&mut p.c1_time, s.c1_time);
        set(&mut p.delta, s.delta);
        set(&mut p.h0, s.h0);
        set(&mut p.k_exit, s.k_exit);
        set(&mut p.sandwich_c, s.sandwich_c);
        let g = &self.config.grid;
        set(&mut p.t_start_abs, g.t_start_abs);
        set(&mut p.t2, g.t2);
        set(&mut p.h_rel, g.h_rel);
        Ok(p)
    }

    /// Parameters checked against the configured model's constraints.
    pub fn validated_params(&self) -> Result<NormalFormParams, ConfigError> {
        let p = self.params()?;
        let r = match self.config.model {
            ModelKind::Underdamped => p.validate_underdamped(),
            _ => p.validate(),
        };
        r.map_err(|e| self.lib_error(&e))?;
        if self.config.n_paths == 0 {
            return Err(self.error_at(None, "n_paths", "n_paths must be positive"));
        }
        if let InitialCondition::Fixed { x0 } = self.config.initial {
            if !x0.is_finite() {
                return Err(self.error_at(Some("initial"), "x0", "x0 must be finite"));
            }
        }
        Ok(p)
    }

    pub fn mc_config(&self, seed: u64) -> Result<McConfig, ConfigError> {
        let params = self.validated_params()?;
        let c = &self.config;
        let mut mc = McConfig::new(c.model, params, c.n_paths, seed);
        mc.initial = c.initial;
        mc.symmetric = c.symmetric;
        mc.potential = c.potential;
        Ok(mc)
    }

    /// Sweep values in sweep-key order.
    pub fn sweep_values(&self, params: &NormalFormParams) -> Result<(SweepParameter, Vec<f64>), ConfigError> {
        let s = self
            .config
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError { file: self.file.clone(), line: None, column: None, message: "missing [sweep] section".into() })?;
        let mut values = match (s.grid, s.values.is_empty()) {
            (Some(NamedGrid::Threshold), true) => {
                if s.parameter != SweepParameter::Epsilon {
                    return Err(self.error_at(Some("sweep"), "grid", "the threshold grid sweeps `epsilon`"));
                }
                pitchfork::analysis::mc::threshold_grid(params.sigma)
            }
            (None, false) => s.values.clone(),
            (Some(_), false) => {
                return Err(self.error_at(Some("sweep"), "grid", "set either `values` or `grid`, not both"));
            }
            (None, true) => return Err(self.error_at(Some("sweep"), "values", "sweep needs `values` or `grid`")),
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(self.error_at(Some("sweep"), "values", format!("non-finite sweep value {bad}")));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok((s.parameter, values))
    }

    pub fn linear_section(&self) -> Result<&LinearSection, ConfigError> {
        let l = self
            .config
            .linear
            .as_ref()
            .ok_or_else(|| ConfigError { file: self.file.clone(), line: None, column: None, message: "missing [linear] section".into() })?;
        if l.epsilon.is_empty() || l.alpha.is_empty() || l.beta.is_empty() {
            return Err(self.error_at(Some("linear"), "epsilon", "epsilon, alpha and beta lists must be non-empty"));
        }
        Ok(l)
    }

    pub fn compare_starts(&self) -> Vec<f64> {
        self.config.compare.as_ref().map_or_else(default_compare_starts, |c| c.x0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "model = \"overdamped\"\nn_paths = 10\nseed = 4\n\n[params]\nepsilon = 0.01\nsigma = 0.001\n";

    #[test]
    fn parses_minimal() {
        let c = LoadedConfig::parse(BASIC.into(), "a.toml").unwrap();
        let p = c.validated_params().unwrap();
        assert_eq!(p.epsilon, 0.01);
        assert_eq!(p.h_rel, NormalFormParams::new(0.01, 0.001).h_rel);
    }

    #[test]
    fn unknown_key_is_line_anchored() {
        let src = format!("{BASIC}bogus = 3\n");
        let e = LoadedConfig::parse(src, "a.toml").unwrap_err();
        assert_eq!(e.line, Some(8));
        assert!(e.message.contains("bogus"), "{}", e.message);
    }

    #[test]
    fn invalid_value_points_at_key() {
        let src = BASIC.replace("epsilon = 0.01", "epsilon = 2.0");
        let c = LoadedConfig::parse(src, "a.toml").unwrap();
        let e = c.validated_params().unwrap_err();
        assert_eq!(e.line, Some(6));
        assert!(e.to_string().starts_with("a.toml:6:"));
    }

    #[test]
    fn grid_keys_live_in_grid_section() {
        let src = format!("{BASIC}\n[grid]\nT = 0.5\n");
        let c = LoadedConfig::parse(src, "a.toml").unwrap();
        assert_eq!(c.validated_params().unwrap_err().line, Some(10));
    }

    #[test]
    fn locate_respects_sections() {
        let src = "[a]\nx = 1\n[b]\nx = 2\n";
        assert_eq!(locate_key(src, Some("b"), "x"), Some(4));
        assert_eq!(locate_key(src, None, "x"), Some(2));
        assert_eq!(locate_key(src, Some("c"), "x"), None);
    }

    #[test]
    fn sweep_values_are_sorted() {
        let src = format!("{BASIC}\n[sweep]\nparameter = \"epsilon\"\nvalues = [0.1, 0.01, 0.05]\n");
        let c = LoadedConfig::parse(src, "a.toml").unwrap();
        let p = c.params().unwrap();
        assert_eq!(c.sweep_values(&p).unwrap().1, vec![0.01, 0.05, 0.1]);
    }
}
