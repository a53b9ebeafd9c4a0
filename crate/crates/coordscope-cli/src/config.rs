//! Run configuration: defaults, optional TOML file, CLI overrides, and
//! validation. Validation failures are reported with the offending field
//! and exit with code 2.

use std::fmt;
use std::path::{Path, PathBuf};

use coordscope::copypasta::{DEFAULT_HISTOGRAM_BINS, DEFAULT_SCAN_WINDOW};
use coordscope::graph::{Linkage, Metric};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

/// Copypasta edge threshold: a fixed score or valley auto-selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ThresholdChoice {
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for ThresholdChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ThresholdChoice::Auto);
        }
        let value: f64 = s
            .parse()
            .map_err(|_| format!("expected `auto` or a number in [0,1], got `{s}`"))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(format!("threshold must be in [0,1], got {value}"));
        }
        Ok(ThresholdChoice::Fixed(value))
    }
}

/// The optional TOML config file; every field can also be set on the
/// command line, which wins.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub input: FileInput,
    #[serde(default)]
    pub output: FileOutput,
    #[serde(default)]
    pub rapid_retweet: FileRapid,
    #[serde(default)]
    pub copypasta: FileCopypasta,
    #[serde(default)]
    pub htemap: FileHtemap,
    #[serde(default)]
    pub run: FileRun,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileInput {
    pub corpus: Option<PathBuf>,
    pub vocabulary: Option<PathBuf>,
    pub user_labels: Option<PathBuf>,
    pub tweet_stories: Option<PathBuf>,
    pub field_map: Option<PathBuf>,
    pub bad_line_budget: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOutput {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRapid {
    pub window_seconds: Option<i64>,
    pub min_edge_weight: Option<u64>,
    pub min_spokes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileCopypasta {
    pub window: Option<usize>,
    /// `"auto"` or a number in [0,1].
    pub threshold: Option<toml::Value>,
    pub histogram_bins: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileHtemap {
    pub resolution: Option<f64>,
    pub linkage: Option<String>,
    pub metric: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRun {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&raw).map_err(|e| config_error("config", e.to_string()))
    }
}

/// Fully resolved, validated run parameters.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub vocabulary_path: Option<PathBuf>,
    pub vocabulary_tags: Vec<String>,
    pub user_labels: Option<PathBuf>,
    pub tweet_stories: Option<PathBuf>,
    pub field_map_path: Option<PathBuf>,
    pub bad_line_budget: usize,
    pub window_seconds: i64,
    pub min_edge_weight: u64,
    pub min_spokes: usize,
    pub copypasta_window: usize,
    pub copypasta_threshold: ThresholdChoice,
    pub histogram_bins: usize,
    pub resolution: f64,
    #[serde(serialize_with = "ser_linkage")]
    pub linkage: Linkage,
    #[serde(serialize_with = "ser_metric")]
    pub metric: Metric,
    pub seed: u64,
    #[serde(skip)]
    pub threads: usize,
}

fn ser_linkage<S: serde::Serializer>(l: &Linkage, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{l:?}").to_lowercase())
}

fn ser_metric<S: serde::Serializer>(m: &Metric, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{m:?}").to_lowercase())
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            vocabulary_path: None,
            vocabulary_tags: coordscope::ingest::DEFAULT_FRINGE_HASHTAGS
                .iter()
                .map(|(t, _)| t.to_string())
                .collect(),
            user_labels: None,
            tweet_stories: None,
            field_map_path: None,
            bad_line_budget: 0,
            window_seconds: 60,
            min_edge_weight: 2,
            min_spokes: 10,
            copypasta_window: DEFAULT_SCAN_WINDOW,
            copypasta_threshold: ThresholdChoice::Auto,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            resolution: 1.0,
            linkage: Linkage::Average,
            metric: Metric::Euclidean,
            seed: 42,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn apply_file(&mut self, file: &FileConfig) -> Result<(), ConfigError> {
        if let Some(v) = &file.input.corpus {
            self.corpus = Some(v.clone());
        }
        if let Some(v) = &file.input.vocabulary {
            self.vocabulary_path = Some(v.clone());
        }
        if let Some(v) = &file.input.user_labels {
            self.user_labels = Some(v.clone());
        }
        if let Some(v) = &file.input.tweet_stories {
            self.tweet_stories = Some(v.clone());
        }
        if let Some(v) = &file.input.field_map {
            self.field_map_path = Some(v.clone());
        }
        if let Some(v) = file.input.bad_line_budget {
            self.bad_line_budget = v;
        }
        if let Some(v) = file.rapid_retweet.window_seconds {
            self.window_seconds = v;
        }
        if let Some(v) = file.rapid_retweet.min_edge_weight {
            self.min_edge_weight = v;
        }
        if let Some(v) = file.rapid_retweet.min_spokes {
            self.min_spokes = v;
        }
        if let Some(v) = file.copypasta.window {
            self.copypasta_window = v;
        }
        if let Some(v) = &file.copypasta.threshold {
            self.copypasta_threshold = match v {
                toml::Value::String(s) => s
                    .parse()
                    .map_err(|e: String| config_error("copypasta.threshold", e))?,
                toml::Value::Float(f) => ThresholdChoice::Fixed(*f),
                toml::Value::Integer(i) => ThresholdChoice::Fixed(*i as f64),
                other => {
                    return Err(config_error(
                        "copypasta.threshold",
                        format!("expected `auto` or a number, got {other}"),
                    ))
                }
            };
        }
        if let Some(v) = file.copypasta.histogram_bins {
            self.histogram_bins = v;
        }
        if let Some(v) = file.htemap.resolution {
            self.resolution = v;
        }
        if let Some(v) = &file.htemap.linkage {
            self.linkage = v
                .parse()
                .map_err(|e: String| config_error("htemap.linkage", e))?;
        }
        if let Some(v) = &file.htemap.metric {
            self.metric = v
                .parse()
                .map_err(|e: String| config_error("htemap.metric", e))?;
        }
        if let Some(v) = file.run.seed {
            self.seed = v;
        }
        if let Some(v) = file.run.threads {
            self.threads = v;
        }
        Ok(())
    }

    /// Check ranges and that every referenced path exists.
    pub fn validate(&self, corpus_required: bool) -> Result<(), ConfigError> {
        if corpus_required {
            match &self.corpus {
                None => return Err(config_error("input.corpus", "required but not set")),
                Some(path) if !path.exists() => {
                    return Err(config_error(
                        "input.corpus",
                        format!("path does not exist: {}", path.display()),
                    ))
                }
                _ => {}
            }
        }
        for (field, path) in [
            ("input.vocabulary", &self.vocabulary_path),
            ("input.user_labels", &self.user_labels),
            ("input.tweet_stories", &self.tweet_stories),
            ("input.field_map", &self.field_map_path),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(config_error(
                        field,
                        format!("path does not exist: {}", path.display()),
                    ));
                }
            }
        }
        if self.window_seconds <= 0 {
            return Err(config_error(
                "rapid_retweet.window_seconds",
                format!("must be positive, got {}", self.window_seconds),
            ));
        }
        if self.min_edge_weight < 1 {
            return Err(config_error(
                "rapid_retweet.min_edge_weight",
                "must be at least 1",
            ));
        }
        if self.copypasta_window < 2 {
            return Err(config_error(
                "copypasta.window",
                format!("must be at least 2, got {}", self.copypasta_window),
            ));
        }
        if self.histogram_bins < 10 {
            return Err(config_error(
                "copypasta.histogram_bins",
                format!("must be at least 10, got {}", self.histogram_bins),
            ));
        }
        if self.resolution <= 0.0 {
            return Err(config_error(
                "htemap.resolution",
                format!("must be positive, got {}", self.resolution),
            ));
        }
        if self.vocabulary_tags.is_empty() {
            return Err(config_error("input.vocabulary", "vocabulary is empty"));
        }
        Ok(())
    }
}
