//! Run configuration: defaults, then the JSON config file, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slim_core::binarizer::DEFAULT_BINS;
use slim_core::localization::TrainingConfig;
use slim_core::logs::{TimestampFormat, DEFAULT_DEPTH, DEFAULT_SIMILARITY};
use slim_core::{GenerationConfig, SelectionConfig};

use crate::{CliError, Flags};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Which CSV columns play which role. Every other column is a feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnRoles {
    pub timestamp: String,
    pub service: String,
    pub fault_type: String,
    /// Optional 0/1 column; rows with a false label are normal whatever
    /// their fault type says.
    pub label: Option<String>,
    pub categorical: Vec<String>,
    pub ignore: Vec<String>,
}

impl Default for ColumnRoles {
    fn default() -> Self {
        ColumnRoles {
            timestamp: "timestamp".into(),
            service: "service".into(),
            fault_type: "fault_type".into(),
            label: None,
            categorical: Vec::new(),
            ignore: Vec::new(),
        }
    }
}

/// On-disk configuration. Every field is optional except the version.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub max_rules: Option<usize>,
    pub max_len: Option<usize>,
    pub bins: Option<usize>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub refine_swaps: Option<bool>,
    pub exhaustive_swap_limit: Option<usize>,
    pub max_mm_iters: Option<usize>,
    pub columns: Option<ColumnRoles>,
    pub fault_types: Option<Vec<String>>,
    pub interval_seconds: Option<i64>,
    pub log_depth: Option<usize>,
    pub log_similarity: Option<f64>,
    pub timestamp_format: Option<String>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub logs: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub cases: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub max_rules: usize,
    pub max_len: usize,
    pub bins: usize,
    pub gamma: f64,
    pub alpha: Option<f64>,
    pub refine_swaps: bool,
    pub exhaustive_swap_limit: usize,
    pub max_mm_iters: usize,
    pub columns: ColumnRoles,
    pub fault_types: Option<Vec<String>>,
    pub interval_seconds: i64,
    pub log_depth: usize,
    pub log_similarity: f64,
    pub timestamp_format: Option<String>,
    pub folds: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sel = SelectionConfig::default();
        let gen = GenerationConfig::default();
        RunConfig {
            data: None,
            logs: None,
            model: None,
            cases: None,
            out: None,
            max_rules: sel.max_rules,
            max_len: gen.max_len,
            bins: DEFAULT_BINS,
            gamma: sel.gamma,
            alpha: None,
            refine_swaps: sel.refine_swaps,
            exhaustive_swap_limit: sel.exhaustive_swap_limit,
            max_mm_iters: gen.max_mm_iters,
            columns: ColumnRoles::default(),
            fault_types: None,
            interval_seconds: 60,
            log_depth: DEFAULT_DEPTH,
            log_similarity: DEFAULT_SIMILARITY,
            timestamp_format: None,
            folds: 5,
            seed: 0,
            workers: None,
            trace: false,
        }
    }
}

fn require_exists(path: &Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) if !p.exists() => Err(CliError::io(
            p,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        )),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn load_file(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: ConfigFile =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if file.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "{}: unsupported config schema version {}",
                path.display(),
                file.schema_version
            )));
        }
        Ok(file)
    }

    /// Defaults, overlaid by the config file, overlaid by flags.
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        require_exists(&flags.config)?;
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            cfg.apply_file(Self::load_file(path)?);
        }
        cfg.apply_flags(flags);
        for p in [&cfg.data, &cfg.logs, &cfg.model, &cfg.cases] {
            require_exists(p)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, f: ConfigFile) {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = f.$field { self.$field = v; } )* };
        }
        take!(max_rules, max_len, bins, gamma, refine_swaps, exhaustive_swap_limit, max_mm_iters, columns, interval_seconds, log_depth, log_similarity, folds, seed);
        if f.alpha.is_some() {
            self.alpha = f.alpha;
        }
        if f.fault_types.is_some() {
            self.fault_types = f.fault_types;
        }
        if f.timestamp_format.is_some() {
            self.timestamp_format = f.timestamp_format;
        }
        if f.workers.is_some() {
            self.workers = f.workers;
        }
    }

    pub fn apply_flags(&mut self, flags: &Flags) {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = flags.$field.clone() { self.$field = v; } )* };
        }
        take!(max_rules, max_len, bins, gamma, folds, seed);
        for (dst, src) in [
            (&mut self.data, &flags.data),
            (&mut self.logs, &flags.logs),
            (&mut self.model, &flags.model),
            (&mut self.cases, &flags.cases),
            (&mut self.out, &flags.out),
        ] {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        if flags.alpha.is_some() {
            self.alpha = flags.alpha;
        }
        if flags.fault_types.is_some() {
            self.fault_types = flags.fault_types.clone();
        }
        if let Some(c) = &flags.categorical {
            self.columns.categorical = c.clone();
        }
        if let Some(i) = flags.interval {
            self.interval_seconds = i;
        }
        if flags.workers.is_some() {
            self.workers = flags.workers;
        }
        self.trace |= flags.trace;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.max_rules == 0 {
            return bad("K must be >= 1".into());
        }
        if self.max_len == 0 {
            return bad("l must be >= 1".into());
        }
        if self.bins < 2 {
            return bad(format!("bins must be >= 2, got {}", self.bins));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("alpha must be positive, got {a}"));
            }
        }
        if self.interval_seconds <= 0 {
            return bad(format!("interval must be positive, got {}", self.interval_seconds));
        }
        if self.log_depth < 2 {
            return bad(format!("log depth must be >= 2, got {}", self.log_depth));
        }
        if !(self.log_similarity > 0.0 && self.log_similarity <= 1.0) {
            return bad(format!("log similarity must be in (0, 1], got {}", self.log_similarity));
        }
        if self.folds < 2 {
            return bad(format!("folds must be >= 2, got {}", self.folds));
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        Ok(())
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            bins: self.bins,
            selection: SelectionConfig {
                max_rules: self.max_rules,
                gamma: self.gamma,
                alpha_override: self.alpha,
                refine_swaps: self.refine_swaps,
                exhaustive_swap_limit: self.exhaustive_swap_limit,
            },
            generation: GenerationConfig {
                max_len: self.max_len,
                max_mm_iters: self.max_mm_iters,
                ..GenerationConfig::default()
            },
        }
    }

    pub fn timestamp_format(&self) -> TimestampFormat {
        match &self.timestamp_format {
            Some(f) => TimestampFormat::Custom(f.clone()),
            None => TimestampFormat::Iso8601,
        }
    }
}
