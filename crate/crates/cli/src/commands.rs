//! The subcommands, as functions returning their outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use slim_core::binarizer::Op;
use slim_core::bitset::SampleSet;
use slim_core::dataset::f1_score;
use slim_core::evaluation::{stratified_folds, CaseResult, MetricsReport};
use slim_core::localization::{FaultModel, LocalizationReport, LogModel, TrainingInput};
use slim_core::logs::{LogFeatureFrame, TemplateBase};
use slim_core::selection::SelectionStep;
use slim_core::{SlimError, TOOL_VERSION};

use crate::config::RunConfig;
use crate::input::{self, MetricsTable};
use crate::{CliError, OUTPUT_SCHEMA_VERSION};

pub const DEFAULT_MODEL_PATH: &str = "model.json";

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

pub fn load_model(path: &Path) -> Result<FaultModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(FaultModel::from_json(&text)?)
}

/// Online-log frame for a log directory against a template base.
fn online_frame(dir: &Path, base: &TemplateBase, interval: i64, cfg: &RunConfig) -> Result<LogFeatureFrame, CliError> {
    let (_, online) = input::log_dirs(dir);
    let lines = input::read_log_lines(&online)?;
    Ok(LogFeatureFrame::aggregate(base, &lines, interval, &cfg.timestamp_format())?)
}

/// Training rows with log columns joined when `--logs` is given, plus the
/// files that determine the data hash.
fn training_table(cfg: &RunConfig) -> Result<(MetricsTable, Option<LogModel>, Vec<PathBuf>), CliError> {
    let data = required(&cfg.data, "--data")?;
    let mut table = input::read_metrics_csv(data, &cfg.columns, cfg.bins, true, &cfg.timestamp_format())?;
    let mut hashed = vec![data.to_path_buf()];
    let mut log_model = None;
    if let Some(dir) = &cfg.logs {
        let (normal, online) = input::log_dirs(dir);
        let base = input::build_template_base(normal.as_deref(), cfg.log_depth, cfg.log_similarity, &cfg.timestamp_format())?;
        let frame = online_frame(dir, &base, cfg.interval_seconds, cfg)?;
        table.join_logs(&frame, cfg.bins)?;
        if let Some(n) = &normal {
            hashed.extend(input::list_files(n)?);
        }
        hashed.extend(input::list_files(&online)?);
        log_model = Some(LogModel { template_base: base, interval_seconds: cfg.interval_seconds });
    }
    Ok((table, log_model, hashed))
}

fn trace_lines(traces: &BTreeMap<String, Vec<SelectionStep>>) -> String {
    let mut out = String::new();
    for (ft, steps) in traces {
        for s in steps {
            let candidate = s.candidate.as_ref().map_or("-".to_string(), |r| format!("{:?}", r.features()));
            let _ = writeln!(
                out,
                "trace fault_type={ft} iteration={} alpha={} candidate={candidate} gain={} note={} mm_iterations={}",
                s.iteration,
                s.alpha,
                s.distorted_gain,
                serde_json::to_string(&s.note).unwrap_or_default().trim_matches('"'),
                s.mm_trace.len()
            );
            for t in &s.mm_trace {
                let _ = writeln!(
                    out,
                    "trace fault_type={ft}   mm iteration={} bound={:?} rule_len={} surrogate={} objective={}",
                    t.iteration, t.bound, t.rule_len, t.surrogate, t.objective
                );
            }
        }
    }
    out
}

/// Trains and writes the model; returns the printed summary.
pub fn cmd_train(cfg: &RunConfig) -> Result<String, CliError> {
    let start = Instant::now();
    let (table, log_model, hashed) = training_table(cfg)?;
    let input = TrainingInput {
        table: &table.table,
        specs: &table.specs,
        services: &table.services,
        fault_labels: &table.fault_labels,
        fault_types: cfg.fault_types.as_deref(),
    };
    let (mut model, traces) = FaultModel::train_traced(input, &cfg.training_config(), input::hash_files(&hashed)?)?;
    model.logs = log_model;
    let elapsed = start.elapsed().as_secs_f64();
    if cfg.trace {
        eprint!("{}", trace_lines(&traces));
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_MODEL_PATH));
    write_file(&out, &model.to_json()?)?;

    let mut summary = format!(
        "trained {} fault types on {} rows, {} binary features in {elapsed:.3}s -> {}\n",
        model.fault_types.len(),
        table.rows(),
        model.binarization.n_features(),
        out.display()
    );
    for (ft, rules) in &model.fault_types {
        let _ = writeln!(summary, "{ft}: {} rule(s)", rules.len());
        for (k, r) in rules.iter().enumerate() {
            let _ = writeln!(
                summary,
                "  [{k}] {}  precision={:.4} recall={:.4} covered={}",
                r.description, r.precision, r.recall, r.covered
            );
        }
    }
    Ok(summary)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LocalizeDocument {
    pub schema_version: u32,
    pub tool_version: String,
    #[serde(flatten)]
    pub report: LocalizationReport,
}

#[derive(Debug)]
pub struct LocalizeOutput {
    pub json: String,
    pub report: LocalizationReport,
    pub no_signal: bool,
}

/// Binarizes a window CSV against the model, joining log columns when the
/// model was trained with them.
fn localize_window(model: &FaultModel, window: &Path, logs: Option<&Path>, cfg: &RunConfig) -> Result<LocalizationReport, CliError> {
    let mut table = input::read_metrics_csv(window, &cfg.columns, cfg.bins, false, &cfg.timestamp_format())?;
    if let Some(lm) = &model.logs {
        let frame = match logs {
            Some(dir) => online_frame(dir, &lm.template_base, lm.interval_seconds, cfg)?,
            None => {
                log::warn!("model uses log features but no --logs given; log columns are zero");
                LogFeatureFrame { interval_seconds: lm.interval_seconds, ..Default::default() }
            }
        };
        table.join_logs(&frame, cfg.bins)?;
    }
    let window = model.window(&table.table, table.services)?;
    Ok(model.localize(&window)?)
}

pub fn cmd_localize(cfg: &RunConfig) -> Result<LocalizeOutput, CliError> {
    let model = load_model(required(&cfg.model, "--model")?)?;
    let report = localize_window(&model, required(&cfg.data, "--data")?, cfg.logs.as_deref(), cfg)?;
    let doc = LocalizeDocument {
        schema_version: OUTPUT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        report,
    };
    let mut json = serde_json::to_string_pretty(&doc).map_err(SlimError::from)?;
    json.push('\n');
    Ok(LocalizeOutput { json, no_signal: doc.report.no_signal, report: doc.report })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    /// Window CSV, relative to the manifest.
    pub window: PathBuf,
    /// Ground-truth fault type; absent for a novel fault.
    #[serde(default)]
    pub fault_type: Option<String>,
    #[serde(default)]
    pub service: Option<String>,
    /// Optional log directory for the window, relative to the manifest.
    #[serde(default)]
    pub logs: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseManifest {
    pub schema_version: u32,
    pub cases: Vec<CaseSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    /// Held-out F1 per fold; `None` when the fold has no positives.
    pub fold_f1: Vec<Option<f64>>,
    pub mean_f1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub folds: usize,
    pub seed: u64,
    pub per_fault_type: BTreeMap<String, FoldScores>,
}

#[derive(Debug)]
pub struct EvalOutput {
    pub json: String,
    pub table: String,
}

/// Evaluates `--model` on the `--cases` manifest, or cross-validates on
/// `--data` when no manifest is given.
pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalOutput, CliError> {
    match &cfg.cases {
        Some(manifest) => eval_manifest(cfg, manifest),
        None if cfg.data.is_some() => cross_validate(cfg),
        None => Err(CliError::Usage("eval needs --cases with --model, or --data".into())),
    }
}

fn eval_manifest(cfg: &RunConfig, path: &Path) -> Result<EvalOutput, CliError> {
    let model = load_model(required(&cfg.model, "--model")?)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let manifest: CaseManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if manifest.schema_version != OUTPUT_SCHEMA_VERSION {
        return Err(CliError::Config(format!("unsupported manifest schema version {}", manifest.schema_version)));
    }
    let root = path.parent().unwrap_or(Path::new("."));
    let mut results = Vec::with_capacity(manifest.cases.len());
    for case in &manifest.cases {
        let window = root.join(&case.window);
        if !window.is_file() {
            return Err(CliError::io(
                &window,
                std::io::Error::new(std::io::ErrorKind::NotFound, "window file not found"),
            ));
        }
        let logs = case.logs.as_ref().map(|l| root.join(l));
        let report = localize_window(&model, &window, logs.as_deref(), cfg)?;
        results.push(CaseResult {
            fault_truth: case.fault_type.clone(),
            service_truth: case.service.clone(),
            fault_ranking: report.fault_ranking.names().into_iter().map(str::to_string).collect(),
            service_ranking: report.service_ranking.names().into_iter().map(str::to_string).collect(),
            no_signal: report.no_signal,
        });
    }
    let report = MetricsReport::from_cases(&results)?;
    let mut json = report.to_json()?;
    json.push('\n');
    Ok(EvalOutput { json, table: report.to_table() })
}

fn cross_validate(cfg: &RunConfig) -> Result<EvalOutput, CliError> {
    let (table, _, _) = training_table(cfg)?;
    let labels: Vec<&str> = table.fault_labels.iter().map(|l| l.as_deref().unwrap_or("")).collect();
    let folds = stratified_folds(&labels, cfg.folds, cfg.seed)?;
    let catalog: Vec<String> = match &cfg.fault_types {
        Some(d) => d.clone(),
        None => {
            let set: std::collections::BTreeSet<&str> = labels.iter().copied().filter(|l| !l.is_empty()).collect();
            set.into_iter().map(str::to_string).collect()
        }
    };
    let mut per_type: BTreeMap<String, Vec<Option<f64>>> =
        catalog.iter().map(|c| (c.clone(), Vec::with_capacity(cfg.folds))).collect();
    for k in 0..cfg.folds {
        let train: Vec<usize> = (0..table.rows()).filter(|&i| folds[i] != k).collect();
        let test: Vec<usize> = (0..table.rows()).filter(|&i| folds[i] == k).collect();
        let pick = |v: &[String], rows: &[usize]| rows.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        let train_labels: Vec<Option<String>> = train.iter().map(|&i| table.fault_labels[i].clone()).collect();
        let train_table = table.table.select_rows(&train);
        let model = FaultModel::train(
            TrainingInput {
                table: &train_table,
                specs: &table.specs,
                services: &pick(&table.services, &train),
                fault_labels: &train_labels,
                fault_types: Some(&catalog),
            },
            &cfg.training_config(),
            String::new(),
        )?;
        let test_data = model.binarization.transform(&table.table.select_rows(&test))?;
        for (ft, scores) in per_type.iter_mut() {
            let positives = SampleSet::from_indices(
                test.len(),
                test.iter().enumerate().filter(|(_, &i)| table.fault_labels[i].as_deref() == Some(ft)).map(|(p, _)| p),
            );
            let score = match model.rule_set(ft) {
                Ok(set) if !positives.is_empty() => Some(f1_score(&test_data.relabel(positives)?, &set)?),
                Ok(_) => None,
                // Untrainable in this fold: predicts nothing.
                Err(SlimError::UnknownFaultType(_)) => (!positives.is_empty()).then_some(0.0),
                Err(e) => return Err(e.into()),
            };
            scores.push(score);
        }
    }
    let per_fault_type: BTreeMap<String, FoldScores> = per_type
        .into_iter()
        .map(|(ft, fold_f1)| {
            let present: Vec<f64> = fold_f1.iter().flatten().copied().collect();
            let mean_f1 = (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
            (ft, FoldScores { fold_f1, mean_f1 })
        })
        .collect();
    let report = CrossValidationReport {
        schema_version: OUTPUT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        folds: cfg.folds,
        seed: cfg.seed,
        per_fault_type,
    };
    let mut table_text = format!("{}-fold cross-validation (seed {})\n", report.folds, report.seed);
    let width = report.per_fault_type.keys().map(String::len).max().unwrap_or(0).max(10);
    let _ = writeln!(table_text, "{:<width$}{:>10}", "fault type", "mean F1");
    for (ft, s) in &report.per_fault_type {
        let mean = s.mean_f1.map_or("-".to_string(), |m| format!("{m:.4}"));
        let _ = writeln!(table_text, "{ft:<width$}{mean:>10}");
    }
    let mut json = serde_json::to_string_pretty(&report).map_err(SlimError::from)?;
    json.push('\n');
    Ok(EvalOutput { json, table: table_text })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintMetric {
    pub metric: String,
    /// `high` (`>`), `low` (`≤`) or `is` (categorical).
    pub direction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub metrics: Vec<FingerprintMetric>,
    pub rules: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub fault_types: BTreeMap<String, Fingerprint>,
}

pub fn fingerprints(model: &FaultModel) -> Result<FingerprintDocument, CliError> {
    if model.fault_types.is_empty() {
        return Err(SlimError::InvalidArgument("model has no fault types".into()).into());
    }
    let mut fault_types = BTreeMap::new();
    for (ft, rules) in &model.fault_types {
        let mut metrics: Vec<FingerprintMetric> = Vec::new();
        for r in rules {
            for j in r.features.iter() {
                let f = model.binarization.feature_catalog.get(j).ok_or(SlimError::FeatureOutOfRange {
                    index: j,
                    features: model.binarization.n_features(),
                })?;
                let entry = FingerprintMetric {
                    metric: f.column.clone(),
                    direction: match f.op {
                        Op::Gt => "high",
                        Op::Le => "low",
                        Op::Eq => "is",
                    }
                    .to_string(),
                    threshold: f.threshold,
                    value: f.category.clone(),
                };
                if !metrics.contains(&entry) {
                    metrics.push(entry);
                }
            }
        }
        let rules = rules.iter().map(|r| r.description.clone()).collect();
        fault_types.insert(ft.clone(), Fingerprint { metrics, rules });
    }
    Ok(FingerprintDocument {
        schema_version: OUTPUT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        fault_types,
    })
}

pub fn cmd_export_fingerprints(cfg: &RunConfig) -> Result<String, CliError> {
    let model = load_model(required(&cfg.model, "--model")?)?;
    let mut json = serde_json::to_string_pretty(&fingerprints(&model)?).map_err(SlimError::from)?;
    json.push('\n');
    Ok(json)
}

/// Per-interval novelty counts as CSV. Uses the model's template base when
/// `--model` is given, else builds one from `normal/`.
pub fn cmd_parse_logs(cfg: &RunConfig) -> Result<String, CliError> {
    let dir = required(&cfg.logs, "--logs")?;
    let (base, interval) = match &cfg.model {
        Some(path) => {
            let model = load_model(path)?;
            let lm = model
                .logs
                .ok_or_else(|| SlimError::InvalidArgument("model was trained without log features".into()))?;
            (lm.template_base, lm.interval_seconds)
        }
        None => {
            let (normal, _) = input::log_dirs(dir);
            let base =
                input::build_template_base(normal.as_deref(), cfg.log_depth, cfg.log_similarity, &cfg.timestamp_format())?;
            (base, cfg.interval_seconds)
        }
    };
    let frame = online_frame(dir, &base, interval, cfg)?;
    if frame.skipped > 0 {
        log::warn!("{} lines skipped without a parseable timestamp", frame.skipped);
    }
    Ok(frame.to_csv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use slim_core::binarizer::{BinarizationModel, ColumnModel};
    use slim_core::localization::{AnnotatedRule, TrainingConfig, TrainingMetadata, MODEL_SCHEMA_VERSION};
    use slim_core::Rule;

    fn model_with(rules: Vec<Rule>) -> FaultModel {
        let binarization = BinarizationModel::from_columns(vec![
            ColumnModel::Numeric { name: "proc".into(), thresholds: vec![23.75] },
            ColumnModel::Numeric { name: "count_diff".into(), thresholds: vec![1042.45] },
        ]);
        let annotated = rules
            .into_iter()
            .map(|r| AnnotatedRule {
                description: binarization.describe_rule(&r).unwrap(),
                features: r,
                precision: 1.0,
                recall: 1.0,
                covered: 1,
            })
            .collect();
        FaultModel {
            schema_version: MODEL_SCHEMA_VERSION,
            tool_version: TOOL_VERSION.into(),
            metadata: TrainingMetadata {
                dataset_sha256: String::new(),
                n_samples: 0,
                n_features: binarization.n_features(),
                config: TrainingConfig {
                    bins: 100,
                    selection: Default::default(),
                    generation: Default::default(),
                },
            },
            binarization,
            services: vec!["a".into()],
            fault_types: BTreeMap::from([("cpu".to_string(), annotated)]),
            logs: None,
        }
    }

    #[test]
    fn fingerprint_of_learned_rule() {
        // features: proc ≤, proc >, count_diff ≤, count_diff >
        let doc = fingerprints(&model_with(vec![Rule::new([1, 2])])).unwrap();
        let fp = &doc.fault_types["cpu"];
        assert_eq!(fp.rules, vec!["proc > 23.75 ∧ count_diff ≤ 1042.45"]);
        let got: Vec<(&str, &str, Option<f64>)> =
            fp.metrics.iter().map(|m| (m.metric.as_str(), m.direction.as_str(), m.threshold)).collect();
        assert_eq!(got, vec![("proc", "high", Some(23.75)), ("count_diff", "low", Some(1042.45))]);
    }

    #[test]
    fn empty_rule_set_gives_empty_fingerprint() {
        let doc = fingerprints(&model_with(vec![])).unwrap();
        assert!(doc.fault_types["cpu"].metrics.is_empty());
    }

    #[test]
    fn empty_model_rejected() {
        let mut m = model_with(vec![]);
        m.fault_types.clear();
        assert_eq!(fingerprints(&m).unwrap_err().category(), "invalid-argument");
    }
}
