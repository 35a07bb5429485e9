//! One-vs-rest fault models and precision-weighted localization.
//!
//! Each fault type gets its own rule set. For a query window every sample
//! votes for a fault type with the highest training precision among that
//! type's rules covering it. Fault types are ranked by the sum of votes
//! over the window; services by the sum over their own samples and over
//! all fault types.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::binarizer::{BinarizationModel, FeatureSpec, RawTable};
use crate::bitset::SampleSet;
use crate::dataset::{BinaryDataset, Rule, RuleSet, RuleStats};
use crate::error::{Result, SlimError};
use crate::generation::GenerationConfig;
use crate::logs::TemplateBase;
use crate::par;
use crate::selection::{annotate, select_rule_set_traced, SelectionConfig, SelectionStep};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Relative tolerance under which two scores count as tied.
pub const SCORE_TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedRule {
    pub features: Rule,
    pub description: String,
    pub precision: f64,
    pub recall: f64,
    pub covered: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub bins: usize,
    pub selection: SelectionConfig,
    pub generation: GenerationConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub dataset_sha256: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub config: TrainingConfig,
}

/// Log template base and interval stored alongside a model trained with
/// log features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogModel {
    pub template_base: TemplateBase,
    pub interval_seconds: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultModel {
    pub schema_version: u32,
    pub tool_version: String,
    pub binarization: BinarizationModel,
    pub services: Vec<String>,
    pub fault_types: BTreeMap<String, Vec<AnnotatedRule>>,
    pub metadata: TrainingMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logs: Option<LogModel>,
}

/// Labelled training rows. `fault_labels[i]` is `None` for normal rows.
#[derive(Clone, Copy, Debug)]
pub struct TrainingInput<'a> {
    pub table: &'a RawTable,
    pub specs: &'a [FeatureSpec],
    pub services: &'a [String],
    pub fault_labels: &'a [Option<String>],
    /// Declared fault catalog; defaults to the labels present.
    pub fault_types: Option<&'a [String]>,
}

impl FaultModel {
    /// Fits the binarization and trains one rule set per fault type.
    /// Declared fault types without any labelled rows are skipped with a
    /// warning.
    pub fn train(input: TrainingInput<'_>, config: &TrainingConfig, dataset_sha256: String) -> Result<Self> {
        Ok(Self::train_traced(input, config, dataset_sha256)?.0)
    }

    /// [`FaultModel::train`] that also returns the selection steps taken
    /// for each fault type.
    pub fn train_traced(
        input: TrainingInput<'_>,
        config: &TrainingConfig,
        dataset_sha256: String,
    ) -> Result<(Self, BTreeMap<String, Vec<SelectionStep>>)> {
        let n = input.table.rows();
        if input.services.len() != n || input.fault_labels.len() != n {
            return Err(SlimError::InvalidDataset(format!(
                "{n} rows but {} service ids and {} labels",
                input.services.len(),
                input.fault_labels.len()
            )));
        }
        let binarization = BinarizationModel::fit(input.table, input.specs)?;
        let data = binarization.transform(input.table)?;
        let present: BTreeSet<&str> = input.fault_labels.iter().flatten().map(String::as_str).collect();
        let catalog: Vec<String> = match input.fault_types {
            Some(declared) => {
                for label in &present {
                    if !declared.iter().any(|d| d == label) {
                        log::warn!("label `{label}` is not a declared fault type; its rows count as negatives");
                    }
                }
                let mut declared = declared.to_vec();
                declared.sort();
                declared.dedup();
                declared
            }
            None => present.iter().map(|s| s.to_string()).collect(),
        };
        let trainable: Vec<&String> = catalog
            .iter()
            .filter(|ft| {
                let ok = present.contains(ft.as_str());
                if !ok {
                    log::warn!("fault type `{ft}` has no labelled rows; skipped");
                }
                ok
            })
            .collect();
        if trainable.is_empty() {
            return Err(SlimError::InvalidDataset("no fault type has labelled rows".into()));
        }
        let trained = par::map_slice(&trainable, |ft| -> Result<(String, Vec<AnnotatedRule>, Vec<SelectionStep>)> {
            let positives = SampleSet::from_indices(
                n,
                input.fault_labels.iter().enumerate().filter(|(_, l)| l.as_ref() == Some(*ft)).map(|(i, _)| i),
            );
            let one_vs_rest = data.relabel(positives)?;
            let outcome = select_rule_set_traced(&one_vs_rest, &config.selection, &config.generation)?;
            let set = annotate(&one_vs_rest, &outcome.rule_set)?;
            let rules = set
                .rules()
                .iter()
                .zip(set.stats().unwrap_or_default())
                .map(|(r, s)| {
                    Ok(AnnotatedRule {
                        features: r.clone(),
                        description: binarization.describe_rule(r)?,
                        precision: s.precision,
                        recall: s.recall,
                        covered: s.covered,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(((*ft).clone(), rules, outcome.steps))
        });
        let mut fault_types = BTreeMap::new();
        let mut traces = BTreeMap::new();
        for entry in trained {
            let (ft, rules, steps) = entry?;
            traces.insert(ft.clone(), steps);
            fault_types.insert(ft, rules);
        }
        let services: BTreeSet<&String> = input.services.iter().collect();
        let model = FaultModel {
            schema_version: MODEL_SCHEMA_VERSION,
            tool_version: crate::TOOL_VERSION.to_string(),
            metadata: TrainingMetadata {
                dataset_sha256,
                n_samples: n,
                n_features: binarization.n_features(),
                config: config.clone(),
            },
            services: services.into_iter().cloned().collect(),
            binarization,
            fault_types,
            logs: None,
        };
        Ok((model, traces))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: FaultModel = serde_json::from_str(text)?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(SlimError::Schema(format!("unsupported model schema version {}", model.schema_version)));
        }
        let d = model.binarization.n_features();
        for rules in model.fault_types.values() {
            for r in rules {
                if let Some(&j) = r.features.features().iter().find(|&&j| j >= d) {
                    return Err(SlimError::FeatureOutOfRange { index: j, features: d });
                }
            }
        }
        Ok(model)
    }

    pub fn rule_set(&self, fault_type: &str) -> Result<RuleSet> {
        let rules = self
            .fault_types
            .get(fault_type)
            .ok_or_else(|| SlimError::UnknownFaultType(fault_type.to_string()))?;
        RuleSet::with_stats(
            rules.iter().map(|r| r.features.clone()).collect(),
            rules
                .iter()
                .map(|r| RuleStats { precision: r.precision, recall: r.recall, covered: r.covered })
                .collect(),
        )
    }

    /// Binarizes raw rows into a query window.
    pub fn window(&self, table: &RawTable, services: Vec<String>) -> Result<QueryWindow> {
        let samples = self.binarization.transform(table)?;
        QueryWindow::new(self, samples, services)
    }

    /// Vote of one sample for one fault type: the highest training
    /// precision among the type's rules covering the sample, or 0.
    pub fn sample_vote(&self, fault_type: &str, window: &QueryWindow, sample: usize) -> Result<f64> {
        let rules = self
            .fault_types
            .get(fault_type)
            .ok_or_else(|| SlimError::UnknownFaultType(fault_type.to_string()))?;
        if sample >= window.len() {
            return Err(SlimError::InvalidArgument(format!("sample {sample} outside window of {}", window.len())));
        }
        let mut best = 0.0f64;
        for r in rules {
            if window.samples.cover_rule(&r.features)?.contains(sample) {
                best = best.max(r.precision);
            }
        }
        Ok(best)
    }

    /// Ranks fault types and services for a window.
    pub fn localize(&self, window: &QueryWindow) -> Result<LocalizationReport> {
        let names: Vec<&String> = self.fault_types.keys().collect();
        let per_type = par::map_slice(&names, |ft| self.attribute(ft, window));
        let per_type = per_type.into_iter().collect::<Result<Vec<_>>>()?;

        let mut fault_scores = Vec::with_capacity(names.len());
        let mut service_scores: BTreeMap<&str, f64> = self.services.iter().map(|s| (s.as_str(), 0.0)).collect();
        let mut explanations = Vec::new();
        for (ft, attr) in names.iter().zip(&per_type) {
            fault_scores.push(((*ft).clone(), attr.votes.iter().sum::<f64>()));
            for (i, &v) in attr.votes.iter().enumerate() {
                *service_scores.get_mut(window.services[i].as_str()).unwrap() += v;
            }
            for (k, hits) in attr.hits.iter().enumerate() {
                if hits.is_empty() {
                    continue;
                }
                let rule = &self.fault_types[*ft][k];
                let mut services: BTreeMap<String, usize> = BTreeMap::new();
                for &i in hits {
                    *services.entry(window.services[i].clone()).or_default() += 1;
                }
                explanations.push(Explanation {
                    fault_type: (*ft).clone(),
                    rule_index: k,
                    description: rule.description.clone(),
                    precision: rule.precision,
                    hits: hits.len(),
                    services,
                });
            }
        }
        let no_signal = fault_scores.iter().all(|(_, s)| *s == 0.0);
        Ok(LocalizationReport {
            fault_ranking: Ranking::from_scores(fault_scores),
            service_ranking: Ranking::from_scores(
                service_scores.into_iter().map(|(s, v)| (s.to_string(), v)).collect(),
            ),
            explanations,
            no_signal,
        })
    }

    /// Per-sample votes for one fault type, and for each rule the samples
    /// where it supplied the vote (lowest index on equal precision).
    fn attribute(&self, fault_type: &str, window: &QueryWindow) -> Result<Attribution> {
        let rules = &self.fault_types[fault_type];
        let covers = rules
            .iter()
            .map(|r| window.samples.cover_rule(&r.features))
            .collect::<Result<Vec<_>>>()?;
        let mut votes = vec![0.0; window.len()];
        let mut hits = vec![Vec::new(); rules.len()];
        for (i, vote) in votes.iter_mut().enumerate() {
            let mut best: Option<usize> = None;
            for (k, cover) in covers.iter().enumerate() {
                if cover.contains(i) && best.is_none_or(|b| rules[k].precision > rules[b].precision) {
                    best = Some(k);
                }
            }
            if let Some(k) = best {
                *vote = rules[k].precision;
                hits[k].push(i);
            }
        }
        Ok(Attribution { votes, hits })
    }
}

struct Attribution {
    votes: Vec<f64>,
    hits: Vec<Vec<usize>>,
}

/// Binarized rows of an incident window with their service ids.
#[derive(Clone, Debug)]
pub struct QueryWindow {
    samples: BinaryDataset,
    services: Vec<String>,
}

impl QueryWindow {
    pub fn new(model: &FaultModel, samples: BinaryDataset, services: Vec<String>) -> Result<Self> {
        if samples.n_samples() == 0 {
            return Err(SlimError::InvalidArgument("query window is empty".into()));
        }
        if services.len() != samples.n_samples() {
            return Err(SlimError::InvalidArgument(format!(
                "{} samples but {} service ids",
                samples.n_samples(),
                services.len()
            )));
        }
        if samples.n_features() != model.binarization.n_features() {
            return Err(SlimError::Schema(format!(
                "window has {} features, model catalog has {}",
                samples.n_features(),
                model.binarization.n_features()
            )));
        }
        if let Some(s) = services.iter().find(|s| model.services.binary_search(s).is_err()) {
            return Err(SlimError::InvalidArgument(format!("unknown service `{s}`")));
        }
        Ok(QueryWindow { samples, services })
    }

    pub fn len(&self) -> usize {
        self.samples.n_samples()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn samples(&self) -> &BinaryDataset {
        &self.samples
    }

    pub fn services(&self) -> &[String] {
        &self.services
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub name: String,
    pub score: f64,
    /// Score equals a neighbour's within tolerance; order is by name.
    pub tied: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

fn scores_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= SCORE_TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

impl Ranking {
    /// Sorts by descending score; runs of tied scores are ordered by name.
    pub fn from_scores(mut scores: Vec<(String, f64)>) -> Self {
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut entries: Vec<RankEntry> = Vec::with_capacity(scores.len());
        let mut k = 0;
        while k < scores.len() {
            let mut end = k + 1;
            while end < scores.len() && scores_tie(scores[k].1, scores[end].1) {
                end += 1;
            }
            let mut run = scores[k..end].to_vec();
            run.sort_by(|a, b| a.0.cmp(&b.0));
            let tied = run.len() > 1;
            entries.extend(run.into_iter().map(|(name, score)| RankEntry { name, score, tied }));
            k = end;
        }
        Ranking { entries }
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    /// 1-based rank of a candidate.
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name).map(|p| p + 1)
    }

    pub fn top(&self) -> Option<&RankEntry> {
        self.entries.first()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub fault_type: String,
    pub rule_index: usize,
    pub description: String,
    pub precision: f64,
    /// Samples for which this rule supplied the vote.
    pub hits: usize,
    pub services: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub fault_ranking: Ranking,
    pub service_ranking: Ranking,
    pub explanations: Vec<Explanation>,
    /// No rule fired anywhere in the window.
    pub no_signal: bool,
}
