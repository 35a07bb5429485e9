//! Samples, features, rules and rule sets.
//!
//! A [`BinaryDataset`] stores one coverage bitset per binary feature
//! (`X_j`, the samples where feature `j` is 1) and the positive set `X⁺`.
//! A [`Rule`] is a conjunction of feature indices and covers
//! `X_r = ⋂_{j∈r} X_j`; a [`RuleSet`] is a disjunction of rules and covers
//! `X_s = ⋃_{r∈s} X_r`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bitset::SampleSet;
use crate::error::{Result, SlimError};

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryDataset {
    n: usize,
    coverage: Arc<Vec<SampleSet>>,
    positives: SampleSet,
    feature_names: Arc<Vec<String>>,
}

impl BinaryDataset {
    pub fn new(
        n: usize,
        coverage: Vec<SampleSet>,
        positives: SampleSet,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if let Some(j) = coverage.iter().position(|c| c.universe() != n) {
            return Err(SlimError::InvalidDataset(format!(
                "coverage of feature {j} spans {} samples, expected {n}",
                coverage[j].universe()
            )));
        }
        if positives.universe() != n {
            return Err(SlimError::InvalidDataset(format!(
                "label set spans {} samples, expected {n}",
                positives.universe()
            )));
        }
        if feature_names.len() != coverage.len() {
            return Err(SlimError::InvalidDataset(format!(
                "{} feature names for {} features",
                feature_names.len(),
                coverage.len()
            )));
        }
        Ok(BinaryDataset {
            n,
            coverage: Arc::new(coverage),
            positives,
            feature_names: Arc::new(feature_names),
        })
    }

    /// Row-major constructor, mostly for tests and small examples.
    pub fn from_rows(rows: &[Vec<bool>], labels: &[bool]) -> Result<Self> {
        let n = rows.len();
        if labels.len() != n {
            return Err(SlimError::InvalidDataset(format!(
                "{} labels for {n} rows",
                labels.len()
            )));
        }
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(SlimError::InvalidDataset("ragged rows".into()));
        }
        let coverage = (0..d)
            .map(|j| SampleSet::from_indices(n, (0..n).filter(|&i| rows[i][j])))
            .collect();
        let positives = SampleSet::from_indices(n, (0..n).filter(|&i| labels[i]));
        let names = (0..d).map(|j| format!("x{j}")).collect();
        BinaryDataset::new(n, coverage, positives, names)
    }

    /// Same samples and features under a different label set. Coverage is
    /// shared, so one-vs-rest training does not copy the feature matrix.
    pub fn relabel(&self, positives: SampleSet) -> Result<Self> {
        if positives.universe() != self.n {
            return Err(SlimError::InvalidDataset(format!(
                "label set spans {} samples, expected {}",
                positives.universe(),
                self.n
            )));
        }
        Ok(BinaryDataset {
            n: self.n,
            coverage: Arc::clone(&self.coverage),
            positives,
            feature_names: Arc::clone(&self.feature_names),
        })
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.coverage.len()
    }

    #[inline]
    pub fn coverage(&self, feature: usize) -> &SampleSet {
        &self.coverage[feature]
    }

    #[inline]
    pub fn positives(&self) -> &SampleSet {
        &self.positives
    }

    pub fn n_positives(&self) -> usize {
        self.positives.count()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn value(&self, sample: usize, feature: usize) -> bool {
        self.coverage[feature].contains(sample)
    }

    /// Rejects datasets that cannot be trained on.
    pub fn require_positives(&self) -> Result<()> {
        if self.positives.is_empty() {
            Err(SlimError::InvalidDataset("no positive samples".into()))
        } else {
            Ok(())
        }
    }

    pub fn check_rule(&self, rule: &Rule) -> Result<()> {
        match rule.features().iter().find(|&&j| j >= self.n_features()) {
            Some(&index) => Err(SlimError::FeatureOutOfRange {
                index,
                features: self.n_features(),
            }),
            None => Ok(()),
        }
    }

    /// `X_r`: samples where every feature of the rule is set. The empty
    /// rule covers every sample.
    pub fn cover_rule(&self, rule: &Rule) -> Result<SampleSet> {
        self.check_rule(rule)?;
        Ok(self.cover_rule_unchecked(rule.features()))
    }

    pub(crate) fn cover_rule_unchecked(&self, features: &[usize]) -> SampleSet {
        let mut it = features.iter();
        match it.next() {
            None => SampleSet::full(self.n),
            Some(&first) => {
                let mut cover = self.coverage[first].clone();
                for &j in it {
                    cover.intersect_with(&self.coverage[j]);
                }
                cover
            }
        }
    }

    /// `X_s`: samples covered by at least one rule.
    pub fn cover_set(&self, set: &RuleSet) -> Result<SampleSet> {
        self.cover_rules(set.rules())
    }

    pub fn cover_rules(&self, rules: &[Rule]) -> Result<SampleSet> {
        let mut cover = SampleSet::empty(self.n);
        for r in rules {
            cover.union_with(&self.cover_rule(r)?);
        }
        Ok(cover)
    }

    /// Training statistics of a single rule.
    pub fn rule_stats(&self, rule: &Rule) -> Result<RuleStats> {
        let cover = self.cover_rule(rule)?;
        let covered = cover.count();
        let hits = cover.count_and(&self.positives);
        let total_pos = self.n_positives();
        Ok(RuleStats {
            precision: if covered == 0 { 0.0 } else { hits as f64 / covered as f64 },
            recall: if total_pos == 0 { 0.0 } else { hits as f64 / total_pos as f64 },
            covered,
        })
    }
}

/// A conjunction of binary features, stored as a sorted, duplicate-free
/// index list. Ordering is lexicographic on that list.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rule(Vec<usize>);

impl Rule {
    pub fn new<I: IntoIterator<Item = usize>>(features: I) -> Self {
        let mut v: Vec<usize> = features.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Rule(v)
    }

    pub fn empty() -> Self {
        Rule(Vec::new())
    }

    pub fn features(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.0.binary_search(&feature).is_ok()
    }

    pub fn with(&self, feature: usize) -> Rule {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&feature) {
            v.insert(pos, feature);
        }
        Rule(v)
    }

    pub fn without(&self, feature: usize) -> Rule {
        Rule(self.0.iter().copied().filter(|&j| j != feature).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl From<Vec<usize>> for Rule {
    fn from(v: Vec<usize>) -> Self {
        Rule::new(v)
    }
}

/// Precision, recall and support of one rule on its training data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    pub precision: f64,
    pub recall: f64,
    pub covered: usize,
}

/// A disjunction of rules. Annotations are attached by
/// [`crate::selection::annotate`] once the set is final.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RuleSet {
    rules: Vec<Rule>,
    stats: Option<Vec<RuleStats>>,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Self {
        RuleSet { rules, stats: None }
    }

    pub fn with_stats(rules: Vec<Rule>, stats: Vec<RuleStats>) -> Result<Self> {
        if rules.len() != stats.len() {
            return Err(SlimError::InvalidArgument(format!(
                "{} annotations for {} rules",
                stats.len(),
                rules.len()
            )));
        }
        Ok(RuleSet {
            rules,
            stats: Some(stats),
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn stats(&self) -> Option<&[RuleStats]> {
        self.stats.as_deref()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn push(&mut self, rule: Rule) {
        self.rules.push(rule);
        self.stats = None;
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        self.rules.contains(rule)
    }

    /// True when some rule fires on `sample`.
    pub fn predict(&self, data: &BinaryDataset, sample: usize) -> bool {
        self.rules
            .iter()
            .any(|r| r.iter().all(|j| data.value(sample, j)))
    }
}

/// `F1(s) = 2|X_s⁺| / (|X_s| + |X⁺|)`.
pub fn f1_score(data: &BinaryDataset, set: &RuleSet) -> Result<f64> {
    data.require_positives()?;
    let cover = data.cover_set(set)?;
    Ok(f1_from_cover(data, &cover))
}

pub(crate) fn f1_from_cover(data: &BinaryDataset, cover: &SampleSet) -> f64 {
    let hits = cover.count_and(data.positives());
    2.0 * hits as f64 / (cover.count() + data.n_positives()) as f64
}
