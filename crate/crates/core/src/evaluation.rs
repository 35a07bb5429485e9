//! Evaluation metrics, exhaustive oracles and synthetic data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::SampleSet;
use crate::dataset::{f1_from_cover, BinaryDataset, Rule, RuleSet};
use crate::error::{Result, SlimError};
use crate::TIE_EPS;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const MAX_K: usize = 5;
pub const NO_SIGNAL_LABEL: &str = "<no-signal>";
pub const NOVEL_LABEL: &str = "<novel>";

/// 1-based rank of `truth` in `ranking`; `None` if absent or novel.
pub fn rank_of<S: AsRef<str>>(truth: Option<&str>, ranking: &[S]) -> Option<usize> {
    let truth = truth?;
    ranking.iter().position(|c| c.as_ref() == truth).map(|p| p + 1)
}

/// `A@1 … A@max_k` from the rank of each case's ground truth. Cases whose
/// truth is missing from the ranking count as misses at every `k`.
pub fn top_k_from_ranks(ranks: &[Option<usize>], max_k: usize) -> Result<Vec<f64>> {
    if ranks.is_empty() {
        return Err(SlimError::InvalidArgument("no cases to evaluate".into()));
    }
    if max_k == 0 {
        return Err(SlimError::InvalidArgument("k must be >= 1".into()));
    }
    let n = ranks.len() as f64;
    Ok((1..=max_k)
        .map(|k| ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count() as f64 / n)
        .collect())
}

pub fn top_k_accuracy<S: AsRef<str>>(truths: &[Option<&str>], rankings: &[Vec<S>], max_k: usize) -> Result<Vec<f64>> {
    if truths.len() != rankings.len() {
        return Err(SlimError::InvalidArgument(format!(
            "{} truths but {} rankings",
            truths.len(),
            rankings.len()
        )));
    }
    let ranks: Vec<Option<usize>> = truths.iter().zip(rankings).map(|(t, r)| rank_of(*t, r)).collect();
    top_k_from_ranks(&ranks, max_k)
}

/// Cohen's kappa between two label sequences.
pub fn cohen_kappa<T: Ord>(predictions: &[T], truths: &[T]) -> Result<f64> {
    if predictions.len() != truths.len() || predictions.is_empty() {
        return Err(SlimError::InvalidArgument(format!(
            "kappa needs equal-length, non-empty inputs (got {} and {})",
            predictions.len(),
            truths.len()
        )));
    }
    let n = predictions.len() as f64;
    let agree = predictions.iter().zip(truths).filter(|(p, t)| p == t).count() as f64;
    let mut pred_freq: BTreeMap<&T, usize> = BTreeMap::new();
    let mut true_freq: BTreeMap<&T, usize> = BTreeMap::new();
    for (p, t) in predictions.iter().zip(truths) {
        *pred_freq.entry(p).or_default() += 1;
        *true_freq.entry(t).or_default() += 1;
    }
    let p_o = agree / n;
    let p_e: f64 = pred_freq
        .iter()
        .map(|(label, &c)| c as f64 / n * true_freq.get(label).copied().unwrap_or(0) as f64 / n)
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return if p_o == 1.0 {
            Ok(1.0)
        } else {
            Err(SlimError::InvalidArgument("kappa undefined: chance agreement is 1".into()))
        };
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Outcome of one incident: ground truths (`None` = novel) and rankings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub fault_truth: Option<String>,
    pub service_truth: Option<String>,
    pub fault_ranking: Vec<String>,
    pub service_ranking: Vec<String>,
    pub no_signal: bool,
}

impl CaseResult {
    /// Top-1 fault decision, with no-signal as its own label.
    pub fn predicted_fault(&self) -> &str {
        match self.fault_ranking.first() {
            Some(f) if !self.no_signal => f,
            _ => NO_SIGNAL_LABEL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub cases: usize,
    pub no_signal_cases: usize,
    /// `A@1 … A@5` for fault types.
    pub fault_top_k: Vec<f64>,
    /// `A@1 … A@5` for services.
    pub service_top_k: Vec<f64>,
    pub kappa: f64,
    pub per_fault_type: BTreeMap<String, ClassScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_seconds: Option<f64>,
}

impl MetricsReport {
    pub fn from_cases(cases: &[CaseResult]) -> Result<Self> {
        let fault_ranks: Vec<Option<usize>> =
            cases.iter().map(|c| rank_of(c.fault_truth.as_deref(), &c.fault_ranking)).collect();
        let service_ranks: Vec<Option<usize>> =
            cases.iter().map(|c| rank_of(c.service_truth.as_deref(), &c.service_ranking)).collect();
        let fault_top_k = top_k_from_ranks(&fault_ranks, MAX_K)?;
        let service_top_k = top_k_from_ranks(&service_ranks, MAX_K)?;
        let predicted: Vec<&str> = cases.iter().map(CaseResult::predicted_fault).collect();
        let truths: Vec<&str> = cases.iter().map(|c| c.fault_truth.as_deref().unwrap_or(NOVEL_LABEL)).collect();
        let kappa = cohen_kappa(&predicted, &truths)?;

        let labels: BTreeSet<&str> = cases.iter().filter_map(|c| c.fault_truth.as_deref()).collect();
        let per_fault_type = labels
            .into_iter()
            .map(|label| {
                let tp = predicted.iter().zip(&truths).filter(|(p, t)| **p == label && **t == label).count();
                let pred = predicted.iter().filter(|p| **p == label).count();
                let support = truths.iter().filter(|t| **t == label).count();
                let precision = if pred == 0 { 0.0 } else { tp as f64 / pred as f64 };
                let recall = tp as f64 / support as f64;
                let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (pred + support) as f64 };
                (label.to_string(), ClassScores { precision, recall, f1, support })
            })
            .collect();
        Ok(MetricsReport {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: crate::TOOL_VERSION.to_string(),
            cases: cases.len(),
            no_signal_cases: cases.iter().filter(|c| c.no_signal).count(),
            fault_top_k,
            service_top_k,
            kappa,
            per_fault_type,
            training_seconds: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned plain-text rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cases: {}  no-signal: {}  kappa: {:.4}", self.cases, self.no_signal_cases, self.kappa);
        if let Some(t) = self.training_seconds {
            let _ = writeln!(out, "training seconds: {t:.3}");
        }
        let _ = write!(out, "{:<10}", "");
        for k in 1..=self.fault_top_k.len() {
            let _ = write!(out, "{:>8}", format!("A@{k}"));
        }
        out.push('\n');
        for (name, row) in [("fault", &self.fault_top_k), ("service", &self.service_top_k)] {
            let _ = write!(out, "{name:<10}");
            for v in row {
                let _ = write!(out, "{v:>8.4}");
            }
            out.push('\n');
        }
        if !self.per_fault_type.is_empty() {
            let width = self.per_fault_type.keys().map(String::len).max().unwrap_or(0).max(10);
            let _ = writeln!(
                out,
                "{:<width$}{:>10}{:>10}{:>10}{:>9}",
                "fault type", "precision", "recall", "f1", "support"
            );
            for (name, s) in &self.per_fault_type {
                let _ = writeln!(
                    out,
                    "{name:<width$}{:>10.4}{:>10.4}{:>10.4}{:>9}",
                    s.precision, s.recall, s.f1, s.support
                );
            }
        }
        out
    }
}

/// Fold index per sample, stratified by label and seeded.
pub fn stratified_folds<T: Ord>(labels: &[T], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > labels.len() {
        return Err(SlimError::InvalidArgument(format!(
            "need 2 <= folds <= samples, got {k} folds for {} samples",
            labels.len()
        )));
    }
    let mut groups: BTreeMap<&T, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[i] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

/// Size limits for the exhaustive oracle.
pub const BRUTE_MAX_FEATURES: usize = 12;
pub const BRUTE_MAX_RULE_LEN: usize = 3;
pub const BRUTE_MAX_RULES: usize = 2;
pub const BRUTE_MAX_SAMPLES: usize = 200;

/// Every rule over `d` features with at most `max_len` features, ordered by
/// length and then lexicographically. Includes the empty rule.
pub fn all_rules(d: usize, max_len: usize) -> Vec<Rule> {
    fn extend(start: usize, d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for j in start..d {
            cur.push(j);
            extend(j + 1, d, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    extend(0, d, max_len, &mut Vec::new(), &mut raw);
    let mut rules: Vec<Rule> = raw.into_iter().map(Rule::new).collect();
    rules.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    rules
}

/// F1-optimal rule set of at most `max_rules` rules of length at most
/// `max_len`, by exhaustive enumeration. Ties keep the first set in
/// enumeration order (fewer rules, then earlier rules).
pub fn brute_force_best_ruleset(data: &BinaryDataset, max_rules: usize, max_len: usize) -> Result<(RuleSet, f64)> {
    let (n, d) = (data.n_samples(), data.n_features());
    if d > BRUTE_MAX_FEATURES || max_len > BRUTE_MAX_RULE_LEN || max_rules > BRUTE_MAX_RULES || n > BRUTE_MAX_SAMPLES {
        return Err(SlimError::BudgetExceeded(format!(
            "exhaustive search limited to d <= {BRUTE_MAX_FEATURES}, l <= {BRUTE_MAX_RULE_LEN}, \
             K <= {BRUTE_MAX_RULES}, n <= {BRUTE_MAX_SAMPLES}; got d = {d}, l = {max_len}, K = {max_rules}, n = {n}"
        )));
    }
    let rules = all_rules(d, max_len);
    let covers: Vec<SampleSet> = rules.iter().map(|r| data.cover_rule(r)).collect::<Result<_>>()?;
    let mut best: (Vec<usize>, f64) = (Vec::new(), 0.0);
    let mut offer = |idx: Vec<usize>, f1: f64| {
        if f1 > best.1 + TIE_EPS {
            best = (idx, f1);
        }
    };
    if max_rules >= 1 {
        for (a, ca) in covers.iter().enumerate() {
            offer(vec![a], f1_from_cover(data, ca));
        }
    }
    if max_rules >= 2 {
        for a in 0..covers.len() {
            for b in a + 1..covers.len() {
                offer(vec![a, b], f1_from_cover(data, &covers[a].union(&covers[b])));
            }
        }
    }
    let set = RuleSet::new(best.0.iter().map(|&k| rules[k].clone()).collect());
    Ok((set, best.1))
}

/// The best F1 reachable by replacing one rule of `rules` with any rule of
/// length at most `max_len`, and the swap achieving it.
pub fn best_single_swap(data: &BinaryDataset, rules: &[Rule], max_len: usize) -> Result<Option<(usize, Rule, f64)>> {
    let candidates = all_rules(data.n_features(), max_len);
    let mut best: Option<(usize, Rule, f64)> = None;
    for pos in 0..rules.len() {
        let others: Vec<Rule> = rules.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, r)| r.clone()).collect();
        let base = data.cover_rules(&others)?;
        for c in &candidates {
            let f1 = f1_from_cover(data, &base.union(&data.cover_rule(c)?));
            if best.as_ref().is_none_or(|b| f1 > b.2 + TIE_EPS) {
                best = Some((pos, c.clone(), f1));
            }
        }
    }
    Ok(best)
}

/// Planted-DNF data with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedData {
    pub dataset: BinaryDataset,
    pub dnf: Vec<Rule>,
    /// Labels before noise: whether the planted DNF fires.
    pub fires: Vec<bool>,
}

pub const PLANTED_RULES: usize = 2;
pub const PLANTED_RULE_LEN: usize = 3;

/// Draws Bernoulli(½) feature rows against a random DNF of two length-3
/// rules on disjoint features. Exactly `round(n / (ratio + 1))` rows fire
/// the DNF and are labelled positive; the rest are negative. Noise then
/// swaps `round(noise · P)` positive labels with as many negative labels,
/// so the positive count is unchanged.
pub fn planted_generator(seed: u64, n: usize, d: usize, imbalance_ratio: f64, noise: f64) -> Result<PlantedData> {
    if !imbalance_ratio.is_finite() || imbalance_ratio < 1.0 {
        return Err(SlimError::InvalidArgument(format!("imbalance ratio must be >= 1, got {imbalance_ratio}")));
    }
    if !(0.0..0.5).contains(&noise) {
        return Err(SlimError::InvalidArgument(format!("noise must be in [0, 0.5), got {noise}")));
    }
    let needed = PLANTED_RULES * PLANTED_RULE_LEN;
    if d < needed {
        return Err(SlimError::InvalidArgument(format!("need at least {needed} features, got {d}")));
    }
    let n_pos = (n as f64 / (imbalance_ratio + 1.0)).round() as usize;
    if n_pos == 0 || n_pos >= n {
        return Err(SlimError::InvalidArgument(format!(
            "ratio {imbalance_ratio} leaves {n_pos} positives out of {n} samples"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features: Vec<usize> = (0..d).collect();
    features.shuffle(&mut rng);
    let dnf: Vec<Rule> = features[..needed].chunks(PLANTED_RULE_LEN).map(|c| Rule::new(c.iter().copied())).collect();

    let fires = |row: &[bool]| dnf.iter().any(|r| r.iter().all(|j| row[j]));
    let (mut pos_rows, mut neg_rows) = (Vec::with_capacity(n_pos), Vec::with_capacity(n - n_pos));
    while pos_rows.len() < n_pos || neg_rows.len() < n - n_pos {
        let row: Vec<bool> = (0..d).map(|_| rng.gen_bool(0.5)).collect();
        if fires(&row) {
            if pos_rows.len() < n_pos {
                pos_rows.push(row);
            }
        } else if neg_rows.len() < n - n_pos {
            neg_rows.push(row);
        }
    }
    let mut rows: Vec<(Vec<bool>, bool)> =
        pos_rows.into_iter().map(|r| (r, true)).chain(neg_rows.into_iter().map(|r| (r, false))).collect();
    rows.shuffle(&mut rng);

    let mut labels: Vec<bool> = rows.iter().map(|(_, f)| *f).collect();
    let flips = (noise * n_pos as f64).round() as usize;
    if flips > 0 {
        let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i]).collect();
        let mut neg: Vec<usize> = (0..n).filter(|&i| !labels[i]).collect();
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        for &i in &pos[..flips] {
            labels[i] = false;
        }
        for &i in &neg[..flips.min(neg.len())] {
            labels[i] = true;
        }
    }
    let fires: Vec<bool> = rows.iter().map(|(_, f)| *f).collect();
    let matrix: Vec<Vec<bool>> = rows.into_iter().map(|(r, _)| r).collect();
    Ok(PlantedData { dataset: BinaryDataset::from_rows(&matrix, &labels)?, dnf, fires })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::f1_score;
    use crate::dataset::fixtures::toy;
    use proptest::{prop_assert, proptest};

    #[test]
    fn all_ranked_first() {
        let r = top_k_accuracy(&[Some("a"), Some("b")], &[vec!["a", "b"], vec!["b", "a"]], 3).unwrap();
        assert_eq!(r, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn ranks_one_two_four() {
        let r = top_k_from_ranks(&[Some(1), Some(2), Some(4)], 3).unwrap();
        assert_eq!(r, vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn novel_truth_is_a_miss_and_empty_rejected() {
        let r = top_k_accuracy(&[None, Some("a")], &[vec!["a"], vec!["a"]], 2).unwrap();
        assert_eq!(r, vec![0.5, 0.5]);
        assert!(top_k_from_ranks(&[], 3).is_err());
        assert!(top_k_from_ranks(&[Some(1)], 0).is_err());
    }

    #[test]
    fn kappa_perfect_and_degenerate() {
        let a = ["x", "y", "x", "y"];
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["x"; 4], &["x"; 4]).unwrap(), 1.0);
        assert!(cohen_kappa::<&str>(&[], &[]).is_err());
        assert!(cohen_kappa(&["x"], &["x", "y"]).is_err());
    }

    /// Kappa of a confusion matrix (rows: truth, columns: prediction),
    /// written out directly.
    fn kappa_from_matrix(m: [[f64; 2]; 2]) -> f64 {
        let n = m[0][0] + m[0][1] + m[1][0] + m[1][1];
        let po = (m[0][0] + m[1][1]) / n;
        let row = [m[0][0] + m[0][1], m[1][0] + m[1][1]];
        let col = [m[0][0] + m[1][0], m[0][1] + m[1][1]];
        let pe = (row[0] * col[0] + row[1] * col[1]) / (n * n);
        (po - pe) / (1.0 - pe)
    }

    fn labels_from_matrix(m: [[usize; 2]; 2]) -> (Vec<u8>, Vec<u8>) {
        let (mut pred, mut truth) = (Vec::new(), Vec::new());
        for t in 0..2 {
            for p in 0..2 {
                for _ in 0..m[t][p] {
                    pred.push(p as u8);
                    truth.push(t as u8);
                }
            }
        }
        (pred, truth)
    }

    #[test]
    fn kappa_two_by_two() {
        let (pred, truth) = labels_from_matrix([[40, 10], [20, 30]]);
        let k = cohen_kappa(&pred, &truth).unwrap();
        assert!((k - kappa_from_matrix([[40.0, 10.0], [20.0, 30.0]])).abs() < 1e-12);
        assert!((k - 0.4).abs() < 1e-12);
    }

    #[test]
    fn kappa_near_zero_for_independent_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let pred: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let truth: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        assert!(cohen_kappa(&pred, &truth).unwrap().abs() < 0.01);
    }

    proptest! {
        #[test]
        fn top_k_monotone(ranks in proptest::collection::vec(proptest::option::of(1usize..8), 1..50)) {
            let a = top_k_from_ranks(&ranks, 6).unwrap();
            prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        #[test]
        fn kappa_symmetric_and_bounded(pairs in proptest::collection::vec((0u8..3, 0u8..3), 1..60)) {
            let (p, t): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            if let (Ok(a), Ok(b)) = (cohen_kappa(&p, &t), cohen_kappa(&t, &p)) {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&a));
            }
        }
    }

    fn case(fault: &str, ranking: &[&str], no_signal: bool) -> CaseResult {
        CaseResult {
            fault_truth: Some(fault.into()),
            service_truth: Some("svc".into()),
            fault_ranking: ranking.iter().map(|s| s.to_string()).collect(),
            service_ranking: vec!["svc".into()],
            no_signal,
        }
    }

    #[test]
    fn report_from_cases() {
        let cases = vec![
            case("cpu", &["cpu", "mem"], false),
            case("mem", &["cpu", "mem"], false),
            case("mem", &["mem", "cpu"], false),
            case("cpu", &["cpu", "mem"], true),
        ];
        let r = MetricsReport::from_cases(&cases).unwrap();
        assert_eq!(r.fault_top_k[0], 0.75);
        assert_eq!(r.fault_top_k[1], 1.0);
        assert_eq!(r.service_top_k, vec![1.0; 5]);
        assert_eq!(r.no_signal_cases, 1);
        let cpu = r.per_fault_type["cpu"];
        assert_eq!((cpu.precision, cpu.recall, cpu.support), (0.5, 0.5, 2));
        let mem = r.per_fault_type["mem"];
        assert_eq!((mem.precision, mem.recall), (1.0, 0.5));
        let expected = cohen_kappa(&["cpu", "cpu", "mem", NO_SIGNAL_LABEL], &["cpu", "mem", "mem", "cpu"]).unwrap();
        assert_eq!(r.kappa, expected);
        let table = r.to_table();
        assert!(table.contains("A@1") && table.contains("cpu"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert!(json["tool_version"].is_string());
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let labels: Vec<&str> = (0..100).map(|i| if i % 10 == 0 { "fault" } else { "ok" }).collect();
        let f = stratified_folds(&labels, 5, 1).unwrap();
        assert_eq!(f, stratified_folds(&labels, 5, 1).unwrap());
        for k in 0..5 {
            let members: Vec<usize> = (0..100).filter(|&i| f[i] == k).collect();
            assert_eq!(members.len(), 20);
            assert_eq!(members.iter().filter(|&&i| labels[i] == "fault").count(), 2);
        }
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }

    #[test]
    fn all_rules_counts() {
        assert_eq!(all_rules(12, 3).len(), 1 + 12 + 66 + 220);
        assert_eq!(all_rules(3, 0), vec![Rule::empty()]);
    }

    #[test]
    fn brute_force_on_toy_candidates() {
        // the toy instance restricted to its three named rules A, B, C
        let data = toy();
        let (set, f1) = brute_force_best_ruleset(&data, 2, 1).unwrap();
        assert_eq!(set.rules(), &[Rule::new([0]), Rule::new([1])]);
        assert!((f1 - 40.0 / 42.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_perfect_separator() {
        let rows: Vec<Vec<bool>> = (0..30).map(|i| vec![i % 2 == 0, i < 10, i % 3 == 0]).collect();
        let labels: Vec<bool> = rows.iter().map(|r| r[1]).collect();
        let data = BinaryDataset::from_rows(&rows, &labels).unwrap();
        let (set, f1) = brute_force_best_ruleset(&data, 2, 2).unwrap();
        assert_eq!(set.rules(), &[Rule::new([1])]);
        assert_eq!(f1, 1.0);
    }

    #[test]
    fn brute_force_budget_guard() {
        let rows = vec![vec![false; 13]; 4];
        let data = BinaryDataset::from_rows(&rows, &[true, false, false, false]).unwrap();
        assert!(matches!(brute_force_best_ruleset(&data, 2, 3), Err(SlimError::BudgetExceeded(_))));
    }

    #[test]
    fn brute_force_dominates_slim_on_random_instances() {
        use crate::generation::GenerationConfig;
        use crate::selection::{select_rule_set, SelectionConfig};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.gen_range(40..120);
            let d = rng.gen_range(4..9);
            let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..d).map(|_| rng.gen_bool(0.4)).collect()).collect();
            let labels: Vec<bool> = rows.iter().map(|r| (r[0] && r[1]) || rng.gen_bool(0.1)).collect();
            if !labels.iter().any(|&l| l) {
                continue;
            }
            let data = BinaryDataset::from_rows(&rows, &labels).unwrap();
            let (_, best) = brute_force_best_ruleset(&data, 2, 2).unwrap();
            let set = select_rule_set(
                &data,
                &SelectionConfig { max_rules: 2, ..Default::default() },
                &GenerationConfig { max_len: 2, ..Default::default() },
            )
            .unwrap();
            assert!(f1_score(&data, &set).unwrap() <= best + 1e-12);
        }
    }

    #[test]
    fn planted_noise_free_dnf_is_perfect() {
        let p = planted_generator(5, 2000, 20, 10.0, 0.0).unwrap();
        let f1 = f1_score(&p.dataset, &RuleSet::new(p.dnf.clone())).unwrap();
        assert_eq!(f1, 1.0);
        assert_eq!(p.dnf.len(), PLANTED_RULES);
    }

    #[test]
    fn planted_imbalance_count() {
        let p = planted_generator(1, 10_000, 40, 50.0, 0.05).unwrap();
        let pos = p.dataset.n_positives() as f64;
        assert!((pos - 10_000.0 / 51.0).abs() <= 1.0);
        // ten labels flipped each way
        let disagree = (0..10_000).filter(|&i| p.fires[i] != p.dataset.positives().contains(i)).count();
        assert_eq!(disagree, 20);
    }

    #[test]
    fn planted_is_deterministic() {
        let a = planted_generator(9, 500, 12, 5.0, 0.1).unwrap();
        let b = planted_generator(9, 500, 12, 5.0, 0.1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, planted_generator(10, 500, 12, 5.0, 0.1).unwrap());
    }

    #[test]
    fn planted_rejects_bad_parameters() {
        assert!(planted_generator(0, 100, 10, 0.5, 0.0).is_err());
        assert!(planted_generator(0, 100, 10, 2.0, 0.5).is_err());
        assert!(planted_generator(0, 10, 10, 50.0, 0.0).is_err());
        assert!(planted_generator(0, 100, 4, 2.0, 0.0).is_err());
    }
}
