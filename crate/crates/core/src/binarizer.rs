//! Quantile binarization of raw metric columns.
//!
//! A numeric column with thresholds `τ₁ < … < τ_t` yields `2t` binary
//! features, `x ≤ τₖ` and `x > τₖ`, so conjunctions can express intervals.
//! Thresholds are equal-mass quantiles at `k/bins`. A categorical column
//! yields one feature per observed category. Missing values satisfy no
//! predicate of their column, and `x = τ` satisfies `x ≤ τ`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bitset::SampleSet;
use crate::dataset::{BinaryDataset, Rule};
use crate::error::{Result, SlimError};
use crate::par;

pub const DEFAULT_BINS: usize = 100;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum RawValues {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl RawValues {
    pub fn len(&self) -> usize {
        match self {
            RawValues::Numeric(v) => v.len(),
            RawValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub values: RawValues,
}

impl RawColumn {
    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        RawColumn { name: name.into(), values: RawValues::Numeric(values) }
    }

    pub fn categorical(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        RawColumn { name: name.into(), values: RawValues::Categorical(values) }
    }
}

/// Column-oriented table of raw metrics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawTable {
    columns: Vec<RawColumn>,
    rows: usize,
}

impl RawTable {
    pub fn new(columns: Vec<RawColumn>) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.values.len());
        if let Some(c) = columns.iter().find(|c| c.values.len() != rows) {
            return Err(SlimError::InvalidArgument(format!(
                "column `{}` has {} rows, expected {rows}",
                c.name,
                c.values.len()
            )));
        }
        Ok(RawTable { columns, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Keeps only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> RawTable {
        let columns = self
            .columns
            .iter()
            .map(|c| RawColumn {
                name: c.name.clone(),
                values: match &c.values {
                    RawValues::Numeric(v) => RawValues::Numeric(rows.iter().map(|&i| v[i]).collect()),
                    RawValues::Categorical(v) => {
                        RawValues::Categorical(rows.iter().map(|&i| v[i].clone()).collect())
                    }
                },
            })
            .collect();
        RawTable { columns, rows: rows.len() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Quantile bin count for numeric columns.
    pub bins: usize,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>, bins: usize) -> Self {
        FeatureSpec { name: name.into(), kind: ColumnKind::Numeric, bins }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        FeatureSpec { name: name.into(), kind: ColumnKind::Categorical, bins: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnModel {
    Numeric { name: String, thresholds: Vec<f64> },
    Categorical { name: String, categories: Vec<String> },
}

impl ColumnModel {
    pub fn name(&self) -> &str {
        match self {
            ColumnModel::Numeric { name, .. } | ColumnModel::Categorical { name, .. } => name,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "==")]
    Eq,
}

/// One binary predicate on a source column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryFeature {
    pub feature: usize,
    pub column: String,
    pub op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

impl BinaryFeature {
    /// `col ≤ τ`, `col > τ` or `col = value`.
    pub fn predicate(&self) -> String {
        match (self.op, self.threshold, &self.category) {
            (Op::Le, Some(t), _) => format!("{} ≤ {}", self.column, t),
            (Op::Gt, Some(t), _) => format!("{} > {}", self.column, t),
            (_, _, Some(c)) => format!("{} = {}", self.column, c),
            _ => format!("{} ?", self.column),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarizationModel {
    pub schema_version: u32,
    pub columns: Vec<ColumnModel>,
    pub feature_catalog: Vec<BinaryFeature>,
}

/// Linear-interpolation quantile of sorted data (`p ∈ [0, 1]`).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Deduplicated quantile thresholds at `k/bins`, dropping any threshold at
/// or above the maximum (its `>` side would be empty).
pub fn quantile_thresholds(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return Vec::new();
    }
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().unwrap();
    let mut out: Vec<f64> = Vec::with_capacity(bins.saturating_sub(1));
    for k in 1..bins {
        let q = round_significant(quantile_sorted(&sorted, k as f64 / bins as f64));
        if q < max && out.last().is_none_or(|&last| q > last) {
            out.push(q);
        }
    }
    out
}

/// Rounds to 12 significant digits, dropping interpolation noise such as
/// `0.21856899999999999` while leaving short decimal inputs unchanged.
fn round_significant(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn fit_column(table: &RawTable, spec: &FeatureSpec) -> Result<ColumnModel> {
    let column = table
        .column(&spec.name)
        .ok_or_else(|| SlimError::Schema(format!("column `{}` not found", spec.name)))?;
    match (spec.kind, &column.values) {
        (ColumnKind::Numeric, RawValues::Numeric(values)) => {
            if spec.bins < 2 {
                return Err(SlimError::InvalidArgument(format!(
                    "column `{}`: bins must be >= 2, got {}",
                    spec.name, spec.bins
                )));
            }
            let finite: Vec<f64> = values.iter().flatten().copied().filter(|v| v.is_finite()).collect();
            if finite.is_empty() {
                log::warn!("column `{}` has no finite values; it yields no features", spec.name);
            }
            Ok(ColumnModel::Numeric {
                name: spec.name.clone(),
                thresholds: quantile_thresholds(&finite, spec.bins),
            })
        }
        (ColumnKind::Categorical, RawValues::Categorical(values)) => {
            let categories: BTreeSet<&String> = values.iter().flatten().collect();
            if categories.is_empty() {
                log::warn!("column `{}` has no values; it yields no features", spec.name);
            }
            Ok(ColumnModel::Categorical {
                name: spec.name.clone(),
                categories: categories.into_iter().cloned().collect(),
            })
        }
        (kind, _) => Err(SlimError::Schema(format!(
            "column `{}` declared {kind:?} but holds other data",
            spec.name
        ))),
    }
}

impl BinarizationModel {
    /// Fits thresholds and category maps, one column per spec.
    pub fn fit(table: &RawTable, specs: &[FeatureSpec]) -> Result<Self> {
        if table.rows() == 0 || table.columns().is_empty() {
            return Err(SlimError::InvalidArgument("cannot fit on an empty table".into()));
        }
        let columns = par::map_slice(specs, |spec| fit_column(table, spec))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_columns(columns))
    }

    pub fn from_columns(columns: Vec<ColumnModel>) -> Self {
        let mut catalog = Vec::new();
        for col in &columns {
            match col {
                ColumnModel::Numeric { name, thresholds } => {
                    for &t in thresholds {
                        for op in [Op::Le, Op::Gt] {
                            catalog.push(BinaryFeature {
                                feature: catalog.len(),
                                column: name.clone(),
                                op,
                                threshold: Some(t),
                                category: None,
                            });
                        }
                    }
                }
                ColumnModel::Categorical { name, categories } => {
                    for c in categories {
                        catalog.push(BinaryFeature {
                            feature: catalog.len(),
                            column: name.clone(),
                            op: Op::Eq,
                            threshold: None,
                            category: Some(c.clone()),
                        });
                    }
                }
            }
        }
        BinarizationModel {
            schema_version: SCHEMA_VERSION,
            columns,
            feature_catalog: catalog,
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_catalog.len()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(ColumnModel::name).collect()
    }

    /// Binarizes a raw table. The result carries no positive labels; use
    /// [`BinaryDataset::relabel`] to attach them.
    pub fn transform(&self, table: &RawTable) -> Result<BinaryDataset> {
        let n = table.rows();
        let per_column = par::map_slice(&self.columns, |col| -> Result<Vec<SampleSet>> {
            let raw = table
                .column(col.name())
                .ok_or_else(|| SlimError::Schema(format!("column `{}` missing from input", col.name())))?;
            match (col, &raw.values) {
                (ColumnModel::Numeric { thresholds, .. }, RawValues::Numeric(values)) => {
                    let mut sets = Vec::with_capacity(2 * thresholds.len());
                    for &t in thresholds {
                        let mut le = SampleSet::empty(n);
                        let mut gt = SampleSet::empty(n);
                        for (i, v) in values.iter().enumerate() {
                            match v {
                                Some(x) if x.is_finite() && *x <= t => le.insert(i),
                                Some(x) if x.is_finite() => gt.insert(i),
                                _ => {}
                            }
                        }
                        sets.push(le);
                        sets.push(gt);
                    }
                    Ok(sets)
                }
                (ColumnModel::Categorical { categories, .. }, RawValues::Categorical(values)) => {
                    let index: HashMap<&str, usize> =
                        categories.iter().enumerate().map(|(k, c)| (c.as_str(), k)).collect();
                    let mut sets = vec![SampleSet::empty(n); categories.len()];
                    for (i, v) in values.iter().enumerate() {
                        if let Some(&k) = v.as_deref().and_then(|s| index.get(s)) {
                            sets[k].insert(i);
                        }
                    }
                    Ok(sets)
                }
                _ => Err(SlimError::Schema(format!("column `{}` has the wrong kind", col.name()))),
            }
        });
        let mut coverage = Vec::with_capacity(self.n_features());
        for sets in per_column {
            coverage.extend(sets?);
        }
        let names = self.feature_catalog.iter().map(BinaryFeature::predicate).collect();
        BinaryDataset::new(n, coverage, SampleSet::empty(n), names)
    }

    /// Feature index for a predicate string produced by
    /// [`BinaryFeature::predicate`].
    pub fn feature_by_predicate(&self, predicate: &str) -> Option<usize> {
        self.feature_catalog.iter().position(|f| f.predicate() == predicate)
    }

    /// Renders a rule as `pred ∧ pred ∧ …`; bounds on one numeric column
    /// merge into interval notation (`a < x ≤ b`). The empty rule is `TRUE`.
    pub fn describe_rule(&self, rule: &Rule) -> Result<String> {
        if rule.is_empty() {
            return Ok("TRUE".into());
        }
        let mut order: Vec<&str> = Vec::new();
        let mut groups: HashMap<&str, Vec<&BinaryFeature>> = HashMap::new();
        for j in rule.iter() {
            let f = self.feature_catalog.get(j).ok_or(SlimError::FeatureOutOfRange {
                index: j,
                features: self.n_features(),
            })?;
            if !groups.contains_key(f.column.as_str()) {
                order.push(&f.column);
            }
            groups.entry(&f.column).or_default().push(f);
        }
        let mut parts = Vec::new();
        for col in order {
            let feats = &groups[col];
            let lower = feats
                .iter()
                .filter(|f| f.op == Op::Gt)
                .filter_map(|f| f.threshold)
                .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
            let upper = feats
                .iter()
                .filter(|f| f.op == Op::Le)
                .filter_map(|f| f.threshold)
                .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
            match (lower, upper) {
                (Some(lo), Some(hi)) => parts.push(format!("{lo} < {col} ≤ {hi}")),
                (Some(lo), None) => parts.push(format!("{col} > {lo}")),
                (None, Some(hi)) => parts.push(format!("{col} ≤ {hi}")),
                (None, None) => {}
            }
            for f in feats.iter().filter(|f| f.op == Op::Eq) {
                parts.push(f.predicate());
            }
        }
        let mut out = String::new();
        for (k, p) in parts.iter().enumerate() {
            if k > 0 {
                out.push_str(" ∧ ");
            }
            let _ = write!(out, "{p}");
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: BinarizationModel = serde_json::from_str(text)?;
        if model.schema_version != SCHEMA_VERSION {
            return Err(SlimError::Schema(format!(
                "unsupported binarization schema version {}",
                model.schema_version
            )));
        }
        let rebuilt = Self::from_columns(model.columns.clone());
        if rebuilt.feature_catalog != model.feature_catalog {
            return Err(SlimError::Schema("feature catalog does not match its columns".into()));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn num(name: &str, v: &[f64]) -> RawColumn {
        RawColumn::numeric(name, v.iter().map(|&x| Some(x)).collect())
    }

    #[test]
    fn uniform_column_terciles() {
        // 100, 100.1, …, 500
        let values: Vec<f64> = (0..=4000).map(|i| 100.0 + i as f64 * 0.1).collect();
        let t = quantile_thresholds(&values, 3);
        assert_eq!(t.len(), 2);
        assert!((t[0] - 233.333).abs() < 0.05 && (t[1] - 366.667).abs() < 0.05, "{t:?}");
        let table = RawTable::new(vec![num("latency", &values)]).unwrap();
        let model = BinarizationModel::fit(&table, &[FeatureSpec::numeric("latency", 3)]).unwrap();
        let preds: Vec<String> = model.feature_catalog.iter().map(|f| f.predicate()).collect();
        assert_eq!(preds.len(), 4);
        assert!(preds[0].starts_with("latency ≤ 233.3") && preds[1].starts_with("latency > 233.3"));
        assert!(preds[2].starts_with("latency ≤ 366.6") && preds[3].starts_with("latency > 366.6"));
    }

    #[test]
    fn constant_column_has_no_features() {
        let table = RawTable::new(vec![num("c", &[3.0; 20])]).unwrap();
        let model = BinarizationModel::fit(&table, &[FeatureSpec::numeric("c", DEFAULT_BINS)]).unwrap();
        assert_eq!(model.n_features(), 0);
    }

    #[test]
    fn all_missing_column_has_no_features() {
        let table = RawTable::new(vec![RawColumn::numeric("m", vec![None; 5])]).unwrap();
        let model = BinarizationModel::fit(&table, &[FeatureSpec::numeric("m", 10)]).unwrap();
        assert_eq!(model.n_features(), 0);
    }

    #[test]
    fn categorical_one_hot() {
        let v = ["waiting", "running", "waiting"].iter().map(|s| Some(s.to_string())).collect();
        let table = RawTable::new(vec![RawColumn::categorical("state", v)]).unwrap();
        let model = BinarizationModel::fit(&table, &[FeatureSpec::categorical("state")]).unwrap();
        assert_eq!(model.n_features(), 2);
        let data = model.transform(&table).unwrap();
        // categories sorted: running, waiting
        assert_eq!(data.coverage(0).to_vec(), vec![1]);
        assert_eq!(data.coverage(1).to_vec(), vec![0, 2]);
    }

    #[test]
    fn unknown_category_sets_nothing() {
        let model = BinarizationModel::from_columns(vec![ColumnModel::Categorical {
            name: "s".into(),
            categories: vec!["a".into(), "b".into()],
        }]);
        let table = RawTable::new(vec![RawColumn::categorical("s", vec![Some("zzz".into())])]).unwrap();
        let data = model.transform(&table).unwrap();
        assert!(data.coverage(0).is_empty() && data.coverage(1).is_empty());
    }

    #[test]
    fn empty_table_rejected() {
        let table = RawTable::new(vec![]).unwrap();
        assert!(matches!(BinarizationModel::fit(&table, &[]), Err(SlimError::InvalidArgument(_))));
        let table = RawTable::new(vec![num("x", &[])]).unwrap();
        assert!(BinarizationModel::fit(&table, &[FeatureSpec::numeric("x", 4)]).is_err());
    }

    #[test]
    fn row_between_thresholds() {
        let model = BinarizationModel::from_columns(vec![ColumnModel::Numeric {
            name: "latency".into(),
            thresholds: vec![100.0, 200.0],
        }]);
        let table = RawTable::new(vec![num("latency", &[150.0, 100.0])]).unwrap();
        let data = model.transform(&table).unwrap();
        // features: ≤100, >100, ≤200, >200
        assert!(!data.value(0, 0) && data.value(0, 1) && data.value(0, 2) && !data.value(0, 3));
        // on the threshold: x ≤ τ holds
        assert!(data.value(1, 0) && !data.value(1, 1));
        assert_eq!(model.describe_rule(&Rule::new([1, 2])).unwrap(), "100 < latency ≤ 200");
    }

    #[test]
    fn missing_value_sets_neither_direction() {
        let model = BinarizationModel::from_columns(vec![ColumnModel::Numeric {
            name: "x".into(),
            thresholds: vec![1.0],
        }]);
        let table = RawTable::new(vec![RawColumn::numeric("x", vec![None, Some(f64::NAN), Some(0.0)])]).unwrap();
        let data = model.transform(&table).unwrap();
        assert_eq!(data.coverage(0).to_vec(), vec![2]);
        assert!(data.coverage(1).is_empty());
    }

    #[test]
    fn describe_examples() {
        let model = BinarizationModel::from_columns(vec![
            ColumnModel::Numeric { name: "proc".into(), thresholds: vec![23.75] },
            ColumnModel::Numeric { name: "count_diff".into(), thresholds: vec![1042.45] },
        ]);
        // proc ≤, proc >, count_diff ≤, count_diff >
        assert_eq!(
            model.describe_rule(&Rule::new([1, 2])).unwrap(),
            "proc > 23.75 ∧ count_diff ≤ 1042.45"
        );
        assert_eq!(model.describe_rule(&Rule::empty()).unwrap(), "TRUE");
        assert!(model.describe_rule(&Rule::new([9])).is_err());
    }

    #[test]
    fn describe_keeps_tightest_bound() {
        let model = BinarizationModel::from_columns(vec![ColumnModel::Numeric {
            name: "x".into(),
            thresholds: vec![1.0, 2.0, 3.0],
        }]);
        // x > 1, x > 2, x ≤ 3
        assert_eq!(model.describe_rule(&Rule::new([1, 3, 4])).unwrap(), "2 < x ≤ 3");
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let table = RawTable::new(vec![
            num("a", &[1.0, 2.0, 3.0, 4.0]),
            RawColumn::categorical("b", vec![Some("u".into()), None, Some("v".into()), Some("u".into())]),
        ])
        .unwrap();
        let model =
            BinarizationModel::fit(&table, &[FeatureSpec::numeric("a", 4), FeatureSpec::categorical("b")]).unwrap();
        let text = model.to_json().unwrap();
        assert_eq!(BinarizationModel::from_json(&text).unwrap(), model);
        let bumped = text.replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(matches!(BinarizationModel::from_json(&bumped), Err(SlimError::Schema(_))));
    }

    #[test]
    fn predicate_strings_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cols: Vec<RawColumn> = (0..5)
            .map(|c| RawColumn::numeric(format!("m{c}"), (0..200).map(|_| Some(rng.gen_range(-1e3..1e3))).collect()))
            .collect();
        let specs: Vec<FeatureSpec> = (0..5).map(|c| FeatureSpec::numeric(format!("m{c}"), 7)).collect();
        let table = RawTable::new(cols).unwrap();
        let model = BinarizationModel::fit(&table, &specs).unwrap();
        let data = model.transform(&table).unwrap();
        for (j, name) in data.feature_names().iter().enumerate() {
            assert_eq!(model.feature_by_predicate(name), Some(j));
        }
    }

    #[test]
    fn fit_transform_deterministic_across_workers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cols: Vec<RawColumn> = (0..20)
            .map(|c| RawColumn::numeric(format!("m{c}"), (0..300).map(|_| Some(rng.gen::<f64>())).collect()))
            .collect();
        let specs: Vec<FeatureSpec> = (0..20).map(|c| FeatureSpec::numeric(format!("m{c}"), 10)).collect();
        let table = RawTable::new(cols).unwrap();
        let run = |w| {
            par::with_workers(Some(w), || {
                let m = BinarizationModel::fit(&table, &specs).unwrap();
                let d = m.transform(&table).unwrap();
                (m, (0..d.n_features()).map(|j| d.coverage(j).clone()).collect::<Vec<_>>())
            })
        };
        assert_eq!(run(1), run(4));
    }

    proptest! {
        #[test]
        fn directional_pair_partitions_non_missing(values in proptest::collection::vec(proptest::option::weighted(0.9, -50.0f64..50.0), 1..120), bins in 2usize..12) {
            let table = RawTable::new(vec![RawColumn::numeric("x", values.clone())]).unwrap();
            let model = BinarizationModel::fit(&table, &[FeatureSpec::numeric("x", bins)]).unwrap();
            let data = model.transform(&table).unwrap();
            let present = SampleSet::from_indices(values.len(), values.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i));
            for k in 0..data.n_features() / 2 {
                let (le, gt) = (data.coverage(2 * k), data.coverage(2 * k + 1));
                prop_assert!(le.is_disjoint(gt));
                prop_assert_eq!(le.union(gt), present.clone());
            }
        }

        #[test]
        fn thresholds_permutation_invariant(values in proptest::collection::vec(-1e6f64..1e6, 1..200), seed in 0u64..1000) {
            let mut shuffled = values.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            let a = quantile_thresholds(&values, 10);
            prop_assert_eq!(&a, &quantile_thresholds(&shuffled, 10));
            prop_assert!(a.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
