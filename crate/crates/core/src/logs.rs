//! Log novelty features.
//!
//! Normal history logs are parsed offline into a template base. Online
//! lines are matched against it and the lines that match nothing are
//! counted per time interval, aligned with the metric sample interval.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SlimError};
use crate::par;

pub const WILDCARD: &str = "<*>";
pub const DEFAULT_DEPTH: usize = 4;
pub const DEFAULT_SIMILARITY: f64 = 0.5;

/// Splits a message into tokens, replacing any token containing a digit
/// with the wildcard.
pub fn mask_tokens(message: &str) -> Vec<String> {
    message
        .split_whitespace()
        .map(|t| {
            if t.bytes().any(|b| b.is_ascii_digit()) {
                WILDCARD.to_string()
            } else {
                t.to_string()
            }
        })
        .collect()
}

/// Fraction of positions where the tokens agree; a wildcard agrees with
/// anything. Sequences of different length have similarity 0.
pub fn similarity(a: &[String], b: &[String]) -> f64 {
    if a.len() != b.len() {
        return 0.0;
    }
    if a.is_empty() {
        return 1.0;
    }
    let same = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x == y || *x == WILDCARD || *y == WILDCARD)
        .count();
    same as f64 / a.len() as f64
}

fn merge_into(template: &mut [String], other: &[String]) {
    for (t, o) in template.iter_mut().zip(other) {
        if t != o {
            *t = WILDCARD.to_string();
        }
    }
}

type GroupKey = (usize, Vec<String>);

#[derive(Clone, Debug, Serialize, Deserialize)]
struct StoredBase {
    tree_depth: usize,
    similarity_threshold: f64,
    templates: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StoredBase", into = "StoredBase")]
pub struct TemplateBase {
    templates: Vec<Vec<String>>,
    index: HashMap<GroupKey, Vec<usize>>,
    similarity_threshold: f64,
    tree_depth: usize,
}

impl From<TemplateBase> for StoredBase {
    fn from(base: TemplateBase) -> Self {
        StoredBase {
            tree_depth: base.tree_depth,
            similarity_threshold: base.similarity_threshold,
            templates: base.templates.iter().map(|t| t.join(" ")).collect(),
        }
    }
}

impl TryFrom<StoredBase> for TemplateBase {
    type Error = SlimError;

    fn try_from(stored: StoredBase) -> Result<Self> {
        check_params(stored.tree_depth, stored.similarity_threshold)?;
        let templates = stored
            .templates
            .iter()
            .map(|t| t.split_whitespace().map(str::to_string).collect())
            .collect();
        Ok(TemplateBase::from_templates(templates, stored.tree_depth, stored.similarity_threshold))
    }
}

fn check_params(depth: usize, sim: f64) -> Result<()> {
    if depth < 2 {
        return Err(SlimError::InvalidArgument(format!("tree depth must be >= 2, got {depth}")));
    }
    if !(sim > 0.0 && sim <= 1.0) {
        return Err(SlimError::InvalidArgument(format!(
            "similarity threshold must be in (0, 1], got {sim}"
        )));
    }
    Ok(())
}

impl TemplateBase {
    /// Parses normal log messages into templates. Lines are grouped by
    /// token count and their first `depth - 2` tokens; within a group a
    /// line joins the most similar template when the similarity reaches
    /// the threshold, and templates that become similar after a merge are
    /// collapsed.
    pub fn build<I, S>(lines: I, depth: usize, sim: f64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        check_params(depth, sim)?;
        let mut templates: Vec<Option<Vec<String>>> = Vec::new();
        let mut index: HashMap<GroupKey, Vec<usize>> = HashMap::new();
        for line in lines {
            let tokens = mask_tokens(line.as_ref());
            let key = group_key(&tokens, depth);
            let group = index.entry(key).or_default();
            let best = best_in_group(group.iter().map(|&id| (id, templates[id].as_ref().unwrap())), &tokens, sim);
            match best {
                None => {
                    group.push(templates.len());
                    templates.push(Some(tokens));
                }
                Some(id) => {
                    let mut merged = templates[id].take().unwrap();
                    merge_into(&mut merged, &tokens);
                    loop {
                        let other = group
                            .iter()
                            .copied()
                            .filter(|&o| o != id)
                            .find(|&o| similarity(&merged, templates[o].as_ref().unwrap()) >= sim);
                        match other {
                            Some(o) => {
                                let t = templates[o].take().unwrap();
                                merge_into(&mut merged, &t);
                                group.retain(|&g| g != o);
                            }
                            None => break,
                        }
                    }
                    templates[id] = Some(merged);
                }
            }
        }
        Ok(Self::from_templates(templates.into_iter().flatten().collect(), depth, sim))
    }

    fn from_templates(templates: Vec<Vec<String>>, depth: usize, sim: f64) -> Self {
        let mut index: HashMap<GroupKey, Vec<usize>> = HashMap::new();
        for (id, t) in templates.iter().enumerate() {
            index.entry(group_key(t, depth)).or_default().push(id);
        }
        TemplateBase { templates, index, similarity_threshold: sim, tree_depth: depth }
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn templates(&self) -> impl Iterator<Item = String> + '_ {
        self.templates.iter().map(|t| t.join(" "))
    }

    pub fn similarity_threshold(&self) -> f64 {
        self.similarity_threshold
    }

    pub fn tree_depth(&self) -> usize {
        self.tree_depth
    }

    /// Id of the best matching template, if any reaches the threshold.
    pub fn match_message(&self, message: &str) -> Option<usize> {
        self.match_tokens(&mask_tokens(message))
    }

    fn match_tokens(&self, tokens: &[String]) -> Option<usize> {
        let group = self.index.get(&group_key(tokens, self.tree_depth))?;
        best_in_group(group.iter().map(|&id| (id, &self.templates[id])), tokens, self.similarity_threshold)
    }

    /// Template pairs within one group whose similarity reaches the
    /// threshold. Empty for a base produced by [`TemplateBase::build`].
    pub fn mergeable_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for ids in self.index.values() {
            for (k, &a) in ids.iter().enumerate() {
                for &b in &ids[k + 1..] {
                    if similarity(&self.templates[a], &self.templates[b]) >= self.similarity_threshold {
                        out.push((a.min(b), a.max(b)));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn group_key(tokens: &[String], depth: usize) -> GroupKey {
    let prefix = tokens.iter().take(depth - 2).cloned().collect();
    (tokens.len(), prefix)
}

fn best_in_group<'t>(
    candidates: impl Iterator<Item = (usize, &'t Vec<String>)>,
    tokens: &[String],
    sim: f64,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (id, t) in candidates {
        let s = similarity(t, tokens);
        if s >= sim && best.is_none_or(|(bid, bs)| s > bs || (s == bs && id < bid)) {
            best = Some((id, s));
        }
    }
    best.map(|(id, _)| id)
}

/// How a timestamp prefix is recognised.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum TimestampFormat {
    /// RFC 3339 or a naive `YYYY-MM-DD[T ]HH:MM:SS[.fff]` (taken as UTC).
    #[default]
    Iso8601,
    /// A chrono format string for a naive timestamp (taken as UTC).
    Custom(String),
}

const NAIVE_ISO: [&str; 2] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"];

/// Splits a line into its timestamp (epoch seconds) and message.
pub fn split_timestamp<'l>(line: &'l str, format: &TimestampFormat) -> Option<(i64, &'l str)> {
    let line = line.trim_start();
    match format {
        TimestampFormat::Iso8601 => {
            if let Ok((dt, rest)) = DateTime::parse_and_remainder(line, "%Y-%m-%dT%H:%M:%S%.f%#z") {
                if starts_cleanly(rest) {
                    return Some((dt.timestamp(), rest.trim()));
                }
            }
            NAIVE_ISO.iter().find_map(|fmt| naive_prefix(line, fmt))
        }
        TimestampFormat::Custom(fmt) => naive_prefix(line, fmt),
    }
}

fn naive_prefix<'l>(line: &'l str, fmt: &str) -> Option<(i64, &'l str)> {
    let (dt, rest) = NaiveDateTime::parse_and_remainder(line, fmt).ok()?;
    let rest = rest.strip_prefix('Z').unwrap_or(rest);
    starts_cleanly(rest).then(|| (dt.and_utc().timestamp(), rest.trim()))
}

fn starts_cleanly(rest: &str) -> bool {
    rest.is_empty() || rest.starts_with(char::is_whitespace)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCounts {
    /// Interval start, epoch seconds.
    pub start: i64,
    pub total: usize,
    pub unmatched: usize,
    pub distinct_new: usize,
    /// Unmatched lines per masked message.
    pub new_templates: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogFeatureFrame {
    pub interval_seconds: i64,
    pub intervals: Vec<IntervalCounts>,
    /// Lines without a parseable timestamp.
    pub skipped: usize,
}

pub const FRAME_CSV_HEADER: &str = "interval_start,total,unmatched,distinct_new";

impl LogFeatureFrame {
    /// Matches each timestamped line against the base and counts totals,
    /// unmatched lines and distinct novel templates per interval. Intervals
    /// are aligned to multiples of `interval_seconds` since the epoch and
    /// run contiguously from the first to the last line.
    pub fn aggregate<S: AsRef<str> + Sync>(
        base: &TemplateBase,
        lines: &[S],
        interval_seconds: i64,
        format: &TimestampFormat,
    ) -> Result<Self> {
        if interval_seconds <= 0 {
            return Err(SlimError::InvalidArgument(format!(
                "interval must be positive, got {interval_seconds}"
            )));
        }
        let parsed = par::map_slice(lines, |line| {
            let (ts, msg) = split_timestamp(line.as_ref(), format)?;
            let tokens = mask_tokens(msg);
            let novel = base.match_tokens(&tokens).is_none().then(|| tokens.join(" "));
            Some((ts.div_euclid(interval_seconds) * interval_seconds, novel))
        });
        let mut skipped = 0;
        let mut buckets: BTreeMap<i64, IntervalCounts> = BTreeMap::new();
        for entry in parsed {
            let Some((start, novel)) = entry else {
                skipped += 1;
                continue;
            };
            let counts = buckets.entry(start).or_insert_with(|| IntervalCounts { start, ..Default::default() });
            counts.total += 1;
            if let Some(key) = novel {
                counts.unmatched += 1;
                *counts.new_templates.entry(key).or_default() += 1;
            }
        }
        if skipped > 0 {
            log::warn!("skipped {skipped} log lines without a parseable timestamp");
        }
        let mut intervals = Vec::new();
        if let (Some(&first), Some(&last)) = (buckets.keys().next(), buckets.keys().next_back()) {
            let mut t = first;
            while t <= last {
                let mut c = buckets.remove(&t).unwrap_or(IntervalCounts { start: t, ..Default::default() });
                c.distinct_new = c.new_templates.len();
                intervals.push(c);
                t += interval_seconds;
            }
        }
        Ok(LogFeatureFrame { interval_seconds, intervals, skipped })
    }

    /// Counts for the interval containing `t`, if it lies inside the frame.
    pub fn counts_at(&self, t: i64) -> Option<&IntervalCounts> {
        let first = self.intervals.first()?.start;
        let k = (t.div_euclid(self.interval_seconds) * self.interval_seconds - first) / self.interval_seconds;
        usize::try_from(k).ok().and_then(|k| self.intervals.get(k))
    }

    pub fn total_lines(&self) -> usize {
        self.intervals.iter().map(|c| c.total).sum()
    }

    pub fn novel_templates(&self) -> BTreeSet<&str> {
        self.intervals.iter().flat_map(|c| c.new_templates.keys().map(String::as_str)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FRAME_CSV_HEADER);
        out.push('\n');
        for c in &self.intervals {
            out.push_str(&format!("{},{},{},{}\n", c.start, c.total, c.unmatched, c.distinct_new));
        }
        out
    }
}
