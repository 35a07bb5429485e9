//! Rule-set selection: the curvature-distorted greedy outer loop.
//!
//! At step `i` of `K` the distortion is `αᵢ = (1 − γ/K)^{K−(i+1)}`, so early
//! steps weigh the positive-cover term lightly and pick precise rules, while
//! later steps (αᵢ → 1) chase recall. A generated rule is kept only if its
//! exact distorted gain `αᵢ·G(r|s) − C(r|s)` is positive.

use serde::{Deserialize, Serialize};

use crate::dataset::{f1_from_cover, BinaryDataset, Rule, RuleSet};
use crate::error::{Result, SlimError};
use crate::generation::{generate_rule, GenerationConfig, MmTrace};
use crate::objective::ObjectiveContext;
use crate::bitset::SampleSet;
use crate::par;
use crate::TIE_EPS;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Maximum number of rules (`K`).
    pub max_rules: usize,
    /// Curvature of the cover term, in `[0, 1]`.
    pub gamma: f64,
    /// Replaces the schedule with a constant distortion when set.
    pub alpha_override: Option<f64>,
    /// After the greedy pass, swap or drop single rules while F1 improves.
    pub refine_swaps: bool,
    /// Swap candidates come from a full scan of all rules of length at
    /// most `l` when there are at most this many, else from the rule
    /// generator. 0 always uses the generator.
    pub exhaustive_swap_limit: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            max_rules: 4,
            gamma: 1.0,
            alpha_override: None,
            refine_swaps: true,
            exhaustive_swap_limit: 100_000,
        }
    }
}

/// `[α₀, …, α_{K−1}]` with `αᵢ = (1 − γ/K)^{K−(i+1)}`.
pub fn alpha_schedule(max_rules: usize, gamma: f64) -> Result<Vec<f64>> {
    if max_rules == 0 {
        return Err(SlimError::InvalidArgument("K must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(SlimError::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let k = max_rules as f64;
    Ok((0..max_rules)
        .map(|i| (1.0 - gamma / k).powi((max_rules - (i + 1)) as i32))
        .collect())
}

/// What happened at one outer iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub iteration: usize,
    pub alpha: f64,
    pub candidate: Option<Rule>,
    /// `αᵢ·G(r|s) − C(r|s)` of the candidate.
    pub distorted_gain: f64,
    pub accepted: bool,
    pub note: StepNote,
    pub mm_trace: Vec<MmTrace>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepNote {
    Accepted,
    /// Accepted because nothing was covered yet, where the log-F1 gain of
    /// any rule hitting a positive is unbounded.
    AcceptedFirstCover,
    NonPositiveGain,
    Duplicate,
    AllPositivesCovered,
    NoRule,
    /// A single-rule swap made during refinement; the gain field holds the
    /// F1 increase.
    Swapped,
    /// A rule dropped during refinement; the gain field holds the F1
    /// increase.
    Dropped,
}

#[derive(Clone, Debug)]
pub struct SelectionOutcome {
    pub rule_set: RuleSet,
    pub steps: Vec<SelectionStep>,
}

/// Learns an annotated rule set of at most `sel.max_rules` rules.
pub fn select_rule_set(data: &BinaryDataset, sel: &SelectionConfig, gen: &GenerationConfig) -> Result<RuleSet> {
    Ok(select_rule_set_traced(data, sel, gen)?.rule_set)
}

pub fn select_rule_set_traced(
    data: &BinaryDataset,
    sel: &SelectionConfig,
    gen: &GenerationConfig,
) -> Result<SelectionOutcome> {
    data.require_positives()?;
    gen.validate()?;
    let alphas = match sel.alpha_override {
        Some(a) if a > 0.0 && a.is_finite() => vec![a; sel.max_rules.max(1)],
        Some(a) => return Err(SlimError::InvalidArgument(format!("alpha must be positive, got {a}"))),
        None => alpha_schedule(sel.max_rules, sel.gamma)?,
    };

    let mut rules: Vec<Rule> = Vec::new();
    let mut ctx = ObjectiveContext::new(data, alphas[0]);
    let mut steps = Vec::with_capacity(alphas.len());

    for (i, &alpha) in alphas.iter().enumerate() {
        ctx.set_alpha(alpha);
        let step_gen = GenerationConfig { alpha, ..gen.clone() };
        let generated = match generate_rule(&ctx, &step_gen) {
            Ok(g) => g,
            Err(SlimError::NoRuleFound) => {
                let note = if ctx.has_uncovered_positive() {
                    StepNote::NoRule
                } else {
                    StepNote::AllPositivesCovered
                };
                steps.push(SelectionStep {
                    iteration: i,
                    alpha,
                    candidate: None,
                    distorted_gain: f64::NEG_INFINITY,
                    accepted: false,
                    note,
                    mm_trace: Vec::new(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let rule = generated.rule;
        let cover = data.cover_rule(&rule)?;
        let gain = ctx.distorted_gain_of_cover(&cover);
        let note = if rules.contains(&rule) {
            StepNote::Duplicate
        } else if ctx.cover_pos().is_empty() {
            if cover.count_and(data.positives()) > 0 {
                StepNote::AcceptedFirstCover
            } else {
                StepNote::NonPositiveGain
            }
        } else if gain > 0.0 {
            StepNote::Accepted
        } else {
            StepNote::NonPositiveGain
        };
        let accepted = matches!(note, StepNote::Accepted | StepNote::AcceptedFirstCover);
        if accepted {
            ctx.add_cover(&cover);
            rules.push(rule.clone());
        }
        steps.push(SelectionStep {
            iteration: i,
            alpha,
            candidate: Some(rule),
            distorted_gain: gain,
            accepted,
            note,
            mm_trace: generated.trace,
        });
    }

    if sel.refine_swaps && !rules.is_empty() {
        refine_by_swaps(data, &mut rules, sel, gen, &mut steps)?;
    }

    let rule_set = annotate(data, &RuleSet::new(rules))?;
    Ok(SelectionOutcome { rule_set, steps })
}

/// Number of rules of length at most `max_len` over `d` features,
/// including the empty rule, saturating at `usize::MAX`.
pub fn rule_space_size(d: usize, max_len: usize) -> usize {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=max_len.min(d) {
        if k > 0 {
            binom = binom * (d - k + 1) as u128 / k as u128;
        }
        total = total.saturating_add(binom);
        if total > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    total as usize
}

/// F1-best rule of length at most `max_len` to add to `base`, scanning
/// every rule. Ties keep the earliest rule in depth-first lexicographic
/// order, with the empty rule first.
fn best_rule_exhaustive(data: &BinaryDataset, base: &SampleSet, max_len: usize) -> (Rule, f64) {
    let base_pos = base.intersection(data.positives());
    let p = data.n_positives();
    let score = |cover: &SampleSet| {
        let hits = cover.count_and_or(data.positives(), &base_pos);
        2.0 * hits as f64 / (cover.count_or(base) + p) as f64
    };

    fn descend(
        data: &BinaryDataset,
        score: &dyn Fn(&SampleSet) -> f64,
        rule: &mut Vec<usize>,
        cover: &SampleSet,
        left: usize,
        best: &mut (Vec<usize>, f64),
    ) {
        let value = score(cover);
        if value > best.1 + TIE_EPS {
            *best = (rule.clone(), value);
        }
        if left == 0 || cover.is_empty() {
            return;
        }
        let start = rule.last().map_or(0, |&j| j + 1);
        for j in start..data.n_features() {
            rule.push(j);
            let next = cover.intersection(data.coverage(j));
            descend(data, score, rule, &next, left - 1, best);
            rule.pop();
        }
    }

    let full = SampleSet::full(data.n_samples());
    let mut best = (Vec::new(), score(&full));
    if max_len > 0 {
        let branches = par::map_range(data.n_features(), |j| {
            let mut local = (Vec::new(), f64::NEG_INFINITY);
            descend(data, &score, &mut vec![j], data.coverage(j), max_len - 1, &mut local);
            local
        });
        for b in branches {
            if b.1 > best.1 + TIE_EPS {
                best = b;
            }
        }
    }
    (Rule::new(best.0), best.1)
}

/// Replaces or drops one rule at a time while that raises F1. With
/// `α = 1`, `W` against the other rules is `ln(F1/2)` of the swapped set,
/// so on large rule spaces the rule generator serves as the swap oracle.
fn refine_by_swaps(
    data: &BinaryDataset,
    rules: &mut Vec<Rule>,
    sel: &SelectionConfig,
    gen: &GenerationConfig,
    steps: &mut Vec<SelectionStep>,
) -> Result<()> {
    let swap_gen = GenerationConfig { alpha: 1.0, ..gen.clone() };
    let exhaustive = rule_space_size(data.n_features(), gen.max_len) <= sel.exhaustive_swap_limit;
    let mut current = f1_from_cover(data, &data.cover_rules(rules)?);
    // every committed change strictly raises F1, which takes finitely many values
    let max_rounds = 10 * rules.len() + 10;
    for _ in 0..max_rounds {
        let mut improved = false;
        let mut pos = 0;
        while pos < rules.len() {
            let others: Vec<Rule> = rules.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, r)| r.clone()).collect();
            let base = data.cover_rules(&others)?;
            let drop_f1 = f1_from_cover(data, &base);
            let candidate = if exhaustive {
                Some(best_rule_exhaustive(data, &base, gen.max_len))
            } else {
                let ctx = ObjectiveContext::with_rules(data, &others, 1.0)?;
                match generate_rule(&ctx, &swap_gen) {
                    Ok(g) => {
                        let f1 = f1_from_cover(data, &base.union(&data.cover_rule(&g.rule)?));
                        Some((g.rule, f1))
                    }
                    Err(SlimError::NoRuleFound) => None,
                    Err(e) => return Err(e),
                }
            };
            let swap = candidate.filter(|(r, f1)| *f1 > drop_f1 + TIE_EPS && *f1 > current + TIE_EPS && !rules.contains(r));
            match swap {
                Some((rule, f1)) => {
                    steps.push(SelectionStep {
                        iteration: steps.len(),
                        alpha: 1.0,
                        candidate: Some(rule.clone()),
                        distorted_gain: f1 - current,
                        accepted: true,
                        note: StepNote::Swapped,
                        mm_trace: Vec::new(),
                    });
                    rules[pos] = rule;
                    current = f1;
                    improved = true;
                }
                None if !others.is_empty() && drop_f1 > current + TIE_EPS => {
                    steps.push(SelectionStep {
                        iteration: steps.len(),
                        alpha: 1.0,
                        candidate: Some(rules[pos].clone()),
                        distorted_gain: drop_f1 - current,
                        accepted: false,
                        note: StepNote::Dropped,
                        mm_trace: Vec::new(),
                    });
                    rules.remove(pos);
                    current = drop_f1;
                    improved = true;
                    continue;
                }
                _ => {}
            }
            pos += 1;
        }
        if !improved {
            break;
        }
    }
    Ok(())
}

/// Attaches training precision, recall and support to every rule. Rules
/// covering nothing get precision 0.
pub fn annotate(data: &BinaryDataset, set: &RuleSet) -> Result<RuleSet> {
    let stats = set
        .rules()
        .iter()
        .map(|r| data.rule_stats(r))
        .collect::<Result<Vec<_>>>()?;
    RuleSet::with_stats(set.rules().to_vec(), stats)
}
