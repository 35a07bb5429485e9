//! Rule generation: approximately solving `max_{|r| ≤ l} W(r)`.
//!
//! `W(r) = α·ln f(r) − ln g(r)` is maximized by minorize-maximization.
//! Around the current anchor `r⁽ᵗ⁾`, `f` (a supermodular set function of
//! the feature set) has two modular lower bounds
//!
//! ```text
//! L¹(r) = f(r⁽ᵗ⁾) − Σ_{j∈Q₁} f(j | r⁽ᵗ⁾∖{j}) + Σ_{j∈Q₂} f(j | ∅)
//! L²(r) = f(r⁽ᵗ⁾) − Σ_{j∈Q₁} f(j | Γ∖{j})    + Σ_{j∈Q₂} f(j | r⁽ᵗ⁾)
//! ```
//!
//! with `Q₁ = r⁽ᵗ⁾∖r`, `Q₂ = r∖r⁽ᵗ⁾`, and `ln g` is bounded above by its
//! tangent at the anchor. The surrogates
//! `Vᵏ(r) = α·ln Lᵏ(r) − g(r)/g(r⁽ᵗ⁾)` are submodular and satisfy
//! `W(r) ≥ Vᵏ(r) + 1 − ln g(r⁽ᵗ⁾)` with equality at the anchor.
//!
//! MM runs from two starts, a GreedRatio rule and an F1-greedy rule, and
//! the better result by `W` is kept. Each MM iteration maximizes both
//! surrogates by greedy insertion followed by replacement/deletion local
//! search, then moves the anchor to the better of the two by true `W`. Once the anchor stops moving, a final 1-swap pass
//! on `W` itself makes the returned rule a local optimum of the objective.

use serde::{Deserialize, Serialize};

use crate::bitset::SampleSet;
use crate::dataset::Rule;
use crate::error::{Result, SlimError};
use crate::objective::ObjectiveContext;
use crate::par;
use crate::TIE_EPS;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Maximum number of features in a rule (`l`).
    pub max_len: usize,
    /// Distortion weight on the positive-cover term.
    pub alpha: f64,
    pub max_mm_iters: usize,
    /// Minimum gain in `W` for the anchor to move.
    pub improvement_eps: f64,
    /// Minimum surrogate gain for a local-search move to commit.
    pub local_search_eps: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            max_len: 6,
            alpha: 1.0,
            max_mm_iters: 50,
            improvement_eps: 1e-9,
            local_search_eps: 1e-9,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_len == 0 {
            return Err(SlimError::InvalidArgument("rule length limit must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(SlimError::InvalidArgument(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.improvement_eps > 0.0 && self.local_search_eps > 0.0) {
            return Err(SlimError::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Which modular lower bound of `f` a surrogate uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    First,
    Second,
}

impl BoundKind {
    pub const BOTH: [BoundKind; 2] = [BoundKind::First, BoundKind::Second];
}

/// Anchor-independent marginals of `f`, shared by every surrogate built
/// within one `generate_rule` call.
#[derive(Clone, Debug)]
struct FeatureMarginals {
    /// `f(j | ∅)`
    from_empty: Vec<f64>,
    /// `f(j | Γ∖{j})`
    from_all_but: Vec<f64>,
}

impl FeatureMarginals {
    fn new(ctx: &ObjectiveContext<'_>) -> Self {
        let data = ctx.data();
        let d = data.n_features();
        let f_empty = data.n_positives() as f64;
        let from_empty = par::map_range(d, |j| ctx.f_of_cover(data.coverage(j)) as f64 - f_empty);

        // f(Γ∖{j}) − f(Γ) counts the uncovered positives whose only unset
        // feature is j; a sample with no unset feature is in X_Γ and
        // contributes to neither side.
        let open = data.positives().difference(ctx.cover_pos());
        let mut only_missing = vec![0usize; d];
        for i in open.iter() {
            let mut missing = None;
            let mut count = 0;
            for j in 0..d {
                if !data.value(i, j) {
                    count += 1;
                    if count > 1 {
                        break;
                    }
                    missing = Some(j);
                }
            }
            if count == 1 {
                only_missing[missing.unwrap()] += 1;
            }
        }
        let from_all_but = only_missing.into_iter().map(|c| -(c as f64)).collect();
        FeatureMarginals {
            from_empty,
            from_all_but,
        }
    }
}

/// Surrogate `Vᵏ` built around an anchor rule, with the cached marginals
/// its lower bound needs.
#[derive(Clone, Debug)]
pub struct SurrogateState<'c, 'a> {
    ctx: &'c ObjectiveContext<'a>,
    kind: BoundKind,
    anchor: Rule,
    f_anchor: f64,
    g_anchor: f64,
    /// `f(j | r⁽ᵗ⁾∖{j})` for anchor features, 0 elsewhere.
    drop_in_anchor: Vec<f64>,
    from_empty: Vec<f64>,
    from_all_but: Vec<f64>,
    /// `f(j | r⁽ᵗ⁾)`, 0 for anchor features.
    from_anchor: Vec<f64>,
    /// Modular form: `Lᵏ(r) = base + Σ_{j∈r} weight[j]`.
    weights: Vec<f64>,
    base: f64,
}

impl<'c, 'a> SurrogateState<'c, 'a> {
    pub fn new(ctx: &'c ObjectiveContext<'a>, anchor: Rule, kind: BoundKind) -> Result<Self> {
        ctx.data().check_rule(&anchor)?;
        let marginals = FeatureMarginals::new(ctx);
        Ok(Self::with_marginals(ctx, anchor, kind, &marginals))
    }

    fn with_marginals(
        ctx: &'c ObjectiveContext<'a>,
        anchor: Rule,
        kind: BoundKind,
        marginals: &FeatureMarginals,
    ) -> Self {
        let data = ctx.data();
        let d = data.n_features();
        let anchor_cover = data.cover_rule_unchecked(anchor.features());
        let f_anchor = ctx.f_of_cover(&anchor_cover) as f64;
        let g_anchor = ctx.g_of_cover(&anchor_cover) as f64;

        let mut drop_in_anchor = vec![0.0; d];
        for j in anchor.iter() {
            let rest = data.cover_rule_unchecked(anchor.without(j).features());
            drop_in_anchor[j] = f_anchor - ctx.f_of_cover(&rest) as f64;
        }
        let from_anchor = par::map_range(d, |j| {
            if anchor.contains(j) {
                0.0
            } else {
                anchor_cover.count_and3_or(data.coverage(j), data.positives(), ctx.cover_pos()) as f64
                    - f_anchor
            }
        });

        let (weights, base) = {
            let (inside, outside): (&[f64], &[f64]) = match kind {
                BoundKind::First => (&drop_in_anchor, &marginals.from_empty),
                BoundKind::Second => (&marginals.from_all_but, &from_anchor),
            };
            let weights: Vec<f64> = (0..d)
                .map(|j| if anchor.contains(j) { inside[j] } else { outside[j] })
                .collect();
            let base = f_anchor - anchor.iter().map(|j| inside[j]).sum::<f64>();
            (weights, base)
        };

        SurrogateState {
            ctx,
            kind,
            anchor,
            f_anchor,
            g_anchor,
            drop_in_anchor,
            from_empty: marginals.from_empty.clone(),
            from_all_but: marginals.from_all_but.clone(),
            from_anchor,
            weights,
            base,
        }
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn anchor(&self) -> &Rule {
        &self.anchor
    }

    pub fn f_anchor(&self) -> f64 {
        self.f_anchor
    }

    pub fn g_anchor(&self) -> f64 {
        self.g_anchor
    }

    /// `Lᵏ(r)` evaluated term by term from `Q₁` and `Q₂`.
    pub fn lower_bound(&self, rule: &Rule) -> f64 {
        let q1 = self.anchor.iter().filter(|&j| !rule.contains(j));
        let q2 = rule.iter().filter(|&j| !self.anchor.contains(j));
        let (removed, added): (f64, f64) = match self.kind {
            BoundKind::First => (
                q1.map(|j| self.drop_in_anchor[j]).sum(),
                q2.map(|j| self.from_empty[j]).sum(),
            ),
            BoundKind::Second => (
                q1.map(|j| self.from_all_but[j]).sum(),
                q2.map(|j| self.from_anchor[j]).sum(),
            ),
        };
        self.f_anchor - removed + added
    }

    #[inline]
    fn modular_bound(&self, rule: &Rule) -> f64 {
        self.base + rule.iter().map(|j| self.weights[j]).sum::<f64>()
    }

    #[inline]
    fn v_from_parts(&self, bound: f64, g: usize) -> f64 {
        if bound <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.ctx.alpha() * bound.ln() - g as f64 / self.g_anchor
        }
    }

    /// `Vᵏ(r) = α·ln Lᵏ(r) − g(r)/g(r⁽ᵗ⁾)`; `-inf` when the bound is not
    /// positive.
    pub fn eval_v(&self, rule: &Rule) -> Result<f64> {
        let cover = self.ctx.data().cover_rule(rule)?;
        Ok(self.v_from_parts(self.lower_bound(rule), self.ctx.g_of_cover(&cover)))
    }

    /// Surrogate value of `r ∪ {j}` for every feature `j` outside `r`
    /// (`-inf` for features already in `r`).
    fn extension_values(&self, rule: &Rule, cover: &SampleSet, bound: f64) -> Vec<f64> {
        let data = self.ctx.data();
        let n_pos = data.n_positives();
        par::map_range(data.n_features(), |j| {
            if rule.contains(j) {
                return f64::NEG_INFINITY;
            }
            let g = cover.count_and_or(data.coverage(j), self.ctx.cover()) + n_pos;
            self.v_from_parts(bound + self.weights[j], g)
        })
    }

    /// Greedy insertion from the empty rule followed by replacement and
    /// deletion local search. Returns the rule and its surrogate value.
    pub fn maximize(&self, max_len: usize, eps: f64) -> (Rule, f64) {
        let data = self.ctx.data();
        let mut rule = Rule::empty();
        let mut cover = SampleSet::full(data.n_samples());
        let mut value = self.v_from_parts(self.base, self.ctx.g_of_cover(&cover));

        for step in 0..max_len {
            let values = self.extension_values(&rule, &cover, self.modular_bound(&rule));
            let Some((j, best)) = argmax(&values) else { break };
            // the first feature is always taken; later ones must pay off
            if step > 0 && best <= value {
                break;
            }
            rule = rule.with(j);
            cover.intersect_with(data.coverage(j));
            value = best;
        }
        if rule.is_empty() {
            return (rule, value);
        }

        // Each committed move raises the surrogate by more than eps, and the
        // candidate space is finite, so this terminates; the cap is a guard.
        let max_passes = 100 * max_len.max(1);
        for _ in 0..max_passes {
            let mut changed = false;
            for i in rule.features().to_vec() {
                if !rule.contains(i) {
                    continue;
                }
                let rest = rule.without(i);
                let rest_cover = data.cover_rule_unchecked(rest.features());
                let rest_bound = self.modular_bound(&rest);
                let values = self.extension_values(&rest, &rest_cover, rest_bound);
                let mut choice = argmax(&values).map(|(j, v)| (Some(j), v));
                if !rest.is_empty() {
                    let deleted = self.v_from_parts(rest_bound, self.ctx.g_of_cover(&rest_cover));
                    if choice.is_none_or(|(_, v)| deleted >= v - TIE_EPS) {
                        choice = Some((None, deleted));
                    }
                }
                if let Some((j, v)) = choice {
                    if v > value + eps {
                        rule = match j {
                            Some(j) => rest.with(j),
                            None => rest,
                        };
                        value = v;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (rule, value)
    }
}

/// Index and value of the largest finite entry; ties within [`TIE_EPS`]
/// go to the smaller index.
pub(crate) fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in values.iter().enumerate() {
        if v == f64::NEG_INFINITY || v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b + TIE_EPS => {}
            _ => best = Some((j, v)),
        }
    }
    best
}

/// GreedRatio: from the empty rule, repeatedly add the feature with the
/// highest precision on not-yet-covered samples,
/// `|X_{r∪{j}}⁺ ∖ X_s| / |X_{r∪{j}} ∖ X_s|`, while that ratio improves.
pub fn greed_ratio_init(ctx: &ObjectiveContext<'_>, max_len: usize) -> Rule {
    let data = ctx.data();
    let mut rule = Rule::empty();
    let mut cover = SampleSet::full(data.n_samples());
    let mut current = f64::NEG_INFINITY;
    for _ in 0..max_len {
        let ratios = par::map_range(data.n_features(), |j| {
            if rule.contains(j) {
                return f64::NEG_INFINITY;
            }
            let new_pos = cover.count_and_not(&data.coverage(j).intersection(data.positives()), ctx.cover());
            if new_pos == 0 {
                return f64::NEG_INFINITY;
            }
            let new_all = cover.count_and_not(data.coverage(j), ctx.cover());
            new_pos as f64 / new_all as f64
        });
        match argmax(&ratios) {
            Some((j, ratio)) if ratio > current + TIE_EPS => {
                rule = rule.with(j);
                cover.intersect_with(data.coverage(j));
                current = ratio;
            }
            _ => break,
        }
    }
    rule
}

/// F1-greedy: from the empty rule, repeatedly add the feature maximizing
/// the rule's F1 score on the samples the current set leaves uncovered,
/// `2·|X_r⁺ ∖ X_s| / (|X_r ∖ X_s| + |X⁺ ∖ X_s|)`, while that improves.
pub fn f1_greedy_init(ctx: &ObjectiveContext<'_>, max_len: usize) -> Rule {
    let data = ctx.data();
    let open_pos = data.positives().difference(ctx.cover());
    let n_open = open_pos.count();
    let mut rule = Rule::empty();
    let mut cover = SampleSet::full(data.n_samples());
    let mut current = f64::NEG_INFINITY;
    for _ in 0..max_len {
        let scores = par::map_range(data.n_features(), |j| {
            if rule.contains(j) {
                return f64::NEG_INFINITY;
            }
            let new_pos = cover.count_and(&data.coverage(j).intersection(&open_pos));
            if new_pos == 0 {
                return f64::NEG_INFINITY;
            }
            let new_all = cover.count_and_not(data.coverage(j), ctx.cover());
            2.0 * new_pos as f64 / (new_all + n_open) as f64
        });
        match argmax(&scores) {
            Some((j, score)) if score > current + TIE_EPS => {
                rule = rule.with(j);
                cover.intersect_with(data.coverage(j));
                current = score;
            }
            _ => break,
        }
    }
    rule
}

/// One surrogate maximization inside the MM loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmTrace {
    pub iteration: usize,
    pub bound: BoundKind,
    pub rule_len: usize,
    pub surrogate: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedRule {
    pub rule: Rule,
    /// `W` of the returned rule.
    pub value: f64,
    /// `W(r⁽⁰⁾), W(r⁽¹⁾), …` for the successive anchors.
    pub anchor_values: Vec<f64>,
    pub trace: Vec<MmTrace>,
}

/// Approximately maximizes `W(r)` over rules with at most `max_len`
/// features against the context's current cover.
///
/// Fails with [`SlimError::NoRuleFound`] when every positive sample is
/// already covered.
pub fn generate_rule(ctx: &ObjectiveContext<'_>, config: &GenerationConfig) -> Result<GeneratedRule> {
    config.validate()?;
    if ctx.alpha() != config.alpha {
        let mut local = ctx.clone();
        local.set_alpha(config.alpha);
        return generate_rule(&local, config);
    }
    let data = ctx.data();
    data.require_positives()?;
    if !ctx.has_uncovered_positive() {
        return Err(SlimError::NoRuleFound);
    }

    let marginals = FeatureMarginals::new(ctx);
    let greedy = greed_ratio_init(ctx, config.max_len);
    let f1_start = f1_greedy_init(ctx, config.max_len);
    let mut best = mm_from(ctx, &marginals, greedy.clone(), config);
    if f1_start != greedy {
        let other = mm_from(ctx, &marginals, f1_start, config);
        if other.value > best.value + TIE_EPS || ((other.value - best.value).abs() <= TIE_EPS && other.rule < best.rule) {
            best = other;
        }
    }
    if !best.value.is_finite() {
        return Err(SlimError::NoRuleFound);
    }
    Ok(best)
}

/// The MM loop from one initial anchor, followed by the `W` polish.
fn mm_from(ctx: &ObjectiveContext<'_>, marginals: &FeatureMarginals, start: Rule, config: &GenerationConfig) -> GeneratedRule {
    let data = ctx.data();
    let w_of = |r: &Rule| ctx.w_of_cover(&data.cover_rule_unchecked(r.features()));
    let mut anchor = start;
    let mut anchor_w = w_of(&anchor);
    let mut anchor_values = vec![anchor_w];
    let mut trace = Vec::new();

    for t in 1..=config.max_mm_iters {
        let mut best: Option<(Rule, f64)> = None;
        for kind in BoundKind::BOTH {
            let state = SurrogateState::with_marginals(ctx, anchor.clone(), kind, marginals);
            let (rule, v) = state.maximize(config.max_len, config.local_search_eps);
            let w = w_of(&rule);
            trace.push(MmTrace {
                iteration: t,
                bound: kind,
                rule_len: rule.len(),
                surrogate: v,
                objective: w,
            });
            let better = match &best {
                None => true,
                Some((br, bw)) => w > bw + TIE_EPS || ((w - bw).abs() <= TIE_EPS && rule < *br),
            };
            if better && w.is_finite() {
                best = Some((rule, w));
            }
        }
        match best {
            Some((rule, w)) if rule != anchor && w > anchor_w + config.improvement_eps => {
                anchor = rule;
                anchor_w = w;
                anchor_values.push(w);
            }
            _ => break,
        }
    }

    let (rule, value) = polish(ctx, anchor, anchor_w, config);
    GeneratedRule {
        rule,
        value,
        anchor_values,
        trace,
    }
}

/// Best-improvement 1-swap search on `W`: add a feature (while under the
/// length limit), replace one, or delete one (keeping at least one).
fn polish(ctx: &ObjectiveContext<'_>, mut rule: Rule, mut value: f64, config: &GenerationConfig) -> (Rule, f64) {
    let data = ctx.data();
    loop {
        let (candidate, w) = best_neighbor(ctx, &rule, config.max_len);
        match candidate {
            Some(next) if w > value + config.improvement_eps => {
                debug_assert!((ctx.w_of_cover(&data.cover_rule_unchecked(next.features())) - w).abs() < 1e-9);
                rule = next;
                value = w;
            }
            _ => return (rule, value),
        }
    }
}

/// Best rule reachable from `rule` by one add, replace or delete move.
pub(crate) fn best_neighbor(ctx: &ObjectiveContext<'_>, rule: &Rule, max_len: usize) -> (Option<Rule>, f64) {
    let data = ctx.data();
    let d = data.n_features();
    let n_pos = data.n_positives();
    let mut best: Option<(Rule, f64)> = None;
    let offer = |r: Rule, w: f64, best: &mut Option<(Rule, f64)>| {
        if !w.is_finite() {
            return;
        }
        let take = match best {
            None => true,
            Some((br, bw)) => w > *bw + TIE_EPS || ((w - *bw).abs() <= TIE_EPS && r < *br),
        };
        if take {
            *best = Some((r, w));
        }
    };
    let extend = |base: &Rule, cover: &SampleSet| -> Vec<f64> {
        par::map_range(d, |j| {
            if base.contains(j) {
                return f64::NEG_INFINITY;
            }
            let f = cover.count_and3_or(data.coverage(j), data.positives(), ctx.cover_pos());
            let g = cover.count_and_or(data.coverage(j), ctx.cover()) + n_pos;
            ctx.w_from_counts(f, g)
        })
    };

    if rule.len() < max_len {
        let cover = data.cover_rule_unchecked(rule.features());
        for (j, w) in extend(rule, &cover).into_iter().enumerate() {
            offer(rule.with(j), w, &mut best);
        }
    }
    for i in rule.iter() {
        let rest = rule.without(i);
        let rest_cover = data.cover_rule_unchecked(rest.features());
        for (j, w) in extend(&rest, &rest_cover).into_iter().enumerate() {
            if j != i {
                offer(rest.with(j), w, &mut best);
            }
        }
        if !rest.is_empty() {
            let w = ctx.w_of_cover(&rest_cover);
            offer(rest, w, &mut best);
        }
    }
    match best {
        Some((r, w)) => (Some(r), w),
        None => (None, f64::NEG_INFINITY),
    }
}
