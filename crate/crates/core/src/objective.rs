//! Objective evaluations over a partially built rule set.
//!
//! With `s` the rule set built so far, the log-F1 objective splits into
//! `G(s) = ln|X_s⁺|` and `C(s) = ln(|X_s| + |X⁺|)`, both monotone
//! submodular. A rule `r` is scored by the distorted marginal gain
//! `α·G(r|s) − C(r|s)`, which up to a constant equals
//!
//! ```text
//! W(r) = α·ln f(r) − ln g(r),   f(r) = |X_r⁺ ∪ X_s⁺|,   g(r) = |X_r ∪ X_s| + |X⁺|
//! ```
//!
//! `ln 0` is `-inf`. While `s` covers nothing, the base values `G(s)` and
//! `C(s)` are taken as 0, so the first gains are `α·ln|X_r⁺| − ln(|X_r| + |X⁺|)`.
//! Natural logs throughout; argmax and sign are base-independent.

use crate::bitset::SampleSet;
use crate::dataset::{BinaryDataset, Rule};
use crate::error::Result;

/// `ln x` for a count, `-inf` at zero.
#[inline]
pub(crate) fn ln_count(x: usize) -> f64 {
    if x == 0 {
        f64::NEG_INFINITY
    } else {
        (x as f64).ln()
    }
}

/// Per-worker view of the dataset together with the current cover `X_s`.
#[derive(Clone, Debug)]
pub struct ObjectiveContext<'a> {
    data: &'a BinaryDataset,
    cover: SampleSet,
    cover_pos: SampleSet,
    alpha: f64,
}

impl<'a> ObjectiveContext<'a> {
    /// Context for the empty rule set.
    pub fn new(data: &'a BinaryDataset, alpha: f64) -> Self {
        let n = data.n_samples();
        ObjectiveContext {
            data,
            cover: SampleSet::empty(n),
            cover_pos: SampleSet::empty(n),
            alpha,
        }
    }

    pub fn with_rules(data: &'a BinaryDataset, rules: &[Rule], alpha: f64) -> Result<Self> {
        let mut ctx = ObjectiveContext::new(data, alpha);
        for r in rules {
            ctx.add_rule(r)?;
        }
        Ok(ctx)
    }

    pub fn add_rule(&mut self, rule: &Rule) -> Result<()> {
        let cover = self.data.cover_rule(rule)?;
        self.add_cover(&cover);
        Ok(())
    }

    pub(crate) fn add_cover(&mut self, cover: &SampleSet) {
        self.cover.union_with(cover);
        self.cover_pos = self.cover.intersection(self.data.positives());
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn data(&self) -> &'a BinaryDataset {
        self.data
    }

    /// `X_s`
    pub fn cover(&self) -> &SampleSet {
        &self.cover
    }

    /// `X_s⁺`
    pub fn cover_pos(&self) -> &SampleSet {
        &self.cover_pos
    }

    /// Whether some positive sample is still uncovered.
    pub fn has_uncovered_positive(&self) -> bool {
        self.cover_pos.count() < self.data.n_positives()
    }

    /// `G(s)` with the empty-cover base of 0.
    pub fn base_g(&self) -> f64 {
        match self.cover_pos.count() {
            0 => 0.0,
            k => (k as f64).ln(),
        }
    }

    /// `C(s)` with the empty-cover base of 0.
    pub fn base_c(&self) -> f64 {
        match self.cover.count() {
            0 => 0.0,
            k => ((k + self.data.n_positives()) as f64).ln(),
        }
    }

    /// `f(r) = |X_r⁺ ∪ X_s⁺|` from a precomputed rule cover.
    #[inline]
    pub fn f_of_cover(&self, rule_cover: &SampleSet) -> usize {
        rule_cover.count_and_or(self.data.positives(), &self.cover_pos)
    }

    /// `g(r) = |X_r ∪ X_s| + |X⁺|` from a precomputed rule cover.
    #[inline]
    pub fn g_of_cover(&self, rule_cover: &SampleSet) -> usize {
        rule_cover.count_or(&self.cover) + self.data.n_positives()
    }

    #[inline]
    pub fn w_from_counts(&self, f: usize, g: usize) -> f64 {
        if f == 0 {
            f64::NEG_INFINITY
        } else {
            self.alpha * (f as f64).ln() - (g as f64).ln()
        }
    }

    #[inline]
    pub fn w_of_cover(&self, rule_cover: &SampleSet) -> f64 {
        self.w_from_counts(self.f_of_cover(rule_cover), self.g_of_cover(rule_cover))
    }

    pub fn f_value(&self, rule: &Rule) -> Result<usize> {
        Ok(self.f_of_cover(&self.data.cover_rule(rule)?))
    }

    pub fn g_value(&self, rule: &Rule) -> Result<usize> {
        Ok(self.g_of_cover(&self.data.cover_rule(rule)?))
    }

    /// `W(r) = α·ln f(r) − ln g(r)`.
    pub fn eval_w(&self, rule: &Rule) -> Result<f64> {
        Ok(self.w_of_cover(&self.data.cover_rule(rule)?))
    }

    /// `G(r|s)`; `-inf` when the positive cover stays empty.
    pub fn gain_g(&self, rule: &Rule) -> Result<f64> {
        let cover = self.data.cover_rule(rule)?;
        Ok(ln_count(self.f_of_cover(&cover)) - self.base_g())
    }

    /// `C(r|s)`; always finite since `|X⁺| ≥ 1` for training data.
    pub fn gain_c(&self, rule: &Rule) -> Result<f64> {
        let cover = self.data.cover_rule(rule)?;
        Ok((self.g_of_cover(&cover) as f64).ln() - self.base_c())
    }

    /// `α·G(r|s) − C(r|s)`.
    pub fn distorted_gain(&self, rule: &Rule) -> Result<f64> {
        let cover = self.data.cover_rule(rule)?;
        Ok(self.distorted_gain_of_cover(&cover))
    }

    pub(crate) fn distorted_gain_of_cover(&self, cover: &SampleSet) -> f64 {
        let w = self.w_of_cover(cover);
        if w == f64::NEG_INFINITY {
            w
        } else {
            w - (self.alpha * self.base_g() - self.base_c())
        }
    }
}
