//! Fixed-width bitsets over sample indices.
//!
//! Every coverage set in the crate (per feature, per rule, per rule set) is a
//! [`SampleSet`]. The objective evaluations only ever need cardinalities of
//! small set expressions, so the fused `count_*` helpers compute them word by
//! word without allocating an intermediate set.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SampleSet {
    words: Vec<u64>,
    universe: usize,
}

impl SampleSet {
    pub fn empty(universe: usize) -> Self {
        SampleSet {
            words: vec![0; universe.div_ceil(WORD)],
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = SampleSet {
            words: vec![u64::MAX; universe.div_ceil(WORD)],
            universe,
        };
        s.clear_tail();
        s
    }

    /// Builds a set from indices; indices `>= universe` are ignored.
    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut s = SampleSet::empty(universe);
        for i in indices {
            if i < universe {
                s.insert(i);
            }
        }
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.universe % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Size of the index universe `{0..universe-1}`.
    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe, "sample index {i} out of range");
        self.words[i / WORD] |= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        if i < self.universe {
            self.words[i / WORD] &= !(1u64 << (i % WORD));
        }
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / WORD] & (1u64 << (i % WORD)) != 0
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &SampleSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &SampleSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn intersect_with(&mut self, other: &SampleSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn union_with(&mut self, other: &SampleSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &SampleSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersection(&self, other: &SampleSet) -> SampleSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn union(&self, other: &SampleSet) -> SampleSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn difference(&self, other: &SampleSet) -> SampleSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    /// `|self ∩ other|`
    #[inline]
    pub fn count_and(&self, other: &SampleSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self ∪ other|`
    #[inline]
    pub fn count_or(&self, other: &SampleSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// `|(self ∩ other) ∪ extra|`
    #[inline]
    pub fn count_and_or(&self, other: &SampleSet, extra: &SampleSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .zip(&extra.words)
            .map(|((a, b), c)| ((a & b) | c).count_ones() as usize)
            .sum()
    }

    /// `|(self ∩ other) \ excluded|`
    #[inline]
    pub fn count_and_not(&self, other: &SampleSet, excluded: &SampleSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .zip(&excluded.words)
            .map(|((a, b), c)| (a & b & !c).count_ones() as usize)
            .sum()
    }

    /// `|(self ∩ a ∩ b) ∪ extra|`
    #[inline]
    pub fn count_and3_or(&self, a: &SampleSet, b: &SampleSet, extra: &SampleSet) -> usize {
        self.words
            .iter()
            .zip(&a.words)
            .zip(&b.words)
            .zip(&extra.words)
            .map(|(((x, y), z), e)| ((x & y & z) | e).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * WORD + t)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for SampleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn full_respects_universe() {
        for n in [0, 1, 63, 64, 65, 130] {
            let s = SampleSet::full(n);
            assert_eq!(s.count(), n);
            assert_eq!(s.to_vec(), (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn insert_remove_contains() {
        let mut s = SampleSet::empty(100);
        s.insert(3);
        s.insert(99);
        assert!(s.contains(3) && s.contains(99) && !s.contains(4));
        s.remove(3);
        assert_eq!(s.to_vec(), vec![99]);
        assert!(!s.contains(1000));
    }

    fn arb_pair() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>, Vec<usize>)> {
        (1usize..200).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(0..n, 0..n),
                proptest::collection::vec(0..n, 0..n),
                proptest::collection::vec(0..n, 0..n),
            )
        })
    }

    proptest! {
        #[test]
        fn fused_counts_match_btreeset((n, a, b, c) in arb_pair()) {
            let (sa, sb, sc) = (
                SampleSet::from_indices(n, a.iter().copied()),
                SampleSet::from_indices(n, b.iter().copied()),
                SampleSet::from_indices(n, c.iter().copied()),
            );
            let (ta, tb, tc): (BTreeSet<_>, BTreeSet<_>, BTreeSet<_>) = (
                a.into_iter().collect(),
                b.into_iter().collect(),
                c.into_iter().collect(),
            );
            let and: BTreeSet<_> = ta.intersection(&tb).copied().collect();
            prop_assert_eq!(sa.count_and(&sb), and.len());
            prop_assert_eq!(sa.count_or(&sb), ta.union(&tb).count());
            prop_assert_eq!(sa.count_and_or(&sb, &sc), and.union(&tc).count());
            prop_assert_eq!(sa.count_and_not(&sb, &sc), and.difference(&tc).count());
            prop_assert_eq!(
                sa.count_and3_or(&sb, &sc, &SampleSet::empty(n)),
                and.intersection(&tc).count()
            );
            prop_assert_eq!(sa.intersection(&sb).to_vec(), and.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference(&sb).to_vec(), ta.difference(&tb).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.intersection(&sb).is_subset(&sa), true);
        }
    }
}
