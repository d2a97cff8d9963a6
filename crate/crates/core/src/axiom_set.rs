//! Compact sets of axiom ids.
//!
//! Justifications, tableau dependency sets and hitting-set-tree paths are all
//! small sets of dense integers, so they share one bitset representation.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::AxiomId;

/// A set of axiom ids backed by a growable bitset.
///
/// Equality ignores trailing zero words, so sets built with different
/// capacities compare equal when they hold the same ids.
#[derive(Clone, Default)]
pub struct AxiomSet {
    words: Vec<u64>,
}

impl AxiomSet {
    pub fn new() -> Self {
        AxiomSet { words: Vec::new() }
    }

    pub fn singleton(id: AxiomId) -> Self {
        let mut s = AxiomSet::new();
        s.insert(id);
        s
    }

    /// Set containing every id in `0..n`.
    pub fn full(n: usize) -> Self {
        let mut s = AxiomSet::new();
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, id: AxiomId) -> bool {
        let (w, b) = (id / 64, id % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, id: AxiomId) -> bool {
        let (w, b) = (id / 64, id % 64);
        match self.words.get_mut(w) {
            Some(word) => {
                let had = *word & (1 << b) != 0;
                *word &= !(1 << b);
                had
            }
            None => false,
        }
    }

    pub fn contains(&self, id: AxiomId) -> bool {
        let (w, b) = (id / 64, id % 64);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &AxiomSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn union(&self, other: &AxiomSet) -> AxiomSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &AxiomSet) -> AxiomSet {
        AxiomSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &AxiomSet) -> AxiomSet {
        AxiomSet {
            words: self
                .words
                .iter()
                .enumerate()
                .map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0))
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &AxiomSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn is_disjoint(&self, other: &AxiomSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Ids in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = AxiomId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<AxiomId> {
        self.iter().collect()
    }

    fn trimmed(&self) -> &[u64] {
        let end = self
            .words
            .iter()
            .rposition(|&w| w != 0)
            .map_or(0, |p| p + 1);
        &self.words[..end]
    }
}

impl PartialEq for AxiomSet {
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl Eq for AxiomSet {}

impl std::hash::Hash for AxiomSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.trimmed().hash(state);
    }
}

/// Orders by cardinality, then lexicographically on the sorted ids.
impl Ord for AxiomSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for AxiomSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<AxiomId> for AxiomSet {
    fn from_iter<I: IntoIterator<Item = AxiomId>>(iter: I) -> Self {
        let mut s = AxiomSet::new();
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl fmt::Debug for AxiomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for AxiomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for AxiomSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Keeps only the subset-minimal members of `sets`, sorted and deduplicated.
pub fn minimize(mut sets: Vec<AxiomSet>) -> Vec<AxiomSet> {
    sets.sort();
    sets.dedup();
    let mut out: Vec<AxiomSet> = Vec::with_capacity(sets.len());
    // Sorted by cardinality, so a later set can never be a subset of an earlier one.
    for s in sets {
        if !out.iter().any(|kept| kept.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}
