//! Species identities, multisets of species and the population map.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

/// Canonical identifier of a species.
///
/// Each calculus decides the canonical printed form of its species; two keys
/// are equal exactly when those printed forms are byte-identical. The key is
/// reference counted so cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeciesKey(Arc<str>);

impl SpeciesKey {
    pub fn new(canonical: impl Into<Arc<str>>) -> Self {
        Self(canonical.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpeciesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for SpeciesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Borrow<str> for SpeciesKey {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for SpeciesKey {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for SpeciesKey {
    fn from(s: String) -> Self {
        Self::new(s)
    }
}

/// A finite multiset of species. Absent keys have multiplicity zero; stored
/// multiplicities are always at least one.
///
/// Iteration is in canonical key order, which makes equality and hashing
/// structural.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeciesMultiset(BTreeMap<SpeciesKey, u32>);

impl SpeciesMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, species: SpeciesKey) {
        self.insert_n(species, 1);
    }

    pub fn insert_n(&mut self, species: SpeciesKey, count: u32) {
        if count > 0 {
            *self.0.entry(species).or_insert(0) += count;
        }
    }

    /// Removes up to `count` copies; returns how many were actually removed.
    pub fn remove_n(&mut self, species: &SpeciesKey, count: u32) -> u32 {
        let Some(current) = self.0.get_mut(species) else {
            return 0;
        };
        let removed = count.min(*current);
        *current -= removed;
        if *current == 0 {
            self.0.remove(species);
        }
        removed
    }

    pub fn multiplicity(&self, species: &SpeciesKey) -> u32 {
        self.0.get(species).copied().unwrap_or(0)
    }

    pub fn contains(&self, species: &SpeciesKey) -> bool {
        self.0.contains_key(species)
    }

    /// Sum of multiplicities.
    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    /// Number of distinct species.
    pub fn distinct(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct species with their multiplicities, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&SpeciesKey, u32)> {
        self.0.iter().map(|(k, &n)| (k, n))
    }

    /// Every copy, one item per occurrence, in canonical order.
    pub fn occurrences(&self) -> impl Iterator<Item = &SpeciesKey> {
        self.0
            .iter()
            .flat_map(|(k, &n)| std::iter::repeat_n(k, n as usize))
    }

    pub fn union(&self, other: &SpeciesMultiset) -> SpeciesMultiset {
        let mut out = self.clone();
        for (k, n) in other.iter() {
            out.insert_n(k.clone(), n);
        }
        out
    }

    /// Multiset difference, truncated at zero.
    pub fn difference(&self, other: &SpeciesMultiset) -> SpeciesMultiset {
        let mut out = self.clone();
        for (k, n) in other.iter() {
            out.remove_n(k, n);
        }
        out
    }

    /// Applies `f` to every species, merging collisions.
    pub fn map_species(&self, mut f: impl FnMut(&SpeciesKey) -> SpeciesKey) -> SpeciesMultiset {
        let mut out = SpeciesMultiset::new();
        for (k, n) in self.iter() {
            out.insert_n(f(k), n);
        }
        out
    }
}

impl FromIterator<SpeciesKey> for SpeciesMultiset {
    fn from_iter<T: IntoIterator<Item = SpeciesKey>>(iter: T) -> Self {
        let mut out = SpeciesMultiset::new();
        for k in iter {
            out.insert(k);
        }
        out
    }
}

impl fmt::Display for SpeciesMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in self.occurrences() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SpeciesMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

/// Populations of every species the machine has seen, in first-insertion
/// order. Keys are never removed: a species whose population drops to zero
/// stays in the domain.
#[derive(Clone, Default, Debug, PartialEq, Eq)]
pub struct SpeciesMap(IndexMap<SpeciesKey, u64>);

impl SpeciesMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn population(&self, species: &SpeciesKey) -> u64 {
        self.0.get(species).copied().unwrap_or(0)
    }

    pub fn get(&self, species: &SpeciesKey) -> Option<u64> {
        self.0.get(species).copied()
    }

    pub fn contains(&self, species: &SpeciesKey) -> bool {
        self.0.contains_key(species)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Species in first-insertion order.
    pub fn keys(&self) -> impl Iterator<Item = &SpeciesKey> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SpeciesKey, u64)> {
        self.0.iter().map(|(k, &n)| (k, n))
    }

    pub fn index_of(&self, species: &SpeciesKey) -> Option<usize> {
        self.0.get_index_of(species)
    }

    /// Sets a population, appending the key if it is new.
    pub fn set(&mut self, species: SpeciesKey, population: u64) {
        self.0.insert(species, population);
    }

    /// Builds a map from `(species, population)` pairs, keeping first
    /// occurrence order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (SpeciesKey, u64)>) -> Self {
        Self(pairs.into_iter().collect())
    }

    /// Sub-map of the keys for which `select` returns a (possibly renamed) key.
    pub fn filter_map_keys(
        &self,
        mut select: impl FnMut(&SpeciesKey) -> Option<SpeciesKey>,
    ) -> SpeciesMap {
        SpeciesMap(
            self.0
                .iter()
                .filter_map(|(k, &n)| select(k).map(|k2| (k2, n)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ms(items: &[&str]) -> SpeciesMultiset {
        items.iter().map(|s| SpeciesKey::from(*s)).collect()
    }

    #[test]
    fn multiplicities_accumulate_and_vanish() {
        let mut m = ms(&["A", "A", "B"]);
        assert_eq!(m.multiplicity(&"A".into()), 2);
        assert_eq!(m.total(), 3);
        assert_eq!(m.remove_n(&"A".into(), 5), 2);
        assert!(!m.contains(&"A".into()));
        assert_eq!(m.distinct(), 1);
        assert_eq!(m.to_string(), "B");
    }

    #[test]
    fn zero_insert_is_ignored() {
        let mut m = SpeciesMultiset::new();
        m.insert_n("A".into(), 0);
        assert!(m.is_empty());
    }

    #[test]
    fn species_map_keeps_zero_population_keys() {
        let mut s = SpeciesMap::new();
        s.set("A".into(), 1);
        s.set("B".into(), 2);
        s.set("A".into(), 0);
        assert!(s.contains(&"A".into()));
        assert_eq!(s.keys().map(|k| k.as_str()).collect::<Vec<_>>(), ["A", "B"]);
    }

    fn arb_multiset() -> impl Strategy<Value = SpeciesMultiset> {
        prop::collection::vec((0..4usize, 1..4u32), 0..6).prop_map(|v| {
            let mut m = SpeciesMultiset::new();
            for (i, n) in v {
                m.insert_n(SpeciesKey::new(["A", "B", "C", "D"][i]), n);
            }
            m
        })
    }

    proptest! {
        #[test]
        fn union_then_difference_round_trips(a in arb_multiset(), b in arb_multiset()) {
            prop_assert_eq!(a.union(&b).difference(&b), a.clone());
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.union(&b).total(), a.total() + b.total());
            prop_assert!(a.union(&b).iter().all(|(_, n)| n >= 1));
        }
    }
}
