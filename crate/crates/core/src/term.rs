//! The machine term: clock, species populations and reaction activities.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::reaction::Reaction;
use crate::species::{SpeciesKey, SpeciesMap};

/// Position of a reaction in its [`ReactionMap`]. Ids follow insertion order
/// and are stable for the lifetime of the term.
pub type ReactionId = usize;

/// Reactions keyed structurally, each carrying an algorithm-owned activity.
///
/// Entries are never removed, so insertion order doubles as the fixed
/// reaction ordering used for selection and tie-breaking.
#[derive(Clone, Debug)]
pub struct ReactionMap<A> {
    entries: IndexMap<Reaction, A>,
    by_reactant: HashMap<SpeciesKey, Vec<ReactionId>>,
}

impl<A> Default for ReactionMap<A> {
    fn default() -> Self {
        Self {
            entries: IndexMap::new(),
            by_reactant: HashMap::new(),
        }
    }
}

impl<A> ReactionMap<A> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, reaction: &Reaction) -> bool {
        self.entries.contains_key(reaction)
    }

    pub fn id_of(&self, reaction: &Reaction) -> Option<ReactionId> {
        self.entries.get_index_of(reaction)
    }

    pub fn reaction(&self, id: ReactionId) -> &Reaction {
        self.entries.get_index(id).expect("reaction id out of range").0
    }

    pub fn activity(&self, id: ReactionId) -> &A {
        self.entries.get_index(id).expect("reaction id out of range").1
    }

    /// Overwrites the activity of an existing reaction.
    pub fn set_activity(&mut self, id: ReactionId, activity: A) {
        *self.entries.get_index_mut(id).expect("reaction id out of range").1 = activity;
    }

    /// `(id, reaction, activity)` in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (ReactionId, &Reaction, &A)> {
        self.entries.iter().enumerate().map(|(i, (r, a))| (i, r, a))
    }

    pub fn reactions(&self) -> impl Iterator<Item = &Reaction> {
        self.entries.keys()
    }

    /// Ids of reactions that consume `species`, in insertion order.
    pub fn with_reactant(&self, species: &SpeciesKey) -> &[ReactionId] {
        self.by_reactant.get(species).map_or(&[], Vec::as_slice)
    }

    /// Appends a reaction that is not yet present.
    pub(crate) fn push(&mut self, reaction: Reaction, activity: A) -> ReactionId {
        let id = self.entries.len();
        for (species, _) in reaction.reactants().iter() {
            self.by_reactant.entry(species.clone()).or_default().push(id);
        }
        let (index, previous) = self.entries.insert_full(reaction, activity);
        debug_assert!(previous.is_none() && index == id);
        id
    }
}

/// Complete simulation state `(t, S, R)`.
#[derive(Clone, Debug)]
pub struct Term<A> {
    pub(crate) time: f64,
    pub(crate) species: SpeciesMap,
    pub(crate) reactions: ReactionMap<A>,
}

impl<A> Default for Term<A> {
    fn default() -> Self {
        Self::at_time(0.0)
    }
}

impl<A> Term<A> {
    pub fn at_time(time: f64) -> Self {
        Self {
            time,
            species: SpeciesMap::new(),
            reactions: ReactionMap::default(),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn species(&self) -> &SpeciesMap {
        &self.species
    }

    pub fn reactions(&self) -> &ReactionMap<A> {
        &self.reactions
    }

    /// Mutable access to activities, for fault injection in audits and tests.
    pub fn reactions_mut(&mut self) -> &mut ReactionMap<A> {
        &mut self.reactions
    }

    pub fn population(&self, species: &SpeciesKey) -> u64 {
        self.species.population(species)
    }
}
