//! The calculus plugin contract.

use std::sync::Arc;

use crate::error::ModelError;
use crate::reaction::Reaction;
use crate::species::{SpeciesKey, SpeciesMap, SpeciesMultiset};

/// A process calculus as seen by the machine: a way to turn processes into
/// species, and a way to discover the reactions a new species takes part in.
pub trait Calculus {
    /// Process expressions of this calculus.
    type Process;

    /// Flattens a process into the multiset of species it denotes.
    fn species(&self, process: &Self::Process) -> Result<SpeciesMultiset, ModelError>;

    /// Reactions between a species entering the machine for the first time
    /// and the species already present.
    ///
    /// `species` is never a key of `existing`. Every returned reaction has
    /// `species` among its reactants (unary and self-binding reactions of
    /// `species` included) and all other reactants in `existing`. Output must
    /// be a deterministic function of the arguments.
    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError>;

    /// Parses and canonicalises a species written in this calculus' surface
    /// syntax.
    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError>;
}

impl<C: Calculus + ?Sized> Calculus for &C {
    type Process = C::Process;

    fn species(&self, process: &Self::Process) -> Result<SpeciesMultiset, ModelError> {
        (**self).species(process)
    }

    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError> {
        (**self).reactions(species, existing)
    }

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError> {
        (**self).parse_species(text)
    }
}

impl<C: Calculus + ?Sized> Calculus for Arc<C> {
    type Process = C::Process;

    fn species(&self, process: &Self::Process) -> Result<SpeciesMultiset, ModelError> {
        (**self).species(process)
    }

    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError> {
        (**self).reactions(species, existing)
    }

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError> {
        (**self).parse_species(text)
    }
}

/// Object-safe part of [`Calculus`], used where calculi with different
/// process types must sit side by side.
pub trait ReactionSource: Send + Sync {
    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError>;

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError>;
}

impl<C> ReactionSource for C
where
    C: Calculus + Send + Sync,
{
    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError> {
        Calculus::reactions(self, species, existing)
    }

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError> {
        Calculus::parse_species(self, text)
    }
}
