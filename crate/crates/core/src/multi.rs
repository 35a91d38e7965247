//! Several calculi in one simulation.
//!
//! Every species carries the tag of the calculus it belongs to and prints as
//! `tag::inner`. Discovery for a tagged species is delegated to its own
//! calculus, which only sees the species of the same tag, and is completed by
//! a fixed table of bridge reactions spanning several calculi.
//!
//! Model files list the calculi and the bridge rows:
//!
//! ```text
//! [calculus crn dna.crn]
//! [calculus spi cell.spi]
//! [bridge]
//! crn::DNA + spi::Pol() ->{0.05} spi::Pol() + spi::Prot()
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;

use crate::calculus::{Calculus, ReactionSource};
use crate::crn::{is_identifier, parse_reaction, statements, Statement};
use crate::error::ModelError;
use crate::reaction::Reaction;
use crate::species::{SpeciesKey, SpeciesMap, SpeciesMultiset};

pub const TAG_SEPARATOR: &str = "::";

pub fn tagged(tag: &str, inner: &SpeciesKey) -> SpeciesKey {
    SpeciesKey::new(format!("{tag}{TAG_SEPARATOR}{inner}"))
}

/// Splits `tag::inner`; `None` for untagged keys.
pub fn split_tag(species: &SpeciesKey) -> Option<(&str, SpeciesKey)> {
    species
        .as_str()
        .split_once(TAG_SEPARATOR)
        .map(|(tag, inner)| (tag, SpeciesKey::new(inner)))
}

/// Initial process of a multi-calculus model: per tag, the inner species.
pub type MultiProcess = Vec<(String, SpeciesMultiset)>;

#[derive(Default)]
pub struct MultiRuntime {
    calculi: IndexMap<String, Box<dyn ReactionSource>>,
    bridge: Vec<Reaction>,
    bridge_by_reactant: HashMap<SpeciesKey, Vec<usize>>,
}

impl fmt::Debug for MultiRuntime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiRuntime")
            .field("tags", &self.calculi.keys().collect::<Vec<_>>())
            .field("bridge", &self.bridge)
            .finish()
    }
}

impl MultiRuntime {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_calculus(
        &mut self,
        tag: &str,
        calculus: impl ReactionSource + 'static,
    ) -> Result<(), ModelError> {
        self.register_boxed(tag, Box::new(calculus))
    }

    pub fn register_boxed(
        &mut self,
        tag: &str,
        calculus: Box<dyn ReactionSource>,
    ) -> Result<(), ModelError> {
        if !is_identifier(tag) {
            return Err(ModelError::InvalidReaction(format!("invalid calculus tag `{tag}`")));
        }
        if self.calculi.contains_key(tag) {
            return Err(ModelError::DuplicateTag(tag.to_string()));
        }
        self.calculi.insert(tag.to_string(), calculus);
        Ok(())
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.calculi.keys().map(String::as_str)
    }

    pub fn bridge(&self) -> &[Reaction] {
        &self.bridge
    }

    /// Adds a cross-calculus reaction. Every species must carry a registered
    /// tag and at least two distinct tags must occur.
    pub fn add_bridge(&mut self, reaction: Reaction) -> Result<(), ModelError> {
        let mut tags = HashSet::new();
        for (k, _) in reaction.reactants().iter().chain(reaction.products().iter()) {
            let (tag, _) = split_tag(k).ok_or_else(|| ModelError::UnknownTag(k.to_string()))?;
            if !self.calculi.contains_key(tag) {
                return Err(ModelError::UnknownTag(tag.to_string()));
            }
            tags.insert(tag.to_string());
        }
        if tags.len() < 2 {
            return Err(ModelError::InvalidReaction(format!(
                "bridge reaction `{reaction}` must involve at least two calculi"
            )));
        }
        if self.bridge.contains(&reaction) {
            return Err(ModelError::InvalidReaction(format!("duplicate bridge reaction `{reaction}`")));
        }
        let index = self.bridge.len();
        for (k, _) in reaction.reactants().iter() {
            self.bridge_by_reactant.entry(k.clone()).or_default().push(index);
        }
        self.bridge.push(reaction);
        Ok(())
    }

    /// Reactions for a newly seen tagged species: its own calculus' reactions
    /// against the same-tag subset of `existing`, re-tagged, followed by the
    /// bridge rows whose last missing reactant it is.
    pub fn dispatch_reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError> {
        let (tag, inner) =
            split_tag(species).ok_or_else(|| ModelError::UnknownTag(species.to_string()))?;
        let calculus = self
            .calculi
            .get(tag)
            .ok_or_else(|| ModelError::UnknownTag(tag.to_string()))?;
        let local = existing.filter_map_keys(|k| match split_tag(k) {
            Some((t, inner)) if t == tag => Some(inner),
            _ => None,
        });
        let mut out: Vec<Reaction> = calculus
            .reactions(&inner, &local)?
            .into_iter()
            .map(|r| r.map_species(|k| tagged(tag, k)))
            .collect();
        if let Some(rows) = self.bridge_by_reactant.get(species) {
            out.extend(
                rows.iter()
                    .map(|&i| &self.bridge[i])
                    .filter(|r| {
                        r.reactants()
                            .iter()
                            .all(|(k, _)| k == species || existing.contains(k))
                    })
                    .cloned(),
            );
        }
        Ok(out)
    }

    /// Parses a multi-model file. `load` resolves a `[calculus kind file]`
    /// section into a calculus and its initial inner species.
    pub fn parse(
        text: &str,
        mut load: impl FnMut(&str, &str) -> Result<(Box<dyn ReactionSource>, SpeciesMultiset), ModelError>,
    ) -> Result<(MultiRuntime, MultiProcess), ModelError> {
        let mut runtime = MultiRuntime::new();
        let mut process = MultiProcess::new();
        let mut in_bridge = false;
        for statement in statements(text) {
            let line = statement.text;
            if let Some(header) = line.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| statement.error(0, "unterminated section header"))?;
                let words: Vec<&str> = header.split_whitespace().collect();
                match words.as_slice() {
                    ["bridge"] => in_bridge = true,
                    ["calculus", kind, path] => {
                        in_bridge = false;
                        let (calculus, initial) = load(kind, path)?;
                        runtime
                            .register_boxed(kind, calculus)
                            .map_err(|e| ModelError::semantic(statement.line, statement.column, e.to_string()))?;
                        process.push((kind.to_string(), initial));
                    }
                    _ => {
                        return Err(statement.error(
                            0,
                            format!("unknown section `[{header}]`; expected `[calculus <kind> <file>]` or `[bridge]`"),
                        ))
                    }
                }
            } else if in_bridge {
                if !line.contains("->") {
                    return Err(statement.error(0, "expected a bridge reaction"));
                }
                let reaction = parse_reaction(&statement, &mut |name, column| {
                    runtime.parse_tagged(name, &statement, column)
                })?;
                runtime
                    .add_bridge(reaction)
                    .map_err(|e| ModelError::semantic(statement.line, statement.column, e.to_string()))?;
            } else {
                return Err(statement.error(0, "content outside of a `[bridge]` section"));
            }
        }
        Ok((runtime, process))
    }

    fn parse_tagged(
        &self,
        text: &str,
        statement: &Statement<'_>,
        column: usize,
    ) -> Result<SpeciesKey, ModelError> {
        Calculus::parse_species(self, text).map_err(|e| match e {
            ModelError::Syntax { .. } | ModelError::Semantic { .. } => e,
            other => statement.error(column, other.to_string()),
        })
    }
}

impl Calculus for MultiRuntime {
    type Process = MultiProcess;

    fn species(&self, process: &MultiProcess) -> Result<SpeciesMultiset, ModelError> {
        let mut out = SpeciesMultiset::new();
        for (tag, inner) in process {
            if !self.calculi.contains_key(tag) {
                return Err(ModelError::UnknownTag(tag.clone()));
            }
            out = out.union(&inner.map_species(|k| tagged(tag, k)));
        }
        Ok(out)
    }

    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError> {
        self.dispatch_reactions(species, existing)
    }

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError> {
        let text = text.trim();
        let (tag, inner) = text
            .split_once(TAG_SEPARATOR)
            .ok_or_else(|| ModelError::UnknownTag(format!("untagged species `{text}`")))?;
        let calculus = self
            .calculi
            .get(tag)
            .ok_or_else(|| ModelError::UnknownTag(tag.to_string()))?;
        Ok(tagged(tag, &calculus.parse_species(inner)?))
    }
}
