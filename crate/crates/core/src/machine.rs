//! The generic abstract machine: species insertion with just-in-time
//! reaction discovery, species removal, the firing rule and the sampling
//! loop.

use std::collections::HashSet;

use crate::algorithm::Algorithm;
use crate::calculus::Calculus;
use crate::error::{ModelError, SimError};
use crate::reaction::Reaction;
use crate::species::{SpeciesKey, SpeciesMap};
use crate::term::{ReactionId, Term};
use crate::trace::{Trace, TraceRecord};

/// Outcome of a single application of the firing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Fired { reaction: ReactionId, time: f64 },
    /// No reaction can fire; the term is unchanged.
    Deadlock,
}

/// Sampling parameters for [`Machine::run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub t_max: f64,
    pub sample_interval: f64,
    /// Audit the term after every firing and abort on the first violation.
    pub validate: bool,
}

impl RunSpec {
    pub fn new(t_max: f64, sample_interval: f64) -> Self {
        Self {
            t_max,
            sample_interval,
            validate: false,
        }
    }

    pub fn validated(mut self) -> Self {
        self.validate = true;
        self
    }

    /// Grid points `t0 + k * sample_interval` that fall in `[t0, t_max]`.
    pub fn grid(&self, t0: f64) -> Result<Vec<f64>, SimError> {
        let dt = self.sample_interval;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SimError::InvalidRun(format!(
                "sample interval must be positive and finite, got {dt}"
            )));
        }
        if !(self.t_max.is_finite() && self.t_max > t0) {
            return Err(SimError::InvalidRun(format!(
                "t_max must be finite and greater than the start time {t0}, got {}",
                self.t_max
            )));
        }
        // Tolerance absorbs representation error when t_max is a multiple of dt.
        let steps = ((self.t_max - t0) / dt + 1e-9).floor() as usize;
        Ok((0..=steps).map(|k| t0 + k as f64 * dt).collect())
    }
}

/// Result of [`Machine::run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Trace,
    /// Clock value at which the run deadlocked, if it did.
    pub deadlock: Option<f64>,
    pub steps: u64,
}

/// A machine term together with the calculus and algorithm driving it.
pub struct Machine<C, A: Algorithm> {
    calculus: C,
    algorithm: A,
    term: Term<A::Activity>,
}

impl<C: Calculus, A: Algorithm> Machine<C, A> {
    /// Empty machine with the clock at zero.
    pub fn new(calculus: C, algorithm: A) -> Self {
        Self::starting_at(calculus, algorithm, 0.0)
    }

    pub fn starting_at(calculus: C, algorithm: A, time: f64) -> Self {
        Self {
            calculus,
            algorithm,
            term: Term::at_time(time),
        }
    }

    pub fn term(&self) -> &Term<A::Activity> {
        &self.term
    }

    pub fn term_mut(&mut self) -> &mut Term<A::Activity> {
        &mut self.term
    }

    pub fn calculus(&self) -> &C {
        &self.calculus
    }

    pub fn algorithm(&self) -> &A {
        &self.algorithm
    }

    pub fn time(&self) -> f64 {
        self.term.time
    }

    /// Adds every species of `process`, one copy at a time.
    pub fn add_process(&mut self, process: &C::Process) -> Result<(), SimError> {
        let species = self.calculus.species(process)?;
        for key in species.occurrences() {
            self.add_species(key.clone())?;
        }
        Ok(())
    }

    /// Adds one copy of `species`. A species seen for the first time gets its
    /// reactions discovered against everything already present; otherwise
    /// only the affected activities are refreshed.
    pub fn add_species(&mut self, species: SpeciesKey) -> Result<(), SimError> {
        match self.term.species.get(&species) {
            Some(population) => {
                self.term.species.set(species.clone(), population + 1);
                self.apply_updates(&species);
            }
            None => {
                let discovered = self.calculus.reactions(&species, &self.term.species)?;
                self.term.species.set(species.clone(), 1);
                let fresh = self.check_discovered(&species, discovered)?;
                let first_id = self.term.reactions.len();
                let activities = self.algorithm.init(first_id, &fresh, &self.term);
                debug_assert_eq!(activities.len(), fresh.len());
                for (reaction, activity) in fresh.into_iter().zip(activities) {
                    self.term.reactions.push(reaction, activity);
                }
            }
        }
        Ok(())
    }

    /// Removes one copy of `species`. The key stays in the species map even
    /// when its population reaches zero.
    pub fn remove_species(&mut self, species: &SpeciesKey) -> Result<(), SimError> {
        match self.term.species.get(species) {
            Some(population) if population >= 1 => {
                self.term.species.set(species.clone(), population - 1);
                self.apply_updates(species);
                Ok(())
            }
            _ => Err(SimError::EmptyPopulation(species.to_string())),
        }
    }

    /// Asks the algorithm for the next reaction without firing it.
    pub fn propose(&mut self) -> Option<(ReactionId, f64)> {
        self.algorithm.next(&self.term)
    }

    /// Fires `reaction` at absolute time `time`: clock first, then reactants
    /// removed, then products added.
    pub fn fire(&mut self, reaction: ReactionId, time: f64) -> Result<(), SimError> {
        if time < self.term.time || time.is_nan() {
            return Err(SimError::InvalidRun(format!(
                "firing time {time} precedes the clock {}",
                self.term.time
            )));
        }
        let fired = self.term.reactions.reaction(reaction).clone();
        self.term.time = time;
        for key in fired.reactants().occurrences() {
            self.remove_species(key)?;
        }
        for key in fired.products().occurrences() {
            self.add_species(key.clone())?;
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<Step, SimError> {
        match self.propose() {
            None => Ok(Step::Deadlock),
            Some((reaction, time)) => {
                self.fire(reaction, time)?;
                Ok(Step::Fired { reaction, time })
            }
        }
    }

    /// Simulates until deadlock or until the next firing would pass
    /// `spec.t_max`, sampling the populations on the regular grid. Each grid
    /// point sees the latest state whose clock does not exceed it.
    pub fn run(&mut self, spec: &RunSpec) -> Result<RunOutcome, SimError> {
        let grid = spec.grid(self.term.time)?;
        let mut records = Vec::with_capacity(grid.len());
        let mut pending = grid.iter().copied().peekable();
        let mut steps = 0;
        let mut deadlock = None;

        loop {
            let Some((reaction, time)) = self.propose() else {
                deadlock = Some(self.term.time);
                break;
            };
            while let Some(t) = pending.next_if(|&t| t < time) {
                records.push(self.snapshot(t));
            }
            if time > spec.t_max || pending.peek().is_none() {
                break;
            }
            self.fire(reaction, time)?;
            steps += 1;
            if spec.validate {
                let violations = self.validate();
                if !violations.is_empty() {
                    return Err(SimError::Validation {
                        time: self.term.time,
                        violations,
                    });
                }
            }
        }
        for t in pending {
            records.push(self.snapshot(t));
        }

        Ok(RunOutcome {
            trace: Trace {
                species: self.term.species.keys().cloned().collect(),
                records,
            },
            deadlock,
            steps,
        })
    }

    /// Checks the term against a from-scratch reconstruction: species
    /// domain covers every reactant, the reaction map is exactly what
    /// replaying species insertion yields, and the algorithm's activities
    /// match a recomputation.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let term = &self.term;
        if !(term.time.is_finite() && term.time >= 0.0) {
            violations.push(format!("clock is {}", term.time));
        }
        for (_, reaction, _) in term.reactions.iter() {
            for (key, _) in reaction.reactants().iter() {
                if !term.species.contains(key) {
                    violations.push(format!("reactant `{key}` of `{reaction}` is not in the species map"));
                }
            }
        }

        let mut replayed = SpeciesMap::new();
        let mut expected = HashSet::new();
        for (key, population) in term.species.iter() {
            match self.calculus.reactions(key, &replayed) {
                Ok(found) => expected.extend(found),
                Err(e) => violations.push(format!("replaying `{key}` failed: {e}")),
            }
            replayed.set(key.clone(), population);
        }
        for reaction in term.reactions.reactions() {
            if !expected.contains(reaction) {
                violations.push(format!("reaction `{reaction}` is in the term but not derivable"));
            }
        }
        let mut missing: Vec<_> = expected
            .iter()
            .filter(|r| !term.reactions.contains(r))
            .map(|r| format!("reaction `{r}` is derivable but missing from the term"))
            .collect();
        missing.sort();
        violations.extend(missing);

        violations.extend(self.algorithm.audit(term));
        violations
    }

    fn snapshot(&self, time: f64) -> TraceRecord {
        TraceRecord {
            time,
            populations: self.term.species.iter().map(|(_, n)| n).collect(),
        }
    }

    fn apply_updates(&mut self, species: &SpeciesKey) {
        for (id, activity) in self.algorithm.updates(species, &self.term) {
            self.term.reactions.set_activity(id, activity);
        }
    }

    /// Enforces the discovery contract and drops duplicates, keeping the
    /// first occurrence.
    fn check_discovered(
        &self,
        species: &SpeciesKey,
        discovered: Vec<Reaction>,
    ) -> Result<Vec<Reaction>, ModelError> {
        let mut seen = HashSet::new();
        let mut fresh = Vec::with_capacity(discovered.len());
        for reaction in discovered {
            if !reaction.has_reactant(species) {
                return Err(ModelError::InvalidReaction(format!(
                    "`{reaction}` was discovered for `{species}` but does not consume it"
                )));
            }
            if let Some((key, _)) = reaction
                .reactants()
                .iter()
                .find(|(k, _)| !self.term.species.contains(k))
            {
                return Err(ModelError::InvalidReaction(format!(
                    "`{reaction}` was discovered for `{species}` but reactant `{key}` is absent"
                )));
            }
            // A new species cannot occur in any existing reaction's reactants.
            assert!(
                !self.term.reactions.contains(&reaction),
                "reaction `{reaction}` rediscovered for new species `{species}`"
            );
            if seen.insert(reaction.clone()) {
                fresh.push(reaction);
            }
        }
        Ok(fresh)
    }
}
