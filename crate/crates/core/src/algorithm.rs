//! The simulation-algorithm plugin contract and the random streams that
//! algorithms draw from.

use std::collections::VecDeque;
use std::fmt;

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::reaction::Reaction;
use crate::species::SpeciesKey;
use crate::term::{ReactionId, Term};

/// A reaction-based stochastic simulation algorithm.
///
/// The machine owns the term and writes back whatever the algorithm returns;
/// the algorithm may keep private state (random stream, queues) confined to
/// one simulation instance.
pub trait Algorithm {
    /// Per-reaction datum from which the next reaction is chosen.
    type Activity: Clone + fmt::Debug;

    /// Activities for reactions about to enter the term. `reactions[i]` will
    /// receive id `first_id + i`; the term already carries the populations
    /// that include the newly inserted species.
    fn init(
        &mut self,
        first_id: ReactionId,
        reactions: &[Reaction],
        term: &Term<Self::Activity>,
    ) -> Vec<Self::Activity>;

    /// Fresh activities for the reactions in `term` that consume `species`,
    /// after its population changed.
    fn updates(
        &mut self,
        species: &SpeciesKey,
        term: &Term<Self::Activity>,
    ) -> Vec<(ReactionId, Self::Activity)>;

    /// The next reaction and its absolute firing time, or `None` when
    /// nothing can fire.
    fn next(&mut self, term: &Term<Self::Activity>) -> Option<(ReactionId, f64)>;

    /// Recomputes activities from scratch and reports every mismatch with the
    /// incrementally maintained ones.
    fn audit(&self, term: &Term<Self::Activity>) -> Vec<String>;
}

/// Source of uniform draws strictly inside `(0, 1)`.
pub trait UniformSource {
    fn open01(&mut self) -> f64;
}

/// The random stream used by the bundled algorithms.
pub type StreamRng = ChaCha8Rng;

/// Independent stream for run `run_index` of an ensemble seeded by `seed`.
pub fn stream(seed: u64, run_index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

impl UniformSource for ChaCha8Rng {
    fn open01(&mut self) -> f64 {
        Open01.sample(self)
    }
}

/// Replays a fixed sequence of draws; panics once exhausted. Handy for
/// hand-evaluated examples.
#[derive(Debug, Clone, Default)]
pub struct PinnedUniforms(VecDeque<f64>);

impl PinnedUniforms {
    pub fn new(draws: impl IntoIterator<Item = f64>) -> Self {
        let draws: VecDeque<f64> = draws.into_iter().collect();
        assert!(
            draws.iter().all(|&u| u > 0.0 && u < 1.0),
            "pinned draws must lie in (0, 1)"
        );
        Self(draws)
    }

    pub fn remaining(&self) -> usize {
        self.0.len()
    }
}

impl UniformSource for PinnedUniforms {
    fn open01(&mut self) -> f64 {
        self.0.pop_front().expect("pinned uniform draws exhausted")
    }
}

/// Exponential waiting time with the given rate, `ln(1/u) / rate`.
pub(crate) fn exponential(rate: f64, u: f64) -> f64 {
    (1.0 / u).ln() / rate
}

/// Relative comparison used by the activity audits.
pub(crate) fn close_enough(actual: f64, expected: f64, rel_tol: f64) -> bool {
    if actual == expected {
        return true;
    }
    let scale = actual.abs().max(expected.abs());
    (actual - expected).abs() <= rel_tol * scale
}
