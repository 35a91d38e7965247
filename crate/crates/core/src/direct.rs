//! Gillespie's Direct Method as a machine algorithm.
//!
//! Each reaction's activity is its propensity. `next` sums the propensities,
//! draws an exponential waiting time from the total and picks a reaction by a
//! linear cumulative scan in insertion order.

use crate::algorithm::{close_enough, exponential, Algorithm, StreamRng, UniformSource};
use crate::reaction::Reaction;
use crate::species::{SpeciesKey, SpeciesMap};
use crate::term::{ReactionId, Term};

/// Relative tolerance for comparing maintained and recomputed propensities.
pub const AUDIT_REL_TOL: f64 = 1e-12;

/// Mass-action propensity: `r*n` for `A`, `r*n*(n-1)/2` for `A + A`,
/// `r*n*m` for `A + B`. Species missing from `species` count as zero.
pub fn propensity(reaction: &Reaction, species: &SpeciesMap) -> f64 {
    let rate = reaction.rate();
    let mut reactants = reaction.reactants().iter();
    match (reactants.next(), reactants.next()) {
        (Some((a, 1)), None) => rate * species.population(a) as f64,
        (Some((a, 2)), None) => {
            let n = species.population(a) as f64;
            rate * n * (n - 1.0).max(0.0) / 2.0
        }
        (Some((a, 1)), Some((b, 1))) => {
            rate * species.population(a) as f64 * species.population(b) as f64
        }
        _ => panic!("reaction `{reaction}` is neither unary nor binary"),
    }
}

/// One selection made by the Direct Method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextSelection {
    pub total: f64,
    pub index: usize,
    pub waiting_time: f64,
}

/// Selects an index with probability proportional to `propensities`, given the
/// two uniform draws. Returns `None` when the total is zero.
///
/// The chosen index `mu` satisfies
/// `sum(a[..mu]) < n2 * total <= sum(a[..=mu])`, and a zero entry is never
/// chosen.
pub fn select(propensities: &[f64], n1: f64, n2: f64) -> Option<NextSelection> {
    let total: f64 = propensities.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let target = n2 * total;
    let mut cumulative = 0.0;
    let mut last_positive = None;
    for (i, &a) in propensities.iter().enumerate() {
        if a <= 0.0 {
            continue;
        }
        cumulative += a;
        last_positive = Some(i);
        if target <= cumulative {
            break;
        }
    }
    // Rounding can leave the target just above the final partial sum.
    let index = last_positive?;
    Some(NextSelection {
        total,
        index,
        waiting_time: exponential(total, n1),
    })
}

/// Direct Method state: only its random stream.
#[derive(Debug, Clone)]
pub struct DirectMethod<U = StreamRng> {
    uniforms: U,
    scratch: Vec<f64>,
}

impl<U: UniformSource> DirectMethod<U> {
    pub fn new(uniforms: U) -> Self {
        Self {
            uniforms,
            scratch: Vec::new(),
        }
    }

    pub fn uniforms(&self) -> &U {
        &self.uniforms
    }
}

impl<U: UniformSource> Algorithm for DirectMethod<U> {
    type Activity = f64;

    fn init(&mut self, _first_id: ReactionId, reactions: &[Reaction], term: &Term<f64>) -> Vec<f64> {
        reactions
            .iter()
            .map(|r| propensity(r, term.species()))
            .collect()
    }

    fn updates(&mut self, species: &SpeciesKey, term: &Term<f64>) -> Vec<(ReactionId, f64)> {
        let reactions = term.reactions();
        reactions
            .with_reactant(species)
            .iter()
            .map(|&id| (id, propensity(reactions.reaction(id), term.species())))
            .collect()
    }

    fn next(&mut self, term: &Term<f64>) -> Option<(ReactionId, f64)> {
        self.scratch.clear();
        self.scratch
            .extend(term.reactions().iter().map(|(_, _, &a)| a));
        let total: f64 = self.scratch.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let n1 = self.uniforms.open01();
        let n2 = self.uniforms.open01();
        let selection = select(&self.scratch, n1, n2)?;
        Some((selection.index, term.time() + selection.waiting_time))
    }

    fn audit(&self, term: &Term<f64>) -> Vec<String> {
        let mut violations = Vec::new();
        for (_, reaction, &stored) in term.reactions().iter() {
            let fresh = propensity(reaction, term.species());
            if !(stored >= 0.0 && close_enough(stored, fresh, AUDIT_REL_TOL)) {
                violations.push(format!(
                    "propensity of `{reaction}` is {stored}, recomputed {fresh}"
                ));
            }
        }
        violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::PinnedUniforms;
    use crate::species::SpeciesMultiset;

    fn rxn(reactants: &[&str], rate: f64) -> Reaction {
        let r: SpeciesMultiset = reactants.iter().map(|s| SpeciesKey::from(*s)).collect();
        Reaction::new(r, rate, SpeciesMultiset::new()).unwrap()
    }

    fn pops(pairs: &[(&str, u64)]) -> SpeciesMap {
        SpeciesMap::from_pairs(pairs.iter().map(|&(k, n)| (k.into(), n)))
    }

    #[test]
    fn propensity_cases() {
        assert_eq!(propensity(&rxn(&["A"], 2.0), &pops(&[("A", 5)])), 10.0);
        assert_eq!(propensity(&rxn(&["A", "A"], 3.0), &pops(&[("A", 4)])), 18.0);
        assert_eq!(
            propensity(&rxn(&["A", "B"], 0.5), &pops(&[("A", 4), ("B", 6)])),
            12.0
        );
        assert_eq!(propensity(&rxn(&["A", "A"], 3.0), &pops(&[("A", 1)])), 0.0);
        assert_eq!(propensity(&rxn(&["A", "A"], 3.0), &pops(&[("A", 0)])), 0.0);
    }

    #[test]
    fn selection_with_pinned_draws() {
        let e = std::f64::consts::E;
        let s = select(&[3.0, 1.0], 1.0 / e, 0.8).unwrap();
        assert_eq!(s.total, 4.0);
        assert_eq!(s.index, 1);
        assert!((s.waiting_time - 0.25).abs() < 1e-15);
        assert_eq!(select(&[3.0, 1.0], 0.5, 0.7).unwrap().index, 0);
        // Exactly on the boundary the lower index wins.
        assert_eq!(select(&[3.0, 1.0], 0.5, 0.75).unwrap().index, 0);
        assert_eq!(select(&[0.0, 2.0], 0.5, 0.999).unwrap().index, 1);
        assert_eq!(select(&[0.0, 0.0], 0.5, 0.5), None);
        assert_eq!(select(&[], 0.5, 0.5), None);
    }

    #[test]
    fn zero_entries_are_never_selected() {
        for k in 1..100 {
            let n2 = k as f64 / 100.0;
            let s = select(&[0.0, 1.5, 0.0, 2.5, 0.0], 0.5, n2).unwrap();
            assert!(s.index == 1 || s.index == 3);
        }
    }

    #[test]
    fn next_consumes_two_draws() {
        let mut dm = DirectMethod::new(PinnedUniforms::new([0.5, 0.5, 0.25]));
        let mut term: Term<f64> = Term::at_time(1.0);
        term.species.set("A".into(), 2);
        term.reactions.push(rxn(&["A"], 1.0), 2.0);
        let (id, t) = dm.next(&term).unwrap();
        assert_eq!(id, 0);
        assert!((t - (1.0 + 2f64.ln() / 2.0)).abs() < 1e-15);
        assert_eq!(dm.uniforms().remaining(), 1);
    }
}
