//! Next Reaction Method as a machine algorithm.
//!
//! Every reaction carries its propensity and an absolute putative firing
//! time kept in an indexed priority queue. When a propensity changes from
//! `a_old` to `a_new > 0` the remaining waiting time is rescaled by
//! `a_old / a_new`; the reaction that just fired, and reactions waking from
//! zero propensity, draw a fresh exponential time instead.

use crate::algorithm::{close_enough, exponential, Algorithm, StreamRng, UniformSource};
use crate::direct::{propensity, AUDIT_REL_TOL};
use crate::queue::IndexedMinHeap;
use crate::reaction::Reaction;
use crate::species::SpeciesKey;
use crate::term::{ReactionId, Term};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrmActivity {
    pub propensity: f64,
    /// Absolute putative firing time; infinite exactly when the propensity
    /// is zero.
    pub tau: f64,
}

/// Rescaled putative time after a propensity change at clock `now`.
pub fn rescale(now: f64, a_old: f64, a_new: f64, tau_old: f64) -> f64 {
    if a_new == 0.0 {
        f64::INFINITY
    } else if a_new == a_old {
        tau_old
    } else {
        now + (a_old / a_new) * (tau_old - now)
    }
}

#[derive(Debug, Clone)]
pub struct NextReactionMethod<U = StreamRng> {
    uniforms: U,
    queue: IndexedMinHeap,
    last_fired: Option<ReactionId>,
}

impl<U: UniformSource> NextReactionMethod<U> {
    pub fn new(uniforms: U) -> Self {
        Self {
            uniforms,
            queue: IndexedMinHeap::new(),
            last_fired: None,
        }
    }

    pub fn uniforms(&self) -> &U {
        &self.uniforms
    }

    pub fn queue(&self) -> &IndexedMinHeap {
        &self.queue
    }

    pub fn last_fired(&self) -> Option<ReactionId> {
        self.last_fired
    }

    fn fresh_tau(&mut self, now: f64, a: f64) -> f64 {
        if a > 0.0 {
            now + exponential(a, self.uniforms.open01())
        } else {
            f64::INFINITY
        }
    }
}

impl<U: UniformSource> Algorithm for NextReactionMethod<U> {
    type Activity = NrmActivity;

    fn init(
        &mut self,
        first_id: ReactionId,
        reactions: &[Reaction],
        term: &Term<NrmActivity>,
    ) -> Vec<NrmActivity> {
        let now = term.time();
        reactions
            .iter()
            .enumerate()
            .map(|(i, reaction)| {
                let a = propensity(reaction, term.species());
                let tau = self.fresh_tau(now, a);
                self.queue.push(first_id + i, tau);
                NrmActivity { propensity: a, tau }
            })
            .collect()
    }

    fn updates(
        &mut self,
        species: &SpeciesKey,
        term: &Term<NrmActivity>,
    ) -> Vec<(ReactionId, NrmActivity)> {
        let now = term.time();
        let reactions = term.reactions();
        let mut out = Vec::with_capacity(reactions.with_reactant(species).len());
        for &id in reactions.with_reactant(species) {
            let old = *reactions.activity(id);
            let a = propensity(reactions.reaction(id), term.species());
            let tau = if a > 0.0 && (self.last_fired == Some(id) || old.propensity == 0.0) {
                self.fresh_tau(now, a)
            } else {
                rescale(now, old.propensity, a, old.tau)
            };
            self.queue.update(id, tau);
            out.push((id, NrmActivity { propensity: a, tau }));
        }
        out
    }

    fn next(&mut self, _term: &Term<NrmActivity>) -> Option<(ReactionId, f64)> {
        self.last_fired = None;
        let (id, tau) = self.queue.peek()?;
        if tau.is_infinite() {
            return None;
        }
        self.last_fired = Some(id);
        Some((id, tau))
    }

    fn audit(&self, term: &Term<NrmActivity>) -> Vec<String> {
        let mut violations = Vec::new();
        let now = term.time();
        let reactions = term.reactions();
        if self.queue.len() != reactions.len() {
            violations.push(format!(
                "queue holds {} entries for {} reactions",
                self.queue.len(),
                reactions.len()
            ));
            return violations;
        }
        let mut scan_min: Option<(ReactionId, f64)> = None;
        for (id, reaction, activity) in reactions.iter() {
            let fresh = propensity(reaction, term.species());
            if !close_enough(activity.propensity, fresh, AUDIT_REL_TOL) {
                violations.push(format!(
                    "propensity of `{reaction}` is {}, recomputed {fresh}",
                    activity.propensity
                ));
            }
            if (activity.propensity == 0.0) != activity.tau.is_infinite() {
                violations.push(format!(
                    "`{reaction}` has propensity {} but putative time {}",
                    activity.propensity, activity.tau
                ));
            }
            if activity.tau < now {
                violations.push(format!(
                    "`{reaction}` has putative time {} before the clock {now}",
                    activity.tau
                ));
            }
            if self.queue.key(id).to_bits() != activity.tau.to_bits() {
                violations.push(format!(
                    "queue key {} of `{reaction}` differs from its activity {}",
                    self.queue.key(id),
                    activity.tau
                ));
            }
            if scan_min.is_none_or(|(_, t)| activity.tau < t) {
                scan_min = Some((id, activity.tau));
            }
        }
        if !self.queue.is_consistent() {
            violations.push("queue heap order is broken".to_string());
        }
        if self.queue.peek() != scan_min {
            violations.push(format!(
                "queue minimum {:?} differs from scanned minimum {scan_min:?}",
                self.queue.peek()
            ));
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

    #[test]
    fn init_draws_inverse_cdf_times() {
        let mut nrm = NextReactionMethod::new(PinnedUniforms::new([(-4.0f64).exp()]));
        let mut term: Term<NrmActivity> = Term::at_time(1.0);
        term.species.set("A".into(), 2);
        term.species.set("B".into(), 0);
        let acts = nrm.init(0, &[rxn(&["A"], 1.0), rxn(&["B"], 1.0)], &term);
        assert_eq!(acts[0].propensity, 2.0);
        assert!((acts[0].tau - 3.0).abs() < 1e-15);
        assert_eq!(acts[1].propensity, 0.0);
        assert!(acts[1].tau.is_infinite());
        assert!(nrm.init(2, &[], &term).is_empty());
    }

    #[test]
    fn rescaling_rule() {
        assert_eq!(rescale(1.0, 4.0, 2.0, 2.0), 3.0);
        assert!(rescale(1.0, 4.0, 0.0, 2.0).is_infinite());
        assert_eq!(rescale(1.0, 4.0, 4.0, 2.7), 2.7);
    }

    #[test]
    fn sequential_rescalings_compose() {
        let now = 0.75;
        let tau = 4.125;
        for &(a0, a1, a2) in &[(4.0, 2.0, 8.0), (3.0, 7.0, 1.5), (1.0, 0.25, 9.0), (6.0, 6.0, 2.0)] {
            let two_step = rescale(now, a1, a2, rescale(now, a0, a1, tau));
            let one_step = rescale(now, a0, a2, tau);
            assert!(
                (two_step - one_step).abs() <= 1e-12 * one_step.abs(),
                "{a0}->{a1}->{a2}: {two_step} vs {one_step}"
            );
        }
    }

    #[test]
    fn next_picks_minimum_with_index_tiebreak() {
        let mut nrm = NextReactionMethod::new(PinnedUniforms::default());
        let term: Term<NrmActivity> = Term::at_time(0.0);
        nrm.queue.push(0, 5.0);
        nrm.queue.push(1, 3.2);
        assert_eq!(nrm.next(&term), Some((1, 3.2)));
        assert_eq!(nrm.last_fired(), Some(1));
        nrm.queue.update(0, 3.2);
        assert_eq!(nrm.next(&term), Some((0, 3.2)));
        nrm.queue.update(0, f64::INFINITY);
        nrm.queue.update(1, f64::INFINITY);
        assert_eq!(nrm.next(&term), None);
        assert_eq!(nrm.last_fired(), None);
    }
}
