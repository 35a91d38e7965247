mod common;

use std::collections::HashMap;

use common::{crn, key, ms, permutations, rxn};
use gsm::crn::CrnModel;
use gsm::{stream, Calculus, DirectMethod, Machine, ModelError, Reaction, SpeciesKey, SpeciesMap};
use proptest::prelude::*;

/// Feeds species one at a time, as the machine does, and counts how often
/// each reaction is emitted.
fn emissions<C: Calculus>(calculus: &C, order: &[SpeciesKey]) -> HashMap<Reaction, usize> {
    let mut existing = SpeciesMap::new();
    let mut counts = HashMap::new();
    for k in order {
        for r in calculus.reactions(k, &existing).unwrap() {
            *counts.entry(r).or_insert(0) += 1;
        }
        existing.set(k.clone(), 1);
    }
    counts
}

#[test]
fn reactions_examples() {
    let model = crn("A + B ->{1} C\nA ->{2} D\nB ->{3}");
    let empty = SpeciesMap::new();
    assert_eq!(model.reactions(&key("A"), &empty).unwrap(), vec![rxn(&["A"], 2.0, &["D"])]);
    let with_b = SpeciesMap::from_pairs([(key("B"), 1)]);
    assert_eq!(
        model.reactions(&key("A"), &with_b).unwrap(),
        vec![rxn(&["A", "B"], 1.0, &["C"]), rxn(&["A"], 2.0, &["D"])]
    );
    assert!(model.reactions(&key("C"), &with_b).unwrap().is_empty());
    let dimer = crn("A + A ->{1} B");
    assert_eq!(dimer.reactions(&key("A"), &empty).unwrap(), vec![rxn(&["A", "A"], 1.0, &["B"])]);
}

#[test]
fn every_reaction_is_emitted_exactly_once_in_every_order() {
    let model = crn(
        "A + B ->{1} C\nA ->{2}\nA + A ->{0.5} E\nB + C ->{1} D\nD ->{1} A\n\
         E + D ->{0.1} A + B\nC + E ->{3}\nB ->{1} B + B\nZ ->{1}",
    );
    let species: Vec<SpeciesKey> = ["A", "B", "C", "D", "E"].iter().map(|s| key(s)).collect();
    for size in 1..=species.len() {
        let subset = &species[..size];
        for order in permutations(subset) {
            let counts = emissions(&model, &order);
            for r in model.reaction_table() {
                let enabled = r.reactants().iter().all(|(k, _)| subset.contains(k));
                let got = counts.get(r).copied().unwrap_or(0);
                assert_eq!(got, usize::from(enabled), "{r} in order {order:?}");
            }
        }
    }
}

#[test]
fn machine_discovers_the_same_reactions_in_any_order() {
    let model = crn("A + B ->{1} C\nB + C ->{1} A\nC ->{2}\nA + A ->{1} B");
    let reference: Vec<Reaction> = {
        let mut m = Machine::new(&model, DirectMethod::new(stream(0, 0)));
        m.add_process(&ms(&["A", "B", "C"])).unwrap();
        let mut rs: Vec<_> = m.term().reactions().reactions().cloned().collect();
        rs.sort_by_key(|r| r.to_string());
        rs
    };
    assert_eq!(reference.len(), 4);
    for order in permutations(&["A", "B", "C"]) {
        let mut m = Machine::new(&model, DirectMethod::new(stream(0, 0)));
        for s in order {
            m.add_species(key(s)).unwrap();
        }
        let mut rs: Vec<_> = m.term().reactions().reactions().cloned().collect();
        rs.sort_by_key(|r| r.to_string());
        assert_eq!(rs, reference);
    }
}

#[test]
fn parse_accepts_comments_separators_and_repeated_init() {
    let model = crn("# header\nA + B ->{0.5} C  # trailing\nA ->{1}; init A 3\ninit A 2\n\ninit B 1");
    assert_eq!(model.reaction_table(), &[rxn(&["A", "B"], 0.5, &["C"]), rxn(&["A"], 1.0, &[])]);
    assert_eq!(model.initial().multiplicity(&key("A")), 5);
    assert_eq!(model.initial().multiplicity(&key("B")), 1);
}

fn error_text(text: &str) -> String {
    CrnModel::parse(text).unwrap_err().to_string()
}

#[test]
fn ternary_reactions_are_rejected_with_position() {
    let message = error_text("A ->{1}\nA + B + C ->{1} D");
    assert!(message.starts_with("2:1"), "{message}");
    assert!(message.contains("ternary"), "{message}");
    assert!(error_text("A + A + A ->{1}").contains("ternary"));
}

#[test]
fn malformed_input_is_rejected() {
    for bad in [
        "A ->{0} B",
        "A ->{-1} B",
        "A ->{x} B",
        "A -> B",
        "A ->{1 B",
        "->{1} B",
        "A + ->{1} B",
        "1A ->{1}",
        "A ->{1}\nA ->{1}",
        "init A",
        "init A -3",
        "init 3 A",
        "hello world",
    ] {
        assert!(CrnModel::parse(bad).is_err(), "accepted `{bad}`");
    }
    assert!(matches!(CrnModel::parse("A ->{1}\nA ->{1}"), Err(ModelError::Semantic { .. })));
}

#[test]
fn parse_species_validates_names() {
    let model = CrnModel::default();
    assert_eq!(model.parse_species(" A_1' ").unwrap(), key("A_1'"));
    assert!(model.parse_species("A B").is_err());
}

const NAMES: [&str; 5] = ["A", "B", "C", "Xy", "z_1"];

fn arb_reaction() -> impl Strategy<Value = Reaction> {
    let name = prop::sample::select(NAMES.to_vec());
    (
        prop::collection::vec(name.clone(), 1..=2),
        1u32..100_000,
        prop::collection::vec(name, 0..=3),
    )
        .prop_map(|(reactants, millis, products)| rxn(&reactants, millis as f64 / 1000.0, &products))
}

proptest! {
    #[test]
    fn print_parse_is_a_fixed_point(
        reactions in prop::collection::vec(arb_reaction(), 0..8),
        init in prop::collection::vec((prop::sample::select(NAMES.to_vec()), 1u32..50), 0..4),
    ) {
        let mut unique = Vec::new();
        for r in reactions {
            if !unique.contains(&r) {
                unique.push(r);
            }
        }
        let mut initial = gsm::SpeciesMultiset::new();
        for (name, n) in init {
            initial.insert_n(key(name), n);
        }
        let model = CrnModel::new(unique, initial).unwrap();
        let printed = model.to_string();
        let reparsed = CrnModel::parse(&printed).unwrap();
        prop_assert_eq!(reparsed.reaction_table(), model.reaction_table());
        prop_assert_eq!(reparsed.initial(), model.initial());
        prop_assert_eq!(reparsed.to_string(), printed);
    }
}
