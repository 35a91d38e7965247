mod common;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use common::{crn, key, model_path, permutations, rxn};
use gsm::crn::CrnModel;
use gsm::multi::MultiRuntime;
use gsm::spi::SpiProgram;
use gsm::{
    AlgorithmKind, Calculus, Model, ModelError, Reaction, RunSpec, SpeciesKey, SpeciesMap,
    SpeciesMultiset,
};

fn runtime() -> MultiRuntime {
    let mut rt = MultiRuntime::new();
    rt.register_calculus("crn", crn("DNA ->{0.1}\nA + B ->{1} C")).unwrap();
    rt.register_calculus("spi", SpiProgram::parse("Pol() = delay@0.5; Prot() = delay@0.2;").unwrap())
        .unwrap();
    rt
}

fn existing(names: &[&str]) -> SpeciesMap {
    SpeciesMap::from_pairs(names.iter().map(|&n| (key(n), 1)))
}

fn parse_multi(text: &str) -> Result<MultiRuntime, ModelError> {
    MultiRuntime::parse(text, |kind, file| {
        let source: Box<dyn gsm::ReactionSource> = match kind {
            "crn" => Box::new(crn(file.replace('|', "\n").as_str())),
            _ => Box::new(SpiProgram::parse(file).unwrap()),
        };
        Ok((source, SpeciesMultiset::new()))
    })
    .map(|(rt, _)| rt)
}

#[test]
fn dispatch_examples() {
    let mut rt = runtime();
    rt.add_bridge(rxn(&["crn::DNA", "spi::Pol()"], 0.05, &["spi::Pol()", "spi::Prot()"]))
        .unwrap();
    assert_eq!(
        rt.reactions(&key("crn::DNA"), &existing(&[])).unwrap(),
        vec![rxn(&["crn::DNA"], 0.1, &[])]
    );
    assert_eq!(
        rt.reactions(&key("spi::Pol()"), &existing(&["crn::DNA"])).unwrap(),
        vec![
            rxn(&["spi::Pol()"], 0.5, &[]),
            rxn(&["crn::DNA", "spi::Pol()"], 0.05, &["spi::Pol()", "spi::Prot()"]),
        ]
    );
    assert_eq!(
        rt.reactions(&key("crn::A"), &existing(&["crn::B"])).unwrap(),
        vec![rxn(&["crn::A", "crn::B"], 1.0, &["crn::C"])]
    );
    assert!(matches!(
        rt.reactions(&key("dna::A"), &existing(&[])),
        Err(ModelError::UnknownTag(_))
    ));
    assert!(matches!(rt.reactions(&key("A"), &existing(&[])), Err(ModelError::UnknownTag(_))));
}

/// Records the `existing` maps it is handed.
struct Spy {
    inner: CrnModel,
    seen: Arc<Mutex<Vec<Vec<String>>>>,
}

impl Calculus for Spy {
    type Process = SpeciesMultiset;

    fn species(&self, p: &SpeciesMultiset) -> Result<SpeciesMultiset, ModelError> {
        Ok(p.clone())
    }

    fn reactions(&self, s: &SpeciesKey, existing: &SpeciesMap) -> Result<Vec<Reaction>, ModelError> {
        self.seen
            .lock()
            .unwrap()
            .push(existing.keys().map(|k| k.to_string()).collect());
        self.inner.reactions(s, existing)
    }

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError> {
        self.inner.parse_species(text)
    }
}

#[test]
fn calculi_only_see_their_own_species() {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let mut rt = MultiRuntime::new();
    rt.register_calculus("left", Spy { inner: crn("A + B ->{1} C"), seen: seen.clone() }).unwrap();
    rt.register_calculus("right", crn("B ->{1}")).unwrap();
    let others = existing(&["right::B", "left::X", "right::A"]);
    assert!(rt.reactions(&key("left::A"), &others).unwrap().is_empty());
    assert_eq!(*seen.lock().unwrap(), vec![vec!["X".to_string()]]);
    let with_b = existing(&["right::B", "left::B"]);
    assert_eq!(
        rt.reactions(&key("left::A"), &with_b).unwrap(),
        vec![rxn(&["left::A", "left::B"], 1.0, &["left::C"])]
    );
}

#[test]
fn bridge_rows_are_emitted_exactly_once_in_every_order() {
    let mut rt = MultiRuntime::new();
    rt.register_calculus("p", crn("A ->{1} B\nA + C ->{2}")).unwrap();
    rt.register_calculus("q", crn("A ->{1}\nB + B ->{1} A")).unwrap();
    for row in [
        rxn(&["p::A", "q::A"], 0.5, &["p::B"]),
        rxn(&["p::B", "q::B"], 0.5, &[]),
        rxn(&["p::C", "q::A"], 0.5, &["q::B", "p::A"]),
        rxn(&["q::B"], 1.5, &["p::C"]),
    ] {
        rt.add_bridge(row).unwrap();
    }
    let species: Vec<SpeciesKey> = ["p::A", "p::B", "p::C", "q::A", "q::B"].iter().map(|s| key(s)).collect();
    for order in permutations(&species) {
        let mut present = SpeciesMap::new();
        let mut counts: HashMap<Reaction, usize> = HashMap::new();
        for k in &order {
            for r in rt.reactions(k, &present).unwrap() {
                *counts.entry(r).or_insert(0) += 1;
            }
            present.set(k.clone(), 1);
        }
        for row in rt.bridge() {
            assert_eq!(counts.get(row), Some(&1), "{row} in {order:?}");
        }
        assert!(counts.values().all(|&n| n == 1));
    }
}

#[test]
fn bridge_rows_are_checked() {
    let mut rt = runtime();
    assert!(matches!(rt.add_bridge(rxn(&["crn::A"], 1.0, &["crn::B"])), Err(ModelError::InvalidReaction(_))));
    assert!(matches!(rt.add_bridge(rxn(&["crn::A"], 1.0, &["dna::B"])), Err(ModelError::UnknownTag(_))));
    assert!(matches!(rt.add_bridge(rxn(&["A"], 1.0, &["spi::B"])), Err(ModelError::UnknownTag(_))));
    let row = rxn(&["crn::A"], 1.0, &["spi::Pol()"]);
    rt.add_bridge(row.clone()).unwrap();
    assert!(rt.add_bridge(row).is_err());
    assert_eq!(rt.register_calculus("spi", CrnModel::default()), Err(ModelError::DuplicateTag("spi".into())));
}

#[test]
fn multi_file_errors() {
    assert!(parse_multi("[calculus crn A->{1}]\n[bridge]\ncrn::A ->{1} spi::Pol()").is_err());
    assert!(parse_multi("[calculus crn A->{1}]\n[calculus crn B->{1}]").is_err());
    assert!(parse_multi("A ->{1}").is_err());
    assert!(parse_multi("[calculus crn]").is_err());
    assert!(parse_multi("[bridge").is_err());
    let ok = parse_multi("[calculus crn A->{1}]\n[calculus spi Pol()=delay@1]\n[bridge]\ncrn::A + spi::Pol( ) ->{1} spi::Pol()").unwrap();
    assert_eq!(ok.bridge(), &[rxn(&["crn::A", "spi::Pol()"], 1.0, &["spi::Pol()"])]);
}

#[test]
fn bridge_model_runs_and_validates() {
    let model = Model::load(model_path("bridge.multi")).unwrap();
    let spec = RunSpec::new(200.0, 50.0).validated();
    for alg in [AlgorithmKind::Direct, AlgorithmKind::Nrm] {
        let out = model.simulate(alg, 5, 0, &spec).unwrap();
        assert_eq!(out.trace.records.len(), 5);
        assert!(out.trace.species_index("spi::Prot()").is_some(), "{:?}", out.trace.species);
        assert_eq!(out.trace.population(0, out.trace.species_index("crn::Input").unwrap()), 50);
    }
}

#[test]
fn single_calculus_behind_the_runtime_is_conservative() {
    let multi = Model::load(model_path("single.multi")).unwrap();
    let flat = Model::load(model_path("enzyme.crn")).unwrap();
    let spec = RunSpec::new(50.0, 1.0);
    for alg in [AlgorithmKind::Direct, AlgorithmKind::Nrm] {
        for run in 0..5 {
            let a = multi.simulate(alg, 9, run, &spec).unwrap().trace;
            let b = flat.simulate(alg, 9, run, &spec).unwrap().trace;
            let names: Vec<String> = a.species.iter().map(|k| k.as_str().trim_start_matches("crn::").to_string()).collect();
            let flat_names: Vec<String> = b.species.iter().map(|k| k.to_string()).collect();
            assert_eq!(names, flat_names);
            assert_eq!(a.records, b.records);
        }
    }
}
