#![allow(dead_code)]

use std::path::PathBuf;

use gsm::crn::CrnModel;
use gsm::{Reaction, SpeciesKey, SpeciesMultiset};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn model_path(name: &str) -> PathBuf {
    models_dir().join(name)
}

/// Every top-level bundled model file, sorted by name.
pub fn bundled_models() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(models_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("crn" | "spi" | "multi")
            )
        })
        .collect();
    paths.sort();
    paths
}

pub fn key(s: &str) -> SpeciesKey {
    SpeciesKey::from(s)
}

pub fn ms(items: &[&str]) -> SpeciesMultiset {
    items.iter().map(|s| key(s)).collect()
}

pub fn rxn(reactants: &[&str], rate: f64, products: &[&str]) -> Reaction {
    Reaction::new(ms(reactants), rate, ms(products)).unwrap()
}

pub fn crn(text: &str) -> CrnModel {
    CrnModel::parse(text).unwrap()
}

/// All orderings of `items`.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
