use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::ModelError;
use crate::species::{SpeciesKey, SpeciesMultiset};

/// A mass-action reaction `reactants ->{rate} products`.
///
/// Reactions have one or two reactant copies and a positive, finite
/// stochastic rate constant. Identity is structural over all three fields.
#[derive(Clone)]
pub struct Reaction {
    reactants: SpeciesMultiset,
    rate: f64,
    products: SpeciesMultiset,
}

impl Reaction {
    pub fn new(
        reactants: SpeciesMultiset,
        rate: f64,
        products: SpeciesMultiset,
    ) -> Result<Self, ModelError> {
        let order = reactants.total();
        if order == 0 {
            return Err(ModelError::InvalidReaction(format!(
                "reaction `->{{{rate}}} {products}` has no reactants"
            )));
        }
        if order > 2 {
            return Err(ModelError::InvalidReaction(format!(
                "reaction `{reactants} -> {products}` has {order} reactants; at most 2 are supported"
            )));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(ModelError::InvalidReaction(format!(
                "reaction `{reactants} -> {products}` has non-positive or non-finite rate {rate}"
            )));
        }
        Ok(Self {
            reactants,
            rate,
            products,
        })
    }

    pub fn reactants(&self) -> &SpeciesMultiset {
        &self.reactants
    }

    pub fn products(&self) -> &SpeciesMultiset {
        &self.products
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn has_reactant(&self, species: &SpeciesKey) -> bool {
        self.reactants.contains(species)
    }

    /// Net population change of `species` when this reaction fires.
    pub fn net_change(&self, species: &SpeciesKey) -> i64 {
        i64::from(self.products.multiplicity(species)) - i64::from(self.reactants.multiplicity(species))
    }

    /// Same reaction with every species renamed.
    pub fn map_species(&self, mut f: impl FnMut(&SpeciesKey) -> SpeciesKey) -> Reaction {
        Reaction {
            reactants: self.reactants.map_species(&mut f),
            rate: self.rate,
            products: self.products.map_species(&mut f),
        }
    }
}

impl PartialEq for Reaction {
    fn eq(&self, other: &Self) -> bool {
        self.rate.to_bits() == other.rate.to_bits()
            && self.reactants == other.reactants
            && self.products == other.products
    }
}

impl Eq for Reaction {}

impl Hash for Reaction {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.reactants.hash(state);
        self.rate.to_bits().hash(state);
        self.products.hash(state);
    }
}

impl fmt::Display for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->{{{}}}", self.reactants, self.rate)?;
        if !self.products.is_empty() {
            write!(f, " {}", self.products)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Reaction({self})")
    }
}
