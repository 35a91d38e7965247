//! Flat chemical reaction networks.
//!
//! ```text
//! # comment
//! A + B ->{0.5} C
//! A ->{1}
//! init A 100
//! ```
//!
//! Reactions mentioning a species become available once all of their
//! reactants have appeared; each one is emitted by exactly one call to
//! [`Calculus::reactions`], the one for its last-appearing reactant.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::calculus::Calculus;
use crate::error::ModelError;
use crate::reaction::Reaction;
use crate::species::{SpeciesKey, SpeciesMap, SpeciesMultiset};

#[derive(Debug, Clone, Default)]
pub struct CrnModel {
    reactions: Vec<Reaction>,
    initial: SpeciesMultiset,
    by_reactant: HashMap<SpeciesKey, Vec<usize>>,
}

impl CrnModel {
    /// Builds a model from a reaction table and initial condition. Duplicate
    /// reactions are rejected.
    pub fn new(reactions: Vec<Reaction>, initial: SpeciesMultiset) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for r in &reactions {
            if !seen.insert(r) {
                return Err(ModelError::InvalidReaction(format!("duplicate reaction `{r}`")));
            }
        }
        let mut by_reactant: HashMap<SpeciesKey, Vec<usize>> = HashMap::new();
        for (i, r) in reactions.iter().enumerate() {
            for (k, _) in r.reactants().iter() {
                by_reactant.entry(k.clone()).or_default().push(i);
            }
        }
        Ok(Self {
            reactions,
            initial,
            by_reactant,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut reactions: Vec<Reaction> = Vec::new();
        let mut lines_of: HashMap<Reaction, usize> = HashMap::new();
        let mut initial = SpeciesMultiset::new();
        for statement in statements(text) {
            if statement.text.contains("->") {
                let reaction = parse_reaction(&statement, &mut parse_crn_species)?;
                if let Some(first) = lines_of.get(&reaction) {
                    return Err(ModelError::semantic(
                        statement.line,
                        statement.column,
                        format!("duplicate reaction `{reaction}` (first defined on line {first})"),
                    ));
                }
                lines_of.insert(reaction.clone(), statement.line);
                reactions.push(reaction);
            } else {
                let (species, count) = parse_init(&statement)?;
                initial.insert_n(species, count);
            }
        }
        Self::new(reactions, initial)
    }

    pub fn reaction_table(&self) -> &[Reaction] {
        &self.reactions
    }

    /// The declared initial condition, with repeated `init` lines summed.
    pub fn initial(&self) -> &SpeciesMultiset {
        &self.initial
    }
}

impl Calculus for CrnModel {
    type Process = SpeciesMultiset;

    fn species(&self, process: &SpeciesMultiset) -> Result<SpeciesMultiset, ModelError> {
        Ok(process.clone())
    }

    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError> {
        let Some(candidates) = self.by_reactant.get(species) else {
            return Ok(Vec::new());
        };
        Ok(candidates
            .iter()
            .map(|&i| &self.reactions[i])
            .filter(|r| {
                r.reactants()
                    .iter()
                    .all(|(k, _)| k == species || existing.contains(k))
            })
            .cloned()
            .collect())
    }

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError> {
        parse_crn_species(text.trim(), 1)
    }
}

/// Prints the model back in its file syntax.
impl fmt::Display for CrnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reactions {
            writeln!(f, "{r}")?;
        }
        for (k, n) in self.initial.iter() {
            writeln!(f, "init {k} {n}")?;
        }
        Ok(())
    }
}

pub(crate) fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn parse_crn_species(text: &str, column: usize) -> Result<SpeciesKey, ModelError> {
    if is_identifier(text) {
        Ok(SpeciesKey::new(text))
    } else {
        Err(ModelError::syntax(0, column, format!("invalid species name `{text}`")))
    }
}

/// One `;`- or newline-separated statement with its source position.
pub(crate) struct Statement<'a> {
    pub text: &'a str,
    pub line: usize,
    pub column: usize,
}

impl Statement<'_> {
    pub(crate) fn error(&self, offset: usize, message: impl Into<String>) -> ModelError {
        ModelError::syntax(self.line, self.column + offset, message)
    }
}

/// Splits source text into non-empty statements, dropping `#` comments.
pub(crate) fn statements(text: &str) -> Vec<Statement<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        let mut start = 0;
        for piece in code.split(';') {
            let lead = piece.len() - piece.trim_start().len();
            let trimmed = piece.trim();
            if !trimmed.is_empty() {
                out.push(Statement {
                    text: trimmed,
                    line: i + 1,
                    column: code[..start + lead].chars().count() + 1,
                });
            }
            start += piece.len() + 1;
        }
    }
    out
}

/// Parses `reactants ->{rate} products` with a caller-supplied species
/// parser; `+` inside parentheses does not split.
pub(crate) fn parse_reaction(
    statement: &Statement<'_>,
    species: &mut dyn FnMut(&str, usize) -> Result<SpeciesKey, ModelError>,
) -> Result<Reaction, ModelError> {
    let text = statement.text;
    let arrow = text.find("->").expect("caller checked for an arrow");
    let after = &text[arrow + 2..];
    let brace_lead = after.len() - after.trim_start().len();
    let open = arrow + 2 + brace_lead;
    if !text[open..].starts_with('{') {
        return Err(statement.error(column_of(text, open), "expected `{rate}` after `->`"));
    }
    let close = text[open..]
        .find('}')
        .map(|i| open + i)
        .ok_or_else(|| statement.error(column_of(text, open), "unterminated rate, expected `}`"))?;
    let rate_text = text[open + 1..close].trim();
    let rate = parse_rate(rate_text)
        .ok_or_else(|| statement.error(column_of(text, open + 1), format!("invalid rate `{rate_text}`; expected a positive decimal")))?;

    let reactants = parse_side(statement, 0, &text[..arrow], species)?;
    let products = parse_side(statement, close + 1, &text[close + 1..], species)?;
    if reactants.is_empty() {
        return Err(statement.error(0, "reaction has no reactants"));
    }
    if reactants.total() > 2 {
        return Err(ModelError::semantic(
            statement.line,
            statement.column,
            format!(
                "ternary reaction: {} reactants in `{text}`; at most 2 are supported",
                reactants.total()
            ),
        ));
    }
    Reaction::new(reactants, rate, products)
        .map_err(|e| ModelError::semantic(statement.line, statement.column, e.to_string()))
}

fn parse_side(
    statement: &Statement<'_>,
    base: usize,
    side: &str,
    species: &mut dyn FnMut(&str, usize) -> Result<SpeciesKey, ModelError>,
) -> Result<SpeciesMultiset, ModelError> {
    let mut out = SpeciesMultiset::new();
    if side.trim().is_empty() {
        return Ok(out);
    }
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = side.as_bytes();
    for i in 0..=bytes.len() {
        let at_end = i == bytes.len();
        if !at_end {
            match bytes[i] {
                b'(' => depth += 1,
                b')' => depth -= 1,
                _ => {}
            }
        }
        if at_end || (bytes[i] == b'+' && depth == 0) {
            let item = &side[start..i];
            let lead = item.len() - item.trim_start().len();
            let col = column_of(statement.text, base + start + lead);
            let name = item.trim();
            if name.is_empty() {
                return Err(statement.error(col, "missing species around `+`"));
            }
            let key = species(name, col).map_err(|e| relocate(e, statement, col))?;
            out.insert(key);
            start = i + 1;
        }
    }
    Ok(out)
}

fn parse_init(statement: &Statement<'_>) -> Result<(SpeciesKey, u32), ModelError> {
    let mut words = statement.text.split_whitespace();
    if words.next() != Some("init") {
        return Err(statement.error(0, format!("expected a reaction or `init`, found `{}`", statement.text)));
    }
    let (Some(name), Some(count), None) = (words.next(), words.next(), words.next()) else {
        return Err(statement.error(0, "expected `init <species> <count>`"));
    };
    let name_col = column_of(statement.text, statement.text.find(name).unwrap_or(0));
    let key = parse_crn_species(name, name_col).map_err(|e| relocate(e, statement, name_col))?;
    let count: u32 = count
        .parse()
        .map_err(|_| statement.error(name_col, format!("invalid population `{count}`")))?;
    Ok((key, count))
}

fn parse_rate(text: &str) -> Option<f64> {
    let valid = !text.is_empty()
        && text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        && text.starts_with(|c: char| c.is_ascii_digit() || c == '.');
    let rate: f64 = if valid { text.parse().ok()? } else { return None };
    (rate.is_finite() && rate > 0.0).then_some(rate)
}

fn column_of(text: &str, byte_offset: usize) -> usize {
    text[..byte_offset].chars().count()
}

/// Places an error raised by a species parser at the statement position.
fn relocate(error: ModelError, statement: &Statement<'_>, offset: usize) -> ModelError {
    match error {
        ModelError::Syntax { message, .. } => statement.error(offset, message),
        ModelError::Semantic { message, .. } => {
            ModelError::semantic(statement.line, statement.column + offset, message)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> SpeciesKey {
        SpeciesKey::from(s)
    }

    fn existing(names: &[&str]) -> SpeciesMap {
        SpeciesMap::from_pairs(names.iter().map(|&n| (key(n), 1)))
    }

    #[test]
    fn parses_binary_reaction() {
        let m = CrnModel::parse("A + B ->{0.5} C").unwrap();
        let r = &m.reaction_table()[0];
        assert_eq!(r.reactants().multiplicity(&key("A")), 1);
        assert_eq!(r.reactants().multiplicity(&key("B")), 1);
        assert_eq!(r.rate(), 0.5);
        assert_eq!(r.products().multiplicity(&key("C")), 1);
    }

    #[test]
    fn empty_products_allowed() {
        let m = CrnModel::parse("A ->{1} ").unwrap();
        assert!(m.reaction_table()[0].products().is_empty());
    }

    #[test]
    fn ternary_rejected_with_line() {
        let err = CrnModel::parse("# header\nA + B + C ->{1} D").unwrap_err();
        let text = err.to_string();
        assert!(text.starts_with("2:"), "{text}");
        assert!(text.contains("ternary"), "{text}");
    }

    #[test]
    fn rejects_bad_rates_names_and_duplicates() {
        assert!(CrnModel::parse("A ->{0} B").is_err());
        assert!(CrnModel::parse("A ->{-1} B").is_err());
        assert!(CrnModel::parse("A ->{inf} B").is_err());
        assert!(CrnModel::parse("A ->{x} B").is_err());
        assert!(CrnModel::parse("A -> B").is_err());
        assert!(CrnModel::parse("1A ->{1} B").is_err());
        assert!(CrnModel::parse("A + ->{1} B").is_err());
        assert!(CrnModel::parse(" ->{1} B").is_err());
        let dup = CrnModel::parse("A ->{1} B\nA->{1}B").unwrap_err().to_string();
        assert!(dup.contains("duplicate") && dup.starts_with("2:"), "{dup}");
        // Same species with a different rate is a different reaction.
        assert!(CrnModel::parse("A ->{1} B\nA ->{2} B").is_ok());
    }

    #[test]
    fn init_lines_accumulate() {
        let m = CrnModel::parse("init A 100").unwrap();
        assert_eq!(m.initial().multiplicity(&key("A")), 100);
        assert!(CrnModel::parse("A ->{1}").unwrap().initial().is_empty());
        let m = CrnModel::parse("init A 2; init A 3").unwrap();
        assert_eq!(m.initial().multiplicity(&key("A")), 5);
        assert!(CrnModel::parse("init A").is_err());
        assert!(CrnModel::parse("init A -2").is_err());
        assert!(CrnModel::parse("start A 2").is_err());
    }

    #[test]
    fn reactions_wait_for_last_reactant() {
        let m = CrnModel::parse("A + B ->{1} C").unwrap();
        assert!(m.reactions(&key("A"), &existing(&[])).unwrap().is_empty());
        let found = m.reactions(&key("B"), &existing(&["A"])).unwrap();
        assert_eq!(found, m.reaction_table());
    }

    #[test]
    fn homodimer_and_unary_are_self_contained() {
        let m = CrnModel::parse("A + A ->{1} D").unwrap();
        assert_eq!(m.reactions(&key("A"), &existing(&[])).unwrap().len(), 1);
        let m = CrnModel::parse("A ->{1}").unwrap();
        assert_eq!(m.reactions(&key("A"), &existing(&["B", "C"])).unwrap().len(), 1);
    }

    #[test]
    fn species_names_allow_primes_and_underscores() {
        let m = CrnModel::parse("_x' ->{2.5e-1} y_2").unwrap();
        assert_eq!(m.reaction_table()[0].rate(), 0.25);
    }
}
