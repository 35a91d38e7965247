//! A stochastic pi-calculus subset.
//!
//! ```text
//! new c@1.0;                      # channel with its rate
//! S() = !c(a) -> S();             # send `a` on `c`, continue as S()
//! R() = ?c(x) -> W(x);            # receive into `x`
//! W(x) = delay@0.1;               # spontaneous decay
//! run S() | R() | R();
//! ```
//!
//! A species is a definition instance with channel arguments, printed
//! canonically as `D(a,b)`. Its reactions are its delays (unary) and every
//! send/receive pair it forms with a species already present or with a
//! second copy of itself (binary). There is no name restriction, so
//! species identity stays syntactic; unbounded species sets still arise from
//! passing channels around.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;

use crate::calculus::Calculus;
use crate::error::ModelError;
use crate::reaction::Reaction;
use crate::species::{SpeciesKey, SpeciesMap, SpeciesMultiset};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub name: String,
    pub args: Vec<String>,
}

impl Instance {
    pub fn new(name: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            name: name.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn key(&self) -> SpeciesKey {
        SpeciesKey::new(self.to_string())
    }

    fn substitute(&self, env: &HashMap<&str, &str>) -> Instance {
        Instance {
            name: self.name.clone(),
            args: self.args.iter().map(|a| rename(a, env)).collect(),
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Delay(f64),
    Send { channel: String, payload: Vec<String> },
    Receive { channel: String, params: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub action: Action,
    /// Parallel composition of instances; empty is the null process.
    pub continuation: Vec<Instance>,
}

impl Branch {
    /// Replaces free names according to `env`. Names bound by a receive are
    /// not touched inside its continuation.
    pub fn substitute(&self, env: &HashMap<&str, &str>) -> Branch {
        match &self.action {
            Action::Delay(rate) => Branch {
                action: Action::Delay(*rate),
                continuation: self.continuation.iter().map(|i| i.substitute(env)).collect(),
            },
            Action::Send { channel, payload } => Branch {
                action: Action::Send {
                    channel: rename(channel, env),
                    payload: payload.iter().map(|p| rename(p, env)).collect(),
                },
                continuation: self.continuation.iter().map(|i| i.substitute(env)).collect(),
            },
            Action::Receive { channel, params } => {
                let inner: HashMap<&str, &str> = env
                    .iter()
                    .filter(|(k, _)| !params.iter().any(|p| p == *k))
                    .map(|(k, v)| (*k, *v))
                    .collect();
                Branch {
                    action: Action::Receive {
                        channel: rename(channel, env),
                        params: params.clone(),
                    },
                    continuation: self.continuation.iter().map(|i| i.substitute(&inner)).collect(),
                }
            }
        }
    }
}

fn rename(name: &str, env: &HashMap<&str, &str>) -> String {
    env.get(name).map_or_else(|| name.to_string(), |v| v.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub branches: Vec<Branch>,
}

impl Definition {
    /// Branches with parameters replaced by `args`.
    pub fn instantiate(&self, args: &[String]) -> Vec<Branch> {
        let env: HashMap<&str, &str> = self
            .params
            .iter()
            .map(String::as_str)
            .zip(args.iter().map(String::as_str))
            .collect();
        self.branches.iter().map(|b| b.substitute(&env)).collect()
    }
}

/// A parsed, scope- and arity-checked program.
pub struct SpiProgram {
    channels: IndexMap<String, f64>,
    definitions: IndexMap<String, Definition>,
    main: Vec<Instance>,
    branch_cache: Mutex<HashMap<SpeciesKey, Arc<[Branch]>>>,
}

impl Clone for SpiProgram {
    fn clone(&self) -> Self {
        Self::from_parts(self.channels.clone(), self.definitions.clone(), self.main.clone())
    }
}

impl fmt::Debug for SpiProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpiProgram")
            .field("channels", &self.channels)
            .field("definitions", &self.definitions)
            .field("main", &self.main)
            .finish()
    }
}

impl SpiProgram {
    fn from_parts(
        channels: IndexMap<String, f64>,
        definitions: IndexMap<String, Definition>,
        main: Vec<Instance>,
    ) -> Self {
        Self {
            channels,
            definitions,
            main,
            branch_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let tokens = lex(text)?;
        Parser { tokens, pos: 0 }.program()
    }

    /// Parses a standalone process such as `X() | (Y(a) | 0)` against this
    /// program's definitions and channels.
    pub fn parse_process(&self, text: &str) -> Result<Vec<Instance>, ModelError> {
        let tokens = lex(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let process = parser.continuation()?;
        parser.expect_end()?;
        for instance in &process {
            self.check_closed(instance, 1, 1)?;
        }
        Ok(process)
    }

    pub fn channels(&self) -> &IndexMap<String, f64> {
        &self.channels
    }

    pub fn definitions(&self) -> &IndexMap<String, Definition> {
        &self.definitions
    }

    /// The `run` process.
    pub fn main(&self) -> &[Instance] {
        &self.main
    }

    fn check_closed(&self, instance: &Instance, line: usize, column: usize) -> Result<(), ModelError> {
        let def = self.definitions.get(&instance.name).ok_or_else(|| {
            ModelError::semantic(line, column, format!("undefined process `{}`", instance.name))
        })?;
        if def.params.len() != instance.args.len() {
            return Err(ModelError::semantic(
                line,
                column,
                format!(
                    "arity mismatch: `{}` takes {} argument(s), called with {}",
                    def.name,
                    def.params.len(),
                    instance.args.len()
                ),
            ));
        }
        if let Some(arg) = instance.args.iter().find(|a| !self.channels.contains_key(*a)) {
            return Err(ModelError::semantic(
                line,
                column,
                format!("undeclared channel `{arg}` in `{instance}`"),
            ));
        }
        Ok(())
    }

    fn parse_instance_key(&self, text: &str) -> Result<Instance, ModelError> {
        let tokens = lex(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let instance = parser.instance()?;
        parser.expect_end()?;
        self.check_closed(&instance, 1, 1)?;
        Ok(instance)
    }

    /// Instantiated branches of a species, memoised per species.
    fn branches_of(&self, species: &SpeciesKey) -> Result<Arc<[Branch]>, ModelError> {
        if let Some(hit) = self.branch_cache.lock().expect("cache poisoned").get(species) {
            return Ok(hit.clone());
        }
        let instance = self
            .parse_instance_key(species.as_str())
            .map_err(|_| ModelError::UnknownSpecies(species.to_string()))?;
        let branches: Arc<[Branch]> = self.definitions[&instance.name]
            .instantiate(&instance.args)
            .into();
        self.branch_cache
            .lock()
            .expect("cache poisoned")
            .insert(species.clone(), branches.clone());
        Ok(branches)
    }

    fn rate(&self, channel: &str) -> Result<f64, ModelError> {
        self.channels
            .get(channel)
            .copied()
            .ok_or_else(|| ModelError::UnknownSpecies(format!("channel `{channel}`")))
    }

    fn multiset(&self, instances: &[Instance]) -> Result<SpeciesMultiset, ModelError> {
        let mut out = SpeciesMultiset::new();
        for i in instances {
            self.check_closed(i, 1, 1)?;
            out.insert(i.key());
        }
        Ok(out)
    }

    /// Reaction for a send branch of `sender` meeting a receive branch of
    /// `receiver`, or `None` when they use different channels.
    fn communication(
        &self,
        sender: &SpeciesKey,
        send: &Branch,
        receiver: &SpeciesKey,
        receive: &Branch,
    ) -> Result<Option<(SpeciesMultiset, f64, SpeciesMultiset)>, ModelError> {
        let (
            Action::Send { channel: out_ch, payload },
            Action::Receive { channel: in_ch, params },
        ) = (&send.action, &receive.action)
        else {
            return Ok(None);
        };
        if out_ch != in_ch {
            return Ok(None);
        }
        if payload.len() != params.len() {
            return Err(ModelError::CommunicationArity {
                channel: out_ch.clone(),
                sender: sender.to_string(),
                receiver: receiver.to_string(),
                sent: payload.len(),
                expected: params.len(),
            });
        }
        let env: HashMap<&str, &str> = params
            .iter()
            .map(String::as_str)
            .zip(payload.iter().map(String::as_str))
            .collect();
        let received: Vec<Instance> = receive.continuation.iter().map(|i| i.substitute(&env)).collect();
        let products = self.multiset(&send.continuation)?.union(&self.multiset(&received)?);
        let reactants: SpeciesMultiset = [sender.clone(), receiver.clone()].into_iter().collect();
        Ok(Some((reactants, self.rate(out_ch)?, products)))
    }
}

impl Calculus for SpiProgram {
    type Process = Vec<Instance>;

    fn species(&self, process: &Vec<Instance>) -> Result<SpeciesMultiset, ModelError> {
        self.multiset(process)
    }

    fn reactions(
        &self,
        species: &SpeciesKey,
        existing: &SpeciesMap,
    ) -> Result<Vec<Reaction>, ModelError> {
        let own = self.branches_of(species)?;
        // Structurally equal reactions from different branch pairs are merged
        // with their rates summed, in first-occurrence order.
        let mut merged: IndexMap<(SpeciesMultiset, SpeciesMultiset), f64> = IndexMap::new();
        let mut emit = |reactants: SpeciesMultiset, rate: f64, products: SpeciesMultiset| {
            *merged.entry((reactants, products)).or_insert(0.0) += rate;
        };

        for branch in own.iter() {
            if let Action::Delay(rate) = branch.action {
                let reactants: SpeciesMultiset = std::iter::once(species.clone()).collect();
                emit(reactants, rate, self.multiset(&branch.continuation)?);
            }
        }
        for partner in existing.keys() {
            let theirs = self.branches_of(partner)?;
            for mine in own.iter() {
                for other in theirs.iter() {
                    if let Some((r, k, p)) = self.communication(species, mine, partner, other)? {
                        emit(r, k, p);
                    }
                    if let Some((r, k, p)) = self.communication(partner, other, species, mine)? {
                        emit(r, k, p);
                    }
                }
            }
        }
        // Two copies of the same species: each (send, receive) branch pair
        // counted once; a single copy never talks to itself.
        for send in own.iter() {
            for receive in own.iter() {
                if let Some((r, k, p)) = self.communication(species, send, species, receive)? {
                    emit(r, k, p);
                }
            }
        }

        merged
            .into_iter()
            .map(|((reactants, products), rate)| Reaction::new(reactants, rate, products))
            .collect()
    }

    fn parse_species(&self, text: &str) -> Result<SpeciesKey, ModelError> {
        Ok(self.parse_instance_key(text.trim())?.key())
    }
}

// --- lexer -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Punct(&'static str),
    Nu,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const PUNCTUATION: [&str; 11] = ["->", "(", ")", ",", ";", "=", "+", "!", "?", "@", "|"];

fn lex(text: &str) -> Result<Vec<Token>, ModelError> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c == 'ν' {
                out.push(Token { tok: Tok::Nu, line: li + 1, column });
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(word), line: li + 1, column });
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() {
                    let d = chars[i];
                    let exponent_sign = matches!(d, '+' | '-') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exponent_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Number(word), line: li + 1, column });
            } else {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let Some(p) = PUNCTUATION.iter().find(|p| rest.starts_with(**p)) else {
                    return Err(ModelError::syntax(li + 1, column, format!("unexpected character `{c}`")));
                };
                out.push(Token { tok: Tok::Punct(p), line: li + 1, column });
                i += p.chars().count();
            }
        }
    }
    Ok(out)
}

// --- parser ----------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

/// Where a definition body or `run` process was written, for diagnostics.
struct Site {
    line: usize,
    column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn at_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(q), .. }) if *q == p)
    }

    fn at_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(w), .. }) if w == word)
    }

    fn here(&self) -> (usize, usize) {
        match self.peek().or(self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn error(&self, message: impl Into<String>) -> ModelError {
        let (line, column) = self.here();
        ModelError::syntax(line, column, message)
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(t) => match &t.tok {
                Tok::Ident(w) | Tok::Number(w) => format!("`{w}`"),
                Tok::Punct(p) => format!("`{p}`"),
                Tok::Nu => "`ν`".to_string(),
            },
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ModelError> {
        if self.at_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`, found {}", self.describe())))
        }
    }

    fn expect_end(&self) -> Result<(), ModelError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error(format!("unexpected {}", self.describe()))),
        }
    }

    fn reject_nu(&self) -> Result<(), ModelError> {
        if matches!(self.peek(), Some(Token { tok: Tok::Nu, .. })) || self.at_keyword("new") {
            Err(self.error("name restriction (ν / new) is not supported inside processes"))
        } else {
            Ok(())
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ModelError> {
        self.reject_nu()?;
        match self.peek() {
            Some(Token { tok: Tok::Ident(w), .. }) if !is_reserved(w) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(format!("expected {what}, found {}", self.describe()))),
        }
    }

    fn rate(&mut self) -> Result<f64, ModelError> {
        match self.peek() {
            Some(Token { tok: Tok::Number(w), .. }) => {
                let rate: f64 = w.parse().map_err(|_| self.error(format!("invalid rate `{w}`")))?;
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(self.error(format!("rate must be positive, found `{w}`")));
                }
                self.pos += 1;
                Ok(rate)
            }
            _ => Err(self.error(format!("expected a rate, found {}", self.describe()))),
        }
    }

    /// `"(" [name ("," name)*] ")"`
    fn name_list(&mut self) -> Result<Vec<String>, ModelError> {
        self.expect_punct("(")?;
        let mut names = Vec::new();
        if !self.at_punct(")") {
            loop {
                names.push(self.ident("a name")?);
                if self.at_punct(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(names)
    }

    fn instance(&mut self) -> Result<Instance, ModelError> {
        let name = self.ident("a process name")?;
        let args = self.name_list()?;
        Ok(Instance { name, args })
    }

    /// `term ("|" term)*` where a term is an instance, `0`, or a
    /// parenthesised composition. Flattened.
    fn continuation(&mut self) -> Result<Vec<Instance>, ModelError> {
        let mut out = Vec::new();
        loop {
            self.reject_nu()?;
            if self.at_punct("(") {
                self.pos += 1;
                out.extend(self.continuation()?);
                self.expect_punct(")")?;
            } else if matches!(self.peek(), Some(Token { tok: Tok::Number(w), .. }) if w == "0") {
                self.pos += 1;
            } else {
                out.push(self.instance()?);
            }
            if self.at_punct("|") {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn branch(&mut self) -> Result<Branch, ModelError> {
        self.reject_nu()?;
        let action = if self.at_keyword("delay") {
            self.pos += 1;
            self.expect_punct("@")?;
            Action::Delay(self.rate()?)
        } else if self.at_punct("!") {
            self.pos += 1;
            let channel = self.ident("a channel")?;
            let payload = if self.at_punct("(") { self.name_list()? } else { Vec::new() };
            Action::Send { channel, payload }
        } else if self.at_punct("?") {
            self.pos += 1;
            let channel = self.ident("a channel")?;
            let params = if self.at_punct("(") { self.name_list()? } else { Vec::new() };
            Action::Receive { channel, params }
        } else {
            return Err(self.error(format!(
                "expected `delay@rate`, `!channel` or `?channel`, found {}",
                self.describe()
            )));
        };
        let continuation = if self.at_punct("->") {
            self.pos += 1;
            self.continuation()?
        } else {
            Vec::new()
        };
        Ok(Branch { action, continuation })
    }

    fn program(mut self) -> Result<SpiProgram, ModelError> {
        let mut channels: IndexMap<String, f64> = IndexMap::new();
        let mut definitions: IndexMap<String, (Definition, Site)> = IndexMap::new();
        let mut main: Vec<(Instance, Site)> = Vec::new();

        while let Some(token) = self.peek().cloned() {
            let site = Site { line: token.line, column: token.column };
            if self.at_keyword("new") {
                self.pos += 1;
                let name = self.ident("a channel name")?;
                self.expect_punct("@")?;
                let rate = self.rate()?;
                self.expect_punct(";")?;
                if channels.insert(name.clone(), rate).is_some() {
                    return Err(ModelError::semantic(site.line, site.column, format!("channel `{name}` declared twice")));
                }
            } else if self.at_keyword("run") {
                self.pos += 1;
                if self.peek().is_some() && !self.at_punct(";") {
                    let start = self.here();
                    for instance in self.continuation()? {
                        main.push((instance, Site { line: start.0, column: start.1 }));
                    }
                }
                if self.at_punct(";") {
                    self.pos += 1;
                }
            } else if matches!(token.tok, Tok::Nu) {
                return Err(self.error("name restriction (ν) is not supported"));
            } else {
                let name = self.ident("`new`, `run` or a definition")?;
                let params = self.name_list()?;
                self.expect_punct("=")?;
                let mut branches = vec![self.branch()?];
                while self.at_punct("+") {
                    self.pos += 1;
                    branches.push(self.branch()?);
                }
                if self.peek().is_some() {
                    self.expect_punct(";")?;
                }
                if definitions.contains_key(&name) {
                    return Err(ModelError::semantic(site.line, site.column, format!("process `{name}` defined twice")));
                }
                definitions.insert(name.clone(), (Definition { name, params, branches }, site));
            }
        }

        let defs: IndexMap<String, Definition> =
            definitions.iter().map(|(k, (d, _))| (k.clone(), d.clone())).collect();
        for (def, site) in definitions.values() {
            check_definition(def, site, &channels, &defs)?;
        }
        let program = SpiProgram::from_parts(channels, defs, Vec::new());
        for (instance, site) in &main {
            program.check_closed(instance, site.line, site.column)?;
        }
        Ok(SpiProgram::from_parts(
            program.channels,
            program.definitions,
            main.into_iter().map(|(i, _)| i).collect(),
        ))
    }
}

fn is_reserved(word: &str) -> bool {
    matches!(word, "new" | "run" | "delay")
}

fn check_definition(
    def: &Definition,
    site: &Site,
    channels: &IndexMap<String, f64>,
    defs: &IndexMap<String, Definition>,
) -> Result<(), ModelError> {
    let fail = |message: String| ModelError::semantic(site.line, site.column, format!("in `{}`: {message}", def.name));
    let mut seen = std::collections::HashSet::new();
    for p in &def.params {
        if !seen.insert(p) {
            return Err(fail(format!("parameter `{p}` repeated")));
        }
    }
    let in_scope = |name: &str, bound: &[String]| {
        bound.iter().any(|b| b == name) || def.params.iter().any(|p| p == name) || channels.contains_key(name)
    };
    for branch in &def.branches {
        let mut bound: Vec<String> = Vec::new();
        match &branch.action {
            Action::Delay(_) => {}
            Action::Send { channel, payload } => {
                for name in std::iter::once(channel).chain(payload) {
                    if !in_scope(name, &[]) {
                        return Err(fail(format!("undeclared channel `{name}`")));
                    }
                }
            }
            Action::Receive { channel, params } => {
                if !in_scope(channel, &[]) {
                    return Err(fail(format!("undeclared channel `{channel}`")));
                }
                bound.clone_from(params);
            }
        }
        for call in &branch.continuation {
            let target = defs
                .get(&call.name)
                .ok_or_else(|| fail(format!("undefined process `{}`", call.name)))?;
            if target.params.len() != call.args.len() {
                return Err(fail(format!(
                    "arity mismatch: `{}` takes {} argument(s), called with {}",
                    target.name,
                    target.params.len(),
                    call.args.len()
                )));
            }
            if let Some(arg) = call.args.iter().find(|a| !in_scope(a, &bound)) {
                return Err(fail(format!("undeclared channel `{arg}` in `{call}`")));
            }
        }
    }
    Ok(())
}
