//! A generic stochastic-simulation machine for process calculi.
//!
//! A [`Machine`] holds a term `(t, S, R)`: the clock, the population of
//! every species seen so far and the activity of every reaction discovered
//! so far. Species are added one copy at a time; a species entering for the
//! first time has its reactions computed on the spot by the [`Calculus`]
//! plugin, which is what lets models with an unbounded species set run. The
//! [`Algorithm`] plugin decides which reaction fires next.
//!
//! Bundled calculi: flat reaction networks ([`crn`]), a stochastic
//! pi-calculus subset ([`spi`]) and a runtime mixing several calculi through
//! bridge reactions ([`multi`]). Bundled algorithms: Gillespie's Direct
//! Method ([`direct`]) and the Next Reaction Method ([`nrm`]).

pub mod algorithm;
pub mod calculus;
pub mod cli;
pub mod crn;
pub mod direct;
pub mod ensemble;
pub mod error;
pub mod machine;
pub mod model;
pub mod multi;
pub mod nrm;
pub mod queue;
pub mod reaction;
pub mod species;
pub mod spi;
pub mod term;
pub mod trace;

pub use algorithm::{stream, Algorithm, PinnedUniforms, StreamRng, UniformSource};
pub use calculus::{Calculus, ReactionSource};
pub use direct::{propensity, DirectMethod};
pub use ensemble::EnsembleStats;
pub use error::{Location, ModelError, SimError};
pub use machine::{Machine, RunOutcome, RunSpec, Step};
pub use model::{AlgorithmKind, Model};
pub use nrm::{NextReactionMethod, NrmActivity};
pub use reaction::Reaction;
pub use species::{SpeciesKey, SpeciesMap, SpeciesMultiset};
pub use term::{ReactionId, ReactionMap, Term};
pub use trace::{Trace, TraceRecord};
