//! Loading model files and running them under a chosen algorithm.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::algorithm::stream;
use crate::calculus::{Calculus, ReactionSource};
use crate::crn::CrnModel;
use crate::direct::DirectMethod;
use crate::error::{ModelError, SimError};
use crate::machine::{Machine, RunOutcome, RunSpec};
use crate::multi::{MultiProcess, MultiRuntime};
use crate::nrm::NextReactionMethod;
use crate::species::SpeciesMultiset;
use crate::spi::SpiProgram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum AlgorithmKind {
    Direct,
    Nrm,
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::Direct => "direct",
            AlgorithmKind::Nrm => "nrm",
        })
    }
}

/// A loaded model: its calculus together with the initial process.
#[derive(Debug)]
pub enum Model {
    Crn(CrnModel),
    Spi(SpiProgram),
    Multi(MultiRuntime, MultiProcess),
}

impl Model {
    /// Loads a model, choosing the calculus from the file extension
    /// (`.crn`, `.spi` or `.multi`).
    pub fn load(path: impl AsRef<Path>) -> Result<Model, ModelError> {
        let path = path.as_ref();
        let text = read(path)?;
        let in_file = |e: ModelError| e.in_file(path);
        match extension(path).as_str() {
            "crn" => CrnModel::parse(&text).map(Model::Crn).map_err(in_file),
            "spi" => SpiProgram::parse(&text).map(Model::Spi).map_err(in_file),
            "multi" => {
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                let (runtime, process) =
                    MultiRuntime::parse(&text, |kind, file| load_component(&base, kind, file))
                        .map_err(in_file)?;
                Ok(Model::Multi(runtime, process))
            }
            other => Err(ModelError::Io {
                path: path.to_path_buf(),
                message: format!("unknown model type `.{other}`; expected .crn, .spi or .multi"),
            }),
        }
    }

    /// Runs one simulation on the stream `(seed, run_index)`.
    pub fn simulate(
        &self,
        algorithm: AlgorithmKind,
        seed: u64,
        run_index: u64,
        spec: &RunSpec,
    ) -> Result<RunOutcome, SimError> {
        match self {
            Model::Crn(m) => simulate_with(m, m.initial(), algorithm, seed, run_index, spec),
            Model::Spi(p) => simulate_with(p, &p.main().to_vec(), algorithm, seed, run_index, spec),
            Model::Multi(rt, process) => simulate_with(rt, process, algorithm, seed, run_index, spec),
        }
    }
}

/// Builds a machine for `calculus`, adds `process` and runs it.
pub fn simulate_with<C: Calculus>(
    calculus: C,
    process: &C::Process,
    algorithm: AlgorithmKind,
    seed: u64,
    run_index: u64,
    spec: &RunSpec,
) -> Result<RunOutcome, SimError> {
    let rng = stream(seed, run_index);
    match algorithm {
        AlgorithmKind::Direct => {
            let mut machine = Machine::new(calculus, DirectMethod::new(rng));
            machine.add_process(process)?;
            machine.run(spec)
        }
        AlgorithmKind::Nrm => {
            let mut machine = Machine::new(calculus, NextReactionMethod::new(rng));
            machine.add_process(process)?;
            machine.run(spec)
        }
    }
}

fn load_component(
    base: &Path,
    kind: &str,
    file: &str,
) -> Result<(Box<dyn ReactionSource>, SpeciesMultiset), ModelError> {
    let path: PathBuf = base.join(file);
    let text = read(&path)?;
    match kind {
        "crn" => {
            let model = CrnModel::parse(&text).map_err(|e| e.in_file(&path))?;
            let initial = model.initial().clone();
            Ok((Box::new(model), initial))
        }
        "spi" => {
            let program = SpiProgram::parse(&text).map_err(|e| e.in_file(&path))?;
            let initial = program.species(&program.main().to_vec())?;
            Ok((Box::new(program), initial))
        }
        other => Err(ModelError::Io {
            path,
            message: format!("unknown calculus `{other}`; expected crn or spi"),
        }),
    }
}

fn read(path: &Path) -> Result<String, ModelError> {
    fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}
