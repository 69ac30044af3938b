use std::path::{Path, PathBuf};

use graphlf::engine::{Proof, ProofDocument};
use graphlf::systems::{Registry, SystemError};
use graphlf::tactics::Run;

use crate::error::ServerError;

/// Extension of system-authoring files.
pub const SYSTEM_EXTENSION: &str = "glf";

/// Built-in systems plus every `.glf` file in `dir`. Files may extend systems
/// from other files in any order.
pub fn load_registry(dir: Option<&Path>) -> Result<Registry, ServerError> {
    let mut reg = Registry::builtin();
    let Some(dir) = dir else {
        return Ok(reg);
    };
    let mut pending: Vec<(PathBuf, String)> = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ServerError::file(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == SYSTEM_EXTENSION))
        .collect();
    paths.sort();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| ServerError::file(&p, e))?;
        pending.push((p, text));
    }
    while !pending.is_empty() {
        let before = pending.len();
        let mut failed = Vec::new();
        for (p, text) in pending {
            match reg.load(&text) {
                Ok(_) => {}
                Err(SystemError::UnknownSystem(_)) => failed.push((p, text)),
                Err(e) => return Err(ServerError::file(&p, e)),
            }
        }
        if failed.len() == before {
            let (p, text) = &failed[0];
            return Err(ServerError::file(p, reg.load(text).unwrap_err()));
        }
        pending = failed;
    }
    Ok(reg)
}

/// Imports a proof document against the registry.
pub fn check_document(reg: &Registry, text: &str) -> Result<Proof, String> {
    let doc = ProofDocument::from_json(text).map_err(|e| e.to_string())?;
    let sys = reg.get(&doc.system).map_err(|e| e.to_string())?;
    Proof::import(sys.calculus.clone(), &doc).map_err(|e| e.to_string())
}

pub fn prove(reg: &Registry, system: &str, goal: &str, strategy: &str, fuel: u64) -> Result<(Proof, Run), SystemError> {
    reg.get(system)?.prove(goal, strategy, fuel)
}
