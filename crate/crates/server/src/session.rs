use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use graphlf::engine::{EngineError, Proof, ProofDocument, State, Step};
use graphlf::systems::{DeductiveSystem, Registry};
use graphlf::tactics::{run, Outcome, Run, Tactic};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ServerError};

/// A logged step. Backward targets are kept as positions in the open-goal
/// list, since vertex ids are not stable across replays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: Step,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<usize>,
}

/// On-disk form of a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionRecord {
    pub id: String,
    pub owner: String,
    pub system: String,
    pub goal: String,
    pub version: u64,
    pub created_at: u64,
    pub updated_at: u64,
    pub log: Vec<LogEntry>,
    pub document: ProofDocument,
}

pub struct Session {
    pub id: String,
    pub owner: String,
    pub system: DeductiveSystem,
    pub proof: Proof,
    pub version: u64,
    pub log: Vec<LogEntry>,
    pub created_at: u64,
    pub updated_at: u64,
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn goal_index(proof: &Proof, target: Option<&str>) -> Option<usize> {
    let (State::Backward(s), Some(t)) = (proof.state(), target) else {
        return None;
    };
    s.open_goals().iter().position(|g| g.to_string() == t)
}

fn resolve(proof: &Proof, entry: &LogEntry) -> Step {
    let mut step = entry.step.clone();
    if let (State::Backward(s), Some(i)) = (proof.state(), entry.goal) {
        step.target = s.open_goals().get(i).map(|g| g.to_string());
    }
    step
}

impl Session {
    pub fn new(id: String, owner: String, system: DeductiveSystem, goal: &str) -> Result<Self, ApiError> {
        let proof = system.new_proof(goal)?;
        let t = now();
        Ok(Session {
            id,
            owner,
            system,
            proof,
            version: 0,
            log: Vec::new(),
            created_at: t,
            updated_at: t,
        })
    }

    pub fn check_version(&self, sent: Option<u64>) -> Result<(), ApiError> {
        let sent = sent.ok_or(ApiError::MissingVersion)?;
        if sent != self.version {
            return Err(ApiError::VersionConflict {
                sent,
                current: self.version,
            });
        }
        Ok(())
    }

    pub fn apply(&mut self, step: &Step) -> Result<(), EngineError> {
        let goal = goal_index(&self.proof, step.target.as_deref());
        self.proof.apply(step)?;
        let mut logged = step.clone();
        if goal.is_some() {
            logged.target = None;
        }
        self.log.push(LogEntry { step: logged, goal });
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), EngineError> {
        self.proof.undo()?;
        self.log.pop();
        Ok(())
    }

    /// Runs a tactic; on success its trace joins the log.
    pub fn run_tactic(&mut self, tactic: &Tactic, fuel: u64) -> Run {
        let r = run(tactic, &mut self.proof, fuel);
        if let Outcome::Success { trace } = &r.outcome {
            self.log.extend(trace.iter().map(|s| LogEntry {
                step: s.clone(),
                goal: None,
            }));
        }
        r
    }

    /// Drops log entries and proof steps past `len`.
    pub fn truncate(&mut self, len: usize) {
        self.proof.truncate(len);
        self.log.truncate(len);
    }

    pub fn record(&self) -> SessionRecord {
        SessionRecord {
            id: self.id.clone(),
            owner: self.owner.clone(),
            system: self.system.name.clone(),
            goal: self.proof.goal().to_sexpr(),
            version: self.version,
            created_at: self.created_at,
            updated_at: self.updated_at,
            log: self.log.clone(),
            document: self.proof.export(),
        }
    }

    /// Rebuilds a session by replaying its log, and checks the result
    /// against the saved document.
    pub fn replay(registry: &Registry, record: SessionRecord) -> Result<Self, String> {
        let system = registry.get(&record.system).map_err(|e| e.to_string())?;
        let mut proof = system.new_proof(&record.goal).map_err(|e| e.to_string())?;
        for (i, entry) in record.log.iter().enumerate() {
            let step = resolve(&proof, entry);
            proof.apply(&step).map_err(|e| format!("log entry {}: {e}", i + 1))?;
        }
        if proof.export() != record.document {
            return Err("replayed proof differs from the saved document".into());
        }
        Ok(Session {
            id: record.id,
            owner: record.owner,
            system,
            proof,
            version: record.version,
            log: record.log,
            created_at: record.created_at,
            updated_at: record.updated_at,
        })
    }
}

pub type SharedSession = Arc<Mutex<Session>>;

/// All live sessions, optionally mirrored to one JSON file each.
pub struct SessionStore {
    sessions: RwLock<HashMap<String, SharedSession>>,
    data_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn in_memory() -> Self {
        SessionStore {
            sessions: RwLock::new(HashMap::new()),
            data_dir: None,
        }
    }

    /// Opens `dir`, creating it if needed, and replays every saved session.
    pub fn open(dir: &Path, registry: &Registry) -> Result<Self, ServerError> {
        std::fs::create_dir_all(dir)?;
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let mut sessions = HashMap::new();
        for path in files {
            let text = std::fs::read_to_string(&path)?;
            let record: SessionRecord = serde_json::from_str(&text).map_err(|e| ServerError::file(&path, e))?;
            let session = Session::replay(registry, record).map_err(|message| ServerError::Replay {
                path: path.display().to_string(),
                message,
            })?;
            sessions.insert(session.id.clone(), Arc::new(Mutex::new(session)));
        }
        Ok(SessionStore {
            sessions: RwLock::new(sessions),
            data_dir: Some(dir.to_path_buf()),
        })
    }

    pub fn get(&self, id: &str) -> Option<SharedSession> {
        self.sessions.read().expect("session map lock").get(id).cloned()
    }

    pub fn insert(&self, session: Session) -> Result<SharedSession, ApiError> {
        self.save(&session)?;
        let id = session.id.clone();
        let shared = Arc::new(Mutex::new(session));
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, Arc::clone(&shared));
        Ok(shared)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the session file through a temporary file and a rename.
    pub fn save(&self, session: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.data_dir else {
            return Ok(());
        };
        let text = serde_json::to_string_pretty(&session.record()).map_err(|e| ApiError::Storage(e.to_string()))?;
        let path = dir.join(format!("{}.json", session.id));
        let tmp = dir.join(format!(".{}.tmp", session.id));
        std::fs::write(&tmp, text)
            .and_then(|_| std::fs::rename(&tmp, &path))
            .map_err(|e| ApiError::Storage(e.to_string()))
    }
}
