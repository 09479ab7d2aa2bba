use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use hybrid_miner::causal_graph::{discover_from_projection, FrequencyProjection};
use hybrid_miner::discovery::DiscoveryError;
use hybrid_miner::{discover_hybrid_net, CausalGraph, DirectlyFollowsTable, Discovery, DiscoveryParams, EventLog, GraphParams};
use serde::Serialize;

use crate::error::ApiError;

/// Projections kept per session before the cache is cleared.
const PROJECTION_CACHE: usize = 32;

/// Size figures of a log. `events` and `classes` include the start and end
/// markers; the `raw_` figures do not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogSummary {
    pub cases: u64,
    pub events: u64,
    pub raw_events: u64,
    pub endpoint_events: u64,
    pub classes: usize,
    pub raw_classes: usize,
    pub variants: usize,
}

impl LogSummary {
    pub fn of(log: &EventLog) -> Self {
        let classes = log.alphabet().len();
        LogSummary {
            cases: log.case_count(),
            events: log.event_count(),
            raw_events: log.raw_event_count(),
            endpoint_events: log.event_count() - log.raw_event_count(),
            classes,
            raw_classes: classes.saturating_sub(2),
            variants: log.variants().len(),
        }
    }
}

/// One uploaded log with caches derived from it. The log never changes;
/// the caches can be dropped at any time.
pub struct Session {
    pub id: String,
    pub log: Arc<EventLog>,
    pub summary: LogSummary,
    table: DirectlyFollowsTable,
    projections: RwLock<HashMap<u64, Arc<FrequencyProjection>>>,
    last_params: Mutex<Option<DiscoveryParams>>,
}

impl Session {
    pub fn new(id: String, log: EventLog) -> Self {
        let table = DirectlyFollowsTable::build(&log);
        Session {
            id,
            summary: LogSummary::of(&log),
            log: Arc::new(log),
            table,
            projections: RwLock::default(),
            last_params: Mutex::default(),
        }
    }

    pub fn table(&self) -> &DirectlyFollowsTable {
        &self.table
    }

    pub fn last_params(&self) -> Option<DiscoveryParams> {
        *self.last_params.lock().unwrap()
    }

    pub fn remember(&self, params: DiscoveryParams) {
        *self.last_params.lock().unwrap() = Some(params);
    }

    pub fn projection(&self, t_freq: u64) -> Arc<FrequencyProjection> {
        if let Some(p) = self.projections.read().unwrap().get(&t_freq) {
            return p.clone();
        }
        let fresh = Arc::new(FrequencyProjection::new(&self.log, &self.table, t_freq));
        let mut cache = self.projections.write().unwrap();
        if cache.len() >= PROJECTION_CACHE {
            cache.clear();
        }
        cache.entry(t_freq).or_insert(fresh).clone()
    }

    pub fn causal_graph(&self, params: &GraphParams) -> Result<CausalGraph, ApiError> {
        discover_from_projection(&self.projection(params.t_freq), params).map_err(|e| ApiError::params(vec![e]))
    }

    pub fn hybrid_net(&self, params: &DiscoveryParams) -> Result<(CausalGraph, Discovery), ApiError> {
        let graph = self.causal_graph(&params.graph)?;
        let projection = self.projection(params.graph.t_freq);
        let discovery = discover_hybrid_net(&projection.log, &graph, params).map_err(|e| match e {
            DiscoveryError::Param(p) => ApiError::params(vec![p]),
            DiscoveryError::Net(n) => ApiError::Internal(n.to_string()),
        })?;
        Ok((graph, discovery))
    }
}

/// All sessions plus the optional directory their logs are stored in.
#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<BTreeMap<String, Arc<Session>>>,
    dir: Option<PathBuf>,
}

impl SessionStore {
    /// Opens `dir` (creating it) and loads every stored log.
    pub fn open(dir: Option<PathBuf>) -> std::io::Result<Self> {
        let store = SessionStore { sessions: RwLock::default(), dir };
        if let Some(dir) = &store.dir {
            std::fs::create_dir_all(dir)?;
            let mut sessions = store.sessions.write().unwrap();
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                let Some(id) = session_id_of(&path) else { continue };
                let bytes = std::fs::read(&path)?;
                let log = EventLog::from_json(&bytes)
                    .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
                sessions.insert(id.clone(), Arc::new(Session::new(id, log)));
            }
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.read().unwrap().keys().cloned().collect()
    }

    pub fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    /// Registers a new session, writing the log to disk first when persistent.
    pub fn insert(&self, log: EventLog) -> Result<Arc<Session>, ApiError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        if let Some(dir) = &self.dir {
            std::fs::write(dir.join(format!("{id}.json")), log.to_json())
                .map_err(|e| ApiError::Internal(format!("cannot store log: {e}")))?;
        }
        let session = Arc::new(Session::new(id.clone(), log));
        self.sessions.write().unwrap().insert(id, session.clone());
        Ok(session)
    }

    pub fn remove(&self, id: &str) -> Result<(), ApiError> {
        self.sessions.write().unwrap().remove(id).ok_or_else(|| ApiError::NotFound(id.to_string()))?;
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{id}.json"));
            if path.exists() {
                std::fs::remove_file(path).map_err(|e| ApiError::Internal(format!("cannot delete log: {e}")))?;
            }
        }
        Ok(())
    }
}

fn session_id_of(path: &Path) -> Option<String> {
    if path.extension()? != "json" {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    stem.chars().all(|c| c.is_ascii_alphanumeric() || c == '-').then(|| stem.to_string())
}
