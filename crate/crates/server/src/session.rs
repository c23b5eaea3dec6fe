use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use cubeslide::config::{ConfigDoc, LabeledConfig, Rules};
use cubeslide::moves::{Move, MoveEngine};
use lru::LruCache;
use serde::Serialize;

pub struct Session {
    pub id: String,
    pub rules: Rules,
    pub engine: Arc<MoveEngine>,
    pub scramble: LabeledConfig,
    pub current: LabeledConfig,
    pub target: LabeledConfig,
    pub history: Vec<Move>,
    pub stuck: Vec<u8>,
    /// Known when the scramble was made by legal moves or a search settled it.
    pub solvable: Option<bool>,
    pub created_at: u64,
    pub touched: Instant,
}

#[derive(Serialize)]
pub struct SessionView {
    pub id: String,
    pub rules: Rules,
    pub current: ConfigDoc,
    pub target: ConfigDoc,
    pub legal_moves: Vec<Move>,
    pub solved: bool,
    pub stuck: Vec<u8>,
    pub history: Vec<Move>,
    pub solvable: Option<bool>,
    pub created_at: u64,
}

impl Session {
    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            rules: self.rules,
            current: ConfigDoc::labeled(&self.current, Some(self.rules.k)),
            target: ConfigDoc::labeled(&self.target, Some(self.rules.k)),
            legal_moves: self.engine.legal_moves(&self.current),
            solved: self.current == self.target,
            stuck: self.stuck.clone(),
            history: self.history.clone(),
            solvable: self.solvable,
            created_at: self.created_at,
        }
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub type SessionRef = Arc<tokio::sync::Mutex<Session>>;

/// In-memory sessions, least recently used evicted first, expired after a
/// fixed idle time.
pub struct SessionStore {
    inner: Mutex<LruCache<String, SessionRef>>,
    ttl: Duration,
}

impl SessionStore {
    pub fn new(capacity: usize, ttl: Duration) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).expect("nonzero");
        SessionStore { inner: Mutex::new(LruCache::new(cap)), ttl }
    }

    pub fn insert(&self, id: String, s: SessionRef) {
        self.inner.lock().expect("store lock").put(id, s);
    }

    pub fn get(&self, id: &str) -> Option<SessionRef> {
        let mut inner = self.inner.lock().expect("store lock");
        let s = inner.get(id)?.clone();
        // try_lock keeps the store lock short; a busy session is live anyway
        if let Ok(mut g) = s.try_lock() {
            if g.touched.elapsed() > self.ttl {
                drop(g);
                inner.pop(id);
                return None;
            }
            g.touched = Instant::now();
        }
        Some(s)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
