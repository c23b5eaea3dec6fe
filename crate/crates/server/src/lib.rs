//! JSON API for interactive play: sessions, moves, hints and solvability,
//! plus a couple of analysis endpoints.

pub mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cubeslide::classify::{classify_unlabeled, classify_with, Classification, Kind};
use cubeslide::config::{ConfigDoc, LabeledConfig, Rules};
use cubeslide::cube::Vertex;
use cubeslide::formulas::sdk_table;
use cubeslide::moves::{Move, MoveEngine};
use cubeslide::solver::{self, SolveStatus};
use cubeslide::unlabeled::MaskSpace;
use cubeslide::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use session::{unix_now, Session, SessionRef, SessionStore};

pub const DEFAULT_CAPACITY: usize = 10_000;
pub const DEFAULT_TTL: Duration = Duration::from_secs(24 * 3600);
/// Configurations a single hint or solvability search may store.
pub const DEFAULT_SEARCH_BUDGET: u64 = 2_000_000;
/// Largest unlabeled space scanned for stuck tokens or a canonical target.
const MASK_SCAN_LIMIT: u64 = 2_000_000;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub capacity: usize,
    pub ttl: Duration,
    pub search_budget: u64,
    /// Allowed browser origins; empty means any localhost origin.
    pub cors_origins: Vec<String>,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            capacity: DEFAULT_CAPACITY,
            ttl: DEFAULT_TTL,
            search_budget: DEFAULT_SEARCH_BUDGET,
            cors_origins: Vec::new(),
            static_dir: None,
        }
    }
}

pub struct AppState {
    sessions: SessionStore,
    engines: Mutex<HashMap<(u32, u32), Arc<MoveEngine>>>,
    targets: Mutex<HashMap<Rules, LabeledConfig>>,
    search_budget: u64,
}

impl AppState {
    fn engine(&self, d: u32, k: u32) -> Result<Arc<MoveEngine>, ApiError> {
        let mut engines = self.engines.lock().expect("engine cache");
        if let Some(e) = engines.get(&(d, k)) {
            return Ok(e.clone());
        }
        let e = Arc::new(MoveEngine::new(d, k)?);
        engines.insert((d, k), e.clone());
        Ok(e)
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    extra: Option<serde_json::Value>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), extra: None }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Budget(_) => StatusCode::TOO_EARLY,
            Error::IllegalMove(_) => StatusCode::CONFLICT,
            Error::Unsolvable => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(extra) = self.extra {
            body["state"] = extra;
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Deserialize)]
#[serde(untagged)]
pub enum Scramble {
    Random {
        #[serde(alias = "random-steps")]
        random_steps: u32,
        #[serde(default)]
        seed: Option<u64>,
    },
    Explicit { config: ConfigDoc },
}

#[derive(Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Named(String),
    Explicit { config: ConfigDoc },
}

#[derive(Deserialize)]
pub struct NewSession {
    pub d: u32,
    pub k: u32,
    pub l: u32,
    pub scramble: Option<Scramble>,
    pub target: Option<TargetSpec>,
}

#[derive(Deserialize)]
pub struct MoveRequest {
    pub label: u8,
    pub to: String,
}

#[derive(Serialize)]
pub struct HintView {
    #[serde(rename = "move")]
    pub mv: Option<Move>,
    pub remaining: u32,
}

#[derive(Serialize)]
pub struct SolvableView {
    pub solvable: bool,
    pub distance: Option<u32>,
}

pub fn router(config: &ServerConfig) -> Router {
    router_with_state(config, new_state(config))
}

pub fn router_with_state(config: &ServerConfig, state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/move", post(make_move))
        .route("/api/session/{id}/hint", get(get_hint))
        .route("/api/session/{id}/solvable", get(get_solvable))
        .route("/api/classify", post(post_classify))
        .route("/api/sdk", get(get_sdk))
        .with_state(state)
        .layer(cors(&config.cors_origins));
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub fn new_state(config: &ServerConfig) -> Arc<AppState> {
    Arc::new(AppState {
        sessions: SessionStore::new(config.capacity, config.ttl),
        engines: Mutex::new(HashMap::new()),
        targets: Mutex::new(HashMap::new()),
        search_budget: config.search_budget,
    })
}

fn cors(origins: &[String]) -> CorsLayer {
    let allow = if origins.is_empty() {
        AllowOrigin::predicate(|origin: &HeaderValue, _| {
            let o = origin.as_bytes();
            o.starts_with(b"http://localhost") || o.starts_with(b"http://127.0.0.1")
        })
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
        .allow_headers([axum::http::header::CONTENT_TYPE])
}

/// Serve until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let app = router(&config);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await
}

/// Blocking entry point for the CLI.
pub fn serve_blocking(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(serve(addr, config))
}

/// First mobile configuration in colex mask order with labels ascending by
/// vertex; falls back to any movable, then any configuration.
pub fn canonical_target(engine: &MoveEngine, rules: Rules) -> LabeledConfig {
    let space = MaskSpace::new(rules.vertices(), rules.tokens());
    let mut movable = None;
    let mut scanned = 0u64;
    for m in space.masks() {
        if scanned >= MASK_SCAN_LIMIT {
            break;
        }
        scanned += 1;
        if engine.is_stuck(m) {
            continue;
        }
        movable.get_or_insert(m);
        if classify_unlabeled(engine, m).0 == Kind::Mobile {
            return LabeledConfig::from_mask(rules.d, m).expect("valid mask");
        }
    }
    let m = movable.unwrap_or_else(|| space.masks().next().unwrap_or(0));
    LabeledConfig::from_mask(rules.d, m).expect("valid mask")
}

fn stuck_labels(engine: &MoveEngine, rules: &Rules, cfg: &LabeledConfig) -> Vec<u8> {
    if MaskSpace::new(rules.vertices(), rules.tokens()).count() > MASK_SCAN_LIMIT {
        return Vec::new();
    }
    let (kind, always) = classify_unlabeled(engine, cfg.occupancy());
    if kind == Kind::Mobile {
        return Vec::new();
    }
    let mut out: Vec<u8> = cfg.tokens().filter(|(v, _)| always >> v.bits() & 1 == 1).map(|(_, c)| c).collect();
    out.sort_unstable();
    out
}

fn parse_config(doc: &ConfigDoc, rules: &Rules) -> Result<LabeledConfig, ApiError> {
    let c = doc.to_labeled()?;
    if c.dim() != rules.d || c.num_empty() != rules.l {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("configuration does not have d={} and l={}", rules.d, rules.l),
        ));
    }
    Ok(c)
}

fn random_scramble(engine: &MoveEngine, target: &LabeledConfig, steps: u32, rng: &mut StdRng) -> LabeledConfig {
    let mut c = *target;
    let mut done = 0;
    // keep going past `steps` until the board differs, within reason
    while done < steps || (c == *target && done < steps + 64) {
        let moves = engine.legal_moves(&c);
        if moves.is_empty() {
            break;
        }
        let m = moves[rng.gen_range(0..moves.len())];
        c = engine.apply_move(&c, &m).expect("legal move");
        done += 1;
    }
    c
}

async fn create_session(State(st): State<Arc<AppState>>, Json(req): Json<NewSession>) -> ApiResult<session::SessionView> {
    let rules = Rules::new(req.d, req.k, req.l)?;
    let engine = st.engine(rules.d, rules.k)?;
    let budget = st.search_budget;
    let st2 = st.clone();
    let session = tokio::task::spawn_blocking(move || -> Result<Session, ApiError> {
        let target = match &req.target {
            None => canonical_for(&st2, &engine, rules),
            Some(TargetSpec::Named(n)) if n == "canonical" => canonical_for(&st2, &engine, rules),
            Some(TargetSpec::Named(n)) => {
                return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown target {n:?}")))
            }
            Some(TargetSpec::Explicit { config }) => parse_config(config, &rules)?,
        };
        let (scramble, solvable) = match &req.scramble {
            None => (random_scramble(&engine, &target, 20, &mut StdRng::from_entropy()), Some(true)),
            Some(Scramble::Random { random_steps, seed }) => {
                let mut rng = match seed {
                    Some(s) => StdRng::seed_from_u64(*s),
                    None => StdRng::from_entropy(),
                };
                (random_scramble(&engine, &target, *random_steps, &mut rng), Some(true))
            }
            Some(Scramble::Explicit { config }) => {
                let start = parse_config(config, &rules)?;
                let r = solver::solve(&engine, &start, &target, budget)?;
                let solvable = match r.status {
                    SolveStatus::Solved => Some(true),
                    SolveStatus::UnsolvableDifferentComponent => Some(false),
                    SolveStatus::UnknownBudget => None,
                };
                (start, solvable)
            }
        };
        Ok(Session {
            id: uuid::Uuid::new_v4().simple().to_string(),
            rules,
            stuck: stuck_labels(&engine, &rules, &scramble),
            engine,
            scramble,
            current: scramble,
            target,
            history: Vec::new(),
            solvable,
            created_at: unix_now(),
            touched: Instant::now(),
        })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let view = session.view();
    st.sessions.insert(session.id.clone(), Arc::new(tokio::sync::Mutex::new(session)));
    Ok(Json(view))
}

fn canonical_for(st: &AppState, engine: &MoveEngine, rules: Rules) -> LabeledConfig {
    if let Some(t) = st.targets.lock().expect("target cache").get(&rules) {
        return *t;
    }
    let t = canonical_target(engine, rules);
    st.targets.lock().expect("target cache").insert(rules, t);
    t
}

fn lookup(st: &AppState, id: &str) -> Result<SessionRef, ApiError> {
    st.sessions.get(id).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
}

async fn get_session(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<session::SessionView> {
    let s = lookup(&st, &id)?;
    let g = s.lock().await;
    Ok(Json(g.view()))
}

async fn make_move(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> ApiResult<session::SessionView> {
    let s = lookup(&st, &id)?;
    let mut g = s.lock().await;
    let to: Vertex = req.to.parse().map_err(ApiError::from)?;
    let conflict = |msg: String, g: &Session| ApiError {
        status: StatusCode::CONFLICT,
        message: msg,
        extra: serde_json::to_value(g.view()).ok(),
    };
    if to.dim() != g.rules.d {
        return Err(conflict(format!("vertex {to} has the wrong dimension"), &g));
    }
    let from = match g.current.position_of(req.label) {
        Some(v) => v,
        None => return Err(conflict(format!("no token labelled {}", req.label), &g)),
    };
    let m = match g.engine.find_move(&g.current, from, to) {
        Some(m) => m,
        None => return Err(conflict(format!("token {} cannot move to {to}", req.label), &g)),
    };
    let next = g.engine.apply_move(&g.current, &m)?;
    g.current = next;
    g.history.push(m);
    Ok(Json(g.view()))
}

async fn snapshot(st: &AppState, id: &str) -> Result<(Arc<MoveEngine>, LabeledConfig, LabeledConfig), ApiError> {
    let s = lookup(st, id)?;
    let g = s.lock().await;
    Ok((g.engine.clone(), g.current, g.target))
}

async fn get_hint(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<HintView> {
    let (engine, current, target) = snapshot(&st, &id).await?;
    let budget = st.search_budget;
    tokio::task::spawn_blocking(move || {
        let r = solver::solve(&engine, &current, &target, budget)?;
        match r.status {
            SolveStatus::Solved => {
                let remaining = r.length.unwrap_or(0);
                let mv = solver::hint(&engine, &current, &target, budget)?;
                Ok(Json(HintView { mv, remaining }))
            }
            SolveStatus::UnsolvableDifferentComponent => Err(ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                message: "target lies in a different component".into(),
                extra: Some(json!({ "solvable": false })),
            }),
            SolveStatus::UnknownBudget => Err(Error::Budget(budget).into()),
        }
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn get_solvable(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SolvableView> {
    let (engine, current, target) = snapshot(&st, &id).await?;
    let budget = st.search_budget;
    let view = tokio::task::spawn_blocking(move || -> Result<SolvableView, ApiError> {
        let r = solver::solve(&engine, &current, &target, budget)?;
        match r.status {
            SolveStatus::Solved => Ok(SolvableView { solvable: true, distance: r.length }),
            SolveStatus::UnsolvableDifferentComponent => Ok(SolvableView { solvable: false, distance: None }),
            SolveStatus::UnknownBudget => Err(Error::Budget(budget).into()),
        }
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    if let Ok(s) = lookup(&st, &id) {
        s.lock().await.solvable = Some(view.solvable);
    }
    Ok(Json(view))
}

#[derive(Deserialize)]
pub struct ClassifyRequest {
    pub config: ConfigDoc,
    pub k: Option<u32>,
}

async fn post_classify(State(st): State<Arc<AppState>>, Json(req): Json<ClassifyRequest>) -> ApiResult<Classification> {
    let k = req
        .k
        .or(req.config.k)
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "missing k"))?;
    let cfg = req.config.to_labeled()?;
    let engine = st.engine(cfg.dim(), k)?;
    let budget = st.search_budget;
    let c = tokio::task::spawn_blocking(move || classify_with(&engine, &cfg, budget))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(c))
}

#[derive(Deserialize)]
pub struct SdkQuery {
    pub d: u32,
    pub k: Option<u32>,
}

async fn get_sdk(Query(q): Query<SdkQuery>) -> Result<Json<serde_json::Value>, ApiError> {
    if q.d == 0 || q.d > 12 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "d must be in 1..=12"));
    }
    let rows: Vec<_> = sdk_table(q.d).into_iter().filter(|e| e.d == q.d && q.k.map_or(true, |k| e.k == k)).collect();
    if rows.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "k must be in 1..=d"));
    }
    Ok(Json(serde_json::to_value(rows).expect("serializable")))
}
