//! HTTP API for the review UI.
//!
//! | method | path                 | body / query                                   |
//! |--------|----------------------|------------------------------------------------|
//! | GET    | `/api/examples`      | `offset`, `limit`, `category`                  |
//! | GET    | `/api/examples/{id}` |                                                |
//! | POST   | `/api/ratings`       | `{example_id, clue_index, rating, annotator}`  |
//! | GET    | `/api/summary`       | `annotator`, `model`                           |
//! | POST   | `/api/puzzles`       | `{entry_ids, rows?, cols?, seed?}`             |
//! | GET    | `/api/puzzles/{id}`  |                                                |
//!
//! Rating writes go through one lock, and each is in the ledger file before
//! the response is sent.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::future::Future;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use eduverba_core::dataset::{config_hash, read_jsonl};
use eduverba_core::grid::{assemble, number_cells, AssembleConfig, ClueLists, CrosswordLayout};
use eduverba_core::rating::{RatingError, RatingFilter, RatingSummary};
use eduverba_core::{ClueInstructExample, Rating, RatingRecord, RatingStore};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tower_http::services::ServeDir;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("cannot read corpus {path}: {message}")]
    CorpusUnreadable { path: String, message: String },
    #[error(transparent)]
    Ledger(#[from] RatingError),
    #[error("server io error: {0}")]
    Io(#[from] std::io::Error),
}

pub struct AppState {
    corpus: Vec<ClueInstructExample>,
    index: HashMap<String, usize>,
    ledger: Mutex<RatingStore>,
    puzzles: Mutex<BTreeMap<String, Puzzle>>,
    grid: AssembleConfig,
}

impl AppState {
    pub fn load(corpus_path: &Path, ledger_path: &Path, grid: AssembleConfig) -> Result<Self, ServeError> {
        let corpus: Vec<ClueInstructExample> = read_jsonl(corpus_path).map_err(|e| ServeError::CorpusUnreadable {
            path: corpus_path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::new(corpus, ledger_path, grid)
    }

    pub fn new(corpus: Vec<ClueInstructExample>, ledger_path: &Path, grid: AssembleConfig) -> Result<Self, ServeError> {
        let index: HashMap<String, usize> = corpus.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
        let known: HashSet<String> = index.keys().cloned().collect();
        let ledger = RatingStore::open(ledger_path, Some(known))?;
        if ledger.dropped_tail() {
            log::warn!("ledger had an incomplete last record; it was dropped");
        }
        Ok(AppState {
            corpus,
            index,
            ledger: Mutex::new(ledger),
            puzzles: Mutex::new(BTreeMap::new()),
            grid,
        })
    }

    fn example(&self, id: &str) -> Option<&ClueInstructExample> {
        self.index.get(id).map(|&i| &self.corpus[i])
    }

    fn view(&self, ex: &ClueInstructExample) -> ExampleView {
        let ledger = self.ledger.lock().expect("ledger lock");
        let ratings = ledger
            .current(&RatingFilter::default())
            .into_iter()
            .filter(|r| r.example_id == ex.id)
            .cloned()
            .collect();
        ExampleView {
            example: ex.clone(),
            ratings,
        }
    }

    /// The clue for a puzzle entry: the best-rated one, or the first.
    fn puzzle_clue(&self, ex: &ClueInstructExample) -> String {
        let ledger = self.ledger.lock().expect("ledger lock");
        let best = ledger
            .current(&RatingFilter::default())
            .into_iter()
            .filter(|r| r.example_id == ex.id && !matches!(r.rating, Rating::Skip | Rating::Empty))
            .min_by_key(|r| (r.rating, r.clue_index))
            .map_or(0, |r| r.clue_index);
        ex.clues[best.min(ex.clues.len().saturating_sub(1))].clone()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleView {
    #[serde(flatten)]
    pub example: ClueInstructExample,
    /// Current judgments for this example, all annotators.
    pub ratings: Vec<RatingRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExamplePage {
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub items: Vec<ExampleView>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingRequest {
    pub example_id: String,
    pub clue_index: usize,
    pub rating: String,
    pub annotator: String,
    #[serde(default)]
    pub model: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryResponse {
    #[serde(flatten)]
    pub summary: RatingSummary,
    pub examples: usize,
    /// Examples with at least one current judgment under the filter.
    pub examples_rated: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PuzzleRequest {
    pub entry_ids: Vec<String>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Puzzle {
    pub id: String,
    pub entry_ids: Vec<String>,
    pub layout: CrosswordLayout,
    pub clues: ClueLists,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn not_found(what: &str, id: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("unknown {what} {id}"))
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    offset: Option<usize>,
    limit: Option<usize>,
    category: Option<String>,
}

const DEFAULT_LIMIT: usize = 20;
const MAX_LIMIT: usize = 500;

async fn list_examples(State(st): State<Arc<AppState>>, Query(q): Query<PageQuery>) -> Json<ExamplePage> {
    let offset = q.offset.unwrap_or(0);
    let limit = q.limit.unwrap_or(DEFAULT_LIMIT).min(MAX_LIMIT);
    let matching: Vec<&ClueInstructExample> = st
        .corpus
        .iter()
        .filter(|e| q.category.as_deref().is_none_or(|c| e.category == c))
        .collect();
    let items = matching.iter().skip(offset).take(limit).map(|e| st.view(e)).collect();
    Json(ExamplePage {
        total: matching.len(),
        offset,
        limit,
        items,
    })
}

async fn get_example(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<ExampleView>, ApiError> {
    let ex = st.example(&id).ok_or_else(|| not_found("example", &id))?;
    Ok(Json(st.view(ex)))
}

async fn post_rating(State(st): State<Arc<AppState>>, Json(req): Json<RatingRequest>) -> Result<(StatusCode, Json<Vec<RatingRecord>>), ApiError> {
    let bad = |m: String| ApiError(StatusCode::BAD_REQUEST, m);
    let rating: Rating = req.rating.parse().map_err(|e: RatingError| bad(e.to_string()))?;
    if st.example(&req.example_id).is_none() {
        return Err(not_found("example", &req.example_id));
    }
    if req.annotator.trim().is_empty() {
        return Err(bad("annotator is required".into()));
    }
    let mut ledger = st.ledger.lock().expect("ledger lock");
    let before = ledger.history().len();
    let res = if rating == Rating::Skip {
        ledger.record_skip(&req.example_id, &req.annotator, req.model.as_deref())
    } else {
        let mut rec = RatingRecord::new(&req.example_id, req.clue_index, rating, &req.annotator);
        rec.model = req.model.clone();
        ledger.record(rec)
    };
    match res {
        Ok(()) => Ok((StatusCode::CREATED, Json(ledger.history()[before..].to_vec()))),
        Err(RatingError::UnknownExample(id)) => Err(not_found("example", &id)),
        Err(e @ (RatingError::InvalidIndex(_) | RatingError::MachineOnly | RatingError::UnknownRating(_))) => Err(bad(e.to_string())),
        Err(e) => Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    }
}

async fn summary(State(st): State<Arc<AppState>>, Query(filter): Query<RatingFilter>) -> Json<SummaryResponse> {
    let ledger = st.ledger.lock().expect("ledger lock");
    let rated: HashSet<&str> = ledger.current(&filter).into_iter().map(|r| r.example_id.as_str()).collect();
    Json(SummaryResponse {
        summary: ledger.summary(&filter),
        examples: st.corpus.len(),
        examples_rated: rated.len(),
    })
}

async fn create_puzzle(State(st): State<Arc<AppState>>, Json(req): Json<PuzzleRequest>) -> Result<(StatusCode, Json<Puzzle>), ApiError> {
    let mut entries = Vec::new();
    for id in &req.entry_ids {
        let ex = st.example(id).ok_or_else(|| not_found("example", id))?;
        entries.push((ex.keyword.clone(), st.puzzle_clue(ex)));
    }
    let cfg = AssembleConfig {
        max_rows: req.rows.unwrap_or(st.grid.max_rows),
        max_cols: req.cols.unwrap_or(st.grid.max_cols),
        seed: req.seed.unwrap_or(st.grid.seed),
        ..st.grid.clone()
    };
    let mut layout = assemble(&entries, &cfg).map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let clues = number_cells(&mut layout);
    let id = config_hash(&(&req.entry_ids, cfg.max_rows, cfg.max_cols, cfg.seed))[..16].to_string();
    let puzzle = Puzzle {
        id: id.clone(),
        entry_ids: req.entry_ids,
        layout,
        clues,
    };
    st.puzzles.lock().expect("puzzle lock").insert(id, puzzle.clone());
    Ok((StatusCode::CREATED, Json(puzzle)))
}

async fn get_puzzle(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<Puzzle>, ApiError> {
    st.puzzles
        .lock()
        .expect("puzzle lock")
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| not_found("puzzle", &id))
}

pub fn router(state: Arc<AppState>, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/examples", get(list_examples))
        .route("/api/examples/{id}", get(get_example))
        .route("/api/ratings", post(post_rating))
        .route("/api/summary", get(summary))
        .route("/api/puzzles", post(create_puzzle))
        .route("/api/puzzles/{id}", get(get_puzzle))
        .with_state(state);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr`, reporting an occupied port as [`ServeError::PortInUse`].
pub async fn bind(addr: SocketAddr) -> Result<tokio::net::TcpListener, ServeError> {
    tokio::net::TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServeError::PortInUse(addr.port()),
        _ => ServeError::Io(e),
    })
}

/// Serves until `shutdown` resolves, then flushes the ledger.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    assets: Option<PathBuf>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    axum::serve(listener, router(state.clone(), assets))
        .with_graceful_shutdown(shutdown)
        .await?;
    state.ledger.lock().expect("ledger lock").sync()?;
    Ok(())
}
