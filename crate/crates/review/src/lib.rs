//! HTTP API over an event store directory for the human review loop.
//!
//! | method | path                        | body / result                            |
//! |--------|-----------------------------|------------------------------------------|
//! | GET    | `/api/schema`               | grammar schema                           |
//! | GET    | `/api/review?page=&size=`   | pending items, `X-Total-Count` header    |
//! | GET    | `/api/review/{record}/{n}`  | one item                                 |
//! | POST   | `/api/review/{record}/{n}`  | resolution; 200, 400, 404 or 422         |
//! | GET    | `/api/progress`             | status counts                            |
//! | GET    | `/`                         | static review UI                         |
//!
//! Reads run concurrently; writes hold the store lock exclusively and answer
//! only after the correction is appended to the log.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, Request, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;
use tower_http::services::ServeDir;

use diario_core::grammar::CategoryPath;
use diario_core::review::{list_pending, progress, EditedAssignment, Progress, ReviewItem, ReviewResolution, Verdict};
use diario_core::store::{ApplyError, EventStore, FieldError, StoreError};
use diario_core::{CodedEvent, EventKey};

pub const TOKEN_HEADER: &str = "x-review-token";
pub const TOTAL_HEADER: &str = "x-total-count";
pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 500;

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub store_dir: PathBuf,
    /// Shared secret expected in `X-Review-Token` on every API call.
    pub token: Option<String>,
    /// Built UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

pub struct AppState {
    store: RwLock<EventStore>,
    config: ServiceConfig,
}

impl AppState {
    pub fn open(config: ServiceConfig) -> Result<Arc<Self>, StoreError> {
        let store = EventStore::load(&config.store_dir)?;
        Ok(Arc::new(AppState {
            store: RwLock::new(store),
            config,
        }))
    }

    pub async fn snapshot(&self) -> EventStore {
        self.store.read().await.clone()
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    errors: Vec<FieldError>,
}

fn error(status: StatusCode, message: impl Into<String>, errors: Vec<FieldError>) -> Response {
    (
        status,
        Json(ErrorBody {
            error: message.into(),
            errors,
        }),
    )
        .into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/schema", get(schema))
        .route("/review", get(pending))
        .route("/review/{record}/{n}", get(item).post(resolve))
        .route("/progress", get(progress_counts))
        .route_layer(middleware::from_fn_with_state(state.clone(), check_token))
        .with_state(state.clone());
    let app = Router::new().nest("/api", api);
    match &state.config.static_dir {
        Some(dir) if dir.is_dir() => app.fallback_service(ServeDir::new(dir)),
        _ => app.route("/", get(placeholder)),
    }
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn check_token(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if let Some(expected) = &state.config.token {
        let given = req.headers().get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return error(StatusCode::UNAUTHORIZED, "missing or wrong review token", vec![]);
        }
    }
    next.run(req).await
}

async fn placeholder() -> Html<&'static str> {
    Html(
        "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>diario review</title></head>\n\
         <body><h1>diario review service</h1>\n\
         <p>No UI assets configured. The JSON API is under <code>/api</code>:\n\
         <code>/api/schema</code>, <code>/api/review</code>, <code>/api/progress</code>.</p>\n\
         </body></html>\n",
    )
}

async fn schema(State(state): State<Arc<AppState>>) -> Response {
    let store = state.store.read().await;
    Json(store.schema()).into_response()
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    page: Option<usize>,
    size: Option<usize>,
}

async fn pending(State(state): State<Arc<AppState>>, query: Result<Query<PageQuery>, QueryRejection>) -> Response {
    let Ok(Query(q)) = query else {
        return error(StatusCode::BAD_REQUEST, "page and size must be positive integers", vec![]);
    };
    let page = q.page.unwrap_or(1);
    let size = q.size.unwrap_or(DEFAULT_PAGE_SIZE);
    if page == 0 || size == 0 || size > MAX_PAGE_SIZE {
        return error(
            StatusCode::BAD_REQUEST,
            format!("page must be >= 1 and size within 1..={MAX_PAGE_SIZE}"),
            vec![],
        );
    }
    let store = state.store.read().await;
    let page = list_pending(&store, page, size);
    let mut headers = HeaderMap::new();
    headers.insert(TOTAL_HEADER, HeaderValue::from(page.total));
    (headers, Json(page.items)).into_response()
}

fn parse_key(record: String, n: &str) -> Option<EventKey> {
    n.parse().ok().map(|n| EventKey::new(record, n))
}

async fn item(State(state): State<Arc<AppState>>, Path((record, n)): Path<(String, String)>) -> Response {
    let Some(key) = parse_key(record, &n) else {
        return error(StatusCode::NOT_FOUND, "no such event", vec![]);
    };
    let store = state.store.read().await;
    match store.get(&key) {
        Some(e) => Json(ReviewItem::of(e)).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no event {key}"), vec![]),
    }
}

async fn progress_counts(State(state): State<Arc<AppState>>) -> Json<Progress> {
    Json(progress(&*state.store.read().await))
}

/// Resolution body. The key comes from the URL; a key in the body must agree.
#[derive(Debug, Deserialize)]
struct ResolutionBody {
    record_id: Option<String>,
    ordinal: Option<u32>,
    verdict: Verdict,
    #[serde(default)]
    assignments: Vec<EditedAssignment>,
    #[serde(default)]
    cleared: Vec<CategoryPath>,
    verifier_id: String,
    timestamp: Option<String>,
}

#[derive(Debug, Serialize)]
struct Resolved<'a> {
    event: &'a CodedEvent,
    duplicate: bool,
    progress: Progress,
}

async fn resolve(
    State(state): State<Arc<AppState>>,
    Path((record, n)): Path<(String, String)>,
    body: Bytes,
) -> Response {
    let Some(key) = parse_key(record, &n) else {
        return error(StatusCode::NOT_FOUND, "no such event", vec![]);
    };
    let body: ResolutionBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) if e.is_data() => {
            let field = FieldError {
                field: "body".into(),
                path: None,
                message: e.to_string(),
            };
            return error(StatusCode::UNPROCESSABLE_ENTITY, "malformed resolution", vec![field]);
        }
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("invalid JSON: {e}"), vec![]),
    };
    let mut mismatched = Vec::new();
    if body.record_id.as_ref().is_some_and(|r| *r != key.record_id) {
        mismatched.push("record_id");
    }
    if body.ordinal.is_some_and(|o| o != key.ordinal) {
        mismatched.push("ordinal");
    }
    if !mismatched.is_empty() {
        let errors = mismatched
            .into_iter()
            .map(|f| FieldError {
                field: f.into(),
                path: None,
                message: "does not match the URL".into(),
            })
            .collect();
        return error(StatusCode::UNPROCESSABLE_ENTITY, "key mismatch", errors);
    }
    let resolution = ReviewResolution {
        record_id: key.record_id.clone(),
        ordinal: key.ordinal,
        verdict: body.verdict,
        assignments: body.assignments,
        cleared: body.cleared,
        verifier_id: body.verifier_id,
        timestamp: body
            .timestamp
            .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
    };

    let mut store = state.store.write().await;
    match store.apply_durable(&state.config.store_dir, &resolution) {
        Ok((event, duplicate)) => {
            let event = event.clone();
            let progress = progress(&store);
            Json(Resolved {
                event: &event,
                duplicate,
                progress,
            })
            .into_response()
        }
        Err(ApplyError::UnknownKey(k)) => error(StatusCode::NOT_FOUND, format!("no event {k}"), vec![]),
        Err(ApplyError::Invalid(errors)) => error(StatusCode::UNPROCESSABLE_ENTITY, "resolution rejected", errors),
        Err(e @ ApplyError::Io(_)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), vec![]),
    }
}
