//! HTTP/JSON routes.
//!
//! ```text
//! POST  /sessions                          notebook bytes -> {session_id, cards}
//! GET   /sessions/{id}/overview            -> cards
//! GET   /sessions/{id}/state               -> StateView
//! PUT   /sessions/{id}/outline             OutlineInput -> DiffSummary
//! POST  /sessions/{id}/recommend           {item_id} -> {topics}
//! POST  /sessions/{id}/generate            GenerateRequest -> GenerateOutcome
//! POST  /sessions/{id}/keywords:refresh    -> {applied}
//! POST  /sessions/{id}/slides/{sid}/cells  {cell_ids, mode} -> Slide
//! POST  /sessions/{id}/slides:manual       {cell_ids, insert_after?} -> {slide, item}
//! PATCH /sessions/{id}/slides/{sid}        SlideEdit -> StateView
//! GET   /sessions/{id}/linkage?ref=...     -> LinkTargets
//! GET   /sessions/{id}/export.pptx
//! GET   /sessions/{id}/export.html?present=1
//! ```
//!
//! Errors are `{"error": {"code", "message"}}` with the code named after the
//! library error. Store calls run on the blocking pool so a slow model call
//! never stalls other sessions.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ids::{CellId, ItemId, SessionId, SlideId};
use crate::notebook::OverviewCard;
use crate::outline::OutlineItem;
use crate::session::{BindMode, GenerateRequest, OutlineInput, SessionError, SlideEdit, Store};
use crate::slides::Slide;

/// Upload cap; notebooks with many charts run to tens of megabytes.
pub const MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn internal(message: impl ToString) -> Self {
        Self { status: StatusCode::INTERNAL_SERVER_ERROR, code: "Internal".into(), message: message.to_string() }
    }
}

fn status_for(code: &str) -> StatusCode {
    match code {
        "UnknownSession" | "UnknownSlide" | "UnknownCell" | "UnknownItem" | "UnknownRef" => StatusCode::NOT_FOUND,
        "NoCellsSelected" | "InvalidRestore" | "InvalidEdit" | "GeometryViolation" | "MalformedOutline"
        | "MalformedNotebook" | "InvalidParams" => StatusCode::UNPROCESSABLE_ENTITY,
        "EmptyDeck" | "Overflow" => StatusCode::CONFLICT,
        "BackendFailure" | "UnparseableResponse" => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let code = e.code();
        Self { status: status_for(code), code: code.into(), message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": {"code": self.code, "message": self.message}}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, SessionError> + Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?.map_err(ApiError::from)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: SessionId,
    pub cards: Vec<OverviewCard>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecommendRequest {
    pub item_id: ItemId,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Recommendations {
    pub topics: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BindRequest {
    pub cell_ids: Vec<CellId>,
    pub mode: BindMode,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManualRequest {
    pub cell_ids: Vec<CellId>,
    #[serde(default)]
    pub insert_after: Option<SlideId>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManualSlide {
    pub slide: Slide,
    pub item: OutlineItem,
}

#[derive(Debug, Deserialize)]
struct LinkageQuery {
    #[serde(rename = "ref")]
    reference: String,
}

#[derive(Debug, Deserialize)]
struct HtmlQuery {
    #[serde(default)]
    present: Option<String>,
}

async fn create(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult<(StatusCode, Json<Created>)> {
    let worker = store.clone();
    let (session_id, cards) = blocking(move || worker.create_session(&body)).await?;
    // Model keywords and topic candidates are filled in behind the response.
    let id = session_id.clone();
    tokio::task::spawn_blocking(move || {
        if let Err(e) = store.refresh_keywords(&id) {
            tracing::warn!(session = %id, "keyword refresh failed: {e}");
        }
        if let Err(e) = store.candidates(&id) {
            tracing::warn!(session = %id, "topic extraction failed: {e}");
        }
    });
    Ok((StatusCode::CREATED, Json(Created { session_id, cards })))
}

async fn overview(State(store): State<Arc<Store>>, Path(id): Path<SessionId>) -> ApiResult<Json<Vec<OverviewCard>>> {
    Ok(Json(blocking(move || store.overview(&id)).await?))
}

async fn view(State(store): State<Arc<Store>>, Path(id): Path<SessionId>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || store.view(&id)).await?))
}

async fn outline(
    State(store): State<Arc<Store>>,
    Path(id): Path<SessionId>,
    Json(input): Json<OutlineInput>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || store.replace_outline(&id, input)).await?))
}

async fn recommend(
    State(store): State<Arc<Store>>,
    Path(id): Path<SessionId>,
    Json(req): Json<RecommendRequest>,
) -> ApiResult<Json<Recommendations>> {
    let topics = blocking(move || store.recommend(&id, &req.item_id)).await?;
    Ok(Json(Recommendations { topics }))
}

async fn generate(
    State(store): State<Arc<Store>>,
    Path(id): Path<SessionId>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    // An empty body means "current parameters".
    let request: GenerateRequest = if body.iter().all(u8::is_ascii_whitespace) {
        GenerateRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code: "InvalidParams".into(),
            message: e.to_string(),
        })?
    };
    Ok(Json(blocking(move || store.generate(&id, request)).await?))
}

async fn refresh_keywords(State(store): State<Arc<Store>>, Path(id): Path<SessionId>) -> ApiResult<impl IntoResponse> {
    let applied = blocking(move || store.refresh_keywords(&id)).await?;
    Ok(Json(json!({ "applied": applied })))
}

async fn bind(
    State(store): State<Arc<Store>>,
    Path((id, sid)): Path<(SessionId, SlideId)>,
    Json(req): Json<BindRequest>,
) -> ApiResult<Json<Slide>> {
    Ok(Json(blocking(move || store.bind_cells(&id, &sid, &req.cell_ids, req.mode)).await?))
}

async fn manual(
    State(store): State<Arc<Store>>,
    Path(id): Path<SessionId>,
    Json(req): Json<ManualRequest>,
) -> ApiResult<(StatusCode, Json<ManualSlide>)> {
    let (slide, item) = blocking(move || store.add_manual_slide(&id, &req.cell_ids, req.insert_after.as_ref())).await?;
    Ok((StatusCode::CREATED, Json(ManualSlide { slide, item })))
}

async fn edit(
    State(store): State<Arc<Store>>,
    Path((id, sid)): Path<(SessionId, SlideId)>,
    Json(edit): Json<SlideEdit>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || store.edit_slide(&id, &sid, edit)).await?))
}

async fn linkage(
    State(store): State<Arc<Store>>,
    Path(id): Path<SessionId>,
    Query(q): Query<LinkageQuery>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || store.linkage(&id, &q.reference)).await?))
}

async fn export_pptx(State(store): State<Arc<Store>>, Path(id): Path<SessionId>) -> ApiResult<Response> {
    let bytes = blocking(move || store.export_pptx(&id)).await?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/vnd.openxmlformats-officedocument.presentationml.presentation"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"deck.pptx\""),
        ],
        bytes,
    )
        .into_response())
}

async fn export_html(
    State(store): State<Arc<Store>>,
    Path(id): Path<SessionId>,
    Query(q): Query<HtmlQuery>,
) -> ApiResult<Response> {
    let present = matches!(q.present.as_deref(), Some("1" | "true"));
    let html = blocking(move || store.export_html(&id, present)).await?;
    Ok(([(header::CONTENT_TYPE, "text/html; charset=utf-8")], html).into_response())
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/overview", get(overview))
        .route("/sessions/{id}/state", get(view))
        .route("/sessions/{id}/outline", put(outline))
        .route("/sessions/{id}/recommend", post(recommend))
        .route("/sessions/{id}/generate", post(generate))
        .route("/sessions/{id}/keywords:refresh", post(refresh_keywords))
        .route("/sessions/{id}/slides/{sid}/cells", post(bind))
        .route("/sessions/{id}/slides:manual", post(manual))
        .route("/sessions/{id}/slides/{sid}", patch(edit))
        .route("/sessions/{id}/linkage", get(linkage))
        .route("/sessions/{id}/export.pptx", get(export_pptx))
        .route("/sessions/{id}/export.html", get(export_html))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(store)
}

/// Serves the router until the process is stopped.
pub async fn serve(addr: SocketAddr, store: Arc<Store>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store)).await
}
