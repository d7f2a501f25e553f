//! HTTP service under `/v1`.

use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

use cinemotion_core::planner::{Backend, Planner};
use cinemotion_core::render::{CameraIntrinsics, FrameFormat};

use crate::api::{self, ApiError, ErrorCode};
use crate::config::{ConfigError, ServiceConfig};

pub struct AppState {
    pub planner: Planner,
    pub intrinsics: CameraIntrinsics,
    pub default_backend: Backend,
    schema_etag: HeaderValue,
}

impl AppState {
    pub fn new(planner: Planner, intrinsics: CameraIntrinsics, default_backend: Backend) -> Self {
        let schema_etag = HeaderValue::from_str(&api::schema_etag()).expect("hex etag is a valid header");
        Self { planner, intrinsics, default_backend, schema_etag }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type Shared = State<Arc<AppState>>;

/// Runs blocking work (remote calls, rasterization) off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn schema(State(state): Shared, headers: HeaderMap) -> Response {
    let etag = state.schema_etag.clone();
    let matches = headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == "*" || t.trim() == etag.to_str().unwrap_or_default()));
    if matches {
        return (StatusCode::NOT_MODIFIED, [(header::ETAG, etag)]).into_response();
    }
    (
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json")), (header::ETAG, etag)],
        cinemotion_core::schema_json(),
    )
        .into_response()
}

async fn compile(body: Bytes) -> Result<Response, ApiError> {
    let req: api::CompileRequest = api::parse_body(&body)?;
    Ok(Json(api::compile(&req)?).into_response())
}

async fn plan(State(state): Shared, body: Bytes) -> Result<Json<api::PlanResponse>, ApiError> {
    let req: api::PlanBody = api::parse_body(&body)?;
    blocking(move || api::plan(&state.planner, &req, state.default_backend)).await.map(Json)
}

async fn refine(State(state): Shared, body: Bytes) -> Result<Json<api::RefineResponse>, ApiError> {
    let req: api::RefineBody = api::parse_body(&body)?;
    blocking(move || api::refine(&state.planner, &req)).await.map(Json)
}

async fn tag(body: Bytes) -> Result<Response, ApiError> {
    let req: api::TagBody = api::parse_body(&body)?;
    Ok(Json(api::tag(&req)?).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderQuery {
    /// `polylines` (default) or `frames` for a tar archive of images.
    #[serde(default)]
    format: Option<String>,
    #[serde(default)]
    image: Option<FrameFormat>,
}

async fn render(State(state): Shared, query: Result<Query<RenderQuery>, axum::extract::rejection::QueryRejection>, body: Bytes) -> Result<Response, ApiError> {
    let Query(query) = query.map_err(|e| ApiError::invalid_request(e.body_text()))?;
    let req: api::RenderBody = api::parse_body(&body)?;
    match query.format.as_deref().unwrap_or("polylines") {
        "polylines" => {
            let k = state.intrinsics;
            blocking(move || api::render(&req, &k)).await.map(|r| Json(r).into_response())
        }
        "frames" => {
            let k = state.intrinsics;
            let image = query.image.unwrap_or_default();
            let tar = blocking(move || api::render_archive(&req, &k, image)).await?;
            Ok((
                [
                    (header::CONTENT_TYPE, HeaderValue::from_static("application/x-tar")),
                    (header::CONTENT_DISPOSITION, HeaderValue::from_static("attachment; filename=\"frames.tar\"")),
                ],
                Body::from(tar),
            )
                .into_response())
        }
        other => Err(ApiError::invalid_request(format!("unknown format `{other}`; use `polylines` or `frames`"))),
    }
}

async fn health(State(state): Shared) -> Json<api::HealthResponse> {
    Json(api::health(&state.planner))
}

async fn not_found() -> ApiError {
    ApiError::new(ErrorCode::NotFound, "no such endpoint")
}

fn cors(origins: &[String]) -> Result<CorsLayer, ConfigError> {
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        let values = origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| ConfigError::Invalid(format!("bad CORS origin {o:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(values)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE, header::IF_NONE_MATCH])
        .expose_headers([header::ETAG]))
}

pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Result<Router, ConfigError> {
    let v1 = Router::new()
        .route("/schema", get(schema))
        .route("/compile", post(compile))
        .route("/plan", post(plan))
        .route("/refine", post(refine))
        .route("/tag", post(tag))
        .route("/render", post(render))
        .route("/health", get(health));
    Ok(Router::new().nest("/v1", v1).fallback(not_found).with_state(state).layer(cors(cors_origins)?))
}

/// Router for `config` with an already-built planner.
pub fn app(config: &ServiceConfig, planner: Planner) -> Result<Router, ConfigError> {
    let state = Arc::new(AppState::new(planner, config.intrinsics, config.planner.default_backend));
    router(state, &config.cors_origins)
}

/// Binds and serves until ctrl-c.
pub async fn serve(config: ServiceConfig, planner: Planner) -> std::io::Result<()> {
    let app = app(&config, planner).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
