//! HTTP front end for threshold exploration.
//!
//! Routes:
//!
//! - `POST /api/images` (PGM or PNG body) -> `201 {id, width, height}`
//! - `GET /api/images/{id}/histogram` -> `{counts, total}`
//! - `GET /api/images/{id}/threshold?method=M&p=..&edge_percentile=..` -> threshold result
//! - `GET /api/images/{id}/binary?t=T` -> PNG, or PGM when the `Accept`
//!   header asks for `image/x-portable-graymap`
//!
//! Errors are JSON `{error, message}` with status 400 (undecodable upload),
//! 404 (unknown id), 409 (no edges for emt), 413 (body too large) or 422
//! (bad method or parameter).

mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tower_http::cors::CorsLayer;

use thresh_core::io::{decode_image, encode_png_preview, write_pgm, PgmEncoding};
use thresh_core::{
    apply_threshold, compute_histogram, gray_level, select_threshold_with_histogram, Error,
    Method, MethodSpec, DEFAULT_EDGE_PERCENTILE, DEFAULT_P,
};

pub use store::{ImageStore, StoredImage};

pub const DEFAULT_PORT: u16 = 8080;
pub const PGM_MIME: &str = "image/x-portable-graymap";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_body_bytes: usize,
    pub max_images: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_body_bytes: 16 * 1024 * 1024,
            max_images: 64,
        }
    }
}

#[derive(Clone)]
struct AppState {
    store: Arc<ImageStore>,
}

pub fn router(config: &ServiceConfig) -> Router {
    let state = AppState {
        store: Arc::new(ImageStore::new(config.max_images)),
    };
    Router::new()
        .route("/api/images", post(upload))
        .route("/api/images/{id}/histogram", get(histogram))
        .route("/api/images/{id}/threshold", get(threshold))
        .route("/api/images/{id}/binary", get(binary))
        .layer(DefaultBodyLimit::max(config.max_body_bytes))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Bind `addr` and serve until ctrl-c.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(&config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no image with id {id}"))
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameter", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoEdges => ApiError::new(StatusCode::CONFLICT, "no_edges", e.to_string()),
            Error::Parameter(_) | Error::Domain(_) => ApiError::unprocessable(e.to_string()),
            Error::UnsupportedFormat(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "unsupported_format", e.to_string())
            }
            Error::UnsupportedDepth(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "unsupported_depth", e.to_string())
            }
            Error::CorruptStream(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "corrupt_stream", e.to_string())
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

#[derive(Serialize)]
struct Uploaded {
    id: String,
    width: usize,
    height: usize,
}

async fn upload(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    if body.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty_body", "request body is empty"));
    }
    let image = decode_image(&body).map_err(|e| match ApiError::from(e) {
        // anything that fails to decode is a bad upload, whatever the cause
        err if err.status != StatusCode::BAD_REQUEST => {
            ApiError::new(StatusCode::BAD_REQUEST, "corrupt_stream", err.message)
        }
        err => err,
    })?;
    let stored = state.store.insert(image);
    let body = Uploaded {
        id: stored.id.clone(),
        width: stored.image.width(),
        height: stored.image.height(),
    };
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<StoredImage>, ApiError> {
    state.store.get(id).ok_or_else(|| ApiError::not_found(id))
}

async fn histogram(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let stored = lookup(&state, &id)?;
    Ok(Json(compute_histogram(&stored.image)).into_response())
}

fn ratio_param(query: &HashMap<String, String>, name: &str, default: f64) -> Result<f64, ApiError> {
    match query.get(name) {
        None => Ok(default),
        Some(raw) => raw
            .parse::<f64>()
            .map_err(|_| ApiError::unprocessable(format!("{name}={raw} is not a number"))),
    }
}

/// Parse the automatic method and its parameters from a query string.
fn method_spec(query: &HashMap<String, String>) -> Result<MethodSpec, ApiError> {
    let raw = query
        .get("method")
        .ok_or_else(|| ApiError::unprocessable("missing method"))?;
    let method: Method = raw.parse()?;
    match method {
        Method::Mean => Ok(MethodSpec::Mean),
        Method::Hdt => Ok(MethodSpec::Hdt),
        Method::Ptile => Ok(MethodSpec::Ptile {
            p: ratio_param(query, "p", DEFAULT_P)?,
        }),
        Method::Emt => Ok(MethodSpec::Emt {
            edge_percentile: ratio_param(query, "edge_percentile", DEFAULT_EDGE_PERCENTILE)?,
        }),
        Method::Manual => Err(ApiError::unprocessable(
            "manual is not an automatic method; use /binary?t=",
        )),
    }
}

async fn threshold(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let stored = lookup(&state, &id)?;
    let spec = method_spec(&query)?;
    let hist = compute_histogram(&stored.image);
    let result = select_threshold_with_histogram(&stored.image, &hist, spec)?;
    Ok(Json(result).into_response())
}

fn wants_pgm(headers: &HeaderMap) -> bool {
    headers
        .get_all(header::ACCEPT)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .any(|v| v.contains(PGM_MIME) || v.contains("image/x-portable-anymap"))
}

async fn binary(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let stored = lookup(&state, &id)?;
    let raw = query.get("t").ok_or_else(|| ApiError::unprocessable("missing t"))?;
    let t = raw
        .parse::<i64>()
        .map_err(|_| ApiError::unprocessable(format!("t={raw} is not an integer")))
        .and_then(|t| gray_level(t).map_err(ApiError::from))?;
    let mask = apply_threshold(&stored.image, t);
    let (mime, bytes) = if wants_pgm(&headers) {
        (PGM_MIME, write_pgm(&mask, PgmEncoding::Binary))
    } else {
        ("image/png", encode_png_preview(&mask))
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}
