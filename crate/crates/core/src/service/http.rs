use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::convert::Infallible;
use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{FromRequestParts, Path, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get};
use axum::{Json, Router};
use futures::Stream;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::broadcast::error::RecvError;

use super::state::{Command, CommandError, Update, UpdateEvent};
use super::{NewProduct, NewWatchTopic, Service, ServiceError};
use crate::analytics::{TrackedPosition, DEFAULT_RADIUS_M, DEFAULT_SECTORS};
use crate::model::time::parse_flexible;
use crate::model::{GeoPoint, Message};

/// JSON error response: `{"error": {"status": 404, "message": "..."}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"status": self.status.as_u16(), "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::Command(CommandError::Invalid(_)) => StatusCode::BAD_REQUEST,
            ServiceError::Command(CommandError::Conflict(_)) => StatusCode::CONFLICT,
            ServiceError::Command(CommandError::NotFound(_)) => StatusCode::NOT_FOUND,
            ServiceError::Command(CommandError::Engine(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

/// Query string extractor that rejects unknown or malformed parameters
/// with a JSON 400. Target types use `deny_unknown_fields`.
struct StrictQuery<T>(T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequestParts<S> for StrictQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| Self(q.0))
            .map_err(|e: QueryRejection| ApiError::bad_request(e.body_text()))
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

type Svc = State<Arc<Service>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceParams {
    window_start: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlertParams {
    #[serde(default)]
    since_seq: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SinceParams {
    #[serde(default)]
    since: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GuidanceParams {
    lat: f64,
    lon: f64,
    radius_m: Option<f64>,
    sectors: Option<usize>,
}

/// A page of stream events after some `since`.
#[derive(Serialize)]
struct Page<'a> {
    events: Vec<&'a UpdateEvent>,
    /// Latest seq of the whole stream; pass it as the next `since`.
    last_seq: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackedBody {
    authors: BTreeSet<String>,
}

#[derive(Serialize)]
struct TrackedView {
    authors: BTreeSet<String>,
    positions: BTreeMap<String, TrackedPosition>,
}

async fn healthz(State(svc): Svc, StrictQuery(NoParams {}): StrictQuery<NoParams>) -> Json<serde_json::Value> {
    svc.read(|s| Json(json!({"status": "ok", "applied": s.applied, "last_seq": s.last_seq()})))
}

async fn surface(State(svc): Svc, StrictQuery(p): StrictQuery<SurfaceParams>) -> Result<Response, ApiError> {
    let at = match p.window_start {
        Some(raw) => Some(parse_flexible(&raw).map_err(|e| ApiError::bad_request(e.to_string()))?),
        None => None,
    };
    Ok(svc.read(|s| Json(s.engine.surface(at)).into_response()))
}

async fn alerts(State(svc): Svc, StrictQuery(p): StrictQuery<AlertParams>) -> Response {
    svc.read(|s| {
        let events = s.events_since(p.since_seq).iter().filter(|e| matches!(e.update, Update::Alert(_))).collect();
        Json(Page { events, last_seq: s.last_seq() }).into_response()
    })
}

async fn emerging(State(svc): Svc, StrictQuery(NoParams {}): StrictQuery<NoParams>) -> Response {
    svc.read(|s| Json(s.engine.emerging()).into_response())
}

async fn snapshot(State(svc): Svc, StrictQuery(NoParams {}): StrictQuery<NoParams>) -> Response {
    svc.read(|s| Json(s.engine.snapshot()).into_response())
}

async fn list_watch_topics(State(svc): Svc, StrictQuery(NoParams {}): StrictQuery<NoParams>) -> Response {
    svc.read(|s| Json(s.watch_topics.values().collect::<Vec<_>>()).into_response())
}

async fn create_watch_topic(
    State(svc): Svc,
    StrictQuery(NoParams {}): StrictQuery<NoParams>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let topic: NewWatchTopic = parse_body(&body)?;
    let label = topic.label.clone();
    svc.submit(Command::CreateWatchTopic { topic })?;
    let created = svc.read(|s| s.watch_topics.values().find(|t| t.label == label).cloned());
    let created = created.ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "watch topic removed concurrently"))?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn delete_watch_topic(
    State(svc): Svc,
    Path(id): Path<String>,
    StrictQuery(NoParams {}): StrictQuery<NoParams>,
) -> Result<StatusCode, ApiError> {
    svc.submit(Command::DeleteWatchTopic { id })?;
    Ok(StatusCode::NO_CONTENT)
}

async fn watch_topic_feed(
    State(svc): Svc,
    Path(id): Path<String>,
    StrictQuery(p): StrictQuery<SinceParams>,
) -> Result<Response, ApiError> {
    svc.read(|s| {
        let topic = s.watch_topics.get(&id).ok_or_else(|| ApiError::not_found(format!("no watch topic `{id}`")))?;
        let events = s.message_feed(p.since, |m| topic.matches(m)).collect();
        Ok(Json(Page { events, last_seq: s.last_seq() }).into_response())
    })
}

async fn list_products(State(svc): Svc, StrictQuery(NoParams {}): StrictQuery<NoParams>) -> Response {
    svc.read(|s| Json(s.products.values().collect::<Vec<_>>()).into_response())
}

async fn create_product(
    State(svc): Svc,
    StrictQuery(NoParams {}): StrictQuery<NoParams>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let product: NewProduct = parse_body(&body)?;
    let name = product.name.clone();
    svc.submit(Command::CreateProduct { product })?;
    let created = svc.read(|s| s.products.values().find(|p| p.name == name).cloned());
    let created = created.ok_or_else(|| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "product vanished"))?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn product_feed(
    State(svc): Svc,
    Path(id): Path<String>,
    StrictQuery(p): StrictQuery<SinceParams>,
) -> Result<Response, ApiError> {
    svc.read(|s| {
        let product = s.products.get(&id).ok_or_else(|| ApiError::not_found(format!("no product `{id}`")))?;
        let events = s.message_feed(p.since, |m| product.matches(m)).collect();
        Ok(Json(Page { events, last_seq: s.last_seq() }).into_response())
    })
}

async fn guidance(State(svc): Svc, StrictQuery(p): StrictQuery<GuidanceParams>) -> Result<Response, ApiError> {
    let center = GeoPoint::new(p.lat, p.lon).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let radius = p.radius_m.unwrap_or(DEFAULT_RADIUS_M);
    let sectors = p.sectors.unwrap_or(DEFAULT_SECTORS);
    svc.read(|s| {
        let display = s.engine.guidance(center, radius, sectors).map_err(|e| ApiError::bad_request(e.to_string()))?;
        Ok(Json(display).into_response())
    })
}

fn tracked_view(svc: &Service) -> TrackedView {
    svc.read(|s| TrackedView { authors: s.tracked.clone(), positions: s.engine.tracked_positions(&s.tracked) })
}

async fn get_tracked(State(svc): Svc, StrictQuery(NoParams {}): StrictQuery<NoParams>) -> Json<TrackedView> {
    Json(tracked_view(&svc))
}

async fn put_tracked(
    State(svc): Svc,
    StrictQuery(NoParams {}): StrictQuery<NoParams>,
    body: Bytes,
) -> Result<Json<TrackedView>, ApiError> {
    let TrackedBody { authors } = parse_body(&body)?;
    svc.submit(Command::SetTracked { authors })?;
    Ok(Json(tracked_view(&svc)))
}

/// Ingests one raw message and returns the events it produced.
async fn post_message(
    State(svc): Svc,
    StrictQuery(NoParams {}): StrictQuery<NoParams>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let message: Message = parse_body(&body)?;
    let events = svc.ingest(message)?;
    Ok((StatusCode::ACCEPTED, Json(events)).into_response())
}

fn sse_event(e: &UpdateEvent) -> Event {
    let data = serde_json::to_string(e).expect("update events serialize");
    Event::default().id(e.seq.to_string()).event(e.kind()).data(data)
}

/// Backlog after `since`, then live events. Ends when the client lags
/// past the buffer, or once drained after the service starts closing.
fn update_stream(svc: &Service, since: u64) -> impl Stream<Item = Result<Event, Infallible>> {
    let (backlog, rx) = svc.subscribe_since(since);
    let last = backlog.last().map_or(since, |e| e.seq);
    let init = (VecDeque::from(backlog), rx, svc.closing(), last);
    futures::stream::unfold(init, |(mut backlog, mut rx, mut closing, mut last)| async move {
        if let Some(e) = backlog.pop_front() {
            let ev = sse_event(&e);
            return Some((Ok(ev), (backlog, rx, closing, e.seq)));
        }
        loop {
            if *closing.borrow() {
                // flush what was already published, then end
                return match rx.try_recv() {
                    Ok(e) if e.seq > last => {
                        let ev = sse_event(&e);
                        Some((Ok(ev), (backlog, rx, closing, e.seq)))
                    }
                    Ok(_) => continue,
                    Err(_) => None,
                };
            }
            tokio::select! {
                changed = closing.changed() => {
                    if changed.is_err() {
                        return None;
                    }
                }
                got = rx.recv() => match got {
                    Ok(e) if e.seq <= last => continue,
                    Ok(e) => {
                        last = e.seq;
                        let ev = sse_event(&e);
                        return Some((Ok(ev), (backlog, rx, closing, last)));
                    }
                    Err(RecvError::Lagged(n)) => {
                        log::warn!("stream subscriber fell {n} events behind; disconnecting");
                        return None;
                    }
                    Err(RecvError::Closed) => return None,
                }
            }
        }
    })
}

async fn stream(State(svc): Svc, StrictQuery(p): StrictQuery<SinceParams>) -> Response {
    Sse::new(update_stream(&svc, p.since)).keep_alive(KeepAlive::new().interval(Duration::from_secs(15))).into_response()
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method not allowed for this route")
}

pub fn router(svc: Arc<Service>) -> Router {
    let v1 = Router::new()
        .route("/healthz", get(healthz))
        .route("/surface", get(surface))
        .route("/alerts", get(alerts))
        .route("/topics/emerging", get(emerging))
        .route("/snapshot", get(snapshot))
        .route("/watch-topics", get(list_watch_topics).post(create_watch_topic))
        .route("/watch-topics/{id}", delete(delete_watch_topic))
        .route("/watch-topics/{id}/feed", get(watch_topic_feed))
        .route("/products", get(list_products).post(create_product))
        .route("/products/{id}/feed", get(product_feed))
        .route("/guidance", get(guidance))
        .route("/tracked-users", get(get_tracked).put(put_tracked))
        .route("/messages", axum::routing::post(post_message))
        .route("/stream", get(stream));
    Router::new()
        .nest("/v1", v1)
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(svc)
}

pub async fn bind(addr: &str) -> Result<TcpListener, ServiceError> {
    TcpListener::bind(addr).await.map_err(|source| ServiceError::Bind { addr: addr.to_string(), source })
}

/// Serves until `shutdown` resolves, then closes streams and drains
/// in-flight requests.
pub async fn serve(
    svc: Arc<Service>,
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let app = router(svc.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            shutdown.await;
            svc.close_streams();
        })
        .await?;
    Ok(())
}
