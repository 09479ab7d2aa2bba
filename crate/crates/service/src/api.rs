use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hybrid_miner::causal_graph::GraphDump;
use hybrid_miner::conformance::{PlaceViolations, VariantVerdict};
use hybrid_miner::discovery::CandidateReport;
use hybrid_miner::event_log::{parse_csv, parse_xes, ColumnMapping, XesOptions};
use hybrid_miner::net::NetDump;
use hybrid_miner::stats::TableDump;
use hybrid_miner::{
    classify, evaluate, validate_consistency, ConsistencyReport, DiscoveryParams, EventLog, GraphParams,
    HybridSystemNet,
};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::params::{body_object, discovery_params, graph_params, query_object};
use crate::session::{LogSummary, Session, SessionStore};

pub struct AppState {
    pub config: ServiceConfig,
    pub sessions: SessionStore,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> std::io::Result<Self> {
        let sessions = SessionStore::open(config.data_dir.clone())?;
        Ok(AppState { config, sessions })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let limit = state.config.upload_limit;
    Router::new()
        .route("/health", get(health))
        .route("/logs", post(upload).get(list))
        .route("/logs/{id}", get(show).delete(remove))
        .route("/logs/{id}/stats", get(stats))
        .route("/logs/{id}/causal-graph", post(causal_graph))
        .route("/logs/{id}/hybrid-net", post(hybrid_net))
        .route("/logs/{id}/evaluate", post(evaluate_net))
        .route("/logs/{id}/export", get(export))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs CPU-bound work off the async workers.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

fn body_bytes(state: &AppState, body: Result<Bytes, BytesRejection>) -> ApiResult<Bytes> {
    body.map_err(|r| {
        if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::TooLarge(state.config.upload_limit)
        } else {
            ApiError::BadRequest(r.body_text())
        }
    })
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    sessions: usize,
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health { status: "ok", sessions: state.sessions.len() })
}

#[derive(Serialize)]
struct SessionInfo {
    id: String,
    summary: LogSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    last_params: Option<DiscoveryParams>,
}

impl SessionInfo {
    fn of(s: &Session) -> Self {
        SessionInfo { id: s.id.clone(), summary: s.summary.clone(), last_params: s.last_params() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LogFormat {
    Xes,
    Csv,
    Json,
}

fn log_format(query: &BTreeMap<String, String>, headers: &HeaderMap, body: &[u8]) -> ApiResult<LogFormat> {
    if let Some(f) = query.get("format") {
        return match f.as_str() {
            "xes" | "xml" => Ok(LogFormat::Xes),
            "csv" => Ok(LogFormat::Csv),
            "json" => Ok(LogFormat::Json),
            other => Err(ApiError::field("format", format!("unsupported log format {other:?}"))),
        };
    }
    let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    if content_type.contains("xml") || content_type.contains("xes") {
        return Ok(LogFormat::Xes);
    }
    if content_type.contains("csv") {
        return Ok(LogFormat::Csv);
    }
    if content_type.contains("json") {
        return Ok(LogFormat::Json);
    }
    Ok(match body.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'<') => LogFormat::Xes,
        Some(b'{') => LogFormat::Json,
        _ => LogFormat::Csv,
    })
}

fn parse_log(format: LogFormat, query: &BTreeMap<String, String>, body: &[u8]) -> ApiResult<EventLog> {
    let parsed = match format {
        LogFormat::Xes => {
            let all = query.get("lifecycle").is_some_and(|v| v == "all");
            parse_xes(body, XesOptions { complete_only: !all })
        }
        LogFormat::Csv => {
            let mut mapping = ColumnMapping::default();
            if let Some(c) = query.get("case") {
                mapping.case = c.clone();
            }
            if let Some(a) = query.get("activity") {
                mapping.activity = a.clone();
            }
            if let Some(t) = query.get("timestamp") {
                mapping.timestamp = (!t.is_empty()).then(|| t.clone());
            }
            parse_csv(body, &mapping)
        }
        LogFormat::Json => EventLog::from_json(body),
    };
    parsed.map_err(|e| ApiError::BadRequest(format!("cannot read log: {e}")))
}

async fn upload(
    State(state): State<Arc<AppState>>,
    Query(query): Query<BTreeMap<String, String>>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<(StatusCode, Json<SessionInfo>)> {
    let body = body_bytes(&state, body)?;
    let format = log_format(&query, &headers, &body)?;
    let worker = state.clone();
    let session = blocking(move || {
        let log = parse_log(format, &query, &body)?;
        worker.sessions.insert(log)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(SessionInfo::of(&session))))
}

async fn list(State(state): State<Arc<AppState>>) -> Json<Vec<SessionInfo>> {
    let ids = state.sessions.ids();
    Json(ids.iter().filter_map(|id| state.sessions.get(id).ok()).map(|s| SessionInfo::of(&s)).collect())
}

async fn show(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SessionInfo>> {
    let session = state.sessions.get(&id)?;
    Ok(Json(SessionInfo::of(&session)))
}

async fn remove(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.sessions.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Serialize)]
struct StatsResponse {
    id: String,
    summary: LogSummary,
    table: TableDump,
}

async fn stats(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    let session = state.sessions.get(&id)?;
    match query.get("format").map(String::as_str) {
        None | Some("json") => Ok(Json(StatsResponse {
            id: session.id.clone(),
            summary: session.summary.clone(),
            table: session.table().to_dump(),
        })
        .into_response()),
        Some("tsv") => Ok(([(header::CONTENT_TYPE, "text/tab-separated-values")], session.table().to_tsv()).into_response()),
        Some(other) => Err(ApiError::field("format", format!("unsupported stats format {other:?}"))),
    }
}

#[derive(Serialize)]
struct GraphResponse {
    id: String,
    params: GraphParams,
    graph: GraphDump,
}

async fn causal_graph(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<GraphResponse>> {
    let session = state.sessions.get(&id)?;
    let patch = body_object(&body_bytes(&state, body)?)?;
    let params = graph_params(&state.config.defaults.graph, &patch)?;
    let graph = blocking(move || {
        let graph = session.causal_graph(&params)?;
        Ok(GraphResponse { id: session.id.clone(), params, graph: graph.to_dump() })
    })
    .await?;
    Ok(Json(graph))
}

#[derive(Serialize)]
struct NetCounts {
    places: usize,
    sure: usize,
    unsure: usize,
    candidates: usize,
}

#[derive(Serialize)]
struct NetResponse {
    id: String,
    params: DiscoveryParams,
    counts: NetCounts,
    graph: GraphDump,
    net: NetDump,
    candidates: Vec<CandidateReport>,
    consistency: ConsistencyReport,
}

fn discover(session: &Session, params: DiscoveryParams) -> ApiResult<NetResponse> {
    let (graph, discovery) = session.hybrid_net(&params)?;
    session.remember(params);
    let hsn = &discovery.net;
    Ok(NetResponse {
        id: session.id.clone(),
        params,
        counts: NetCounts {
            places: discovery.places().count(),
            sure: hsn.sure().len(),
            unsure: hsn.unsure().len(),
            candidates: discovery.candidates.len(),
        },
        consistency: validate_consistency(&session.log, &graph, hsn),
        graph: graph.to_dump(),
        net: hsn.to_dump(),
        candidates: discovery.candidates,
    })
}

async fn hybrid_net(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<NetResponse>> {
    let session = state.sessions.get(&id)?;
    let patch = body_object(&body_bytes(&state, body)?)?;
    let params = discovery_params(&state.config.defaults, &patch)?;
    Ok(Json(blocking(move || discover(&session, params)).await?))
}

const METRICS: [&str; 4] = ["fitness", "precision", "verdicts", "place_violations"];

#[derive(Serialize)]
struct EvaluateResponse {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<DiscoveryParams>,
    net: NetDump,
    fitting_cases: u64,
    total_cases: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fitness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdicts: Option<Vec<VariantVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    place_violations: Option<Vec<PlaceViolations>>,
}

fn requested_metrics(body: &Map<String, Value>) -> ApiResult<Vec<&'static str>> {
    let Some(value) = body.get("metrics") else {
        return Ok(vec!["fitness", "precision"]);
    };
    let names = value.as_array().ok_or_else(|| ApiError::field("metrics", "expected an array of metric names"))?;
    let mut out = Vec::new();
    for n in names {
        let known = n.as_str().and_then(|s| METRICS.iter().find(|m| **m == s));
        match known {
            Some(m) => out.push(*m),
            None => return Err(ApiError::field("metrics", format!("unknown metric {n}; expected one of {METRICS:?}"))),
        }
    }
    Ok(out)
}

async fn evaluate_net(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<EvaluateResponse>> {
    let session = state.sessions.get(&id)?;
    let body = body_object(&body_bytes(&state, body)?)?;
    if let Some(k) = body.keys().find(|k| !["net", "params", "metrics"].contains(&k.as_str())) {
        return Err(ApiError::field(k, "unknown field"));
    }
    let metrics = requested_metrics(&body)?;
    let given_net = match body.get("net") {
        Some(v) => {
            let dump: NetDump = serde_json::from_value(v.clone()).map_err(|e| ApiError::field("net", e.to_string()))?;
            Some(HybridSystemNet::from_dump(&dump).map_err(|e| ApiError::field("net", e.to_string()))?)
        }
        None => None,
    };
    let params = match (&given_net, body.get("params")) {
        (Some(_), Some(_)) => return Err(ApiError::field("params", "give either a net or discovery parameters")),
        (Some(_), None) => None,
        (None, Some(Value::Object(p))) => Some(discovery_params(&state.config.defaults, p)?),
        (None, Some(_)) => return Err(ApiError::field("params", "expected a JSON object")),
        (None, None) => Some(session.last_params().unwrap_or(state.config.defaults)),
    };

    let response = blocking(move || {
        let hsn = match given_net {
            Some(n) => n,
            None => {
                let params = params.expect("set when no net is given");
                let (_, discovery) = session.hybrid_net(&params)?;
                session.remember(params);
                discovery.net
            }
        };
        let mut out = EvaluateResponse {
            id: session.id.clone(),
            params,
            net: hsn.to_dump(),
            fitting_cases: 0,
            total_cases: 0,
            fitness: None,
            precision: None,
            verdicts: None,
            place_violations: None,
        };
        let internal = |e: hybrid_miner::NetError| ApiError::Internal(e.to_string());
        if metrics.iter().any(|m| *m == "precision" || *m == "place_violations") {
            let report = evaluate(&hsn, &session.log).map_err(internal)?;
            out.fitting_cases = report.fitting_cases;
            out.total_cases = report.total_cases;
            out.fitness = Some(report.fitness_trace);
            out.precision = metrics.contains(&"precision").then_some(report.precision_escaping);
            out.verdicts = metrics.contains(&"verdicts").then_some(report.verdicts);
            out.place_violations = metrics.contains(&"place_violations").then_some(report.place_violations);
        } else {
            let verdicts = classify(&hsn, &session.log).map_err(internal)?;
            out.total_cases = verdicts.iter().map(|v| v.count).sum();
            out.fitting_cases = verdicts.iter().filter(|v| v.fitting).map(|v| v.count).sum();
            out.fitness =
                Some(if out.total_cases == 0 { 1.0 } else { out.fitting_cases as f64 / out.total_cases as f64 });
            out.verdicts = metrics.contains(&"verdicts").then_some(verdicts);
        }
        if !metrics.contains(&"fitness") {
            out.fitness = None;
        }
        Ok(out)
    })
    .await?;
    Ok(Json(response))
}

/// `format` picks dot, pnml or json; `target` picks the net (default), the
/// causal graph or the log. Remaining query fields are discovery parameters
/// laid over the session's last request.
async fn export(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    let session = state.sessions.get(&id)?;
    let format = query.get("format").map(String::as_str).unwrap_or("json").to_string();
    let target = query.get("target").map(String::as_str).unwrap_or("net").to_string();
    let patch = query_object(query.iter().filter(|(k, _)| *k != "format" && *k != "target"));
    let base = session.last_params().unwrap_or(state.config.defaults);
    let params = discovery_params(&base, &patch)?;

    let (content_type, text) = blocking(move || {
        let text = match (target.as_str(), format.as_str()) {
            ("log", "json") => session.log.to_json(),
            ("graph", "json") => to_json(&session.causal_graph(&params.graph)?.to_dump()),
            ("graph", "dot") => session.causal_graph(&params.graph)?.to_dot(),
            ("net", "json" | "dot" | "pnml") => {
                let (_, discovery) = session.hybrid_net(&params)?;
                match format.as_str() {
                    "json" => discovery.net.to_json(),
                    "dot" => discovery.net.to_dot(),
                    _ => discovery.net.to_pnml(),
                }
            }
            ("log" | "graph" | "net", f) => {
                return Err(ApiError::field("format", format!("{f:?} is not available for target {target:?}")))
            }
            (t, _) => return Err(ApiError::field("target", format!("unknown export target {t:?}"))),
        };
        let content_type = match format.as_str() {
            "json" => "application/json",
            "dot" => "text/vnd.graphviz",
            _ => "application/xml",
        };
        Ok((content_type, text))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, content_type)], text).into_response())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("dumps serialise")
}
