//! Read-only HTTP API over one immutable workspace. Every response body is
//! stamped with a strong ETag (SHA-256 of the bytes); a matching
//! `If-None-Match` gets 304.

use std::collections::BTreeMap;
use std::sync::Arc;

use aspkb_core::eval::{
    evaluate_spec_with, shared_violations, violations_of_constraint, EvalConfig, EvalError, FactSet, ViolationReport,
};
use aspkb_core::export::{to_json, HypergraphDocument, ModelDocument, ReportDocument, SCHEMA_VERSION};
use aspkb_core::model::{Constraint, ConstraintRef};
use aspkb_core::parser::ParseDiagnostic;
use axum::extract::{Path, Query, State};
use axum::http::header::{CONTENT_TYPE, ETAG, IF_NONE_MATCH};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;

use crate::{render_layout, reports_json, sha256_hex, LayoutFormat, ViewParams};

/// Everything the service serves, computed once at startup.
pub struct Workspace {
    pub model: ModelDocument,
    /// In rank order.
    pub reports: Vec<ViolationReport>,
    pub eval_config: EvalConfig,
}

pub fn router(ws: Arc<Workspace>) -> Router {
    Router::new()
        .route("/api/model", get(model))
        .route("/api/hypergraph", get(hypergraph))
        .route("/api/layout", get(layout))
        .route("/api/reports", get(reports))
        .route("/api/reports/:name", get(report))
        .route("/api/constraints", get(constraints))
        .route("/api/constraints/:reference", get(constraint))
        .route("/api/shared", get(shared))
        .route("/api/eval", post(eval))
        .with_state(ws)
}

const JSON: &str = "application/json";

fn stamped(headers: &HeaderMap, status: StatusCode, content_type: &'static str, body: String) -> Response {
    let etag = format!("\"{}\"", sha256_hex(body.as_bytes()));
    let etag_value = HeaderValue::from_str(&etag).expect("hex is a valid header");
    let fresh = headers
        .get(IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == etag || t.trim() == "*"));
    if status == StatusCode::OK && fresh {
        return (StatusCode::NOT_MODIFIED, [(ETAG, etag_value)]).into_response();
    }
    (status, [(CONTENT_TYPE, HeaderValue::from_static(content_type)), (ETAG, etag_value)], body).into_response()
}

fn ok_json<T: Serialize>(headers: &HeaderMap, doc: &T) -> Response {
    stamped(headers, StatusCode::OK, JSON, to_json(doc))
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    schema_version: u32,
    error: String,
    #[serde(skip_serializing_if = "<[ParseDiagnostic]>::is_empty")]
    diagnostics: &'a [ParseDiagnostic],
}

fn error(
    headers: &HeaderMap,
    status: StatusCode,
    message: impl Into<String>,
    diagnostics: &[ParseDiagnostic],
) -> Response {
    let body = ErrorBody { schema_version: SCHEMA_VERSION, error: message.into(), diagnostics };
    stamped(headers, status, JSON, to_json(&body))
}

fn bad_request(headers: &HeaderMap, message: impl Into<String>) -> Response {
    error(headers, StatusCode::BAD_REQUEST, message, &[])
}

fn not_found(headers: &HeaderMap, message: impl Into<String>) -> Response {
    error(headers, StatusCode::NOT_FOUND, message, &[])
}

fn view_params(q: &BTreeMap<String, String>) -> Result<ViewParams, String> {
    let mut view = ViewParams::default();
    for (key, value) in q {
        match key.as_str() {
            "type" => view.kind = value.parse()?,
            "features" => view.features = value.parse()?,
            "min_degree" | "min-degree" => {
                view.min_degree =
                    value.parse().map_err(|_| format!("min_degree must be a non-negative integer, got {value:?}"))?
            }
            "format" => {}
            other => return Err(format!("unknown parameter {other:?}")),
        }
    }
    Ok(view)
}

async fn model(State(ws): State<Arc<Workspace>>, headers: HeaderMap) -> Response {
    ok_json(&headers, &ws.model)
}

async fn hypergraph(
    State(ws): State<Arc<Workspace>>,
    headers: HeaderMap,
    Query(q): Query<BTreeMap<String, String>>,
) -> Response {
    if q.contains_key("format") {
        return bad_request(&headers, "unknown parameter \"format\"");
    }
    match view_params(&q) {
        Ok(v) => ok_json(&headers, &HypergraphDocument::new(ws.model.hypergraph(v.kind, v.features, v.min_degree))),
        Err(e) => bad_request(&headers, e),
    }
}

async fn layout(
    State(ws): State<Arc<Workspace>>,
    headers: HeaderMap,
    Query(q): Query<BTreeMap<String, String>>,
) -> Response {
    let view = match view_params(&q) {
        Ok(v) => v,
        Err(e) => return bad_request(&headers, e),
    };
    let format = match q.get("format").map_or(Ok(LayoutFormat::Json), |f| f.parse()) {
        Ok(f) => f,
        Err(e) => return bad_request(&headers, e),
    };
    match render_layout(&ws.model, view, format) {
        Ok(body) if format == LayoutFormat::Svg => stamped(&headers, StatusCode::OK, "image/svg+xml", body),
        Ok(body) => stamped(&headers, StatusCode::OK, JSON, body),
        Err(e) => bad_request(&headers, e.to_string()),
    }
}

async fn reports(State(ws): State<Arc<Workspace>>, headers: HeaderMap) -> Response {
    stamped(&headers, StatusCode::OK, JSON, reports_json(ws.reports.clone()))
}

async fn report(State(ws): State<Arc<Workspace>>, headers: HeaderMap, Path(name): Path<String>) -> Response {
    match ws.reports.iter().find(|r| r.spec_name == name) {
        Some(r) => ok_json(&headers, &ReportDocument::new(r.clone())),
        None => not_found(&headers, EvalError::UnknownSpec(name).to_string()),
    }
}

#[derive(Serialize)]
struct ConstraintList<'a> {
    schema_version: u32,
    query: &'a str,
    constraints: Vec<&'a Constraint>,
}

/// Case-insensitive substring match on id or rule text.
async fn constraints(
    State(ws): State<Arc<Workspace>>,
    headers: HeaderMap,
    Query(q): Query<BTreeMap<String, String>>,
) -> Response {
    if let Some(other) = q.keys().find(|k| *k != "q") {
        return bad_request(&headers, format!("unknown parameter {other:?}"));
    }
    let query = q.get("q").map_or("", String::as_str);
    let needle = query.to_lowercase();
    let constraints = ws
        .model
        .set
        .constraints
        .iter()
        .filter(|c| c.id.to_lowercase().contains(&needle) || c.source.to_lowercase().contains(&needle))
        .collect();
    ok_json(&headers, &ConstraintList { schema_version: SCHEMA_VERSION, query, constraints })
}

#[derive(Serialize)]
struct SpecCount {
    spec: String,
    count: u64,
}

#[derive(Serialize)]
struct ConstraintDetail<'a> {
    schema_version: u32,
    constraint: &'a Constraint,
    /// Specs violating the constraint, by count descending.
    violated_by: Vec<SpecCount>,
}

async fn constraint(State(ws): State<Arc<Workspace>>, headers: HeaderMap, Path(reference): Path<String>) -> Response {
    let r: ConstraintRef = match reference.parse() {
        Ok(r) => r,
        Err(e) => return bad_request(&headers, e.to_string()),
    };
    match (ws.model.set.get(&r), violations_of_constraint(&ws.model.set, &ws.reports, &r)) {
        (Some(c), Ok(list)) => ok_json(
            &headers,
            &ConstraintDetail {
                schema_version: SCHEMA_VERSION,
                constraint: c,
                violated_by: list.into_iter().map(|(spec, count)| SpecCount { spec, count }).collect(),
            },
        ),
        _ => not_found(&headers, EvalError::UnknownConstraint(r).to_string()),
    }
}

async fn shared(
    State(ws): State<Arc<Workspace>>,
    headers: HeaderMap,
    Query(q): Query<BTreeMap<String, String>>,
) -> Response {
    if let Some(other) = q.keys().find(|k| *k != "specs") {
        return bad_request(&headers, format!("unknown parameter {other:?}"));
    }
    let names: Vec<&str> =
        q.get("specs").map_or(vec![], |s| s.split(',').map(str::trim).filter(|s| !s.is_empty()).collect());
    match shared_violations(&ws.reports, &names) {
        Ok(s) => ok_json(&headers, &aspkb_core::export::Versioned::new(s)),
        Err(e @ EvalError::UnknownSpec(_)) => not_found(&headers, e.to_string()),
        Err(e) => bad_request(&headers, e.to_string()),
    }
}

/// Scores a fact-file body against the model. Pure: nothing is stored.
async fn eval(
    State(ws): State<Arc<Workspace>>,
    headers: HeaderMap,
    Query(q): Query<BTreeMap<String, String>>,
    body: String,
) -> Response {
    if let Some(other) = q.keys().find(|k| *k != "name") {
        return bad_request(&headers, format!("unknown parameter {other:?}"));
    }
    let name = q.get("name").map_or("query", String::as_str);
    match FactSet::parse(name, &body.replace("\r\n", "\n")) {
        Ok(facts) => {
            ok_json(&headers, &ReportDocument::new(evaluate_spec_with(&ws.model.set, &facts, &ws.eval_config)))
        }
        Err(e) => {
            let diagnostics = match &e {
                EvalError::InvalidFacts { diagnostics, .. } => diagnostics.as_slice(),
                _ => &[],
            };
            error(&headers, StatusCode::BAD_REQUEST, e.to_string(), diagnostics)
        }
    }
}
