use std::sync::Arc;

use axum::extract::{Path, Query as QueryParams, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use metamp_core::benchmark::{benchmark_pair, reports_to_csv};
use metamp_core::discrepancy::ResolutionRequest;
use metamp_core::ml::{cross_validate, holdout_evaluate, prepare_dataset, Params as ModelParams, SemiSupervised};
use metamp_core::model::{OpmFeatures, PdbCode, SourceTag};
use metamp_core::query::{export_csv, export_json, list_entries, search, select, Query};
use metamp_core::store::StoreSnapshot;
pub use metamp_core::wire::{Health, ModelInfo, ResolutionAck};

use crate::cache::Cached;
use crate::error::ApiError;
use crate::state::AppState;
use crate::views::{render, Params};

type Shared = Arc<AppState>;
type Pairs = QueryParams<Vec<(String, String)>>;

pub const JSON: &str = "application/json";
pub const CSV: &str = "text/csv; charset=utf-8";

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/entries", get(entries))
        .route("/api/entries/{pdb}", get(entry))
        .route("/api/entries/{pdb}/resolution", post(resolution))
        .route("/api/search", get(search_entries))
        .route("/api/views/{view}", get(view))
        .route("/api/export", get(export))
        .route("/api/benchmark", get(benchmark))
        .route("/api/classify", post(classify))
        .route("/api/model", get(model))
        .route("/api/model/evaluation", get(evaluation))
        .with_state(state)
}

fn respond(c: Cached) -> Response {
    ([(header::CONTENT_TYPE, c.content_type)], c.body).into_response()
}

fn json_body<T: Serialize>(v: &T) -> Cached {
    Cached {
        content_type: JSON,
        body: serde_json::to_string(v).expect("payloads serialize"),
    }
}

/// Serves a read from the cache or computes it on a blocking thread against
/// one snapshot; the cache key carries that snapshot's version.
async fn cached<F>(state: Shared, key: String, compute: F) -> Result<Response, ApiError>
where
    F: FnOnce(&AppState, &StoreSnapshot) -> Result<Cached, ApiError> + Send + 'static,
{
    let snap = state.store.snapshot();
    if let Some(hit) = state.cache.get(snap.version, &key) {
        return Ok(respond(hit));
    }
    let version = snap.version;
    let st = state.clone();
    let out = tokio::task::spawn_blocking(move || compute(&st, &snap))
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))??;
    state.cache.put(version, key, out.clone());
    Ok(respond(out))
}

fn key(path: &str, params: &[(String, String)]) -> String {
    let mut k = path.to_string();
    for (a, b) in params {
        k.push('\u{1f}');
        k.push_str(a);
        k.push('=');
        k.push_str(b);
    }
    k
}

fn parse_query(params: &[(String, String)], ignore: &[&str]) -> Result<Query, ApiError> {
    Ok(Query::from_params(params.iter().map(|(k, v)| (k.as_str(), v.as_str())), ignore)?)
}

async fn health(State(state): State<Shared>) -> Json<Health> {
    let snap = state.store.snapshot();
    Json(Health {
        status: "ok".into(),
        store_version: snap.version,
        entries: snap.len(),
    })
}

async fn entries(State(state): State<Shared>, QueryParams(params): Pairs) -> Result<Response, ApiError> {
    let q = parse_query(&params, &[])?;
    cached(state, key("entries", &params), move |_, snap| {
        Ok(json_body(&list_entries(&snap.entries, &q)?))
    })
    .await
}

async fn entry(State(state): State<Shared>, Path(pdb): Path<String>) -> Result<Response, ApiError> {
    let code = PdbCode::parse(&pdb)?;
    let snap = state.store.snapshot();
    let e = snap.get(&code).ok_or_else(|| ApiError::UnknownEntry(code.to_string()))?;
    Ok(respond(json_body(e)))
}

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
}

async fn search_entries(State(state): State<Shared>, QueryParams(p): QueryParams<SearchParams>) -> Result<Response, ApiError> {
    cached(state, key("search", &[("q".into(), p.q.clone())]), move |_, snap| {
        Ok(json_body(&search(&snap.entries, &p.q)))
    })
    .await
}

async fn view(
    State(state): State<Shared>,
    Path(view): Path<String>,
    QueryParams(params): Pairs,
) -> Result<Response, ApiError> {
    if !crate::views::VIEWS.contains(&view.as_str()) {
        return Err(ApiError::UnknownView(view));
    }
    let k = key(&format!("views/{view}"), &params);
    cached(state, k, move |st, snap| {
        Ok(json_body(&render(&view, st, snap, &Params(&params))?))
    })
    .await
}

async fn export(State(state): State<Shared>, QueryParams(params): Pairs) -> Result<Response, ApiError> {
    let format = Params(&params).get("format").unwrap_or("json").to_ascii_lowercase();
    if format != "csv" && format != "json" {
        return Err(ApiError::Validation(format!("format must be csv or json, not {format:?}")));
    }
    // Export ignores pagination: every matching entry is written.
    let q = parse_query(&params, &["format"])?;
    cached(state, key("export", &params), move |_, snap| {
        let rows = select(&snap.entries, &q);
        Ok(if format == "csv" {
            Cached {
                content_type: CSV,
                body: export_csv(&rows),
            }
        } else {
            Cached {
                content_type: JSON,
                body: export_json(&rows),
            }
        })
    })
    .await
}

async fn benchmark(State(state): State<Shared>, QueryParams(params): Pairs) -> Result<Response, ApiError> {
    let p = Params(&params);
    let source = |k: &str| -> Result<SourceTag, ApiError> {
        p.get(k)
            .ok_or_else(|| ApiError::Validation(format!("missing source parameter {k}")))?
            .parse::<SourceTag>()
            .map_err(ApiError::from)
    };
    let (a, b) = (source("a")?, source("b")?);
    let csv = p.get("format") == Some("csv");
    cached(state, key("benchmark", &params), move |_, snap| {
        let report = benchmark_pair(&snap.entries, a, b)?;
        Ok(if csv {
            Cached {
                content_type: CSV,
                body: reports_to_csv(&[report]),
            }
        } else {
            json_body(&report)
        })
    })
    .await
}

async fn resolution(
    State(state): State<Shared>,
    Path(pdb): Path<String>,
    body: Result<Json<ResolutionRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<(StatusCode, Json<ResolutionAck>), ApiError> {
    let Json(request) = body.map_err(|e| ApiError::Validation(e.body_text()))?;
    let code = PdbCode::parse(&pdb)?;
    let st = state.clone();
    let (audit, version) = tokio::task::spawn_blocking(move || st.store.resolve(&code, &request))
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))??;
    state.cache.invalidate(version);
    tracing::info!("resolution for {} by {} (store version {version})", audit.pdb_code, audit.author);
    let snap = state.store.snapshot();
    let records = snap.register.for_entry(&audit.pdb_code).cloned().collect();
    Ok((
        StatusCode::OK,
        Json(ResolutionAck {
            audit,
            store_version: version,
            records,
        }),
    ))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ClassifyBody {
    Many(Vec<OpmFeatures>),
    One(OpmFeatures),
}

async fn classify(
    State(state): State<Shared>,
    body: Result<Json<ClassifyBody>, axum::extract::rejection::JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body.map_err(|e| ApiError::Validation(e.body_text()))?;
    let st = state.clone();
    let out = tokio::task::spawn_blocking(move || -> Result<Cached, ApiError> {
        let snap = st.store.snapshot();
        let served = st.model(&snap)?;
        let clf = &served.classifier;
        Ok(match body {
            ClassifyBody::One(f) => json_body(&clf.classify(&f)?),
            ClassifyBody::Many(fs) => {
                let ps = fs.iter().map(|f| clf.classify(f)).collect::<Result<Vec<_>, _>>()?;
                json_body(&ps)
            }
        })
    })
    .await
    .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))??;
    Ok(respond(out))
}

async fn model(State(state): State<Shared>) -> Result<Response, ApiError> {
    cached(state, "model".into(), |st, snap| {
        let served = st.model(snap)?;
        Ok(json_body(&ModelInfo {
            summary: served.summary.clone(),
            document: served.classifier.to_document(),
        }))
    })
    .await
}

/// Evaluates the configured model kind on the store's labeled entries:
/// `protocol=cv` (stratified `k` folds, default 5) or `protocol=holdout`
/// (`test_fraction`, default 0.2); `semi=true` self-trains over the
/// unlabeled pool.
async fn evaluation(State(state): State<Shared>, QueryParams(params): Pairs) -> Result<Response, ApiError> {
    let p = Params(&params);
    let protocol = p.get("protocol").unwrap_or("cv").to_ascii_lowercase();
    if protocol != "cv" && protocol != "holdout" {
        return Err(ApiError::Validation(format!("protocol must be cv or holdout, not {protocol:?}")));
    }
    let k: usize = p.parse("k")?.unwrap_or(5);
    let test_fraction: f64 = p.parse("test_fraction")?.unwrap_or(0.2);
    let semi = p.flag("semi")?;
    cached(state, key("model/evaluation", &params), move |st, snap| {
        let c = &st.config;
        let ds = prepare_dataset(&snap.entries, &c.outliers);
        let encoder = ds.fit_encoder()?;
        let train = ds.labeled_matrix(&encoder)?;
        let pool = ds.unlabeled_matrix(&encoder)?;
        let params = ModelParams {
            n_trees: c.n_trees,
            ..ModelParams::default()
        };
        let semi = semi.then_some(SemiSupervised {
            config: &c.self_training,
            unlabeled: &pool.x,
        });
        let report = if protocol == "cv" {
            cross_validate(c.model, &train.x, &train.y, k, &params, c.seed, semi)?
        } else {
            holdout_evaluate(c.model, &train.x, &train.y, test_fraction, &params, c.seed, semi)?
        };
        Ok(json_body(&report))
    })
    .await
}
