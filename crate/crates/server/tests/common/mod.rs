#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

use metamp_core::config::Config;
use metamp_core::discrepancy::DetectionConfig;
use metamp_core::etl::{run_directory, EtlConfig, NormalizationTable, RemapTable};
use metamp_core::model::ProteinEntry;
use metamp_core::store::MemoryStore;

pub fn sample_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/sample")
}

pub fn sample_entries() -> Vec<ProteinEntry> {
    run_directory(&sample_dir(), &NormalizationTable::builtin(), &RemapTable::published(), &EtlConfig::default())
        .expect("sample fixture loads")
        .entries
}

pub fn sample_app() -> (Router, Arc<MemoryStore>) {
    let store = Arc::new(MemoryStore::with_entries(sample_entries(), DetectionConfig::default()).unwrap());
    (metamp_server::app(store.clone(), Config::default()), store)
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

pub async fn send(app: &Router, method: &str, uri: &str, body: Option<serde_json::Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        content_type,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, "GET", uri, None).await
}
