//! Typed HTTP client for the metamp service.

use reqwest::{RequestBuilder, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use metamp_core::benchmark::BenchmarkReport;
use metamp_core::discrepancy::ResolutionRequest;
use metamp_core::ml::{EvalReport, Prediction};
use metamp_core::model::{OpmFeatures, ProteinEntry, SourceTag};
use metamp_core::query::{Page, SearchHit};
use metamp_core::wire::{ErrorBody, Health, ModelInfo, ResolutionAck};

pub use reqwest::Url;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with an error status and body.
    #[error("{status}: {} ({})", body.message, body.error)]
    Api { status: StatusCode, body: ErrorBody },
    #[error("cannot reach the service: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("bad base URL {0:?}")]
    BadUrl(String),
    #[error("unexpected response: {0}")]
    Decode(String),
}

impl ClientError {
    /// True for client-side mistakes the service rejected (4xx).
    pub fn is_validation(&self) -> bool {
        matches!(self, ClientError::Api { status, .. } if status.is_client_error())
    }
}

pub type Params<'a> = &'a [(&'a str, &'a str)];

#[derive(Debug, Clone)]
pub struct Client {
    base: Url,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base: &str) -> Result<Self, ClientError> {
        let mut base = Url::parse(base).map_err(|_| ClientError::BadUrl(base.to_string()))?;
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        Ok(Client {
            base,
            http: reqwest::Client::new(),
        })
    }

    pub fn base(&self) -> &Url {
        &self.base
    }

    fn url(&self, path: &str) -> Url {
        self.base.join(path).expect("relative API paths join")
    }

    async fn send(&self, req: RequestBuilder) -> Result<reqwest::Response, ClientError> {
        let resp = req.send().await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let text = resp.text().await?;
        let body = serde_json::from_str(&text).unwrap_or(ErrorBody {
            error: "http".into(),
            message: text,
            attribute: None,
        });
        Err(ClientError::Api { status, body })
    }

    async fn json<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T, ClientError> {
        let text = self.send(req).await?.text().await?;
        serde_json::from_str(&text).map_err(|e| ClientError::Decode(e.to_string()))
    }

    async fn text(&self, req: RequestBuilder) -> Result<String, ClientError> {
        Ok(self.send(req).await?.text().await?)
    }

    fn get(&self, path: &str, params: Params<'_>) -> RequestBuilder {
        self.http.get(self.url(path)).query(params)
    }

    fn post<B: Serialize + ?Sized>(&self, path: &str, body: &B) -> RequestBuilder {
        self.http.post(self.url(path)).json(body)
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        self.json(self.get("api/health", &[])).await
    }

    /// One page of entries; `params` carries filters, `sort`, `page` and
    /// `page_size`.
    pub async fn entries(&self, params: Params<'_>) -> Result<Page, ClientError> {
        self.json(self.get("api/entries", params)).await
    }

    pub async fn entry(&self, pdb_code: &str) -> Result<ProteinEntry, ClientError> {
        self.json(self.get(&format!("api/entries/{pdb_code}"), &[])).await
    }

    pub async fn search(&self, q: &str) -> Result<Vec<SearchHit>, ClientError> {
        self.json(self.get("api/search", &[("q", q)])).await
    }

    /// A view payload as loose JSON; its shape depends on the view.
    pub async fn view(&self, name: &str, params: Params<'_>) -> Result<serde_json::Value, ClientError> {
        self.json(self.get(&format!("api/views/{name}"), params)).await
    }

    /// Every entry matching `params`, as CSV or JSON text.
    pub async fn export(&self, format: &str, params: Params<'_>) -> Result<String, ClientError> {
        let mut all = vec![("format", format)];
        all.extend_from_slice(params);
        self.text(self.get("api/export", &all)).await
    }

    pub async fn benchmark(&self, a: SourceTag, b: SourceTag) -> Result<BenchmarkReport, ClientError> {
        let (a, b) = (a.to_string(), b.to_string());
        self.json(self.get("api/benchmark", &[("a", &a), ("b", &b)])).await
    }

    pub async fn benchmark_csv(&self, a: SourceTag, b: SourceTag) -> Result<String, ClientError> {
        let (a, b) = (a.to_string(), b.to_string());
        self.text(self.get("api/benchmark", &[("a", &a), ("b", &b), ("format", "csv")]))
            .await
    }

    pub async fn classify(&self, features: &OpmFeatures) -> Result<Prediction, ClientError> {
        self.json(self.post("api/classify", features)).await
    }

    pub async fn classify_many(&self, features: &[OpmFeatures]) -> Result<Vec<Prediction>, ClientError> {
        self.json(self.post("api/classify", features)).await
    }

    /// The served classifier's training summary and its model document.
    pub async fn model(&self) -> Result<ModelInfo, ClientError> {
        self.json(self.get("api/model", &[])).await
    }

    /// `protocol` (cv or holdout), `k`, `test_fraction`, `semi`.
    pub async fn evaluate(&self, params: Params<'_>) -> Result<EvalReport, ClientError> {
        self.json(self.get("api/model/evaluation", params)).await
    }

    pub async fn resolve(&self, pdb_code: &str, request: &ResolutionRequest) -> Result<ResolutionAck, ClientError> {
        self.json(self.post(&format!("api/entries/{pdb_code}/resolution"), request))
            .await
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_keeps_a_prefix() {
        let c = Client::new("http://h:1/metamp").unwrap();
        assert_eq!(c.url("api/health").as_str(), "http://h:1/metamp/api/health");
        let c = Client::new("http://h:1").unwrap();
        assert_eq!(c.url("api/health").as_str(), "http://h:1/api/health");
        assert!(matches!(Client::new("not a url"), Err(ClientError::BadUrl(_))));
    }
}
