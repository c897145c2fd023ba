//! Async HTTP client wrapping every service endpoint.

use crate::wire::*;
use std::time::Duration;
use uuid::Uuid;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("server returned {status}: {message}")]
    Api { status: u16, message: String },
    #[error("job {id} failed: {message}")]
    JobFailed { id: Uuid, message: String },
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// A handle to one bordernet service.
#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
    /// Delay between polls while waiting on a job.
    pub poll_interval: Duration,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        let mut base = base.into();
        while base.ends_with('/') {
            base.pop();
        }
        Client {
            base,
            http: reqwest::Client::new(),
            poll_interval: Duration::from_millis(200),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{API_PREFIX}{path}", self.base)
    }

    /// Decode a response, mapping non-2xx statuses to [`ClientError::Api`].
    async fn decode<T: serde::de::DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json::<T>().await?);
        }
        let message = match resp.json::<ErrorBody>().await {
            Ok(body) => body.error,
            Err(_) => status.canonical_reason().unwrap_or("unknown error").to_string(),
        };
        Err(ClientError::Api {
            status: status.as_u16(),
            message,
        })
    }

    async fn get_json<T: serde::de::DeserializeOwned>(&self, path: &str) -> Result<T> {
        Self::decode(self.http.get(self.url(path)).send().await?).await
    }

    async fn post_json<B: serde::Serialize, T: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<T> {
        Self::decode(self.http.post(self.url(path)).json(body).send().await?).await
    }

    pub async fn health(&self) -> Result<HealthResponse> {
        self.get_json("/health").await
    }

    pub async fn dataset(&self) -> Result<DatasetInfo> {
        self.get_json("/dataset").await
    }

    pub async fn start_train(&self, req: &TrainRequest) -> Result<JobCreated> {
        self.post_json("/train", req).await
    }

    pub async fn start_eval_grid(&self, req: &EvalGridRequest) -> Result<JobCreated> {
        self.post_json("/eval-grid", req).await
    }

    pub async fn eval(&self, req: &EvalRequest) -> Result<EvalResponse> {
        self.post_json("/eval", req).await
    }

    pub async fn diff(&self, req: &DiffRequest) -> Result<DiffResponse> {
        self.post_json("/diff", req).await
    }

    pub async fn occlude(&self, req: &OccludeRequest) -> Result<OccludeResponse> {
        self.post_json("/occlude", req).await
    }

    pub async fn filters(&self, query: &FiltersQuery) -> Result<FiltersResponse> {
        let mut params: Vec<(&str, String)> = vec![("raw", query.raw.to_string())];
        if let Some(kind) = &query.kind {
            params.push(("kind", kind.clone()));
        }
        if let Some(seed) = query.seed {
            params.push(("seed", seed.to_string()));
        }
        Self::decode(
            self.http
                .get(self.url("/filters"))
                .query(&params)
                .send()
                .await?,
        )
        .await
    }

    pub async fn orientmap(&self, req: &OrientMapRequest) -> Result<OrientMapResponse> {
        self.post_json("/orientmap", req).await
    }

    pub async fn jobs(&self) -> Result<JobList> {
        self.get_json("/jobs").await
    }

    pub async fn job(&self, id: Uuid) -> Result<JobInfo> {
        self.get_json(&format!("/jobs/{id}")).await
    }

    pub async fn artifacts(&self) -> Result<ArtifactList> {
        self.get_json("/artifacts").await
    }

    pub async fn download_artifact(&self, name: &str) -> Result<Vec<u8>> {
        let resp = self
            .http
            .get(self.url(&format!("/artifacts/{name}")))
            .send()
            .await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.bytes().await?.to_vec());
        }
        let message = match resp.json::<ErrorBody>().await {
            Ok(body) => body.error,
            Err(_) => status.canonical_reason().unwrap_or("unknown error").to_string(),
        };
        Err(ClientError::Api {
            status: status.as_u16(),
            message,
        })
    }

    pub async fn upload_artifact(&self, name: &str, bytes: Vec<u8>) -> Result<ArtifactStored> {
        Self::decode(
            self.http
                .put(self.url(&format!("/artifacts/{name}")))
                .body(bytes)
                .send()
                .await?,
        )
        .await
    }

    /// Poll a job until it completes, reporting progress along the way.
    ///
    /// Returns the final [`JobInfo`] on success and [`ClientError::JobFailed`]
    /// if the job ends in the failed state.
    pub async fn wait_for_job(
        &self,
        id: Uuid,
        mut on_progress: impl FnMut(&JobInfo),
    ) -> Result<JobInfo> {
        loop {
            let info = self.job(id).await?;
            match info.state {
                JobState::Completed => return Ok(info),
                JobState::Failed => {
                    let message = info.error.unwrap_or_else(|| "unknown error".into());
                    return Err(ClientError::JobFailed { id, message });
                }
                JobState::Queued | JobState::Running => {
                    on_progress(&info);
                    tokio::time::sleep(self.poll_interval).await;
                }
            }
        }
    }
}
