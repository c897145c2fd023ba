//! JSON bodies exchanged between the benchmark service and its clients.
//!
//! Everything here is plain data: the server depends on this module without
//! the HTTP client feature. Binary payloads (images, checkpoints) travel
//! base64-encoded inside JSON except for raw artifact up/downloads, which use
//! request/response bodies directly.

use serde::{Deserialize, Serialize};
use uuid::Uuid;

/// URL prefix shared by every endpoint.
pub const API_PREFIX: &str = "/api";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub data_dir: String,
    pub train_examples: usize,
    pub test_examples: usize,
    pub train_hash: String,
    pub test_hash: String,
}

/// Body of every non-2xx response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainRequest {
    /// "vanilla", "bordernet" or "randomnet".
    pub variant: String,
    pub seed: u64,
    /// Protocol defaults (10 epochs, batch 64, lr 0.001) when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f32>,
    #[serde(default)]
    pub front_trainable: bool,
    #[serde(default)]
    pub raw_filters: bool,
    /// Artifact name for the checkpoint; derived from the model id when
    /// omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalGridRequest {
    /// Artifact name of the checkpoint to evaluate.
    pub checkpoint: String,
    /// Prefix for the emitted artifacts (`<prefix>.csv`, `<prefix>.pgm`, ...).
    pub out_prefix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRequest {
    pub checkpoint: String,
    /// Occlusion stripe geometry; clean evaluation when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occlusion: Option<OcclusionParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OcclusionParams {
    pub width: u32,
    pub spacing: u32,
    /// "anti" (default) or "main".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(default)]
    pub phase: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResponse {
    pub model_id: String,
    pub accuracy: f64,
    /// Tag of the applied occlusion, absent for clean evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occlusion: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffRequest {
    /// Artifact names of two grid CSVs; the result is `a` minus `b`.
    pub a: String,
    pub b: String,
    pub out: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffResponse {
    pub files: Vec<String>,
    pub mean: f64,
    /// Mean over cells with width ≤ spacing (most of the digit visible).
    pub mild_mean: f64,
    /// Mean over cells with width > spacing.
    pub severe_mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccludeRequest {
    pub width: u32,
    pub spacing: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(default)]
    pub phase: i32,
    /// Test-set image used for the preview (default 0).
    #[serde(default)]
    pub index: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccludeResponse {
    pub width: usize,
    pub height: usize,
    pub occluded_pixels: usize,
    pub total_pixels: usize,
    pub label: u8,
    /// PGM of the occluded digit, base64.
    pub preview_pgm: String,
    /// PGM of the bare mask (occluded pixels black), base64.
    pub mask_pgm: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiltersQuery {
    /// "oriented" (default) or "random".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Raw 0/1 stripe values instead of L1-normalized.
    #[serde(default)]
    pub raw: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterWire {
    pub label: String,
    pub size: usize,
    /// Row-major kernel entries.
    pub values: Vec<f32>,
    /// PGM render (max entry mapped to white), base64.
    pub pgm: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiltersResponse {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub normalization: String,
    pub filters: Vec<FilterWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrientMapRequest {
    /// Any image format the service can decode (PNG, PGM, ...), base64.
    pub image: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrientMapResponse {
    pub width: usize,
    pub height: usize,
    /// Pixels with a well-defined orientation (nonzero gradient).
    pub regular_points: usize,
    /// CSV of θ values in [0,2π), "nan" at degenerate pixels.
    pub theta_csv: String,
    /// PPM with hue encoding θ, black at degenerate pixels, base64.
    pub hue_ppm: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Train,
    EvalGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JobProgress {
    Train {
        epoch: usize,
        total_epochs: usize,
        batch: usize,
        total_batches: usize,
        /// Mean loss of the most recently finished batch.
        last_loss: f64,
    },
    Grid {
        cells_done: usize,
        cells_total: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStatsWire {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainResult {
    pub model_id: String,
    /// Artifact name of the saved checkpoint.
    pub checkpoint: String,
    pub clean_test_accuracy: f64,
    pub epochs: Vec<EpochStatsWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridResult {
    pub model_id: String,
    pub clean_accuracy: f64,
    /// Artifact names written (CSV, PGM, scale sidecar, JSON metadata).
    pub files: Vec<String>,
    /// Grid mean accuracy, a quick summary of the 100 cells.
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JobResultWire {
    Train(TrainResult),
    Grid(GridResult),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobInfo {
    pub id: Uuid,
    pub kind: JobKind,
    pub state: JobState,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub progress: Option<JobProgress>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<JobResultWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobCreated {
    pub job_id: Uuid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobList {
    pub jobs: Vec<JobInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactInfo {
    pub name: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactList {
    pub artifacts: Vec<ArtifactInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactStored {
    pub name: String,
    pub bytes: u64,
}
