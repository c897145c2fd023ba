//! Endpoint handlers and the error-to-status mapping.

use crate::{jobs, SharedState};
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bordernet_client::wire::*;
use bordernet_client::{from_base64, to_base64};
use bordernet_core::checkpoint::{load_checkpoint, save_checkpoint, write_sidecar};
use bordernet_core::filter_bank::{make_oriented_filter_bank, make_random_filter_bank, normalize_l1};
use bordernet_core::grid::{diff_grid, export_csv, export_heatmap_pgm, import_csv};
use bordernet_core::imageio::{gray_from_unit, grayscale_from_bytes, orientation_rgb, pgm_bytes, ppm_bytes};
use bordernet_core::mnist::Dataset;
use bordernet_core::occlusion::{apply_occlusion, occlusion_mask, Direction, OcclusionSpec};
use bordernet_core::orientation::{gradient, orientation_map_closed_form, DEFAULT_EPS_REG};
use bordernet_core::train::{
    evaluate, evaluate_grid, model_id_of, train, TrainConfig, TrainEvent,
};
use bordernet_core::models::Variant;
use std::path::PathBuf;
use uuid::Uuid;

pub(crate) fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/dataset", get(dataset_info))
        .route("/api/train", post(start_train))
        .route("/api/eval-grid", post(start_eval_grid))
        .route("/api/eval", post(eval))
        .route("/api/diff", post(diff))
        .route("/api/occlude", post(occlude))
        .route("/api/filters", get(filters))
        .route("/api/orientmap", post(orientmap))
        .route("/api/jobs", get(list_jobs))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/artifacts", get(list_artifacts))
        .route(
            "/api/artifacts/{name}",
            get(download_artifact).put(upload_artifact),
        )
        .layer(DefaultBodyLimit::max(64 << 20))
        .with_state(state)
}

/// Error responses carry a JSON body with a single `error` field.
pub(crate) struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn unavailable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(ErrorBody {
                error: self.message,
            }),
        )
            .into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Artifact names address files directly under the artifacts directory:
/// no separators, no dotfiles, a conservative character set.
fn validate_artifact_name(name: &str) -> ApiResult<()> {
    let ok_chars = name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if name.is_empty()
        || name.len() > 128
        || !ok_chars
        || name.starts_with('.')
        || name.contains("..")
    {
        return Err(ApiError::bad_request(format!(
            "invalid artifact name '{name}': use [A-Za-z0-9._-], no leading dot, at most 128 chars"
        )));
    }
    Ok(())
}

fn artifact_path(state: &SharedState, name: &str) -> ApiResult<PathBuf> {
    validate_artifact_name(name)?;
    Ok(state.config.artifacts_dir.join(name))
}

/// Run blocking work on the blocking pool and surface panics as 500s.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker panicked: {e}")))?
}

fn datasets_or_unavailable(
    state: &SharedState,
) -> ApiResult<std::sync::Arc<(Dataset, Dataset)>> {
    state.data.get_or_load().map_err(|e| {
        ApiError::unavailable(format!(
            "MNIST data not available under {}: {e}",
            state.data.dir().display()
        ))
    })
}

async fn health() -> Json<HealthResponse> {
    Json(HealthResponse {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

async fn dataset_info(State(state): State<SharedState>) -> ApiResult<Json<DatasetInfo>> {
    let dir = state.data.dir().display().to_string();
    let data = blocking(move || datasets_or_unavailable(&state)).await?;
    Ok(Json(DatasetInfo {
        data_dir: dir,
        train_examples: data.0.len(),
        test_examples: data.1.len(),
        train_hash: data.0.content_hash.clone(),
        test_hash: data.1.content_hash.clone(),
    }))
}

fn train_config_from(req: &TrainRequest) -> ApiResult<TrainConfig> {
    let variant = Variant::parse(&req.variant).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let mut config = TrainConfig::new(variant, req.seed);
    if let Some(epochs) = req.epochs {
        config.epochs = epochs;
    }
    if let Some(batch) = req.batch_size {
        config.batch_size = batch;
    }
    if let Some(lr) = req.learning_rate {
        config.learning_rate = lr;
    }
    config.front_trainable = req.front_trainable;
    config.raw_filters = req.raw_filters;
    config
        .validate()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(config)
}

async fn start_train(
    State(state): State<SharedState>,
    Json(req): Json<TrainRequest>,
) -> ApiResult<Json<JobCreated>> {
    let config = train_config_from(&req)?;
    let checkpoint = req
        .checkpoint
        .clone()
        .unwrap_or_else(|| format!("{}.ckpt", config.model_id()));
    validate_artifact_name(&checkpoint)?;

    let id = state.jobs.create(JobKind::Train);
    tokio::task::spawn_blocking(move || run_train_job(state, id, config, checkpoint));
    Ok(Json(JobCreated { job_id: id }))
}

fn run_train_job(state: SharedState, id: Uuid, config: TrainConfig, checkpoint: String) {
    state.jobs.mark_running(id);
    let result = (|| -> Result<TrainResult, String> {
        let data = datasets_or_unavailable(&state).map_err(|e| e.message)?;
        let total_epochs = config.epochs;
        let jobs: &jobs::JobRegistry = &state.jobs;
        let outcome = train(&config, &data.0, &mut |event| {
            if let TrainEvent::BatchCompleted {
                epoch,
                batch,
                total_batches,
                loss,
            } = event
            {
                jobs.set_progress(
                    id,
                    JobProgress::Train {
                        epoch,
                        total_epochs,
                        batch,
                        total_batches,
                        last_loss: loss,
                    },
                );
            }
        })
        .map_err(|e| e.to_string())?;

        let clean = evaluate(&outcome.network, &data.1).map_err(|e| e.to_string())?;
        let path = state.config.artifacts_dir.join(&checkpoint);
        save_checkpoint(&outcome.network, &path).map_err(|e| e.to_string())?;
        write_sidecar(&outcome.network, path.with_extension("ckpt.txt"))
            .map_err(|e| e.to_string())?;

        Ok(TrainResult {
            model_id: model_id_of(&outcome.network),
            checkpoint,
            clean_test_accuracy: clean,
            epochs: outcome
                .epochs
                .iter()
                .map(|s| EpochStatsWire {
                    epoch: s.epoch,
                    mean_loss: s.mean_loss,
                    train_accuracy: s.train_accuracy,
                })
                .collect(),
        })
    })();
    match result {
        Ok(res) => state.jobs.complete(id, JobResultWire::Train(res)),
        Err(message) => state.jobs.fail(id, message),
    }
}

/// Worker count for grid evaluation: results are identical for any count,
/// so this only affects wall-clock time.
fn default_grid_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .clamp(1, 8)
}

async fn start_eval_grid(
    State(state): State<SharedState>,
    Json(req): Json<EvalGridRequest>,
) -> ApiResult<Json<JobCreated>> {
    let ckpt_path = artifact_path(&state, &req.checkpoint)?;
    validate_artifact_name(&req.out_prefix)?;
    if !ckpt_path.is_file() {
        return Err(ApiError::not_found(format!(
            "checkpoint artifact '{}' not found",
            req.checkpoint
        )));
    }
    let id = state.jobs.create(JobKind::EvalGrid);
    let workers = req.workers.unwrap_or_else(default_grid_workers).max(1);
    let prefix = req.out_prefix.clone();
    tokio::task::spawn_blocking(move || run_grid_job(state, id, ckpt_path, prefix, workers));
    Ok(Json(JobCreated { job_id: id }))
}

fn run_grid_job(state: SharedState, id: Uuid, ckpt_path: PathBuf, prefix: String, workers: usize) {
    state.jobs.mark_running(id);
    let result = (|| -> Result<GridResult, String> {
        let net = load_checkpoint(&ckpt_path).map_err(|e| e.to_string())?;
        let data = datasets_or_unavailable(&state).map_err(|e| e.message)?;
        let jobs: &jobs::JobRegistry = &state.jobs;
        let grid = evaluate_grid(&net, &data.1, workers, &|done, total| {
            jobs.set_progress(
                id,
                JobProgress::Grid {
                    cells_done: done,
                    cells_total: total,
                },
            );
        })
        .map_err(|e| e.to_string())?;

        let dir = &state.config.artifacts_dir;
        let csv = format!("{prefix}.csv");
        let pgm = format!("{prefix}.pgm");
        let meta = format!("{prefix}.json");
        export_csv(&grid, dir.join(&csv)).map_err(|e| e.to_string())?;
        export_heatmap_pgm(&grid, dir.join(&pgm)).map_err(|e| e.to_string())?;
        std::fs::write(
            dir.join(&meta),
            serde_json::to_vec_pretty(&grid).expect("grid serializes"),
        )
        .map_err(|e| e.to_string())?;

        Ok(GridResult {
            model_id: grid.model_id.clone(),
            clean_accuracy: grid.clean_accuracy.unwrap_or(f64::NAN),
            files: vec![csv, pgm, format!("{prefix}.scale.txt"), meta],
            mean_accuracy: grid.mean_over(|_, _| true),
        })
    })();
    match result {
        Ok(res) => state.jobs.complete(id, JobResultWire::Grid(res)),
        Err(message) => state.jobs.fail(id, message),
    }
}

fn occlusion_spec_from(params: &OcclusionParams) -> ApiResult<OcclusionSpec> {
    let direction = match params.direction.as_deref() {
        None | Some("anti") => Direction::Anti,
        Some("main") => Direction::Main,
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "unknown stripe direction '{other}' (expected 'anti' or 'main')"
            )))
        }
    };
    let spec = OcclusionSpec {
        width: params.width,
        spacing: params.spacing,
        direction,
        phase: params.phase,
    };
    spec.validate()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(spec)
}

async fn eval(
    State(state): State<SharedState>,
    Json(req): Json<EvalRequest>,
) -> ApiResult<Json<EvalResponse>> {
    let ckpt_path = artifact_path(&state, &req.checkpoint)?;
    let spec = req.occlusion.as_ref().map(occlusion_spec_from).transpose()?;
    blocking(move || {
        let net = load_checkpoint(&ckpt_path)
            .map_err(|e| ApiError::not_found(format!("cannot load checkpoint: {e}")))?;
        let data = datasets_or_unavailable(&state)?;
        let (dataset, occlusion) = match &spec {
            Some(spec) => {
                let occluded = apply_occlusion(&data.1, spec)
                    .map_err(|e| ApiError::bad_request(e.to_string()))?;
                (std::borrow::Cow::Owned(occluded), Some(spec.tag()))
            }
            None => (std::borrow::Cow::Borrowed(&data.1), None),
        };
        let accuracy =
            evaluate(&net, &dataset).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(Json(EvalResponse {
            model_id: model_id_of(&net),
            accuracy,
            occlusion,
        }))
    })
    .await
}

async fn diff(
    State(state): State<SharedState>,
    Json(req): Json<DiffRequest>,
) -> ApiResult<Json<DiffResponse>> {
    let a_path = artifact_path(&state, &req.a)?;
    let b_path = artifact_path(&state, &req.b)?;
    validate_artifact_name(&req.out)?;
    let out = req.out.clone();
    blocking(move || {
        let a = import_csv(&a_path).map_err(|e| ApiError::not_found(e.to_string()))?;
        let b = import_csv(&b_path).map_err(|e| ApiError::not_found(e.to_string()))?;
        let d = diff_grid(&a, &b);

        let dir = &state.config.artifacts_dir;
        let csv = format!("{out}.csv");
        let pgm = format!("{out}.pgm");
        export_csv(&d, dir.join(&csv)).map_err(|e| ApiError::internal(e.to_string()))?;
        export_heatmap_pgm(&d, dir.join(&pgm))
            .map_err(|e| ApiError::internal(e.to_string()))?;

        Ok(Json(DiffResponse {
            files: vec![csv, pgm, format!("{out}.scale.txt")],
            mean: d.mean_over(|_, _| true),
            mild_mean: d.mean_over(|w, s| w <= s),
            severe_mean: d.mean_over(|w, s| w > s),
            min: d.min(),
            max: d.max(),
        }))
    })
    .await
}

async fn occlude(
    State(state): State<SharedState>,
    Json(req): Json<OccludeRequest>,
) -> ApiResult<Json<OccludeResponse>> {
    let spec = occlusion_spec_from(&OcclusionParams {
        width: req.width,
        spacing: req.spacing,
        direction: req.direction.clone(),
        phase: req.phase,
    })?;
    blocking(move || {
        let data = datasets_or_unavailable(&state)?;
        let test = &data.1;
        if req.index >= test.len() {
            return Err(ApiError::bad_request(format!(
                "image index {} out of range (test set has {} images)",
                req.index,
                test.len()
            )));
        }
        let (h, w) = (test.height(), test.width());
        let mask =
            occlusion_mask(&spec, h, w).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let image = test.image(req.index);
        let occluded: Vec<f32> = image
            .iter()
            .zip(&mask)
            .map(|(&v, &m)| if m { 0.0 } else { v })
            .collect();
        let mask_pixels: Vec<u8> = mask.iter().map(|&m| if m { 0u8 } else { 255 }).collect();
        let preview = pgm_bytes(w, h, &gray_from_unit(&occluded))
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let mask_pgm =
            pgm_bytes(w, h, &mask_pixels).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(Json(OccludeResponse {
            width: w,
            height: h,
            occluded_pixels: mask.iter().filter(|&&m| m).count(),
            total_pixels: h * w,
            label: test.labels[req.index],
            preview_pgm: to_base64(&preview),
            mask_pgm: to_base64(&mask_pgm),
        }))
    })
    .await
}

async fn filters(Query(query): Query<FiltersQuery>) -> ApiResult<Json<FiltersResponse>> {
    let kind = query.kind.as_deref().filter(|k| !k.is_empty()).unwrap_or("oriented");
    let bank = match kind {
        "oriented" => make_oriented_filter_bank(),
        "random" => {
            let seed = query.seed.ok_or_else(|| {
                ApiError::bad_request("random filters need an explicit seed")
            })?;
            make_random_filter_bank(seed)
        }
        other => {
            return Err(ApiError::bad_request(format!(
                "unknown filter kind '{other}' (expected 'oriented' or 'random')"
            )))
        }
    };
    let bank = if query.raw {
        bank
    } else {
        normalize_l1(&bank).map_err(|e| ApiError::internal(e.to_string()))?
    };

    let mut filters = Vec::with_capacity(bank.kernels.len());
    for (i, kernel) in bank.kernels.iter().enumerate() {
        let size = kernel.dim(2);
        let peak = kernel.iter().fold(0.0f32, |m, &v| m.max(v.abs()));
        let pixels: Vec<u8> = kernel
            .iter()
            .map(|&v| {
                if peak == 0.0 {
                    0
                } else {
                    ((v.abs() / peak) * 255.0).round() as u8
                }
            })
            .collect();
        let pgm = pgm_bytes(size, size, &pixels).map_err(|e| ApiError::internal(e.to_string()))?;
        filters.push(FilterWire {
            label: bank.kernel_label(i),
            size,
            values: kernel.data().to_vec(),
            pgm: to_base64(&pgm),
        });
    }
    Ok(Json(FiltersResponse {
        kind: kind.to_string(),
        seed: bank.seed,
        normalization: if query.raw { "raw" } else { "l1" }.to_string(),
        filters,
    }))
}

async fn orientmap(Json(req): Json<OrientMapRequest>) -> ApiResult<Json<OrientMapResponse>> {
    let bytes = from_base64(&req.image)
        .map_err(|e| ApiError::bad_request(format!("image is not valid base64: {e}")))?;
    blocking(move || {
        let tensor =
            grayscale_from_bytes(&bytes).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let (h, w) = (tensor.dim(2), tensor.dim(3));
        let plane = tensor
            .reshape(&[h, w])
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let grad = gradient(&plane).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let map = orientation_map_closed_form(&grad, DEFAULT_EPS_REG);

        let mut theta_csv = String::new();
        for r in 0..h {
            let row: Vec<String> = (0..w)
                .map(|c| match map.theta_at(r, c) {
                    Some(t) => format!("{t:.6}"),
                    None => "nan".to_string(),
                })
                .collect();
            theta_csv.push_str(&row.join(","));
            theta_csv.push('\n');
        }
        let ppm = ppm_bytes(w, h, &orientation_rgb(&map))
            .map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(Json(OrientMapResponse {
            width: w,
            height: h,
            regular_points: map.regular_count(),
            theta_csv,
            hue_ppm: to_base64(&ppm),
        }))
    })
    .await
}

async fn list_jobs(State(state): State<SharedState>) -> Json<JobList> {
    Json(JobList {
        jobs: state.jobs.list(),
    })
}

async fn get_job(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<Uuid>,
) -> ApiResult<Json<JobInfo>> {
    state
        .jobs
        .get(id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no job {id}")))
}

async fn list_artifacts(State(state): State<SharedState>) -> ApiResult<Json<ArtifactList>> {
    let dir = state.config.artifacts_dir.clone();
    blocking(move || {
        let mut artifacts = Vec::new();
        let entries = match std::fs::read_dir(&dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok(Json(ArtifactList { artifacts }))
            }
            Err(e) => return Err(ApiError::internal(e.to_string())),
        };
        for entry in entries.flatten() {
            let meta = entry.metadata().map_err(|e| ApiError::internal(e.to_string()))?;
            if meta.is_file() {
                artifacts.push(ArtifactInfo {
                    name: entry.file_name().to_string_lossy().into_owned(),
                    bytes: meta.len(),
                });
            }
        }
        artifacts.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(Json(ArtifactList { artifacts }))
    })
    .await
}

async fn download_artifact(
    State(state): State<SharedState>,
    UrlPath(name): UrlPath<String>,
) -> ApiResult<Response> {
    let path = artifact_path(&state, &name)?;
    let bytes = blocking(move || {
        std::fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                ApiError::not_found(format!("artifact '{}' not found", path.display()))
            }
            _ => ApiError::internal(e.to_string()),
        })
    })
    .await?;
    Ok((
        [(header::CONTENT_TYPE, "application/octet-stream")],
        bytes,
    )
        .into_response())
}

async fn upload_artifact(
    State(state): State<SharedState>,
    UrlPath(name): UrlPath<String>,
    body: axum::body::Bytes,
) -> ApiResult<Json<ArtifactStored>> {
    let path = artifact_path(&state, &name)?;
    let len = body.len() as u64;
    blocking(move || {
        std::fs::create_dir_all(path.parent().expect("artifacts dir has a parent"))
            .map_err(|e| ApiError::internal(e.to_string()))?;
        std::fs::write(&path, &body).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(())
    })
    .await?;
    Ok(Json(ArtifactStored { name, bytes: len }))
}
