//! Subcommand implementations: thin orchestration over the HTTP client.

use crate::Command;
use anyhow::{bail, Context, Result};
use bordernet_client::wire::*;
use bordernet_client::{from_base64, to_base64, Client};
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// A connected client, plus the in-process server keeping it alive when no
/// remote URL was given.
pub struct Session {
    client: Client,
    ephemeral: Option<bordernet_server::BoundServer>,
}

impl Session {
    pub async fn connect(
        server: Option<String>,
        data: PathBuf,
        artifacts: PathBuf,
    ) -> Result<Session> {
        match server {
            Some(url) => Ok(Session {
                client: Client::new(url),
                ephemeral: None,
            }),
            None => {
                let config = bordernet_server::ServerConfig::new(data, artifacts);
                let server = bordernet_server::serve("127.0.0.1:0".parse().unwrap(), config)
                    .await
                    .context("starting in-process service")?;
                let client = Client::new(format!("http://{}", server.addr));
                Ok(Session {
                    client,
                    ephemeral: Some(server),
                })
            }
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if let Some(server) = &self.ephemeral {
            server.abort();
        }
    }
}

pub async fn run(session: &Session, command: Command) -> Result<()> {
    let client = &session.client;
    match command {
        Command::Serve { .. } => unreachable!("serve is handled in main"),
        Command::Train {
            variant,
            seed,
            epochs,
            batch_size,
            learning_rate,
            trainable_front,
            raw_filters,
            checkpoint,
            out,
        } => {
            let req = TrainRequest {
                variant,
                seed,
                epochs,
                batch_size,
                learning_rate,
                front_trainable: trainable_front,
                raw_filters,
                checkpoint,
            };
            let job = client.start_train(&req).await?;
            let info = client.wait_for_job(job.job_id, print_progress).await?;
            clear_progress();
            let Some(JobResultWire::Train(result)) = info.result else {
                bail!("train job returned no result");
            };
            for e in &result.epochs {
                println!(
                    "epoch {:>2}: loss {:.4}  train accuracy {:.4}",
                    e.epoch, e.mean_loss, e.train_accuracy
                );
            }
            println!("model: {}", result.model_id);
            println!("clean test accuracy: {:.4}", result.clean_test_accuracy);
            println!("checkpoint artifact: {}", result.checkpoint);
            if let Some(path) = out {
                let bytes = client.download_artifact(&result.checkpoint).await?;
                write_file(&path, &bytes)?;
                println!("saved {}", path.display());
            }
            Ok(())
        }
        Command::EvalGrid {
            checkpoint,
            out,
            workers,
        } => {
            let artifact = ensure_uploaded(client, &checkpoint).await?;
            let prefix = artifact_prefix(&out)?;
            let req = EvalGridRequest {
                checkpoint: artifact,
                out_prefix: prefix,
                workers,
            };
            let job = client.start_eval_grid(&req).await?;
            let info = client.wait_for_job(job.job_id, print_progress).await?;
            clear_progress();
            let Some(JobResultWire::Grid(result)) = info.result else {
                bail!("grid job returned no result");
            };
            println!("model: {}", result.model_id);
            println!("clean accuracy: {:.4}", result.clean_accuracy);
            println!("grid mean accuracy: {:.4}", result.mean_accuracy);
            download_with_prefix(client, &result.files, &out).await?;
            Ok(())
        }
        Command::Eval {
            checkpoint,
            w,
            s,
            direction,
            phase,
        } => {
            let artifact = ensure_uploaded(client, &checkpoint).await?;
            let occlusion = match (w, s) {
                (Some(width), Some(spacing)) => Some(OcclusionParams {
                    width,
                    spacing,
                    direction,
                    phase,
                }),
                _ => None,
            };
            let resp = client
                .eval(&EvalRequest {
                    checkpoint: artifact,
                    occlusion,
                })
                .await?;
            match resp.occlusion {
                Some(tag) => println!(
                    "{} under {}: accuracy {:.4}",
                    resp.model_id, tag, resp.accuracy
                ),
                None => println!("{} clean: accuracy {:.4}", resp.model_id, resp.accuracy),
            }
            Ok(())
        }
        Command::Diff { a, b, out } => {
            let a_name = ensure_uploaded(client, &a).await?;
            let b_name = ensure_uploaded(client, &b).await?;
            let prefix = artifact_prefix(&out)?;
            let resp = client
                .diff(&DiffRequest {
                    a: a_name,
                    b: b_name,
                    out: prefix,
                })
                .await?;
            println!("mean difference: {:+.4}", resp.mean);
            println!("mild cells (w <= s): {:+.4}", resp.mild_mean);
            println!("severe cells (w > s): {:+.4}", resp.severe_mean);
            println!("range: [{:+.4}, {:+.4}]", resp.min, resp.max);
            download_with_prefix(client, &resp.files, &out).await?;
            Ok(())
        }
        Command::Occlude {
            w,
            s,
            direction,
            phase,
            index,
            preview,
        } => {
            let resp = client
                .occlude(&OccludeRequest {
                    width: w,
                    spacing: s,
                    direction,
                    phase,
                    index,
                })
                .await?;
            write_file(&preview, &from_base64(&resp.preview_pgm)?)?;
            let stem = preview
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let mask_path = preview.with_file_name(format!("{stem}.mask.pgm"));
            write_file(&mask_path, &from_base64(&resp.mask_pgm)?)?;
            println!(
                "digit {} with {}/{} pixels occluded ({:.1}%)",
                resp.label,
                resp.occluded_pixels,
                resp.total_pixels,
                100.0 * resp.occluded_pixels as f64 / resp.total_pixels as f64
            );
            println!("wrote {}", preview.display());
            println!("wrote {}", mask_path.display());
            Ok(())
        }
        Command::Filters {
            export,
            kind,
            seed,
            raw,
        } => {
            let resp = client
                .filters(&FiltersQuery { kind, seed, raw })
                .await?;
            std::fs::create_dir_all(&export)
                .with_context(|| format!("creating {}", export.display()))?;
            for f in &resp.filters {
                let pgm = export.join(format!("{}.pgm", f.label));
                write_file(&pgm, &from_base64(&f.pgm)?)?;
                let mut text = String::new();
                for row in f.values.chunks(f.size) {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
                    text.push_str(&cells.join(" "));
                    text.push('\n');
                }
                let txt = export.join(format!("{}.txt", f.label));
                write_file(&txt, text.as_bytes())?;
                println!("wrote {} and {}", pgm.display(), txt.display());
            }
            println!(
                "{} filters ({} normalization) exported to {}",
                resp.kind,
                resp.normalization,
                export.display()
            );
            Ok(())
        }
        Command::Orientmap { image, out } => {
            let bytes = std::fs::read(&image)
                .with_context(|| format!("reading {}", image.display()))?;
            let resp = client
                .orientmap(&OrientMapRequest {
                    image: to_base64(&bytes),
                })
                .await?;
            let csv_path = sibling_with_suffix(&out, ".theta.csv");
            let ppm_path = sibling_with_suffix(&out, ".orient.ppm");
            write_file(&csv_path, resp.theta_csv.as_bytes())?;
            write_file(&ppm_path, &from_base64(&resp.hue_ppm)?)?;
            println!(
                "{}x{} image, {} of {} pixels have a defined orientation",
                resp.width,
                resp.height,
                resp.regular_points,
                resp.width * resp.height
            );
            println!("wrote {}", csv_path.display());
            println!("wrote {}", ppm_path.display());
            Ok(())
        }
        Command::Dataset => {
            let info = client.dataset().await?;
            println!("data directory: {}", info.data_dir);
            println!(
                "train: {} examples (hash {})",
                info.train_examples, info.train_hash
            );
            println!(
                "test: {} examples (hash {})",
                info.test_examples, info.test_hash
            );
            Ok(())
        }
        Command::Jobs { id } => {
            match id {
                Some(id) => {
                    let info = client.job(id).await?;
                    println!("{}", serde_json::to_string_pretty(&info)?);
                }
                None => {
                    let list = client.jobs().await?;
                    if list.jobs.is_empty() {
                        println!("no jobs");
                    }
                    for j in list.jobs {
                        let summary = match (&j.result, &j.error) {
                            (Some(JobResultWire::Train(t)), _) => {
                                format!("{} clean {:.4}", t.model_id, t.clean_test_accuracy)
                            }
                            (Some(JobResultWire::Grid(g)), _) => {
                                format!("{} mean {:.4}", g.model_id, g.mean_accuracy)
                            }
                            (None, Some(e)) => e.clone(),
                            (None, None) => String::new(),
                        };
                        println!("{}  {:?}  {:?}  {}", j.id, j.kind, j.state, summary);
                    }
                }
            }
            Ok(())
        }
    }
}

/// Render job progress on one status line (stderr, overwritten in place).
fn print_progress(info: &JobInfo) {
    let text = match &info.progress {
        Some(JobProgress::Train {
            epoch,
            total_epochs,
            batch,
            total_batches,
            last_loss,
        }) => format!(
            "epoch {epoch}/{total_epochs}  batch {batch}/{total_batches}  loss {last_loss:.4}"
        ),
        Some(JobProgress::Grid {
            cells_done,
            cells_total,
        }) => format!("grid cells {cells_done}/{cells_total}"),
        None => format!("{:?}...", info.state),
    };
    eprint!("\r{text}        ");
    let _ = std::io::stderr().flush();
}

fn clear_progress() {
    eprint!("\r{:70}\r", "");
    let _ = std::io::stderr().flush();
}

/// Accept either a server-side artifact name or a local file: local files are
/// uploaded under their file name first.
async fn ensure_uploaded(client: &Client, checkpoint: &str) -> Result<String> {
    let path = Path::new(checkpoint);
    if path.is_file() {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .context("checkpoint path has no usable file name")?
            .to_string();
        let bytes = std::fs::read(path)?;
        client.upload_artifact(&name, bytes).await?;
        Ok(name)
    } else {
        Ok(checkpoint.to_string())
    }
}

/// Server-side prefix for outputs: the file name part of the local prefix.
fn artifact_prefix(out: &Path) -> Result<String> {
    Ok(out
        .file_name()
        .and_then(|n| n.to_str())
        .context("output prefix has no usable file name")?
        .to_string())
}

/// Download artifacts next to the local output prefix, mapping the
/// server-side prefix onto the local one.
async fn download_with_prefix(client: &Client, files: &[String], out: &Path) -> Result<()> {
    let server_prefix = artifact_prefix(out)?;
    for file in files {
        let suffix = file
            .strip_prefix(&server_prefix)
            .unwrap_or(file.as_str());
        let local = sibling_with_suffix(out, suffix);
        let bytes = client.download_artifact(file).await?;
        write_file(&local, &bytes)?;
        println!("wrote {}", local.display());
    }
    Ok(())
}

/// `/a/b/prefix` + `.csv` → `/a/b/prefix.csv`.
fn sibling_with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(suffix);
    base.with_file_name(name)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
