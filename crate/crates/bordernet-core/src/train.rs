//! Training protocol, evaluation, and the occlusion-grid benchmark loop.
//!
//! The default protocol is fixed: ADAM at learning rate 0.001, 10 epochs,
//! batch size 64, per-epoch seeded shuffling, last partial batch kept.
//! Training accepts only the clean training split — occluded data is
//! refused at the entry point.

use crate::adam::{adam_step, AdamState};
use crate::error::{CoreError, Result};
use crate::filter_bank::{make_oriented_filter_bank, make_random_filter_bank, normalize_l1};
use crate::grid::AccuracyGrid;
use crate::mnist::{Dataset, Provenance, Split};
use crate::models::{build_bordernet, build_randomnet, build_vanilla, Network, Variant};
use crate::occlusion::{apply_occlusion, standard_grid};
use crate::ops::softmax_cross_entropy;
use crate::rng::{shuffle_indices, stream_rng, streams};
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};

/// Batch size used for inference; fixed so evaluation is reproducible.
pub const EVAL_BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub variant: Variant,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f32,
    /// Let the optimizer update the front filters (BorderNet/RandomNet).
    pub front_trainable: bool,
    /// Use the raw 0/1 stripe values instead of L1-normalized kernels.
    pub raw_filters: bool,
    /// Request bit-reproducible runs. The current implementation is
    /// reproducible in both modes (training is serial and grid results
    /// merge by cell index); the flag is recorded so artifacts state what
    /// was promised.
    pub deterministic: bool,
}

impl TrainConfig {
    /// The benchmark protocol for a variant/seed pair.
    pub fn new(variant: Variant, seed: u64) -> Self {
        TrainConfig {
            variant,
            seed,
            epochs: 10,
            batch_size: 64,
            learning_rate: 0.001,
            front_trainable: false,
            raw_filters: false,
            deterministic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(CoreError::InvalidArgument(
                "epochs and batch size must be positive".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// Stable identifier used in artifact names and grid metadata.
    pub fn model_id(&self) -> String {
        let mut id = format!("{}-s{}", self.variant, self.seed);
        if self.front_trainable {
            id.push_str("-tf");
        }
        if self.raw_filters {
            id.push_str("-raw");
        }
        id
    }
}

/// Identifier recoverable from a built or loaded network.
pub fn model_id_of(net: &Network) -> String {
    let spec = &net.spec;
    let mut id = format!("{}-s{}", spec.variant, spec.seed);
    if spec.front_trainable {
        id.push_str("-tf");
    }
    if let Some(bank) = &spec.front_bank {
        if bank.normalization == crate::filter_bank::Normalization::RawOnes {
            id.push_str("-raw");
        }
    }
    id
}

/// Instantiate the network a config describes (fresh initial weights).
pub fn build_network(config: &TrainConfig) -> Result<Network> {
    config.validate()?;
    match config.variant {
        Variant::Vanilla => Ok(build_vanilla(config.seed)),
        Variant::BorderNet => {
            let mut bank = make_oriented_filter_bank();
            if !config.raw_filters {
                bank = normalize_l1(&bank)?;
            }
            build_bordernet(config.seed, bank, config.front_trainable)
        }
        Variant::RandomNet => {
            let mut bank = make_random_filter_bank(config.seed);
            if !config.raw_filters {
                bank = normalize_l1(&bank)?;
            }
            build_randomnet(config.seed, bank, config.front_trainable)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Loss averaged over all training examples of the epoch.
    pub mean_loss: f64,
    /// Running accuracy over the epoch's own training batches.
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum TrainEvent {
    EpochStarted {
        epoch: usize,
        total_epochs: usize,
    },
    BatchCompleted {
        epoch: usize,
        batch: usize,
        total_batches: usize,
        loss: f64,
    },
    EpochCompleted {
        stats: EpochStats,
    },
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub network: Network,
    pub epochs: Vec<EpochStats>,
}

pub fn batches_per_epoch(examples: usize, batch_size: usize) -> usize {
    examples.div_ceil(batch_size)
}

fn gather(dataset: &Dataset, indices: &[usize]) -> (Tensor, Vec<u8>) {
    let (h, w) = (dataset.height(), dataset.width());
    let mut data = Vec::with_capacity(indices.len() * h * w);
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        data.extend_from_slice(dataset.image(i));
        labels.push(dataset.labels[i]);
    }
    let images = Tensor::from_vec(&[indices.len(), 1, h, w], data).expect("gather shape");
    (images, labels)
}

/// Class predicted for one logit row; ties go to the smallest class index.
pub fn argmax_row(row: &[f32]) -> usize {
    let mut best = 0usize;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn count_correct(logits: &Tensor, labels: &[u8]) -> usize {
    let k = logits.dim(1);
    logits
        .data()
        .chunks_exact(k)
        .zip(labels)
        .filter(|(row, &label)| argmax_row(row) == label as usize)
        .count()
}

/// Fraction of rows whose argmax equals the label.
pub fn accuracy_from_logits(logits: &Tensor, labels: &[u8]) -> Result<f64> {
    if logits.rank() != 2 || logits.dim(0) != labels.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "logits {:?} vs {} labels",
            logits.shape(),
            labels.len()
        )));
    }
    Ok(count_correct(logits, labels) as f64 / labels.len().max(1) as f64)
}

fn guard_training_data(dataset: &Dataset) -> Result<()> {
    if let Provenance::Occluded(spec) = dataset.provenance {
        return Err(CoreError::RefusedTrainingData(format!(
            "occluded ({})",
            spec.tag()
        )));
    }
    if dataset.split != Split::Train {
        return Err(CoreError::RefusedTrainingData(format!(
            "the {} split",
            dataset.split
        )));
    }
    Ok(())
}

/// Train a fresh network described by `config` on the clean training split.
///
/// Emits [`TrainEvent`]s as it goes; pass a no-op closure to ignore them.
pub fn train(
    config: &TrainConfig,
    dataset: &Dataset,
    on_event: &mut dyn FnMut(TrainEvent),
) -> Result<TrainOutcome> {
    config.validate()?;
    guard_training_data(dataset)?;
    if dataset.is_empty() {
        return Err(CoreError::InvalidArgument("empty training dataset".into()));
    }

    let mut net = build_network(config)?;
    let mut adam = AdamState::new(config.learning_rate, &net.params);
    let n = dataset.len();
    let total_batches = batches_per_epoch(n, config.batch_size);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut epochs = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        on_event(TrainEvent::EpochStarted {
            epoch,
            total_epochs: config.epochs,
        });
        let mut rng = stream_rng(config.seed, streams::SHUFFLE + (epoch as u64 - 1));
        shuffle_indices(&mut rng, &mut indices);

        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for (b, chunk) in indices.chunks(config.batch_size).enumerate() {
            let (images, labels) = gather(dataset, chunk);
            let (logits, cache) = net.forward_training(&images)?;
            let (loss, grad) = softmax_cross_entropy(&logits, &labels)?;
            if !loss.is_finite() {
                return Err(CoreError::NonFinite(format!(
                    "training loss at epoch {epoch}, batch {}",
                    b + 1
                )));
            }
            net.backward(&grad, &cache)?;
            adam_step(&mut net.params, &mut adam)?;
            loss_sum += loss * chunk.len() as f64;
            correct += count_correct(&logits, &labels);
            on_event(TrainEvent::BatchCompleted {
                epoch,
                batch: b + 1,
                total_batches,
                loss,
            });
        }

        let stats = EpochStats {
            epoch,
            mean_loss: loss_sum / n as f64,
            train_accuracy: correct as f64 / n as f64,
        };
        on_event(TrainEvent::EpochCompleted { stats });
        epochs.push(stats);
    }

    Ok(TrainOutcome {
        network: net,
        epochs,
    })
}

/// Accuracy of `net` on a dataset, batched at [`EVAL_BATCH`].
pub fn evaluate(net: &Network, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(CoreError::InvalidArgument("empty evaluation dataset".into()));
    }
    let indices: Vec<usize> = (0..dataset.len()).collect();
    let mut correct = 0usize;
    for chunk in indices.chunks(EVAL_BATCH) {
        let (images, labels) = gather(dataset, chunk);
        let logits = net.forward(&images)?;
        correct += count_correct(&logits, &labels);
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Evaluate `net` on every cell of the 10×10 occlusion grid.
///
/// `clean_test` must be the unoccluded test split; each cell occludes its
/// own copy. Cells are distributed over `workers` threads and merged by
/// index, so the result does not depend on worker count or scheduling.
/// `on_progress(completed, total)` fires after each cell.
pub fn evaluate_grid(
    net: &Network,
    clean_test: &Dataset,
    workers: usize,
    on_progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<AccuracyGrid> {
    if clean_test.provenance != Provenance::Clean {
        return Err(CoreError::InvalidArgument(
            "grid evaluation expects the clean test set; it applies occlusions itself".into(),
        ));
    }
    let clean_accuracy = evaluate(net, clean_test)?;
    let specs = standard_grid();
    let total = specs.len();
    let workers = workers.clamp(1, total);

    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let mut cells: Vec<Option<Result<f64>>> = (0..total).map(|_| None).collect();

    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let specs = &specs;
                let next = &next;
                let done = &done;
                scope.spawn(move || {
                    let mut out: Vec<(usize, Result<f64>)> = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= total {
                            break;
                        }
                        let cell = apply_occlusion(clean_test, &specs[i])
                            .and_then(|occluded| evaluate(net, &occluded));
                        let completed = done.fetch_add(1, Ordering::Relaxed) + 1;
                        on_progress(completed, total);
                        out.push((i, cell));
                    }
                    out
                })
            })
            .collect();
        for handle in handles {
            for (i, cell) in handle.join().expect("grid worker panicked") {
                cells[i] = Some(cell);
            }
        }
    });

    let mut grid = AccuracyGrid::empty(
        model_id_of(net),
        net.spec.seed,
        clean_test.content_hash.clone(),
    );
    grid.clean_accuracy = Some(clean_accuracy);
    for (i, spec) in specs.iter().enumerate() {
        let value = cells[i].take().expect("all cells visited")?;
        grid.set(spec.width, spec.spacing, value);
    }
    Ok(grid)
}
