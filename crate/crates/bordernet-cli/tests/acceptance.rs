//! The acceptance gate for the benchmark: ten numbered criteria, one test
//! per criterion, so `cargo test` prints exactly one pass/fail line each.
//! Every tolerance is pinned here, next to the check that uses it.
//!
//! Criteria 1-5 are self-contained oracle suites (seconds). Criteria 6-9
//! judge the benchmark protocol itself - Vanilla / BorderNet / RandomNet
//! plus the raw-filter BorderNet variant, seeds 1-3, ten epochs each on
//! clean MNIST, every model evaluated across the 10x10 occlusion grid.
//! Those runs are read from `target/accept-cache`, produced by
//! `scripts/protocol.sh`; any missing run is trained in-process, which
//! needs the MNIST IDX files and roughly five minutes per model per core.
//! Criterion 10 retrains a short run twice to compare artifacts byte for
//! byte.
//!
//! Criteria 7 and 9 encode directional claims about where BorderNet should
//! beat Vanilla. The suite reports the measured statistics for both filter
//! normalizations; when the data contradicts the claim, the test fails and
//! says what was measured instead.

use bordernet_core::checkpoint::save_checkpoint;
use bordernet_core::grid::{export_csv, export_heatmap_pgm, AccuracyGrid};
use bordernet_core::mnist::{load_mnist, Dataset};
use bordernet_core::models::Variant;
use bordernet_core::occlusion::{apply_occlusion, occlusion_mask, Direction, OcclusionSpec};
use bordernet_core::orientation::{
    angular_distance, orientation_map_bruteforce, orientation_map_closed_form, GradientField,
    DEFAULT_EPS_REG,
};
use bordernet_core::rng::stream_rng;
use bordernet_core::train::{build_network, evaluate_grid, train, TrainConfig};
use bordernet_core::Tensor;
use bordernet_testkit::convref::conv2d_reference;
use bordernet_testkit::fd::{central_difference_grad, find_gradient_mismatch, GradMismatch};
use bordernet_testkit::fixtures::grid_valued;
use bordernet_testkit::occref::occluded_count_by_diagonals;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

// ---------------------------------------------------------------------------
// Pinned tolerances and corpus identity
// ---------------------------------------------------------------------------

/// Criterion 1: relative error bound for analytic-vs-numeric gradients.
const GRAD_REL_TOL: f64 = 1e-3;
/// Criterion 1: absolute floor below which gradient noise is forgiven.
const GRAD_ABS_FLOOR: f64 = 1e-5;
/// Criterion 1: random instances per layer.
const GRAD_INSTANCES: usize = 100;
/// Finite-difference step for piecewise-linear layers: inputs live on the
/// 1/256 lattice, so this step keeps probes exactly representable in f32.
const LATTICE_H: f32 = 1.0 / 256.0;
/// Criterion 2: forward convolution must match the reference within this.
const CONV_TOL: f32 = 1e-5;
/// Criterion 2: number of random shapes.
const CONV_SHAPES: usize = 50;
/// Criterion 3: number of random regular gradients.
const ORIENT_POINTS: usize = 1000;
/// Criterion 3: brute-force angle-grid resolution.
const ORIENT_ANGLES: usize = 3600;
/// Criterion 5: hand-counted trainable parameters of the shared trunk.
const VANILLA_PARAMS: usize = 61706;
/// Criterion 5: trunk plus the four stored 7x7 biasless front filters.
const FRONT_PARAMS: usize = 61902;
/// Criterion 6: clean-MNIST accuracy floor for the Vanilla baseline.
const BASELINE_FLOOR: f64 = 0.98;

/// SHA-256 of the canonical MNIST IDX payloads; grids built on anything
/// else are rejected rather than silently compared.
const MNIST_TRAIN_HASH: &str =
    "edc0d1098aa497be14ace79ddd5171e5a3dcf9c4d196c015389203eb3ba1f59b";
const MNIST_TEST_HASH: &str =
    "c3f9adf9c66efb572b1f9326c3a511b45910c7173b97be66ceceeeeaef6b802b";

const SEEDS: [u64; 3] = [1, 2, 3];

// ---------------------------------------------------------------------------
// Shared infrastructure: the dataset and the cached protocol runs
// ---------------------------------------------------------------------------

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root resolves")
}

fn cache_dir() -> PathBuf {
    std::env::var_os("BORDERNET_ACCEPT_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("target/accept-cache"))
}

fn mnist() -> &'static (Dataset, Dataset) {
    static DATA: OnceLock<(Dataset, Dataset)> = OnceLock::new();
    DATA.get_or_init(|| {
        let dir = std::env::var_os("MNIST_DATA_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| workspace_root().join("data"));
        let (train, test) = load_mnist(&dir).unwrap_or_else(|e| {
            panic!(
                "criteria 6-10 need the four MNIST IDX files under {} \
                 (or MNIST_DATA_DIR): {e}",
                dir.display()
            )
        });
        assert_eq!(
            train.content_hash, MNIST_TRAIN_HASH,
            "the files under {} are not the canonical MNIST training set",
            dir.display()
        );
        assert_eq!(
            test.content_hash, MNIST_TEST_HASH,
            "the files under {} are not the canonical MNIST test set",
            dir.display()
        );
        (train, test)
    })
}

/// All twelve protocol runs keyed by model id ("vanilla-s1", ...,
/// "bordernet-s3-raw"). Cached grids are trusted only if their metadata
/// names the canonical MNIST test set.
fn runs() -> &'static BTreeMap<String, AccuracyGrid> {
    static RUNS: OnceLock<BTreeMap<String, AccuracyGrid>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let dir = cache_dir();
        let mut grids = BTreeMap::new();
        for seed in SEEDS {
            for (variant, raw) in [
                (Variant::Vanilla, false),
                (Variant::BorderNet, false),
                (Variant::RandomNet, false),
                (Variant::BorderNet, true),
            ] {
                let mut config = TrainConfig::new(variant, seed);
                config.raw_filters = raw;
                let id = config.model_id();
                let grid = load_cached_grid(&dir, &id)
                    .unwrap_or_else(|| build_run(&dir, &config));
                grids.insert(id, grid);
            }
        }
        grids
    })
}

fn load_cached_grid(dir: &std::path::Path, id: &str) -> Option<AccuracyGrid> {
    let bytes = std::fs::read(dir.join(format!("{id}.grid.json"))).ok()?;
    let grid: AccuracyGrid = serde_json::from_slice(&bytes).ok()?;
    let usable = grid.model_id == id
        && grid.dataset_hash == MNIST_TEST_HASH
        && grid.values.len() == 100
        && grid.clean_accuracy.is_some();
    usable.then_some(grid)
}

/// Train one protocol run and cache its artifacts for the next invocation.
fn build_run(dir: &std::path::Path, config: &TrainConfig) -> AccuracyGrid {
    let id = config.model_id();
    eprintln!("accept-cache misses {id}: training it now (ten epochs)");
    let (train_ds, test_ds) = mnist();
    let outcome = train(config, train_ds, &mut |_| {}).expect("training runs");
    let grid = evaluate_grid(&outcome.network, test_ds, 2, &|_, _| {})
        .expect("grid evaluation runs");

    std::fs::create_dir_all(dir).expect("cache dir");
    save_checkpoint(&outcome.network, dir.join(format!("{id}.ckpt"))).expect("checkpoint saves");
    export_csv(&grid, dir.join(format!("{id}.grid.csv"))).expect("csv exports");
    export_heatmap_pgm(&grid, dir.join(format!("{id}.grid.pgm"))).expect("heatmap exports");
    std::fs::write(
        dir.join(format!("{id}.grid.json")),
        serde_json::to_vec_pretty(&grid).expect("grid serializes"),
    )
    .expect("metadata writes");
    grid
}

fn grid(id: &str) -> &'static AccuracyGrid {
    runs()
        .get(id)
        .unwrap_or_else(|| panic!("protocol run {id} missing"))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator).
fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Across-seed mean and standard error of the mild-region (w <= s) mean
/// difference between a model family and a baseline family.
fn mild_region_stat(model: &str, baseline: &str) -> (f64, f64, Vec<f64>) {
    let per_seed: Vec<f64> = SEEDS
        .iter()
        .map(|s| {
            let m = grid(&model.replace('#', &s.to_string()));
            let b = grid(&baseline.replace('#', &s.to_string()));
            bordernet_core::grid::diff_grid(m, b).mean_over(|w, s| w <= s)
        })
        .collect();
    let se = sample_sd(&per_seed) / (per_seed.len() as f64).sqrt();
    (mean(&per_seed), se, per_seed)
}

// ---------------------------------------------------------------------------
// Criterion 1 - gradient oracle suite
// ---------------------------------------------------------------------------

fn expect_match(layer: &str, instance: usize, which: &str, m: Option<GradMismatch>) {
    if let Some(m) = m {
        panic!(
            "criterion 1: {layer} instance {instance}, {which} gradient at index {}: \
             analytic {} vs numeric {} (rel tol {GRAD_REL_TOL}, floor {GRAD_ABS_FLOOR})",
            m.index, m.analytic, m.numeric
        );
    }
}

/// Scalarize a tensor output with fixed weights so FD sees a scalar loss.
fn dot(weights: &Tensor, t: &Tensor) -> f64 {
    weights
        .iter()
        .zip(t.iter())
        .map(|(&w, &v)| f64::from(w) * f64::from(v))
        .sum()
}

fn nonzero_grid_valued(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let mut t = grid_valued(rng, shape);
    for v in t.data_mut() {
        while *v == 0.0 {
            *v = grid_valued(rng, &[1]).data()[0];
        }
    }
    t
}

/// 2x2 windows of distinct values, keeping the pooling argmax tie-free.
fn tie_free_pool_input(rng: &mut ChaCha8Rng, n: usize, c: usize, h: usize, w: usize) -> Tensor {
    let mut t = Tensor::zeros(&[n, c, h, w]);
    for img in 0..n {
        for ch in 0..c {
            for wy in (0..h).step_by(2) {
                for wx in (0..w).step_by(2) {
                    let mut vals = [0.0f32; 4];
                    loop {
                        for v in &mut vals {
                            *v = grid_valued(rng, &[1]).data()[0];
                        }
                        if (0..4).all(|i| (0..4).all(|j| i == j || vals[i] != vals[j])) {
                            break;
                        }
                    }
                    for (k, &v) in vals.iter().enumerate() {
                        let off = t.offset4(img, ch, wy + k / 2, wx + k % 2);
                        t.data_mut()[off] = v;
                    }
                }
            }
        }
    }
    t
}

/// f64 transcription of the softmax cross-entropy loss for curved-surface
/// probing.
fn loss_f64(logits: &Tensor, labels: &[u8]) -> f64 {
    let k = logits.dim(1);
    let mut total = 0.0f64;
    for (row, &label) in logits.data().chunks_exact(k).zip(labels) {
        let m = f64::from(row.iter().copied().fold(f32::NEG_INFINITY, f32::max));
        let sum: f64 = row.iter().map(|&v| (f64::from(v) - m).exp()).sum();
        total += sum.ln() + m - f64::from(row[label as usize]);
    }
    total / labels.len() as f64
}

#[test]
fn criterion_01_every_layer_gradient_matches_finite_differences() {
    use bordernet_core::ops::{
        conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool2x2_backward,
        maxpool2x2_forward, relu_backward, relu_forward, softmax_cross_entropy,
    };

    let mut rng = stream_rng(0xACC1, 1);
    for instance in 0..GRAD_INSTANCES {
        let (n, c_in, c_out) = (rng.gen_range(1..=2), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (kh, kw) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (h, w) = (rng.gen_range(kh..=6), rng.gen_range(kw..=6));
        let pad = rng.gen_range(0..=2);
        let input = grid_valued(&mut rng, &[n, c_in, h, w]);
        let kernels = grid_valued(&mut rng, &[c_out, c_in, kh, kw]);
        let bias = grid_valued(&mut rng, &[c_out]);
        let out = conv2d_forward(&input, &kernels, Some(&bias), pad).unwrap();
        let upstream = grid_valued(&mut rng, out.shape());
        let (g_in, g_k, g_b) = conv2d_backward(&upstream, &input, &kernels, pad).unwrap();

        let mut f = |x: &Tensor| dot(&upstream, &conv2d_forward(x, &kernels, Some(&bias), pad).unwrap());
        let fd = central_difference_grad(&mut f, &input, LATTICE_H);
        expect_match("conv2d", instance, "input",
            find_gradient_mismatch(g_in.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
        let mut f = |k: &Tensor| dot(&upstream, &conv2d_forward(&input, k, Some(&bias), pad).unwrap());
        let fd = central_difference_grad(&mut f, &kernels, LATTICE_H);
        expect_match("conv2d", instance, "kernel",
            find_gradient_mismatch(g_k.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
        let mut f = |b: &Tensor| dot(&upstream, &conv2d_forward(&input, &kernels, Some(b), pad).unwrap());
        let fd = central_difference_grad(&mut f, &bias, LATTICE_H);
        expect_match("conv2d", instance, "bias",
            find_gradient_mismatch(g_b.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
    }

    let mut rng = stream_rng(0xACC1, 2);
    for instance in 0..GRAD_INSTANCES {
        let (n, f_in, f_out) = (rng.gen_range(1..=3), rng.gen_range(1..=8), rng.gen_range(1..=6));
        let input = grid_valued(&mut rng, &[n, f_in]);
        let weights = grid_valued(&mut rng, &[f_out, f_in]);
        let bias = grid_valued(&mut rng, &[f_out]);
        let out = dense_forward(&input, &weights, &bias).unwrap();
        let upstream = grid_valued(&mut rng, out.shape());
        let (g_in, g_w, g_b) = dense_backward(&upstream, &input, &weights).unwrap();

        let mut f = |x: &Tensor| dot(&upstream, &dense_forward(x, &weights, &bias).unwrap());
        let fd = central_difference_grad(&mut f, &input, LATTICE_H);
        expect_match("dense", instance, "input",
            find_gradient_mismatch(g_in.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
        let mut f = |wt: &Tensor| dot(&upstream, &dense_forward(&input, wt, &bias).unwrap());
        let fd = central_difference_grad(&mut f, &weights, LATTICE_H);
        expect_match("dense", instance, "weights",
            find_gradient_mismatch(g_w.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
        let mut f = |b: &Tensor| dot(&upstream, &dense_forward(&input, &weights, b).unwrap());
        let fd = central_difference_grad(&mut f, &bias, LATTICE_H);
        expect_match("dense", instance, "bias",
            find_gradient_mismatch(g_b.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
    }

    let mut rng = stream_rng(0xACC1, 3);
    for instance in 0..GRAD_INSTANCES {
        let len = rng.gen_range(1..=32);
        let input = nonzero_grid_valued(&mut rng, &[len]);
        let out = relu_forward(&input).unwrap();
        let upstream = grid_valued(&mut rng, out.shape());
        let g = relu_backward(&upstream, &input).unwrap();
        let mut f = |x: &Tensor| dot(&upstream, &relu_forward(x).unwrap());
        let fd = central_difference_grad(&mut f, &input, LATTICE_H);
        expect_match("relu", instance, "input",
            find_gradient_mismatch(g.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
    }

    let mut rng = stream_rng(0xACC1, 4);
    for instance in 0..GRAD_INSTANCES {
        let (n, c) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let (h, w) = (2 * rng.gen_range(1..=3), 2 * rng.gen_range(1..=3));
        let input = tie_free_pool_input(&mut rng, n, c, h, w);
        let (out, argmax) = maxpool2x2_forward(&input).unwrap();
        let upstream = grid_valued(&mut rng, out.shape());
        let g = maxpool2x2_backward(&upstream, &argmax).unwrap();
        let mut f = |x: &Tensor| dot(&upstream, &maxpool2x2_forward(x).unwrap().0);
        let fd = central_difference_grad(&mut f, &input, LATTICE_H);
        expect_match("maxpool2x2", instance, "input",
            find_gradient_mismatch(g.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
    }

    let mut rng = stream_rng(0xACC1, 5);
    for instance in 0..GRAD_INSTANCES {
        let (n, k) = (rng.gen_range(1..=3), rng.gen_range(2..=10));
        let mut logits = grid_valued(&mut rng, &[n, k]);
        for v in logits.data_mut() {
            *v *= 4.0;
        }
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..k) as u8).collect();
        let (_, grad) = softmax_cross_entropy(&logits, &labels).unwrap();
        let mut f = |x: &Tensor| loss_f64(x, &labels);
        let fd = central_difference_grad(&mut f, &logits, 1e-3);
        expect_match("softmax_cross_entropy", instance, "logits",
            find_gradient_mismatch(grad.data(), &fd, GRAD_REL_TOL, GRAD_ABS_FLOOR));
    }

    println!(
        "criterion 1: 5 layer types x {GRAD_INSTANCES} instances within \
         rel {GRAD_REL_TOL} / floor {GRAD_ABS_FLOOR}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2 - convolution reference oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_convolution_matches_the_reference_oracle() {
    use bordernet_core::ops::conv2d_forward;

    let mut rng = stream_rng(0xACC2, 1);
    let mut worst = 0.0f32;
    for shape_ix in 0..CONV_SHAPES {
        let (n, c_in, c_out) = (rng.gen_range(1..=2), rng.gen_range(1..=3), rng.gen_range(1..=4));
        let (h, w) = (rng.gen_range(1..=9), rng.gen_range(1..=9));
        let k = rng.gen_range(1..=5usize.min(h).min(w));
        let pad = rng.gen_range(0..=3);
        let with_bias = rng.gen_bool(0.5);

        let input = grid_valued(&mut rng, &[n, c_in, h, w]);
        let kernels = grid_valued(&mut rng, &[c_out, c_in, k, k]);
        let bias = grid_valued(&mut rng, &[c_out]);
        let bias_opt = with_bias.then_some(&bias);

        let fast = conv2d_forward(&input, &kernels, bias_opt, pad).unwrap();
        let reference = conv2d_reference(&input, &kernels, bias_opt, pad);
        assert_eq!(fast.shape(), reference.shape(), "shape {shape_ix}");
        for (i, (&a, &b)) in fast.iter().zip(reference.iter()).enumerate() {
            let d = (a - b).abs();
            worst = worst.max(d);
            assert!(
                d <= CONV_TOL,
                "criterion 2: shape {shape_ix} entry {i}: engine {a} vs reference {b} \
                 (|diff| {d} > {CONV_TOL})"
            );
        }
    }
    println!("criterion 2: {CONV_SHAPES} random shapes, worst |diff| {worst:.2e} <= {CONV_TOL:.0e}");
}

// ---------------------------------------------------------------------------
// Criterion 3 - orientation-map oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_orientation_closed_form_matches_brute_force() {
    use std::f32::consts::TAU;

    let (rows, cols) = (25, 40);
    assert_eq!(rows * cols, ORIENT_POINTS);
    let mut rng = stream_rng(0xACC3, 1);
    let mut ix = vec![0.0f32; ORIENT_POINTS];
    let mut iy = vec![0.0f32; ORIENT_POINTS];
    for i in 0..ORIENT_POINTS {
        loop {
            let dx: f32 = rng.gen_range(-1.0..1.0);
            let dy: f32 = rng.gen_range(-1.0..1.0);
            if (dx * dx + dy * dy).sqrt() > 0.05 {
                ix[i] = dx;
                iy[i] = dy;
                break;
            }
        }
    }
    // One deliberately degenerate point: must be masked by both methods.
    ix[0] = 0.0;
    iy[0] = 0.0;

    let grad = GradientField {
        ix: Tensor::from_vec(&[rows, cols], ix).unwrap(),
        iy: Tensor::from_vec(&[rows, cols], iy).unwrap(),
    };
    let closed = orientation_map_closed_form(&grad, DEFAULT_EPS_REG);
    let brute = orientation_map_bruteforce(&grad, ORIENT_ANGLES, DEFAULT_EPS_REG).unwrap();

    assert!(closed.theta_at(0, 0).is_none(), "degenerate point got an angle");
    assert!(brute.theta_at(0, 0).is_none(), "degenerate point got an angle");
    assert_eq!(closed.regular_count(), ORIENT_POINTS - 1);
    assert_eq!(brute.regular_count(), ORIENT_POINTS - 1);

    let step = TAU / ORIENT_ANGLES as f32;
    let mut worst = 0.0f32;
    for r in 0..rows {
        for c in 0..cols {
            let (Some(a), Some(b)) = (closed.theta_at(r, c), brute.theta_at(r, c)) else {
                continue;
            };
            let d = angular_distance(a, b);
            worst = worst.max(d);
            assert!(
                d <= step + 1e-6,
                "criterion 3: point ({r},{c}): closed form {a} vs {ORIENT_ANGLES}-angle \
                 scan {b}, distance {d} > one grid step {step}"
            );
        }
    }
    println!(
        "criterion 3: {} regular gradients within one grid step ({step:.2e} rad) \
         of the {ORIENT_ANGLES}-angle scan, worst {worst:.2e}",
        ORIENT_POINTS - 1
    );
}

// ---------------------------------------------------------------------------
// Criterion 4 - occlusion oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_occlusion_counts_exactly_idempotently_label_preserving() {
    // Exact counts for every cell of the benchmark grid, both directions.
    for direction in [Direction::Anti, Direction::Main] {
        for w in 1..=10 {
            for s in 1..=10 {
                let spec = OcclusionSpec {
                    width: w,
                    spacing: s,
                    direction,
                    phase: 0,
                };
                let mask = occlusion_mask(&spec, 28, 28).unwrap();
                let counted = mask.iter().filter(|&&m| m).count();
                let reference = occluded_count_by_diagonals(&spec, 28, 28);
                assert_eq!(
                    counted, reference,
                    "criterion 4: cell w={w} s={s} {direction:?}: mask occludes {counted} \
                     pixels, brute-force count {reference}"
                );
            }
        }
    }

    // Idempotence and label preservation on a small synthetic dataset.
    let tmp = tempfile::TempDir::new().unwrap();
    let (imgs, lbls) = (tmp.path().join("imgs"), tmp.path().join("lbls"));
    bordernet_testkit::fixtures::write_separable_idx(&imgs, &lbls, 20).unwrap();
    let ds = bordernet_core::mnist::load_idx(&imgs, &lbls, bordernet_core::mnist::Split::Test)
        .unwrap();
    let spec = OcclusionSpec {
        width: 3,
        spacing: 2,
        direction: Direction::Anti,
        phase: 0,
    };
    let once = apply_occlusion(&ds, &spec).unwrap();
    let twice = apply_occlusion(&once, &spec).unwrap();
    assert_eq!(once.images.data(), twice.images.data(), "criterion 4: not idempotent");
    assert_eq!(once.labels, ds.labels, "criterion 4: labels changed");

    println!("criterion 4: 100 cells x 2 directions exact; idempotent; labels preserved");
}

// ---------------------------------------------------------------------------
// Criterion 5 - parameter accounting
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_parameter_counts_are_exact() {
    let vanilla = build_network(&TrainConfig::new(Variant::Vanilla, 1)).unwrap();
    let border = build_network(&TrainConfig::new(Variant::BorderNet, 1)).unwrap();
    let random = build_network(&TrainConfig::new(Variant::RandomNet, 1)).unwrap();

    assert_eq!(vanilla.trainable_parameter_count(), VANILLA_PARAMS, "criterion 5: vanilla");
    assert_eq!(vanilla.stored_parameter_count(), VANILLA_PARAMS, "criterion 5: vanilla stored");
    assert_eq!(border.stored_parameter_count(), FRONT_PARAMS, "criterion 5: bordernet stored");
    assert_eq!(random.stored_parameter_count(), FRONT_PARAMS, "criterion 5: randomnet stored");
    assert_eq!(
        border.stored_parameter_count(),
        random.stored_parameter_count(),
        "criterion 5: front variants must match"
    );
    // The front filters stay frozen under the benchmark protocol.
    assert_eq!(border.trainable_parameter_count(), VANILLA_PARAMS, "criterion 5: frozen front");

    println!(
        "criterion 5: vanilla {VANILLA_PARAMS} trainable; bordernet/randomnet {FRONT_PARAMS} \
         stored ({} frozen front weights)",
        FRONT_PARAMS - VANILLA_PARAMS
    );
}

// ---------------------------------------------------------------------------
// Criterion 6 - baseline training quality
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_vanilla_baseline_reaches_the_accuracy_floor() {
    for seed in SEEDS {
        let g = grid(&format!("vanilla-s{seed}"));
        let clean = g.clean_accuracy.unwrap();
        println!("criterion 6: vanilla-s{seed} clean accuracy {clean:.4}");
        assert!(
            clean >= BASELINE_FLOOR,
            "criterion 6: vanilla-s{seed} reached {clean:.4} < {BASELINE_FLOOR}"
        );
    }
}

// ---------------------------------------------------------------------------
// Criteria 7-9 - directional claims over the occlusion grid
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_bordernet_beats_vanilla_on_the_mild_region() {
    let (m_norm, se_norm, per_seed_norm) = mild_region_stat("bordernet-s#", "vanilla-s#");
    let (m_raw, se_raw, per_seed_raw) = mild_region_stat("bordernet-s#-raw", "vanilla-s#");
    println!(
        "criterion 7: mild-region (w <= s) mean of BorderNet - Vanilla over seeds {SEEDS:?}\n\
         criterion 7:   normalized filters: {m_norm:+.4} (se {se_norm:.4}; per seed {per_seed_norm:.4?})\n\
         criterion 7:   raw filters:        {m_raw:+.4} (se {se_raw:.4}; per seed {per_seed_raw:.4?})"
    );
    assert!(
        m_norm > se_norm,
        "criterion 7: the mild-region mean must exceed zero by its standard error; \
         measured {m_norm:+.4} (se {se_norm:.4}) with normalized filters and {m_raw:+.4} \
         (se {se_raw:.4}) with raw filters. In these runs BorderNet's advantage \
         concentrates at small stripe spacing instead (see criterion 9 output)."
    );
}

#[test]
fn criterion_08_bordernet_beats_randomnet_on_the_mild_region() {
    let (m_norm, se_norm, per_seed_norm) = mild_region_stat("bordernet-s#", "randomnet-s#");
    let (m_raw, se_raw, per_seed_raw) = mild_region_stat("bordernet-s#-raw", "randomnet-s#");
    println!(
        "criterion 8: mild-region (w <= s) mean of BorderNet - RandomNet over seeds {SEEDS:?}\n\
         criterion 8:   normalized filters: {m_norm:+.4} (se {se_norm:.4}; per seed {per_seed_norm:.4?})\n\
         criterion 8:   raw filters:        {m_raw:+.4} (se {se_raw:.4}; per seed {per_seed_raw:.4?})"
    );
    assert!(
        m_norm > se_norm,
        "criterion 8: the mild-region mean must exceed zero by its standard error; \
         measured {m_norm:+.4} (se {se_norm:.4}) normalized, {m_raw:+.4} (se {se_raw:.4}) raw"
    );
}

/// Cells where the across-seed mean of (model - Vanilla) is below minus one
/// across-seed sample standard deviation for that cell.
fn underperforming_cells(model: &str) -> Vec<(u32, u32, f64, f64)> {
    let mut cells = Vec::new();
    for w in 1..=10u32 {
        for s in 1..=10u32 {
            let diffs: Vec<f64> = SEEDS
                .iter()
                .map(|seed| {
                    let m = grid(&model.replace('#', &seed.to_string()));
                    let v = grid(&format!("vanilla-s{seed}"));
                    m.at(w, s) - v.at(w, s)
                })
                .collect();
            let (m, sd) = (mean(&diffs), sample_sd(&diffs));
            if m < -sd {
                cells.push((w, s, m, sd));
            }
        }
    }
    cells
}

#[test]
fn criterion_09_underperformance_is_confined_to_severe_occlusion() {
    for (label, model) in [("normalized", "bordernet-s#"), ("raw", "bordernet-s#-raw")] {
        let cells = underperforming_cells(model);
        let mild: Vec<_> = cells.iter().filter(|(w, s, _, _)| w <= s).collect();
        println!(
            "criterion 9 ({label}): {} cells underperform Vanilla beyond seed spread, \
             {} of them in the mild region w <= s:",
            cells.len(),
            mild.len()
        );
        for (w, s, m, sd) in &cells {
            println!(
                "criterion 9 ({label}):   w={w:2} s={s:2} mean {m:+.4} spread {sd:.4} [{}]",
                if w > s { "severe" } else { "mild" }
            );
        }
        if label == "normalized" {
            // The claim tolerates a single deviating cell on the region
            // boundary; anything more is a failure.
            let deviations = mild.len();
            let only_boundary = mild
                .iter()
                .all(|(w, s, _, _)| (*w as i64 - *s as i64).abs() <= 1);
            assert!(
                deviations == 0 || (deviations == 1 && only_boundary),
                "criterion 9: {deviations} mild-region cells underperform beyond the \
                 seed spread (one boundary cell is tolerated); in these runs BorderNet \
                 trades clean-regime accuracy for robustness at small stripe spacing, \
                 so thin-stripe (w <= 2) and wide-spacing cells sit below Vanilla"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 10 - determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_deterministic_runs_are_byte_identical() {
    let (train_ds, test_ds) = mnist();
    // One epoch keeps the check fast; determinism does not depend on length.
    let mut config = TrainConfig::new(Variant::Vanilla, 42);
    config.epochs = 1;
    assert!(config.deterministic);
    let subset = test_ds.take(1000);

    let tmp = tempfile::TempDir::new().unwrap();
    let mut artifacts: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for run in 0..2 {
        let outcome = train(&config, train_ds, &mut |_| {}).unwrap();
        let ckpt = tmp.path().join(format!("run{run}.ckpt"));
        let csv = tmp.path().join(format!("run{run}.csv"));
        save_checkpoint(&outcome.network, &ckpt).unwrap();
        let grid = evaluate_grid(&outcome.network, &subset, 2, &|_, _| {}).unwrap();
        export_csv(&grid, &csv).unwrap();
        artifacts.push((std::fs::read(&ckpt).unwrap(), std::fs::read(&csv).unwrap()));
    }

    assert!(
        artifacts[0].0 == artifacts[1].0,
        "criterion 10: checkpoints differ between identical runs"
    );
    assert!(
        artifacts[0].1 == artifacts[1].1,
        "criterion 10: grid CSVs differ between identical runs"
    );
    println!(
        "criterion 10: two identical runs -> byte-identical checkpoint ({} bytes) \
         and grid CSV ({} bytes)",
        artifacts[0].0.len(),
        artifacts[0].1.len()
    );
}
