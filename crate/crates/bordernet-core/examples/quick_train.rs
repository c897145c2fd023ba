//! Train one variant for a few epochs and print a slice of the occlusion
//! grid. Handy for smoke-testing a checkout against real MNIST without the
//! full benchmark protocol.
//!
//! Usage: quick_train [variant] [epochs] [seed] [raw]
//! MNIST IDX files are found via MNIST_DATA_DIR (default ./data).

use bordernet_core::mnist::{default_data_dir, load_mnist};
use bordernet_core::models::Variant;
use bordernet_core::occlusion::{apply_occlusion, OcclusionSpec};
use bordernet_core::train::{evaluate, train, TrainConfig, TrainEvent};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let variant = args
        .get(1)
        .map(|s| Variant::parse(s))
        .transpose()?
        .unwrap_or(Variant::BorderNet);
    let epochs: usize = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let seed: u64 = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(1);

    let dir = default_data_dir();
    let (train_set, test_set) = load_mnist(&dir)?;
    println!(
        "loaded {} train / {} test images from {}",
        train_set.len(),
        test_set.len(),
        dir.display()
    );

    let mut config = TrainConfig::new(variant, seed);
    config.epochs = epochs;
    config.raw_filters = args.get(4).is_some_and(|s| s == "raw");
    println!("training {}", config.model_id());
    let started = Instant::now();
    let outcome = train(&config, &train_set, &mut |event| {
        if let TrainEvent::EpochCompleted { stats } = event {
            println!(
                "epoch {:>2}: loss {:.4}  train acc {:.4}  [{:.1}s]",
                stats.epoch,
                stats.mean_loss,
                stats.train_accuracy,
                started.elapsed().as_secs_f64()
            );
        }
    })?;

    let clean = evaluate(&outcome.network, &test_set)?;
    println!("clean test accuracy: {clean:.4}");
    for (w, s) in [(2, 2), (2, 6), (6, 2), (4, 4)] {
        let occluded = apply_occlusion(&test_set, &OcclusionSpec::new(w, s))?;
        let acc = evaluate(&outcome.network, &occluded)?;
        println!("occluded w={w} s={s}: accuracy {acc:.4}");
    }
    Ok(())
}
