//! `bordernet` — command-line front end for the benchmark service.
//!
//! Every subcommand except `serve` talks HTTP to a service instance: either
//! a remote one named by `--server`, or an ephemeral in-process server bound
//! to a loopback port for the duration of the command.

mod commands;

use clap::{Parser, Subcommand};
use std::net::SocketAddr;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "bordernet",
    version,
    about = "Occlusion-robustness benchmark for LeNet-5 variants with oriented front filters"
)]
struct Cli {
    /// Service URL (e.g. http://127.0.0.1:7878); runs in-process when omitted.
    #[arg(long, global = true, env = "BORDERNET_SERVER")]
    server: Option<String>,

    /// Directory holding the MNIST IDX files (plain or .gz).
    #[arg(long, global = true, env = "MNIST_DATA_DIR", default_value = "data")]
    data: PathBuf,

    /// Artifact store of the in-process service (checkpoints, grids).
    #[arg(long, global = true, env = "BORDERNET_ARTIFACTS", default_value = "artifacts")]
    artifacts: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark service in the foreground.
    Serve {
        /// Listen address; port 0 picks a free port.
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: SocketAddr,
    },
    /// Train a variant on clean MNIST and store a checkpoint.
    Train {
        /// vanilla, bordernet or randomnet.
        #[arg(long)]
        variant: String,
        #[arg(long)]
        seed: u64,
        /// Protocol default: 10.
        #[arg(long)]
        epochs: Option<usize>,
        /// Protocol default: 64.
        #[arg(long)]
        batch_size: Option<usize>,
        /// Protocol default: 0.001.
        #[arg(long)]
        learning_rate: Option<f32>,
        /// Let the optimizer update the front filters too.
        #[arg(long)]
        trainable_front: bool,
        /// Use the raw 0/1 stripe values instead of L1-normalized kernels.
        #[arg(long)]
        raw_filters: bool,
        /// Artifact name for the checkpoint (default: <model-id>.ckpt).
        #[arg(long)]
        checkpoint: Option<String>,
        /// Also copy the checkpoint to this local path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint across the 10x10 occlusion grid.
    EvalGrid {
        /// Local checkpoint path or server-side artifact name.
        #[arg(long)]
        checkpoint: String,
        /// Local output prefix; writes <prefix>.csv/.pgm/.scale.txt/.json.
        #[arg(long)]
        out: PathBuf,
        /// Parallel evaluation workers (identical results for any count).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate a checkpoint on the clean or a single occluded test set.
    Eval {
        /// Local checkpoint path or server-side artifact name.
        #[arg(long)]
        checkpoint: String,
        /// Stripe width; clean evaluation when omitted.
        #[arg(long, requires = "s")]
        w: Option<u32>,
        /// Stripe spacing.
        #[arg(long, requires = "w")]
        s: Option<u32>,
        /// anti (default) or main.
        #[arg(long)]
        direction: Option<String>,
        #[arg(long, default_value_t = 0)]
        phase: i32,
    },
    /// Subtract two accuracy grids (a minus b) and render the difference.
    Diff {
        /// Local CSV path or artifact name.
        #[arg(long)]
        a: String,
        /// Local CSV path or artifact name.
        #[arg(long)]
        b: String,
        /// Local output prefix; writes <prefix>.csv/.pgm/.scale.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an occluded test digit and the bare stripe mask.
    Occlude {
        #[arg(long)]
        w: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        direction: Option<String>,
        #[arg(long, default_value_t = 0)]
        phase: i32,
        /// Test-set image index for the preview.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Preview PGM path; the mask lands next to it as <stem>.mask.pgm.
        #[arg(long)]
        preview: PathBuf,
    },
    /// Export the four front filters as PGM images and value grids.
    Filters {
        /// Output directory.
        #[arg(long)]
        export: PathBuf,
        /// oriented (default) or random.
        #[arg(long)]
        kind: Option<String>,
        /// Seed for random filters.
        #[arg(long)]
        seed: Option<u64>,
        /// Export raw 0/1 stripe values instead of L1-normalized.
        #[arg(long)]
        raw: bool,
    },
    /// Compute the orientation map of a grayscale image.
    Orientmap {
        /// Input image (PNG, PGM, ...).
        #[arg(long)]
        image: PathBuf,
        /// Local output prefix; writes <prefix>.theta.csv and <prefix>.orient.ppm.
        #[arg(long)]
        out: PathBuf,
    },
    /// Show the loaded MNIST dataset summary.
    Dataset,
    /// List jobs, or show one job in full.
    Jobs {
        id: Option<uuid::Uuid>,
    },
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Serve { addr } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            let config = bordernet_server::ServerConfig::new(cli.data, cli.artifacts);
            let server = bordernet_server::serve(addr, config).await?;
            println!("serving on http://{}", server.addr);
            server.join().await?;
            Ok(())
        }
        command => {
            let session = commands::Session::connect(cli.server, cli.data, cli.artifacts).await?;
            commands::run(&session, command).await
        }
    }
}
