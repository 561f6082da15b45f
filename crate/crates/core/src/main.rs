use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use enriched_paths::error::Result;
use enriched_paths::evaluation::Setting;
use enriched_paths::pipeline::{self, CliOverrides, PipelineConfig};
use enriched_paths::routing::Algorithm;

#[derive(Parser)]
#[command(
    name = "enriched-paths",
    version,
    about = "Mine place closeness from text and route through the popular parts of a road network"
)]
struct Cli {
    /// TOML manifest with paths and parameters; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// Coordinate interpretation: geodesic or planar.
    #[arg(long, global = true, value_name = "MODE")]
    mode: Option<String>,

    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Enrichment strength in [0, 1].
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Ellipse stretch factor for dij-h-star, must exceed 1.
    #[arg(long, global = true)]
    beta: Option<f64>,

    /// Directory for generated outputs.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Size of the worker thread pool; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic city bundle and a matching manifest.
    GenFixture,
    /// Extract (PoI, relation, PoI) triplets from the corpus.
    Extract,
    /// Turn triplets into distance and orientation features.
    Features,
    /// Fit one Gaussian mixture per relation with enough observations.
    Train,
    /// Score PoI pairs and build the relationship graph.
    Score,
    /// Write the road network with enriched edge costs.
    Enrich,
    /// Route between two vertex ids.
    Route {
        /// Source vertex id.
        #[arg(long)]
        from: u32,
        /// Target vertex id.
        #[arg(long)]
        to: u32,
        /// all, dij-g, dij-g-star or dij-h-star.
        #[arg(long, default_value = "all")]
        algorithm: String,
        /// Also write the routes as GeoJSON.
        #[arg(long)]
        geojson: bool,
    },
    /// Run one evaluation setting and write its report files.
    Eval {
        /// i (alpha sweep) or ii (distance brackets).
        #[arg(long)]
        setting: String,
    },
}

fn run(cli: Cli) -> Result<()> {
    let overrides = CliOverrides {
        manifest: cli.manifest.clone(),
        mode: cli.mode.as_deref().map(str::parse).transpose()?,
        seed: cli.seed,
        alpha: cli.alpha,
        beta: cli.beta,
        out_dir: cli.out_dir.clone(),
    };
    let config = PipelineConfig::resolve(&overrides)?;
    match &cli.command {
        Command::GenFixture => {
            pipeline::cmd_gen_fixture(&config)?;
        }
        Command::Extract => {
            pipeline::cmd_extract(&config)?;
        }
        Command::Features => {
            pipeline::cmd_features(&config)?;
        }
        Command::Train => {
            pipeline::cmd_train(&config)?;
        }
        Command::Score => {
            pipeline::cmd_score(&config)?;
        }
        Command::Enrich => {
            pipeline::cmd_enrich(&config)?;
        }
        Command::Route {
            from,
            to,
            algorithm,
            geojson,
        } => {
            let algorithms: Vec<Algorithm> = match algorithm.as_str() {
                "all" => vec![Algorithm::DijG, Algorithm::DijGStar, Algorithm::DijHStar],
                other => vec![other.parse()?],
            };
            pipeline::cmd_route(&config, *from, *to, &algorithms, *geojson)?;
        }
        Command::Eval { setting } => {
            let setting: Setting = setting.parse()?;
            pipeline::cmd_eval(&config, setting)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // A failure here means a pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
