use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use gen_outage::pipeline::{self, HttpTransport, PipelineConfig, PlotKind};
use gen_outage::Result;

#[derive(Parser)]
#[command(name = "gen-outage", version, about = "Generator outage models versus reported outages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Restrict to these zones (repeatable).
    #[arg(long = "zone")]
    zones: Vec<String>,
    /// Use these winters instead of the configured ones, e.g. 16/17 (repeatable).
    #[arg(long = "season")]
    seasons: Vec<String>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Download missing days into the cache.
    Fetch(Common),
    /// Parse cached documents into reports and hourly zone series.
    Ingest(Common),
    /// Synthesize representative fleets.
    Fleet(Common),
    /// Convolve fleets into capacity-outage PMFs.
    Model(Common),
    /// Simulate winters with the two-state chain.
    Simulate(Common),
    /// Write the comparison statistics table.
    Stats(Common),
    /// Write plot-ready CSV tables.
    PlotData {
        #[command(flatten)]
        common: Common,
        /// histogram, seasonal or timeseries
        #[arg(long)]
        kind: String,
    },
    /// Run every stage.
    Run(Common),
}

fn load(c: &Common) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&c.config)?;
    if !c.zones.is_empty() {
        cfg.zones = c.zones.clone();
    }
    if !c.seasons.is_empty() {
        cfg.seasons = c.seasons.clone();
        cfg.period = None;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn transport() -> Result<HttpTransport> {
    HttpTransport::new(Duration::from_secs(120))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Fetch(c) => {
            let cfg = load(&c)?;
            pipeline::fetch_stage(&cfg, &transport()?)?;
        }
        Command::Ingest(c) => pipeline::ingest_stage(&load(&c)?)?,
        Command::Fleet(c) => pipeline::fleet_stage(&load(&c)?)?,
        Command::Model(c) => pipeline::model_stage(&load(&c)?)?,
        Command::Simulate(c) => pipeline::simulate_stage(&load(&c)?)?,
        Command::Stats(c) => {
            pipeline::stats_stage(&load(&c)?)?;
        }
        Command::PlotData { common, kind } => {
            let kind: PlotKind = kind.parse()?;
            pipeline::plot_stage(&load(&common)?, kind)?;
        }
        Command::Run(c) => {
            let cfg = load(&c)?;
            let manifest = pipeline::run_pipeline(&cfg, &transport()?)?;
            println!("{} artifacts in {}", manifest.artifacts.len(), cfg.output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
