//! End-to-end pipeline: fetch, ingest, fleet, model, simulate, stats, plot data.
//!
//! Stages exchange data only through files under the output directory, so
//! each can be rerun on its own:
//!
//! | stage | reads | writes |
//! |---|---|---|
//! | fetch | network, cache | `{cache}/{zone}/{doc}/{day}.xml` + `.json` |
//! | ingest | cache | `reports/{zone}.jsonl`, `series/{zone}.csv` |
//! | fleet | unit sizes, installed capacity | `fleet/{zone}.csv` |
//! | model | fleet | `model/{zone}_pmf.csv` |
//! | simulate | fleet | `simulated/{zone}_draw{k}_{window}.csv` + `.json` |
//! | stats | series, model, simulated | `stats.csv` |
//! | plot-data | series, model, simulated | `plots/{zone}_{kind}*.csv` |
//!
//! Every stage finishes by rewriting `manifest.json`, which lists each
//! artifact with its SHA-256.

pub mod cache;
pub mod config;
pub mod fetch;
mod plot;
mod stages;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use cache::{Cache, CacheEntry};
pub use config::{PeriodConfig, PipelineConfig, TOKEN_ENV};
pub use fetch::{DayJob, FetchOptions, FetchSummary, Fetcher, HttpResponse, HttpTransport, Transport};
pub use plot::{plot_stage, PlotKind};
pub use stages::{fetch_stage, fleet_stage, ingest_stage, model_stage, simulate_stage, stats_stage};

use crate::error::{Error, Result};

/// Paths of every artifact under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

/// Window labels such as `16/17` become `16-17` in file names.
pub fn file_tag(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn reports(&self, zone: &str) -> PathBuf {
        self.root.join("reports").join(format!("{zone}.jsonl"))
    }

    pub fn series(&self, zone: &str) -> PathBuf {
        self.root.join("series").join(format!("{zone}.csv"))
    }

    pub fn fleet(&self, zone: &str) -> PathBuf {
        self.root.join("fleet").join(format!("{zone}.csv"))
    }

    pub fn pmf(&self, zone: &str) -> PathBuf {
        self.root.join("model").join(format!("{zone}_pmf.csv"))
    }

    pub fn simulated(&self, zone: &str, draw: u32, window: &str) -> PathBuf {
        self.root
            .join("simulated")
            .join(format!("{zone}_draw{draw}_{}.csv", file_tag(window)))
    }

    pub fn stats(&self) -> PathBuf {
        self.root.join("stats.csv")
    }

    pub fn plot(&self, zone: &str, kind: PlotKind, window: Option<&str>) -> PathBuf {
        let name = match window {
            Some(w) => format!("{zone}_{}_{}.csv", kind.name(), file_tag(w)),
            None => format!("{zone}_{}.csv", kind.name()),
        };
        self.root.join("plots").join(name)
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
}

pub(crate) fn write_artifact(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    cache::write_atomically(path, bytes)
}

pub(crate) fn open_artifact(path: &Path, stage: &'static str) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| {
        let e = match e.kind() {
            std::io::ErrorKind::NotFound => Error::invalid("missing input; run the earlier stages first"),
            _ => Error::Io(e),
        };
        e.in_stage(stage, path)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub params_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub zones: Vec<String>,
    pub windows: Vec<String>,
    pub artifacts: Vec<ManifestEntry>,
}

fn collect_files(dir: &Path, root: &Path, out: &mut Vec<ManifestEntry>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let path = e.path();
        if e.file_type()?.is_dir() {
            collect_files(&path, root, out)?;
            continue;
        }
        let rel = path.strip_prefix(root).expect("walked from root");
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if rel == "manifest.json" {
            continue;
        }
        let bytes = fs::read(&path)?;
        out.push(ManifestEntry {
            path: rel,
            sha256: cache::sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    Ok(())
}

/// Rewrites the manifest from the files currently in the output directory.
pub fn write_manifest(cfg: &PipelineConfig) -> Result<Manifest> {
    let layout = Layout::new(&cfg.output_dir);
    let mut artifacts = Vec::new();
    if layout.root().is_dir() {
        collect_files(layout.root(), layout.root(), &mut artifacts)?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        rng: crate::seed::RNG_NAME.into(),
        params_version: cfg.params()?.version().into(),
        seed: cfg.seed,
        config_hash: cfg.analysis_hash()?,
        zones: cfg.zones.clone(),
        windows: cfg.windows()?.iter().map(|w| w.label().to_string()).collect(),
        artifacts,
    };
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    write_artifact(&layout.manifest(), &text)?;
    Ok(manifest)
}

/// Runs every stage in order. Seasonal plot data is emitted only when the
/// series spans a full year.
pub fn run_pipeline<T: Transport>(cfg: &PipelineConfig, transport: &T) -> Result<Manifest> {
    cfg.validate()?;
    fetch_stage(cfg, transport)?;
    ingest_stage(cfg)?;
    fleet_stage(cfg)?;
    model_stage(cfg)?;
    simulate_stage(cfg)?;
    stats_stage(cfg)?;
    plot_stage(cfg, PlotKind::Histogram)?;
    plot_stage(cfg, PlotKind::Timeseries)?;
    match plot_stage(cfg, PlotKind::Seasonal) {
        Err(e) if matches!(e.root(), Error::InvalidInput(_)) => {
            log::info!("seasonal plot data skipped: {e}");
        }
        other => other?,
    }
    write_manifest(cfg)
}
