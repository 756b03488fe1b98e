//! Every pipeline stage, one at a time, on the bundled synthetic corpus.
//! Stages talk only through files in the output directory.
//!
//! ```text
//! cargo run --example pipeline_corpus [-- OUTPUT_DIR]
//! ```

use std::path::Path;
use std::time::Duration;

use gen_outage::pipeline::{self, HttpTransport, PipelineConfig, PlotKind};

fn main() -> gen_outage::Result<()> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/corpus/config.toml");
    let mut cfg = PipelineConfig::load(&config)?;
    cfg.output_dir = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("gen-outage-corpus"));

    // every day is cached, so the transport is never used
    let fetched = pipeline::fetch_stage(&cfg, &HttpTransport::new(Duration::from_secs(30))?)?;
    println!("fetch: {} cached, {} downloaded", fetched.cached, fetched.fetched);
    pipeline::ingest_stage(&cfg)?;
    pipeline::fleet_stage(&cfg)?;
    pipeline::model_stage(&cfg)?;
    pipeline::simulate_stage(&cfg)?;
    let rows = pipeline::stats_stage(&cfg)?;
    for kind in [PlotKind::Histogram, PlotKind::Timeseries] {
        pipeline::plot_stage(&cfg, kind)?;
    }

    println!("{:<4} {:<8} {:>9} {:>9} {:>7} {:>7}", "zone", "channel", "mean MW", "IQR MW", "eps", "acf24");
    for r in rows {
        let eps = r.stats.recon_error.map_or("-".into(), |e| format!("{e:.3}"));
        let acf = r.stats.acf.get(&24).map_or("-".into(), |a| format!("{a:.3}"));
        println!("{:<4} {:<8} {:>9.1} {:>9.1} {:>7} {:>7}", r.zone, r.channel, r.stats.mean_mw, r.stats.iqr_mw, eps, acf);
    }
    let manifest = pipeline::write_manifest(&cfg)?;
    println!("{} artifacts under {}", manifest.artifacts.len(), cfg.output_dir.display());
    Ok(())
}
