use std::collections::BTreeMap;
use std::time::Duration;

use rayon::prelude::*;

use super::cache::Cache;
use super::config::PipelineConfig;
use super::fetch::{DayJob, FetchOptions, FetchSummary, Fetcher, Transport};
use super::{open_artifact, write_artifact, write_manifest, Layout};
use crate::error::{Error, Result};
use crate::fleet::io::{capacity_targets, read_fleets, read_pmf, read_unit_rows, registry_sizes, write_fleet, write_pmf};
use crate::fleet::{fleet_outage_pmf, pmf_stats, pool_unit_sizes, synthesize_fleet, Fleet, ParamTable};
use crate::ingest::{
    apply_registry, deduplicate, filter_reports, parse_document_with, read_unit_registry, read_zone_csv,
    unit_series, write_json_lines, write_zone_csv, zone_series, Channel, ChannelSet, OutageReport, ParseWarning,
    Period,
};
use crate::markov::{simulate_fleet, OutageTimeSeries, SimulationMetadata};
use crate::seed::{derive_seed, label_of};
use crate::stats::{
    autocorrelation, mean_acf, reconciliation_error_in, summary_pooled, write_stats_csv, StatsRow, SummaryStats,
    WinterWindow, STATS_LAGS,
};

/// Runs `f` for every zone in parallel and returns results in zone order.
fn per_zone<R: Send>(cfg: &PipelineConfig, f: impl Fn(&str) -> Result<R> + Sync) -> Result<Vec<R>> {
    cfg.zones.par_iter().map(|z| f(z)).collect::<Vec<_>>().into_iter().collect()
}

pub fn fetch_stage<T: Transport>(cfg: &PipelineConfig, transport: &T) -> Result<FetchSummary> {
    let cache = Cache::new(&cfg.cache_dir);
    let zones = cfg.zone_map();
    let opts = FetchOptions {
        base_url: cfg.base_url.clone(),
        token: cfg.token(),
        request_delay: Duration::from_millis(cfg.request_delay_ms),
        max_in_flight: cfg.max_in_flight,
        max_retries: cfg.max_retries,
        retry_base: Duration::from_millis(cfg.retry_base_ms),
    };
    let mut jobs = Vec::new();
    for zone in &cfg.zones {
        for doc_type in &cfg.document_types {
            for date in cfg.days()? {
                jobs.push(DayJob {
                    zone: zone.clone(),
                    doc_type: doc_type.clone(),
                    date,
                });
            }
        }
    }
    let summary = Fetcher::new(transport, &cache, &zones, opts)
        .fetch_all(&jobs)
        .map_err(|e| e.in_stage("fetch", cache.root()))?;
    log::info!(
        "fetch: {} days cached, {} fetched with {} requests",
        summary.cached,
        summary.fetched,
        summary.requests
    );
    Ok(summary)
}

/// Hours from the first window start to the last window end.
pub(crate) fn analysis_period(windows: &[WinterWindow]) -> Result<Period> {
    let start = windows.iter().map(|w| w.start()).min().ok_or_else(|| Error::invalid("no windows"))?;
    let end = windows.iter().map(|w| w.end()).max().expect("non-empty");
    Period::between(start, end)
}

fn ingest_zone(cfg: &PipelineConfig, zone: &str, registry: &std::collections::HashMap<String, f64>) -> Result<()> {
    let cache = Cache::new(&cfg.cache_dir);
    let zones = cfg.zone_map();
    let layout = Layout::new(&cfg.output_dir);
    let mut reports: Vec<OutageReport> = Vec::new();
    let mut skipped = 0;
    for doc_type in &cfg.document_types {
        for date in cfg.days()? {
            let path = cache.payload_path(zone, doc_type, date);
            let entry = cache
                .get(zone, doc_type, date)
                .and_then(|e| e.ok_or_else(|| Error::invalid("day is not cached; run fetch first")))
                .map_err(|e| e.in_stage("ingest", &path))?;
            let parsed = parse_document_with(&entry.payload, &zones).map_err(|e| e.in_stage("ingest", &path))?;
            for w in &parsed.warnings {
                let ParseWarning::SkippedRecord { location, reason } = w;
                log::warn!("{}: skipped {location}: {reason}", path.display());
            }
            skipped += parsed.warnings.len();
            // the query decides the zone, whichever area code a document uses
            reports.extend(parsed.reports.into_iter().map(|mut r| {
                r.zone = zone.to_string();
                r
            }));
        }
    }
    let n_raw = reports.len();
    let reports = filter_reports(apply_registry(deduplicate(reports), registry));
    log::info!("{zone}: {n_raw} records, {} kept, {skipped} skipped", reports.len());

    let mut buf = Vec::new();
    write_json_lines(&mut buf, &reports)?;
    write_artifact(&layout.reports(zone), &buf)?;

    let period = analysis_period(&cfg.windows()?)?;
    let mut by_unit: BTreeMap<&str, Vec<OutageReport>> = BTreeMap::new();
    for r in &reports {
        by_unit.entry(r.unit_id.as_str()).or_default().push(r.clone());
    }
    let units: Vec<ChannelSet> = by_unit
        .par_iter()
        .map(|(id, rs)| unit_series(id, rs, period))
        .collect();
    let set = zone_series(zone, &units, period)?;
    let mut buf = Vec::new();
    write_zone_csv(&mut buf, &set)?;
    write_artifact(&layout.series(zone), &buf)
}

pub fn ingest_stage(cfg: &PipelineConfig) -> Result<()> {
    let registry = match &cfg.nominal_registry_path {
        Some(p) => read_unit_registry(open_artifact(p, "ingest")?).map_err(|e| e.in_stage("ingest", p))?,
        None => Default::default(),
    };
    per_zone(cfg, |zone| ingest_zone(cfg, zone, &registry))?;
    write_manifest(cfg).map(drop)
}

pub fn fleet_stage(cfg: &PipelineConfig) -> Result<()> {
    let params = cfg.params()?;
    let sizes_path = &cfg.unit_sizes_path;
    let sizes = read_unit_rows(open_artifact(sizes_path, "fleet")?)
        .and_then(|rows| registry_sizes(&rows))
        .and_then(|s| pool_unit_sizes(&s))
        .map_err(|e| e.in_stage("fleet", sizes_path))?;
    let cap_path = &cfg.installed_capacity_path;
    let targets = read_unit_rows(open_artifact(cap_path, "fleet")?)
        .and_then(|rows| capacity_targets(&rows))
        .map_err(|e| e.in_stage("fleet", cap_path))?;
    let layout = Layout::new(&cfg.output_dir);
    per_zone(cfg, |zone| {
        let target = targets
            .get(zone)
            .ok_or_else(|| Error::invalid(format!("no installed capacity for zone {zone}")).in_stage("fleet", cap_path))?;
        let seed = derive_seed(cfg.seed, &[label_of("fleet"), label_of(zone)]);
        let fleet = synthesize_fleet(zone, target, &sizes, &params, seed).map_err(|e| e.in_stage("fleet", sizes_path))?;
        let mut buf = Vec::new();
        write_fleet(&mut buf, &fleet)?;
        write_artifact(&layout.fleet(zone), &buf)
    })?;
    write_manifest(cfg).map(drop)
}

fn load_fleet(layout: &Layout, zone: &str, params: &ParamTable, stage: &'static str) -> Result<Fleet> {
    let path = layout.fleet(zone);
    read_fleets(open_artifact(&path, stage)?, params)
        .and_then(|fleets| {
            fleets
                .into_iter()
                .find(|f| f.zone == zone)
                .ok_or_else(|| Error::invalid(format!("no units for zone {zone}")))
        })
        .map_err(|e| e.in_stage(stage, &path))
}

pub fn model_stage(cfg: &PipelineConfig) -> Result<()> {
    let params = cfg.params()?;
    let layout = Layout::new(&cfg.output_dir);
    per_zone(cfg, |zone| {
        let fleet = load_fleet(&layout, zone, &params, "model")?;
        let pmf = fleet_outage_pmf(&fleet).map_err(|e| e.in_stage("model", layout.fleet(zone)))?;
        let mut buf = Vec::new();
        write_pmf(&mut buf, &pmf)?;
        write_artifact(&layout.pmf(zone), &buf)
    })?;
    write_manifest(cfg).map(drop)
}

/// Seed of one simulated winter; winters and draws are independent.
pub(crate) fn simulation_seed(seed: u64, zone: &str, draw: u32, window: &str) -> u64 {
    derive_seed(seed, &[label_of("simulate"), label_of(zone), u64::from(draw), label_of(window)])
}

pub fn simulate_stage(cfg: &PipelineConfig) -> Result<()> {
    let params = cfg.params()?;
    let layout = Layout::new(&cfg.output_dir);
    let windows = cfg.windows()?;
    per_zone(cfg, |zone| {
        let fleet = load_fleet(&layout, zone, &params, "simulate")?;
        for draw in 1..=cfg.n_draws {
            for w in &windows {
                let n_hours = (w.end() - w.start()).num_hours() as usize;
                let seed = simulation_seed(cfg.seed, zone, draw, w.label());
                let series = simulate_fleet(&fleet, w.start(), n_hours, seed)
                    .map_err(|e| e.in_stage("simulate", layout.fleet(zone)))?;
                let path = layout.simulated(zone, draw, w.label());
                let mut buf = Vec::new();
                series.write_csv(&mut buf)?;
                write_artifact(&path, &buf)?;
                let label = format!("draw {draw}, {}", w.label());
                let meta = SimulationMetadata::describe(&fleet, &label, seed, w.start(), n_hours, params.version())?;
                let mut json = serde_json::to_vec_pretty(&meta)?;
                json.push(b'\n');
                write_artifact(&path.with_extension("json"), &json)?;
            }
        }
        Ok(())
    })?;
    write_manifest(cfg).map(drop)
}

pub(crate) fn load_series(layout: &Layout, zone: &str, stage: &'static str) -> Result<ChannelSet> {
    let path = layout.series(zone);
    read_zone_csv(open_artifact(&path, stage)?, zone).map_err(|e| e.in_stage(stage, &path))
}

pub(crate) fn load_simulated(layout: &Layout, zone: &str, draw: u32, window: &str, stage: &'static str) -> Result<OutageTimeSeries> {
    let path = layout.simulated(zone, draw, window);
    OutageTimeSeries::read_csv(open_artifact(&path, stage)?).map_err(|e| e.in_stage(stage, &path))
}

/// Undefined statistics (no outages, or a constant series) are left blank.
fn or_blank<T>(r: Result<T>, what: &str) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Stats(msg)) => {
            log::warn!("{what}: {msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn zone_stats(cfg: &PipelineConfig, zone: &str, windows: &[WinterWindow]) -> Result<Vec<StatsRow>> {
    let layout = Layout::new(&cfg.output_dir);
    let series = load_series(&layout, zone, "stats")?;
    let mut rows = Vec::new();
    for channel in Channel::ALL {
        let s = series.get(channel);
        let what = format!("{zone} {channel}");
        let (mean_mw, iqr_mw) = summary_pooled(s, windows).map_err(|e| e.in_stage("stats", layout.series(zone)))?;
        let mut recon: Option<f64> = None;
        for w in windows {
            if let Some(e) = or_blank(reconciliation_error_in(s, w), &what)? {
                recon = Some(recon.map_or(e, |r| r.max(e)));
            }
        }
        let acf = or_blank(autocorrelation(s, windows, &STATS_LAGS), &what)?.unwrap_or_default();
        rows.push(StatsRow {
            zone: zone.to_string(),
            channel: channel.name().to_string(),
            stats: SummaryStats {
                mean_mw,
                iqr_mw,
                recon_error: recon,
                acf,
            },
        });
    }

    let pmf_path = layout.pmf(zone);
    let pmf = read_pmf(open_artifact(&pmf_path, "stats")?).map_err(|e| e.in_stage("stats", &pmf_path))?;
    let ps = pmf_stats(&pmf);
    let mut maps = Vec::new();
    for draw in 1..=cfg.n_draws {
        for w in windows {
            let sim = load_simulated(&layout, zone, draw, w.label(), "stats")?;
            let what = format!("{zone} model draw {draw}");
            if let Some(m) = or_blank(autocorrelation(&sim, std::slice::from_ref(w), &STATS_LAGS), &what)? {
                maps.push(m);
            }
        }
    }
    rows.push(StatsRow {
        zone: zone.to_string(),
        channel: "model".into(),
        stats: SummaryStats {
            mean_mw: ps.mean_mw,
            iqr_mw: ps.iqr_mw,
            recon_error: None,
            acf: mean_acf(&maps),
        },
    });
    Ok(rows)
}

pub fn stats_stage(cfg: &PipelineConfig) -> Result<Vec<StatsRow>> {
    let windows = cfg.windows()?;
    let rows: Vec<StatsRow> = per_zone(cfg, |zone| zone_stats(cfg, zone, &windows))?
        .into_iter()
        .flatten()
        .collect();
    let mut buf = Vec::new();
    write_stats_csv(&mut buf, &rows)?;
    let layout = Layout::new(&cfg.output_dir);
    write_artifact(&layout.stats(), &buf)?;
    write_manifest(cfg)?;
    Ok(rows)
}
