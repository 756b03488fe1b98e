use std::fmt;
use std::str::FromStr;

use super::config::PipelineConfig;
use super::stages::{load_series, load_simulated};
use super::{open_artifact, write_artifact, write_manifest, Layout};
use crate::error::{Error, Result};
use crate::fleet::io::read_pmf;
use crate::stats::{weekly_profile, window_values, HourlyValues};
use crate::markov::OutageTimeSeries;
use crate::timefmt;

/// Plot-ready CSV tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// `bin_gw,freq_total,freq_forced,model_prob` per zone.
    Histogram,
    /// `week,total` normalised weekly profile, 52 rows per zone.
    Seasonal,
    /// `timestamp_utc,empirical,draw_1..draw_k` per zone and window.
    Timeseries,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [PlotKind::Histogram, PlotKind::Seasonal, PlotKind::Timeseries];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Histogram => "histogram",
            PlotKind::Seasonal => "seasonal",
            PlotKind::Timeseries => "timeseries",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown plot kind {s:?}; expected histogram, seasonal or timeseries")))
    }
}

fn histogram(cfg: &PipelineConfig, zone: &str, layout: &Layout) -> Result<Vec<u8>> {
    let series = load_series(layout, zone, "plot-data")?;
    let pmf_path = layout.pmf(zone);
    let pmf = read_pmf(open_artifact(&pmf_path, "plot-data")?).map_err(|e| e.in_stage("plot-data", &pmf_path))?;
    let windows = cfg.windows()?;
    let mut total = Vec::new();
    let mut forced = Vec::new();
    for w in &windows {
        total.extend(window_values(&series.total, w)?);
        forced.extend(window_values(&series.forced, w)?);
    }
    let bin = f64::from(cfg.histogram_bin_mw);
    let top = total
        .iter()
        .chain(&forced)
        .copied()
        .fold(pmf.max_mw() as f64, f64::max);
    let n_bins = (top / bin).floor() as usize + 1;
    let count = |values: &[f64]| {
        let mut c = vec![0usize; n_bins];
        for v in values {
            c[((v / bin).floor() as usize).min(n_bins - 1)] += 1;
        }
        c
    };
    let (ct, cf) = (count(&total), count(&forced));
    let mut model = vec![0.0; n_bins];
    for (mw, p) in pmf.support() {
        model[((mw as f64 / bin).floor() as usize).min(n_bins - 1)] += p;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_gw", "freq_total", "freq_forced", "model_prob"])?;
    for k in 0..n_bins {
        w.write_record([
            format!("{:.3}", k as f64 * bin / 1000.0),
            format!("{:.6}", ct[k] as f64 / total.len() as f64),
            format!("{:.6}", cf[k] as f64 / forced.len() as f64),
            format!("{:.6}", model[k]),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn seasonal(zone: &str, layout: &Layout) -> Result<Vec<u8>> {
    let series = load_series(layout, zone, "plot-data")?;
    let (profile, _) = weekly_profile::<_, OutageTimeSeries>(&series.total, None)
        .map_err(|e| e.in_stage("plot-data", layout.series(zone)))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["week", "total"])?;
    for (k, v) in profile.iter().enumerate() {
        w.write_record([(k + 1).to_string(), format!("{v:.6}")])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn timeseries(cfg: &PipelineConfig, zone: &str, layout: &Layout) -> Result<Vec<(String, Vec<u8>)>> {
    let series = load_series(layout, zone, "plot-data")?;
    let mut out = Vec::new();
    for win in cfg.windows()? {
        let draws: Vec<OutageTimeSeries> = (1..=cfg.n_draws)
            .map(|k| load_simulated(layout, zone, k, win.label(), "plot-data"))
            .collect::<Result<_>>()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["timestamp_utc".to_string(), "empirical".into()];
        header.extend((1..=cfg.n_draws).map(|k| format!("draw_{k}")));
        w.write_record(&header)?;
        for t in win.hours() {
            let i = HourlyValues::index_of(&series.total, t)
                .ok_or_else(|| Error::invalid(format!("series of {zone} does not cover {t}")))?;
            let mut row = vec![timefmt::format_utc(t), format!("{:.3}", series.total.value(i))];
            for d in &draws {
                let j = d
                    .index_of(t)
                    .ok_or_else(|| Error::invalid(format!("simulated series of {zone} does not cover {t}")))?;
                row.push(format!("{:.3}", d.value(j)));
            }
            w.write_record(&row)?;
        }
        out.push((win.label().to_string(), w.into_inner().map_err(|e| Error::Io(e.into_error()))?));
    }
    Ok(out)
}

/// Writes plot data of one kind for every configured zone.
pub fn plot_stage(cfg: &PipelineConfig, kind: PlotKind) -> Result<()> {
    let layout = Layout::new(&cfg.output_dir);
    for zone in &cfg.zones {
        match kind {
            PlotKind::Histogram => write_artifact(&layout.plot(zone, kind, None), &histogram(cfg, zone, &layout)?)?,
            PlotKind::Seasonal => write_artifact(&layout.plot(zone, kind, None), &seasonal(zone, &layout)?)?,
            PlotKind::Timeseries => {
                for (label, bytes) in timeseries(cfg, zone, &layout)? {
                    write_artifact(&layout.plot(zone, kind, Some(&label)), &bytes)?;
                }
            }
        }
    }
    write_manifest(cfg).map(drop)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse() {
        assert_eq!("seasonal".parse::<PlotKind>().unwrap(), PlotKind::Seasonal);
        let err = "pie".parse::<PlotKind>().unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        assert_eq!(err.exit_code(), 2);
    }
}
