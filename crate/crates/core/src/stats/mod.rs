//! Comparison statistics between modelled and reported outages.
//!
//! Empirical quantiles here use linear interpolation between order
//! statistics (type 7). The PMF quantiles in [`crate::fleet`] use the
//! discrete inverse CDF instead, since a PMF has no order statistics.

mod winter;

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, Datelike, TimeDelta, Utc};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::HourlyOutageSeries;
use crate::markov::OutageTimeSeries;

pub use winter::{parse_season, season_label, winter_window, winter_window_with, WinterRule, WinterWindow};

/// Lags reported in the statistics table: an hour, six hours, a day, a week.
pub const STATS_LAGS: [u32; 4] = [1, 6, 24, 168];

/// An hourly series of outage values starting on the hour.
pub trait HourlyValues {
    fn start(&self) -> DateTime<Utc>;
    fn len(&self) -> usize;
    fn value(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        let offset = t - self.start();
        let h = offset.num_hours();
        (h >= 0 && (h as usize) < self.len() && offset == TimeDelta::hours(h)).then_some(h as usize)
    }
}

/// Reconciled series are summarised through their mean channel.
impl HourlyValues for HourlyOutageSeries {
    fn start(&self) -> DateTime<Utc> {
        HourlyOutageSeries::start(self)
    }

    fn len(&self) -> usize {
        HourlyOutageSeries::len(self)
    }

    fn value(&self, i: usize) -> f64 {
        self.triples()[i].o_mean()
    }
}

impl HourlyValues for OutageTimeSeries {
    fn start(&self) -> DateTime<Utc> {
        OutageTimeSeries::start(self)
    }

    fn len(&self) -> usize {
        OutageTimeSeries::len(self)
    }

    fn value(&self, i: usize) -> f64 {
        self.values_mw()[i]
    }
}

/// Statistics of one series, as reported per zone and channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub mean_mw: f64,
    pub iqr_mw: f64,
    /// Absent for modelled series, which have no conflicting reports.
    pub recon_error: Option<f64>,
    pub acf: BTreeMap<u32, f64>,
}

/// Type-7 quantile of an ascending sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and type-7 interquartile range of a sample.
pub fn mean_iqr(sample: &[f64]) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::invalid("statistics of an empty sample"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mean = sample.iter().sum::<f64>() / sample.len() as f64;
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    Ok((mean, iqr.max(0.0)))
}

/// Values of `series` at the window's hours, or an error if any is missing.
pub fn window_values<S: HourlyValues + ?Sized>(series: &S, window: &WinterWindow) -> Result<Vec<f64>> {
    let first = series.index_of(window.start()).ok_or_else(|| not_covered(series, window))?;
    let mut out = Vec::with_capacity(window.n_hours());
    for (from, n) in window.segments() {
        let i = first + (from - window.start()).num_hours() as usize;
        if i + n > series.len() {
            return Err(not_covered(series, window));
        }
        out.extend((i..i + n).map(|k| series.value(k)));
    }
    Ok(out)
}

fn not_covered<S: HourlyValues + ?Sized>(series: &S, window: &WinterWindow) -> Error {
    Error::invalid(format!(
        "series from {} ({} h) does not cover winter {}",
        series.start(),
        series.len(),
        window.label()
    ))
}

/// Mean and IQR of the hourly values over one window.
pub fn summary<S: HourlyValues + ?Sized>(series: &S, window: &WinterWindow) -> Result<(f64, f64)> {
    mean_iqr(&window_values(series, window)?)
}

/// Mean and IQR of the hours of all windows taken together.
pub fn summary_pooled<S: HourlyValues + ?Sized>(series: &S, windows: &[WinterWindow]) -> Result<(f64, f64)> {
    let mut all = Vec::new();
    for w in windows {
        all.extend(window_values(series, w)?);
    }
    mean_iqr(&all)
}

/// Relative l1 gap between the mean and minimum reconciled outage.
pub fn reconciliation_error(series: &HourlyOutageSeries) -> Result<f64> {
    recon_over(series, 0..series.len())
}

/// [`reconciliation_error`] restricted to the window's hours.
pub fn reconciliation_error_in(series: &HourlyOutageSeries, window: &WinterWindow) -> Result<f64> {
    let first = HourlyValues::index_of(series, window.start()).ok_or_else(|| not_covered(series, window))?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (from, n) in window.segments() {
        let i = first + (from - window.start()).num_hours() as usize;
        if i + n > series.len() {
            return Err(not_covered(series, window));
        }
        let (a, b) = recon_sums(series, i..i + n);
        num += a;
        den += b;
    }
    recon_ratio(series, num, den)
}

fn recon_sums(series: &HourlyOutageSeries, range: std::ops::Range<usize>) -> (f64, f64) {
    series.triples()[range].iter().fold((0.0, 0.0), |(num, den), t| {
        (num + (t.o_mean() - t.o_min()).abs(), den + t.o_mean().abs())
    })
}

fn recon_over(series: &HourlyOutageSeries, range: std::ops::Range<usize>) -> Result<f64> {
    let (num, den) = recon_sums(series, range);
    recon_ratio(series, num, den)
}

fn recon_ratio(series: &HourlyOutageSeries, num: f64, den: f64) -> Result<f64> {
    if den <= 0.0 {
        return Err(Error::Stats(format!(
            "reconciliation error of {} {} is undefined: no outages",
            series.subject(),
            series.channel()
        )));
    }
    Ok(num / den)
}

/// Sample autocorrelation of one window, pairing only hours exactly `lag` apart.
fn window_acf<S: HourlyValues + ?Sized>(series: &S, window: &WinterWindow, lags: &[u32]) -> Result<Vec<f64>> {
    let values = window_values(series, window)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var: f64 = dev.iter().map(|d| d * d).sum();
    if !(var > 0.0) {
        return Err(Error::Stats(format!(
            "winter {}: series is constant, autocorrelation undefined",
            window.label()
        )));
    }
    // offsets of each segment inside `values`
    let mut segs = Vec::new();
    let mut at = 0;
    for (_, n) in window.segments() {
        segs.push(at..at + n);
        at += n;
    }
    Ok(lags
        .iter()
        .map(|&lag| {
            if lag == 0 {
                return 1.0;
            }
            let lag = lag as usize;
            let cov: f64 = segs
                .iter()
                .filter(|s| s.len() > lag)
                .map(|s| (s.start..s.end - lag).map(|i| dev[i] * dev[i + lag]).sum::<f64>())
                .sum();
            cov / var
        })
        .collect())
}

/// Autocorrelation at each lag, averaged with equal weight over windows.
///
/// Windows never pair hours across each other or across excluded weeks.
pub fn autocorrelation<S: HourlyValues + ?Sized>(
    series: &S,
    windows: &[WinterWindow],
    lags: &[u32],
) -> Result<BTreeMap<u32, f64>> {
    if windows.is_empty() {
        return Err(Error::invalid("autocorrelation over no windows"));
    }
    let mut sums = vec![0.0; lags.len()];
    for w in windows {
        for (s, r) in sums.iter_mut().zip(window_acf(series, w, lags)?) {
            *s += r;
        }
    }
    Ok(lags
        .iter()
        .zip(sums)
        .map(|(&lag, s)| (lag, s / windows.len() as f64))
        .collect())
}

/// Equal-weight mean of several lag maps, e.g. over simulated draws.
pub fn mean_acf(maps: &[BTreeMap<u32, f64>]) -> BTreeMap<u32, f64> {
    let mut out: BTreeMap<u32, f64> = BTreeMap::new();
    for m in maps {
        for (&lag, &r) in m {
            *out.entry(lag).or_default() += r / maps.len() as f64;
        }
    }
    out
}

/// Mean outage per week of the year (1..=52), normalised to mean 1.
///
/// Weeks are ISO weeks in UTC, with week 53 folded into 52. Each week is
/// averaged within its year first, then across years.
fn weekly_means<S: HourlyValues + ?Sized>(series: &S) -> Result<Vec<f64>> {
    if series.len() < 52 * 168 {
        return Err(Error::invalid(format!(
            "weekly profile needs a year of hours, series has {}",
            series.len()
        )));
    }
    let mut per_year: BTreeMap<(i32, u32), (f64, usize)> = BTreeMap::new();
    for i in 0..series.len() {
        let t = series.start() + TimeDelta::hours(i as i64);
        let iso = t.iso_week();
        let slot = per_year.entry((iso.year(), iso.week().min(52))).or_default();
        slot.0 += series.value(i);
        slot.1 += 1;
    }
    let mut weeks = vec![(0.0, 0usize); 52];
    for ((_, w), (sum, n)) in per_year {
        let slot = &mut weeks[w as usize - 1];
        slot.0 += sum / n as f64;
        slot.1 += 1;
    }
    if let Some(missing) = weeks.iter().position(|w| w.1 == 0) {
        return Err(Error::invalid(format!("weekly profile: week {} has no data", missing + 1)));
    }
    let means: Vec<f64> = weeks.iter().map(|(s, n)| s / *n as f64).collect();
    let overall = means.iter().sum::<f64>() / 52.0;
    if !(overall > 0.0) {
        return Err(Error::Stats("weekly profile of an all-zero series".into()));
    }
    Ok(means.iter().map(|m| m / overall).collect())
}

/// Normalised weekly profile of `series`, and of `demand` if given.
pub fn weekly_profile<S, D>(series: &S, demand: Option<&D>) -> Result<(Vec<f64>, Option<Vec<f64>>)>
where
    S: HourlyValues + ?Sized,
    D: HourlyValues + ?Sized,
{
    let outages = weekly_means(series)?;
    let demand = demand.map(weekly_means).transpose()?;
    Ok((outages, demand))
}

/// One row of the statistics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub zone: String,
    pub channel: String,
    pub stats: SummaryStats,
}

pub fn write_stats_csv<W: Write>(writer: W, rows: &[StatsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["zone".to_string(), "channel".into(), "mean_mw".into(), "iqr_mw".into(), "recon_error".into()];
    header.extend(STATS_LAGS.iter().map(|l| format!("acf_{l}")));
    w.write_record(&header)?;
    for row in rows {
        let s = &row.stats;
        let mut rec = vec![
            row.zone.clone(),
            row.channel.clone(),
            format!("{:.3}", s.mean_mw),
            format!("{:.3}", s.iqr_mw),
            s.recon_error.map(|e| format!("{e:.6}")).unwrap_or_default(),
        ];
        rec.extend(
            STATS_LAGS
                .iter()
                .map(|l| s.acf.get(l).map(|r| format!("{r:.6}")).unwrap_or_default()),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: std::io::Read>(reader: R) -> Result<Vec<StatsRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let loc = || format!("row {}", i + 2);
        let num = |k: usize| -> Result<Option<f64>> {
            match rec.get(k).map(str::trim) {
                None | Some("") => Ok(None),
                Some(t) => t.parse().map(Some).map_err(|_| Error::parse(loc(), format!("{t:?} is not a number"))),
            }
        };
        let mut acf = BTreeMap::new();
        for (k, name) in header.iter().enumerate().skip(5) {
            let lag = name
                .strip_prefix("acf_")
                .and_then(|l| l.parse::<u32>().ok())
                .ok_or_else(|| Error::parse("header", format!("unexpected column {name}")))?;
            if let Some(r) = num(k)? {
                acf.insert(lag, r);
            }
        }
        rows.push(StatsRow {
            zone: rec[0].to_string(),
            channel: rec[1].to_string(),
            stats: SummaryStats {
                mean_mw: num(2)?.ok_or_else(|| Error::parse(loc(), "missing mean"))?,
                iqr_mw: num(3)?.ok_or_else(|| Error::parse(loc(), "missing IQR"))?,
                recon_error: num(4)?,
                acf,
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Channel, HourlyOutageTriple};
    use crate::timefmt::parse_utc;
    use proptest::prelude::*;

    fn series(start: &str, values: Vec<f64>) -> OutageTimeSeries {
        OutageTimeSeries::new(parse_utc(start).unwrap(), values).unwrap()
    }

    fn triples(bounds: &[(f64, f64)]) -> HourlyOutageSeries {
        let t = bounds
            .iter()
            .map(|&(a, b)| HourlyOutageTriple::from_bounds(a, b).unwrap())
            .collect();
        HourlyOutageSeries::new("GB", Channel::Total, parse_utc("2017-01-01T00:00Z").unwrap(), t).unwrap()
    }

    /// A series covering the 2016 winter with a value per hour from `f`.
    fn winter_series(f: impl Fn(usize) -> f64) -> OutageTimeSeries {
        let w = winter_window(2016);
        series(&crate::timefmt::format_utc(w.start()), (0..20 * 168).map(f).collect())
    }

    #[test]
    fn type7_quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.25), 1.75);
        assert_eq!(quantile_sorted(&s, 0.75), 3.25);
        assert_eq!(mean_iqr(&s).unwrap(), (2.5, 1.5));
        assert_eq!(quantile_sorted(&[5.0], 0.3), 5.0);
        assert!(mean_iqr(&[]).is_err());
    }

    #[test]
    fn constant_summary() {
        let s = winter_series(|_| 100.0);
        assert_eq!(summary(&s, &winter_window(2016)).unwrap(), (100.0, 0.0));
    }

    #[test]
    fn summary_needs_coverage() {
        let s = series("2016-11-06T00:00Z", vec![1.0; 100]);
        assert!(matches!(summary(&s, &winter_window(2016)), Err(Error::InvalidInput(_))));
        let s = series("2016-11-06T01:00Z", vec![1.0; 5000]);
        assert!(matches!(summary(&s, &winter_window(2016)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn window_skips_excluded_weeks() {
        // 1 in retained weeks, 1000 in the Christmas weeks
        let w = winter_window(2016);
        let s = winter_series(|h| if (7..9).contains(&(h / 168)) { 1000.0 } else { 1.0 });
        assert_eq!(summary(&s, &w).unwrap().0, 1.0);
    }

    #[test]
    fn recon_examples() {
        assert_eq!(reconciliation_error(&triples(&[(100.0, 300.0)])).unwrap(), 0.5);
        assert_eq!(reconciliation_error(&triples(&[(5.0, 5.0), (7.0, 7.0)])).unwrap(), 0.0);
        assert!(matches!(reconciliation_error(&triples(&[(0.0, 0.0)])), Err(Error::Stats(_))));
    }

    #[test]
    fn acf_lag_zero_and_errors() {
        let w = winter_window(2016);
        let s = winter_series(|h| ((h * 7919) % 101) as f64);
        let acf = autocorrelation(&s, std::slice::from_ref(&w), &[0, 1, 168]).unwrap();
        assert_eq!(acf[&0], 1.0);
        assert!(acf.values().all(|r| r.abs() <= 1.0));

        let flat = winter_series(|_| 3.0);
        match autocorrelation(&flat, &[w], &[1]) {
            Err(Error::Stats(msg)) => assert!(msg.contains("16/17")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn acf_does_not_pair_across_the_gap() {
        // a unit step at the Christmas gap: each side is internally
        // constant, so every lag-1 product within a segment is equal
        let w = winter_window(2016);
        let s = winter_series(|h| if h < 8 * 168 { 0.0 } else { 1.0 });
        let acf = autocorrelation(&s, &[w.clone()], &[1]).unwrap();
        let values = window_values(&s, &w).unwrap();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        // two segments of 1176 and 1848 hours
        let cov = 1175.0 * mean * mean + 1847.0 * (1.0 - mean).powi(2);
        assert!((acf[&1] - cov / var).abs() < 1e-12);
    }

    #[test]
    fn acf_averages_windows_equally() {
        let a = winter_window(2016);
        let b = winter_window(2017);
        let start = a.start();
        let n = (b.end() - start).num_hours() as usize;
        let s = series(&crate::timefmt::format_utc(start), (0..n).map(|h| ((h * 31) % 17) as f64).collect());
        let both = autocorrelation(&s, &[a.clone(), b.clone()], &[1, 24]).unwrap();
        let ra = autocorrelation(&s, &[a], &[1, 24]).unwrap();
        let rb = autocorrelation(&s, &[b], &[1, 24]).unwrap();
        for lag in [1, 24] {
            assert!((both[&lag] - (ra[&lag] + rb[&lag]) / 2.0).abs() < 1e-15);
        }
    }

    fn year_series(f: impl Fn(DateTime<Utc>) -> f64) -> OutageTimeSeries {
        // ISO 2018 runs 2018-01-01 .. 2018-12-30 (52 weeks)
        let start = parse_utc("2018-01-01T00:00Z").unwrap();
        let v = (0..52 * 168).map(|h| f(start + TimeDelta::hours(h))).collect();
        OutageTimeSeries::new(start, v).unwrap()
    }

    #[test]
    fn weekly_profile_examples() {
        let (p, d) = weekly_profile::<_, OutageTimeSeries>(&year_series(|_| 5.0), None).unwrap();
        assert_eq!(p.len(), 52);
        assert!(p.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(d.is_none());

        let half = year_series(|t| if t.iso_week().week() <= 26 { 2.0 } else { 0.0 });
        let (p, d) = weekly_profile(&half, Some(&year_series(|_| 1.0))).unwrap();
        assert!(p[..26].iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!(p[26..].iter().all(|v| *v == 0.0));
        assert!(d.unwrap().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let short = series("2018-01-01T00:00Z", vec![1.0; 1000]);
        assert!(matches!(weekly_profile::<_, OutageTimeSeries>(&short, None), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn stats_csv_round_trip() {
        let rows = vec![
            StatsRow {
                zone: "GB".into(),
                channel: "total".into(),
                stats: SummaryStats {
                    mean_mw: 14700.0,
                    iqr_mw: 3000.0,
                    recon_error: Some(0.007),
                    acf: STATS_LAGS.iter().map(|&l| (l, 1.0 / l as f64)).collect(),
                },
            },
            StatsRow {
                zone: "GB".into(),
                channel: "model".into(),
                stats: SummaryStats {
                    mean_mw: 7800.0,
                    iqr_mw: 2500.0,
                    recon_error: None,
                    acf: BTreeMap::new(),
                },
            },
        ];
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("zone,channel,mean_mw,iqr_mw,recon_error,acf_1,acf_6,acf_24,acf_168\n"));
        assert!(text.contains("GB,model,7800.000,2500.000,,,,,\n"));
        let back = read_stats_csv(buf.as_slice()).unwrap();
        assert_eq!(back[1], rows[1]);
        assert_eq!(back[0].stats.recon_error, Some(0.007));
    }

    proptest! {
        #[test]
        fn recon_is_scale_invariant(b in prop::collection::vec((0.0f64..500.0, 0.0f64..500.0), 1..50), c in 0.01f64..100.0) {
            let bounds: Vec<(f64, f64)> = b.iter().map(|&(x, y)| (x.min(y), x.max(y) + 1.0)).collect();
            let s = triples(&bounds);
            let e = reconciliation_error(&s).unwrap();
            let e7 = reconciliation_error(&s.scaled(c)).unwrap();
            prop_assert!((e - e7).abs() <= 1e-12 * e.max(1.0));
            prop_assert!((0.0..=1.0).contains(&e));
        }

        #[test]
        fn acf_is_bounded(values in prop::collection::vec(0.0f64..1000.0, 20 * 168..=20 * 168)) {
            let w = winter_window(2016);
            let s = series(&crate::timefmt::format_utc(w.start()), values);
            let acf = autocorrelation(&s, &[w], &STATS_LAGS).unwrap();
            prop_assert!(acf.values().all(|r| r.abs() <= 1.0 + 1e-12));
        }

        #[test]
        fn summary_mean_is_linear(a in prop::collection::vec(0.0f64..1e4, 3360..=3360), k in 0.0f64..50.0) {
            let w = winter_window(2016);
            let start = crate::timefmt::format_utc(w.start());
            let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| (v * k).sqrt() + i as f64).collect();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ma = summary(&series(&start, a), &w).unwrap().0;
            let mb = summary(&series(&start, b), &w).unwrap().0;
            let ms = summary(&series(&start, sum), &w).unwrap().0;
            prop_assert!((ms - (ma + mb)).abs() <= 1e-9 * ms.abs().max(1.0));
        }

        #[test]
        fn weekly_profile_has_mean_one(seed in any::<u64>()) {
            let s = year_series(|t| 1.0 + ((t.timestamp() as u64 ^ seed) % 997) as f64);
            let (p, _) = weekly_profile::<_, OutageTimeSeries>(&s, None).unwrap();
            prop_assert!((p.iter().sum::<f64>() / 52.0 - 1.0).abs() < 1e-9);
        }
    }
}
