//! Hourly reconciliation of (possibly conflicting) outage reports.
//!
//! Within an hour the instantaneous outage of a unit is known only as the
//! set of values of its active reports. At each minute we take the minimum
//! and the maximum of that set (zero when no report is active); the hourly
//! `o_min` and `o_max` are their time averages and `o_mean` is the midpoint.
//! A single report therefore reduces to the plain hourly average.

use std::fmt;
use std::io::{Read, Write};

use chrono::{DateTime, TimeDelta, Utc};
use serde::Serialize;

use super::report::{OutageKind, OutageReport};
use crate::error::{Error, Result};
use crate::timefmt;

/// Contiguous range of whole UTC hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Period {
    start: DateTime<Utc>,
    n_hours: usize,
}

impl Period {
    pub fn new(start: DateTime<Utc>, n_hours: usize) -> Result<Self> {
        if !timefmt::is_hour_aligned(start) {
            return Err(Error::invalid(format!("period start {start} is not on the hour")));
        }
        if n_hours == 0 {
            return Err(Error::invalid("period has no hours"));
        }
        Ok(Self { start, n_hours })
    }

    /// Hours in `[start, end)`.
    pub fn between(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self> {
        let hours = (end - start).num_hours();
        if hours <= 0 || start + TimeDelta::hours(hours) != end {
            return Err(Error::invalid(format!("{start}..{end} is not a whole number of hours")));
        }
        Self::new(start, hours as usize)
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.hour(self.n_hours)
    }

    pub fn n_hours(&self) -> usize {
        self.n_hours
    }

    pub fn hour(&self, i: usize) -> DateTime<Utc> {
        self.start + TimeDelta::hours(i as i64)
    }

    pub fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        if t < self.start || t >= self.end() || !timefmt::is_hour_aligned(t) {
            return None;
        }
        Some((t - self.start).num_hours() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HourlyOutageTriple {
    o_min: f64,
    o_mean: f64,
    o_max: f64,
}

impl HourlyOutageTriple {
    pub const ZERO: Self = Self {
        o_min: 0.0,
        o_mean: 0.0,
        o_max: 0.0,
    };

    pub fn from_bounds(o_min: f64, o_max: f64) -> Result<Self> {
        if !(o_min >= 0.0 && o_min <= o_max && o_max.is_finite()) {
            return Err(Error::invalid(format!("outage bounds {o_min}..{o_max}")));
        }
        Ok(Self {
            o_min,
            o_mean: (o_min + o_max) / 2.0,
            o_max,
        })
    }

    pub fn o_min(&self) -> f64 {
        self.o_min
    }

    pub fn o_mean(&self) -> f64 {
        self.o_mean
    }

    pub fn o_max(&self) -> f64 {
        self.o_max
    }

    fn scaled(&self, c: f64) -> Self {
        Self {
            o_min: self.o_min * c,
            o_mean: (self.o_min * c + self.o_max * c) / 2.0,
            o_max: self.o_max * c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Channel {
    Forced,
    Planned,
    Total,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Forced, Channel::Planned, Channel::Total];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Forced => "forced",
            Channel::Planned => "planned",
            Channel::Total => "total",
        }
    }

    fn admits(self, kind: OutageKind) -> bool {
        match self {
            Channel::Forced => kind == OutageKind::Forced,
            Channel::Planned => kind == OutageKind::Planned,
            Channel::Total => true,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hourly reconciled outages of a unit or zone on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyOutageSeries {
    subject: String,
    channel: Channel,
    start: DateTime<Utc>,
    triples: Vec<HourlyOutageTriple>,
}

impl HourlyOutageSeries {
    pub fn new(
        subject: impl Into<String>,
        channel: Channel,
        start: DateTime<Utc>,
        triples: Vec<HourlyOutageTriple>,
    ) -> Result<Self> {
        if !timefmt::is_hour_aligned(start) {
            return Err(Error::invalid(format!("series start {start} is not on the hour")));
        }
        Ok(Self {
            subject: subject.into(),
            channel,
            start,
            triples,
        })
    }

    pub fn zeros(subject: impl Into<String>, channel: Channel, period: Period) -> Self {
        Self {
            subject: subject.into(),
            channel,
            start: period.start(),
            triples: vec![HourlyOutageTriple::ZERO; period.n_hours()],
        }
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn triples(&self) -> &[HourlyOutageTriple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn timestamp(&self, i: usize) -> DateTime<Utc> {
        self.start + TimeDelta::hours(i as i64)
    }

    pub fn means(&self) -> impl Iterator<Item = f64> + '_ {
        self.triples.iter().map(|t| t.o_mean)
    }

    /// Every value multiplied by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            triples: self.triples.iter().map(|t| t.scaled(c)).collect(),
            ..self.clone()
        }
    }
}

/// Forced, planned and total series of one subject over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub forced: HourlyOutageSeries,
    pub planned: HourlyOutageSeries,
    pub total: HourlyOutageSeries,
}

impl ChannelSet {
    pub fn get(&self, channel: Channel) -> &HourlyOutageSeries {
        match channel {
            Channel::Forced => &self.forced,
            Channel::Planned => &self.planned,
            Channel::Total => &self.total,
        }
    }

    pub fn subject(&self) -> &str {
        self.total.subject()
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.total.start()
    }

    pub fn len(&self) -> usize {
        self.total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_empty()
    }
}

/// Reconciled outage of one unit and channel over `[hour, hour + 1h)`.
///
/// `reports` should all belong to one unit; those outside the hour are ignored.
pub fn hourly_outage<'a, I>(reports: I, hour: DateTime<Utc>) -> HourlyOutageTriple
where
    I: IntoIterator<Item = &'a OutageReport>,
{
    let hour_end = hour + TimeDelta::hours(1);
    let active: Vec<&OutageReport> = reports
        .into_iter()
        .filter(|r| r.start < hour_end && r.end > hour)
        .collect();
    if active.is_empty() {
        return HourlyOutageTriple::ZERO;
    }

    let mut edges = vec![hour, hour_end];
    for r in &active {
        edges.extend([r.start, r.end].into_iter().filter(|t| *t > hour && *t < hour_end));
    }
    edges.sort_unstable();
    edges.dedup();

    // runs of constant (min, max) as (min, max, minutes)
    let mut runs: Vec<(f64, f64, i64)> = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in active.iter().filter(|r| r.start <= a && r.end >= b) {
            lo = lo.min(r.unavailable_mw);
            hi = hi.max(r.unavailable_mw);
        }
        if lo > hi {
            (lo, hi) = (0.0, 0.0);
        }
        let minutes = (b - a).num_minutes();
        match runs.last_mut() {
            Some(last) if last.0 == lo && last.1 == hi => last.2 += minutes,
            _ => runs.push((lo, hi, minutes)),
        }
    }

    let lo: f64 = runs.iter().map(|(v, _, m)| v * *m as f64).sum::<f64>() / 60.0;
    let hi: f64 = runs.iter().map(|(_, v, m)| v * *m as f64).sum::<f64>() / 60.0;
    HourlyOutageTriple::from_bounds(lo, hi.max(lo)).expect("report values are non-negative")
}

fn channel_series(subject: &str, reports: &[&OutageReport], channel: Channel, period: Period) -> HourlyOutageSeries {
    let mut buckets: Vec<Vec<&OutageReport>> = vec![Vec::new(); period.n_hours()];
    let p0 = period.start();
    for r in reports.iter().copied().filter(|r| channel.admits(r.kind)) {
        let start = r.start.max(p0);
        let end = r.end.min(period.end());
        if end <= start {
            continue;
        }
        let first = (start - p0).num_hours() as usize;
        let last = ((end - p0).num_minutes() as usize).div_ceil(60);
        for bucket in &mut buckets[first..last.min(period.n_hours())] {
            bucket.push(r);
        }
    }
    let triples = buckets
        .iter()
        .enumerate()
        .map(|(i, b)| match b.is_empty() {
            true => HourlyOutageTriple::ZERO,
            false => hourly_outage(b.iter().copied(), period.hour(i)),
        })
        .collect();
    HourlyOutageSeries {
        subject: subject.to_string(),
        channel,
        start: p0,
        triples,
    }
}

/// Forced, planned and total series of one unit. Reports of other units
/// are ignored.
///
/// The total channel pools every report regardless of its flag, so a forced
/// and a planned report covering the same interval reconcile rather than add.
pub fn unit_series(unit_id: &str, reports: &[OutageReport], period: Period) -> ChannelSet {
    let refs: Vec<&OutageReport> = reports.iter().filter(|r| r.unit_id == unit_id).collect();
    ChannelSet {
        forced: channel_series(unit_id, &refs, Channel::Forced, period),
        planned: channel_series(unit_id, &refs, Channel::Planned, period),
        total: channel_series(unit_id, &refs, Channel::Total, period),
    }
}

/// Sum over a set of values that does not depend on their order.
fn order_free_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Hour-wise sum of unit series sharing one channel and period.
pub fn zone_aggregate(zone: &str, series: &[&HourlyOutageSeries]) -> Result<HourlyOutageSeries> {
    let first = series
        .first()
        .ok_or_else(|| Error::invalid(format!("zone {zone}: nothing to aggregate")))?;
    for s in series {
        if s.start != first.start || s.len() != first.len() {
            return Err(Error::invalid(format!(
                "zone {zone}: series {} covers a different period than {}",
                s.subject, first.subject
            )));
        }
        if s.channel != first.channel {
            return Err(Error::invalid(format!(
                "zone {zone}: mixing {} and {} channels",
                s.channel, first.channel
            )));
        }
    }
    let mut lo = vec![0.0; series.len()];
    let mut hi = vec![0.0; series.len()];
    let mut triples = Vec::with_capacity(first.len());
    for h in 0..first.len() {
        for (k, s) in series.iter().enumerate() {
            lo[k] = s.triples[h].o_min;
            hi[k] = s.triples[h].o_max;
        }
        let sum_lo = order_free_sum(&mut lo);
        let sum_hi = order_free_sum(&mut hi);
        triples.push(HourlyOutageTriple::from_bounds(sum_lo, sum_hi.max(sum_lo))?);
    }
    HourlyOutageSeries::new(zone, first.channel, first.start, triples)
}

/// Zone series for all channels; a zone without units is all zeros.
pub fn zone_series(zone: &str, units: &[ChannelSet], period: Period) -> Result<ChannelSet> {
    if units.is_empty() {
        return Ok(ChannelSet {
            forced: HourlyOutageSeries::zeros(zone, Channel::Forced, period),
            planned: HourlyOutageSeries::zeros(zone, Channel::Planned, period),
            total: HourlyOutageSeries::zeros(zone, Channel::Total, period),
        });
    }
    let pick = |c: Channel| -> Vec<&HourlyOutageSeries> { units.iter().map(|u| u.get(c)).collect() };
    Ok(ChannelSet {
        forced: zone_aggregate(zone, &pick(Channel::Forced))?,
        planned: zone_aggregate(zone, &pick(Channel::Planned))?,
        total: zone_aggregate(zone, &pick(Channel::Total))?,
    })
}

const ZONE_HEADER: [&str; 10] = [
    "timestamp_utc",
    "forced_min",
    "forced",
    "forced_max",
    "planned_min",
    "planned",
    "planned_max",
    "total_min",
    "total",
    "total_max",
];

pub fn write_zone_csv<W: Write>(writer: W, set: &ChannelSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ZONE_HEADER)?;
    for i in 0..set.len() {
        let mut row = vec![timefmt::format_utc(set.total.timestamp(i))];
        for c in Channel::ALL {
            let t = set.get(c).triples[i];
            row.extend([t.o_min, t.o_mean, t.o_max].map(|v| format!("{v:.3}")));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a zone CSV. Means are recomputed from the rounded bounds.
pub fn read_zone_csv<R: Read>(reader: R, zone: &str) -> Result<ChannelSet> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().ne(ZONE_HEADER) {
        return Err(Error::parse("header", "not a zone outage CSV"));
    }
    let mut start = None;
    let mut cols: [Vec<HourlyOutageTriple>; 3] = Default::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let loc = || format!("row {}", i + 2);
        let t = timefmt::parse_utc(&rec[0]).map_err(|e| Error::parse(loc(), e.to_string()))?;
        let t0 = *start.get_or_insert(t);
        if t != t0 + TimeDelta::hours(i as i64) {
            return Err(Error::parse(loc(), "timestamps are not contiguous hours"));
        }
        for (c, col) in cols.iter_mut().enumerate() {
            let num = |k: usize| -> Result<f64> {
                rec[1 + 3 * c + k]
                    .parse::<f64>()
                    .map_err(|e| Error::parse(loc(), e.to_string()))
            };
            let (lo, mean, hi) = (num(0)?, num(1)?, num(2)?);
            let triple = HourlyOutageTriple::from_bounds(lo, hi)
                .map_err(|e| Error::parse(loc(), e.to_string()))?;
            if (triple.o_mean - mean).abs() > 1.5e-3 {
                return Err(Error::parse(loc(), "mean is not the midpoint of min and max"));
            }
            col.push(triple);
        }
    }
    let start = start.ok_or_else(|| Error::parse("row 2", "empty series"))?;
    let [f, p, t] = cols;
    Ok(ChannelSet {
        forced: HourlyOutageSeries::new(zone, Channel::Forced, start, f)?,
        planned: HourlyOutageSeries::new(zone, Channel::Planned, start, p)?,
        total: HourlyOutageSeries::new(zone, Channel::Total, start, t)?,
    })
}
