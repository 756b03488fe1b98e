use chrono::{DateTime, Datelike, NaiveDate, TimeDelta, Utc, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timefmt;

/// How a winter window is cut out of the calendar.
///
/// The window runs `n_weeks` Sunday-to-Saturday weeks from the first Sunday
/// of November; any week containing one of `excluded_days` (month, day) is
/// dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WinterRule {
    pub n_weeks: u32,
    pub excluded_days: Vec<(u32, u32)>,
}

impl Default for WinterRule {
    fn default() -> Self {
        Self {
            n_weeks: 20,
            excluded_days: vec![(12, 25), (1, 1)],
        }
    }
}

/// A set of evaluation hours made of whole-hour segments.
///
/// Usually a winter; [`WinterWindow::contiguous`] builds an arbitrary span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WinterWindow {
    label: String,
    start: DateTime<Utc>,
    /// Retained runs as (hour offset from `start`, length), ascending and disjoint.
    runs: Vec<(usize, usize)>,
}

impl WinterWindow {
    /// A single run of `n_hours` from `start`.
    pub fn contiguous(label: impl Into<String>, start: DateTime<Utc>, n_hours: usize) -> Result<Self> {
        if !timefmt::is_hour_aligned(start) || n_hours == 0 {
            return Err(Error::invalid(format!("window of {n_hours} h from {start}")));
        }
        Ok(Self {
            label: label.into(),
            start,
            runs: vec![(0, n_hours)],
        })
    }

    /// Season label such as `16/17`.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// First hour of the window; for winters, midnight UTC of the first Sunday of November.
    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn n_hours(&self) -> usize {
        self.runs.iter().map(|r| r.1).sum()
    }

    /// Retained hours in ascending order.
    pub fn hours(&self) -> impl Iterator<Item = DateTime<Utc>> + '_ {
        self.segments().flat_map(|(from, n)| (0..n).map(move |h| from + TimeDelta::hours(h as i64)))
    }

    /// Maximal runs of consecutive retained hours as (first hour, length).
    pub fn segments(&self) -> impl Iterator<Item = (DateTime<Utc>, usize)> + '_ {
        self.runs
            .iter()
            .map(|&(at, n)| (self.start + TimeDelta::hours(at as i64), n))
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        if t < self.start || !timefmt::is_hour_aligned(t) {
            return false;
        }
        let h = (t - self.start).num_hours() as usize;
        self.runs.iter().any(|&(at, n)| (at..at + n).contains(&h))
    }

    /// First hour after the last retained hour.
    pub fn end(&self) -> DateTime<Utc> {
        let (at, n) = self.runs.last().copied().unwrap_or((0, 0));
        self.start + TimeDelta::hours((at + n) as i64)
    }
}

fn first_sunday_of_november(year: i32) -> Option<NaiveDate> {
    let first = NaiveDate::from_ymd_opt(year, 11, 1)?;
    let shift = first.weekday().days_since(Weekday::Sun);
    Some(first + TimeDelta::days(((7 - shift) % 7) as i64))
}

/// Winter window starting in November of `winter_start_year` (default rule).
pub fn winter_window(winter_start_year: i32) -> WinterWindow {
    winter_window_with(winter_start_year, &WinterRule::default())
        .expect("the default rule is valid for every representable year")
}

pub fn winter_window_with(winter_start_year: i32, rule: &WinterRule) -> Result<WinterWindow> {
    if !(1900..=9998).contains(&winter_start_year) {
        return Err(Error::invalid(format!("winter year {winter_start_year} out of range")));
    }
    if rule.n_weeks == 0 || rule.n_weeks > 52 {
        return Err(Error::invalid(format!("winter of {} weeks", rule.n_weeks)));
    }
    let first = first_sunday_of_november(winter_start_year).expect("year checked");
    let mut excluded = Vec::new();
    for &(month, day) in &rule.excluded_days {
        for year in [winter_start_year, winter_start_year + 1] {
            let Some(date) = NaiveDate::from_ymd_opt(year, month, day) else {
                return Err(Error::invalid(format!("excluded day {month}-{day} is not a date")));
            };
            let offset = (date - first).num_days();
            if offset >= 0 && offset < 7 * rule.n_weeks as i64 {
                excluded.push((offset / 7) as u32);
            }
        }
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for w in (0..rule.n_weeks).filter(|w| !excluded.contains(w)) {
        let at = w as usize * 168;
        match runs.last_mut() {
            Some(last) if last.0 + last.1 == at => last.1 += 168,
            _ => runs.push((at, 168)),
        }
    }
    if runs.is_empty() {
        return Err(Error::invalid("every week of the winter is excluded"));
    }
    Ok(WinterWindow {
        label: season_label(winter_start_year),
        start: timefmt::midnight(first),
        runs,
    })
}

/// `2016` -> `16/17`.
pub fn season_label(winter_start_year: i32) -> String {
    format!(
        "{:02}/{:02}",
        winter_start_year.rem_euclid(100),
        (winter_start_year + 1).rem_euclid(100)
    )
}

/// Parses `16/17` (years 2000-2099) or `2016` into the starting year.
pub fn parse_season(label: &str) -> Result<i32> {
    let label = label.trim();
    let bad = || Error::Usage(format!("season {label:?} is neither YY/YY nor YYYY"));
    if let Some((a, b)) = label.split_once('/') {
        let a: i32 = a.parse().map_err(|_| bad())?;
        let b: i32 = b.parse().map_err(|_| bad())?;
        if !(0..100).contains(&a) || (a + 1) % 100 != b {
            return Err(bad());
        }
        return Ok(2000 + a);
    }
    match label.parse::<i32>() {
        Ok(y) if (1900..=9998).contains(&y) => Ok(y),
        _ => Err(bad()),
    }
}
