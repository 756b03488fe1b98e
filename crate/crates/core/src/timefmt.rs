//! UTC timestamp parsing and formatting shared by the readers and writers.

use chrono::{DateTime, DurationRound, NaiveDate, NaiveDateTime, TimeDelta, Utc};

use crate::error::{Error, Result};

/// `2016-11-06T00:00:00Z`, the form used in every emitted CSV.
pub fn format_utc(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Parses RFC 3339 timestamps as well as the minute-resolution
/// `YYYY-MM-DDTHH:MMZ` form used by platform documents. Offsets are
/// converted to UTC.
pub fn parse_utc(text: &str) -> Result<DateTime<Utc>> {
    let s = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%MZ", "%Y-%m-%dT%H:%M%:z", "%Y-%m-%dT%H:%M:%S%.fZ"] {
        if let Ok(t) = DateTime::parse_from_str(s, fmt) {
            return Ok(t.with_timezone(&Utc));
        }
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    Err(Error::parse(format!("timestamp {s:?}"), "not an ISO-8601 UTC timestamp"))
}

pub fn parse_date(text: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d")
        .map_err(|e| Error::parse(format!("date {text:?}"), e.to_string()))
}

pub fn floor_minute(t: DateTime<Utc>) -> DateTime<Utc> {
    t.duration_trunc(TimeDelta::minutes(1)).expect("minute truncation in range")
}

pub fn floor_hour(t: DateTime<Utc>) -> DateTime<Utc> {
    t.duration_trunc(TimeDelta::hours(1)).expect("hour truncation in range")
}

pub fn is_hour_aligned(t: DateTime<Utc>) -> bool {
    floor_hour(t) == t
}

pub fn midnight(d: NaiveDate) -> DateTime<Utc> {
    d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn accepts_platform_and_rfc3339_forms() {
        let want = Utc.with_ymd_and_hms(2016, 10, 1, 0, 0, 0).unwrap();
        assert_eq!(parse_utc("2016-10-01T00:00Z").unwrap(), want);
        assert_eq!(parse_utc("2016-10-01T00:00:00Z").unwrap(), want);
        assert_eq!(parse_utc("2016-10-01T02:00+02:00").unwrap(), want);
        assert_eq!(parse_utc("2016-10-01T01:00:00+01:00").unwrap(), want);
        assert!(parse_utc("yesterday").is_err());
    }

    #[test]
    fn formatting() {
        let t = Utc.with_ymd_and_hms(2021, 2, 1, 13, 0, 0).unwrap();
        assert_eq!(format_utc(t), "2021-02-01T13:00:00Z");
        assert!(is_hour_aligned(t));
        assert!(!is_hour_aligned(t + TimeDelta::minutes(1)));
    }
}
