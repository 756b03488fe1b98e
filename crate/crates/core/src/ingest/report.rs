use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fleet::Fuel;
use crate::timefmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutageKind {
    Forced,
    Planned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReportStatus {
    Active,
    Withdrawn,
}

/// Fuel of a reporting unit. Renewables are carried through parsing so the
/// filter can drop them explicitly; production types with no dispatchable
/// class of their own (pumped storage is mapped to hydro) are `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportFuel {
    Dispatchable(Fuel),
    Renewable,
    Other,
}

impl ReportFuel {
    /// Maps a platform production type (`B01`..`B25`).
    pub fn from_psr_type(code: &str) -> Option<Self> {
        use ReportFuel::*;
        Some(match code.trim() {
            "B01" => Dispatchable(Fuel::Biomass),
            "B02" | "B03" | "B05" | "B08" => Dispatchable(Fuel::Coal),
            "B04" => Dispatchable(Fuel::Ccgt),
            "B06" | "B07" => Dispatchable(Fuel::Oil),
            "B10" | "B12" => Dispatchable(Fuel::Hydro),
            "B14" => Dispatchable(Fuel::Nuclear),
            "B17" => Dispatchable(Fuel::Waste),
            // run-of-river, solar, marine, other renewable, wind off/onshore, geothermal
            "B09" | "B11" | "B13" | "B15" | "B16" | "B18" | "B19" => Renewable,
            "B20" | "B25" => Other,
            _ => return None,
        })
    }

    pub fn is_renewable(self) -> bool {
        self == ReportFuel::Renewable
    }
}

impl fmt::Display for ReportFuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportFuel::Dispatchable(fuel) => write!(f, "{fuel}"),
            ReportFuel::Renewable => f.write_str("Renewable"),
            ReportFuel::Other => f.write_str("Other"),
        }
    }
}

impl FromStr for ReportFuel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            x if x.eq_ignore_ascii_case("renewable") => Ok(ReportFuel::Renewable),
            x if x.eq_ignore_ascii_case("other") => Ok(ReportFuel::Other),
            x => x.parse().map(ReportFuel::Dispatchable),
        }
    }
}

impl Serialize for ReportFuel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReportFuel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod minute_utc {
    use super::*;

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&timefmt::format_utc(*t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        timefmt::parse_utc(&s)
            .map(timefmt::floor_minute)
            .map_err(serde::de::Error::custom)
    }
}

/// One normalized unavailability report for one unit.
///
/// `unavailable_mw` is the capacity reduction in force over `[start, end)`.
/// Timestamps are UTC at minute resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageReport {
    pub report_id: String,
    pub revision: u32,
    pub unit_id: String,
    pub zone: String,
    pub fuel: ReportFuel,
    pub nominal_mw: f64,
    #[serde(with = "minute_utc")]
    pub start: DateTime<Utc>,
    #[serde(with = "minute_utc")]
    pub end: DateTime<Utc>,
    pub unavailable_mw: f64,
    pub kind: OutageKind,
    pub status: ReportStatus,
}

impl OutageReport {
    pub fn validate(&self) -> Result<()> {
        if self.end <= self.start {
            return Err(Error::invalid(format!(
                "report {} rev {}: end {} is not after start {}",
                self.report_id, self.revision, self.end, self.start
            )));
        }
        if !(self.unavailable_mw >= 0.0 && self.unavailable_mw.is_finite()) {
            return Err(Error::invalid(format!(
                "report {}: unavailable capacity {} MW is negative",
                self.report_id, self.unavailable_mw
            )));
        }
        if !(self.nominal_mw > 0.0 && self.nominal_mw.is_finite()) {
            return Err(Error::invalid(format!(
                "report {}: nominal capacity {} MW is not positive",
                self.report_id, self.nominal_mw
            )));
        }
        Ok(())
    }

    pub fn duration_minutes(&self) -> i64 {
        (self.end - self.start).num_minutes()
    }

    /// Total order over every field; used to make report sets canonical.
    pub(crate) fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.report_id
            .cmp(&other.report_id)
            .then(self.revision.cmp(&other.revision))
            .then(self.unit_id.cmp(&other.unit_id))
            .then(self.start.cmp(&other.start))
            .then(self.end.cmp(&other.end))
            .then(self.kind.cmp(&other.kind))
            .then(self.unavailable_mw.total_cmp(&other.unavailable_mw))
            .then(self.nominal_mw.total_cmp(&other.nominal_mw))
            .then(self.status.cmp(&other.status))
            .then(self.fuel.cmp(&other.fuel))
            .then(self.zone.cmp(&other.zone))
    }
}
