//! Outage-report ingestion: parse, deduplicate, filter, reconcile.
//!
//! Raw input is either a platform XML document (document types A77 and A80,
//! possibly several concatenated or zipped together) or JSON lines with one
//! [`OutageReport`] per line. Reports are reconciled into hourly series in
//! [`reconcile`].

pub mod reconcile;
mod report;
mod xml;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use reconcile::{
    hourly_outage, read_zone_csv, unit_series, write_zone_csv, zone_aggregate, zone_series,
    Channel, ChannelSet, HourlyOutageSeries, HourlyOutageTriple, Period,
};
pub use report::{OutageKind, OutageReport, ReportFuel, ReportStatus};

/// Reports above this multiple of nominal capacity are treated as misreported.
pub const MAX_REDUCTION_RATIO: f64 = 1.33;

/// A record that was read but not turned into a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ParseWarning {
    SkippedRecord { location: String, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parsed {
    pub reports: Vec<OutageReport>,
    pub warnings: Vec<ParseWarning>,
}

/// Maps platform area codes (EIC) to short zone codes and back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneMap {
    /// zone code -> area code used for queries
    codes: BTreeMap<String, String>,
    /// area code -> zone code, including secondary codes
    reverse: BTreeMap<String, String>,
}

impl Default for ZoneMap {
    fn default() -> Self {
        // the first code of each zone is the one used for queries
        const TABLE: &[(&str, &[&str])] = &[
            ("BE", &["10YBE----------2"]),
            ("DE", &["10Y1001A1001A83F", "10Y1001A1001A82H", "10Y1001A1001A63L"]),
            ("DK", &["10Y1001A1001A65H", "10YDK-1--------W", "10YDK-2--------M"]),
            ("ES", &["10YES-REE------0"]),
            ("FR", &["10YFR-RTE------C"]),
            ("GB", &["10YGB----------A"]),
            ("IE", &["10YIE-1001A00010", "10Y1001A1001A59C"]),
            ("NL", &["10YNL----------L"]),
            (
                "NO",
                &[
                    "10YNO-0--------C",
                    "10YNO-1--------2",
                    "10YNO-2--------T",
                    "10YNO-3--------J",
                    "10YNO-4--------9",
                    "10Y1001A1001A48H",
                ],
            ),
        ];
        let mut map = ZoneMap {
            codes: BTreeMap::new(),
            reverse: BTreeMap::new(),
        };
        for (zone, codes) in TABLE {
            map.codes.insert(zone.to_string(), codes[0].to_string());
            for c in *codes {
                map.reverse.insert(c.to_string(), zone.to_string());
            }
        }
        map
    }
}

impl ZoneMap {
    /// Adds or replaces the query code of `zone`.
    pub fn insert(&mut self, zone: &str, area_code: &str) {
        self.codes.insert(zone.to_string(), area_code.to_string());
        self.reverse.insert(area_code.to_string(), zone.to_string());
    }

    pub fn area_code(&self, zone: &str) -> Option<&str> {
        self.codes.get(zone).map(String::as_str)
    }

    /// Zone for an area code; unknown codes are returned unchanged.
    pub fn zone_of(&self, area_code: &str) -> String {
        self.reverse
            .get(area_code)
            .cloned()
            .unwrap_or_else(|| area_code.to_string())
    }
}

/// Parses one raw payload with the built-in zone table.
pub fn parse_document(raw: &[u8]) -> Result<Parsed> {
    parse_document_with(raw, &ZoneMap::default())
}

pub fn parse_document_with(raw: &[u8], zones: &ZoneMap) -> Result<Parsed> {
    let mut out = Parsed::default();
    let body = raw.trim_ascii_start();
    if body.is_empty() {
        return Ok(out);
    }
    if body.starts_with(b"PK\x03\x04") {
        for (name, member) in xml::unzip_documents(body)? {
            xml::parse_xml(&member, zones, &mut out).map_err(|e| match e {
                Error::Parse { location, message } => Error::Parse {
                    location: format!("{name}: {location}"),
                    message,
                },
                e => e,
            })?;
        }
    } else if body[0] == b'<' {
        xml::parse_xml(body, zones, &mut out)?;
    } else if body[0] == b'{' {
        parse_json_lines(body, &mut out)?;
    } else {
        return Err(Error::parse("byte 0", "neither XML, zip nor JSON lines"));
    }
    Ok(out)
}

/// Members of a zip archive, in archive order.
pub(crate) fn unzip_members(raw: &[u8]) -> Result<Vec<Vec<u8>>> {
    Ok(xml::unzip_documents(raw)?.into_iter().map(|(_, bytes)| bytes).collect())
}

fn parse_json_lines(body: &[u8], out: &mut Parsed) -> Result<()> {
    let text = std::str::from_utf8(body).map_err(|e| Error::parse("JSON lines", e.to_string()))?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let location = format!("line {}", i + 1);
        let report: OutageReport =
            serde_json::from_str(line).map_err(|e| Error::parse(&location, e.to_string()))?;
        report
            .validate()
            .map_err(|e| Error::parse(&location, e.to_string()))?;
        out.reports.push(report);
    }
    Ok(())
}

pub fn write_json_lines<W: std::io::Write>(mut w: W, reports: &[OutageReport]) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Keeps only the latest revision of each report id.
///
/// All records of that revision are kept (a document may describe several
/// intervals); exact duplicates collapse to one. The output is sorted
/// canonically, so it does not depend on input order.
pub fn deduplicate(reports: Vec<OutageReport>) -> Vec<OutageReport> {
    let mut latest: HashMap<&str, u32> = HashMap::new();
    for r in &reports {
        let rev = latest.entry(r.report_id.as_str()).or_insert(r.revision);
        *rev = (*rev).max(r.revision);
    }
    let latest: HashMap<String, u32> = latest.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let mut kept: Vec<OutageReport> = reports
        .into_iter()
        .filter(|r| latest[&r.report_id] == r.revision)
        .collect();
    kept.sort_by(|a, b| a.canonical_cmp(b));
    kept.dedup_by(|a, b| a.canonical_cmp(b).is_eq());
    kept
}

/// Drops withdrawn reports, renewable units and implausible reductions
/// (more than [`MAX_REDUCTION_RATIO`] times the unit's nominal capacity).
pub fn filter_reports(reports: Vec<OutageReport>) -> Vec<OutageReport> {
    reports
        .into_iter()
        .filter(|r| r.status == ReportStatus::Active)
        .filter(|r| !r.fuel.is_renewable())
        .filter(|r| r.unavailable_mw <= MAX_REDUCTION_RATIO * r.nominal_mw)
        .collect()
}

/// Replaces stated nominal capacities with registry values where the unit is known.
pub fn apply_registry(mut reports: Vec<OutageReport>, registry: &HashMap<String, f64>) -> Vec<OutageReport> {
    for r in &mut reports {
        if let Some(&mw) = registry.get(&r.unit_id) {
            if (mw - r.nominal_mw).abs() > 1e-9 {
                log::warn!(
                    "unit {}: report {} states {} MW nominal, registry has {} MW",
                    r.unit_id,
                    r.report_id,
                    r.nominal_mw,
                    mw
                );
                r.nominal_mw = mw;
            }
        }
    }
    reports
}

/// Reads a `unit_id,nominal_mw` registry.
pub fn read_unit_registry<R: std::io::Read>(reader: R) -> Result<HashMap<String, f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = HashMap::new();
    for row in rdr.deserialize::<(String, f64)>() {
        let (id, mw) = row?;
        if !(mw > 0.0) {
            return Err(Error::invalid(format!("unit {id}: nominal {mw} MW")));
        }
        out.insert(id, mw);
    }
    Ok(out)
}
