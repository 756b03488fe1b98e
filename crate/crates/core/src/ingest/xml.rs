//! Platform unavailability documents (`Unavailability_MarketDocument`).
//!
//! Each `TimeSeries` describes one unit; its `Available_Period` points give
//! the capacity that remains available, so the reduction is nominal minus
//! available. Points follow the series `curveType`: `A03` (variable blocks,
//! each point holds until the next one) or `A01` (one resolution step each).

use std::io::{Cursor, Read};

use chrono::{DateTime, TimeDelta, Utc};
use quick_xml::events::Event;
use quick_xml::Reader;

use super::report::{OutageKind, OutageReport, ReportFuel, ReportStatus};
use super::{ParseWarning, Parsed, ZoneMap};
use crate::error::{Error, Result};
use crate::timefmt;

#[derive(Debug, Default)]
struct Node {
    name: String,
    text: String,
    children: Vec<Node>,
    pos: u64,
}

impl Node {
    fn child(&self, name: &str) -> Option<&Node> {
        self.children.iter().find(|c| c.name == name)
    }

    fn children<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }

    fn text_of(&self, name: &str) -> Option<&str> {
        self.child(name).map(|c| c.text.trim()).filter(|t| !t.is_empty())
    }

    fn required(&self, name: &str, input: &[u8]) -> Result<&str> {
        self.text_of(name).ok_or_else(|| {
            Error::parse(
                location(input, self.pos),
                format!("<{}> has no <{name}>", self.name),
            )
        })
    }
}

fn location(input: &[u8], pos: u64) -> String {
    let pos = (pos as usize).min(input.len());
    let line = input[..pos].iter().filter(|b| **b == b'\n').count() + 1;
    format!("line {line} (byte {pos})")
}

fn predefined_entity(name: &str) -> Option<&'static str> {
    Some(match name {
        "amp" => "&",
        "lt" => "<",
        "gt" => ">",
        "quot" => "\"",
        "apos" => "'",
        _ => return None,
    })
}

/// Every root element of `input`, in order. Concatenated documents are allowed.
fn parse_forest(input: &[u8]) -> Result<Vec<Node>> {
    let mut reader = Reader::from_reader(input);
    let mut stack: Vec<Node> = Vec::new();
    let mut roots = Vec::new();
    let mut buf = Vec::new();
    let xml_err = |reader: &Reader<&[u8]>, e: &dyn std::fmt::Display| {
        Error::parse(location(input, reader.error_position()), e.to_string())
    };
    loop {
        let pos = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_err(&reader, &e))?;
        match event {
            Event::Start(e) => stack.push(Node {
                name: String::from_utf8_lossy(e.local_name().as_ref()).into_owned(),
                pos,
                ..Node::default()
            }),
            Event::Empty(e) => {
                let node = Node {
                    name: String::from_utf8_lossy(e.local_name().as_ref()).into_owned(),
                    pos,
                    ..Node::default()
                };
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => roots.push(node),
                }
            }
            Event::End(_) => {
                let node = stack.pop().expect("reader checks end tags");
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => roots.push(node),
                }
            }
            Event::Text(t) => {
                let text = t.decode().map_err(|e| xml_err(&reader, &e))?;
                match stack.last_mut() {
                    Some(top) => top.text.push_str(&text),
                    None if text.trim().is_empty() => {}
                    None => {
                        return Err(Error::parse(location(input, pos), "text outside any element"))
                    }
                }
            }
            Event::CData(t) => {
                if let Some(top) = stack.last_mut() {
                    top.text.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref().map_err(|e| xml_err(&reader, &e))? {
                    Some(c) => c.to_string(),
                    None => {
                        let name = r.decode().map_err(|e| xml_err(&reader, &e))?;
                        predefined_entity(&name)
                            .ok_or_else(|| {
                                Error::parse(location(input, pos), format!("unknown entity &{name};"))
                            })?
                            .to_string()
                    }
                };
                if let Some(top) = stack.last_mut() {
                    top.text.push_str(&resolved);
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::PI(_) | Event::Comment(_) | Event::DocType(_) => {}
        }
        buf.clear();
    }
    if let Some(open) = stack.last() {
        return Err(Error::parse(
            location(input, open.pos),
            format!("<{}> is never closed", open.name),
        ));
    }
    Ok(roots)
}

fn parse_resolution(text: &str) -> Option<TimeDelta> {
    let (body, unit) = if let Some(rest) = text.strip_prefix("PT") {
        (&rest[..rest.len().checked_sub(1)?], rest.chars().last()?)
    } else if let Some(rest) = text.strip_prefix('P') {
        (&rest[..rest.len().checked_sub(1)?], rest.chars().last()?.to_ascii_lowercase())
    } else {
        return None;
    };
    let n: i64 = body.parse().ok()?;
    match unit {
        'M' => Some(TimeDelta::minutes(n)),
        'H' => Some(TimeDelta::hours(n)),
        'd' => Some(TimeDelta::days(n)),
        'w' => Some(TimeDelta::weeks(n)),
        _ => None,
    }
}

fn parse_number(node: &Node, name: &str, input: &[u8]) -> Result<f64> {
    let text = node.required(name, input)?;
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(location(input, node.pos), format!("<{name}> {text:?} is not a number")))
}

fn interval(node: &Node, input: &[u8]) -> Result<(DateTime<Utc>, DateTime<Utc>)> {
    let ti = node
        .child("timeInterval")
        .ok_or_else(|| Error::parse(location(input, node.pos), "missing <timeInterval>"))?;
    let start = timefmt::parse_utc(ti.required("start", input)?)
        .map_err(|e| Error::parse(location(input, ti.pos), e.to_string()))?;
    let end = timefmt::parse_utc(ti.required("end", input)?)
        .map_err(|e| Error::parse(location(input, ti.pos), e.to_string()))?;
    Ok((timefmt::floor_minute(start), timefmt::floor_minute(end)))
}

struct DocHeader<'a> {
    id: &'a str,
    revision: u32,
    doc_type: &'a str,
    status: ReportStatus,
}

fn document(root: &Node, input: &[u8], zones: &ZoneMap, out: &mut Parsed) -> Result<()> {
    let id = root.required("mRID", input)?;
    let rev_text = root.required("revisionNumber", input)?;
    let revision = rev_text.parse::<u32>().map_err(|_| {
        Error::parse(location(input, root.pos), format!("revision {rev_text:?} is not an integer"))
    })?;
    let status = match root.child("docStatus").and_then(|s| s.text_of("value")) {
        None | Some("A05") => ReportStatus::Active,
        Some("A09") | Some("A13") => ReportStatus::Withdrawn,
        Some(other) => {
            return Err(Error::parse(
                location(input, root.pos),
                format!("unknown document status {other:?}"),
            ))
        }
    };
    let header = DocHeader {
        id,
        revision,
        doc_type: root.text_of("type").unwrap_or(""),
        status,
    };
    for ts in root.children("TimeSeries") {
        time_series(&header, ts, input, zones, out)?;
    }
    Ok(())
}

fn time_series(doc: &DocHeader<'_>, ts: &Node, input: &[u8], zones: &ZoneMap, out: &mut Parsed) -> Result<()> {
    let where_ = || format!("document {} {}", doc.id, location(input, ts.pos));
    let kind = match ts.text_of("businessType") {
        Some("A53") => OutageKind::Planned,
        Some("A54") => OutageKind::Forced,
        other => {
            out.warnings.push(ParseWarning::SkippedRecord {
                location: where_(),
                reason: format!("unknown business type {:?}", other.unwrap_or("")),
            });
            return Ok(());
        }
    };
    let zone_code = ts
        .text_of("biddingZone_Domain.mRID")
        .ok_or_else(|| Error::parse(where_(), "missing biddingZone_Domain.mRID"))?;
    let zone = zones.zone_of(zone_code);

    let resource = ts.text_of("production_RegisteredResource.mRID");
    let psr = ts.text_of("production_RegisteredResource.pSRType.powerSystemResources.mRID");
    // production-unit documents name the unit as the power system resource
    let unit_id = match doc.doc_type {
        "A77" => psr.or(resource),
        _ => resource.or(psr),
    }
    .ok_or_else(|| Error::parse(where_(), "no registered resource identifier"))?;

    let fuel = ts
        .text_of("production_RegisteredResource.pSRType.psrType")
        .and_then(ReportFuel::from_psr_type)
        .unwrap_or(ReportFuel::Other);

    let Some(nominal_text) =
        ts.text_of("production_RegisteredResource.pSRType.powerSystemResources.nominalP")
    else {
        out.warnings.push(ParseWarning::SkippedRecord {
            location: where_(),
            reason: format!("unit {unit_id} has no nominal capacity"),
        });
        return Ok(());
    };
    let nominal_mw = nominal_text
        .parse::<f64>()
        .ok()
        .filter(|v| *v > 0.0 && v.is_finite())
        .ok_or_else(|| Error::parse(where_(), format!("nominal capacity {nominal_text:?}")))?;

    let variable_blocks = ts.text_of("curveType").unwrap_or("A03") != "A01";

    for period in ts.children("Available_Period") {
        let (p_start, p_end) = interval(period, input)?;
        let resolution = period.text_of("resolution").and_then(parse_resolution);
        let mut points: Vec<(u32, f64)> = period
            .children("Point")
            .map(|pt| {
                let pos = pt.required("position", input)?;
                let pos = pos.parse::<u32>().ok().filter(|p| *p >= 1).ok_or_else(|| {
                    Error::parse(location(input, pt.pos), format!("point position {pos:?}"))
                })?;
                Ok((pos, parse_number(pt, "quantity", input)?))
            })
            .collect::<Result<_>>()?;
        points.sort_by_key(|p| p.0);

        let offset = |pos: u32| -> Result<DateTime<Utc>> {
            if pos == 1 {
                return Ok(p_start);
            }
            let res = resolution.ok_or_else(|| {
                Error::parse(location(input, period.pos), "unsupported or missing resolution")
            })?;
            Ok(p_start + res * (pos as i32 - 1))
        };

        for (k, &(pos, available)) in points.iter().enumerate() {
            let start = offset(pos)?;
            let end = if variable_blocks {
                match points.get(k + 1) {
                    Some(&(next, _)) => offset(next)?,
                    None => p_end,
                }
            } else {
                offset(pos + 1)?.min(p_end)
            };
            let end = end.min(p_end);
            if end <= start {
                continue;
            }
            out.reports.push(OutageReport {
                report_id: doc.id.to_string(),
                revision: doc.revision,
                unit_id: unit_id.to_string(),
                zone: zone.clone(),
                fuel,
                nominal_mw,
                start,
                end,
                unavailable_mw: (nominal_mw - available).max(0.0),
                kind,
                status: doc.status,
            });
        }
    }
    Ok(())
}

pub(super) fn parse_xml(input: &[u8], zones: &ZoneMap, out: &mut Parsed) -> Result<()> {
    for root in parse_forest(input)? {
        match root.name.as_str() {
            "Unavailability_MarketDocument" => document(&root, input, zones, out)?,
            "Acknowledgement_MarketDocument" => {
                let reason = root.child("Reason").and_then(|r| r.text_of("code"));
                // 999: no matching data for the query
                if reason != Some("999") {
                    out.warnings.push(ParseWarning::SkippedRecord {
                        location: location(input, root.pos),
                        reason: format!(
                            "acknowledgement {:?}: {}",
                            reason.unwrap_or(""),
                            root.child("Reason").and_then(|r| r.text_of("text")).unwrap_or("")
                        ),
                    });
                }
            }
            other => {
                return Err(Error::parse(
                    location(input, root.pos),
                    format!("unexpected root element <{other}>"),
                ))
            }
        }
    }
    Ok(())
}

/// XML members of a zip archive, in archive order.
pub(super) fn unzip_documents(input: &[u8]) -> Result<Vec<(String, Vec<u8>)>> {
    let mut archive = zip::ZipArchive::new(Cursor::new(input))
        .map_err(|e| Error::parse("zip archive", e.to_string()))?;
    let mut out = Vec::with_capacity(archive.len());
    for i in 0..archive.len() {
        let mut file = archive
            .by_index(i)
            .map_err(|e| Error::parse(format!("zip member {i}"), e.to_string()))?;
        if file.is_dir() {
            continue;
        }
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        out.push((file.name().to_string(), bytes));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<Unavailability_MarketDocument xmlns="urn:iec62325.351:tc57wg16:451-6:outagedocument:3:0">
  <mRID>DOC-1</mRID>
  <revisionNumber>3</revisionNumber>
  <type>A80</type>
  <TimeSeries>
    <businessType>A54</businessType>
    <biddingZone_Domain.mRID codingScheme="A01">10YGB----------A</biddingZone_Domain.mRID>
    <curveType>A03</curveType>
    <production_RegisteredResource.mRID codingScheme="A01">UNIT-1</production_RegisteredResource.mRID>
    <production_RegisteredResource.pSRType.psrType>B14</production_RegisteredResource.pSRType.psrType>
    <production_RegisteredResource.pSRType.powerSystemResources.mRID>UNIT-1</production_RegisteredResource.pSRType.powerSystemResources.mRID>
    <production_RegisteredResource.pSRType.powerSystemResources.nominalP unit="MAW">600</production_RegisteredResource.pSRType.powerSystemResources.nominalP>
    <Available_Period>
      <timeInterval><start>2021-02-01T00:00Z</start><end>2021-02-01T03:00Z</end></timeInterval>
      <resolution>PT1M</resolution>
      <Point><position>1</position><quantity>0</quantity></Point>
      <Point><position>91</position><quantity>400</quantity></Point>
    </Available_Period>
  </TimeSeries>
  <TimeSeries>
    <businessType>A53</businessType>
    <biddingZone_Domain.mRID>10YFR-RTE------C</biddingZone_Domain.mRID>
    <curveType>A01</curveType>
    <production_RegisteredResource.mRID>UNIT-2</production_RegisteredResource.mRID>
    <production_RegisteredResource.pSRType.psrType>B04</production_RegisteredResource.pSRType.psrType>
    <production_RegisteredResource.pSRType.powerSystemResources.nominalP>300.5</production_RegisteredResource.pSRType.powerSystemResources.nominalP>
    <Available_Period>
      <timeInterval><start>2021-02-01T00:00Z</start><end>2021-02-01T01:30Z</end></timeInterval>
      <resolution>PT60M</resolution>
      <Point><position>2</position><quantity>100.5</quantity></Point>
      <Point><position>1</position><quantity>0</quantity></Point>
    </Available_Period>
  </TimeSeries>
  <TimeSeries>
    <businessType>A95</businessType>
    <biddingZone_Domain.mRID>10YGB----------A</biddingZone_Domain.mRID>
    <production_RegisteredResource.mRID>UNIT-3</production_RegisteredResource.mRID>
  </TimeSeries>
  <TimeSeries>
    <businessType>A53</businessType>
    <biddingZone_Domain.mRID>10YGB----------A</biddingZone_Domain.mRID>
    <production_RegisteredResource.mRID>UNIT-4</production_RegisteredResource.mRID>
  </TimeSeries>
</Unavailability_MarketDocument>
"#;

    fn parse(input: &[u8]) -> Result<Parsed> {
        let mut out = Parsed::default();
        parse_xml(input, &ZoneMap::default(), &mut out)?;
        Ok(out)
    }

    fn t(s: &str) -> DateTime<Utc> {
        timefmt::parse_utc(s).unwrap()
    }

    #[test]
    fn full_document() {
        let p = parse(DOC.as_bytes()).unwrap();
        assert_eq!(p.reports.len(), 4);
        let r = &p.reports;
        // variable blocks: each point holds until the next one
        assert_eq!((r[0].start, r[0].end), (t("2021-02-01T00:00Z"), t("2021-02-01T01:30Z")));
        assert_eq!(r[0].unavailable_mw, 600.0);
        assert_eq!((r[1].start, r[1].end), (t("2021-02-01T01:30Z"), t("2021-02-01T03:00Z")));
        assert_eq!(r[1].unavailable_mw, 200.0);
        assert!(r[..2].iter().all(|x| x.kind == OutageKind::Forced
            && x.zone == "GB"
            && x.fuel == ReportFuel::Dispatchable(crate::fleet::Fuel::Nuclear)
            && x.revision == 3
            && x.status == ReportStatus::Active
            && x.report_id == "DOC-1"));
        // fixed blocks: one resolution step per point, clipped to the period
        assert_eq!((r[2].start, r[2].end), (t("2021-02-01T00:00Z"), t("2021-02-01T01:00Z")));
        assert_eq!(r[2].unavailable_mw, 300.5);
        assert_eq!((r[3].start, r[3].end), (t("2021-02-01T01:00Z"), t("2021-02-01T01:30Z")));
        assert_eq!(r[3].unavailable_mw, 200.0);
        assert_eq!((r[3].zone.as_str(), r[3].kind, r[3].fuel), ("FR", OutageKind::Planned, ReportFuel::Dispatchable(crate::fleet::Fuel::Ccgt)));

        assert_eq!(p.warnings.len(), 2);
        let reasons: Vec<_> = p
            .warnings
            .iter()
            .map(|ParseWarning::SkippedRecord { reason, .. }| reason.as_str())
            .collect();
        assert!(reasons[0].contains("A95"), "{reasons:?}");
        assert!(reasons[1].contains("UNIT-4") && reasons[1].contains("nominal"), "{reasons:?}");
    }

    #[test]
    fn withdrawn_and_production_unit_documents() {
        let doc = DOC
            .replace("<type>A80</type>", "<type>A77</type><docStatus><value>A13</value></docStatus>")
            .replace(
                "<production_RegisteredResource.mRID codingScheme=\"A01\">UNIT-1",
                "<production_RegisteredResource.mRID codingScheme=\"A01\">STATION-1",
            );
        let p = parse(doc.as_bytes()).unwrap();
        assert!(p.reports.iter().all(|r| r.status == ReportStatus::Withdrawn));
        // A77 names the unit as the power system resource
        assert_eq!(p.reports[0].unit_id, "UNIT-1");
        // no power system resource given: fall back to the registered resource
        assert_eq!(p.reports[2].unit_id, "UNIT-2");
    }

    #[test]
    fn zip_archive_of_documents() {
        use std::io::Write;
        let mut buf = Cursor::new(Vec::new());
        {
            let mut z = zip::ZipWriter::new(&mut buf);
            let opts = zip::write::SimpleFileOptions::default();
            for name in ["a.xml", "b.xml"] {
                z.start_file(name, opts).unwrap();
                z.write_all(DOC.as_bytes()).unwrap();
            }
            z.finish().unwrap();
        }
        let p = super::super::parse_document(buf.get_ref()).unwrap();
        assert_eq!(p.reports.len(), 8);
    }

    #[test]
    fn malformed_documents_are_errors() {
        let bad_qty = DOC.replace("<quantity>400</quantity>", "<quantity>lots</quantity>");
        assert!(matches!(parse(bad_qty.as_bytes()), Err(Error::Parse { .. })));
        let bad_status = DOC.replace("<type>A80</type>", "<type>A80</type><docStatus><value>X1</value></docStatus>");
        assert!(parse(bad_status.as_bytes()).is_err());
        assert!(parse(b"<Publication_MarketDocument/>").is_err());
        let ack = b"<Acknowledgement_MarketDocument><Reason><code>999</code></Reason></Acknowledgement_MarketDocument>";
        assert_eq!(parse(ack).unwrap(), Parsed::default());
    }

    #[test]
    fn resolutions() {
        assert_eq!(parse_resolution("PT1M"), Some(TimeDelta::minutes(1)));
        assert_eq!(parse_resolution("PT60M"), Some(TimeDelta::hours(1)));
        assert_eq!(parse_resolution("PT1H"), Some(TimeDelta::hours(1)));
        assert_eq!(parse_resolution("P1D"), Some(TimeDelta::days(1)));
        assert_eq!(parse_resolution("P1Y"), None);
        assert_eq!(parse_resolution("garbage"), None);
    }

    #[test]
    fn forest_handles_entities_and_multiple_roots() {
        let xml = b"<?xml version=\"1.0\"?><a><b>x &amp; y&#33;</b></a>\n<?xml version=\"1.0\"?><c/>";
        let roots = parse_forest(xml).unwrap();
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].text_of("b"), Some("x & y!"));
        assert_eq!(roots[1].name, "c");
    }

    #[test]
    fn forest_reports_location_of_errors() {
        let err = parse_forest(b"<a>\n<b></a>").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("line 2"), "{location}"),
            e => panic!("unexpected {e}"),
        }
        let err = parse_forest(b"<a>\n<b>").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
