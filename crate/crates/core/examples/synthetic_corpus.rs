//! Writes a small, deterministic platform corpus: two zones, two weeks of
//! unavailability documents already in the cache, plus the registry files a
//! pipeline run needs.
//!
//! ```text
//! cargo run --example synthetic_corpus -- crates/core/testdata/corpus
//! ```
//!
//! The corpus deliberately contains the awkward cases real data has:
//! overlapping forced and planned reports, superseded revisions, a withdrawn
//! report, a misreported nominal capacity, a renewable unit and a series
//! with an unknown business type.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, TimeDelta, Utc};
use gen_outage::pipeline::Cache;
use gen_outage::seed::rng_for;
use gen_outage::timefmt::{format_utc, midnight, parse_utc};
use rand::Rng;

const SEED: u64 = 20210201;

struct Unit {
    id: &'static str,
    zone: &'static str,
    psr: &'static str,
    fuel: &'static str,
    nominal: u32,
    doc_type: &'static str,
}

const UNITS: &[Unit] = &[
    Unit { id: "48W-GB-NUC-1", zone: "GB", psr: "B14", fuel: "Nuclear", nominal: 660, doc_type: "A80" },
    Unit { id: "48W-GB-NUC-2", zone: "GB", psr: "B14", fuel: "Nuclear", nominal: 660, doc_type: "A80" },
    Unit { id: "48W-GB-CCGT-1", zone: "GB", psr: "B04", fuel: "CCGT", nominal: 420, doc_type: "A80" },
    Unit { id: "48W-GB-CCGT-2", zone: "GB", psr: "B04", fuel: "CCGT", nominal: 850, doc_type: "A80" },
    Unit { id: "48W-GB-CCGT-3", zone: "GB", psr: "B04", fuel: "CCGT", nominal: 400, doc_type: "A77" },
    Unit { id: "48W-GB-COAL-1", zone: "GB", psr: "B05", fuel: "Coal", nominal: 500, doc_type: "A80" },
    Unit { id: "48W-GB-BIO-1", zone: "GB", psr: "B01", fuel: "Biomass", nominal: 645, doc_type: "A80" },
    Unit { id: "48W-GB-PS-1", zone: "GB", psr: "B10", fuel: "Hydro", nominal: 300, doc_type: "A80" },
    Unit { id: "48W-GB-WIND-1", zone: "GB", psr: "B19", fuel: "", nominal: 400, doc_type: "A80" },
    Unit { id: "17W-FR-NUC-1", zone: "FR", psr: "B14", fuel: "Nuclear", nominal: 900, doc_type: "A80" },
    Unit { id: "17W-FR-NUC-2", zone: "FR", psr: "B14", fuel: "Nuclear", nominal: 1300, doc_type: "A80" },
    Unit { id: "17W-FR-NUC-3", zone: "FR", psr: "B14", fuel: "Nuclear", nominal: 1300, doc_type: "A80" },
    Unit { id: "17W-FR-NUC-4", zone: "FR", psr: "B14", fuel: "Nuclear", nominal: 1450, doc_type: "A80" },
    Unit { id: "17W-FR-CCGT-1", zone: "FR", psr: "B04", fuel: "CCGT", nominal: 430, doc_type: "A80" },
    Unit { id: "17W-FR-OIL-1", zone: "FR", psr: "B06", fuel: "Oil", nominal: 250, doc_type: "A80" },
    Unit { id: "17W-FR-HYD-1", zone: "FR", psr: "B12", fuel: "Hydro", nominal: 500, doc_type: "A80" },
    Unit { id: "17W-FR-COAL-1", zone: "FR", psr: "B05", fuel: "Coal", nominal: 580, doc_type: "A77" },
];

/// One outage document with a single time series.
struct Doc {
    id: String,
    revision: u32,
    unit: &'static Unit,
    business_type: &'static str,
    withdrawn: bool,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    /// (minutes from start, available MW), variable-sized blocks
    points: Vec<(i64, u32)>,
}

fn area(zone: &str) -> &'static str {
    match zone {
        "GB" => "10YGB----------A",
        "FR" => "10YFR-RTE------C",
        _ => unreachable!(),
    }
}

fn xml(doc: &Doc) -> String {
    let u = doc.unit;
    let mut s = String::new();
    let t = |d: DateTime<Utc>| d.format("%Y-%m-%dT%H:%MZ").to_string();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(s, r#"<Unavailability_MarketDocument xmlns="urn:iec62325.351:tc57wg16:451-6:outagedocument:3:0">"#).unwrap();
    writeln!(s, "  <mRID>{}</mRID>", doc.id).unwrap();
    writeln!(s, "  <revisionNumber>{}</revisionNumber>", doc.revision).unwrap();
    writeln!(s, "  <type>{}</type>", u.doc_type).unwrap();
    writeln!(s, "  <process.processType>A26</process.processType>").unwrap();
    writeln!(s, "  <createdDateTime>2021-01-25T09:00:00Z</createdDateTime>").unwrap();
    writeln!(s, "  <TimeSeries>").unwrap();
    writeln!(s, "    <mRID>1</mRID>").unwrap();
    writeln!(s, "    <businessType>{}</businessType>", doc.business_type).unwrap();
    writeln!(s, r#"    <biddingZone_Domain.mRID codingScheme="A01">{}</biddingZone_Domain.mRID>"#, area(u.zone)).unwrap();
    writeln!(s, "    <start_DateAndOrTime.date>{}</start_DateAndOrTime.date>", doc.start.format("%Y-%m-%d")).unwrap();
    writeln!(s, "    <end_DateAndOrTime.date>{}</end_DateAndOrTime.date>", doc.end.format("%Y-%m-%d")).unwrap();
    writeln!(s, "    <quantity_Measure_Unit.name>MAW</quantity_Measure_Unit.name>").unwrap();
    writeln!(s, "    <curveType>A03</curveType>").unwrap();
    // production-unit documents carry the station as the registered resource
    let resource = if u.doc_type == "A77" { format!("{}-STATION", u.id) } else { u.id.to_string() };
    writeln!(s, r#"    <production_RegisteredResource.mRID codingScheme="A01">{resource}</production_RegisteredResource.mRID>"#).unwrap();
    writeln!(s, "    <production_RegisteredResource.name>{} &amp; Co</production_RegisteredResource.name>", u.id).unwrap();
    writeln!(s, "    <production_RegisteredResource.pSRType.psrType>{}</production_RegisteredResource.pSRType.psrType>", u.psr).unwrap();
    writeln!(s, r#"    <production_RegisteredResource.pSRType.powerSystemResources.mRID codingScheme="A01">{}</production_RegisteredResource.pSRType.powerSystemResources.mRID>"#, u.id).unwrap();
    writeln!(s, r#"    <production_RegisteredResource.pSRType.powerSystemResources.nominalP unit="MAW">{}</production_RegisteredResource.pSRType.powerSystemResources.nominalP>"#, u.nominal).unwrap();
    writeln!(s, "    <Available_Period>").unwrap();
    writeln!(s, "      <timeInterval>").unwrap();
    writeln!(s, "        <start>{}</start>", t(doc.start)).unwrap();
    writeln!(s, "        <end>{}</end>", t(doc.end)).unwrap();
    writeln!(s, "      </timeInterval>").unwrap();
    writeln!(s, "      <resolution>PT1M</resolution>").unwrap();
    for (offset, available) in &doc.points {
        writeln!(s, "      <Point>").unwrap();
        writeln!(s, "        <position>{}</position>", offset + 1).unwrap();
        writeln!(s, "        <quantity>{available}</quantity>").unwrap();
        writeln!(s, "      </Point>").unwrap();
    }
    writeln!(s, "    </Available_Period>").unwrap();
    writeln!(s, "  </TimeSeries>").unwrap();
    writeln!(s, "  <Reason>").unwrap();
    writeln!(s, "    <code>B18</code>").unwrap();
    writeln!(s, "  </Reason>").unwrap();
    if doc.withdrawn {
        writeln!(s, "  <docStatus>").unwrap();
        writeln!(s, "    <value>A13</value>").unwrap();
        writeln!(s, "  </docStatus>").unwrap();
    }
    writeln!(s, "</Unavailability_MarketDocument>").unwrap();
    s
}

fn no_data_ack() -> String {
    concat!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
        "<Acknowledgement_MarketDocument xmlns=\"urn:iec62325.351:tc57wg16:451-1:acknowledgementdocument:7:0\">\n",
        "  <mRID>ack</mRID>\n",
        "  <Reason>\n",
        "    <code>999</code>\n",
        "    <text>No matching data found</text>\n",
        "  </Reason>\n",
        "</Acknowledgement_MarketDocument>\n"
    )
    .to_string()
}

fn unit(id: &str) -> &'static Unit {
    UNITS.iter().find(|u| u.id.ends_with(id)).expect("known unit")
}

fn random_docs(first: DateTime<Utc>, last: DateTime<Utc>) -> Vec<Doc> {
    let mut docs = Vec::new();
    for (k, u) in UNITS.iter().enumerate() {
        let mut rng = rng_for(SEED, &[k as u64]);
        let n = rng.random_range(1..=3);
        for j in 0..n {
            let span = (last - first).num_minutes();
            let start = first - TimeDelta::days(2) + TimeDelta::minutes(rng.random_range(0..span + 2 * 1440));
            let duration = TimeDelta::minutes(rng.random_range(90..5 * 1440));
            let forced = rng.random_bool(0.4);
            let mut points = vec![(0, if rng.random_bool(0.5) { 0 } else { u.nominal / 2 })];
            if rng.random_bool(0.3) {
                // a second block with a different available capacity
                let at = rng.random_range(30..duration.num_minutes());
                points.push((at, u.nominal / 4));
            }
            docs.push(Doc {
                id: format!("{}-{:02}", u.id, j),
                revision: 1,
                unit: u,
                business_type: if forced { "A54" } else { "A53" },
                withdrawn: false,
                start,
                end: start + duration,
                points,
            });
        }
    }
    docs
}

fn special_docs() -> Vec<Doc> {
    let t = |s: &str| parse_utc(s).unwrap();
    vec![
        // forced and planned reports for the same unit and time: the total
        // channel reconciles them instead of adding
        Doc {
            id: "GB-CONFLICT-F".into(),
            revision: 1,
            unit: unit("GB-CCGT-2"),
            business_type: "A54",
            withdrawn: false,
            start: t("2021-02-03T06:00Z"),
            end: t("2021-02-04T18:00Z"),
            points: vec![(0, 0)],
        },
        Doc {
            id: "GB-CONFLICT-P".into(),
            revision: 1,
            unit: unit("GB-CCGT-2"),
            business_type: "A53",
            withdrawn: false,
            start: t("2021-02-03T00:00Z"),
            end: t("2021-02-05T00:00Z"),
            points: vec![(0, 450)],
        },
        // a report whose second revision shortens it
        Doc {
            id: "FR-REVISED".into(),
            revision: 1,
            unit: unit("FR-NUC-2"),
            business_type: "A53",
            withdrawn: false,
            start: t("2021-02-08T00:00Z"),
            end: t("2021-02-11T00:00Z"),
            points: vec![(0, 0)],
        },
        Doc {
            id: "FR-REVISED".into(),
            revision: 2,
            unit: unit("FR-NUC-2"),
            business_type: "A53",
            withdrawn: false,
            start: t("2021-02-08T00:00Z"),
            end: t("2021-02-09T07:30Z"),
            points: vec![(0, 0)],
        },
        // withdrawn after publication
        Doc {
            id: "GB-WITHDRAWN".into(),
            revision: 2,
            unit: unit("GB-COAL-1"),
            business_type: "A54",
            withdrawn: true,
            start: t("2021-02-10T12:00Z"),
            end: t("2021-02-12T12:00Z"),
            points: vec![(0, 0)],
        },
        // the registry says this unit is far smaller than reported
        Doc {
            id: "GB-OVERSIZE".into(),
            revision: 1,
            unit: unit("GB-BIO-1"),
            business_type: "A54",
            withdrawn: false,
            start: t("2021-02-06T00:00Z"),
            end: t("2021-02-07T00:00Z"),
            points: vec![(0, 0)],
        },
        // not an outage business type
        Doc {
            id: "FR-ODD-TYPE".into(),
            revision: 1,
            unit: unit("FR-HYD-1"),
            business_type: "A95",
            withdrawn: false,
            start: t("2021-02-02T00:00Z"),
            end: t("2021-02-03T00:00Z"),
            points: vec![(0, 0)],
        },
    ]
}

fn write(path: &Path, text: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}

fn main() {
    let root: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "corpus".into()).into();
    let first_day = NaiveDate::from_ymd_opt(2021, 2, 1).unwrap();
    let n_days = 14;
    let first = midnight(first_day);
    let last = first + TimeDelta::days(n_days);

    let mut docs = random_docs(first, last);
    docs.extend(special_docs());
    docs.sort_by(|a, b| (&a.id, a.revision).cmp(&(&b.id, b.revision)));

    let cache = Cache::new(root.join("cache"));
    let fetched_at = parse_utc("2021-03-01T00:00Z").unwrap();
    let mut n_payloads = 0;
    for zone in ["GB", "FR"] {
        for doc_type in ["A80", "A77"] {
            for d in 0..n_days {
                let day = first_day + TimeDelta::days(d);
                let (from, to) = (midnight(day), midnight(day) + TimeDelta::days(1));
                let mut payload = String::new();
                for doc in docs.iter().filter(|x| {
                    x.unit.zone == zone && x.unit.doc_type == doc_type && x.start < to && x.end > from
                }) {
                    payload.push_str(&xml(doc));
                }
                if payload.is_empty() {
                    payload = no_data_ack();
                }
                let path = cache.payload_path(zone, doc_type, day);
                if path.exists() {
                    fs::remove_file(&path).unwrap();
                    fs::remove_file(path.with_extension("json")).unwrap();
                }
                cache.put(zone, doc_type, day, payload.into_bytes(), fetched_at).unwrap();
                n_payloads += 1;
            }
        }
    }

    let mut sizes = String::from("zone,fuel,capacity_mw\n");
    for u in UNITS.iter().filter(|u| !u.fuel.is_empty()) {
        writeln!(sizes, "{},{},{}", u.zone, u.fuel, u.nominal).unwrap();
    }
    // fuels with installed capacity but no corpus unit still need sizes
    for (fuel, mw) in [("CHP", 120), ("CHP", 250), ("Waste", 40), ("Waste", 75), ("Oil", 100), ("Biomass", 40)] {
        writeln!(sizes, "XX,{fuel},{mw}").unwrap();
    }
    write(&root.join("unit_sizes.csv"), &sizes);

    write(
        &root.join("installed_capacity.csv"),
        "zone,fuel,capacity_mw\n\
         GB,Nuclear,8200\nGB,CCGT,28000\nGB,Coal,1800\nGB,Biomass,3100\nGB,Hydro,2700\nGB,CHP,1500\nGB,Waste,900\nGB,Oil,300\n\
         FR,Nuclear,61400\nFR,CCGT,6300\nFR,Coal,1800\nFR,Oil,3400\nFR,Hydro,13000\nFR,Waste,800\nFR,Biomass,1000\n",
    );
    write(&root.join("nominal_registry.csv"), "unit_id,nominal_mw\n48W-GB-BIO-1,300\n48W-GB-NUC-1,660\n");
    write(
        &root.join("config.toml"),
        &format!(
            "# Synthetic two-zone, two-week corpus. Every day is already cached,\n\
             # so no token or network access is needed.\n\
             zones = [\"GB\", \"FR\"]\n\
             cache_dir = \"cache\"\n\
             output_dir = \"out\"\n\
             seed = 7\n\
             unit_sizes_path = \"unit_sizes.csv\"\n\
             installed_capacity_path = \"installed_capacity.csv\"\n\
             nominal_registry_path = \"nominal_registry.csv\"\n\
             document_types = [\"A80\", \"A77\"]\n\
             n_draws = 3\n\
             histogram_bin_mw = 1000\n\
             \n\
             [period]\n\
             label = \"feb21\"\n\
             start = \"{}\"\n\
             end = \"{}\"\n",
            first_day,
            first_day + TimeDelta::days(n_days)
        ),
    );
    println!(
        "wrote {} documents in {n_payloads} cached days under {} ({} to {})",
        docs.len(),
        root.display(),
        format_utc(first),
        format_utc(last)
    );
}
