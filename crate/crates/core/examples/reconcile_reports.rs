//! Turn overlapping, partly conflicting outage reports into hourly
//! min/mean/max series per unit and per zone.
//!
//! ```text
//! cargo run --example reconcile_reports
//! ```

use chrono::{DateTime, Utc};
use gen_outage::ingest::{unit_series, zone_series, write_zone_csv, Period, ReportFuel, ReportStatus};
use gen_outage::timefmt::parse_utc;
use gen_outage::{reconciliation_error, Fuel, OutageKind, OutageReport};

fn t(s: &str) -> DateTime<Utc> {
    parse_utc(s).expect("valid timestamp")
}

fn report(id: &str, unit: &str, kind: OutageKind, from: &str, to: &str, mw: f64) -> OutageReport {
    OutageReport {
        report_id: id.into(),
        revision: 1,
        unit_id: unit.into(),
        zone: "GB".into(),
        fuel: ReportFuel::Dispatchable(Fuel::Ccgt),
        nominal_mw: 600.0,
        start: t(from),
        end: t(to),
        unavailable_mw: mw,
        kind,
        status: ReportStatus::Active,
    }
}

fn main() -> gen_outage::Result<()> {
    use OutageKind::{Forced, Planned};
    let reports = vec![
        // two forced reports disagree during the first half hour
        report("R1", "U1", Forced, "2021-02-01T00:00Z", "2021-02-01T02:00Z", 200.0),
        report("R2", "U1", Forced, "2021-02-01T00:00Z", "2021-02-01T00:30Z", 400.0),
        // planned and forced reports for the same unit overlap
        report("R3", "U1", Planned, "2021-02-01T01:00Z", "2021-02-01T04:00Z", 600.0),
        report("R4", "U2", Forced, "2021-02-01T02:15Z", "2021-02-01T03:45Z", 300.0),
    ];
    let period = Period::new(t("2021-02-01T00:00Z"), 5)?;
    let units: Vec<_> = ["U1", "U2"].iter().map(|u| unit_series(u, &reports, period)).collect();
    let zone = zone_series("GB", &units, period)?;

    let mut out = Vec::new();
    write_zone_csv(&mut out, &zone)?;
    print!("{}", String::from_utf8_lossy(&out));

    for s in [&zone.forced, &zone.planned, &zone.total] {
        match reconciliation_error(s) {
            Ok(e) => println!("{:<8} reconciliation error {e:.4}", s.channel()),
            Err(e) => println!("{:<8} {e}", s.channel()),
        }
    }
    Ok(())
}
