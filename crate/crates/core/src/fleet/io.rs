//! CSV formats for unit registries, fleets and outage PMFs.
//!
//! Registries, installed-capacity targets and fleets share one row layout,
//! `zone,fuel,capacity_mw[,availability,mttr_hours]`. PMFs are written as
//! `outage_mw,probability`, one row per 1 MW bin.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CapacityOutagePmf, Fleet, Fuel, GeneratorUnit, ParamTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRow {
    pub zone: String,
    pub fuel: String,
    pub capacity_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub availability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mttr_hours: Option<f64>,
}

pub fn read_unit_rows<R: Read>(reader: R) -> Result<Vec<UnitRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for row in rdr.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

fn whole_mw(zone: &str, fuel: Fuel, mw: f64) -> Result<u32> {
    let rounded = mw.round();
    if !(rounded >= 1.0 && rounded <= f64::from(u32::MAX)) {
        return Err(Error::invalid(format!(
            "{zone} {fuel}: capacity {mw} MW does not round to a positive whole MW"
        )));
    }
    Ok(rounded as u32)
}

/// `(fuel, capacity)` pairs of every registry row, capacities rounded to whole MW.
pub fn registry_sizes(rows: &[UnitRow]) -> Result<Vec<(Fuel, u32)>> {
    rows.iter()
        .map(|r| {
            let fuel: Fuel = r.fuel.parse()?;
            Ok((fuel, whole_mw(&r.zone, fuel, r.capacity_mw)?))
        })
        .collect()
}

/// Installed capacity per zone and fuel, summed over rows and rounded to whole MW.
pub fn capacity_targets(rows: &[UnitRow]) -> Result<BTreeMap<String, BTreeMap<Fuel, u32>>> {
    let mut sums: BTreeMap<String, BTreeMap<Fuel, f64>> = BTreeMap::new();
    for r in rows {
        let fuel: Fuel = r.fuel.parse()?;
        if !(r.capacity_mw >= 0.0 && r.capacity_mw.is_finite()) {
            return Err(Error::invalid(format!(
                "{} {fuel}: negative installed capacity",
                r.zone
            )));
        }
        *sums.entry(r.zone.clone()).or_default().entry(fuel).or_insert(0.0) += r.capacity_mw;
    }
    Ok(sums
        .into_iter()
        .map(|(zone, fuels)| {
            let fuels = fuels
                .into_iter()
                .map(|(f, mw)| (f, mw.round() as u32))
                .collect();
            (zone, fuels)
        })
        .collect())
}

pub fn write_fleet<W: Write>(writer: W, fleet: &Fleet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["zone", "fuel", "capacity_mw", "availability", "mttr_hours"])?;
    for u in &fleet.units {
        w.write_record([
            fleet.zone.clone(),
            u.fuel().to_string(),
            u.capacity_mw().to_string(),
            u.availability().to_string(),
            u.mttr_hours().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads fleets grouped by zone. Rows without availability or MTTR take the
/// values of `params` for their fuel.
pub fn read_fleets<R: Read>(reader: R, params: &ParamTable) -> Result<Vec<Fleet>> {
    let mut by_zone: BTreeMap<String, Vec<GeneratorUnit>> = BTreeMap::new();
    for r in read_unit_rows(reader)? {
        let fuel: Fuel = r.fuel.parse()?;
        let p = params.get(fuel);
        let units = by_zone.entry(r.zone.clone()).or_default();
        let id = format!("{}-{fuel}-{:03}", r.zone, units.len() + 1);
        units.push(GeneratorUnit::new(
            id,
            fuel,
            whole_mw(&r.zone, fuel, r.capacity_mw)?,
            r.availability.unwrap_or(p.availability),
            r.mttr_hours.unwrap_or(p.mttr_hours),
        )?);
    }
    Ok(by_zone
        .into_iter()
        .map(|(zone, units)| Fleet { zone, units })
        .collect())
}

pub fn write_pmf<W: Write>(writer: W, pmf: &CapacityOutagePmf) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["outage_mw", "probability"])?;
    for (mw, p) in pmf.probabilities().iter().enumerate() {
        w.write_record([mw.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pmf<R: Read>(reader: R) -> Result<CapacityOutagePmf> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut prob = Vec::new();
    for (i, row) in rdr.deserialize::<(usize, f64)>().enumerate() {
        let (mw, p) = row?;
        if mw != i {
            return Err(Error::parse(
                format!("PMF row {}", i + 2),
                format!("expected outage_mw {i}, found {mw}"),
            ));
        }
        prob.push(p);
    }
    CapacityOutagePmf::new(prob)
}
