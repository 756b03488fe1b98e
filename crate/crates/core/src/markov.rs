//! Two-state (up/down) Markov simulation of unit and fleet outages.
//!
//! Time is discretized to hours and the per-hour transition probabilities
//! are taken equal to the repair and failure rates, `mu = 1/MTTR` and
//! `lambda = mu (1/A - 1)`, clamped to `[0, 1]`. Chains start from their
//! stationary distribution, so no burn-in is needed.

use std::io::{Read, Write};

use chrono::{DateTime, TimeDelta, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fleet::{Fleet, GeneratorUnit};
use crate::seed;
use crate::timefmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionRates {
    mu: f64,
    lambda: f64,
}

impl TransitionRates {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::invalid(format!("repair rate {mu} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("failure rate {lambda} outside [0, 1]")));
        }
        Ok(Self { mu, lambda })
    }

    /// Per-hour probability of leaving the down state.
    pub fn repair_rate(&self) -> f64 {
        self.mu
    }

    /// Per-hour probability of leaving the up state.
    pub fn failure_rate(&self) -> f64 {
        self.lambda
    }

    /// Long-run probability of being up, `mu / (mu + lambda)`.
    pub fn stationary_availability(&self) -> f64 {
        self.mu / (self.mu + self.lambda)
    }
}

pub fn transition_rates(availability: f64, mttr_hours: f64) -> Result<TransitionRates> {
    if !(availability > 0.0 && availability <= 1.0) {
        return Err(Error::invalid(format!(
            "availability {availability} outside (0, 1]; the failure rate diverges at 0"
        )));
    }
    if !(mttr_hours > 0.0) {
        return Err(Error::invalid(format!("MTTR {mttr_hours} must be positive")));
    }
    // repair takes at least one step
    let steps = mttr_hours.max(1.0);
    let mu = 1.0 / steps;
    // mu * (1/A - 1) with fewer roundings
    let lambda = ((1.0 - availability) / (availability * steps)).min(1.0);
    TransitionRates::new(mu, lambda)
}

/// Exact autocorrelation of the stationary chain at `lag_hours`: `(1 - lambda - mu)^lag`.
pub fn theoretical_unit_acf(rates: TransitionRates, lag_hours: u32) -> Result<f64> {
    let s = rates.mu + rates.lambda;
    if s <= 0.0 {
        return Err(Error::invalid("constant chain (mu + lambda = 0) has no autocorrelation"));
    }
    Ok((1.0 - s).powi(lag_hours as i32))
}

/// Hourly MW on outage starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageTimeSeries {
    start: DateTime<Utc>,
    values_mw: Vec<f64>,
}

impl OutageTimeSeries {
    pub fn new(start: DateTime<Utc>, values_mw: Vec<f64>) -> Result<Self> {
        if !timefmt::is_hour_aligned(start) {
            return Err(Error::invalid(format!("series start {start} is not on the hour")));
        }
        if let Some(v) = values_mw.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("negative or non-finite outage value {v}")));
        }
        Ok(Self { start, values_mw })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn values_mw(&self) -> &[f64] {
        &self.values_mw
    }

    pub fn len(&self) -> usize {
        self.values_mw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_mw.is_empty()
    }

    pub fn timestamp(&self, i: usize) -> DateTime<Utc> {
        self.start + TimeDelta::hours(i as i64)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["timestamp_utc", "outage_mw"])?;
        for (i, v) in self.values_mw.iter().enumerate() {
            w.write_record([timefmt::format_utc(self.timestamp(i)), format!("{v:.3}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut start = None;
        let mut values = Vec::new();
        for (i, row) in rdr.deserialize::<(String, f64)>().enumerate() {
            let (ts, v) = row?;
            let t = timefmt::parse_utc(&ts)?;
            let t0 = *start.get_or_insert(t);
            if t != t0 + TimeDelta::hours(i as i64) {
                return Err(Error::parse(format!("row {}", i + 2), "timestamps are not hourly"));
            }
            values.push(v);
        }
        let start = start.ok_or_else(|| Error::parse("row 2", "empty time series"))?;
        Self::new(start, values)
    }
}

/// Down flags for a stationary two-state chain; one uniform draw per hour.
fn simulate_states(rates: TransitionRates, availability: f64, n_hours: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut down = rng.random::<f64>() >= availability;
    let mut out = Vec::with_capacity(n_hours);
    for _ in 0..n_hours {
        out.push(down);
        let u: f64 = rng.random();
        let p = if down { rates.mu } else { rates.lambda };
        if u < p {
            down = !down;
        }
    }
    out
}

fn unit_states(unit: &GeneratorUnit, n_hours: usize, seed: u64) -> Result<Vec<bool>> {
    let rates = transition_rates(unit.availability(), unit.mttr_hours())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(simulate_states(rates, unit.availability(), n_hours, &mut rng))
}

pub fn simulate_unit(
    unit: &GeneratorUnit,
    start: DateTime<Utc>,
    n_hours: usize,
    seed: u64,
) -> Result<OutageTimeSeries> {
    if n_hours == 0 {
        return Err(Error::invalid("simulation needs at least one hour"));
    }
    let cap = f64::from(unit.capacity_mw());
    let values = unit_states(unit, n_hours, seed)?
        .into_iter()
        .map(|d| if d { cap } else { 0.0 })
        .collect();
    OutageTimeSeries::new(start, values)
}

/// Seed of unit `index` inside [`simulate_fleet`].
pub fn unit_seed(seed: u64, index: usize) -> u64 {
    seed::derive_seed(seed, &[index as u64])
}

/// Independent unit chains summed hour by hour.
///
/// Units run in parallel; the sum is accumulated in whole MW, so the result
/// does not depend on the thread count.
pub fn simulate_fleet(
    fleet: &Fleet,
    start: DateTime<Utc>,
    n_hours: usize,
    seed: u64,
) -> Result<OutageTimeSeries> {
    if fleet.units.is_empty() {
        return Err(Error::invalid(format!("fleet {} has no units", fleet.zone)));
    }
    if n_hours == 0 {
        return Err(Error::invalid("simulation needs at least one hour"));
    }
    let states: Vec<Vec<bool>> = fleet
        .units
        .par_iter()
        .enumerate()
        .map(|(i, u)| unit_states(u, n_hours, unit_seed(seed, i)))
        .collect::<Result<_>>()?;
    let mut total = vec![0u64; n_hours];
    for (unit, s) in fleet.units.iter().zip(&states) {
        let cap = u64::from(unit.capacity_mw());
        for (acc, &down) in total.iter_mut().zip(s) {
            if down {
                *acc += cap;
            }
        }
    }
    OutageTimeSeries::new(start, total.into_iter().map(|mw| mw as f64).collect())
}

/// Sidecar describing how a simulated series was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationMetadata {
    pub zone: String,
    pub label: String,
    pub seed: u64,
    pub rng: String,
    pub start_utc: String,
    pub n_hours: usize,
    pub n_units: usize,
    pub total_capacity_mw: u64,
    pub params_version: String,
    pub fuel_params: Vec<FuelRates>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuelRates {
    pub fuel: String,
    pub availability: f64,
    pub mttr_hours: f64,
    pub repair_rate: f64,
    pub failure_rate: f64,
}

impl SimulationMetadata {
    pub fn describe(
        fleet: &Fleet,
        label: &str,
        seed: u64,
        start: DateTime<Utc>,
        n_hours: usize,
        params_version: &str,
    ) -> Result<Self> {
        let mut fuel_params: Vec<FuelRates> = Vec::new();
        let mut seen = std::collections::BTreeMap::new();
        for u in &fleet.units {
            let key = (u.fuel(), u.availability().to_bits(), u.mttr_hours().to_bits());
            if seen.insert(key, ()).is_none() {
                let r = transition_rates(u.availability(), u.mttr_hours())?;
                fuel_params.push(FuelRates {
                    fuel: u.fuel().to_string(),
                    availability: u.availability(),
                    mttr_hours: u.mttr_hours(),
                    repair_rate: r.repair_rate(),
                    failure_rate: r.failure_rate(),
                });
            }
        }
        fuel_params.sort_by(|a, b| a.fuel.cmp(&b.fuel).then(a.availability.total_cmp(&b.availability)));
        Ok(Self {
            zone: fleet.zone.clone(),
            label: label.to_string(),
            seed,
            rng: seed::RNG_NAME.to_string(),
            start_utc: timefmt::format_utc(start),
            n_hours,
            n_units: fleet.units.len(),
            total_capacity_mw: fleet.total_capacity_mw(),
            params_version: params_version.to_string(),
            fuel_params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::Fuel;
    use chrono::TimeZone;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2016, 11, 6, 0, 0, 0).unwrap()
    }

    fn unit(cap: u32, a: f64, mttr: f64) -> GeneratorUnit {
        GeneratorUnit::new("u", Fuel::Ccgt, cap, a, mttr).unwrap()
    }

    #[test]
    fn rates_examples() {
        let r = transition_rates(0.9, 50.0).unwrap();
        assert_eq!(r.repair_rate(), 0.02);
        assert!((r.failure_rate() - 1.0 / 450.0).abs() <= 4.0 * f64::EPSILON / 450.0);

        let r = transition_rates(1.0, 20.0).unwrap();
        assert_eq!(r.repair_rate(), 0.05);
        assert_eq!(r.failure_rate(), 0.0);

        let r = transition_rates(0.81, 150.0).unwrap();
        assert!((r.repair_rate() - 0.0066667).abs() < 1e-7);
        assert!((r.failure_rate() - 0.0015638).abs() < 1e-7);
    }

    #[test]
    fn rates_reject_zero_availability_and_clamp() {
        assert!(matches!(transition_rates(0.0, 10.0), Err(Error::InvalidInput(_))));
        let r = transition_rates(0.1, 0.5).unwrap();
        assert_eq!(r.repair_rate(), 1.0);
        assert_eq!(r.failure_rate(), 1.0);
    }

    #[test]
    fn acf_examples() {
        let r = transition_rates(0.9, 50.0).unwrap();
        assert_eq!(theoretical_unit_acf(r, 0).unwrap(), 1.0);
        assert!((theoretical_unit_acf(r, 1).unwrap() - 0.9777778).abs() < 1e-7);
        let alt = TransitionRates::new(1.0, 1.0).unwrap();
        assert_eq!(theoretical_unit_acf(alt, 1).unwrap(), -1.0);
        assert_eq!(theoretical_unit_acf(alt, 2).unwrap(), 1.0);
    }

    #[test]
    fn perfectly_available_unit_never_fails() {
        let s = simulate_unit(&unit(500, 1.0, 20.0), t0(), 10_000, 3).unwrap();
        assert!(s.values_mw().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_rates_of_one_alternate() {
        let s = simulate_unit(&unit(100, 0.5, 1.0), t0(), 1000, 11).unwrap();
        for w in s.values_mw().windows(2) {
            assert_ne!(w[0], w[1]);
            assert!(w[0] == 0.0 || w[0] == 100.0);
        }
    }

    #[test]
    fn simulation_is_seed_deterministic() {
        let u = unit(300, 0.86, 40.0);
        let a = simulate_unit(&u, t0(), 5000, 42).unwrap();
        let b = simulate_unit(&u, t0(), 5000, 42).unwrap();
        let c = simulate_unit(&u, t0(), 5000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fleet_is_sum_of_unit_streams() {
        let fleet = Fleet {
            zone: "T".into(),
            units: vec![unit(300, 0.86, 40.0), unit(700, 0.81, 150.0), unit(50, 0.9, 20.0)],
        };
        let total = simulate_fleet(&fleet, t0(), 2000, 9).unwrap();
        let mut sum = vec![0.0; 2000];
        for (i, u) in fleet.units.iter().enumerate() {
            let s = simulate_unit(u, t0(), 2000, unit_seed(9, i)).unwrap();
            for (a, v) in sum.iter_mut().zip(s.values_mw()) {
                *a += v;
            }
        }
        assert_eq!(total.values_mw(), sum.as_slice());

        let single = Fleet { zone: "T".into(), units: vec![fleet.units[1].clone()] };
        assert_eq!(
            simulate_fleet(&single, t0(), 100, 5).unwrap(),
            simulate_unit(&single.units[0], t0(), 100, unit_seed(5, 0)).unwrap()
        );
    }

    #[test]
    fn fleet_simulation_is_thread_count_independent() {
        let fleet = Fleet {
            zone: "T".into(),
            units: (0..16).map(|i| unit(100 + i, 0.86, 40.0)).collect(),
        };
        let a = simulate_fleet(&fleet, t0(), 3000, 1).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_fleet(&fleet, t0(), 3000, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_fleet_and_zero_hours_rejected() {
        let empty = Fleet { zone: "T".into(), units: vec![] };
        assert!(simulate_fleet(&empty, t0(), 10, 0).is_err());
        assert!(simulate_unit(&unit(1, 0.9, 1.0), t0(), 0, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = simulate_unit(&unit(120, 0.7, 5.0), t0(), 48, 1).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("timestamp_utc,outage_mw\n2016-11-06T00:00:00Z,"));
        assert_eq!(OutageTimeSeries::read_csv(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn metadata_lists_fuel_rates_once() {
        let fleet = Fleet {
            zone: "GB".into(),
            units: vec![unit(300, 0.9, 50.0), unit(400, 0.9, 50.0)],
        };
        let m = SimulationMetadata::describe(&fleet, "16/17", 3, t0(), 10, "builtin-v1").unwrap();
        assert_eq!(m.fuel_params.len(), 1);
        assert_eq!(m.fuel_params[0].repair_rate, 0.02);
        assert_eq!(m.total_capacity_mw, 700);
        assert!(m.rng.starts_with("ChaCha8Rng"));
    }
}
