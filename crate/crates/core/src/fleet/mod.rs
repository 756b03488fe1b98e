//! Representative generator fleets and the time-collapsed outage model.
//!
//! A fleet is synthesized per zone from installed capacity targets and a
//! pooled empirical distribution of unit sizes. Each unit is an independent
//! two-point outage variable (0 MW with probability `A`, its full capacity
//! otherwise), so the fleet's capacity-outage distribution is the discrete
//! convolution of the unit distributions on a 1 MW grid; see [`pmf`].

pub mod io;
mod params;
pub mod pmf;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub use params::{FuelParams, ParamTable, BUILTIN_PARAMS_VERSION};
pub use pmf::{fleet_outage_pmf, pmf_stats, unit_outage_pmf, CapacityOutagePmf, PmfStats};

/// Dispatchable fuel classes with default reliability parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Fuel {
    Biomass,
    Coal,
    #[serde(rename = "CCGT")]
    Ccgt,
    Oil,
    Hydro,
    Nuclear,
    #[serde(rename = "CHP")]
    Chp,
    Waste,
}

impl Fuel {
    pub const ALL: [Fuel; 8] = [
        Fuel::Biomass,
        Fuel::Coal,
        Fuel::Ccgt,
        Fuel::Oil,
        Fuel::Hydro,
        Fuel::Nuclear,
        Fuel::Chp,
        Fuel::Waste,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fuel::Biomass => "Biomass",
            Fuel::Coal => "Coal",
            Fuel::Ccgt => "CCGT",
            Fuel::Oil => "Oil",
            Fuel::Hydro => "Hydro",
            Fuel::Nuclear => "Nuclear",
            Fuel::Chp => "CHP",
            Fuel::Waste => "Waste",
        }
    }

    fn index(self) -> u64 {
        Fuel::ALL.iter().position(|&f| f == self).unwrap() as u64
    }
}

impl fmt::Display for Fuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fuel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Fuel::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownFuel(s.to_string()))
    }
}

/// A dispatchable unit with a two-state outage model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorUnit {
    id: String,
    fuel: Fuel,
    capacity_mw: u32,
    availability: f64,
    mttr_hours: f64,
}

impl GeneratorUnit {
    pub fn new(
        id: impl Into<String>,
        fuel: Fuel,
        capacity_mw: u32,
        availability: f64,
        mttr_hours: f64,
    ) -> Result<Self> {
        let id = id.into();
        if capacity_mw < 1 {
            return Err(Error::invalid(format!("unit {id}: capacity must be at least 1 MW")));
        }
        if !(availability > 0.0 && availability <= 1.0) {
            return Err(Error::invalid(format!(
                "unit {id}: availability {availability} outside (0, 1]"
            )));
        }
        if !(mttr_hours > 0.0 && mttr_hours.is_finite()) {
            return Err(Error::invalid(format!(
                "unit {id}: MTTR {mttr_hours} must be a positive number of hours"
            )));
        }
        Ok(Self {
            id,
            fuel,
            capacity_mw,
            availability,
            mttr_hours,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn fuel(&self) -> Fuel {
        self.fuel
    }

    pub fn capacity_mw(&self) -> u32 {
        self.capacity_mw
    }

    pub fn availability(&self) -> f64 {
        self.availability
    }

    pub fn mttr_hours(&self) -> f64 {
        self.mttr_hours
    }

    /// Expected MW on outage, `capacity * (1 - A)`.
    pub fn expected_outage_mw(&self) -> f64 {
        f64::from(self.capacity_mw) * (1.0 - self.availability)
    }
}

/// Frequency-weighted pool of observed unit sizes for one fuel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuelSizePool {
    fuel: Fuel,
    sizes_mw: Vec<u32>,
}

impl FuelSizePool {
    pub fn new(fuel: Fuel, sizes_mw: Vec<u32>) -> Result<Self> {
        if sizes_mw.is_empty() {
            return Err(Error::invalid(format!("empty size pool for {fuel}")));
        }
        if sizes_mw.contains(&0) {
            return Err(Error::invalid(format!("zero-MW unit in the {fuel} pool")));
        }
        Ok(Self { fuel, sizes_mw })
    }

    pub fn fuel(&self) -> Fuel {
        self.fuel
    }

    pub fn sizes_mw(&self) -> &[u32] {
        &self.sizes_mw
    }
}

/// A zone's representative fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    pub zone: String,
    pub units: Vec<GeneratorUnit>,
}

impl Fleet {
    pub fn total_capacity_mw(&self) -> u64 {
        self.units.iter().map(|u| u64::from(u.capacity_mw)).sum()
    }

    pub fn capacity_by_fuel(&self) -> BTreeMap<Fuel, u64> {
        let mut out = BTreeMap::new();
        for u in &self.units {
            *out.entry(u.fuel).or_insert(0) += u64::from(u.capacity_mw);
        }
        out
    }

    /// `sum_i capacity_i * (1 - A_i)`.
    pub fn expected_outage_mw(&self) -> f64 {
        self.units.iter().map(GeneratorUnit::expected_outage_mw).sum()
    }
}

/// Pools registry unit sizes by fuel, keeping duplicates.
pub fn pool_unit_sizes(registry: &[(Fuel, u32)]) -> Result<BTreeMap<Fuel, FuelSizePool>> {
    if registry.is_empty() {
        return Err(Error::invalid("unit registry is empty"));
    }
    let mut sizes: BTreeMap<Fuel, Vec<u32>> = BTreeMap::new();
    for &(fuel, mw) in registry {
        if mw == 0 {
            return Err(Error::invalid(format!("registry has a zero-MW {fuel} unit")));
        }
        sizes.entry(fuel).or_default().push(mw);
    }
    sizes
        .into_iter()
        .map(|(fuel, s)| FuelSizePool::new(fuel, s).map(|p| (fuel, p)))
        .collect()
}

/// Builds a fleet whose per-fuel capacity equals `targets_mw` exactly.
///
/// For each fuel, sizes are drawn uniformly with replacement from its pool
/// until the running total reaches the target; the last unit is cut down so
/// the total matches. Each fuel draws from its own stream derived from
/// `(seed, fuel)`.
pub fn synthesize_fleet(
    zone: &str,
    targets_mw: &BTreeMap<Fuel, u32>,
    pools: &BTreeMap<Fuel, FuelSizePool>,
    params: &ParamTable,
    seed: u64,
) -> Result<Fleet> {
    let mut units = Vec::new();
    for (&fuel, &target) in targets_mw {
        if target == 0 {
            continue;
        }
        let pool = pools.get(&fuel).ok_or(Error::MissingPool(fuel))?;
        let p = params.get(fuel);
        let mut rng = seed::rng_for(seed, &[fuel.index()]);
        let mut total = 0u32;
        let mut n = 0usize;
        while total < target {
            let size = pool.sizes_mw[rng.random_range(0..pool.sizes_mw.len())];
            let size = size.min(target - total);
            n += 1;
            units.push(GeneratorUnit::new(
                format!("{zone}-{fuel}-{n:03}"),
                fuel,
                size,
                p.availability,
                p.mttr_hours,
            )?);
            total += size;
        }
    }
    Ok(Fleet {
        zone: zone.to_string(),
        units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nuclear_pool() -> BTreeMap<Fuel, FuelSizePool> {
        pool_unit_sizes(&[(Fuel::Nuclear, 1000), (Fuel::Nuclear, 2000)]).unwrap()
    }

    #[test]
    fn fuel_names_round_trip() {
        for f in Fuel::ALL {
            assert_eq!(f.name().parse::<Fuel>().unwrap(), f);
            assert_eq!(f.name().to_lowercase().parse::<Fuel>().unwrap(), f);
        }
        assert!(matches!("Solar".parse::<Fuel>(), Err(Error::UnknownFuel(_))));
    }

    #[test]
    fn unit_invariants() {
        assert!(GeneratorUnit::new("u", Fuel::Coal, 0, 0.9, 10.0).is_err());
        assert!(GeneratorUnit::new("u", Fuel::Coal, 10, 0.0, 10.0).is_err());
        assert!(GeneratorUnit::new("u", Fuel::Coal, 10, 1.01, 10.0).is_err());
        assert!(GeneratorUnit::new("u", Fuel::Coal, 10, 1.0, 0.0).is_err());
        assert!(GeneratorUnit::new("u", Fuel::Coal, 10, 1.0, 1.0).is_ok());
    }

    #[test]
    fn pooling_keeps_duplicates() {
        let pools = nuclear_pool();
        assert_eq!(pools.len(), 1);
        assert_eq!(pools[&Fuel::Nuclear].sizes_mw(), &[1000, 2000]);

        let pools = pool_unit_sizes(&[(Fuel::Ccgt, 400)]).unwrap();
        assert_eq!(pools[&Fuel::Ccgt].sizes_mw(), &[400]);

        let pools =
            pool_unit_sizes(&[(Fuel::Coal, 500), (Fuel::Coal, 500), (Fuel::Ccgt, 400)]).unwrap();
        assert_eq!(pools[&Fuel::Coal].sizes_mw(), &[500, 500]);
        assert_eq!(pools[&Fuel::Ccgt].sizes_mw(), &[400]);
        assert!(!pools.contains_key(&Fuel::Nuclear));
    }

    #[test]
    fn pooling_rejects_empty_registry() {
        assert!(matches!(pool_unit_sizes(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_size_pool_forces_composition() {
        let pools = pool_unit_sizes(&[(Fuel::Ccgt, 400)]).unwrap();
        let targets = BTreeMap::from([(Fuel::Ccgt, 400)]);
        let fleet = synthesize_fleet("GB", &targets, &pools, &ParamTable::default(), 7).unwrap();
        assert_eq!(fleet.units.len(), 1);
        assert_eq!(fleet.units[0].capacity_mw(), 400);
        assert_eq!(fleet.units[0].availability(), 0.90);
        assert_eq!(fleet.units[0].mttr_hours(), 50.0);
    }

    #[test]
    fn last_unit_is_truncated() {
        let pools = pool_unit_sizes(&[(Fuel::Coal, 500)]).unwrap();
        let targets = BTreeMap::from([(Fuel::Coal, 700)]);
        let fleet = synthesize_fleet("GB", &targets, &pools, &ParamTable::default(), 1).unwrap();
        let sizes: Vec<u32> = fleet.units.iter().map(|u| u.capacity_mw()).collect();
        assert_eq!(sizes, vec![500, 200]);
    }

    #[test]
    fn nuclear_example_composition_is_reachable() {
        let pools = nuclear_pool();
        let targets = BTreeMap::from([(Fuel::Nuclear, 10_000)]);
        let mut found = false;
        for seed in 0..200 {
            let fleet =
                synthesize_fleet("UK", &targets, &pools, &ParamTable::default(), seed).unwrap();
            assert_eq!(fleet.total_capacity_mw(), 10_000);
            let mut sizes: Vec<u32> = fleet.units.iter().map(|u| u.capacity_mw()).collect();
            // only the last draw may be truncated, and 10 GW is reachable without truncation
            // unless the final 2 GW draw overshoots by 1 GW
            let last = sizes.pop().unwrap();
            assert!(sizes.iter().all(|s| *s == 1000 || *s == 2000));
            assert!(last == 1000 || last == 2000);
            sizes.push(last);
            sizes.sort_unstable();
            if sizes == [1000, 1000, 1000, 1000, 2000, 2000, 2000] {
                found = true;
            }
        }
        assert!(found, "three 2 GW + four 1 GW never drawn in 200 seeds");
    }

    #[test]
    fn missing_pool_is_an_error() {
        let pools = nuclear_pool();
        let targets = BTreeMap::from([(Fuel::Coal, 100)]);
        let err = synthesize_fleet("GB", &targets, &pools, &ParamTable::default(), 0).unwrap_err();
        assert!(matches!(err, Error::MissingPool(Fuel::Coal)));
        // zero targets need no pool
        let targets = BTreeMap::from([(Fuel::Coal, 0)]);
        assert!(synthesize_fleet("GB", &targets, &pools, &ParamTable::default(), 0).is_ok());
    }

    #[test]
    fn synthesis_is_seed_deterministic() {
        let pools = pool_unit_sizes(&[
            (Fuel::Coal, 500),
            (Fuel::Coal, 660),
            (Fuel::Ccgt, 400),
            (Fuel::Ccgt, 850),
        ])
        .unwrap();
        let targets = BTreeMap::from([(Fuel::Coal, 5_321), (Fuel::Ccgt, 12_345)]);
        let p = ParamTable::default();
        let a = synthesize_fleet("DE", &targets, &pools, &p, 99).unwrap();
        let b = synthesize_fleet("DE", &targets, &pools, &p, 99).unwrap();
        assert_eq!(a, b);
        let by_fuel = a.capacity_by_fuel();
        assert_eq!(by_fuel[&Fuel::Coal], 5_321);
        assert_eq!(by_fuel[&Fuel::Ccgt], 12_345);
    }
}
