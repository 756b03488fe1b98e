use std::collections::BTreeMap;

use serde::Deserialize;

use super::Fuel;
use crate::error::{Error, Result};

pub const BUILTIN_PARAMS_VERSION: &str = "builtin-v1";

/// Availability and mean time to repair shared by all units of a fuel.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct FuelParams {
    pub availability: f64,
    pub mttr_hours: f64,
}

impl FuelParams {
    fn validate(&self, fuel: Fuel) -> Result<()> {
        if !(self.availability > 0.0 && self.availability <= 1.0) {
            return Err(Error::invalid(format!(
                "{fuel}: availability {} outside (0, 1]",
                self.availability
            )));
        }
        if !(self.mttr_hours > 0.0 && self.mttr_hours.is_finite()) {
            return Err(Error::invalid(format!("{fuel}: MTTR must be positive")));
        }
        Ok(())
    }
}

/// Per-fuel parameters, always complete for all eight fuels.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTable {
    version: String,
    params: BTreeMap<Fuel, FuelParams>,
}

impl Default for ParamTable {
    fn default() -> Self {
        const fn p(availability: f64, mttr_hours: f64) -> FuelParams {
            FuelParams {
                availability,
                mttr_hours,
            }
        }
        let params = BTreeMap::from([
            (Fuel::Biomass, p(0.86, 40.0)),
            (Fuel::Coal, p(0.86, 40.0)),
            (Fuel::Ccgt, p(0.90, 50.0)),
            (Fuel::Oil, p(0.91, 50.0)),
            (Fuel::Hydro, p(0.90, 20.0)),
            (Fuel::Nuclear, p(0.81, 150.0)),
            (Fuel::Chp, p(0.90, 50.0)),
            (Fuel::Waste, p(0.86, 40.0)),
        ]);
        Self {
            version: BUILTIN_PARAMS_VERSION.to_string(),
            params,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFile {
    version: String,
    #[serde(default)]
    fuels: BTreeMap<String, FuelParams>,
}

impl ParamTable {
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn get(&self, fuel: Fuel) -> FuelParams {
        self.params[&fuel]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Fuel, FuelParams)> + '_ {
        self.params.iter().map(|(&f, &p)| (f, p))
    }

    /// Overrides the built-in values with a TOML parameters file:
    ///
    /// ```toml
    /// version = "gb-2021"
    /// [fuels.Nuclear]
    /// availability = 0.85
    /// mttr_hours = 120
    /// ```
    ///
    /// Fuels not listed keep their built-in values.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ParamFile = toml::from_str(text)
            .map_err(|e| Error::parse("parameters file", e.to_string()))?;
        let mut table = ParamTable::default();
        table.version = file.version;
        for (name, p) in file.fuels {
            let fuel: Fuel = name.parse()?;
            p.validate(fuel)?;
            table.params.insert(fuel, p);
        }
        Ok(table)
    }
}
