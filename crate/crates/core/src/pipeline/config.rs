use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fleet::ParamTable;
use crate::ingest::ZoneMap;
use crate::stats::{parse_season, winter_window_with, WinterRule, WinterWindow};
use crate::timefmt;

pub const TOKEN_ENV: &str = "ENTSOE_API_TOKEN";
pub const DEFAULT_BASE_URL: &str = "https://web-api.tp.entsoe.eu/api";

/// An explicit evaluation span used instead of winter seasons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodConfig {
    #[serde(default = "period_label")]
    pub label: String,
    /// First day, inclusive.
    pub start: NaiveDate,
    /// Last day, exclusive.
    pub end: NaiveDate,
}

fn period_label() -> String {
    "period".into()
}

/// Pipeline configuration, read from TOML.
///
/// Relative paths are resolved against the directory holding the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub zones: Vec<String>,
    #[serde(default)]
    pub seasons: Vec<String>,
    #[serde(default)]
    pub period: Option<PeriodConfig>,
    #[serde(default, skip_serializing)]
    pub api_token: Option<String>,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model_params_path: Option<PathBuf>,
    /// `zone,fuel,capacity_mw` rows, one per registered unit: the size pool.
    pub unit_sizes_path: PathBuf,
    /// `zone,fuel,capacity_mw` rows summed into per-zone targets.
    pub installed_capacity_path: PathBuf,
    /// `unit_id,nominal_mw` overrides for stated nominal capacities.
    #[serde(default)]
    pub nominal_registry_path: Option<PathBuf>,
    #[serde(default = "default_document_types")]
    pub document_types: Vec<String>,
    /// Area codes overriding the built-in table.
    #[serde(default)]
    pub zone_codes: BTreeMap<String, String>,
    #[serde(default)]
    pub winter: WinterRule,
    #[serde(default = "default_draws")]
    pub n_draws: u32,
    #[serde(default = "default_bin")]
    pub histogram_bin_mw: u32,
    #[serde(default = "default_base_url")]
    pub base_url: String,
    #[serde(default = "default_delay")]
    pub request_delay_ms: u64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub retry_base_ms: u64,
}

fn default_document_types() -> Vec<String> {
    vec!["A80".into(), "A77".into()]
}
fn default_draws() -> u32 {
    3
}
fn default_bin() -> u32 {
    500
}
fn default_base_url() -> String {
    DEFAULT_BASE_URL.into()
}
fn default_delay() -> u64 {
    250
}
fn default_in_flight() -> usize {
    4
}
fn default_retries() -> u32 {
    4
}
fn default_backoff() -> u64 {
    500
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::parse("config", e.message().to_string()))?;
        for p in [
            &mut cfg.cache_dir,
            &mut cfg.output_dir,
            &mut cfg.unit_sizes_path,
            &mut cfg.installed_capacity_path,
        ] {
            *p = base_dir.join(&*p);
        }
        for p in [&mut cfg.model_params_path, &mut cfg.nominal_registry_path].into_iter().flatten() {
            *p = base_dir.join(&*p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_stage("config", path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base).map_err(|e| e.in_stage("config", path))
    }

    pub fn validate(&self) -> Result<()> {
        if self.zones.is_empty() {
            return Err(Error::Usage("config lists no zones".into()));
        }
        if self.seasons.is_empty() == self.period.is_none() {
            return Err(Error::Usage("config needs either seasons or a period, not both".into()));
        }
        for s in &self.seasons {
            parse_season(s)?;
        }
        if let Some(p) = &self.period {
            if p.end <= p.start {
                return Err(Error::Usage(format!("period {}..{} is empty", p.start, p.end)));
            }
        }
        if self.n_draws == 0 || self.histogram_bin_mw == 0 || self.max_in_flight == 0 {
            return Err(Error::Usage("n_draws, histogram_bin_mw and max_in_flight must be positive".into()));
        }
        if let Some(bad) = self.document_types.iter().find(|d| !matches!(d.as_str(), "A77" | "A80")) {
            return Err(Error::Usage(format!("document type {bad} is not A77 or A80")));
        }
        let zones = self.zone_map();
        if let Some(z) = self.zones.iter().find(|z| zones.area_code(z).is_none()) {
            return Err(Error::Usage(format!("zone {z} has no area code; add it to [zone_codes]")));
        }
        Ok(())
    }

    /// Token from the environment, else from the config file.
    pub fn token(&self) -> Option<String> {
        std::env::var(TOKEN_ENV)
            .ok()
            .filter(|t| !t.trim().is_empty())
            .or_else(|| self.api_token.clone())
    }

    pub fn zone_map(&self) -> ZoneMap {
        let mut map = ZoneMap::default();
        for (zone, code) in &self.zone_codes {
            map.insert(zone, code);
        }
        map
    }

    pub fn params(&self) -> Result<ParamTable> {
        match &self.model_params_path {
            None => Ok(ParamTable::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::from(e).in_stage("config", p))?;
                ParamTable::from_toml_str(&text).map_err(|e| e.in_stage("config", p))
            }
        }
    }

    /// Evaluation windows in chronological order.
    pub fn windows(&self) -> Result<Vec<WinterWindow>> {
        let mut out = Vec::new();
        if let Some(p) = &self.period {
            let start = timefmt::midnight(p.start);
            let hours = (timefmt::midnight(p.end) - start).num_hours() as usize;
            out.push(WinterWindow::contiguous(&p.label, start, hours)?);
        }
        for s in &self.seasons {
            out.push(winter_window_with(parse_season(s)?, &self.winter)?);
        }
        out.sort_by_key(|w| w.start());
        if out.windows(2).any(|w| w[1].start() < w[0].end()) {
            return Err(Error::Usage("evaluation windows overlap".into()));
        }
        Ok(out)
    }

    /// Days to fetch: every day from the first window start to the last
    /// window end, so the series between winters is complete too.
    pub fn days(&self) -> Result<Vec<NaiveDate>> {
        let windows = self.windows()?;
        let (Some(first), Some(last)) = (windows.first(), windows.last()) else {
            return Ok(Vec::new());
        };
        let mut d = first.start().date_naive();
        let end = (last.end() - chrono::TimeDelta::seconds(1)).date_naive();
        let mut days = Vec::new();
        while d <= end {
            days.push(d);
            d = d.succ_opt().expect("date in range");
        }
        Ok(days)
    }

    /// Hash of every setting that can change an artifact. Paths, network
    /// settings and the token are left out; input file contents are in.
    pub fn analysis_hash(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Analysis<'a> {
            zones: &'a [String],
            seasons: &'a [String],
            period: &'a Option<PeriodConfig>,
            seed: u64,
            document_types: &'a [String],
            zone_codes: &'a BTreeMap<String, String>,
            winter: &'a WinterRule,
            n_draws: u32,
            histogram_bin_mw: u32,
            params: Vec<(String, f64, f64)>,
            inputs: Vec<String>,
        }
        let params = self
            .params()?
            .iter()
            .map(|(f, p)| (f.to_string(), p.availability, p.mttr_hours))
            .collect();
        let mut inputs = Vec::new();
        for p in [Some(&self.unit_sizes_path), Some(&self.installed_capacity_path), self.nominal_registry_path.as_ref()]
            .into_iter()
            .flatten()
        {
            let bytes = std::fs::read(p).map_err(|e| Error::from(e).in_stage("config", p))?;
            inputs.push(hex::encode(Sha256::digest(&bytes)));
        }
        let a = Analysis {
            zones: &self.zones,
            seasons: &self.seasons,
            period: &self.period,
            seed: self.seed,
            document_types: &self.document_types,
            zone_codes: &self.zone_codes,
            winter: &self.winter,
            n_draws: self.n_draws,
            histogram_bin_mw: self.histogram_bin_mw,
            params,
            inputs,
        };
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&a)?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
zones = ["GB"]
seasons = ["16/17"]
cache_dir = "cache"
output_dir = "out"
unit_sizes_path = "sizes.csv"
installed_capacity_path = "capacity.csv"
"#;

    #[test]
    fn defaults_and_paths() {
        let c = PipelineConfig::from_toml_str(MINIMAL, Path::new("/data")).unwrap();
        assert_eq!(c.cache_dir, PathBuf::from("/data/cache"));
        assert_eq!(c.document_types, vec!["A80", "A77"]);
        assert_eq!(c.n_draws, 3);
        assert_eq!(c.winter, WinterRule::default());
        let w = c.windows().unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].n_hours(), 3024);
        assert_eq!(c.days().unwrap().len(), 140);
    }

    #[test]
    fn explicit_period() {
        let text = format!(
            "{}\n[period]\nstart = \"2021-02-01\"\nend = \"2021-02-15\"\n",
            MINIMAL.replace("seasons = [\"16/17\"]", "")
        );
        let c = PipelineConfig::from_toml_str(&text, Path::new(".")).unwrap();
        let w = c.windows().unwrap();
        assert_eq!(w[0].n_hours(), 336);
        assert_eq!(w[0].label(), "period");
        assert_eq!(c.days().unwrap().len(), 14);
    }

    #[test]
    fn rejects_bad_configs() {
        let no_zone = MINIMAL.replace("[\"GB\"]", "[]");
        assert!(matches!(PipelineConfig::from_toml_str(&no_zone, Path::new(".")), Err(Error::Usage(_))));
        let bad_season = MINIMAL.replace("16/17", "16-17");
        assert!(PipelineConfig::from_toml_str(&bad_season, Path::new(".")).is_err());
        let unknown_zone = MINIMAL.replace("[\"GB\"]", "[\"XX\"]");
        assert!(PipelineConfig::from_toml_str(&unknown_zone, Path::new(".")).is_err());
        let typo = format!("{MINIMAL}\nsed = 3\n");
        assert!(matches!(PipelineConfig::from_toml_str(&typo, Path::new(".")), Err(Error::Parse { .. })));
    }

    #[test]
    fn token_is_never_serialized() {
        let text = format!("api_token = \"secret\"\n{MINIMAL}");
        let c = PipelineConfig::from_toml_str(&text, Path::new(".")).unwrap();
        assert_eq!(c.api_token.as_deref(), Some("secret"));
        assert!(!serde_json::to_string(&c).unwrap().contains("secret"));
    }
}
