//! Generator fleet unavailability: analytic models versus reported outages.
//!
//! The crate has four layers that mirror the workflow:
//!
//! - [`fleet`] synthesizes representative fleets and convolves per-unit
//!   outage distributions into a capacity-outage PMF (time-collapsed model).
//! - [`markov`] simulates hourly two-state unit availability (time-sequential
//!   model) and exposes the closed-form chain autocorrelation.
//! - [`ingest`] parses transparency-platform unavailability documents,
//!   filters and deduplicates them, and reconciles overlapping reports into
//!   hourly min/mean/max outage series per unit and zone.
//! - [`stats`] computes the comparison statistics: mean and IQR, the
//!   reconciliation error, winter windows, windowed autocorrelation and
//!   weekly seasonality profiles.
//!
//! [`pipeline`] ties these together with a cached platform client, on-disk
//! artifacts and a manifest. The `gen-outage` binary is a thin front end over
//! it; the `examples/` directory shows each capability on its own.

pub mod error;
pub mod fleet;
pub mod ingest;
pub mod markov;
pub mod pipeline;
pub mod seed;
pub mod stats;
pub mod timefmt;

pub use error::{Error, Result};
pub use fleet::{
    fleet_outage_pmf, pmf_stats, pool_unit_sizes, synthesize_fleet, unit_outage_pmf,
    CapacityOutagePmf, Fleet, Fuel, FuelParams, FuelSizePool, GeneratorUnit, ParamTable,
};
pub use ingest::{
    deduplicate, filter_reports, hourly_outage, parse_document, unit_series, zone_aggregate,
    Channel, HourlyOutageSeries, HourlyOutageTriple, OutageKind, OutageReport, ReportStatus,
};
pub use markov::{
    simulate_fleet, simulate_unit, theoretical_unit_acf, transition_rates, OutageTimeSeries,
    TransitionRates,
};
pub use stats::{
    autocorrelation, reconciliation_error, summary, weekly_profile, winter_window, SummaryStats,
    WinterWindow,
};
