//! Two-state unit chains: rates from availability and repair time, a long
//! simulation, and the empirical autocorrelation against the closed form.
//!
//! ```text
//! cargo run --release --example markov_simulation
//! ```

use chrono::{TimeZone, Utc};
use gen_outage::{simulate_fleet, simulate_unit, theoretical_unit_acf, transition_rates, Fleet, GeneratorUnit, ParamTable};

fn acf(x: &[f64], lag: usize) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let cov: f64 = x.iter().zip(&x[lag..]).map(|(a, b)| (a - mean) * (b - mean)).sum();
    cov / var
}

fn main() -> gen_outage::Result<()> {
    let start = Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap();
    println!("{:<8} {:>8} {:>10} {:>10}", "fuel", "mu", "lambda", "acf(24h)");
    for (fuel, p) in ParamTable::default().iter() {
        let r = transition_rates(p.availability, p.mttr_hours)?;
        println!(
            "{:<8} {:>8.4} {:>10.6} {:>10.4}",
            fuel.to_string(),
            r.repair_rate(),
            r.failure_rate(),
            theoretical_unit_acf(r, 24)?
        );
    }

    let unit = GeneratorUnit::new("CCGT-1", gen_outage::Fuel::Ccgt, 500, 0.9, 50.0)?;
    let rates = transition_rates(unit.availability(), unit.mttr_hours())?;
    let series = simulate_unit(&unit, start, 1_000_000, 7)?;
    let up = series.values_mw().iter().filter(|v| **v == 0.0).count() as f64 / series.len() as f64;
    println!("\n{} over 10^6 hours: up {:.4} (target {})", unit.id(), up, unit.availability());
    for lag in [1, 24, 168] {
        println!(
            "  lag {lag:>3}: simulated {:+.4}  closed form {:+.4}",
            acf(series.values_mw(), lag),
            theoretical_unit_acf(rates, lag as u32)?
        );
    }

    let fleet = Fleet {
        zone: "XX".into(),
        units: (0..40)
            .map(|i| GeneratorUnit::new(format!("U{i}"), gen_outage::Fuel::Ccgt, 400, 0.9, 50.0))
            .collect::<gen_outage::Result<_>>()?,
    };
    let total = simulate_fleet(&fleet, start, 24 * 7 * 20, 11)?;
    let mean = total.values_mw().iter().sum::<f64>() / total.len() as f64;
    println!("\n40 x 400 MW fleet, 20 weeks: mean outage {mean:.0} MW (expected {:.0})", fleet.expected_outage_mw());
    Ok(())
}
