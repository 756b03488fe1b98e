//! Winter evaluation windows and the comparison statistics on a simulated
//! fleet: mean, IQR and windowed autocorrelation.
//!
//! ```text
//! cargo run --release --example winter_statistics
//! ```

use std::collections::BTreeMap;

use gen_outage::stats::{season_label, summary_pooled, STATS_LAGS};
use chrono::Datelike;
use gen_outage::{autocorrelation, simulate_fleet, synthesize_fleet, pool_unit_sizes, winter_window, Fuel, ParamTable};

fn main() -> gen_outage::Result<()> {
    let windows: Vec<_> = (2016..=2019).map(winter_window).collect();
    for w in &windows {
        let segments: Vec<String> = w
            .segments()
            .map(|(start, len)| format!("{} +{}h", start.format("%Y-%m-%d"), len))
            .collect();
        println!("{} ({}): {} hours in {}", w.label(), season_label(w.start().year_ce().1 as i32), w.n_hours(), segments.join(", "));
    }

    let pools = pool_unit_sizes(&[(Fuel::Nuclear, 1200), (Fuel::Ccgt, 450), (Fuel::Ccgt, 800), (Fuel::Coal, 500)])?;
    let targets = BTreeMap::from([(Fuel::Nuclear, 9_000), (Fuel::Ccgt, 25_000), (Fuel::Coal, 5_000)]);
    let fleet = synthesize_fleet("GB", &targets, &pools, &ParamTable::default(), 1)?;

    let first = windows[0].start();
    let last = windows.last().expect("four winters").end();
    let series = simulate_fleet(&fleet, first, (last - first).num_hours() as usize, 3)?;

    let (mean, iqr) = summary_pooled(&series, &windows)?;
    println!("\nsimulated fleet, {} units: mean {:.0} MW, IQR {:.0} MW", fleet.units.len(), mean, iqr);
    let acf = autocorrelation(&series, &windows, &STATS_LAGS)?;
    for (lag, r) in acf {
        println!("  acf({lag:>3}h) = {r:.3}");
    }
    Ok(())
}
