//! Synthesize a fleet from registry unit sizes and convolve it into a
//! capacity-outage distribution.
//!
//! ```text
//! cargo run --example fleet_convolution
//! ```

use std::collections::BTreeMap;

use gen_outage::{fleet_outage_pmf, pmf_stats, pool_unit_sizes, synthesize_fleet, Fuel, ParamTable};

fn main() -> gen_outage::Result<()> {
    let registry = [
        (Fuel::Nuclear, 660),
        (Fuel::Nuclear, 1200),
        (Fuel::Ccgt, 420),
        (Fuel::Ccgt, 850),
        (Fuel::Coal, 500),
        (Fuel::Hydro, 300),
    ];
    let pools = pool_unit_sizes(&registry)?;
    let targets = BTreeMap::from([
        (Fuel::Nuclear, 8_000),
        (Fuel::Ccgt, 20_000),
        (Fuel::Coal, 2_000),
        (Fuel::Hydro, 1_500),
    ]);
    let params = ParamTable::default();
    let fleet = synthesize_fleet("GB", &targets, &pools, &params, 42)?;
    println!("{} units, {} MW installed", fleet.units.len(), fleet.total_capacity_mw());
    for (fuel, mw) in fleet.capacity_by_fuel() {
        let p = params.get(fuel);
        println!("  {fuel:<8} {mw:>6} MW  A={:.2} MTTR={}h", p.availability, p.mttr_hours);
    }

    let pmf = fleet_outage_pmf(&fleet)?;
    let s = pmf_stats(&pmf);
    println!("expected outage  {:.1} MW (sum of unit expectations {:.1})", s.mean_mw, fleet.expected_outage_mw());
    println!("quartiles        {} / {} MW, IQR {} MW", s.q25_mw, s.q75_mw, s.iqr_mw);
    let tail: f64 = pmf.support().filter(|&(mw, _)| mw >= 5_000).map(|(_, p)| p).sum();
    println!("P(outage >= 5 GW) = {tail:.3e}");
    Ok(())
}
