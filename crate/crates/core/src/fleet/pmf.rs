use serde::Serialize;

use super::{Fleet, GeneratorUnit};
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Probability mass over the total MW on outage, on a 1 MW grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityOutagePmf {
    prob: Vec<f64>,
}

impl CapacityOutagePmf {
    pub fn new(prob: Vec<f64>) -> Result<Self> {
        if prob.is_empty() {
            return Err(Error::invalid("empty PMF"));
        }
        if let Some(i) = prob.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid(format!("PMF bin {i} MW has probability {}", prob[i])));
        }
        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("PMF sums to {total}, not 1")));
        }
        Ok(Self { prob })
    }

    /// Probability of exactly `mw` on outage.
    pub fn prob(&self, mw: usize) -> f64 {
        self.prob.get(mw).copied().unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.prob
    }

    pub fn max_mw(&self) -> usize {
        self.prob.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.prob
            .iter()
            .enumerate()
            .map(|(mw, p)| mw as f64 * p)
            .sum()
    }

    /// Smallest grid point whose CDF reaches `q`.
    pub fn quantile(&self, q: f64) -> usize {
        // absorbs rounding in the running sum so that exact CDF ties still match
        const SLACK: f64 = 1e-12;
        let mut cdf = 0.0;
        for (mw, p) in self.prob.iter().enumerate() {
            cdf += p;
            if cdf >= q - SLACK {
                return mw;
            }
        }
        self.max_mw()
    }

    /// Non-zero bins as `(mw, probability)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.prob
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(mw, p)| (mw, *p))
    }
}

/// Two-point outage distribution of one unit.
pub fn unit_outage_pmf(unit: &GeneratorUnit) -> CapacityOutagePmf {
    let cap = unit.capacity_mw() as usize;
    let mut prob = vec![0.0; cap + 1];
    prob[0] = unit.availability();
    prob[cap] += 1.0 - unit.availability();
    CapacityOutagePmf { prob }
}

/// Convolution of all unit distributions, assuming independent outages.
///
/// Units are folded in a canonical order (capacity, then availability), so
/// any permutation of the fleet gives a bit-identical result.
pub fn fleet_outage_pmf(fleet: &Fleet) -> Result<CapacityOutagePmf> {
    if fleet.units.is_empty() {
        return Err(Error::invalid(format!("fleet {} has no units", fleet.zone)));
    }
    let mut order: Vec<&GeneratorUnit> = fleet.units.iter().collect();
    order.sort_by(|a, b| {
        a.capacity_mw()
            .cmp(&b.capacity_mw())
            .then(a.availability().total_cmp(&b.availability()))
    });

    let total = fleet.total_capacity_mw() as usize;
    let mut prob = vec![0.0; total + 1];
    prob[0] = 1.0;
    let mut reach = 0usize;
    for unit in order {
        let cap = unit.capacity_mw() as usize;
        let (up, down) = (unit.availability(), 1.0 - unit.availability());
        // in place, from the top so that prob[x] is still the old value when read
        for x in (0..=reach).rev() {
            let p = prob[x];
            prob[x + cap] += down * p;
            prob[x] = up * p;
        }
        reach += cap;
    }
    Ok(CapacityOutagePmf { prob })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmfStats {
    pub mean_mw: f64,
    pub q25_mw: usize,
    pub q75_mw: usize,
    pub iqr_mw: f64,
}

pub fn pmf_stats(pmf: &CapacityOutagePmf) -> PmfStats {
    let q25 = pmf.quantile(0.25);
    let q75 = pmf.quantile(0.75);
    PmfStats {
        mean_mw: pmf.mean(),
        q25_mw: q25,
        q75_mw: q75,
        iqr_mw: (q75 - q25) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::Fuel;
    use proptest::prelude::*;

    fn unit(cap: u32, a: f64) -> GeneratorUnit {
        GeneratorUnit::new("u", Fuel::Ccgt, cap, a, 50.0).unwrap()
    }

    fn fleet(units: Vec<GeneratorUnit>) -> Fleet {
        Fleet {
            zone: "T".into(),
            units,
        }
    }

    /// Exhaustive enumeration over all 2^n up/down states.
    fn brute_force(units: &[GeneratorUnit]) -> Vec<f64> {
        let total: usize = units.iter().map(|u| u.capacity_mw() as usize).sum();
        let mut out = vec![0.0; total + 1];
        for state in 0u32..(1 << units.len()) {
            let mut p = 1.0;
            let mut mw = 0;
            for (i, u) in units.iter().enumerate() {
                if state >> i & 1 == 1 {
                    p *= 1.0 - u.availability();
                    mw += u.capacity_mw() as usize;
                } else {
                    p *= u.availability();
                }
            }
            out[mw] += p;
        }
        out
    }

    #[test]
    fn unit_pmf_examples() {
        let p = unit_outage_pmf(&unit(100, 0.9));
        assert_eq!(p.prob(0), 0.9);
        assert!((p.prob(100) - 0.1).abs() < 1e-15);
        assert_eq!(p.support().count(), 2);

        let p = unit_outage_pmf(&unit(100, 1.0));
        assert_eq!(p.prob(0), 1.0);
        assert_eq!(p.support().count(), 1);

        let p = unit_outage_pmf(&unit(750, 0.81));
        assert_eq!(p.prob(0), 0.81);
        assert!((p.prob(750) - 0.19).abs() < 1e-15);
    }

    #[test]
    fn two_unit_convolution() {
        let p = fleet_outage_pmf(&fleet(vec![unit(100, 0.9), unit(100, 0.9)])).unwrap();
        assert!((p.prob(0) - 0.81).abs() < 1e-15);
        assert!((p.prob(100) - 0.18).abs() < 1e-15);
        assert!((p.prob(200) - 0.01).abs() < 1e-15);
        assert_eq!(p.support().count(), 3);
        assert_eq!(p.max_mw(), 200);
    }

    #[test]
    fn single_unit_fleet_equals_unit_pmf() {
        let u = unit(333, 0.86);
        assert_eq!(fleet_outage_pmf(&fleet(vec![u.clone()])).unwrap(), unit_outage_pmf(&u));
    }

    #[test]
    fn empty_fleet_rejected() {
        assert!(matches!(fleet_outage_pmf(&fleet(vec![])), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pmf_validation() {
        assert!(CapacityOutagePmf::new(vec![]).is_err());
        assert!(CapacityOutagePmf::new(vec![0.5, 0.4]).is_err());
        assert!(CapacityOutagePmf::new(vec![1.1, -0.1]).is_err());
        assert!(CapacityOutagePmf::new(vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn stats_examples() {
        let mut prob = vec![0.0; 101];
        prob[0] = 0.9;
        prob[100] = 0.1;
        let s = pmf_stats(&CapacityOutagePmf::new(prob).unwrap());
        assert!((s.mean_mw - 10.0).abs() < 1e-12);
        assert_eq!((s.q25_mw, s.q75_mw), (0, 0));
        assert_eq!(s.iqr_mw, 0.0);

        // CDF: 0 -> 0.25, 100 -> 0.75, 200 -> 1.0
        let mut prob = vec![0.0; 201];
        prob[0] = 0.25;
        prob[100] = 0.5;
        prob[200] = 0.25;
        let s = pmf_stats(&CapacityOutagePmf::new(prob).unwrap());
        assert!((s.mean_mw - 100.0).abs() < 1e-12);
        assert_eq!((s.q25_mw, s.q75_mw), (0, 100));
        assert_eq!(s.iqr_mw, 100.0);
    }

    fn arb_units(max: usize) -> impl Strategy<Value = Vec<GeneratorUnit>> {
        prop::collection::vec((1u32..=400, 0.5f64..=1.0), 1..=max)
            .prop_map(|v| v.into_iter().map(|(c, a)| unit(c, a)).collect())
    }

    proptest! {
        #[test]
        fn matches_enumeration(units in arb_units(10)) {
            let p = fleet_outage_pmf(&fleet(units.clone())).unwrap();
            let oracle = brute_force(&units);
            prop_assert_eq!(p.probabilities().len(), oracle.len());
            for (a, b) in p.probabilities().iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn sums_to_one_and_mean_is_linear(units in arb_units(30)) {
            let f = fleet(units);
            let p = fleet_outage_pmf(&f).unwrap();
            let total: f64 = p.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            prop_assert!(p.probabilities().iter().all(|x| *x >= 0.0));
            prop_assert!((p.mean() - f.expected_outage_mw()).abs() <= 1e-9);
        }

        #[test]
        fn order_independent(units in arb_units(12), rot in 0usize..12) {
            let a = fleet_outage_pmf(&fleet(units.clone())).unwrap();
            let mut shuffled = units;
            shuffled.reverse();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            let b = fleet_outage_pmf(&fleet(shuffled)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
