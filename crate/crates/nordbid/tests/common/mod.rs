//! Shared fixtures for integration tests: randomized tiny scheduling
//! instances and synthetic series generators.

#![allow(dead_code)]

use chrono::{TimeZone, Utc};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use nordbid::droop::{build_meb, DroopConfig, MebTable};
use nordbid::market_data::FrequencyTrace;
use nordbid::model::{
    build_instance, BessParams, BidStructure, Market, MarketPowerPair, MilpInstance, Scenario,
};

pub fn trace_from(values: Vec<f64>) -> FrequencyTrace {
    FrequencyTrace::new(Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap(), values).unwrap()
}

/// Random-walk frequency trace bounded to a realistic band.
pub fn random_trace(rng: &mut ChaCha8Rng, hours: usize) -> FrequencyTrace {
    let mut f = 50.0f64;
    let values: Vec<f64> = (0..hours * 60)
        .map(|_| {
            f += rng.gen_range(-0.02..0.02);
            f = f.clamp(49.75, 50.25);
            f
        })
        .collect();
    trace_from(values)
}

/// Randomized tiny instance under the oracle enumeration cap: 2-3 hours,
/// 15-minute steps, 2-3 pairs, 1-2 scenarios with random prices and
/// frequency traces.
pub fn random_tiny_instance(rng: &mut ChaCha8Rng) -> MilpInstance {
    let hours = rng.gen_range(2..=3);
    let params = BessParams {
        step_minutes: 15,
        horizon_hours: hours as u32,
        ..BessParams::default()
    };
    let pool = [
        MarketPowerPair::new(Market::N, 0.9),
        MarketPowerPair::new(Market::N, 0.6),
        MarketPowerPair::new(Market::D, 0.9),
        MarketPowerPair::new(Market::SpotDischarge, 0.8),
        MarketPowerPair::new(Market::SpotCharge, 0.6),
    ];
    let n_pairs = rng.gen_range(2..=3);
    let mut picks: Vec<usize> = (0..pool.len()).collect();
    for i in (1..picks.len()).rev() {
        let j = rng.gen_range(0..=i);
        picks.swap(i, j);
    }
    picks.truncate(n_pairs);
    picks.sort_unstable();
    let pairs: Vec<MarketPowerPair> = picks.into_iter().map(|i| pool[i]).collect();

    let n_scen = rng.gen_range(1..=2);
    let mut probs: Vec<f64> = (0..n_scen).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    // Normalization leaves float dust; pin the last probability.
    let head: f64 = probs[..n_scen - 1].iter().sum();
    probs[n_scen - 1] = 1.0 - head;

    let mut scenarios = Vec::new();
    let mut mebs: Vec<MebTable> = Vec::new();
    for prob in probs {
        let scenario = Scenario {
            probability: prob,
            clearing_prices: Market::ALL
                .iter()
                .map(|&m| (m, (0..hours).map(|_| rng.gen_range(0.0..50.0)).collect()))
                .collect(),
            c_up: (0..hours).map(|_| rng.gen_range(0.0..20.0)).collect(),
            c_down: (0..hours).map(|_| rng.gen_range(0.0..20.0)).collect(),
            trace: None,
            frequency_trace: None,
        };
        let trace = random_trace(rng, hours);
        mebs.push(build_meb(&trace, &pairs, 15, hours, &DroopConfig::default()).unwrap());
        scenarios.push(scenario);
    }

    let structure = BidStructure {
        pairs,
        bid_min: 0.0,
        bid_max: 75.0,
        epsilon: 1e-3,
    };
    build_instance(&params, &structure, &scenarios, &mebs).unwrap()
}
