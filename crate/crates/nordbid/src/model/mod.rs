//! Scheduling-model domain types: markets, battery parameters, scenarios,
//! bid structures and solved schedules, plus instance construction and
//! solution validation/settlement.

mod instance;
mod settle;
mod validate;

pub use instance::{build_instance, compute_big_m, BigMValues, InstanceError, MilpInstance};
pub use settle::{settle, PaymentKind, SettlementLine, SettlementReport};
pub use validate::{validate_solution, ValidationReport, Violation};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::FrequencyTrace;

/// Markets the battery can bid into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Market {
    /// FCR-N: symmetric frequency reserve, pay-as-bid availability plus
    /// energy payments for activated volumes.
    N,
    /// FCR-D upward: disturbance reserve, pay-as-bid availability only.
    D,
    /// Day-ahead sell (discharge) leg, pay-as-clear.
    #[serde(rename = "S_DCH")]
    SpotDischarge,
    /// Day-ahead buy (charge) leg, pay-as-clear.
    #[serde(rename = "S_CH")]
    SpotCharge,
}

/// Frequency-reserve vs. energy market classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarketClass {
    Frequency,
    Spot,
}

/// Which side of the clearing price an accepted bid must lie on.
///
/// `Below`: the bid clears when its price is at most the clearing price
/// (sell-side markets). `Above`: the bid clears when its price is at least
/// the clearing price (the buy leg of spot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarketSide {
    Below,
    Above,
}

impl Market {
    pub const ALL: [Market; 4] = [
        Market::N,
        Market::D,
        Market::SpotDischarge,
        Market::SpotCharge,
    ];

    pub fn class(self) -> MarketClass {
        match self {
            Market::N | Market::D => MarketClass::Frequency,
            Market::SpotDischarge | Market::SpotCharge => MarketClass::Spot,
        }
    }

    pub fn side(self) -> MarketSide {
        match self {
            Market::SpotCharge => MarketSide::Above,
            _ => MarketSide::Below,
        }
    }

    /// Short stable label used in variable/constraint names and CSV columns.
    pub fn label(self) -> &'static str {
        match self {
            Market::N => "N",
            Market::D => "D",
            Market::SpotDischarge => "SDCH",
            Market::SpotCharge => "SCH",
        }
    }
}

impl std::fmt::Display for Market {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A biddable (market, size) pair. `power` is MW for frequency markets and
/// the hourly energy quantity in MWh for spot legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketPowerPair {
    pub market: Market,
    pub power: f64,
}

impl MarketPowerPair {
    pub fn new(market: Market, power: f64) -> Self {
        Self { market, power }
    }

    /// Label like `N_0.9` for naming variables; powers are formatted with
    /// enough digits to stay unique for realistic level sets.
    pub fn label(&self) -> String {
        format!("{}_{}", self.market.label(), self.power)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid battery parameters: {0}")]
    InvalidParams(String),
    #[error("invalid scenario set: {0}")]
    InvalidScenarios(String),
    #[error("invalid bid structure: {0}")]
    InvalidStructure(String),
}

/// Physical battery parameters and scheduling horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BessParams {
    /// Minimum state of charge (MWh).
    pub e_min: f64,
    /// Maximum state of charge (MWh).
    pub e_max: f64,
    /// State of charge fixed at the start of the day (MWh).
    pub soc_start: f64,
    /// State of charge required at the end of the day (MWh) when the
    /// boundary is enforced.
    pub soc_end: f64,
    /// Inverter loss factor: discharge flows are divided by (1 - ILF) and
    /// charge flows multiplied by (1 - ILF) when drawn from / added to
    /// storage.
    pub ilf: f64,
    /// Intra-hour step length in minutes; must divide 60.
    pub step_minutes: u32,
    /// Horizon length in hours.
    pub horizon_hours: u32,
    /// When false, the end-of-day state of charge is free within
    /// [e_min, e_max] instead of pinned to `soc_end`.
    pub fixed_end_soc: bool,
}

impl Default for BessParams {
    fn default() -> Self {
        Self {
            e_min: 0.0,
            e_max: 1.0,
            soc_start: 0.5,
            soc_end: 0.5,
            ilf: 0.10,
            step_minutes: 1,
            horizon_hours: 24,
            fixed_end_soc: true,
        }
    }
}

impl BessParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.e_min >= 0.0 && self.e_min < self.soc_start && self.soc_start < self.e_max) {
            return Err(ModelError::InvalidParams(format!(
                "need 0 <= e_min < soc_start < e_max, got e_min={} soc_start={} e_max={}",
                self.e_min, self.soc_start, self.e_max
            )));
        }
        if !(0.0..1.0).contains(&self.ilf) {
            return Err(ModelError::InvalidParams(format!(
                "inverter loss factor must lie in [0, 1), got {}",
                self.ilf
            )));
        }
        if self.step_minutes == 0 || 60 % self.step_minutes != 0 {
            return Err(ModelError::InvalidParams(format!(
                "step length {} min does not divide 60",
                self.step_minutes
            )));
        }
        if self.horizon_hours == 0 {
            return Err(ModelError::InvalidParams("horizon is empty".into()));
        }
        Ok(())
    }

    /// Intra-hour steps per hour.
    pub fn steps_per_hour(&self) -> usize {
        (60 / self.step_minutes) as usize
    }

    /// Total steps over the horizon.
    pub fn total_steps(&self) -> usize {
        self.steps_per_hour() * self.horizon_hours as usize
    }
}

/// One price/frequency scenario with its probability weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub probability: f64,
    /// Clearing prices per market; each vector holds one value per hour.
    pub clearing_prices: BTreeMap<Market, Vec<f64>>,
    /// FCR-N up-regulation energy price per hour (currency/MWh).
    pub c_up: Vec<f64>,
    /// FCR-N down-regulation energy price per hour (currency/MWh).
    pub c_down: Vec<f64>,
    /// Frequency trace driving droop activation in this scenario.
    #[serde(skip)]
    pub trace: Option<FrequencyTrace>,
    /// Path the trace was loaded from, kept for the scenario file format.
    #[serde(default)]
    pub frequency_trace: Option<String>,
}

impl Scenario {
    pub fn clearing_price(&self, market: Market, hour: usize) -> f64 {
        self.clearing_prices
            .get(&market)
            .and_then(|v| v.get(hour))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Validate a scenario set against a horizon: probabilities sum to one and
/// every price series covers every hour.
pub fn validate_scenarios(scenarios: &[Scenario], horizon_hours: u32) -> Result<(), ModelError> {
    if scenarios.is_empty() {
        return Err(ModelError::InvalidScenarios("no scenarios".into()));
    }
    let total: f64 = scenarios.iter().map(|s| s.probability).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(ModelError::InvalidScenarios(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    let h = horizon_hours as usize;
    for (i, s) in scenarios.iter().enumerate() {
        if s.probability < 0.0 {
            return Err(ModelError::InvalidScenarios(format!(
                "scenario {i} has negative probability"
            )));
        }
        for (m, prices) in &s.clearing_prices {
            if prices.len() < h {
                return Err(ModelError::InvalidScenarios(format!(
                    "scenario {i} market {m} has {} prices for {h} hours",
                    prices.len()
                )));
            }
            if prices.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(ModelError::InvalidScenarios(format!(
                    "scenario {i} market {m} has a non-finite or negative price"
                )));
            }
        }
        for (name, series) in [("c_up", &s.c_up), ("c_down", &s.c_down)] {
            if series.len() < h {
                return Err(ModelError::InvalidScenarios(format!(
                    "scenario {i} {name} has {} entries for {h} hours",
                    series.len()
                )));
            }
            if series.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(ModelError::InvalidScenarios(format!(
                    "scenario {i} {name} has a non-finite or negative price"
                )));
            }
        }
    }
    Ok(())
}

/// The biddable pairs and price-variable bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BidStructure {
    pub pairs: Vec<MarketPowerPair>,
    pub bid_min: f64,
    pub bid_max: f64,
    /// Strict-inequality tolerance for price acceptance comparisons: a bid
    /// within `epsilon` of the clearing price may clear either way.
    pub epsilon: f64,
}

impl BidStructure {
    /// Default multi-bid structure: frequency levels {0.9, 0.6, 0.3} MW and
    /// spot quantities {0.8, 0.6, 0.4} MWh on both legs.
    pub fn multi_bid(bid_max: f64) -> Self {
        let mut pairs = Vec::new();
        for &p in &[0.9, 0.6, 0.3] {
            pairs.push(MarketPowerPair::new(Market::N, p));
            pairs.push(MarketPowerPair::new(Market::D, p));
        }
        for &q in &[0.8, 0.6, 0.4] {
            pairs.push(MarketPowerPair::new(Market::SpotDischarge, q));
            pairs.push(MarketPowerPair::new(Market::SpotCharge, q));
        }
        Self {
            pairs,
            bid_min: 0.0,
            bid_max,
            epsilon: 1e-3,
        }
    }

    /// Single-level structure: one size per market.
    pub fn single_bid(freq_mw: f64, spot_mwh: f64, bid_max: f64) -> Self {
        Self {
            pairs: vec![
                MarketPowerPair::new(Market::N, freq_mw),
                MarketPowerPair::new(Market::D, freq_mw),
                MarketPowerPair::new(Market::SpotDischarge, spot_mwh),
                MarketPowerPair::new(Market::SpotCharge, spot_mwh),
            ],
            bid_min: 0.0,
            bid_max,
            epsilon: 1e-3,
        }
    }

    /// Default bid cap: 1.5x the largest clearing price in the scenario set.
    pub fn default_bid_max(scenarios: &[Scenario]) -> f64 {
        let max_price = scenarios
            .iter()
            .flat_map(|s| s.clearing_prices.values())
            .flatten()
            .copied()
            .fold(0.0f64, f64::max);
        1.5 * max_price
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.pairs.is_empty() {
            return Err(ModelError::InvalidStructure(
                "empty market-power pair set".into(),
            ));
        }
        if self.pairs.iter().any(|p| p.power <= 0.0) {
            return Err(ModelError::InvalidStructure(
                "pair sizes must be strictly positive".into(),
            ));
        }
        if !(self.bid_min < self.bid_max) {
            return Err(ModelError::InvalidStructure(format!(
                "need bid_min < bid_max, got [{}, {}]",
                self.bid_min, self.bid_max
            )));
        }
        if self.epsilon <= 0.0 {
            return Err(ModelError::InvalidStructure(
                "acceptance tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A fully materialized schedule: bid decisions, per-scenario acceptance,
/// flows, state of charge and payment terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    /// `x_bid[h][j]`: 1 if pair `j` is bid in hour `h`.
    pub x_bid: Vec<Vec<f64>>,
    /// `x_price[h]`: the hour's bid price, shared across whichever pair is
    /// bid.
    pub x_price: Vec<f64>,
    /// `x_acc[s][h][j]`: 1 if the hour-`h` bid of pair `j` clears in
    /// scenario `s`.
    pub x_acc: Vec<Vec<Vec<f64>>>,
    /// Discharge delivered to the grid per (scenario, step, pair) in MWh.
    pub z_dch: Vec<Vec<Vec<f64>>>,
    /// Charge drawn from the grid per (scenario, step, pair) in MWh.
    pub z_ch: Vec<Vec<Vec<f64>>>,
    /// Undelivered activation per (scenario, step, pair): discharge slack.
    pub s_dch: Vec<Vec<Vec<f64>>>,
    /// Unabsorbed activation per (scenario, step, pair): charge slack.
    pub s_ch: Vec<Vec<Vec<f64>>>,
    /// Net storage draw per (scenario, step) in MWh (positive depletes).
    pub z_net: Vec<Vec<f64>>,
    /// State of charge per (scenario, step), with one extra trailing entry
    /// for the end-of-horizon state.
    pub z_soc: Vec<Vec<f64>>,
    /// `w_ok[s][h]`: 1 when hour `h` of scenario `s` was served without
    /// slack, enabling FCR-N energy payments.
    pub w_ok: Vec<Vec<f64>>,
    /// Availability payment per (scenario, hour, pair).
    pub w_avail: Vec<Vec<Vec<f64>>>,
    /// Spot discharge revenue per (scenario, hour).
    pub w_spot_dch: Vec<Vec<f64>>,
    /// Spot charge cost per (scenario, hour).
    pub w_spot_ch: Vec<Vec<f64>>,
    /// FCR-N energy payment per (scenario, hour).
    pub w_energy: Vec<Vec<f64>>,
    /// Expected revenue over the scenario set.
    pub objective: f64,
}
