//! Payment settlement: recomputes every cash flow of a schedule from
//! primal values and market rules (pay-as-bid availability, pay-as-clear
//! spot, activation-based FCR-N energy).

use serde::{Deserialize, Serialize};

use super::{instance::MilpInstance, Market, MarketClass, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaymentKind {
    Availability,
    SpotEnergy,
    RegulationEnergy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettlementLine {
    pub scenario: usize,
    pub hour: usize,
    pub market: Market,
    pub kind: PaymentKind,
    /// Signed cash flow: positive is revenue, negative is cost.
    pub amount: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettlementReport {
    pub lines: Vec<SettlementLine>,
    pub per_scenario: Vec<f64>,
    /// Probability-weighted total over scenarios.
    pub expected_revenue: f64,
}

/// Recomputes the payment breakdown of a (validated) solution.
pub fn settle(sol: &Solution, inst: &MilpInstance) -> SettlementReport {
    let ns = inst.scenarios.len();
    let nh = inst.hours();
    let sph = inst.steps_per_hour();
    let mut lines = Vec::new();
    let mut per_scenario = vec![0.0; ns];

    for s in 0..ns {
        let scen = &inst.scenarios[s];
        for h in 0..nh {
            for (j, pair) in inst.structure.pairs.iter().enumerate() {
                if sol.x_acc[s][h][j] <= 0.5 {
                    continue;
                }
                match pair.market.class() {
                    MarketClass::Frequency => {
                        let amount = pair.power * sol.x_price[h];
                        per_scenario[s] += amount;
                        lines.push(SettlementLine {
                            scenario: s,
                            hour: h,
                            market: pair.market,
                            kind: PaymentKind::Availability,
                            amount,
                        });
                    }
                    MarketClass::Spot => {
                        let clearing = scen.clearing_price(pair.market, h);
                        let amount = match pair.market {
                            Market::SpotDischarge => pair.power * clearing,
                            _ => -(pair.power * clearing),
                        };
                        per_scenario[s] += amount;
                        lines.push(SettlementLine {
                            scenario: s,
                            hour: h,
                            market: pair.market,
                            kind: PaymentKind::SpotEnergy,
                            amount,
                        });
                    }
                }
            }
            if sol.w_ok[s][h] > 0.5 {
                let mut amount = 0.0;
                for t in h * sph..(h + 1) * sph {
                    for (j, pair) in inst.structure.pairs.iter().enumerate() {
                        if pair.market == Market::N {
                            amount += scen.c_up[h] * sol.z_dch[s][t][j]
                                + scen.c_down[h] * sol.z_ch[s][t][j];
                        }
                    }
                }
                if amount != 0.0 {
                    per_scenario[s] += amount;
                    lines.push(SettlementLine {
                        scenario: s,
                        hour: h,
                        market: Market::N,
                        kind: PaymentKind::RegulationEnergy,
                        amount,
                    });
                }
            }
        }
    }

    let expected_revenue = per_scenario
        .iter()
        .zip(&inst.scenarios)
        .map(|(v, s)| v * s.probability)
        .sum();
    SettlementReport {
        lines,
        per_scenario,
        expected_revenue,
    }
}
