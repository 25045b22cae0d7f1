//! Translates battery parameters, bid structure, scenarios and
//! market-energy blocks into a mixed-integer program.
//!
//! Acceptance coupling is encoded in both directions: the usual big-M rows
//! force acceptance when the bid price clears strictly, and converse rows
//! forbid acceptance when it does not, leaving only an epsilon-wide
//! indifference band at the clearing price. When the price bounds make
//! acceptance certain (or impossible) for a (scenario, hour, pair), the
//! binary is tied to the bid variable (or fixed to zero) instead, which
//! keeps relaxations tight and trees small.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::droop::MebTable;
use crate::milp::LinearProgram;
use crate::milp::RowSense;

use super::{
    validate_scenarios, BessParams, BidStructure, Market, MarketSide, ModelError, Scenario,
    Solution,
};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("need one MEB table per scenario: {scenarios} scenarios, {mebs} tables")]
    MissingMeb { scenarios: usize, mebs: usize },
    #[error("MEB table {scenario} inconsistent with instance: {reason}")]
    MebMismatch { scenario: usize, reason: String },
    #[error("unbounded input: {0}")]
    Unbounded(String),
}

/// Per-constraint-family big-M constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BigMValues {
    /// Acceptance-link rows (price vs. clearing comparisons).
    pub acceptance: f64,
    /// Availability-payment linearization.
    pub availability: f64,
    /// Hourly slack gating of `w_ok`.
    pub slack: f64,
    /// FCR-N energy-payment linearization.
    pub energy: f64,
}

/// Tight per-family big-M constants from the price bounds and the maximum
/// hourly energy any single pair can move.
pub fn compute_big_m(
    structure: &BidStructure,
    scenarios: &[Scenario],
    params: &BessParams,
) -> Result<BigMValues, InstanceError> {
    if !structure.bid_max.is_finite() || !structure.bid_min.is_finite() {
        return Err(InstanceError::Unbounded("bid price bounds".into()));
    }
    let mut max_clearing = 0.0f64;
    let mut max_c = 0.0f64;
    for s in scenarios {
        for prices in s.clearing_prices.values() {
            for &p in prices {
                if !p.is_finite() {
                    return Err(InstanceError::Unbounded("clearing price".into()));
                }
                max_clearing = max_clearing.max(p);
            }
        }
        for &c in s.c_up.iter().chain(&s.c_down) {
            if !c.is_finite() {
                return Err(InstanceError::Unbounded("energy price".into()));
            }
            max_c = max_c.max(c);
        }
    }
    let mut max_freq_power = 0.0f64;
    let mut hourly_cap = 0.0f64;
    for pair in &structure.pairs {
        if !pair.power.is_finite() {
            return Err(InstanceError::Unbounded("pair size".into()));
        }
        // A frequency pair moves at most p MWh over an hour (activation
        // fraction <= 1); a spot pair moves its quantity exactly.
        hourly_cap = hourly_cap.max(pair.power);
        if pair.market.class() == super::MarketClass::Frequency {
            max_freq_power = max_freq_power.max(pair.power);
        }
    }
    let _ = params;
    Ok(BigMValues {
        acceptance: max_clearing + structure.bid_max + structure.epsilon,
        availability: max_freq_power * structure.bid_max,
        slack: hourly_cap,
        energy: max_c * hourly_cap,
    })
}

/// The assembled program plus the index maps needed to read solutions back
/// out and to drive validation, settlement and the exhaustive oracle.
#[derive(Debug, Clone)]
pub struct MilpInstance {
    pub lp: LinearProgram,
    pub params: BessParams,
    pub structure: BidStructure,
    pub scenarios: Vec<Scenario>,
    pub mebs: Vec<MebTable>,
    pub big_m: BigMValues,
    // Variable index maps.
    pub x_bid: Vec<Vec<usize>>,
    pub x_price: Vec<usize>,
    pub x_acc: Vec<Vec<Vec<usize>>>,
    pub z_dch: Vec<Vec<Vec<usize>>>,
    pub z_ch: Vec<Vec<Vec<usize>>>,
    pub s_dch: Vec<Vec<Vec<usize>>>,
    pub s_ch: Vec<Vec<Vec<usize>>>,
    pub z_net: Vec<Vec<usize>>,
    pub z_soc: Vec<Vec<usize>>,
    pub w_ok: Vec<Vec<usize>>,
    pub w_avail: Vec<Vec<Vec<Option<usize>>>>,
    pub w_spot_dch: Vec<Vec<usize>>,
    pub w_spot_ch: Vec<Vec<usize>>,
    pub w_energy: Vec<Vec<usize>>,
}

impl MilpInstance {
    pub fn hours(&self) -> usize {
        self.params.horizon_hours as usize
    }

    pub fn steps_per_hour(&self) -> usize {
        self.params.steps_per_hour()
    }

    pub fn total_steps(&self) -> usize {
        self.params.total_steps()
    }

    pub fn hour_of_step(&self, t: usize) -> usize {
        t / self.steps_per_hour()
    }

    /// Reads a raw variable vector back into the structured solution.
    pub fn extract_solution(&self, values: &[f64]) -> Solution {
        let ns = self.scenarios.len();
        let nh = self.hours();
        let np = self.structure.pairs.len();
        let nt = self.total_steps();
        let get = |idx: usize| values[idx];
        Solution {
            x_bid: (0..nh)
                .map(|h| (0..np).map(|j| get(self.x_bid[h][j])).collect())
                .collect(),
            x_price: (0..nh).map(|h| get(self.x_price[h])).collect(),
            x_acc: (0..ns)
                .map(|s| {
                    (0..nh)
                        .map(|h| (0..np).map(|j| get(self.x_acc[s][h][j])).collect())
                        .collect()
                })
                .collect(),
            z_dch: (0..ns)
                .map(|s| {
                    (0..nt)
                        .map(|t| (0..np).map(|j| get(self.z_dch[s][t][j])).collect())
                        .collect()
                })
                .collect(),
            z_ch: (0..ns)
                .map(|s| {
                    (0..nt)
                        .map(|t| (0..np).map(|j| get(self.z_ch[s][t][j])).collect())
                        .collect()
                })
                .collect(),
            s_dch: (0..ns)
                .map(|s| {
                    (0..nt)
                        .map(|t| (0..np).map(|j| get(self.s_dch[s][t][j])).collect())
                        .collect()
                })
                .collect(),
            s_ch: (0..ns)
                .map(|s| {
                    (0..nt)
                        .map(|t| (0..np).map(|j| get(self.s_ch[s][t][j])).collect())
                        .collect()
                })
                .collect(),
            z_net: (0..ns)
                .map(|s| (0..nt).map(|t| get(self.z_net[s][t])).collect())
                .collect(),
            z_soc: (0..ns)
                .map(|s| (0..=nt).map(|t| get(self.z_soc[s][t])).collect())
                .collect(),
            w_ok: (0..ns)
                .map(|s| (0..nh).map(|h| get(self.w_ok[s][h])).collect())
                .collect(),
            w_avail: (0..ns)
                .map(|s| {
                    (0..nh)
                        .map(|h| {
                            (0..np)
                                .map(|j| self.w_avail[s][h][j].map(get).unwrap_or(0.0))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            w_spot_dch: (0..ns)
                .map(|s| (0..nh).map(|h| get(self.w_spot_dch[s][h])).collect())
                .collect(),
            w_spot_ch: (0..ns)
                .map(|s| (0..nh).map(|h| get(self.w_spot_ch[s][h])).collect())
                .collect(),
            w_energy: (0..ns)
                .map(|s| (0..nh).map(|h| get(self.w_energy[s][h])).collect())
                .collect(),
            objective: self.lp.objective_value(values),
        }
    }
}

/// How the price bounds relate to one clearing price: certain acceptance,
/// certain rejection, or genuinely price-dependent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AcceptanceKind {
    AlwaysIfBid,
    Never,
    PriceDependent,
}

pub(crate) fn classify_acceptance(
    side: MarketSide,
    clearing: f64,
    structure: &BidStructure,
) -> AcceptanceKind {
    let eps = structure.epsilon;
    match side {
        MarketSide::Below => {
            if structure.bid_max < clearing - eps {
                AcceptanceKind::AlwaysIfBid
            } else if structure.bid_min > clearing + eps {
                AcceptanceKind::Never
            } else {
                AcceptanceKind::PriceDependent
            }
        }
        MarketSide::Above => {
            if structure.bid_min > clearing + eps {
                AcceptanceKind::AlwaysIfBid
            } else if structure.bid_max < clearing - eps {
                AcceptanceKind::Never
            } else {
                AcceptanceKind::PriceDependent
            }
        }
    }
}

/// Builds the full mixed-integer program.
pub fn build_instance(
    params: &BessParams,
    structure: &BidStructure,
    scenarios: &[Scenario],
    mebs: &[MebTable],
) -> Result<MilpInstance, InstanceError> {
    params.validate()?;
    structure.validate()?;
    validate_scenarios(scenarios, params.horizon_hours)?;
    if mebs.len() != scenarios.len() {
        return Err(InstanceError::MissingMeb {
            scenarios: scenarios.len(),
            mebs: mebs.len(),
        });
    }
    let nh = params.horizon_hours as usize;
    let sph = params.steps_per_hour();
    let nt = params.total_steps();
    let np = structure.pairs.len();
    for (s, meb) in mebs.iter().enumerate() {
        let mismatch = |reason: String| InstanceError::MebMismatch { scenario: s, reason };
        if meb.pairs.len() != np
            || meb
                .pairs
                .iter()
                .zip(&structure.pairs)
                .any(|(a, b)| a.market != b.market || a.power != b.power)
        {
            return Err(mismatch("pair list differs from bid structure".into()));
        }
        if meb.step_minutes != params.step_minutes {
            return Err(mismatch(format!(
                "step length {} vs {}",
                meb.step_minutes, params.step_minutes
            )));
        }
        if meb.hours != nh {
            return Err(mismatch(format!("{} hours vs horizon {}", meb.hours, nh)));
        }
    }
    let big_m = compute_big_m(structure, scenarios, params)?;
    let ns = scenarios.len();
    let eps = structure.epsilon;
    let ilf = params.ilf;

    let mut lp = LinearProgram::new();

    // --- Variables, in a fixed deterministic order ---
    let x_bid: Vec<Vec<usize>> = (0..nh)
        .map(|h| {
            structure
                .pairs
                .iter()
                .map(|p| lp.add_binary(format!("bid_h{h}_{}", p.label()), 0.0))
                .collect()
        })
        .collect();
    let x_price: Vec<usize> = (0..nh)
        .map(|h| lp.add_var(format!("price_h{h}"), structure.bid_min, structure.bid_max, 0.0))
        .collect();
    let x_acc: Vec<Vec<Vec<usize>>> = (0..ns)
        .map(|s| {
            (0..nh)
                .map(|h| {
                    structure
                        .pairs
                        .iter()
                        .map(|p| lp.add_binary(format!("acc_s{s}_h{h}_{}", p.label()), 0.0))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut z_dch = vec![vec![vec![0usize; np]; nt]; ns];
    let mut z_ch = vec![vec![vec![0usize; np]; nt]; ns];
    let mut s_dch = vec![vec![vec![0usize; np]; nt]; ns];
    let mut s_ch = vec![vec![vec![0usize; np]; nt]; ns];
    for s in 0..ns {
        for t in 0..nt {
            for (j, pair) in structure.pairs.iter().enumerate() {
                let e = mebs[s].entry(j, t);
                let lbl = pair.label();
                z_dch[s][t][j] =
                    lp.add_var(format!("zdch_s{s}_t{t}_{lbl}"), 0.0, e.e_dch, 0.0);
                s_dch[s][t][j] =
                    lp.add_var(format!("sdch_s{s}_t{t}_{lbl}"), 0.0, e.e_dch, 0.0);
                z_ch[s][t][j] = lp.add_var(format!("zch_s{s}_t{t}_{lbl}"), 0.0, e.e_ch, 0.0);
                s_ch[s][t][j] = lp.add_var(format!("sch_s{s}_t{t}_{lbl}"), 0.0, e.e_ch, 0.0);
            }
        }
    }
    let z_net: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            (0..nt)
                .map(|t| {
                    lp.add_var(
                        format!("znet_s{s}_t{t}"),
                        f64::NEG_INFINITY,
                        f64::INFINITY,
                        0.0,
                    )
                })
                .collect()
        })
        .collect();
    let z_soc: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            (0..=nt)
                .map(|t| {
                    let (lo, up) = if t == 0 {
                        (params.soc_start, params.soc_start)
                    } else if t == nt && params.fixed_end_soc {
                        (params.soc_end, params.soc_end)
                    } else {
                        (params.e_min, params.e_max)
                    };
                    lp.add_var(format!("soc_s{s}_t{t}"), lo, up, 0.0)
                })
                .collect()
        })
        .collect();
    let w_ok: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            (0..nh)
                .map(|h| lp.add_binary(format!("wok_s{s}_h{h}"), 0.0))
                .collect()
        })
        .collect();
    let w_avail: Vec<Vec<Vec<Option<usize>>>> = (0..ns)
        .map(|s| {
            let ps = scenarios[s].probability;
            (0..nh)
                .map(|h| {
                    structure
                        .pairs
                        .iter()
                        .map(|pair| {
                            if pair.market.class() == super::MarketClass::Frequency {
                                Some(lp.add_var(
                                    format!("wavail_s{s}_h{h}_{}", pair.label()),
                                    0.0,
                                    pair.power * structure.bid_max.max(0.0),
                                    ps,
                                ))
                            } else {
                                None
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let w_spot_dch: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            let ps = scenarios[s].probability;
            (0..nh)
                .map(|h| lp.add_var(format!("wsdch_s{s}_h{h}"), 0.0, f64::INFINITY, ps))
                .collect()
        })
        .collect();
    let w_spot_ch: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            let ps = scenarios[s].probability;
            (0..nh)
                .map(|h| lp.add_var(format!("wsch_s{s}_h{h}"), 0.0, f64::INFINITY, -ps))
                .collect()
        })
        .collect();
    let w_energy: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            let ps = scenarios[s].probability;
            (0..nh)
                .map(|h| lp.add_var(format!("wen_s{s}_h{h}"), 0.0, f64::INFINITY, ps))
                .collect()
        })
        .collect();

    // --- Constraints ---
    // At most one bid per hour.
    for h in 0..nh {
        lp.add_row(
            format!("onebid_h{h}"),
            (0..np).map(|j| (x_bid[h][j], 1.0)).collect(),
            RowSense::Le,
            1.0,
        );
    }

    // Acceptance coupling.
    let m_acc = big_m.acceptance;
    for s in 0..ns {
        for h in 0..nh {
            for (j, pair) in structure.pairs.iter().enumerate() {
                let clearing = scenarios[s].clearing_price(pair.market, h);
                let lbl = pair.label();
                let acc = x_acc[s][h][j];
                let bid = x_bid[h][j];
                let price = x_price[h];
                match classify_acceptance(pair.market.side(), clearing, structure) {
                    AcceptanceKind::AlwaysIfBid => {
                        lp.add_row(
                            format!("accfix_s{s}_h{h}_{lbl}"),
                            vec![(acc, 1.0), (bid, -1.0)],
                            RowSense::Eq,
                            0.0,
                        );
                    }
                    AcceptanceKind::Never => {
                        lp.upper[acc] = 0.0;
                    }
                    AcceptanceKind::PriceDependent => {
                        lp.add_row(
                            format!("acclink_s{s}_h{h}_{lbl}"),
                            vec![(acc, 1.0), (bid, -1.0)],
                            RowSense::Le,
                            0.0,
                        );
                        match pair.market.side() {
                            MarketSide::Below => {
                                // Bid strictly below the clearing price must
                                // be accepted.
                                lp.add_row(
                                    format!("forceacc_s{s}_h{h}_{lbl}"),
                                    vec![(bid, clearing), (price, -1.0), (acc, -m_acc)],
                                    RowSense::Le,
                                    eps,
                                );
                                // Accepted bid cannot price above the band.
                                lp.add_row(
                                    format!("forcerej_s{s}_h{h}_{lbl}"),
                                    vec![(price, 1.0), (acc, m_acc)],
                                    RowSense::Le,
                                    clearing + eps + m_acc,
                                );
                            }
                            MarketSide::Above => {
                                lp.add_row(
                                    format!("forceacc_s{s}_h{h}_{lbl}"),
                                    vec![(price, 1.0), (acc, -m_acc), (bid, m_acc)],
                                    RowSense::Le,
                                    clearing + eps + m_acc,
                                );
                                lp.add_row(
                                    format!("forcerej_s{s}_h{h}_{lbl}"),
                                    vec![(acc, m_acc), (price, -1.0)],
                                    RowSense::Le,
                                    m_acc - clearing + eps,
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    // Flow / slack balances against the accepted pair's energy blocks.
    for s in 0..ns {
        for t in 0..nt {
            let h = t / sph;
            for (j, pair) in structure.pairs.iter().enumerate() {
                let e = mebs[s].entry(j, t);
                let lbl = pair.label();
                if e.e_dch > 0.0 {
                    lp.add_row(
                        format!("flowdch_s{s}_t{t}_{lbl}"),
                        vec![
                            (z_dch[s][t][j], 1.0),
                            (s_dch[s][t][j], 1.0),
                            (x_acc[s][h][j], -e.e_dch),
                        ],
                        RowSense::Eq,
                        0.0,
                    );
                }
                if e.e_ch > 0.0 {
                    lp.add_row(
                        format!("flowch_s{s}_t{t}_{lbl}"),
                        vec![
                            (z_ch[s][t][j], 1.0),
                            (s_ch[s][t][j], 1.0),
                            (x_acc[s][h][j], -e.e_ch),
                        ],
                        RowSense::Eq,
                        0.0,
                    );
                }
            }
        }
    }

    // Net storage draw and the SOC recursion.
    for s in 0..ns {
        for t in 0..nt {
            let mut coeffs: Vec<(usize, f64)> = vec![(z_net[s][t], -1.0)];
            for j in 0..np {
                let e = mebs[s].entry(j, t);
                if e.e_dch > 0.0 {
                    coeffs.push((z_dch[s][t][j], 1.0 / (1.0 - ilf)));
                }
                if e.e_ch > 0.0 {
                    coeffs.push((z_ch[s][t][j], -(1.0 - ilf)));
                }
            }
            lp.add_row(format!("defnet_s{s}_t{t}"), coeffs, RowSense::Eq, 0.0);
            lp.add_row(
                format!("recsoc_s{s}_t{t}"),
                vec![
                    (z_soc[s][t + 1], 1.0),
                    (z_soc[s][t], -1.0),
                    (z_net[s][t], 1.0),
                ],
                RowSense::Eq,
                0.0,
            );
        }
    }

    // Hourly slack gating for the energy-payment switch.
    for s in 0..ns {
        for h in 0..nh {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for t in h * sph..(h + 1) * sph {
                for j in 0..np {
                    let e = mebs[s].entry(j, t);
                    if e.e_dch > 0.0 {
                        coeffs.push((s_dch[s][t][j], 1.0));
                    }
                    if e.e_ch > 0.0 {
                        coeffs.push((s_ch[s][t][j], 1.0));
                    }
                }
            }
            coeffs.push((w_ok[s][h], big_m.slack));
            lp.add_row(
                format!("slackcap_s{s}_h{h}"),
                coeffs,
                RowSense::Le,
                big_m.slack,
            );
        }
    }

    // Pay-as-bid availability linearization (plus a validity cut bounding
    // the payment by the clearing band, which strengthens the relaxation).
    let m_av = big_m.availability;
    for s in 0..ns {
        for h in 0..nh {
            for (j, pair) in structure.pairs.iter().enumerate() {
                let Some(w) = w_avail[s][h][j] else { continue };
                let lbl = pair.label();
                let acc = x_acc[s][h][j];
                let price = x_price[h];
                lp.add_row(
                    format!("avacc_s{s}_h{h}_{lbl}"),
                    vec![(w, 1.0), (acc, -m_av)],
                    RowSense::Le,
                    0.0,
                );
                lp.add_row(
                    format!("avprice_s{s}_h{h}_{lbl}"),
                    vec![(w, 1.0), (price, -pair.power)],
                    RowSense::Le,
                    0.0,
                );
                lp.add_row(
                    format!("avlb_s{s}_h{h}_{lbl}"),
                    vec![(price, pair.power), (w, -1.0), (acc, m_av)],
                    RowSense::Le,
                    m_av,
                );
                let clearing = scenarios[s].clearing_price(pair.market, h);
                lp.add_row(
                    format!("avcut_s{s}_h{h}_{lbl}"),
                    vec![(w, 1.0), (acc, -pair.power * (clearing + eps))],
                    RowSense::Le,
                    0.0,
                );
            }
        }
    }

    // Pay-as-clear spot payments.
    for s in 0..ns {
        for h in 0..nh {
            let mut dch_terms: Vec<(usize, f64)> = vec![(w_spot_dch[s][h], 1.0)];
            let mut ch_terms: Vec<(usize, f64)> = vec![(w_spot_ch[s][h], 1.0)];
            for (j, pair) in structure.pairs.iter().enumerate() {
                match pair.market {
                    Market::SpotDischarge => {
                        let p = scenarios[s].clearing_price(Market::SpotDischarge, h);
                        dch_terms.push((x_acc[s][h][j], -p * pair.power));
                    }
                    Market::SpotCharge => {
                        let p = scenarios[s].clearing_price(Market::SpotCharge, h);
                        ch_terms.push((x_acc[s][h][j], -p * pair.power));
                    }
                    _ => {}
                }
            }
            lp.add_row(format!("spotdch_s{s}_h{h}"), dch_terms, RowSense::Eq, 0.0);
            lp.add_row(format!("spotch_s{s}_h{h}"), ch_terms, RowSense::Eq, 0.0);
        }
    }

    // FCR-N energy payments, gated on slack-free delivery.
    let m_en = big_m.energy;
    for s in 0..ns {
        for h in 0..nh {
            let c_up = scenarios[s].c_up[h];
            let c_down = scenarios[s].c_down[h];
            let mut sum_terms: Vec<(usize, f64)> = Vec::new();
            // Tightest valid gate constant: at most one pair clears, so the
            // hour's payment never exceeds the best single pair's deliverable
            // energy value.
            let mut m_hour = 0.0f64;
            for (j, pair) in structure.pairs.iter().enumerate() {
                if pair.market != Market::N {
                    continue;
                }
                let mut pair_value = 0.0;
                for t in h * sph..(h + 1) * sph {
                    let e = mebs[s].entry(j, t);
                    pair_value += c_up * e.e_dch + c_down * e.e_ch;
                    if e.e_dch > 0.0 && c_up > 0.0 {
                        sum_terms.push((z_dch[s][t][j], c_up));
                    }
                    if e.e_ch > 0.0 && c_down > 0.0 {
                        sum_terms.push((z_ch[s][t][j], c_down));
                    }
                }
                m_hour = m_hour.max(pair_value);
            }
            let m_en = m_en.min(m_hour);
            let w = w_energy[s][h];
            lp.upper[w] = m_en;
            lp.add_row(
                format!("enok_s{s}_h{h}"),
                vec![(w, 1.0), (w_ok[s][h], -m_en)],
                RowSense::Le,
                0.0,
            );
            lp.add_row(
                format!("ensum_s{s}_h{h}"),
                {
                    let mut v = vec![(w, 1.0)];
                    v.extend(sum_terms.iter().map(|&(j, c)| (j, -c)));
                    v
                },
                RowSense::Le,
                0.0,
            );
            let mut lb = sum_terms;
            lb.push((w, -1.0));
            lb.push((w_ok[s][h], m_en));
            lp.add_row(format!("enlb_s{s}_h{h}"), lb, RowSense::Le, m_en);
        }
    }

    Ok(MilpInstance {
        lp,
        params: params.clone(),
        structure: structure.clone(),
        scenarios: scenarios.to_vec(),
        mebs: mebs.to_vec(),
        big_m,
        x_bid,
        x_price,
        x_acc,
        z_dch,
        z_ch,
        s_dch,
        s_ch,
        z_net,
        z_soc,
        w_ok,
        w_avail,
        w_spot_dch,
        w_spot_ch,
        w_energy,
    })
}
