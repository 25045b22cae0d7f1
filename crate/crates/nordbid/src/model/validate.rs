//! Semantic re-checking of solved schedules against the model definition
//! (not against the LP rows), so solver and formulation bugs cannot hide
//! each other.

use serde::{Deserialize, Serialize};

use super::{instance::MilpInstance, Market, MarketSide, Solution};

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub max_residual: f64,
    /// Total slack over all scenarios/steps/pairs: nonzero totals flag
    /// schedules that promise delivery they do not make.
    pub total_slack: f64,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every model constraint at `TOL` and cross-checks payments and
/// the objective from primal values.
pub fn validate_solution(sol: &Solution, inst: &MilpInstance) -> ValidationReport {
    let mut violations = Vec::new();
    let mut check = |name: String, residual: f64| {
        if residual > TOL {
            violations.push(Violation {
                constraint: name,
                residual,
            });
        }
    };

    let ns = inst.scenarios.len();
    let nh = inst.hours();
    let np = inst.structure.pairs.len();
    let nt = inst.total_steps();
    let sph = inst.steps_per_hour();
    let params = &inst.params;
    let eps = inst.structure.epsilon;

    let binary = |v: f64| (v - v.round()).abs().max(-v.min(0.0)).max(v - 1.0);

    for h in 0..nh {
        let mut bid_sum = 0.0;
        for j in 0..np {
            let b = sol.x_bid[h][j];
            check(format!("binary_bid_h{h}_j{j}"), binary(b));
            bid_sum += b;
        }
        check(format!("onebid_h{h}"), bid_sum - 1.0);
        let p = sol.x_price[h];
        check(
            format!("pricebounds_h{h}"),
            (inst.structure.bid_min - p).max(p - inst.structure.bid_max),
        );
    }

    for s in 0..ns {
        let scen = &inst.scenarios[s];
        for h in 0..nh {
            check(format!("binary_wok_s{s}_h{h}"), binary(sol.w_ok[s][h]));
            for (j, pair) in inst.structure.pairs.iter().enumerate() {
                let acc = sol.x_acc[s][h][j];
                check(format!("binary_acc_s{s}_h{h}_j{j}"), binary(acc));
                check(format!("acclink_s{s}_h{h}_j{j}"), acc - sol.x_bid[h][j]);
                let clearing = scen.clearing_price(pair.market, h);
                let price = sol.x_price[h];
                let accepted = acc > 0.5;
                let bid = sol.x_bid[h][j] > 0.5;
                match pair.market.side() {
                    MarketSide::Below => {
                        if accepted {
                            check(
                                format!("acc_band_s{s}_h{h}_j{j}"),
                                price - clearing - eps,
                            );
                        } else if bid {
                            check(
                                format!("rej_band_s{s}_h{h}_j{j}"),
                                clearing - eps - price,
                            );
                        }
                    }
                    MarketSide::Above => {
                        if accepted {
                            check(
                                format!("acc_band_s{s}_h{h}_j{j}"),
                                clearing - eps - price,
                            );
                        } else if bid {
                            check(
                                format!("rej_band_s{s}_h{h}_j{j}"),
                                price - clearing - eps,
                            );
                        }
                    }
                }
            }
        }
    }

    // Flows, slacks, net-energy law and the SOC recursion.
    let mut total_slack = 0.0;
    for s in 0..ns {
        check(
            format!("soc_start_s{s}"),
            (sol.z_soc[s][0] - params.soc_start).abs(),
        );
        if params.fixed_end_soc {
            check(
                format!("soc_end_s{s}"),
                (sol.z_soc[s][nt] - params.soc_end).abs(),
            );
        }
        for t in 0..nt {
            let h = t / sph;
            let mut dch_sum = 0.0;
            let mut ch_sum = 0.0;
            for j in 0..np {
                let e = inst.mebs[s].entry(j, t);
                let (zd, sd) = (sol.z_dch[s][t][j], sol.s_dch[s][t][j]);
                let (zc, sc) = (sol.z_ch[s][t][j], sol.s_ch[s][t][j]);
                for (name, v) in [("zdch", zd), ("sdch", sd), ("zch", zc), ("sch", sc)] {
                    check(format!("nonneg_{name}_s{s}_t{t}_j{j}"), -v);
                }
                let acc = sol.x_acc[s][h][j];
                check(
                    format!("flowdch_s{s}_t{t}_j{j}"),
                    (zd + sd - e.e_dch * acc).abs(),
                );
                check(
                    format!("flowch_s{s}_t{t}_j{j}"),
                    (zc + sc - e.e_ch * acc).abs(),
                );
                total_slack += sd + sc;
                dch_sum += zd;
                ch_sum += zc;
            }
            let net = dch_sum / (1.0 - params.ilf) - (1.0 - params.ilf) * ch_sum;
            check(format!("defnet_s{s}_t{t}"), (sol.z_net[s][t] - net).abs());
            check(
                format!("recsoc_s{s}_t{t}"),
                (sol.z_soc[s][t + 1] - sol.z_soc[s][t] + sol.z_net[s][t]).abs(),
            );
            check(
                format!("socbounds_s{s}_t{t}"),
                (params.e_min - sol.z_soc[s][t + 1]).max(sol.z_soc[s][t + 1] - params.e_max),
            );
        }
    }

    // Slack gating: a paid hour must be slack-free.
    for s in 0..ns {
        for h in 0..nh {
            if sol.w_ok[s][h] > 0.5 {
                let mut hour_slack = 0.0;
                for t in h * sph..(h + 1) * sph {
                    for j in 0..np {
                        hour_slack += sol.s_dch[s][t][j] + sol.s_ch[s][t][j];
                    }
                }
                check(format!("slackgate_s{s}_h{h}"), hour_slack);
            }
        }
    }

    // Payment identities.
    let mut expected = 0.0;
    for s in 0..ns {
        let scen = &inst.scenarios[s];
        for h in 0..nh {
            let mut hour_total = 0.0;
            for (j, pair) in inst.structure.pairs.iter().enumerate() {
                let acc = sol.x_acc[s][h][j];
                match pair.market.class() {
                    super::MarketClass::Frequency => {
                        let want = pair.power * sol.x_price[h] * acc;
                        check(
                            format!("payasbid_s{s}_h{h}_j{j}"),
                            (sol.w_avail[s][h][j] - want).abs(),
                        );
                        hour_total += sol.w_avail[s][h][j];
                    }
                    super::MarketClass::Spot => {}
                }
            }
            let spot_dch: f64 = inst
                .structure
                .pairs
                .iter()
                .enumerate()
                .filter(|(_, p)| p.market == Market::SpotDischarge)
                .map(|(j, p)| {
                    scen.clearing_price(Market::SpotDischarge, h) * p.power * sol.x_acc[s][h][j]
                })
                .sum();
            check(
                format!("spotdch_s{s}_h{h}"),
                (sol.w_spot_dch[s][h] - spot_dch).abs(),
            );
            let spot_ch: f64 = inst
                .structure
                .pairs
                .iter()
                .enumerate()
                .filter(|(_, p)| p.market == Market::SpotCharge)
                .map(|(j, p)| {
                    scen.clearing_price(Market::SpotCharge, h) * p.power * sol.x_acc[s][h][j]
                })
                .sum();
            check(
                format!("spotch_s{s}_h{h}"),
                (sol.w_spot_ch[s][h] - spot_ch).abs(),
            );

            // Energy payment triplet and gating.
            let mut pot = 0.0;
            for t in h * sph..(h + 1) * sph {
                for (j, pair) in inst.structure.pairs.iter().enumerate() {
                    if pair.market == Market::N {
                        pot += scen.c_up[h] * sol.z_dch[s][t][j]
                            + scen.c_down[h] * sol.z_ch[s][t][j];
                    }
                }
            }
            let wen = sol.w_energy[s][h];
            check(format!("en_nonneg_s{s}_h{h}"), -wen);
            check(
                format!("en_ok_s{s}_h{h}"),
                wen - inst.big_m.energy * sol.w_ok[s][h],
            );
            check(format!("en_sum_s{s}_h{h}"), wen - pot);
            check(
                format!("en_lb_s{s}_h{h}"),
                pot - wen - inst.big_m.energy * (1.0 - sol.w_ok[s][h]),
            );
            if wen > TOL {
                check(format!("en_gate_s{s}_h{h}"), 1.0 - sol.w_ok[s][h]);
            }

            hour_total += sol.w_spot_dch[s][h] - sol.w_spot_ch[s][h] + wen;
            expected += scen.probability * hour_total;
        }
    }
    let rel = (sol.objective - expected).abs() / sol.objective.abs().max(1.0);
    check("objective_recompute".to_string(), rel);

    let max_residual = violations.iter().fold(0.0f64, |m, v| m.max(v.residual));
    ValidationReport {
        violations,
        max_residual,
        total_slack,
    }
}
