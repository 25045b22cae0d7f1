//! Exhaustive verification oracle for tiny scheduling instances.
//!
//! Enumerates every per-hour bid assignment and every candidate bid price
//! at the pay-as-bid breakpoints (clearing prices and the edges of the
//! epsilon indifference band), derives acceptance from the side rules
//! (branching on in-band ties), and decides state-of-charge feasibility by
//! exact interval propagation of the reachable SOC set — no simplex, no
//! shared code with the solver it checks.

use thiserror::Error;

use crate::model::{Market, MarketClass, MarketSide, MilpInstance};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration size {size} exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub objective: f64,
    /// Per hour: `None` for no bid, or (pair index, bid price).
    pub bids: Vec<Option<(usize, f64)>>,
    /// Assignments examined.
    pub assignments: u128,
}

/// Default enumeration cap.
pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Acceptance {
    Forced,
    Rejected,
    Free,
}

fn acceptance_of(side: MarketSide, price: f64, clearing: f64, eps: f64) -> Acceptance {
    match side {
        MarketSide::Below => {
            if price < clearing - eps {
                Acceptance::Forced
            } else if price > clearing + eps {
                Acceptance::Rejected
            } else {
                Acceptance::Free
            }
        }
        MarketSide::Above => {
            if price > clearing + eps {
                Acceptance::Forced
            } else if price < clearing - eps {
                Acceptance::Rejected
            } else {
                Acceptance::Free
            }
        }
    }
}

/// Evaluates one scenario under a fixed per-hour (pair, price) assignment,
/// maximizing over in-band acceptance choices and paid-hour subsets.
fn scenario_value(inst: &MilpInstance, s: usize, bids: &[Option<(usize, f64)>]) -> f64 {
    let scen = &inst.scenarios[s];
    let nh = inst.hours();
    let sph = inst.steps_per_hour();
    let eps = inst.structure.epsilon;
    let ilf = inst.params.ilf;

    // Classify acceptance per bid hour.
    let mut forced: Vec<Option<usize>> = vec![None; nh]; // accepted pair per hour
    let mut free_hours: Vec<(usize, usize)> = Vec::new(); // (hour, pair)
    for (h, bid) in bids.iter().enumerate() {
        if let Some((j, price)) = bid {
            let pair = inst.structure.pairs[*j];
            let clearing = scen.clearing_price(pair.market, h);
            match acceptance_of(pair.market.side(), *price, clearing, eps) {
                Acceptance::Forced => forced[h] = Some(*j),
                Acceptance::Rejected => {}
                Acceptance::Free => free_hours.push((h, *j)),
            }
        }
    }

    let mut best = f64::NEG_INFINITY;
    for mask in 0..(1u32 << free_hours.len()) {
        let mut accepted = forced.clone();
        for (bit, &(h, j)) in free_hours.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                accepted[h] = Some(j);
            }
        }

        // Fixed payments from acceptance alone.
        let mut base = 0.0;
        for h in 0..nh {
            let Some(j) = accepted[h] else { continue };
            let pair = inst.structure.pairs[j];
            let price = bids[h].expect("accepted hour has a bid").1;
            match pair.market.class() {
                MarketClass::Frequency => base += pair.power * price,
                MarketClass::Spot => {
                    let clearing = scen.clearing_price(pair.market, h);
                    base += match pair.market {
                        Market::SpotDischarge => pair.power * clearing,
                        _ => -(pair.power * clearing),
                    };
                }
            }
        }

        // Hours that could earn an FCR-N energy payment when served
        // without slack.
        let mut eligible: Vec<(usize, f64)> = Vec::new();
        for h in 0..nh {
            let Some(j) = accepted[h] else { continue };
            if inst.structure.pairs[j].market != Market::N {
                continue;
            }
            let mut pot = 0.0;
            for t in h * sph..(h + 1) * sph {
                let e = inst.mebs[s].entry(j, t);
                pot += scen.c_up[h] * e.e_dch + scen.c_down[h] * e.e_ch;
            }
            if pot > 0.0 {
                eligible.push((h, pot));
            }
        }

        for amask in 0..(1u32 << eligible.len()) {
            let mut gain = 0.0;
            let mut full_hours = vec![false; nh];
            for (bit, &(h, pot)) in eligible.iter().enumerate() {
                if amask >> bit & 1 == 1 {
                    full_hours[h] = true;
                    gain += pot;
                }
            }
            if soc_feasible(inst, s, &accepted, &full_hours, ilf) {
                let v = base + gain;
                if v > best {
                    best = v;
                }
            }
        }
    }
    best
}

/// Exact reachable-interval propagation of the SOC dynamics. Per step the
/// net draw ranges over an interval determined by the accepted pair's
/// energy block (a point when the hour must be served slack-free); the
/// reachable SOC set stays an interval under the linear recursion.
fn soc_feasible(
    inst: &MilpInstance,
    s: usize,
    accepted: &[Option<usize>],
    full_hours: &[bool],
    ilf: f64,
) -> bool {
    let params = &inst.params;
    let sph = inst.steps_per_hour();
    let nt = inst.total_steps();
    let mut lo = params.soc_start;
    let mut hi = params.soc_start;
    for t in 0..nt {
        let h = t / sph;
        let (d_lo, d_hi) = match accepted[h] {
            None => (0.0, 0.0),
            Some(j) => {
                let e = inst.mebs[s].entry(j, t);
                let full = e.e_dch / (1.0 - ilf) - (1.0 - ilf) * e.e_ch;
                if full_hours[h] {
                    (full, full)
                } else {
                    // Flows slide anywhere in [0, E] independently.
                    (-(1.0 - ilf) * e.e_ch, e.e_dch / (1.0 - ilf))
                }
            }
        };
        lo -= d_hi;
        hi -= d_lo;
        lo = lo.max(params.e_min);
        hi = hi.min(params.e_max);
        if lo > hi + 1e-12 {
            return false;
        }
    }
    if params.fixed_end_soc {
        lo <= params.soc_end + 1e-9 && hi >= params.soc_end - 1e-9
    } else {
        true
    }
}

/// Brute-force optimum of a tiny instance.
pub fn brute_force_oracle(inst: &MilpInstance, cap: u128) -> Result<OracleResult, OracleError> {
    let nh = inst.hours();
    let eps = inst.structure.epsilon;
    let (bid_min, bid_max) = (inst.structure.bid_min, inst.structure.bid_max);

    // Candidate prices per (hour, pair): bounds plus every scenario's
    // clearing-price breakpoints, clamped into the bid range.
    let mut options: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nh);
    for h in 0..nh {
        let mut hour_opts = Vec::new();
        for (j, pair) in inst.structure.pairs.iter().enumerate() {
            let mut cands = vec![bid_min, bid_max];
            for scen in &inst.scenarios {
                let p = scen.clearing_price(pair.market, h);
                for c in [p - eps, p, p + eps] {
                    cands.push(c.clamp(bid_min, bid_max));
                }
            }
            cands.sort_by(f64::total_cmp);
            cands.dedup();
            for c in cands {
                hour_opts.push((j, c));
            }
        }
        options.push(hour_opts);
    }

    let size: u128 = options
        .iter()
        .map(|o| o.len() as u128 + 1)
        .product();
    if size > cap {
        return Err(OracleError::CapExceeded { size, cap });
    }

    let mut bids: Vec<Option<(usize, f64)>> = vec![None; nh];
    let mut best_obj = f64::NEG_INFINITY;
    let mut best_bids = bids.clone();
    let mut assignments: u128 = 0;

    // Odometer enumeration: digit nh counts assignments; digit value 0 is
    // "no bid", k > 0 is options[h][k-1].
    let mut digits = vec![0usize; nh];
    loop {
        for h in 0..nh {
            bids[h] = if digits[h] == 0 {
                None
            } else {
                Some(options[h][digits[h] - 1])
            };
        }
        assignments += 1;
        let mut obj = 0.0;
        for s in 0..inst.scenarios.len() {
            obj += inst.scenarios[s].probability * scenario_value(inst, s, &bids);
        }
        if obj > best_obj {
            best_obj = obj;
            best_bids = bids.clone();
        }

        // Advance the odometer.
        let mut h = 0;
        loop {
            if h == nh {
                return Ok(OracleResult {
                    objective: best_obj,
                    bids: best_bids,
                    assignments,
                });
            }
            digits[h] += 1;
            if digits[h] <= options[h].len() {
                break;
            }
            digits[h] = 0;
            h += 1;
        }
    }
}
