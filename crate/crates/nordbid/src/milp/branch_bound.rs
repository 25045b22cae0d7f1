//! Best-first branch-and-bound over binary variables.
//!
//! Nodes are ordered by LP bound (best first) with node id breaking ties,
//! branching picks the most fractional binary (lowest index on ties), and
//! children warm-start from the parent's basis. All choices are
//! deterministic, so identical instances explore identical trees.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lp::{LinearProgram, SolveOptions};
use super::simplex::{solve_lp, Basis, LpStatus, SimplexError};

#[derive(Debug, Error)]
pub enum MilpError {
    #[error(transparent)]
    Lp(#[from] SimplexError),
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("LP subproblem hit the simplex iteration limit")]
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    GapReached,
    Infeasible,
    Limit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: MilpStatus,
    /// Incumbent variable values (empty when `Infeasible`).
    pub values: Vec<f64>,
    /// Incumbent objective (maximization).
    pub objective: f64,
    /// Best proven upper bound.
    pub bound: f64,
    pub node_count: usize,
    /// Line-oriented progress log: node, bound, incumbent, gap.
    pub log: Vec<String>,
}

struct Node {
    bound: f64,
    /// (variable, value) fixings along the path from the root.
    fixings: Vec<(usize, f64)>,
    warm: Option<Basis>,
}

struct NodeKey {
    bound: f64,
    id: usize,
}

impl PartialEq for NodeKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for NodeKey {}
impl PartialOrd for NodeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for NodeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: larger bound wins; older node wins ties.
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Solves a maximization MILP.
pub fn branch_and_bound(
    milp: &LinearProgram,
    opts: &SolveOptions,
) -> Result<SolveResult, MilpError> {
    let started = Instant::now();
    let int_vars = milp.integer_vars();
    let mut work = milp.clone();

    let gap_tol = |incumbent: f64| opts.abs_gap.max(opts.rel_gap * incumbent.abs());

    let mut nodes: BinaryHeap<NodeKey> = BinaryHeap::new();
    let mut store: Vec<Option<Node>> = Vec::new();
    let mut next_id = 0usize;
    let push = |store: &mut Vec<Option<Node>>,
                    nodes: &mut BinaryHeap<NodeKey>,
                    next_id: &mut usize,
                    bound: f64,
                    fixings: Vec<(usize, f64)>,
                    warm: Option<Basis>| {
        let id = *next_id;
        *next_id += 1;
        store.push(Some(Node {
            bound,
            fixings,
            warm,
        }));
        nodes.push(NodeKey { bound, id });
    };

    push(
        &mut store,
        &mut nodes,
        &mut next_id,
        f64::INFINITY,
        Vec::new(),
        None,
    );

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut node_count = 0usize;
    let mut log = Vec::new();
    let mut best_bound = f64::INFINITY;
    let mut limit_hit = false;
    // Depth-first plunge node, processed before anything on the heap so an
    // incumbent appears early and the bound pruning has teeth.
    let mut dive: Option<Node> = None;

    loop {
        let (node, from_heap) = match dive.take() {
            Some(node) => (node, false),
            None => match nodes.pop() {
                Some(key) => (store[key.id].take().expect("node queued once"), true),
                None => break,
            },
        };
        if from_heap {
            // Best-first: the popped bound is the global bound over open
            // nodes (every dive node descends from a weaker parent).
            best_bound = node.bound;
        }
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound <= *inc_obj + gap_tol(*inc_obj) {
                if from_heap {
                    break;
                }
                continue;
            }
        }
        if let Some(limit) = opts.node_limit {
            if node_count >= limit {
                limit_hit = true;
                break;
            }
        }
        if let Some(limit) = opts.time_limit_secs {
            if started.elapsed().as_secs_f64() > limit {
                limit_hit = true;
                break;
            }
        }
        node_count += 1;

        // Apply this node's bound fixings.
        work.lower.copy_from_slice(&milp.lower);
        work.upper.copy_from_slice(&milp.upper);
        for &(j, v) in &node.fixings {
            work.lower[j] = v;
            work.upper[j] = v;
        }

        let out = solve_lp(&work, node.warm.as_ref())?;
        match out.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(MilpError::Unbounded),
            LpStatus::IterLimit => return Err(MilpError::IterationLimit),
            LpStatus::Optimal => {}
        }
        let lp_obj = out.objective;
        if let Some((inc_obj, _)) = &incumbent {
            if lp_obj <= *inc_obj + gap_tol(*inc_obj) {
                continue;
            }
        }

        // Most fractional binary, lowest index on ties.
        let mut branch: Option<(usize, f64, f64)> = None;
        for &j in &int_vars {
            let v = out.values[j];
            let frac = v - v.floor();
            let dist = frac.min(1.0 - frac);
            if dist > opts.int_tol {
                let score = (frac - 0.5).abs();
                let better = match branch {
                    None => true,
                    Some((_, best_score, _)) => score < best_score - 1e-15,
                };
                if better {
                    branch = Some((j, score, frac));
                }
            }
        }

        // Rounding repair while no incumbent exists: fix near-integral
        // binaries at their rounded value and fractional ones at their
        // floor, then let the LP re-optimize the continuous variables. A
        // feasible repair gives pruning (and limit exits) a schedule to
        // fall back on long before the dive bottoms out.
        if branch.is_some() && incumbent.is_none() && (node_count == 1 || node_count % 64 == 0) {
            for &j in &int_vars {
                let v = out.values[j];
                let rounded = v.round();
                let fixed = if (v - rounded).abs() <= opts.int_tol {
                    rounded
                } else {
                    v.floor()
                };
                work.lower[j] = fixed;
                work.upper[j] = fixed;
            }
            if let Ok(repair) = solve_lp(&work, Some(&out.basis)) {
                if repair.status == LpStatus::Optimal {
                    let mut values = repair.values;
                    for &j in &int_vars {
                        values[j] = values[j].round();
                    }
                    let obj = milp.objective_value(&values);
                    log.push(format!(
                        "node {node_count} bound {best_bound:.6} repair incumbent {obj:.6}"
                    ));
                    incumbent = Some((obj, values));
                }
            }
        }

        match branch {
            None => {
                // Integral: round and accept as incumbent if improving.
                let mut values = out.values.clone();
                for &j in &int_vars {
                    values[j] = values[j].round();
                }
                let obj = milp.objective_value(&values);
                let improved = incumbent
                    .as_ref()
                    .map(|(inc, _)| obj > *inc)
                    .unwrap_or(true);
                if improved {
                    log.push(format!(
                        "node {node_count} bound {best_bound:.6} incumbent {obj:.6} gap {:.3e}",
                        (best_bound - obj).max(0.0)
                    ));
                    incumbent = Some((obj, values));
                }
            }
            Some((j, _, frac)) => {
                let mut down = node.fixings.clone();
                down.push((j, 0.0));
                let mut up = node.fixings.clone();
                up.push((j, 1.0));
                // Plunge toward the value the relaxation leans to; the
                // sibling goes on the heap for best-first backtracking.
                let (plunge, sibling) = if frac >= 0.5 { (up, down) } else { (down, up) };
                push(
                    &mut store,
                    &mut nodes,
                    &mut next_id,
                    lp_obj,
                    sibling,
                    Some(out.basis.clone()),
                );
                dive = Some(Node {
                    bound: lp_obj,
                    fixings: plunge,
                    warm: Some(out.basis),
                });
            }
        }
    }

    match incumbent {
        Some((obj, values)) => {
            let bound = if nodes.is_empty() && !limit_hit {
                obj
            } else {
                best_bound.max(obj)
            };
            let status = if limit_hit {
                MilpStatus::Limit
            } else if bound - obj <= opts.abs_gap.max(1e-9) {
                MilpStatus::Optimal
            } else if bound - obj <= gap_tol(obj) {
                MilpStatus::GapReached
            } else {
                MilpStatus::Limit
            };
            Ok(SolveResult {
                status,
                values,
                objective: obj,
                bound,
                node_count,
                log,
            })
        }
        None => Ok(SolveResult {
            status: if limit_hit {
                MilpStatus::Limit
            } else {
                MilpStatus::Infeasible
            },
            values: Vec::new(),
            objective: f64::NEG_INFINITY,
            bound: best_bound,
            node_count,
            log,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::lp::{LinearProgram, RowSense};

    #[test]
    fn integral_relaxation_solves_at_root() {
        // max x + y, x <= 1, y <= 1 with integer x, y: LP optimum is
        // already integral.
        let mut lp = LinearProgram::new();
        let x = lp.add_binary("x", 1.0);
        let y = lp.add_binary("y", 1.0);
        lp.add_row("rx", vec![(x, 1.0)], RowSense::Le, 1.0);
        lp.add_row("ry", vec![(y, 1.0)], RowSense::Le, 1.0);
        let res = branch_and_bound(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(res.status, MilpStatus::Optimal);
        assert_eq!(res.node_count, 1);
        assert!((res.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn two_item_knapsack_exact() {
        // max 10a + 6b s.t. 5a + 4b <= 8: enumeration gives a=1, b=0 -> 10.
        let mut lp = LinearProgram::new();
        let a = lp.add_binary("a", 10.0);
        let b = lp.add_binary("b", 6.0);
        lp.add_row("w", vec![(a, 5.0), (b, 4.0)], RowSense::Le, 8.0);
        let res = branch_and_bound(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(res.status, MilpStatus::Optimal);
        assert!((res.objective - 10.0).abs() < 1e-9);
        assert!((res.values[a] - 1.0).abs() < 1e-9);
        assert!(res.values[b].abs() < 1e-9);
    }

    #[test]
    fn knapsacks_match_enumeration() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let n = rng.gen_range(3..9);
            let profits: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..20.0)).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..10.0)).collect();
            let cap = rng.gen_range(5.0..30.0);
            let mut lp = LinearProgram::new();
            for (j, &p) in profits.iter().enumerate() {
                lp.add_binary(format!("x{j}"), p);
            }
            lp.add_row(
                "cap",
                weights.iter().copied().enumerate().collect(),
                RowSense::Le,
                cap,
            );
            let res = branch_and_bound(&lp, &SolveOptions::default()).unwrap();

            // Exhaustive enumeration oracle.
            let mut best = 0.0f64;
            for mask in 0..(1u32 << n) {
                let mut w = 0.0;
                let mut p = 0.0;
                for j in 0..n {
                    if mask >> j & 1 == 1 {
                        w += weights[j];
                        p += profits[j];
                    }
                }
                if w <= cap {
                    best = best.max(p);
                }
            }
            assert!(
                (res.objective - best).abs() <= 1e-6 * best.max(1.0),
                "B&B {} vs enumeration {}",
                res.objective,
                best
            );
            assert_eq!(res.status, MilpStatus::Optimal);
        }
    }

    #[test]
    fn infeasible_milp_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_binary("x", 1.0);
        lp.add_row("lo", vec![(x, 1.0)], RowSense::Ge, 2.0);
        let res = branch_and_bound(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(res.status, MilpStatus::Infeasible);
    }

    #[test]
    fn node_limit_yields_limit_status() {
        // A knapsack needing branching, with node_limit 1: root solve only.
        let mut lp = LinearProgram::new();
        let a = lp.add_binary("a", 3.0);
        let b = lp.add_binary("b", 2.0);
        let c = lp.add_binary("c", 2.0);
        lp.add_row(
            "w",
            vec![(a, 2.0), (b, 1.5), (c, 1.5)],
            RowSense::Le,
            2.5,
        );
        let opts = SolveOptions {
            node_limit: Some(1),
            ..SolveOptions::default()
        };
        let res = branch_and_bound(&lp, &opts).unwrap();
        assert_eq!(res.status, MilpStatus::Limit);
        assert!(res.bound >= res.objective - 1e-9);
    }

    #[test]
    fn deterministic_node_counts() {
        let mut lp = LinearProgram::new();
        for j in 0..6 {
            lp.add_binary(format!("x{j}"), 1.0 + j as f64 * 0.3);
        }
        lp.add_row(
            "cap",
            (0..6).map(|j| (j, 1.0 + (j % 3) as f64)).collect(),
            RowSense::Le,
            5.0,
        );
        let a = branch_and_bound(&lp, &SolveOptions::default()).unwrap();
        let b = branch_and_bound(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(a.node_count, b.node_count);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn bound_dominates_incumbent_everywhere() {
        let mut lp = LinearProgram::new();
        for j in 0..5 {
            lp.add_binary(format!("x{j}"), (j + 1) as f64);
        }
        lp.add_row(
            "cap",
            (0..5).map(|j| (j, (5 - j) as f64)).collect(),
            RowSense::Le,
            7.0,
        );
        let res = branch_and_bound(&lp, &SolveOptions::default()).unwrap();
        assert!(res.bound >= res.objective - 1e-8);
    }
}
