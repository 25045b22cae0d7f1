//! Bounded-variable revised primal simplex with an LU-factorized basis,
//! product-form eta updates and a composite phase-1 for feasibility.
//!
//! Each constraint row gets one logical variable (`a_i x + s_i = b_i` with
//! sign bounds encoding the row sense), so a basis always exists and warm
//! starts from a parent node's basis are cheap. Phase 1 minimizes the total
//! bound violation of basic variables; phase 2 optimizes the real
//! objective. Dantzig pricing with a Bland's-rule fallback after a long
//! degenerate stall keeps the method cycle-proof.

use thiserror::Error;

use super::lp::{LinearProgram, RowSense};

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("basis factorization became singular at pivot {pivots} (row {row})")]
    SingularBasis { pivots: usize, row: usize },
    #[error("no acceptable pivot element (best |w_r| = {best:.3e}) at pivot {pivots}")]
    TinyPivot { best: f64, pivots: usize },
    #[error("invalid problem: {0}")]
    BadProblem(#[from] super::lp::LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

/// Basis snapshot for warm starts: which variables (structural then
/// logical) are basic, and the bound each nonbasic variable rests at.
#[derive(Debug, Clone)]
pub struct Basis {
    pub basic: Vec<usize>,
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Objective of the original maximization problem (finite only when
    /// `Optimal`).
    pub objective: f64,
    /// Structural variable values.
    pub values: Vec<f64>,
    /// Row duals under the maximization convention.
    pub duals: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Free variable resting at zero.
    FreeZero,
}

const PIVOT_TOL: f64 = 1e-9;
const DJ_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 128;
const DEGENERATE_STALL: usize = 10_000;

struct LuFactor {
    m: usize,
    /// Row-major combined L (unit diagonal, below) and U (on/above).
    lu: Vec<f64>,
    /// Row i of the permuted matrix is row `perm[i]` of the original.
    perm: Vec<usize>,
}

impl LuFactor {
    fn factorize(m: usize, b_cols: &[Vec<f64>]) -> Option<LuFactor> {
        let mut lu = vec![0.0; m * m];
        for (j, col) in b_cols.iter().enumerate() {
            for i in 0..m {
                lu[i * m + j] = col[i];
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            // Partial pivoting on column k.
            let mut best = k;
            let mut best_val = lu[k * m + k].abs();
            for i in k + 1..m {
                let v = lu[i * m + k].abs();
                if v > best_val {
                    best_val = v;
                    best = i;
                }
            }
            if best_val < 1e-12 {
                return None;
            }
            if best != k {
                perm.swap(k, best);
                for j in 0..m {
                    lu.swap(k * m + j, best * m + j);
                }
            }
            let pivot = lu[k * m + k];
            for i in k + 1..m {
                let factor = lu[i * m + k] / pivot;
                lu[i * m + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..m {
                        lu[i * m + j] -= factor * lu[k * m + j];
                    }
                }
            }
        }
        Some(LuFactor { m, lu, perm })
    }

    /// Solves B y = v in place.
    fn solve(&self, v: &mut [f64]) {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            y[i] = v[self.perm[i]];
        }
        // Forward substitution with unit-diagonal L.
        for i in 1..m {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * m + j] * y[j];
            }
            y[i] = s;
        }
        // Back substitution with U.
        for i in (0..m).rev() {
            let mut s = y[i];
            for j in i + 1..m {
                s -= self.lu[i * m + j] * y[j];
            }
            y[i] = s / self.lu[i * m + i];
        }
        v.copy_from_slice(&y);
    }

    /// Solves B^T y = v in place.
    fn solve_transpose(&self, v: &mut [f64]) {
        let m = self.m;
        let mut z = v.to_vec();
        // U^T is lower triangular: forward substitution.
        for i in 0..m {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[j * m + i] * z[j];
            }
            z[i] = s / self.lu[i * m + i];
        }
        // L^T is unit upper triangular: back substitution.
        for i in (0..m).rev() {
            let mut s = z[i];
            for j in i + 1..m {
                s -= self.lu[j * m + i] * z[j];
            }
            z[i] = s;
        }
        for i in 0..m {
            v[self.perm[i]] = z[i];
        }
    }
}

/// Solves the LP relaxation of `lp` (integrality flags ignored),
/// maximizing the objective. `warm` supplies an optional starting basis.
pub fn solve_lp(lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpOutcome, SimplexError> {
    lp.validate()?;
    let n = lp.n_vars();
    let m = lp.n_rows();
    let total = n + m;

    // Sparse columns, structural variables only.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = vec![0.0; m];
    let mut logical_lo = vec![0.0; m];
    let mut logical_up = vec![0.0; m];
    for (i, row) in lp.rows.iter().enumerate() {
        rhs[i] = row.rhs;
        for &(j, v) in &row.coeffs {
            cols[j].push((i, v));
        }
        match row.sense {
            RowSense::Le => {
                logical_lo[i] = 0.0;
                logical_up[i] = f64::INFINITY;
            }
            RowSense::Ge => {
                logical_lo[i] = f64::NEG_INFINITY;
                logical_up[i] = 0.0;
            }
            RowSense::Eq => {
                logical_lo[i] = 0.0;
                logical_up[i] = 0.0;
            }
        }
    }

    let mut lo = Vec::with_capacity(total);
    let mut up = Vec::with_capacity(total);
    lo.extend_from_slice(&lp.lower);
    up.extend_from_slice(&lp.upper);
    lo.extend_from_slice(&logical_lo);
    up.extend_from_slice(&logical_up);

    let mut cost = vec![0.0; total];
    for j in 0..n {
        cost[j] = -lp.objective[j];
    }

    let column = |j: usize| -> &[(usize, f64)] {
        debug_assert!(j < n);
        &cols[j]
    };

    let feas_tol = 1e-8;

    // Initial statuses and basis.
    let mut basic: Vec<usize>;
    let mut status = vec![VarStatus::AtLower; total];
    let nonbasic_rest = |j: usize, at_upper: bool| -> VarStatus {
        if at_upper && up[j].is_finite() {
            VarStatus::AtUpper
        } else if lo[j].is_finite() {
            VarStatus::AtLower
        } else if up[j].is_finite() {
            VarStatus::AtUpper
        } else {
            VarStatus::FreeZero
        }
    };
    let mut use_warm = false;
    if let Some(w) = warm {
        if w.basic.len() == m && w.at_upper.len() == total {
            let mut seen = vec![false; total];
            use_warm = w.basic.iter().all(|&j| {
                let fresh = j < total && !seen[j];
                if fresh {
                    seen[j] = true;
                }
                fresh
            });
            if use_warm {
                basic = w.basic.clone();
                for j in 0..total {
                    status[j] = if seen[j] {
                        VarStatus::Basic
                    } else {
                        nonbasic_rest(j, w.at_upper[j])
                    };
                }
            } else {
                basic = Vec::new();
            }
        } else {
            basic = Vec::new();
        }
    } else {
        basic = Vec::new();
    }
    if !use_warm {
        basic = (n..total).collect();
        for j in 0..n {
            status[j] = nonbasic_rest(j, false);
        }
        for j in n..total {
            status[j] = VarStatus::Basic;
        }
    }

    // Basis matrix columns (dense) for factorization.
    let basis_columns = |basic: &[usize]| -> Vec<Vec<f64>> {
        basic
            .iter()
            .map(|&j| {
                let mut col = vec![0.0; m];
                if j < n {
                    for &(i, v) in column(j) {
                        col[i] = v;
                    }
                } else {
                    col[j - n] = 1.0;
                }
                col
            })
            .collect()
    };

    let mut factor = match LuFactor::factorize(m, &basis_columns(&basic)) {
        Some(f) => f,
        None => {
            // Warm basis singular: fall back to the logical basis.
            basic = (n..total).collect();
            for j in 0..n {
                status[j] = nonbasic_rest(j, false);
            }
            for j in n..total {
                status[j] = VarStatus::Basic;
            }
            LuFactor::factorize(m, &basis_columns(&basic)).ok_or(SimplexError::SingularBasis {
                pivots: 0,
                row: 0,
            })?
        }
    };
    let mut etas: Vec<(usize, Vec<f64>)> = Vec::new();

    // Nonbasic resting values.
    let mut x = vec![0.0; total];
    let rest_value = |j: usize, st: VarStatus| -> f64 {
        match st {
            VarStatus::AtLower => lo[j],
            VarStatus::AtUpper => up[j],
            VarStatus::FreeZero => 0.0,
            VarStatus::Basic => 0.0,
        }
    };
    for j in 0..total {
        if status[j] != VarStatus::Basic {
            x[j] = rest_value(j, status[j]);
        }
    }

    // FTRAN / BTRAN closures over the factor and eta file.
    let ftran = |factor: &LuFactor, etas: &[(usize, Vec<f64>)], v: &mut [f64]| {
        factor.solve(v);
        for (r, w) in etas {
            let yr = v[*r] / w[*r];
            for i in 0..m {
                if i != *r {
                    v[i] -= w[i] * yr;
                }
            }
            v[*r] = yr;
        }
    };
    let btran = |factor: &LuFactor, etas: &[(usize, Vec<f64>)], v: &mut [f64]| {
        for (r, w) in etas.iter().rev() {
            let mut s = v[*r];
            for i in 0..m {
                if i != *r {
                    s -= w[i] * v[i];
                }
            }
            v[*r] = s / w[*r];
        }
        factor.solve_transpose(v);
    };

    // Recompute basic values from scratch: x_B = B^{-1} (b - N x_N).
    let compute_basics =
        |factor: &LuFactor,
         etas: &[(usize, Vec<f64>)],
         basic: &[usize],
         status: &[VarStatus],
         x: &mut [f64]| {
            let mut r = rhs.clone();
            for j in 0..total {
                if status[j] != VarStatus::Basic && x[j] != 0.0 {
                    if j < n {
                        for &(i, v) in column(j) {
                            r[i] -= v * x[j];
                        }
                    } else {
                        r[j - n] -= x[j];
                    }
                }
            }
            ftran(factor, etas, &mut r);
            for (i, &j) in basic.iter().enumerate() {
                x[j] = r[i];
            }
        };
    compute_basics(&factor, &etas, &basic, &status, &mut x);

    let total_infeasibility = |basic: &[usize], x: &[f64]| -> f64 {
        basic
            .iter()
            .map(|&j| (lo[j] - x[j]).max(0.0) + (x[j] - up[j]).max(0.0))
            .sum()
    };

    let mut phase = if total_infeasibility(&basic, &x) > feas_tol {
        1
    } else {
        2
    };
    let mut iterations = 0usize;
    let mut pivots_since_refactor = 0usize;
    let mut degenerate_streak = 0usize;
    let mut bland = false;
    let max_iterations = 200 * (m + n) + 20_000;

    let final_outcome = |status_out: LpStatus,
                         basic: &[usize],
                         statuses: &[VarStatus],
                         x: &[f64],
                         duals: Vec<f64>,
                         iterations: usize| {
        let values = x[..n].to_vec();
        let objective = lp.objective_value(&values);
        LpOutcome {
            status: status_out,
            objective,
            values,
            duals,
            basis: Basis {
                basic: basic.to_vec(),
                at_upper: statuses
                    .iter()
                    .map(|&s| s == VarStatus::AtUpper)
                    .collect(),
            },
            iterations,
        }
    };

    loop {
        if iterations >= max_iterations {
            return Ok(final_outcome(
                LpStatus::IterLimit,
                &basic,
                &status,
                &x,
                vec![0.0; m],
                iterations,
            ));
        }
        iterations += 1;

        if phase == 1 && total_infeasibility(&basic, &x) <= feas_tol {
            phase = 2;
        }

        // Basic cost vector: phase 1 uses the infeasibility gradient.
        let mut cb = vec![0.0; m];
        for (i, &j) in basic.iter().enumerate() {
            cb[i] = if phase == 1 {
                if x[j] < lo[j] - feas_tol {
                    -1.0
                } else if x[j] > up[j] + feas_tol {
                    1.0
                } else {
                    0.0
                }
            } else {
                cost[j]
            };
        }
        let mut y = cb;
        btran(&factor, &etas, &mut y);

        // Pricing.
        let mut entering: Option<(usize, f64, f64)> = None; // (var, |d|, direction)
        for j in 0..total {
            let st = status[j];
            if st == VarStatus::Basic {
                continue;
            }
            let cj = if phase == 1 { 0.0 } else { cost[j] };
            let yaj: f64 = if j < n {
                column(j).iter().map(|&(i, v)| y[i] * v).sum()
            } else {
                y[j - n]
            };
            let dj = cj - yaj;
            let candidate = match st {
                VarStatus::AtLower if dj < -DJ_TOL => Some((dj.abs(), 1.0)),
                VarStatus::AtUpper if dj > DJ_TOL => Some((dj.abs(), -1.0)),
                VarStatus::FreeZero if dj.abs() > DJ_TOL => {
                    Some((dj.abs(), if dj < 0.0 { 1.0 } else { -1.0 }))
                }
                _ => None,
            };
            if let Some((score, dir)) = candidate {
                let better = match &entering {
                    None => true,
                    Some((bj, bscore, _)) => {
                        if bland {
                            j < *bj
                        } else {
                            score > *bscore
                        }
                    }
                };
                if better {
                    entering = Some((j, score, dir));
                    if bland {
                        // Bland takes the first (lowest-index) candidate.
                        break;
                    }
                }
            }
        }

        let (q, _, dir) = match entering {
            Some(e) => e,
            None => {
                if phase == 1 {
                    // Phase-1 optimum with residual infeasibility.
                    if total_infeasibility(&basic, &x) > feas_tol {
                        return Ok(final_outcome(
                            LpStatus::Infeasible,
                            &basic,
                            &status,
                            &x,
                            vec![0.0; m],
                            iterations,
                        ));
                    }
                    phase = 2;
                    continue;
                }
                // Phase-2 optimum; re-verify primal feasibility in case
                // eta-file drift left a basic outside its bounds.
                if total_infeasibility(&basic, &x) > feas_tol {
                    phase = 1;
                    continue;
                }
                // Report duals for the max problem.
                let duals: Vec<f64> = y.iter().map(|v| -v).collect();
                return Ok(final_outcome(
                    LpStatus::Optimal,
                    &basic,
                    &status,
                    &x,
                    duals,
                    iterations,
                ));
            }
        };

        // Entering column through the basis inverse.
        let mut w = vec![0.0; m];
        if q < n {
            for &(i, v) in column(q) {
                w[i] = v;
            }
        } else {
            w[q - n] = 1.0;
        }
        ftran(&factor, &etas, &mut w);

        // Ratio test. The entering variable moves dir * theta from its
        // resting value; basic i changes by -dir * w_i * theta.
        let own_range = up[q] - lo[q]; // may be infinite
        let mut theta = if own_range.is_finite() {
            own_range
        } else {
            f64::INFINITY
        };
        let mut leaving: Option<(usize, f64, bool)> = None; // (basis pos, ratio, hits_upper)
        for (i, &bj) in basic.iter().enumerate() {
            let alpha = dir * w[i];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            // alpha > 0: x_bj decreases; alpha < 0: x_bj increases. A basic
            // already beyond a bound and moving further away never blocks:
            // clamping it onto the bound would silently break Ax = b (the
            // phase-1 pricing already accounts for its growing violation).
            let (ratio, hits_upper) = if alpha > 0.0 {
                if x[bj] > up[bj] + feas_tol {
                    // Infeasible above: blocks on becoming feasible.
                    ((x[bj] - up[bj]) / alpha, true)
                } else if x[bj] < lo[bj] - feas_tol {
                    continue;
                } else if lo[bj].is_finite() {
                    (((x[bj] - lo[bj]).max(0.0)) / alpha, false)
                } else {
                    continue;
                }
            } else {
                let a = -alpha;
                if x[bj] < lo[bj] - feas_tol {
                    ((lo[bj] - x[bj]) / a, false)
                } else if x[bj] > up[bj] + feas_tol {
                    continue;
                } else if up[bj].is_finite() {
                    (((up[bj] - x[bj]).max(0.0)) / a, true)
                } else {
                    continue;
                }
            };
            let replace = match &leaving {
                _ if ratio > theta => false,
                None => ratio < theta,
                Some((bi, btheta, _)) => {
                    if ratio < btheta - 1e-12 {
                        true
                    } else if ratio <= btheta + 1e-12 {
                        if bland {
                            basic[i] < basic[*bi]
                        } else {
                            w[i].abs() > w[*bi].abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if replace {
                theta = ratio.max(0.0);
                leaving = Some((i, theta, hits_upper));
            }
        }

        match leaving {
            None => {
                if theta.is_infinite() {
                    if phase == 1 {
                        // Cannot happen for a bounded phase-1 objective with
                        // blocking infeasible basics; treat as breakdown.
                        return Err(SimplexError::TinyPivot {
                            best: 0.0,
                            pivots: pivots_since_refactor,
                        });
                    }
                    return Ok(final_outcome(
                        LpStatus::Unbounded,
                        &basic,
                        &status,
                        &x,
                        vec![0.0; m],
                        iterations,
                    ));
                }
                // Bound flip: entering runs to its opposite bound.
                for (i, &bj) in basic.iter().enumerate() {
                    x[bj] -= dir * w[i] * theta;
                }
                x[q] += dir * theta;
                status[q] = if dir > 0.0 {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                degenerate_streak = 0;
                continue;
            }
            Some((r, step, hits_upper)) => {
                if w[r].abs() < PIVOT_TOL {
                    return Err(SimplexError::TinyPivot {
                        best: w[r].abs(),
                        pivots: pivots_since_refactor,
                    });
                }
                for (i, &bj) in basic.iter().enumerate() {
                    x[bj] -= dir * w[i] * step;
                }
                x[q] += dir * step;
                let out = basic[r];
                status[out] = if hits_upper {
                    x[out] = up[out];
                    VarStatus::AtUpper
                } else {
                    x[out] = lo[out];
                    VarStatus::AtLower
                };
                status[q] = VarStatus::Basic;
                basic[r] = q;
                etas.push((r, w));
                pivots_since_refactor += 1;

                if step <= 1e-12 {
                    degenerate_streak += 1;
                    if degenerate_streak >= DEGENERATE_STALL {
                        bland = true;
                    }
                } else {
                    degenerate_streak = 0;
                }

                if pivots_since_refactor >= REFACTOR_EVERY {
                    factor = LuFactor::factorize(m, &basis_columns(&basic)).ok_or(
                        SimplexError::SingularBasis {
                            pivots: pivots_since_refactor,
                            row: r,
                        },
                    )?;
                    etas.clear();
                    pivots_since_refactor = 0;
                    compute_basics(&factor, &etas, &basic, &status, &mut x);
                }
            }
        }
    }
}
