//! Problem containers shared by the simplex, branch-and-bound and the
//! LP-format writer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("variable index {0} out of range ({1} variables)")]
    BadVariable(usize, usize),
    #[error("non-finite coefficient on variable {0}")]
    BadCoefficient(usize),
    #[error("integer variable {0} has unbounded domain [{1}, {2}]")]
    UnboundedInteger(usize, f64, f64),
    #[error("variable {0} has crossed bounds [{1}, {2}]")]
    CrossedBounds(usize, f64, f64),
    #[error("duplicate variable name {0}")]
    DuplicateName(String),
}

/// Constraint row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

/// One sparse constraint row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// Sparse coefficients as (variable index, value), sorted by index.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A linear (or, with `integer` flags, mixed-integer) program. The
/// objective sense is always maximization; callers minimizing should negate
/// their objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearProgram {
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// True for variables constrained to integer values. All integer
    /// variables here are binaries in [0, 1].
    pub integer: Vec<bool>,
    pub rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self {
            var_names: Vec::new(),
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            integer: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a continuous variable and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> usize {
        self.var_names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(obj);
        self.integer.push(false);
        self.objective.len() - 1
    }

    /// Adds a binary variable and returns its index.
    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> usize {
        let idx = self.add_var(name, 0.0, 1.0, obj);
        self.integer[idx] = true;
        idx
    }

    /// Adds a row; coefficients are sorted and merged by variable index.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) {
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|&(j, _)| j);
        coeffs.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        coeffs.retain(|&(_, v)| v != 0.0);
        self.rows.push(Constraint {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
    }

    /// Structural sanity checks: indices in range, finite coefficients,
    /// bounded integers, unique names.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        for (j, (&lo, &up)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo > up {
                return Err(LpError::CrossedBounds(j, lo, up));
            }
            if self.integer[j] && !(lo.is_finite() && up.is_finite()) {
                return Err(LpError::UnboundedInteger(j, lo, up));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::BadCoefficient(j));
            }
        }
        for row in &self.rows {
            for &(j, v) in &row.coeffs {
                if j >= n {
                    return Err(LpError::BadVariable(j, n));
                }
                if !v.is_finite() {
                    return Err(LpError::BadCoefficient(j));
                }
            }
            if !row.rhs.is_finite() {
                return Err(LpError::BadCoefficient(usize::MAX));
            }
        }
        let mut names: Vec<&str> = self.var_names.iter().map(String::as_str).collect();
        names.sort_unstable();
        for pair in names.windows(2) {
            if pair[0] == pair[1] {
                return Err(LpError::DuplicateName(pair[0].to_string()));
            }
        }
        Ok(())
    }

    /// Objective value of a point.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Maximum constraint/bound violation of a point.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
            let r = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(r);
        }
        worst
    }

    /// Indices of integer variables.
    pub fn integer_vars(&self) -> Vec<usize> {
        (0..self.n_vars()).filter(|&j| self.integer[j]).collect()
    }
}

impl Default for LinearProgram {
    fn default() -> Self {
        Self::new()
    }
}

/// Termination and tolerance settings for the MILP search.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Relative optimality gap on |incumbent|.
    pub rel_gap: f64,
    /// Absolute optimality gap.
    pub abs_gap: f64,
    /// Maximum branch-and-bound nodes; `None` means unlimited.
    pub node_limit: Option<usize>,
    /// Wall-clock limit in seconds; `None` means unlimited. Expiry yields
    /// `Limit` status; it never alters the returned incumbent.
    pub time_limit_secs: Option<f64>,
    /// Primal feasibility tolerance for the LP subproblems.
    pub feas_tol: f64,
    /// Integrality tolerance when rounding LP solutions.
    pub int_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rel_gap: 1e-6,
            abs_gap: 1e-9,
            node_limit: None,
            time_limit_secs: None,
            feas_tol: 1e-8,
            int_tol: 1e-6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_row_merges_duplicate_indices() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 1.0, 1.0);
        lp.add_row("r", vec![(x, 2.0), (x, 3.0)], RowSense::Le, 4.0);
        assert_eq!(lp.rows[0].coeffs, vec![(x, 5.0)]);
    }

    #[test]
    fn validate_rejects_unbounded_integer() {
        let mut lp = LinearProgram::new();
        let j = lp.add_var("b", 0.0, f64::INFINITY, 1.0);
        lp.integer[j] = true;
        assert!(matches!(lp.validate(), Err(LpError::UnboundedInteger(..))));
    }

    #[test]
    fn validate_rejects_duplicate_names() {
        let mut lp = LinearProgram::new();
        lp.add_var("x", 0.0, 1.0, 0.0);
        lp.add_var("x", 0.0, 1.0, 0.0);
        assert!(matches!(lp.validate(), Err(LpError::DuplicateName(_))));
    }

    #[test]
    fn max_violation_measures_rows_and_bounds() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 2.0, 1.0);
        lp.add_row("cap", vec![(x, 1.0)], RowSense::Le, 1.5);
        assert_eq!(lp.max_violation(&[1.0]), 0.0);
        assert!((lp.max_violation(&[1.7]) - 0.2).abs() < 1e-12);
        assert!((lp.max_violation(&[-0.3]) - 0.3).abs() < 1e-12);
    }
}
