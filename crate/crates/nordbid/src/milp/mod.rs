//! Embedded LP/MILP machinery: problem containers, a bounded-variable
//! revised simplex, best-first branch-and-bound over binaries, an LP-format
//! writer/reader and an exhaustive oracle for tiny scheduling instances.

mod branch_bound;
mod lp;
mod lp_format;
mod oracle;
mod simplex;

pub use branch_bound::{branch_and_bound, MilpError, MilpStatus, SolveResult};
pub use oracle::{brute_force_oracle, OracleError, OracleResult, DEFAULT_ORACLE_CAP};
pub use lp::{Constraint, LinearProgram, LpError, RowSense, SolveOptions};
pub use lp_format::{export_lp_text, parse_lp_text, LpFormatError};
pub use simplex::{solve_lp, Basis, LpOutcome, LpStatus, SimplexError};
