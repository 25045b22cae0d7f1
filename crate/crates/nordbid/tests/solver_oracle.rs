//! Branch-and-bound vs. exhaustive-oracle equivalence on randomized tiny
//! scheduling instances, plus incumbent validation.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nordbid::milp::{branch_and_bound, brute_force_oracle, MilpStatus, SolveOptions};
use nordbid::model::validate_solution;

#[test]
fn tiny_instances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..10 {
        let inst = common::random_tiny_instance(&mut rng);
        let res = branch_and_bound(&inst.lp, &SolveOptions::default()).unwrap();
        assert!(
            matches!(res.status, MilpStatus::Optimal | MilpStatus::GapReached),
            "instance {k}: status {:?}",
            res.status
        );
        let oracle = brute_force_oracle(&inst, 10_000_000).unwrap();
        let tol = 1e-6 * oracle.objective.abs().max(1.0);
        assert!(
            (res.objective - oracle.objective).abs() <= tol,
            "instance {k}: solver {} vs oracle {} (bids {:?})",
            res.objective,
            oracle.objective,
            oracle.bids
        );

        let sol = inst.extract_solution(&res.values);
        let report = validate_solution(&sol, &inst);
        assert!(
            report.is_clean(),
            "instance {k}: {} violations, first: {:?}",
            report.violations.len(),
            report.violations.first()
        );
    }
}
