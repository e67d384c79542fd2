//! Fair team formation: choose a minimum-cost set of workers that covers a
//! task's skills with equally many workers from two classes.
//!
//! The crate provides the unfair greedy baseline and its pricing, four fair
//! heuristics ([`fair`]), two lower bounds (greedy-derived and the LP
//! relaxation in [`lp`]), an exhaustive oracle for small workforces, instance
//! I/O and generators, and a benchmark harness.

pub mod error;
pub mod fair;
pub mod fixtures;
pub mod greedy;
pub mod harness;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
pub use fair::{
    fair_alternating, fair_pairs, fair_padding, fair_rounding, get_cheapest_workers, solve,
    Algorithm, SolveOptions, SolveResult, Wmu,
};
pub use greedy::{
    greedy_set_cover, harmonic, trivial_lower_bound, verify_price_bound, GreedyOutcome,
    GreedyTrace, PriceVector,
};
pub use harness::{emit_report, rounding_match_rate, run_benchmark, BenchConfig, BenchReport, BenchRow};
pub use io::{Dataset, GadgetSpec, GenParams, SkillVocabulary};
pub use lp::{build_fair_lp, lp_lower_bound, solve_lp, FractionalSolution, LpModel, SolveStatus};
pub use model::{
    balance, covered_skills, covers, is_fair_cover, team_cost, validate_instance, Balance,
    ClassLabel, Instance, SkillId, Task, Team, ValidationReport, Worker,
};
pub use oracle::{brute_force_fair_optimum, brute_force_unfair_optimum, OracleResult};
