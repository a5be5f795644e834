//! Executable versions of the quantitative guarantees.

mod bias;
mod bounds;
mod concentration;
mod lowerbound;
mod monitor;
mod report;
mod stats;

pub use bias::{
    bias_lower_bound, pairwise_bias_estimate, pairwise_bias_exact, BiasEstimate, MAX_EXACT_ACTIONS,
};
pub use bounds::{theorem1_bound, theorem1_minimax_bound, theorem2_lower_bound, BoundInputs};
pub use concentration::{
    concentration_mc, ConcentrationOutcome, ConcentrationTrialSpec, Increment, IncrementLaw,
};
pub use lowerbound::{
    lowerbound_gap, make_lowerbound_instance, random_lowerbound_instance, LowerBoundInstance,
};
pub use monitor::{
    first_wrong_edge, is_wrong, leader_violations, monitor_toprank, verify_wrong_edges,
    MonitoredRun, WrongEdgeMonitor, WrongEdgeSummary,
};
pub use report::VerificationReport;
pub use stats::{binomial_ci, Z99};
