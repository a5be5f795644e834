//! Click models, click sampling and the assumption checker.

mod action;
mod assumptions;
mod model;

pub(crate) use action::for_each_permutation;
pub use action::{Action, ClickVector};
pub use assumptions::{
    check_assumptions, Assumption, AssumptionReport, Counterexample, DEFAULT_TOLERANCE,
};
pub(crate) use model::sort_by_attractiveness;
pub use model::{ClickModel, Family, ModelFile, MAX_ENUMERATION_ITEMS, MAX_FACTORED_ITEMS};
