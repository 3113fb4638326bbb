//! Searches for constrained extremes: the same-transform correlation
//! `R'`, its monotone version `R''`, and the quartic reformulation of the
//! linear-optimality problem.

mod bfgs;
mod quartic;
mod rational;
mod search;

pub use quartic::{
    default_quartic_params, inverse_rho_squared, minimize_quartic, minimize_quartic_with,
    quartic_value, QuarticKind, QuarticOutcome, QuarticProblem, DEFAULT_QUARTIC_RESTARTS,
};
pub use rational::{parse_rational, rational_p_reduction_bound, RationalBound};
pub use search::{search_same_g, SearchOptions, SearchResult, DEFAULT_RESTARTS};
