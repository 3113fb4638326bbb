//! Exact correlation structure of order statistics drawn from finite
//! populations.
//!
//! The crate is organised bottom-up:
//!
//! * [`hahn`]: the orthonormal polynomial system of the discrete uniform law
//!   on `{1, ..., N}` and Fourier analysis of grid functions in it.
//! * [`populations`]: finite (weighted, possibly tied) populations and the
//!   exact joint law of a pair of order statistics. Everything else is
//!   checked against this brute-force layer.
//! * [`bounds`]: closed-form correlation and covariance bounds together with
//!   the variance representations that prove them.
//! * [`maxcorr`]: maximal correlation through the singular values of the
//!   normalised joint-probability kernel.
//! * [`optimize`]: numerical searches (same-transform correlation suprema and
//!   the quartic minimisation problem).

pub mod bounds;
pub mod error;
pub mod hahn;
pub mod maxcorr;
pub mod optimize;
pub mod populations;

pub use bounds::{
    alpha_beta, covariance_bound_check, hdg_discrete_bound, rational_r, sigma_from_deltas,
    sigma_terrell_hahn, terrell_discrete_bound, tsm_bound, AlphaBetaSeq, SigmaTriple,
};
pub use error::{Error, Result};
pub use hahn::{build_basis, leading_coefficients, FourierCoeffs, GridFunction, HahnBasis};
pub use maxcorr::{maximal_correlation, perturbation_check, renyi_functional, w_polynomial, MaxCorrResult};
pub use optimize::{
    default_quartic_params, minimize_quartic, parse_rational, quartic_value,
    rational_p_reduction_bound, search_same_g, QuarticKind, QuarticOutcome, QuarticProblem,
    RationalBound, SearchOptions, SearchResult,
};
pub use populations::{
    conditional_expectation, make_population, order_stat_joint, rho_order_stats, JointMethod,
    JointOptions, OrderStatJoint, PairMoments, Population, SupportFunction,
};
