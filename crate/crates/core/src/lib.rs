//! Exact probabilities for games scored under block serve rotation: a set is
//! first to `n` points (two-point lead after a tie at `n-1` all), the serve
//! changes hands every `m` rallies before the tie and every rally after it,
//! and a match is first to `G` sets.
//!
//! The analytical core is generic over the floating-point scalar via
//! [`Real`]; concrete `f64` aliases live at the crate root. The simulation
//! and estimation modules are `f64` only.

pub mod comb;
pub mod estimate;
pub mod matches;
pub mod model;
pub mod pmf;
pub mod serve;
pub mod set;
pub mod sim;
pub mod tie;

mod error;
mod real;

pub use error::Error;
pub use real::{binomial, Real};

pub type Result<T> = std::result::Result<T, Error>;

/// `f64` rally model, the default working type.
pub type RallyModel64 = model::RallyModel<f64>;
/// `f64` probability mass function.
pub type Pmf64 = pmf::Pmf<f64>;
/// `f64` set law (winner probability plus joint winner/duration law).
pub type SetLaw64 = set::SetLaw<f64>;
/// `f64` match query.
pub type MatchQuery64 = matches::MatchQuery<f64>;
