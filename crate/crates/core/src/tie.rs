//! Everything after the tie at (n-1, n-1). Serves alternate rally by rally,
//! so each pair of rallies is either split decisively (one player takes both
//! points) or returns the score to level. Winner and number of pairs are
//! independent: the winner odds are fixed per pair, the pair count is
//! geometric.

use crate::model::RallyModel;
use crate::real::pow0;
use crate::{Error, Real, Result};

/// Per-pair outcome probabilities of the post-tie phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieParameters<F> {
    /// A wins both rallies of a pair.
    pub win_pair_a: F,
    /// B wins both rallies of a pair.
    pub win_pair_b: F,
    /// The pair splits one-all and the tie continues.
    pub continue_pair: F,
}

impl<F: Real> TieParameters<F> {
    pub fn from_model(model: &RallyModel<F>) -> Self {
        let p_a = model.p_a();
        let p_b = model.p_b();
        TieParameters {
            win_pair_a: p_a * (F::one() - p_b),
            win_pair_b: (F::one() - p_a) * p_b,
            continue_pair: (F::one() - p_a) * (F::one() - p_b) + p_a * p_b,
        }
    }

    /// Probability a pair resolves the set.
    pub fn resolve_prob(&self) -> F {
        self.win_pair_a + self.win_pair_b
    }

    /// A tie that can never resolve (both rallies always go the same,
    /// alternating way).
    pub fn is_stuck(&self) -> bool {
        self.resolve_prob() <= F::zero()
    }
}

/// Probabilities that A resp. B wins the set once the tie is reached.
pub fn tie_win_probs<F: Real>(model: &RallyModel<F>) -> Result<(F, F)> {
    let t = TieParameters::from_model(model);
    if t.is_stuck() {
        return Err(Error::TieNeverResolves);
    }
    let q = t.resolve_prob();
    Ok((t.win_pair_a / q, t.win_pair_b / q))
}

/// Probability that the post-tie phase lasts exactly `2 * pairs` rallies
/// (`pairs >= 1`). Odd post-tie rally counts are impossible.
pub fn tie_extra_duration_pmf<F: Real>(model: &RallyModel<F>, pairs: u64) -> F {
    debug_assert!(pairs >= 1);
    let t = TieParameters::from_model(model);
    t.resolve_prob() * pow0(t.continue_pair, pairs - 1)
}

/// Mean and variance of the number of post-tie rallies (twice a geometric
/// pair count).
pub fn tie_extra_moments<F: Real>(model: &RallyModel<F>) -> Result<(F, F)> {
    let t = TieParameters::from_model(model);
    if t.is_stuck() {
        return Err(Error::TieNeverResolves);
    }
    let q = t.resolve_prob();
    let two = F::from_u8(2).unwrap();
    let four = F::from_u8(4).unwrap();
    Ok((two / q, four * t.continue_pair / (q * q)))
}
