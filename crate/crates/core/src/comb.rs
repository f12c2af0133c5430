//! Exact pre-tie score probabilities.
//!
//! The probability that a set passes through the score `(alpha, beta)` with a
//! given player scoring the last point splits, by the number `j` of points
//! the first server scored on their own serve, into products of two binomial
//! terms: one over the first server's serves, one over the receiver's. The
//! rally on which the last point falls is pinned, so the binomial on the side
//! that served it loses one trial, and one success when the last scorer is
//! the first server's side of the count.

use crate::model::{PlayerId, RallyModel};
use crate::real::pow0;
use crate::serve::decompose;
use crate::{binomial, Error, Real, Result};

/// The event "the set passes through `(alpha, beta)` with `last_scorer`
/// scoring the last point", in a set whose first rally is served by
/// `first_server`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreEventQuery {
    pub alpha: u32,
    pub beta: u32,
    pub last_scorer: PlayerId,
    pub first_server: PlayerId,
}

impl ScoreEventQuery {
    pub fn new(
        alpha: u32,
        beta: u32,
        last_scorer: PlayerId,
        first_server: PlayerId,
    ) -> Result<Self> {
        match last_scorer {
            PlayerId::A if alpha == 0 => Err(Error::LastScorerWithoutPoint(PlayerId::A)),
            PlayerId::B if beta == 0 => Err(Error::LastScorerWithoutPoint(PlayerId::B)),
            _ => Ok(ScoreEventQuery {
                alpha,
                beta,
                last_scorer,
                first_server,
            }),
        }
    }

    /// The same event relabeled so the first server is A: points and the
    /// last scorer flip sides. `j` then counts the (relabeled) first
    /// server's own-serve points either way.
    fn mirrored(&self) -> ScoreEventQuery {
        ScoreEventQuery {
            alpha: self.beta,
            beta: self.alpha,
            last_scorer: self.last_scorer.other(),
            first_server: PlayerId::A,
        }
    }
}

/// Inclusive bounds for `j`, the first server's points on their own serve.
/// `j_min > j_max` encodes the empty range (probability zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentIndexRange {
    pub j_min: i64,
    pub j_max: i64,
}

impl ComponentIndexRange {
    pub fn is_empty(&self) -> bool {
        self.j_min > self.j_max
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.j_min..=self.j_max
    }
}

/// Serve bookkeeping for `alpha + beta` rallies in a set served first by A:
/// how many rallies each player serves and who serves the last one.
struct ServeSplit {
    by_first: u64,
    by_second: u64,
    last_by_first: bool,
}

fn serve_split(total: u64, m: u32) -> ServeSplit {
    debug_assert!(total > 0);
    let d = decompose(total, m);
    let mut by_first = d.k1 * m as u64;
    let mut by_second = d.k2 * m as u64;
    let last_by_first;
    if d.r > 0 {
        match d.trailing_server {
            PlayerId::A => {
                by_first += d.r;
                last_by_first = true;
            }
            PlayerId::B => {
                by_second += d.r;
                last_by_first = false;
            }
        }
    } else {
        // Last rally closes complete sequence k; sequences 1, 3, ... belong
        // to the first server.
        last_by_first = d.k % 2 == 1;
    }
    ServeSplit {
        by_first,
        by_second,
        last_by_first,
    }
}

/// Bounds for `j` in the given event. Matches the case split on
/// (remainder zero or not) x (sequence count parity) x (last scorer).
pub fn index_range(query: &ScoreEventQuery, m: u32) -> ComponentIndexRange {
    let q = if query.first_server == PlayerId::A {
        *query
    } else {
        query.mirrored()
    };
    let total = (q.alpha + q.beta) as u64;
    if total == 0 {
        return ComponentIndexRange { j_min: 0, j_max: -1 };
    }
    let s = serve_split(total, m);
    let alpha = q.alpha as i64;
    let sa = s.by_first as i64;
    let sb = s.by_second as i64;
    let da = (q.last_scorer == PlayerId::A) as i64;
    let (j_min, j_max) = if s.last_by_first {
        (
            [0, da, alpha - sb].into_iter().max().unwrap(),
            alpha.min(sa - 1 + da),
        )
    } else {
        (
            [0, alpha - sb + 1 - da].into_iter().max().unwrap(),
            (alpha - da).min(sa),
        )
    };
    ComponentIndexRange { j_min, j_max }
}

/// Probability of the event restricted to the first server scoring exactly
/// `j` points on their own serve. Zero outside [`index_range`].
pub fn component_prob<F: Real>(
    query: &ScoreEventQuery,
    j: i64,
    model: &RallyModel<F>,
    m: u32,
) -> F {
    let (q, mdl) = if query.first_server == PlayerId::A {
        (*query, *model)
    } else {
        (query.mirrored(), model.swap_roles())
    };
    let range = index_range(&q, m);
    if j < range.j_min || j > range.j_max {
        return F::zero();
    }
    let total = (q.alpha + q.beta) as u64;
    let s = serve_split(total, m);
    let alpha = q.alpha as u64;
    let j = j as u64;
    let da = (q.last_scorer == PlayerId::A) as u64;
    // Trials and successes for the two binomials; the side that served the
    // last rally loses one trial and, when the last point went to the first
    // server's tally, one success.
    let (trials_a, succ_a, trials_b, succ_b) = if s.last_by_first {
        (s.by_first - 1, j - da, s.by_second, alpha - j)
    } else {
        (s.by_first, j, s.by_second - 1, alpha - j - da)
    };
    let p_a = mdl.p_a();
    let p_b = mdl.p_b();
    binomial::<F>(trials_a, succ_a)
        * pow0(p_a, j)
        * pow0(F::one() - p_a, s.by_first - j)
        * binomial::<F>(trials_b, succ_b)
        * pow0(F::one() - p_b, alpha - j)
        * pow0(p_b, s.by_second - (alpha - j))
}

/// Probability of the event: the component probabilities summed over the
/// admissible `j`.
pub fn score_prob<F: Real>(query: &ScoreEventQuery, model: &RallyModel<F>, m: u32) -> F {
    index_range(query, m)
        .iter()
        .map(|j| component_prob(query, j, model, m))
        .sum()
}

/// Closed form for the no-server model: a run of Bernoulli trials in which
/// the last point is pinned to the last scorer.
pub fn no_server_score_prob<F: Real>(
    alpha: u32,
    beta: u32,
    last_scorer: PlayerId,
    p: F,
) -> Result<F> {
    match last_scorer {
        PlayerId::A if alpha == 0 => return Err(Error::LastScorerWithoutPoint(PlayerId::A)),
        PlayerId::B if beta == 0 => return Err(Error::LastScorerWithoutPoint(PlayerId::B)),
        _ => {}
    }
    let total = (alpha + beta) as u64;
    let choose = match last_scorer {
        PlayerId::A => binomial::<F>(total - 1, alpha as u64 - 1),
        PlayerId::B => binomial::<F>(total - 1, alpha as u64),
    };
    Ok(choose * pow0(p, alpha as u64) * pow0(F::one() - p, beta as u64))
}
