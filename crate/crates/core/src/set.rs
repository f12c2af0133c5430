//! Set-level aggregates: winning probabilities, final-score distribution,
//! duration distribution and moments, and conditional win probability from
//! an intermediate score.

use crate::comb::{score_prob, ScoreEventQuery};
use crate::model::{PlayerId, RallyModel, ScorePhase, ScoreState, ScoringSystem};
use crate::pmf::Pmf;
use crate::serve::server_of_rally;
use crate::tie::{tie_win_probs, TieParameters};
use crate::{Error, Real, Result};

/// A terminal set outcome. Tie outcomes are keyed by the winner and the
/// number of post-tie rally pairs; the concrete score is `(n + pairs,
/// n - 2 + pairs)` in the winner's favor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetScore {
    Regular { winner: PlayerId, loser_points: u32 },
    AfterTie { winner: PlayerId, extra_pairs: u64 },
}

impl SetScore {
    pub fn winner(&self) -> PlayerId {
        match *self {
            SetScore::Regular { winner, .. } | SetScore::AfterTie { winner, .. } => winner,
        }
    }

    /// Concrete (A points, B points) for a system playing to `n`.
    pub fn points(&self, n: u32) -> (u32, u32) {
        match *self {
            SetScore::Regular {
                winner: PlayerId::A,
                loser_points,
            } => (n, loser_points),
            SetScore::Regular {
                winner: PlayerId::B,
                loser_points,
            } => (loser_points, n),
            SetScore::AfterTie {
                winner,
                extra_pairs,
            } => {
                let hi = n + extra_pairs as u32;
                let lo = n - 2 + extra_pairs as u32;
                match winner {
                    PlayerId::A => (hi, lo),
                    PlayerId::B => (lo, hi),
                }
            }
        }
    }

    /// Total rallies played to reach this outcome.
    pub fn duration(&self, n: u32) -> u64 {
        let (a, b) = self.points(n);
        a as u64 + b as u64
    }

    /// Classify a concrete final score; errors when it is not terminal.
    pub fn from_points(n: u32, score_a: u32, score_b: u32) -> Result<Self> {
        let bad = Err(Error::NonTerminalObservation(score_a, score_b, n));
        if score_a == n && score_b + 2 <= n {
            return Ok(SetScore::Regular {
                winner: PlayerId::A,
                loser_points: score_b,
            });
        }
        if score_b == n && score_a + 2 <= n {
            return Ok(SetScore::Regular {
                winner: PlayerId::B,
                loser_points: score_a,
            });
        }
        if score_a > n && score_a == score_b + 2 {
            return Ok(SetScore::AfterTie {
                winner: PlayerId::A,
                extra_pairs: (score_a - n) as u64,
            });
        }
        if score_b > n && score_b == score_a + 2 {
            return Ok(SetScore::AfterTie {
                winner: PlayerId::B,
                extra_pairs: (score_b - n) as u64,
            });
        }
        bad
    }

    fn mirrored(self) -> SetScore {
        match self {
            SetScore::Regular {
                winner,
                loser_points,
            } => SetScore::Regular {
                winner: winner.other(),
                loser_points,
            },
            SetScore::AfterTie {
                winner,
                extra_pairs,
            } => SetScore::AfterTie {
                winner: winner.other(),
                extra_pairs,
            },
        }
    }
}

/// Final-score distribution with the truncated tie-branch mass recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution<F> {
    pub entries: Vec<(SetScore, F)>,
    pub tail: F,
}

impl<F: Real> ScoreDistribution<F> {
    pub fn total_mass(&self) -> F {
        self.entries.iter().map(|&(_, p)| p).sum::<F>() + self.tail
    }
}

/// Closed-form raw moments of the set duration restricted to one winner:
/// `mass` = P[winner], `m1` = E[D; winner], `m2` = E[D^2; winner].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnerMoments<F> {
    pub mass: F,
    pub m1: F,
    pub m2: F,
}

/// The full set law: winner probability plus the joint winner/duration
/// distribution (materialized pmfs and exact moments).
#[derive(Debug, Clone, PartialEq)]
pub struct SetLaw<F> {
    pub win_prob_a: F,
    /// P[A wins and D = d]; stored mass totals `win_prob_a` minus its tail.
    pub duration_a: Pmf<F>,
    pub duration_b: Pmf<F>,
    pub moments_a: WinnerMoments<F>,
    pub moments_b: WinnerMoments<F>,
}

impl<F: Real> SetLaw<F> {
    /// Unconditional duration pmf.
    pub fn duration(&self) -> Pmf<F> {
        let min = self.duration_a.min_support();
        let len = (self.duration_a.max_support().max(self.duration_b.max_support()) - min + 1)
            as usize;
        let mut probs = vec![F::zero(); len];
        for (d, p) in self.duration_a.iter().chain(self.duration_b.iter()) {
            probs[(d - min) as usize] = probs[(d - min) as usize] + p;
        }
        Pmf::new(min, probs, self.duration_a.tail() + self.duration_b.tail())
    }

    /// Unconditional mean and variance of the duration, from the closed-form
    /// moments.
    pub fn duration_moments(&self) -> (F, F) {
        let m1 = self.moments_a.m1 + self.moments_b.m1;
        let m2 = self.moments_a.m2 + self.moments_b.m2;
        (m1, m2 - m1 * m1)
    }
}

fn a_set_prob<F: Real>(
    alpha: u32,
    beta: u32,
    last_scorer: PlayerId,
    model: &RallyModel<F>,
    m: u32,
) -> F {
    let query = ScoreEventQuery::new(alpha, beta, last_scorer, PlayerId::A)
        .expect("caller guarantees last-scorer positivity");
    score_prob(&query, model, m)
}

/// Probability of reaching the tie at (n-1, n-1).
pub fn tie_reach_prob<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
) -> Result<F> {
    let model = match first_server {
        PlayerId::A => *model,
        PlayerId::B => model.swap_roles(),
    };
    let n = system.points_to_win();
    let m = system.serves_per_turn();
    Ok(a_set_prob(n - 1, n - 1, PlayerId::A, &model, m)
        + a_set_prob(n - 1, n - 1, PlayerId::B, &model, m))
}

/// Probabilities that A resp. B wins the set.
pub fn set_win_probs<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
) -> Result<(F, F)> {
    if first_server == PlayerId::B {
        let (b, a) = set_win_probs(system, &model.swap_roles(), PlayerId::A)?;
        return Ok((a, b));
    }
    let n = system.points_to_win();
    let m = system.serves_per_turn();
    let mut win_a = F::zero();
    let mut win_b = F::zero();
    for k in 0..=n - 2 {
        win_a = win_a + a_set_prob(n, k, PlayerId::A, model, m);
        win_b = win_b + a_set_prob(k, n, PlayerId::B, model, m);
    }
    let reach = tie_reach_prob(system, model, PlayerId::A)?;
    if reach > F::zero() {
        let (tie_a, tie_b) = tie_win_probs(model)?;
        win_a = win_a + reach * tie_a;
        win_b = win_b + reach * tie_b;
    }
    Ok((win_a, win_b))
}

/// Safety cap on materialized tie pairs, for models with a near-sticky tie.
const MAX_TIE_PAIRS: u64 = 100_000;

/// The set law at the given pmf tail threshold (moments are exact and do not
/// depend on the threshold).
pub fn set_law<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
    tail_threshold: F,
) -> Result<SetLaw<F>> {
    if first_server == PlayerId::B {
        let sw = set_law(system, &model.swap_roles(), PlayerId::A, tail_threshold)?;
        return Ok(SetLaw {
            win_prob_a: F::one() - sw.win_prob_a,
            duration_a: sw.duration_b,
            duration_b: sw.duration_a,
            moments_a: sw.moments_b,
            moments_b: sw.moments_a,
        });
    }

    let n = system.points_to_win();
    let m = system.serves_per_turn();
    let base = system.tie_rally_count(); // 2(n-1)
    let reach = tie_reach_prob(system, model, PlayerId::A)?;
    let params = TieParameters::from_model(model);
    if reach > F::zero() && params.is_stuck() {
        return Err(Error::TieNeverResolves);
    }

    // Number of tie pairs to materialize so the remaining mass drops below
    // the threshold; the exact remainder is reach * continue^pairs.
    let mut pairs = 0u64;
    if reach > F::zero() {
        let mut remaining = reach;
        while remaining >= tail_threshold && pairs < MAX_TIE_PAIRS {
            remaining = remaining * params.continue_pair;
            pairs += 1;
        }
    }

    let d_max = base + 2 * pairs;
    let len = (d_max - n as u64 + 1) as usize;
    let mut probs_a = vec![F::zero(); len];
    let mut probs_b = vec![F::zero(); len];

    let mut mom_a = WinnerMoments {
        mass: F::zero(),
        m1: F::zero(),
        m2: F::zero(),
    };
    let mut mom_b = mom_a;
    for k in 0..=n - 2 {
        let d = (n + k) as u64;
        let df = F::from_u64(d).unwrap();
        let pa = a_set_prob(n, k, PlayerId::A, model, m);
        let pb = a_set_prob(k, n, PlayerId::B, model, m);
        probs_a[(d - n as u64) as usize] = pa;
        probs_b[(d - n as u64) as usize] = pb;
        mom_a.mass = mom_a.mass + pa;
        mom_a.m1 = mom_a.m1 + df * pa;
        mom_a.m2 = mom_a.m2 + df * df * pa;
        mom_b.mass = mom_b.mass + pb;
        mom_b.m1 = mom_b.m1 + df * pb;
        mom_b.m2 = mom_b.m2 + df * df * pb;
    }

    let mut tail_a = F::zero();
    let mut tail_b = F::zero();
    if reach > F::zero() {
        let q = params.resolve_prob();
        let r = params.continue_pair;
        let b0 = F::from_u64(base).unwrap();
        let two = F::from_u8(2).unwrap();
        let four = F::from_u8(4).unwrap();
        // Geometric sums over the pair count: sum r^(l-1) = 1/q,
        // sum l r^(l-1) = 1/q^2, sum l^2 r^(l-1) = (1+r)/q^3.
        let s0 = F::one() / q;
        let s1 = F::one() / (q * q);
        let s2 = (F::one() + r) / (q * q * q);
        let m1_shape = b0 * s0 + two * s1;
        let m2_shape = b0 * b0 * s0 + four * b0 * s1 + four * s2;
        for (w_pair, mom) in [(params.win_pair_a, &mut mom_a), (params.win_pair_b, &mut mom_b)] {
            mom.mass = mom.mass + reach * w_pair * s0;
            mom.m1 = mom.m1 + reach * w_pair * m1_shape;
            mom.m2 = mom.m2 + reach * w_pair * m2_shape;
        }
        let mut geom = F::one();
        for l in 1..=pairs {
            let d = base + 2 * l;
            let idx = (d - n as u64) as usize;
            probs_a[idx] = reach * params.win_pair_a * geom;
            probs_b[idx] = reach * params.win_pair_b * geom;
            geom = geom * r;
        }
        // geom is now r^pairs; split the remainder by the (independent)
        // winner odds.
        tail_a = reach * geom * (params.win_pair_a / q);
        tail_b = reach * geom * (params.win_pair_b / q);
    }

    let win_prob_a = mom_a.mass;
    Ok(SetLaw {
        win_prob_a,
        duration_a: Pmf::new(n as u64, probs_a, tail_a),
        duration_b: Pmf::new(n as u64, probs_b, tail_b),
        moments_a: mom_a,
        moments_b: mom_b,
    })
}

/// Distribution over terminal set scores, tie branch truncated at the given
/// tail mass.
pub fn final_score_distribution<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
    tie_tail_threshold: F,
) -> Result<ScoreDistribution<F>> {
    if first_server == PlayerId::B {
        let sw = final_score_distribution(
            system,
            &model.swap_roles(),
            PlayerId::A,
            tie_tail_threshold,
        )?;
        return Ok(ScoreDistribution {
            entries: sw
                .entries
                .into_iter()
                .map(|(score, p)| (score.mirrored(), p))
                .collect(),
            tail: sw.tail,
        });
    }
    let n = system.points_to_win();
    let m = system.serves_per_turn();
    let mut entries = Vec::new();
    for k in 0..=n - 2 {
        entries.push((
            SetScore::Regular {
                winner: PlayerId::A,
                loser_points: k,
            },
            a_set_prob(n, k, PlayerId::A, model, m),
        ));
    }
    for k in 0..=n - 2 {
        entries.push((
            SetScore::Regular {
                winner: PlayerId::B,
                loser_points: k,
            },
            a_set_prob(k, n, PlayerId::B, model, m),
        ));
    }
    let reach = tie_reach_prob(system, model, PlayerId::A)?;
    let mut tail = F::zero();
    if reach > F::zero() {
        let params = TieParameters::from_model(model);
        if params.is_stuck() {
            return Err(Error::TieNeverResolves);
        }
        let r = params.continue_pair;
        let mut remaining = reach;
        let mut geom = F::one();
        let mut l = 1u64;
        while remaining >= tie_tail_threshold && l <= MAX_TIE_PAIRS {
            entries.push((
                SetScore::AfterTie {
                    winner: PlayerId::A,
                    extra_pairs: l,
                },
                reach * params.win_pair_a * geom,
            ));
            entries.push((
                SetScore::AfterTie {
                    winner: PlayerId::B,
                    extra_pairs: l,
                },
                reach * params.win_pair_b * geom,
            ));
            geom = geom * r;
            remaining = remaining * r;
            l += 1;
        }
        tail = remaining;
    }
    Ok(ScoreDistribution { entries, tail })
}

/// Probability of one concrete terminal outcome.
pub fn set_score_prob<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
    score: &SetScore,
) -> Result<F> {
    if first_server == PlayerId::B {
        return set_score_prob(system, &model.swap_roles(), PlayerId::A, &score.mirrored());
    }
    let n = system.points_to_win();
    let m = system.serves_per_turn();
    match *score {
        SetScore::Regular {
            winner: PlayerId::A,
            loser_points,
        } => Ok(a_set_prob(n, loser_points, PlayerId::A, model, m)),
        SetScore::Regular {
            winner: PlayerId::B,
            loser_points,
        } => Ok(a_set_prob(loser_points, n, PlayerId::B, model, m)),
        SetScore::AfterTie {
            winner,
            extra_pairs,
        } => {
            let reach = tie_reach_prob(system, model, PlayerId::A)?;
            if reach <= F::zero() {
                return Ok(F::zero());
            }
            let params = TieParameters::from_model(model);
            let w_pair = match winner {
                PlayerId::A => params.win_pair_a,
                PlayerId::B => params.win_pair_b,
            };
            Ok(reach * w_pair * crate::real::pow0(params.continue_pair, extra_pairs - 1))
        }
    }
}

/// Unconditional duration pmf of a set.
pub fn duration_pmf<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
    tail_threshold: F,
) -> Result<Pmf<F>> {
    Ok(set_law(system, model, first_server, tail_threshold)?.duration())
}

/// Mean and variance of the set duration, closed form.
pub fn duration_moments<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
) -> Result<(F, F)> {
    // The threshold only affects the materialized pmfs, not the moments.
    let law = set_law(system, model, first_server, F::from_f64(1e-12).unwrap())?;
    Ok(law.duration_moments())
}

/// Probability that A wins the set from an intermediate score, by backward
/// recursion on score states with the per-rally winner odds dictated by the
/// serve rotation. The tie phase uses the closed-form three-state system.
pub fn win_prob_from_score<F: Real>(
    system: &ScoringSystem,
    model: &RallyModel<F>,
    first_server: PlayerId,
    state: &ScoreState,
) -> Result<F> {
    if first_server == PlayerId::B {
        let mirrored = ScoreState::new(state.beta, state.alpha, state.phase);
        let v = win_prob_from_score(system, &model.swap_roles(), PlayerId::A, &mirrored)?;
        return Ok(F::one() - v);
    }
    state.check(system)?;
    let n = system.points_to_win();
    let tie_at = system.tie_rally_count();

    let rally_win = |alpha: u32, beta: u32| -> F {
        let idx = alpha as u64 + beta as u64 + 1;
        let server = server_of_rally(idx, system, PlayerId::A, Some(tie_at))
            .expect("index is positive");
        model.rally_win_prob_a(server)
    };

    // Tie-phase states resolve via the level value and one look-ahead rally.
    let tie_value = |alpha: u32, beta: u32| -> Result<F> {
        let (tie_a, _) = tie_win_probs(model)?;
        if alpha == beta {
            return Ok(tie_a);
        }
        let w = rally_win(alpha, beta);
        if alpha == beta + 1 {
            Ok(w + (F::one() - w) * tie_a)
        } else {
            Ok(w * tie_a)
        }
    };

    match state.phase {
        ScorePhase::Tie => {
            if state.alpha.abs_diff(state.beta) >= 2 {
                return Err(Error::SetAlreadyDecided(state.alpha, state.beta));
            }
            tie_value(state.alpha, state.beta)
        }
        ScorePhase::PreTie => {
            if state.alpha >= n || state.beta >= n {
                return Err(Error::SetAlreadyDecided(state.alpha, state.beta));
            }
            if state.alpha == n - 1 && state.beta == n - 1 {
                return tie_value(state.alpha, state.beta);
            }
            // values[alpha][beta] over 0..=n
            let size = (n + 1) as usize;
            let mut values = vec![vec![F::zero(); size]; size];
            for beta in 0..=(n - 2) as usize {
                values[n as usize][beta] = F::one();
            }
            let tie_needed = state.alpha + state.beta <= 2 * (n - 1);
            if tie_needed {
                values[(n - 1) as usize][(n - 1) as usize] = tie_value(n - 1, n - 1)?;
            }
            for total in (0..=(2 * n as i64 - 3)).rev() {
                for alpha in 0..n {
                    let Some(beta) = total.checked_sub(alpha as i64) else {
                        continue;
                    };
                    if beta < 0 || beta >= n as i64 {
                        continue;
                    }
                    let beta = beta as u32;
                    if alpha == n - 1 && beta == n - 1 {
                        continue;
                    }
                    let w = rally_win(alpha, beta);
                    values[alpha as usize][beta as usize] = w
                        * values[(alpha + 1) as usize][beta as usize]
                        + (F::one() - w) * values[alpha as usize][(beta + 1) as usize];
                }
            }
            Ok(values[state.alpha as usize][state.beta as usize])
        }
    }
}
