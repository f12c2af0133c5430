//! Match-level quantities: a match is a race to `G` set wins, with the right
//! to serve first alternating between sets.

use crate::model::{PlayerId, RallyModel, ScoringSystem};
use crate::pmf::Pmf;
use crate::set::{set_law, set_win_probs, SetLaw};
use crate::{Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchQuery<F> {
    pub system: ScoringSystem,
    pub model: RallyModel<F>,
    pub first_server: PlayerId,
}

/// One grid point of a scoring-system comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow<F> {
    pub old_system: ScoringSystem,
    pub new_system: ScoringSystem,
    pub model: RallyModel<F>,
    pub win_prob_old: F,
    pub win_prob_new: F,
    pub ratio_mean: F,
    pub ratio_std: F,
}

/// Per-set win probabilities for A in odd- and even-indexed sets (the first
/// server alternates set by set).
fn per_set_win_probs<F: Real>(q: &MatchQuery<F>) -> Result<(F, F)> {
    let (odd, _) = set_win_probs(&q.system, &q.model, q.first_server)?;
    let (even, _) = set_win_probs(&q.system, &q.model, q.first_server.other())?;
    Ok((odd, even))
}

/// Probability that A is first to win G sets.
pub fn match_win_prob<F: Real>(query: &MatchQuery<F>) -> Result<F> {
    let g = query.system.sets_to_win() as usize;
    let (q_odd, q_even) = per_set_win_probs(query)?;
    // values[a][b]: P[A wins the match | A has a set wins, B has b]
    let mut values = vec![vec![F::zero(); g + 1]; g + 1];
    for row in values.iter_mut().take(g) {
        row[g] = F::zero();
    }
    for b in 0..g {
        values[g][b] = F::one();
    }
    for a in (0..g).rev() {
        for b in (0..g).rev() {
            let q = if (a + b) % 2 == 0 { q_odd } else { q_even };
            values[a][b] = q * values[a + 1][b] + (F::one() - q) * values[a][b + 1];
        }
    }
    Ok(values[0][0])
}

/// Per-set joint winner/duration laws for odd and even sets.
fn per_set_laws<F: Real>(query: &MatchQuery<F>, tail_threshold: F) -> Result<[SetLaw<F>; 2]> {
    Ok([
        set_law(&query.system, &query.model, query.first_server, tail_threshold)?,
        set_law(
            &query.system,
            &query.model,
            query.first_server.other(),
            tail_threshold,
        )?,
    ])
}

/// Distribution of the total number of rallies in a match, unconditional on
/// the winner. Convolution over set-winner sequences; truncation from the
/// per-set laws accumulates into the recorded tail.
pub fn match_duration_pmf<F: Real>(query: &MatchQuery<F>, tail_threshold: F) -> Result<Pmf<F>> {
    let g = query.system.sets_to_win() as usize;
    let per_set = F::from_usize(2 * g - 1).unwrap();
    let laws = per_set_laws(query, tail_threshold / per_set)?;
    let n = query.system.points_to_win() as u64;

    // dists[a][b]: distribution of the absolute rally count on reaching the
    // live state (a, b) set wins; finished[d] collects terminal mass.
    let mut dists: Vec<Vec<Option<Vec<F>>>> = vec![vec![None; g + 1]; g + 1];
    dists[0][0] = Some(vec![F::one()]);
    let mut finished: Vec<F> = Vec::new();
    for total in 0..(2 * g - 1) {
        for a in 0..=total.min(g - 1) {
            let b = total - a;
            if b >= g {
                continue;
            }
            let Some(current) = dists[a][b].take() else {
                continue;
            };
            let law = &laws[total % 2];
            for (winner_law, na, nb) in
                [(&law.duration_a, a + 1, b), (&law.duration_b, a, b + 1)]
            {
                let terminal = na == g || nb == g;
                for (d, p) in winner_law.iter() {
                    if p <= F::zero() {
                        continue;
                    }
                    let conv: &mut Vec<F> = if terminal {
                        &mut finished
                    } else {
                        dists[na][nb].get_or_insert_with(Vec::new)
                    };
                    if conv.len() < current.len() + d as usize {
                        conv.resize(current.len() + d as usize, F::zero());
                    }
                    for (i, &v) in current.iter().enumerate() {
                        if v > F::zero() {
                            conv[i + d as usize] = conv[i + d as usize] + v * p;
                        }
                    }
                }
            }
        }
    }
    let min = query.system.sets_to_win() as u64 * n;
    let probs: Vec<F> = finished
        .iter()
        .skip(min as usize)
        .copied()
        .collect();
    let stored: F = probs.iter().copied().sum();
    let tail = F::one() - stored;
    Ok(Pmf::new(min, probs, tail))
}

/// Mean and variance of the match duration, exact via total expectation and
/// variance over set-winner sequences with closed-form per-set moments.
pub fn match_duration_moments<F: Real>(query: &MatchQuery<F>) -> Result<(F, F)> {
    let g = query.system.sets_to_win() as usize;
    // Threshold is irrelevant for the moments; keep the laws cheap.
    let laws = per_set_laws(query, F::from_f64(1e-6).unwrap())?;
    let mut e1 = F::zero();
    let mut e2 = F::zero();
    // Depth-first over winner sequences, carrying the sequence probability
    // and the accumulated conditional mean and variance.
    let mut stack: Vec<(usize, usize, F, F, F)> = vec![(0, 0, F::one(), F::zero(), F::zero())];
    while let Some((a, b, prob, mean, var)) = stack.pop() {
        if a == g || b == g {
            e1 = e1 + prob * mean;
            e2 = e2 + prob * (var + mean * mean);
            continue;
        }
        let law = &laws[(a + b) % 2];
        for (mom, na, nb) in [(law.moments_a, a + 1, b), (law.moments_b, a, b + 1)] {
            if mom.mass <= F::zero() {
                continue;
            }
            let cond_mean = mom.m1 / mom.mass;
            let cond_var = mom.m2 / mom.mass - cond_mean * cond_mean;
            stack.push((na, nb, prob * mom.mass, mean + cond_mean, var + cond_var));
        }
    }
    Ok((e1, e2 - e1 * e1))
}

/// Compare two scoring systems over a list of model points: match-winning
/// probabilities plus old/new ratios of expected duration and duration
/// standard deviation.
pub fn compare_systems<F: Real>(
    old_system: &ScoringSystem,
    new_system: &ScoringSystem,
    models: &[RallyModel<F>],
    first_server: PlayerId,
) -> Result<Vec<ComparisonRow<F>>> {
    let mut rows = Vec::with_capacity(models.len());
    for model in models {
        let old_q = MatchQuery {
            system: *old_system,
            model: *model,
            first_server,
        };
        let new_q = MatchQuery {
            system: *new_system,
            model: *model,
            first_server,
        };
        let (old_mean, old_var) = match_duration_moments(&old_q)?;
        let (new_mean, new_var) = match_duration_moments(&new_q)?;
        rows.push(ComparisonRow {
            old_system: *old_system,
            new_system: *new_system,
            model: *model,
            win_prob_old: match_win_prob(&old_q)?,
            win_prob_new: match_win_prob(&new_q)?,
            ratio_mean: old_mean / new_mean,
            ratio_std: old_var.sqrt() / new_var.sqrt(),
        });
    }
    Ok(rows)
}
