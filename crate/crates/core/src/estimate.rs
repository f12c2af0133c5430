//! Estimating rally-winning probabilities from observed data, either from
//! per-serve tallies (closed-form binomial proportions) or from final set
//! scores (maximum likelihood over the exact score distribution).

use std::collections::HashMap;

use crate::model::{PlayerId, RallyModel, ScoringSystem};
use crate::set::{set_score_prob, SetScore};
use crate::{Error, Result};

/// Rally tallies broken down by server.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ServeCountData {
    pub a_serve_wins: u64,
    pub a_serves: u64,
    pub b_serve_wins: u64,
    pub b_serves: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServeCountEstimate {
    pub p_a: f64,
    pub p_b: f64,
    /// Standard errors of the two proportions.
    pub se_a: f64,
    pub se_b: f64,
    /// An estimate sits on 0 or 1, where the model degenerates.
    pub degenerate: bool,
}

/// Closed-form estimator: each player's rally-winning probability on own
/// serve is the fraction of own-serve rallies won.
pub fn mle_serve_counts(data: &ServeCountData) -> Result<ServeCountEstimate> {
    if data.a_serves == 0 || data.b_serves == 0 {
        return Err(Error::InsufficientData(
            "need at least one serve by each player",
        ));
    }
    if data.a_serve_wins > data.a_serves || data.b_serve_wins > data.b_serves {
        return Err(Error::InsufficientData("more wins than serves"));
    }
    let p_a = data.a_serve_wins as f64 / data.a_serves as f64;
    let p_b = data.b_serve_wins as f64 / data.b_serves as f64;
    Ok(ServeCountEstimate {
        p_a,
        p_b,
        se_a: (p_a * (1.0 - p_a) / data.a_serves as f64).sqrt(),
        se_b: (p_b * (1.0 - p_b) / data.b_serves as f64).sqrt(),
        degenerate: !(0.0..=1.0).contains(&p_a)
            || !(0.0..=1.0).contains(&p_b)
            || p_a == 0.0
            || p_a == 1.0
            || p_b == 0.0
            || p_b == 1.0,
    })
}

/// One observed complete set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScoreObservation {
    pub m: u32,
    pub n: u32,
    pub first_server: PlayerId,
    pub score_a: u32,
    pub score_b: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Spacing of the initial probability grid on [0.01, 0.99]^2.
    pub grid_step: f64,
    /// Fit the one-parameter model p_b = 1 - p_a instead.
    pub no_server: bool,
    /// Coordinate-wise golden-section refinement passes after the grid.
    pub refine_sweeps: u32,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            grid_step: 0.01,
            no_server: false,
            refine_sweeps: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleFit {
    pub p_a: f64,
    pub p_b: f64,
    pub log_likelihood: f64,
    /// Maximum sits on the edge of the searched region.
    pub at_boundary: bool,
}

const P_LO: f64 = 0.01;
const P_HI: f64 = 0.99;

struct Dataset {
    /// Distinct observations with multiplicities, each with the parsed
    /// terminal score and its scoring system.
    entries: Vec<(ScoringSystem, PlayerId, SetScore, f64)>,
}

impl Dataset {
    fn build(observations: &[ScoreObservation]) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InsufficientData("no observations"));
        }
        let mut counts: HashMap<ScoreObservation, u64> = HashMap::new();
        for obs in observations {
            *counts.entry(*obs).or_insert(0) += 1;
        }
        let mut entries = Vec::with_capacity(counts.len());
        for (obs, count) in counts {
            let system = ScoringSystem::new(obs.m, obs.n, 1)?;
            let score = SetScore::from_points(obs.n, obs.score_a, obs.score_b)?;
            entries.push((system, obs.first_server, score, count as f64));
        }
        Ok(Dataset { entries })
    }

    fn log_likelihood(&self, p_a: f64, p_b: f64) -> f64 {
        let Ok(model) = RallyModel::server(p_a, p_b) else {
            return f64::NEG_INFINITY;
        };
        let mut ll = 0.0;
        for (system, first, score, count) in &self.entries {
            let p = match set_score_prob(system, &model, *first, score) {
                Ok(p) if p > 0.0 => p,
                _ => return f64::NEG_INFINITY,
            };
            ll += count * p.ln();
        }
        ll
    }
}

fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Maximum likelihood fit of rally-winning probabilities from final set
/// scores: exhaustive grid scan followed by coordinate-wise golden-section
/// refinement.
pub fn mle_scores(observations: &[ScoreObservation], options: &MleOptions) -> Result<MleFit> {
    let data = Dataset::build(observations)?;
    let steps = ((P_HI - P_LO) / options.grid_step).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| P_LO + i as f64 * (P_HI - P_LO) / steps as f64)
        .collect();

    let eval = |p_a: f64, p_b: f64| {
        if options.no_server {
            data.log_likelihood(p_a, 1.0 - p_a)
        } else {
            data.log_likelihood(p_a, p_b)
        }
    };

    // Grid scan; ties resolved by averaging the tied argmax points.
    let mut best = f64::NEG_INFINITY;
    let mut tied: Vec<(f64, f64)> = Vec::new();
    for &pa in &grid {
        let pbs: &[f64] = if options.no_server { &[0.5] } else { &grid };
        for &pb in pbs {
            let ll = eval(pa, pb);
            if ll > best + 1e-12 {
                best = ll;
                tied.clear();
                tied.push((pa, pb));
            } else if (ll - best).abs() <= 1e-12 && ll.is_finite() {
                tied.push((pa, pb));
            }
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::LikelihoodIdenticallyZero);
    }
    let mut p_a = tied.iter().map(|t| t.0).sum::<f64>() / tied.len() as f64;
    let mut p_b = tied.iter().map(|t| t.1).sum::<f64>() / tied.len() as f64;

    let half = options.grid_step;
    for _ in 0..options.refine_sweeps {
        let lo = (p_a - half).max(P_LO);
        let hi = (p_a + half).min(P_HI);
        p_a = golden_section(lo, hi, |x| eval(x, p_b));
        if !options.no_server {
            let lo = (p_b - half).max(P_LO);
            let hi = (p_b + half).min(P_HI);
            p_b = golden_section(lo, hi, |x| eval(p_a, x));
        }
    }
    if options.no_server {
        p_b = 1.0 - p_a;
    }
    let log_likelihood = data.log_likelihood(p_a, p_b);
    let edge = |x: f64| x <= P_LO + 1e-6 || x >= P_HI - 1e-6;
    Ok(MleFit {
        p_a,
        p_b,
        log_likelihood,
        at_boundary: edge(p_a) || (!options.no_server && edge(p_b)),
    })
}
