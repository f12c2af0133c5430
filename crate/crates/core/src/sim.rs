//! Monte Carlo play-out of sets and matches, plus an independent
//! forward dynamic program over score states. Both exist to cross-check the
//! analytical formulas, so they share no code with them beyond the serve
//! rotation rule.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{PlayerId, RallyModel, ScoringSystem};
use crate::serve::server_of_rally;
use crate::{Error, Result};

const CHUNK_TRIALS: u64 = 65_536;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub system: ScoringSystem,
    pub model: RallyModel<f64>,
    pub first_server: PlayerId,
    /// Abort a single play-out beyond this many rallies instead of spinning
    /// forever on degenerate models.
    pub rally_cap: u64,
}

impl SimConfig {
    pub fn new(
        trials: u64,
        seed: u64,
        system: ScoringSystem,
        model: RallyModel<f64>,
        first_server: PlayerId,
    ) -> Self {
        SimConfig {
            trials,
            seed,
            system,
            model,
            first_server,
            rally_cap: 1_000_000,
        }
    }
}

/// Aggregated results of a batch of simulated sets or matches.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimSummary {
    pub trials: u64,
    pub wins_a: u64,
    pub total_rallies: u64,
    pub duration_histogram: BTreeMap<u64, u64>,
    /// Final point score per set trial, or final set score per match trial.
    pub final_score_histogram: BTreeMap<(u32, u32), u64>,
    pub a_own_serve_wins: u64,
    pub a_own_serves: u64,
    pub b_own_serve_wins: u64,
    pub b_own_serves: u64,
}

impl SimSummary {
    pub fn win_fraction_a(&self) -> f64 {
        self.wins_a as f64 / self.trials as f64
    }

    pub fn mean_duration(&self) -> f64 {
        self.total_rallies as f64 / self.trials as f64
    }

    pub fn duration_variance(&self) -> f64 {
        let mean = self.mean_duration();
        let m2: f64 = self
            .duration_histogram
            .iter()
            .map(|(&d, &c)| (d as f64) * (d as f64) * c as f64)
            .sum();
        m2 / self.trials as f64 - mean * mean
    }

    fn merge(&mut self, other: &SimSummary) {
        self.trials += other.trials;
        self.wins_a += other.wins_a;
        self.total_rallies += other.total_rallies;
        for (&d, &c) in &other.duration_histogram {
            *self.duration_histogram.entry(d).or_insert(0) += c;
        }
        for (&s, &c) in &other.final_score_histogram {
            *self.final_score_histogram.entry(s).or_insert(0) += c;
        }
        self.a_own_serve_wins += other.a_own_serve_wins;
        self.a_own_serves += other.a_own_serves;
        self.b_own_serve_wins += other.b_own_serve_wins;
        self.b_own_serves += other.b_own_serves;
    }
}

/// Result of one played-out set.
struct SetOutcome {
    winner: PlayerId,
    points_a: u32,
    points_b: u32,
    rallies: u64,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&chunk.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn play_set(
    system: &ScoringSystem,
    model: &RallyModel<f64>,
    first_server: PlayerId,
    rally_cap: u64,
    rng: &mut ChaCha8Rng,
    tally: &mut SimSummary,
) -> Result<SetOutcome> {
    let n = system.points_to_win();
    let tie_at = system.tie_rally_count();
    let mut a = 0u32;
    let mut b = 0u32;
    let mut rally = 0u64;
    loop {
        rally += 1;
        if rally > rally_cap {
            return Err(Error::RallyCapExceeded(rally_cap));
        }
        let tie_reached = if a + b >= 2 * (n - 1) { Some(tie_at) } else { None };
        let server = server_of_rally(rally, system, first_server, tie_reached)?;
        let p_server_wins = match server {
            PlayerId::A => model.p_a(),
            PlayerId::B => model.p_b(),
        };
        let server_scores = rng.gen_bool(p_server_wins);
        let scorer = if server_scores { server } else { server.other() };
        match server {
            PlayerId::A => {
                tally.a_own_serves += 1;
                if server_scores {
                    tally.a_own_serve_wins += 1;
                }
            }
            PlayerId::B => {
                tally.b_own_serves += 1;
                if server_scores {
                    tally.b_own_serve_wins += 1;
                }
            }
        }
        match scorer {
            PlayerId::A => a += 1,
            PlayerId::B => b += 1,
        }
        let leader_done = a.max(b) >= n && a.abs_diff(b) >= 2;
        if leader_done {
            let winner = if a > b { PlayerId::A } else { PlayerId::B };
            return Ok(SetOutcome {
                winner,
                points_a: a,
                points_b: b,
                rallies: rally,
            });
        }
    }
}

fn run_chunks<F>(config: &SimConfig, play: F) -> Result<SimSummary>
where
    F: Fn(&SimConfig, &mut ChaCha8Rng, &mut SimSummary) -> Result<()> + Sync,
{
    let chunks = config.trials.div_ceil(CHUNK_TRIALS);
    let partials: Vec<Result<SimSummary>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(config.seed, chunk);
            let trials =
                CHUNK_TRIALS.min(config.trials - chunk * CHUNK_TRIALS);
            let mut local = SimSummary::default();
            for _ in 0..trials {
                play(config, &mut rng, &mut local)?;
                local.trials += 1;
            }
            Ok(local)
        })
        .collect();
    let mut summary = SimSummary::default();
    for partial in partials {
        summary.merge(&partial?);
    }
    Ok(summary)
}

/// Simulate independent sets.
pub fn simulate_set(config: &SimConfig) -> Result<SimSummary> {
    run_chunks(config, |config, rng, local| {
        let outcome = play_set(
            &config.system,
            &config.model,
            config.first_server,
            config.rally_cap,
            rng,
            local,
        )?;
        if outcome.winner == PlayerId::A {
            local.wins_a += 1;
        }
        local.total_rallies += outcome.rallies;
        *local.duration_histogram.entry(outcome.rallies).or_insert(0) += 1;
        *local
            .final_score_histogram
            .entry((outcome.points_a, outcome.points_b))
            .or_insert(0) += 1;
        Ok(())
    })
}

/// Simulate independent matches (first to G sets, first serve alternating
/// between sets).
pub fn simulate_match(config: &SimConfig) -> Result<SimSummary> {
    run_chunks(config, |config, rng, local| {
        let g = config.system.sets_to_win();
        let mut sets_a = 0u32;
        let mut sets_b = 0u32;
        let mut rallies = 0u64;
        let mut server = config.first_server;
        while sets_a < g && sets_b < g {
            let outcome = play_set(
                &config.system,
                &config.model,
                server,
                config.rally_cap,
                rng,
                local,
            )?;
            match outcome.winner {
                PlayerId::A => sets_a += 1,
                PlayerId::B => sets_b += 1,
            }
            rallies += outcome.rallies;
            server = server.other();
        }
        if sets_a == g {
            local.wins_a += 1;
        }
        local.total_rallies += rallies;
        *local.duration_histogram.entry(rallies).or_insert(0) += 1;
        *local
            .final_score_histogram
            .entry((sets_a, sets_b))
            .or_insert(0) += 1;
        Ok(())
    })
}

/// Forward dynamic program over pre-tie score states, independent of the
/// combinatorial score formula.
#[derive(Debug, Clone)]
pub struct SetTable {
    n: u32,
    /// terminal[(winner_points, loser_points_winner_is_a)] style map:
    /// probability of each terminal pre-tie score keyed by (a, b).
    pub terminal: BTreeMap<(u32, u32), f64>,
    /// Probability of reaching (n-1, n-1).
    pub tie_reach: f64,
}

impl SetTable {
    pub fn win_prob_a_pre_tie(&self) -> f64 {
        self.terminal
            .iter()
            .filter(|((a, b), _)| a > b)
            .map(|(_, &p)| p)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.terminal.values().sum::<f64>() + self.tie_reach
    }

    pub fn points_to_win(&self) -> u32 {
        self.n
    }
}

/// Run the forward recursion: push reach probabilities rally by rally using
/// only the serve rotation rule and the per-rally win probabilities.
pub fn dp_set_table(
    system: &ScoringSystem,
    model: &RallyModel<f64>,
    first_server: PlayerId,
) -> Result<SetTable> {
    let n = system.points_to_win();
    let size = n as usize + 1;
    let mut reach = vec![vec![0.0f64; size]; size];
    reach[0][0] = 1.0;
    let mut terminal = BTreeMap::new();
    let mut tie_reach = 0.0;
    for total in 0..(2 * n - 1) {
        for a in 0..=total.min(n) {
            let b = total - a;
            if b > n {
                continue;
            }
            let mass = reach[a as usize][b as usize];
            if mass == 0.0 {
                continue;
            }
            let done = (a >= n || b >= n) && a.abs_diff(b) >= 2;
            if done {
                *terminal.entry((a, b)).or_insert(0.0) += mass;
                continue;
            }
            if a == n - 1 && b == n - 1 {
                tie_reach += mass;
                continue;
            }
            let server = server_of_rally(total as u64 + 1, system, first_server, None)?;
            let w = model.rally_win_prob_a(server);
            reach[a as usize + 1][b as usize] += mass * w;
            reach[a as usize][b as usize + 1] += mass * (1.0 - w);
        }
    }
    Ok(SetTable {
        n,
        terminal,
        tie_reach,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PlayerId::{A, B};
    use crate::set::{set_win_probs, tie_reach_prob};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn config(trials: u64, seed: u64, m: u32, n: u32, g: u32, model: RallyModel<f64>) -> SimConfig {
        SimConfig::new(
            trials,
            seed,
            ScoringSystem::new(m, n, g).unwrap(),
            model,
            A,
        )
    }

    #[test]
    fn identical_config_reproduces_exactly() {
        let c = config(20_000, 7, 2, 11, 1, RallyModel::server(0.55, 0.6).unwrap());
        assert_eq!(simulate_set(&c).unwrap(), simulate_set(&c).unwrap());
        let cm = config(2_000, 7, 2, 11, 2, RallyModel::server(0.55, 0.6).unwrap());
        assert_eq!(simulate_match(&cm).unwrap(), simulate_match(&cm).unwrap());
    }

    #[test]
    fn whitewash_play_out() {
        let c = config(1_000, 1, 5, 21, 1, RallyModel::server(1.0, 0.0).unwrap());
        let s = simulate_set(&c).unwrap();
        assert_eq!(s.wins_a, 1_000);
        assert_eq!(s.total_rallies, 21_000);
        assert_eq!(s.final_score_histogram.get(&(21, 0)), Some(&1_000));
    }

    #[test]
    fn rally_cap_trips_on_unresolvable_tie() {
        let mut c = config(10, 1, 1, 2, 1, RallyModel::server(1.0, 1.0).unwrap());
        c.rally_cap = 1_000;
        assert_eq!(simulate_set(&c), Err(Error::RallyCapExceeded(1_000)));
    }

    #[test]
    fn set_win_fraction_near_exact_value() {
        let model = RallyModel::server(0.6, 0.45).unwrap();
        let c = config(200_000, 42, 2, 11, 1, model);
        let s = simulate_set(&c).unwrap();
        let (exact, _) = set_win_probs(&c.system, &model, A).unwrap();
        let sigma = (exact * (1.0 - exact) / c.trials as f64).sqrt();
        close(s.win_fraction_a(), exact, 4.0 * sigma);
    }

    #[test]
    fn serve_tallies_estimate_rally_probabilities() {
        let model = RallyModel::server(0.7, 0.3).unwrap();
        let c = config(50_000, 9, 2, 11, 1, model);
        let s = simulate_set(&c).unwrap();
        let p_a_hat = s.a_own_serve_wins as f64 / s.a_own_serves as f64;
        let p_b_hat = s.b_own_serve_wins as f64 / s.b_own_serves as f64;
        close(p_a_hat, 0.7, 0.01);
        close(p_b_hat, 0.3, 0.01);
    }

    #[test]
    fn dp_table_mass_and_win_prob() {
        for (m, n) in [(1u32, 2u32), (2, 11), (5, 21), (3, 7)] {
            for model in [
                RallyModel::server(0.6, 0.45).unwrap(),
                RallyModel::no_server(0.3).unwrap(),
            ] {
                for first in [A, B] {
                    let system = ScoringSystem::new(m, n, 1).unwrap();
                    let table = dp_set_table(&system, &model, first).unwrap();
                    close(table.total_mass(), 1.0, 1e-12);
                    close(
                        table.tie_reach,
                        tie_reach_prob(&system, &model, first).unwrap(),
                        1e-12,
                    );
                }
            }
        }
    }

    #[test]
    fn dp_tiny_case_by_hand() {
        // m=1, n=2, no-server p=.6: pre-tie terminals are 2-0 and 0-2.
        let system = ScoringSystem::new(1, 2, 1).unwrap();
        let model = RallyModel::no_server(0.6).unwrap();
        let t = dp_set_table(&system, &model, A).unwrap();
        close(t.terminal[&(2, 0)], 0.36, 1e-15);
        close(t.terminal[&(0, 2)], 0.16, 1e-15);
        close(t.tie_reach, 0.48, 1e-15);
    }

    #[test]
    fn match_simulation_set_scores_consistent() {
        let model = RallyModel::server(0.6, 0.4).unwrap();
        let c = config(20_000, 3, 2, 11, 2, model);
        let s = simulate_match(&c).unwrap();
        assert_eq!(s.trials, 20_000);
        let total: u64 = s.final_score_histogram.values().sum();
        assert_eq!(total, 20_000);
        for (&(a, b), _) in &s.final_score_histogram {
            assert!((a == 2 && b < 2) || (b == 2 && a < 2));
        }
    }
}
