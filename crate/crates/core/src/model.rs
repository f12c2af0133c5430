//! Domain types shared by every other module: the scoring rule triple, the
//! rally model, player identities and score states.

use crate::{Error, Real, Result};

/// One of the two opponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlayerId {
    A,
    B,
}

impl PlayerId {
    pub fn other(self) -> PlayerId {
        match self {
            PlayerId::A => PlayerId::B,
            PlayerId::B => PlayerId::A,
        }
    }
}

/// The rule triple: serve changes every `m` rallies pre-tie, a set is first
/// to `n` points (two-point lead after a tie at `n-1` all), a match is first
/// to `g` set wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScoringSystem {
    m: u32,
    n: u32,
    g: u32,
}

impl ScoringSystem {
    pub fn new(m: u32, n: u32, g: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::ZeroServeBlock);
        }
        if n < 2 {
            return Err(Error::PointsTooSmall(n));
        }
        if g < 1 {
            return Err(Error::ZeroSetsToWin);
        }
        Ok(ScoringSystem { m, n, g })
    }

    pub fn serves_per_turn(&self) -> u32 {
        self.m
    }

    pub fn points_to_win(&self) -> u32 {
        self.n
    }

    pub fn sets_to_win(&self) -> u32 {
        self.g
    }

    /// True when the serve block length divides `n - 1`. Set-winning
    /// probabilities are independent of the first server exactly when this
    /// holds.
    pub fn serve_block_divides(&self) -> bool {
        (self.n - 1) % self.m == 0
    }

    /// Rally count at which the tie score is reached.
    pub fn tie_rally_count(&self) -> u64 {
        2 * (self.n as u64 - 1)
    }
}

/// Player strengths. `Server` carries the probability each player wins a
/// rally they serve; `NoServer` is the collapsed one-parameter case in which
/// the serve is irrelevant (stored so that `p_a = p`, `p_b = 1 - p`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RallyModel<F> {
    Server { p_a: F, p_b: F },
    NoServer { p: F },
}

impl<F: Real> RallyModel<F> {
    pub fn server(p_a: F, p_b: F) -> Result<Self> {
        check_prob(p_a)?;
        check_prob(p_b)?;
        Ok(RallyModel::Server { p_a, p_b })
    }

    pub fn no_server(p: F) -> Result<Self> {
        check_prob(p)?;
        Ok(RallyModel::NoServer { p })
    }

    /// Probability A wins a rally A serves.
    pub fn p_a(&self) -> F {
        match *self {
            RallyModel::Server { p_a, .. } => p_a,
            RallyModel::NoServer { p } => p,
        }
    }

    /// Probability B wins a rally B serves.
    pub fn p_b(&self) -> F {
        match *self {
            RallyModel::Server { p_b, .. } => p_b,
            RallyModel::NoServer { p } => F::one() - p,
        }
    }

    /// Probability A wins a rally served by `server`.
    pub fn rally_win_prob_a(&self, server: PlayerId) -> F {
        match server {
            PlayerId::A => self.p_a(),
            PlayerId::B => F::one() - self.p_b(),
        }
    }

    /// The model as seen from B's perspective: (p_a, p_b) -> (p_b, p_a).
    pub fn swap_roles(&self) -> Self {
        match *self {
            RallyModel::Server { p_a, p_b } => RallyModel::Server { p_a: p_b, p_b: p_a },
            RallyModel::NoServer { p } => RallyModel::NoServer { p: F::one() - p },
        }
    }

    /// True iff any stored probability is exactly 0 or 1.
    pub fn is_degenerate(&self) -> bool {
        let boundary = |x: F| x == F::zero() || x == F::one();
        match *self {
            RallyModel::Server { p_a, p_b } => boundary(p_a) || boundary(p_b),
            RallyModel::NoServer { p } => boundary(p),
        }
    }
}

fn check_prob<F: Real>(p: F) -> Result<()> {
    if p >= F::zero() && p <= F::one() {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(
            p.to_f64().unwrap_or(f64::NAN),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationWarning {
    /// `m` does not divide `n - 1`: the formulas still apply but set-winning
    /// probabilities may depend on who serves first.
    ServeBlockDoesNotDivide { m: u32, n: u32 },
    /// Some probability is exactly 0 or 1; downstream results are exact
    /// limits.
    DegenerateModel,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Warnings for a system/model pair. Hard errors (n < 2, probabilities out
/// of range, ...) are rejected by the constructors instead.
pub fn validate<F: Real>(system: &ScoringSystem, model: &RallyModel<F>) -> ValidationReport {
    let mut warnings = Vec::new();
    if !system.serve_block_divides() {
        warnings.push(ValidationWarning::ServeBlockDoesNotDivide {
            m: system.serves_per_turn(),
            n: system.points_to_win(),
        });
    }
    if model.is_degenerate() {
        warnings.push(ValidationWarning::DegenerateModel);
    }
    ValidationReport { warnings }
}

/// Whether the score sits before or after the tie at (n-1, n-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScorePhase {
    PreTie,
    Tie,
}

/// An intermediate score: A's points, B's points, and the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScoreState {
    pub alpha: u32,
    pub beta: u32,
    pub phase: ScorePhase,
}

impl ScoreState {
    pub fn new(alpha: u32, beta: u32, phase: ScorePhase) -> Self {
        ScoreState { alpha, beta, phase }
    }

    /// Consistency against a concrete system. Tie states need both players
    /// at `n - 1` or beyond with at most a one-point gap (a two-point lead
    /// ends the set).
    pub fn check(&self, system: &ScoringSystem) -> Result<()> {
        let n = system.points_to_win();
        let bad = Err(Error::InvalidScoreState(
            self.alpha,
            self.beta,
            match self.phase {
                ScorePhase::PreTie => "pre-tie",
                ScorePhase::Tie => "tie",
            },
        ));
        match self.phase {
            ScorePhase::PreTie => {
                if self.alpha > n || self.beta > n || (self.alpha >= n && self.beta >= n) {
                    return bad;
                }
            }
            ScorePhase::Tie => {
                if self.alpha + 1 < n || self.beta + 1 < n {
                    return bad;
                }
                if self.alpha.abs_diff(self.beta) > 2 {
                    return bad;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constructor_rejects_bad_triples() {
        assert_eq!(ScoringSystem::new(2, 1, 3), Err(Error::PointsTooSmall(1)));
        assert_eq!(ScoringSystem::new(0, 11, 1), Err(Error::ZeroServeBlock));
        assert_eq!(ScoringSystem::new(2, 11, 0), Err(Error::ZeroSetsToWin));
        assert!(ScoringSystem::new(5, 21, 2).is_ok());
    }

    #[test]
    fn constructor_rejects_bad_probabilities() {
        assert!(RallyModel::server(1.2f64, 0.5).is_err());
        assert!(RallyModel::server(0.5f64, -0.1).is_err());
        assert!(RallyModel::no_server(f64::NAN).is_err());
        assert!(RallyModel::server(0.0f64, 1.0).is_ok());
    }

    #[test]
    fn validation_flags() {
        let clean = ScoringSystem::new(5, 21, 2).unwrap();
        let model = RallyModel::server(0.6f64, 0.5).unwrap();
        assert!(validate(&clean, &model).is_clean());

        let odd = ScoringSystem::new(4, 11, 3).unwrap();
        let report = validate(&odd, &model);
        assert_eq!(
            report.warnings,
            vec![ValidationWarning::ServeBlockDoesNotDivide { m: 4, n: 11 }]
        );

        let degen = RallyModel::server(1.0f64, 0.0).unwrap();
        assert!(validate(&clean, &degen)
            .warnings
            .contains(&ValidationWarning::DegenerateModel));
    }

    #[test]
    fn swap_examples() {
        let m = RallyModel::server(0.7f64, 0.5).unwrap();
        assert_eq!(m.swap_roles(), RallyModel::Server { p_a: 0.5, p_b: 0.7 });
        let ns = RallyModel::no_server(0.6f64).unwrap();
        assert_eq!(ns.swap_roles().p_a(), 0.4);
    }

    #[test]
    fn no_server_probabilities_sum_to_one_exactly() {
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            let m = RallyModel::no_server(p).unwrap();
            assert_eq!(m.p_a() + m.p_b(), 1.0, "p = {p}");
        }
    }

    proptest! {
        #[test]
        fn swap_roles_is_an_involution(p_a in 0.0f64..=1.0, p_b in 0.0f64..=1.0) {
            let m = RallyModel::server(p_a, p_b).unwrap();
            prop_assert_eq!(m.swap_roles().swap_roles(), m);
            // The no-server swap goes through 1 - p, so a double swap is only
            // exact up to one rounding step.
            let ns = RallyModel::no_server(p_a).unwrap();
            prop_assert!((ns.swap_roles().swap_roles().p_a() - p_a).abs() <= 1e-15);
        }
    }
}
