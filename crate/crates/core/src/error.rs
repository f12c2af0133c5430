use crate::model::PlayerId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("points to win a set must be at least 2, got {0}")]
    PointsTooSmall(u32),
    #[error("serves per turn must be at least 1")]
    ZeroServeBlock,
    #[error("sets to win a match must be at least 1")]
    ZeroSetsToWin,
    #[error("probability {0} lies outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("rally indices are 1-based; index 0 is invalid")]
    ZeroRallyIndex,
    #[error("last scorer {0:?} requires that player to have scored at least one point")]
    LastScorerWithoutPoint(PlayerId),
    #[error("tie never resolves: every post-tie rally pair continues the tie")]
    TieNeverResolves,
    #[error("set already decided at {0}-{1}")]
    SetAlreadyDecided(u32, u32),
    #[error("score state {0}-{1} (phase {2}) is not consistent with the scoring system")]
    InvalidScoreState(u32, u32, &'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("rally cap {0} exceeded during simulation")]
    RallyCapExceeded(u64),
    #[error("observation score {0}-{1} is not a terminal set score for n = {2}")]
    NonTerminalObservation(u32, u32, u32),
    #[error("no observation has positive likelihood anywhere on the search grid")]
    LikelihoodIdenticallyZero,
}
