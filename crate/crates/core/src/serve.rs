//! Deterministic serve bookkeeping: who serves a given rally, and the
//! decomposition of a rally count into complete service sequences plus a
//! trailing partial sequence.

use crate::model::{PlayerId, ScoringSystem};
use crate::{Error, Result};

/// Euclidean split of a rally count: `total = k * m + r` with `0 <= r < m`.
/// In a set whose first server is A, the first server owns `k1 = ceil(k/2)`
/// of the complete sequences and the trailing `r` serves belong to A iff `k`
/// is even.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServeDecomposition {
    pub k: u64,
    pub r: u64,
    pub k1: u64,
    pub k2: u64,
    pub trailing_server: PlayerId,
}

/// Split `total_rallies` into complete service sequences of length `m`.
pub fn decompose(total_rallies: u64, m: u32) -> ServeDecomposition {
    let m = m as u64;
    let k = total_rallies / m;
    let r = total_rallies % m;
    ServeDecomposition {
        k,
        r,
        k1: k.div_ceil(2),
        k2: k / 2,
        trailing_server: if k % 2 == 0 { PlayerId::A } else { PlayerId::B },
    }
}

/// Server of the rally with the given 1-based index.
///
/// Before the tie the serve rotates in blocks of `m` starting from
/// `first_server`. If `tie_reached_after` is given (the rally count at which
/// the tie score is reached, i.e. `2(n-1)`), later rallies alternate
/// strictly, starting from the player whose turn it would have been under
/// the block rotation.
pub fn server_of_rally(
    rally_index: u64,
    system: &ScoringSystem,
    first_server: PlayerId,
    tie_reached_after: Option<u64>,
) -> Result<PlayerId> {
    if rally_index == 0 {
        return Err(Error::ZeroRallyIndex);
    }
    let block_server = |idx: u64| -> PlayerId {
        let block = (idx - 1) / system.serves_per_turn() as u64;
        if block % 2 == 0 {
            first_server
        } else {
            first_server.other()
        }
    };
    match tie_reached_after {
        Some(t) if rally_index > t => {
            let base = block_server(t + 1);
            if (rally_index - t - 1) % 2 == 0 {
                Ok(base)
            } else {
                Ok(base.other())
            }
        }
        _ => Ok(block_server(rally_index)),
    }
}
