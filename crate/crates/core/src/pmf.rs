//! Discrete distributions over rally counts with explicit truncation mass.

use crate::Real;

/// A (possibly sub-normalized) pmf over integers `min..=min+len-1`, plus the
/// mass cut off beyond the stored support.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<F> {
    min: u64,
    probs: Vec<F>,
    tail: F,
}

impl<F: Real> Pmf<F> {
    pub fn new(min: u64, probs: Vec<F>, tail: F) -> Self {
        Pmf { min, probs, tail }
    }

    pub fn min_support(&self) -> u64 {
        self.min
    }

    pub fn max_support(&self) -> u64 {
        self.min + self.probs.len() as u64 - 1
    }

    pub fn prob(&self, value: u64) -> F {
        if value < self.min {
            return F::zero();
        }
        self.probs
            .get((value - self.min) as usize)
            .copied()
            .unwrap_or_else(F::zero)
    }

    /// Mass truncated away beyond the stored support.
    pub fn tail(&self) -> F {
        self.tail
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, F)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.min + i as u64, p))
    }

    /// Stored mass plus tail.
    pub fn total_mass(&self) -> F {
        self.stored_mass() + self.tail
    }

    pub fn stored_mass(&self) -> F {
        self.probs.iter().copied().sum()
    }

    /// Mean of the stored (truncated) part, not renormalized.
    pub fn truncated_mean(&self) -> F {
        self.iter().map(|(d, p)| F::from_u64(d).unwrap() * p).sum()
    }

    /// Raw second moment of the stored part.
    pub fn truncated_second_moment(&self) -> F {
        self.iter()
            .map(|(d, p)| {
                let d = F::from_u64(d).unwrap();
                d * d * p
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_mass() {
        let pmf = Pmf::new(3, vec![0.25f64, 0.0, 0.5], 0.25);
        assert_eq!(pmf.prob(2), 0.0);
        assert_eq!(pmf.prob(3), 0.25);
        assert_eq!(pmf.prob(4), 0.0);
        assert_eq!(pmf.prob(5), 0.5);
        assert_eq!(pmf.prob(6), 0.0);
        assert_eq!(pmf.max_support(), 5);
        assert!((pmf.total_mass() - 1.0).abs() < 1e-15);
        assert!((pmf.truncated_mean() - (3.0 * 0.25 + 5.0 * 0.5)).abs() < 1e-15);
    }
}
