use num_traits::{Float, FromPrimitive};
use once_cell::sync::Lazy;
use std::sync::RwLock;

/// Scalar type the analytical core is generic over.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + std::iter::Sum + 'static {}
impl<T> Real for T where T: Float + FromPrimitive + std::fmt::Debug + std::iter::Sum + 'static {}

/// Largest row of the exact Pascal triangle that fits in u128.
const MAX_EXACT_ROW: usize = 131;

static PASCAL: Lazy<RwLock<Vec<Vec<u128>>>> = Lazy::new(|| RwLock::new(vec![vec![1]]));

fn pascal_exact(n: usize, k: usize) -> u128 {
    {
        let rows = PASCAL.read().unwrap();
        if n < rows.len() {
            return rows[n][k];
        }
    }
    let mut rows = PASCAL.write().unwrap();
    while rows.len() <= n {
        let prev = rows.last().unwrap();
        let mut row = vec![1u128; prev.len() + 1];
        for i in 1..prev.len() {
            row[i] = prev[i - 1] + prev[i];
        }
        rows.push(row);
    }
    rows[n][k]
}

/// Binomial coefficient C(n, k), zero outside 0 <= k <= n.
///
/// Exact integer arithmetic up to row 131, converted to `F` at the call;
/// beyond that a multiplicative f64 loop (about one ulp of error per factor).
pub fn binomial<F: Real>(n: u64, k: u64) -> F {
    if k > n {
        return F::zero();
    }
    let k = k.min(n - k);
    if n as usize <= MAX_EXACT_ROW {
        F::from_u128(pascal_exact(n as usize, k as usize)).unwrap_or_else(F::infinity)
    } else {
        let mut c = 1.0f64;
        for i in 0..k {
            c *= (n - i) as f64;
            c /= (i + 1) as f64;
        }
        F::from_f64(c).unwrap_or_else(F::infinity)
    }
}

/// base^exp with the convention 0^0 = 1, so degenerate models stay finite.
pub(crate) fn pow0<F: Real>(base: F, exp: u64) -> F {
    if exp == 0 {
        F::one()
    } else {
        base.powi(exp as i32)
    }
}
