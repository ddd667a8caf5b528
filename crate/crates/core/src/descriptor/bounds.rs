//! Closed-form bounds on configurations and representative lengths.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

/// Number of configurations of `n` cluster elements spread over `t` arrays,
/// `C(n + t - 1, t - 1)`. Requires `t >= 1`.
pub fn epsilon(n: u64, t: u64) -> BigUint {
    assert!(t >= 1, "at least one array");
    binomial(n + t - 1, t - 1)
}

fn binomial(n: u64, r: u64) -> BigUint {
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Length bound on representatives of B_k-descriptors for `w` states:
/// `min(1 + (1 + w)^(2k + 4) + w, 1 + (k + 3)^(w^2 + 1) + w)`.
pub fn tau(w: u64, k: u64) -> BigUint {
    let tail = BigUint::one() + BigUint::from(w);
    let first = BigUint::from(1 + w).pow((2 * k + 4) as u32) + &tail;
    let second = BigUint::from(k + 3).pow((w * w + 1) as u32) + &tail;
    first.min(second)
}

/// [`tau`] as a `usize`, saturating.
pub fn tau_usize(w: usize, k: usize) -> usize {
    tau(w as u64, k as u64).to_usize().unwrap_or(usize::MAX)
}

/// Tracks with pairwise distinct descriptor elements are at most this long.
pub fn zero_termination_bound(w: usize) -> usize {
    2 + w * w
}

/// Upper bound on the number of distinct elements in a descriptor sequence.
pub fn delm_bound(w: usize) -> usize {
    1 + w * w
}
