//! Shared fixtures for the benchmark targets.

use avoider_core::{IntervalSet, Rat};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use num_bigint;

pub fn rq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Deterministic random interval collection with bounded denominators.
pub fn random_interval_set(seed: u64, parts: usize, max_den: i64) -> IntervalSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(Rat, Rat)> = (0..parts)
        .map(|_| {
            let lo = rq(rng.gen_range(-20_000..20_000), rng.gen_range(1..=max_den));
            let hi = &lo + rq(rng.gen_range(1..4000), rng.gen_range(1..=max_den));
            (lo, hi)
        })
        .collect();
    IntervalSet::normalize(raw)
}
