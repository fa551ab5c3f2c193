//! Independent-trajectory fan-out.
//!
//! Each trajectory `i` of an ensemble gets its own RNG stream derived from
//! `(master_seed, i)`, builds its own observers, and produces a value; the
//! results come back indexed, so folds are identical no matter how many
//! workers ran. With the `parallel` feature (default) the map runs on the
//! rayon pool; [`map_seeds_sequential`] is always available and
//! bit-identical to the parallel path.

use crate::rng::{trajectory_rng, ChaCha8Rng};

/// Map `f` over trajectory indices `0..count` with per-trajectory RNG
/// streams, in parallel when enabled.
pub fn map_seeds<T, F>(master_seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, ChaCha8Rng) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count)
            .into_par_iter()
            .map(|i| f(i, trajectory_rng(master_seed, i as u64)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seeds_sequential(master_seed, count, f)
    }
}

/// Sequential fallback with the same seeding and ordering as [`map_seeds`].
pub fn map_seeds_sequential<T, F>(master_seed: u64, count: usize, f: F) -> Vec<T>
where
    F: Fn(usize, ChaCha8Rng) -> T,
{
    (0..count)
        .map(|i| f(i, trajectory_rng(master_seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_and_sequential_agree() {
        let job = |i: usize, mut rng: ChaCha8Rng| -> (usize, u64) {
            let mut acc = 0u64;
            for _ in 0..100 {
                acc = acc.wrapping_add(rng.gen::<u64>());
            }
            (i, acc)
        };
        let par = map_seeds(99, 16, job);
        let seq = map_seeds_sequential(99, 16, job);
        assert_eq!(par, seq);
    }
}
