//! Seeded sampling.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`; every range draw
//! uses `u64` bounds so results do not depend on the platform's `usize`.
//! Subsets come from a partial Fisher-Yates shuffle of `0..p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FpSet, PrimeField};
use crate::error::{Error, Result};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a list of tags (prime, trial index, stream, ...)
/// into an independent 64-bit seed using the SplitMix64 finalizer.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    tags.iter().fold(mix(base), |acc, &t| {
        mix(acc ^ t.wrapping_add(0x9e37_79b9_7f4a_7c15))
    })
}

/// Uniform `m`-element subset of `F_p`, reproducible from `(p, m, seed)`.
pub fn sample_subset(field: &PrimeField, m: u64, seed: u64) -> Result<FpSet> {
    sample_subset_with(field, m, &mut rng_from_seed(seed))
}

pub fn sample_subset_with<R: Rng>(field: &PrimeField, m: u64, rng: &mut R) -> Result<FpSet> {
    let p = field.p();
    if m > p {
        return Err(Error::SizeExceedsField {
            requested: m,
            field_size: p,
        });
    }
    if m == p {
        return Ok(FpSet::full(field));
    }
    // sparse Fisher-Yates: only displaced slots are stored
    let mut displaced = std::collections::HashMap::new();
    let mut set = FpSet::empty(field);
    for i in 0..m {
        let j = rng.gen_range(i..p);
        let at_j = *displaced.get(&j).unwrap_or(&j);
        let at_i = *displaced.get(&i).unwrap_or(&i);
        displaced.insert(j, at_i);
        set.insert(at_j);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_sizes() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(sample_subset(&f, 7, 3).unwrap(), FpSet::full(&f));
        assert!(sample_subset(&f, 0, 3).unwrap().is_empty());
        assert_eq!(
            sample_subset(&f, 8, 3),
            Err(Error::SizeExceedsField {
                requested: 8,
                field_size: 7
            })
        );
    }

    #[test]
    fn deterministic_and_exact_size() {
        let f = PrimeField::new(101).unwrap();
        let a = sample_subset(&f, 10, 42).unwrap();
        assert_eq!(a, sample_subset(&f, 10, 42).unwrap());
        assert_eq!(a.len(), 10);
        assert_ne!(a, sample_subset(&f, 10, 43).unwrap());
        for m in 0..=101 {
            assert_eq!(sample_subset(&f, m, m).unwrap().len() as u64, m);
        }
    }

    #[test]
    fn frozen_output() {
        // pins the generator contract; a change here breaks reproducibility
        let f = PrimeField::new(101).unwrap();
        assert_eq!(sample_subset(&f, 5, 2024).unwrap().to_vec(), vec![7, 51, 69, 70, 99]);
        assert_eq!(derive_seed(1, &[2, 3]), 6036403979805865856);
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
    }

    #[test]
    fn singletons_are_uniform() {
        let f = PrimeField::new(101).unwrap();
        let draws = 10_000u64;
        let mut counts = [0u64; 101];
        for s in 0..draws {
            let x = sample_subset(&f, 1, derive_seed(7, &[s])).unwrap().to_vec()[0];
            counts[x as usize] += 1;
        }
        let mean = draws as f64 / 101.0;
        let sigma = (draws as f64 * (1.0 / 101.0) * (100.0 / 101.0)).sqrt();
        for (x, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - mean).abs() <= 5.0 * sigma,
                "element {x} drawn {c} times"
            );
        }
    }
}
