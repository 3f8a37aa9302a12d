//! Deterministic seeded randomness.
//!
//! Everything sampled in this crate (protocol tables, sampled support
//! pairs, Monte-Carlo draws, random test instances) comes from SplitMix64,
//! chosen because its reference algorithm is three lines long and trivially
//! reproducible in any language:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! All arithmetic is mod 2^64. Bounded draws use rejection sampling on the
//! top of the range (never plain modulo), so they are unbiased and equally
//! reproducible: draw 64-bit words, discard any word >= largest multiple of
//! the bound, return the remainder of the first accepted word.

/// SplitMix64 stream over a 64-bit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` by rejection sampling. `bound` must be
    /// nonzero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below(0)");
        if bound.is_power_of_two() {
            return self.next_u64() & (bound - 1);
        }
        // Words at or above the largest multiple of `bound` below 2^64 are
        // rejected; 2^64 mod bound words would otherwise be overweighted.
        let spill = (u64::MAX % bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= u64::MAX - spill {
                return v % bound;
            }
        }
    }

    /// Next output as one bit.
    pub fn next_bit(&mut self) -> u64 {
        self.next_u64() & 1
    }

    /// Chooses a sorted `size`-element subset of `0..universe` by partial
    /// Fisher-Yates over an index array.
    pub fn subset(&mut self, universe: u64, size: usize) -> Vec<u64> {
        assert!(size as u64 <= universe, "subset larger than universe");
        let mut pool: Vec<u64> = (0..universe).collect();
        for i in 0..size {
            let j = i as u64 + self.next_below(universe - i as u64);
            pool.swap(i, j as usize);
        }
        let mut picked = pool[..size].to_vec();
        picked.sort_unstable();
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vectors_seed_0() {
        // First three outputs of the published reference algorithm for
        // seed 0, cross-checked against an independent implementation.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(rng.next_u64(), 0x6e789e6aa1b965f4);
        assert_eq!(rng.next_u64(), 0x06c45d188009454f);
    }

    #[test]
    fn reference_vector_large_seed() {
        let mut rng = SplitMix64::new(0x1234_5678_9abc_def0);
        let first = rng.next_u64();
        let second = rng.next_u64();
        assert_ne!(first, second);
        // Same seed, same stream.
        let mut again = SplitMix64::new(0x1234_5678_9abc_def0);
        assert_eq!(again.next_u64(), first);
        assert_eq!(again.next_u64(), second);
    }

    #[test]
    fn bounded_draws_are_in_range_and_deterministic() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for bound in [1u64, 2, 3, 5, 7, 16, 1000, u64::MAX] {
            for _ in 0..200 {
                let x = a.next_below(bound);
                assert!(x < bound);
                assert_eq!(x, b.next_below(bound));
            }
        }
    }

    #[test]
    fn subsets_are_sorted_distinct_and_cover() {
        let mut rng = SplitMix64::new(42);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let s = rng.subset(16, 4);
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&v| v < 16));
            seen.insert(s);
        }
        // 200 draws from C(16,4) = 1820 subsets should not collapse.
        assert!(seen.len() > 50);
    }
}
