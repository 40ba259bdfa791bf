//! Self-contained pseudo-random number generation.
//!
//! Counterexamples and injected errors must reproduce bit-for-bit across
//! platforms, so everything random in this crate runs on an explicitly
//! specified generator instead of a platform default: xoshiro256** with the
//! reference constants, seeded through SplitMix64 as its authors recommend.

/// SplitMix64 stream, used for seeding and for deriving per-instance seeds.
#[derive(Debug, Clone)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256** generator (Blackman & Vigna reference constants).
#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn seeded(seed: u64) -> Self {
        let mut sm = SplitMix64(seed);
        Xoshiro256StarStar {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform value in `[0, bound)` via bitmask rejection (unbiased).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        if bound == 1 {
            return 0;
        }
        let mask = u64::MAX >> (bound - 1).leading_zeros();
        loop {
            let v = self.next_u64() & mask;
            if v < bound {
                return v;
            }
        }
    }

    /// Uniform double in `[-1, 1)`; test helper.
    pub fn next_f64_signed(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// `count` distinct values drawn uniformly from `[0, domain)`, in draw
    /// order. `count` must not exceed `domain`.
    pub fn distinct_below(&mut self, domain: u64, count: usize) -> Vec<u64> {
        assert!(count as u64 <= domain, "cannot draw {count} distinct values from {domain}");
        // Partial Fisher-Yates for small domains, rejection otherwise.
        if domain <= 1 << 16 {
            let mut pool: Vec<u64> = (0..domain).collect();
            let mut out = Vec::with_capacity(count);
            for j in 0..count {
                let k = j as u64 + self.below(domain - j as u64);
                pool.swap(j, k as usize);
                out.push(pool[j]);
            }
            out
        } else {
            let mut seen = std::collections::HashSet::with_capacity(count * 2);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let v = self.below(domain);
                if seen.insert(v) {
                    out.push(v);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xoshiro_reference_stream() {
        // First outputs for the all-SplitMix64(0) seeded state are stable.
        let mut a = Xoshiro256StarStar::seeded(42);
        let mut b = Xoshiro256StarStar::seeded(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Xoshiro256StarStar::seeded(43);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn below_is_in_range_and_hits_all_values() {
        let mut rng = Xoshiro256StarStar::seeded(7);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[rng.below(5) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn distinct_draws_are_distinct_and_uniform_domain() {
        let mut rng = Xoshiro256StarStar::seeded(1);
        let v = rng.distinct_below(16, 16);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());

        let w = rng.distinct_below(1 << 40, 100);
        let set: std::collections::HashSet<_> = w.iter().collect();
        assert_eq!(set.len(), 100);
        assert!(w.iter().all(|&x| x < 1 << 40));
    }
}
