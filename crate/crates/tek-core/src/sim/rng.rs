// SPDX-License-Identifier: Apache-2.0

//! Seeded pseudo-random streams for workload generation.
//!
//! The generator is xorshift64*, a 64-bit xorshift with a multiplicative
//! output scramble; streams are derived by splitmix64 so that every
//! (seed, purpose, index) tuple gets an independent, platform-stable
//! sequence. Hand-rolled on purpose: scenario reproducibility must not
//! depend on any external crate's version-to-version stream stability.

/// splitmix64 mix function: maps a 64-bit value to a well-scrambled
/// 64-bit value; used for seeding and stream derivation.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xorshift64* stream. State is never zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> XorShift64Star {
        let mixed = splitmix64(seed);
        XorShift64Star { state: if mixed == 0 { 0x9E37_79B9_7F4A_7C15 } else { mixed } }
    }

    /// Independent stream for (seed, purpose, index) — used to give
    /// every thread and event plan its own sequence so scheduling order
    /// cannot perturb workload generation.
    pub fn stream(seed: u64, purpose: u64, index: u64) -> XorShift64Star {
        let mixed = splitmix64(seed ^ splitmix64(purpose.wrapping_add(0x517C_C1B7_2722_0A95)))
            ^ splitmix64(index.wrapping_add(0x631B_2693_1C59_AE45));
        XorShift64Star::new(mixed)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform draw in `[0, bound)` by rejection, bias-free.
    pub fn bounded(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let draw = self.next_u64();
            if draw < zone {
                return draw % bound;
            }
        }
    }

    /// Uniform draw in the inclusive range `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        if lo == hi {
            return lo;
        }
        lo + self.bounded(hi - lo + 1)
    }

    /// Uniform signed offset in `[-jitter, +jitter]`.
    pub fn jitter(&mut self, jitter: u64) -> i64 {
        if jitter == 0 {
            return 0;
        }
        self.range_inclusive(0, 2 * jitter) as i64 - jitter as i64
    }
}
