//! Deterministic random source.
//!
//! SplitMix64 generator, hand-rolled so that the decision stream for a given
//! seed is stable across platforms and dependency upgrades (the
//! reproducibility contract: identical seed implies identical outputs,
//! bit for bit).

use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    state: u64,
    pos: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, state: seed, pos: 0 }
    }

    /// Derives the stream for one trial from a base seed; parallel trial
    /// execution must use exactly this derivation for results to be
    /// independent of scheduling.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        RandomSource::new(seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn next_u64(&mut self) -> u64 {
        self.pos += 1;
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw on [0,1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer on `{0, .., k-1}` via rejection.
    pub fn uniform_below(&mut self, k: u64) -> u64 {
        debug_assert!(k > 0);
        if k == 1 {
            return 0;
        }
        let zone = u64::MAX - (u64::MAX % k);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % k;
            }
        }
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Bernoulli draw with rational probability `p`: one uniform draw on
    /// [0,1) at 64-bit resolution compared against `floor(p * 2^64)`.
    pub fn bernoulli(&mut self, p: &Rat) -> bool {
        let u = self.next_u64();
        if p >= &Rat::one() {
            return true;
        }
        if p.is_negative() || p.is_zero() {
            return false;
        }
        let threshold: BigInt = (p.numer() << 64u32) / p.denom();
        match threshold.to_u64() {
            Some(t) => u < t,
            None => true,
        }
    }
}

/// Precomputed Bernoulli threshold for repeated draws at a fixed `p`.
#[derive(Clone, Copy, Debug)]
pub struct CoinThreshold(u128);

impl CoinThreshold {
    pub fn new(p: &Rat) -> Self {
        if p >= &Rat::one() {
            return CoinThreshold(1u128 << 64);
        }
        if p.is_negative() || p.is_zero() {
            return CoinThreshold(0);
        }
        let t: BigInt = (p.numer() << 64u32) / p.denom();
        CoinThreshold(t.to_u128().unwrap_or(1u128 << 64))
    }

    pub fn draw(&self, rng: &mut RandomSource) -> bool {
        (rng.next_u64() as u128) < self.0
    }
}
