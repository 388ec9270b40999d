//! Portable random streams.
//!
//! Two generators live here, both built on the SplitMix64 output function
//! (Steele, Lea & Flood, 2014):
//!
//! * [`SplitMix64`] is a sequential generator used by the instance
//!   generators. State advances by the golden-gamma `0x9E3779B97F4A7C15`
//!   and each output is `mix64(state)`.
//! * [`StreamKey`] is a counter-based stream: a draw is a pure function of
//!   `(seed, purpose, agent, particle, iteration)`. The fields are folded in
//!   that order with `h = mix64(h ^ field + GAMMA)` starting from
//!   `h = mix64(seed)`. Any process holding the key can reproduce the draw,
//!   which is what lets the distributed run and the centralized reference
//!   consume identical randomness.
//!
//! Uniform reals take the top 53 bits: `(x >> 11) as f64 * 2^-53`, giving
//! values in `[0, 1)`. Bounded integers use the multiply-shift map
//! `(x as u128 * n as u128) >> 64`.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential SplitMix64 generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform in `[lo, hi]` (the upper end is reachable only through rounding).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// What a keyed draw is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    InitPosition = 0,
    R1 = 1,
    R2 = 2,
}

/// Key of one counter-based draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub purpose: Purpose,
    pub agent: u64,
    pub particle: u64,
    pub iteration: u64,
}

impl StreamKey {
    pub fn new(seed: u64, purpose: Purpose, agent: usize, particle: usize, iteration: u64) -> Self {
        Self { seed, purpose, agent: agent as u64, particle: particle as u64, iteration }
    }

    pub fn bits(&self) -> u64 {
        let mut h = mix64(self.seed);
        for field in [self.purpose as u64, self.agent, self.particle, self.iteration] {
            h = mix64(h ^ field.wrapping_add(GAMMA));
        }
        h
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&self) -> f64 {
        unit_f64(self.bits())
    }
}

/// `r1` and `r2` for one (agent, particle, iteration) velocity update.
pub fn velocity_draws(seed: u64, agent: usize, particle: usize, iteration: u64) -> (f64, f64) {
    (
        StreamKey::new(seed, Purpose::R1, agent, particle, iteration).unit(),
        StreamKey::new(seed, Purpose::R2, agent, particle, iteration).unit(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Published SplitMix64 outputs for seed 1234567.
        let mut rng = SplitMix64::new(1234567);
        let expected = [
            6457827717110365317u64,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ];
        for e in expected {
            assert_eq!(rng.next_u64(), e);
        }
    }

    #[test]
    fn unit_range() {
        let mut rng = SplitMix64::new(9);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
        assert!(unit_f64(u64::MAX) < 1.0);
        assert_eq!(unit_f64(0), 0.0);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = SplitMix64::new(3);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            seen[rng.below(7)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn keyed_draws_are_pure_and_distinct() {
        let a = StreamKey::new(1, Purpose::R1, 2, 3, 4);
        assert_eq!(a.bits(), a.bits());
        let others = [
            StreamKey::new(2, Purpose::R1, 2, 3, 4),
            StreamKey::new(1, Purpose::R2, 2, 3, 4),
            StreamKey::new(1, Purpose::R1, 3, 3, 4),
            StreamKey::new(1, Purpose::R1, 2, 4, 4),
            StreamKey::new(1, Purpose::R1, 2, 3, 5),
            // swapped fields must not collide
            StreamKey::new(1, Purpose::R1, 3, 2, 4),
        ];
        for o in others {
            assert_ne!(a.bits(), o.bits());
        }
    }

    #[test]
    fn keyed_mean_is_roughly_half() {
        let n = 20_000;
        let sum: f64 = (0..n).map(|k| StreamKey::new(5, Purpose::R2, 0, k, 7).unit()).sum();
        assert!((sum / n as f64 - 0.5).abs() < 0.01);
    }
}
