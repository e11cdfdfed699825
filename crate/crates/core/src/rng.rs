//! Counter-based random numbers (SplitMix64-CTR).
//!
//! Every 64-bit draw is a pure function of `(seed, stream, counter)`:
//!
//! ```text
//! key(seed, stream)  = mix64(seed ^ mix64(stream ^ STREAM_SALT))
//! draw(key, counter) = mix64(key.wrapping_add((counter + 1) * GOLDEN_GAMMA))
//! ```
//!
//! where `mix64` is the SplitMix64 output finalizer. Because draws are
//! addressed rather than produced by a running state, a sampler can give each
//! point its own stream and each random field of that point its own counter
//! value; the output is then identical on every platform and independent of
//! evaluation order.

/// Additive constant of SplitMix64 (2^64 / golden ratio).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed from a parent seed and an index.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// A generator positioned on one stream. Sequential draws advance the counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self::at(seed, stream, 0)
    }

    /// Resume a generator at a given counter (for checkpoints).
    pub fn at(seed: u64, stream: u64, counter: u64) -> Self {
        let key = mix64(seed ^ mix64(stream ^ STREAM_SALT));
        CounterRng { seed, stream, key, counter }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// The draw at an explicit counter value; does not move the generator.
    #[inline]
    pub fn peek(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = self.peek(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on the open interval (0, 1), 53 bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on (lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n` (n > 0), by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Standard normal pair by Box-Muller (two draws).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let th = 2.0 * core::f64::consts::PI * u2;
        (r * libm::cos(th), r * libm::sin(th))
    }

    /// Poisson variate. Multiplication method below mean 30, PTRS above.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if !(mean > 0.0) {
            return 0;
        }
        if mean < 30.0 {
            let l = libm::exp(-mean);
            let mut k = 0u64;
            let mut p = 1.0;
            loop {
                p *= self.uniform();
                if p <= l {
                    return k;
                }
                k += 1;
            }
        }
        // Hörmann's transformed rejection with squeeze.
        let slam = libm::sqrt(mean);
        let loglam = libm::log(mean);
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - libm::fabs(u);
            let k = libm::floor((2.0 * a / us + b) * u + mean + 0.43);
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            if libm::log(v) + libm::log(inv_alpha) - libm::log(a / (us * us) + b)
                <= -mean + k * loglam - libm::lgamma(k + 1.0)
            {
                return k as u64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // SplitMix64 with state 0: first outputs of the reference generator.
        let mut s: u64 = 0;
        let mut next = || {
            s = s.wrapping_add(GOLDEN_GAMMA);
            mix64(s)
        };
        assert_eq!(next(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(next(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(next(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn peek_matches_sequential_draws() {
        let mut r = CounterRng::new(42, 7);
        let peeked: [u64; 4] = core::array::from_fn(|i| r.peek(i as u64));
        for p in peeked {
            assert_eq!(r.next_u64(), p);
        }
        assert_eq!(r.counter(), 4);
    }

    #[test]
    fn resume_reproduces_tail() {
        let mut a = CounterRng::new(9, 1);
        for _ in 0..10 {
            a.next_u64();
        }
        let mut b = CounterRng::at(9, 1, 10);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_is_open() {
        let mut r = CounterRng::new(0, 0);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn poisson_mean_both_regimes() {
        for &mean in &[3.0, 80.0] {
            let mut r = CounterRng::new(5, 0);
            let n = 20_000;
            let s: u64 = (0..n).map(|_| r.poisson(mean)).sum();
            let m = s as f64 / n as f64;
            assert!((m - mean).abs() < 4.0 * libm::sqrt(mean / n as f64), "{mean} {m}");
        }
    }
}
