//! Counter-based deterministic random streams.
//!
//! Every random quantity in a trial is a pure function of
//! (master seed, trial index, purpose label, entity indices), so any
//! number of workers in any order reproduce identical realizations, and
//! per-link fading can be recomputed on demand instead of stored.
//!
//! The generator is splitmix64 over a mixed stream id: not cryptographic,
//! but full-period, equidistributed enough for Monte Carlo, and two
//! multiplies per draw.

/// Purpose labels keeping the per-trial substreams disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// BS point counts and positions of one tier.
    BsLayout(u32),
    /// User point count and positions.
    UserLayout,
    /// Per-link fading, keyed by (user index, BS index).
    Fading,
    /// Per-BS Bernoulli draws of the random on/off policy.
    RandomOnOff,
    /// Probe-point placement for distance-law sampling.
    Probe,
}

impl StreamKind {
    fn label(self) -> u64 {
        match self {
            StreamKind::BsLayout(tier) => 0x100 + tier as u64,
            StreamKind::UserLayout => 1,
            StreamKind::Fading => 2,
            StreamKind::RandomOnOff => 3,
            StreamKind::Probe => 4,
        }
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// A deterministic stream of draws for one (trial, purpose) pair.
#[derive(Debug, Clone)]
pub struct Stream {
    id: u64,
    counter: u64,
}

impl Stream {
    pub fn new(master_seed: u64, trial: u64, kind: StreamKind) -> Self {
        let id = mix64(
            mix64(master_seed ^ 0x9E3779B97F4A7C15)
                ^ trial.wrapping_mul(0xA0761D6478BD642F)
                ^ kind.label().wrapping_mul(0xE7037ED1A0B428DB),
        );
        Self { id, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(0x9E3779B97F4A7C15);
        mix64(self.id ^ self.counter)
    }

    /// Uniform in [0, 1) with 53 significant bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform in (0, 1]; safe to pass through a logarithm.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Unit-mean exponential draw.
    #[inline]
    pub fn next_exp(&mut self) -> f64 {
        -self.next_f64_open().ln()
    }

    /// Poisson draw: inverse-CDF chase for small means, the PTRS
    /// transformed-rejection sampler of Hörmann for large ones. Both are
    /// exact-distribution samplers driven solely by this stream.
    pub fn next_poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean >= 0.0);
        if mean < 30.0 {
            self.poisson_small(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_small(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        let u = self.next_f64();
        while u > cdf && k < 10_000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k
    }

    fn poisson_ptrs(&mut self, mean: f64) -> u64 {
        let log_mean = mean.ln();
        let b = 0.931 + 2.53 * mean.sqrt();
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.next_f64() - 0.5;
            let v = self.next_f64();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= v_r {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
            let rhs = -mean + k * log_mean - crate::specialfn::ln_gamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

/// One fading (or other per-pair) draw as a pure function of its key:
/// unit-mean exponential power for the (user, BS) link of a trial.
#[inline]
pub fn link_fading(master_seed: u64, trial: u64, user: u32, bs: u32) -> f64 {
    let base = mix64(
        mix64(master_seed ^ 0x9E3779B97F4A7C15)
            ^ trial.wrapping_mul(0xA0761D6478BD642F)
            ^ StreamKind::Fading.label().wrapping_mul(0xE7037ED1A0B428DB),
    );
    let word = mix64(base ^ ((user as u64) << 32 | bs as u64).wrapping_mul(0xD1342543DE82EF95));
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u = (word >> 11) as f64 * SCALE;
    -(1.0 - u).ln()
}
