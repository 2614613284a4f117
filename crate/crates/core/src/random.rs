//! Randomness plumbing: seeded streams, exact lazy uniforms and uniform big
//! integers.

use std::cmp::Ordering;

use num_bigint::{BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate. ChaCha output is specified
/// bit-for-bit, so fixed seeds reproduce across platforms.
pub type StreamRng = ChaCha8Rng;

/// Stream-splitting rule: worker `stream` of root seed `seed` uses the ChaCha
/// key derived from `seed` with the stream counter set to `stream`.
pub fn rng_for_stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Arithmetic used for probability comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Exact rationals against a lazily extended random bit stream.
    Exact,
    /// 53-bit floating point.
    #[default]
    Fast,
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "fast" => Ok(Mode::Fast),
            other => Err(crate::Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Fast => "fast",
        })
    }
}

const CHUNK: u64 = 64;

/// A uniform variate on `[0, 1)` whose binary expansion is generated only as
/// far as a comparison needs it.
///
/// After `len` bits the variate is known to lie in
/// `[bits / 2^len, (bits + 1) / 2^len)`.
#[derive(Clone, Debug, Default)]
pub struct LazyUniform {
    bits: BigUint,
    len: u64,
}

impl LazyUniform {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bits_used(&self) -> u64 {
        self.len
    }

    pub fn extend<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        self.bits = (&self.bits << CHUNK) + BigUint::from(rng.next_u64());
        self.len += CHUNK;
    }

    /// `Some(true)` if every point of the current interval is `< r`,
    /// `Some(false)` if every point is `>= r`, `None` if undecided.
    fn decide(&self, r: &BigRational) -> Option<bool> {
        let (num, den) = match (r.numer().sign(), r.numer().magnitude(), r.denom().magnitude()) {
            (Sign::Minus, _, _) | (Sign::NoSign, _, _) => return Some(false),
            (Sign::Plus, n, d) => (n, d),
        };
        let scaled = num << self.len;
        if (&self.bits + 1u32) * den <= scaled {
            Some(true)
        } else if &self.bits * den >= scaled {
            Some(false)
        } else {
            None
        }
    }

    /// Exact test of `U < r`.
    pub fn less_than<R: RngCore + ?Sized>(&mut self, r: &BigRational, rng: &mut R) -> bool {
        loop {
            if let Some(b) = self.decide(r) {
                return b;
            }
            self.extend(rng);
        }
    }

    /// Exact test of `U < v` where only `lo <= v <= hi` is known; `refine`
    /// is called to tighten the bracket whenever it is wider than the
    /// current uniform interval and still undecided.
    pub fn less_than_bracketed<R, F>(
        &mut self,
        lo: &BigRational,
        hi: &BigRational,
        mut refine: F,
        rng: &mut R,
    ) -> bool
    where
        R: RngCore + ?Sized,
        F: FnMut() -> (BigRational, BigRational),
    {
        let mut refined: Option<(BigRational, BigRational)> = None;
        loop {
            let (l, h) = match &refined {
                Some((l, h)) => (l, h),
                None => (lo, hi),
            };
            if self.decide(l) == Some(true) {
                return true;
            }
            if self.decide(h) == Some(false) {
                return false;
            }
            let cell = BigRational::new(1.into(), num_bigint::BigInt::one() << self.len);
            if h - l < cell {
                self.extend(rng);
            } else {
                refined = Some(refine());
            }
        }
    }
}

/// Bernoulli trial with success probability `t`.
pub fn bernoulli_exact<R: RngCore + ?Sized>(t: &BigRational, rng: &mut R) -> bool {
    LazyUniform::new().less_than(t, rng)
}

/// A uniform `f64` on `(0, 1]`, suitable for `ln`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Uniform integer in `[0, bound)` by rejection from `bound.bits()` random bits.
pub fn uniform_below<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let excess = words as u64 * 32 - bits;
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        if let Some(top) = digits.last_mut() {
            *top >>= excess;
        }
        let candidate = BigUint::new(digits);
        if candidate.cmp(bound) == Ordering::Less {
            return candidate;
        }
    }
}

/// Uniform integer in `[1, bound]`.
pub fn uniform_rank<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    uniform_below(bound, rng) + 1u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| rng_for_stream(7, 0).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(rng_for_stream(7, 0).next_u64(), rng_for_stream(7, 1).next_u64());
    }

    #[test]
    fn degenerate_bernoulli() {
        let mut rng = rng_for_stream(1, 0);
        for _ in 0..100 {
            assert!(bernoulli_exact(&ratio(1, 1), &mut rng));
            assert!(!bernoulli_exact(&ratio(0, 1), &mut rng));
        }
    }

    #[test]
    fn one_third_frequency() {
        let mut rng = rng_for_stream(2, 0);
        let trials = 200_000;
        let hits = (0..trials)
            .filter(|_| bernoulli_exact(&ratio(1, 3), &mut rng))
            .count() as f64;
        let sd = (trials as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        assert!((hits - trials as f64 / 3.0).abs() < 4.0 * sd);
    }

    #[test]
    fn uniform_below_covers_range() {
        let mut rng = rng_for_stream(3, 0);
        let bound = BigUint::from(7u32);
        let mut seen = [0usize; 7];
        for _ in 0..7000 {
            let v: usize = uniform_below(&bound, &mut rng).try_into().unwrap();
            seen[v] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800 && c < 1200), "{seen:?}");
    }

    #[test]
    fn comparisons_are_monotone_in_threshold() {
        let mut rng = rng_for_stream(4, 0);
        for _ in 0..1000 {
            let mut u = LazyUniform::new();
            let low = u.less_than(&ratio(2, 7), &mut rng);
            let high = u.less_than(&ratio(3, 7), &mut rng);
            assert!(!low || high);
        }
    }
}
