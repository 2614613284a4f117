//! Uniform integer partitions from Euler's divisor-sum recursion
//! `n p(n) = Σ_{m<n} σ(n - m) p(m)`.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, RngCore};

use crate::random::uniform_rank;

/// `σ(k)`, the sum of the divisors of `k` (trial division).
pub fn divisor_sum(k: u64) -> u64 {
    let mut total = 0;
    let mut d = 1;
    while d * d <= k {
        if k.is_multiple_of(d) {
            total += d;
            if d * d != k {
                total += k / d;
            }
        }
        d += 1;
    }
    total
}

/// `p(0..=n)` and `σ(1..=n)` for the divisor method.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerTable {
    partitions: Vec<BigUint>,
    sigma: Vec<u64>,
}

impl EulerTable {
    pub fn new(n: usize) -> Self {
        // σ by a sieve
        let mut sigma = vec![0u64; n + 1];
        for d in 1..=n {
            for multiple in (d..=n).step_by(d) {
                sigma[multiple] += d as u64;
            }
        }
        let mut partitions = vec![BigUint::one()];
        for k in 1..=n {
            let acc: BigUint = (0..k).map(|m| &partitions[m] * sigma[k - m]).sum();
            partitions.push(acc / k);
        }
        EulerTable { partitions, sigma }
    }

    pub fn max_weight(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn p(&self, k: usize) -> &BigUint {
        &self.partitions[k]
    }

    pub fn sigma(&self, k: usize) -> u64 {
        self.sigma[k]
    }

    /// A uniform partition of `n ≤ max_weight`, parts descending.
    ///
    /// Each round draws `m` with probability `σ(n - m) p(m) / (n p(n))`, then
    /// a divisor `d` of `n - m` with probability `d / σ(n - m)`, emits
    /// `(n - m) / d` parts of size `d` and continues with `m`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        assert!(n <= self.max_weight(), "table covers weights up to {}", self.max_weight());
        let mut parts = Vec::new();
        let mut rest = n;
        while rest > 0 {
            let total = &self.partitions[rest] * rest;
            let mut r = uniform_rank(&total, rng);
            let mut m = 0;
            loop {
                let w = &self.partitions[m] * self.sigma[rest - m];
                if r <= w {
                    break;
                }
                r -= w;
                m += 1;
            }
            let s = (rest - m) as u64;
            let mut v = rng.random_range(1..=self.sigma[rest - m]);
            let mut d = 1u64;
            loop {
                if s.is_multiple_of(d) {
                    if v <= d {
                        break;
                    }
                    v -= d;
                }
                d += 1;
            }
            parts.extend(std::iter::repeat_n(d as usize, (s / d) as usize));
            rest = m;
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts
    }
}

/// One uniform partition of `n` by the divisor method.
pub fn euler_sample<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    EulerTable::new(n).sample(n, rng)
}
