//! The soft-rejection probability `t(y) = W(y) / max_ℓ W(ℓ)` with
//! `W(ℓ) = T(ℓ) x^ℓ / f(ℓ)`, `f(ℓ) = ℓ!` for assemblies and `1` otherwise.

use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::precise::ln_biguint;
use crate::random::{bernoulli_exact, Mode};
use crate::structures::{Class, StructureSpec};
use crate::tables::CountTable;
use crate::Result;

#[derive(Debug)]
struct ExactWeights {
    /// The weights `W(ℓ)`, all scaled by one common positive integer.
    scaled: Vec<BigUint>,
    max: BigUint,
}

/// Acceptance probabilities for one table, tilt and target weight.
#[derive(Debug)]
pub struct AcceptanceFunction {
    class: Class,
    n: usize,
    tilt: BigRational,
    table: Arc<CountTable>,
    log_weights: Vec<f64>,
    log_max: f64,
    argmax: usize,
    exact: OnceLock<ExactWeights>,
}

impl AcceptanceFunction {
    pub fn new(spec: &StructureSpec, table: Arc<CountTable>, n: usize) -> Result<Self> {
        table.require_weight(n)?;
        let class = spec.class();
        let ln_x = spec.tilt().value().ln();
        let log_weights: Vec<f64> = (0..=n)
            .map(|l| {
                let t = table.total(l);
                if t.is_zero() {
                    return f64::NEG_INFINITY;
                }
                let mut w = ln_biguint(t) + l as f64 * ln_x;
                if class == Class::Assembly {
                    w -= ln_gamma(l as f64 + 1.0);
                }
                w
            })
            .collect();
        let (argmax, log_max) = log_weights
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (l, w)| if w > best.1 { (l, w) } else { best });
        Ok(AcceptanceFunction {
            class,
            n,
            tilt: spec.tilt().exact().clone(),
            table,
            log_weights,
            log_max,
            argmax,
            exact: OnceLock::new(),
        })
    }

    pub fn table(&self) -> &Arc<CountTable> {
        &self.table
    }

    pub fn target(&self) -> usize {
        self.n
    }

    /// `ln W(ℓ)`; `-∞` when `T(ℓ) = 0`.
    pub fn log_tilted_weight(&self, l: usize) -> f64 {
        self.log_weights[l]
    }

    /// `W(ℓ) = T(ℓ) x^ℓ / f(ℓ)`.
    pub fn tilted_weight(&self, l: usize) -> f64 {
        self.log_weights[l].exp()
    }

    /// `ln max_ℓ W(ℓ)`.
    pub fn log_max_weight(&self) -> f64 {
        self.log_max
    }

    /// A maximiser of `W` (floating-point scan).
    pub fn argmax(&self) -> usize {
        self.argmax
    }

    /// `W(y) / max_{1≤ℓ≤n} W(ℓ)`, the ratio against the positive columns
    /// only. `W(0) = 1` can exceed that maximum, so this is not a valid
    /// acceptance probability in general; it is what a table printed from
    /// column 1 on shows.
    pub fn ratio_to_positive_max(&self, y: usize) -> f64 {
        let max = self.log_weights[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (self.log_weights[y] - max).exp()
    }

    fn exact_weights(&self) -> &ExactWeights {
        self.exact.get_or_init(|| {
            // x = a/b; W(ℓ) · b^n · n!^{[assembly]} = T(ℓ) a^ℓ b^{n-ℓ} (n!/ℓ!)
            let a = self.tilt.numer().magnitude().clone();
            let b = self.tilt.denom().magnitude().clone();
            let n = self.n;
            let mut b_pow = vec![BigUint::one(); n + 1];
            for k in 1..=n {
                b_pow[k] = &b_pow[k - 1] * &b;
            }
            // falling[ℓ] = n!/ℓ!
            let mut falling = vec![BigUint::one(); n + 1];
            if self.class == Class::Assembly {
                for l in (0..n).rev() {
                    falling[l] = &falling[l + 1] * (l + 1);
                }
            }
            let mut a_pow = BigUint::one();
            let mut scaled = Vec::with_capacity(n + 1);
            for l in 0..=n {
                if l > 0 {
                    a_pow *= &a;
                }
                scaled.push(self.table.total(l) * &a_pow * &b_pow[n - l] * &falling[l]);
            }
            let max = scaled.iter().max().cloned().unwrap_or_default();
            ExactWeights { scaled, max }
        })
    }

    /// `t(y)` as an exact rational.
    pub fn t(&self, y: usize) -> BigRational {
        let w = self.exact_weights();
        if w.max.is_zero() {
            return BigRational::zero();
        }
        BigRational::new(BigInt::from(w.scaled[y].clone()), BigInt::from(w.max.clone()))
    }

    /// `t(y)` in floating point.
    pub fn t_approx(&self, y: usize) -> f64 {
        (self.log_weights[y] - self.log_max).exp().min(1.0)
    }

    /// `max_ℓ t(ℓ)`, computed exactly; equal to one for any reachable table.
    pub fn max_t(&self) -> BigRational {
        (0..=self.n).map(|l| self.t(l)).max().unwrap_or_else(BigRational::zero)
    }

    /// Soft-rejection test for residual `y`. Unreachable residuals reject
    /// without consuming randomness.
    pub fn accept<R: Rng + ?Sized>(&self, y: usize, mode: Mode, rng: &mut R) -> bool {
        if self.table.total(y).is_zero() {
            return false;
        }
        match mode {
            Mode::Exact => bernoulli_exact(&self.t(y), rng),
            Mode::Fast => rng.random::<f64>() < self.t_approx(y),
        }
    }
}

/// `true` with probability exactly `t` (exact mode) or to 53 bits (fast).
pub fn accept_test<R: Rng + ?Sized>(t: &BigRational, mode: Mode, rng: &mut R) -> bool {
    match mode {
        Mode::Exact => bernoulli_exact(t, rng),
        Mode::Fast => {
            let p = num_traits::ToPrimitive::to_f64(t).unwrap_or(0.0);
            rng.random::<f64>() < p
        }
    }
}
