//! Tilted component laws `P(Z_i = k) = c_i(x) g_i(k) x^{w_i k}`.
//!
//! Every law is stored through its ratio `θ`: `x^{w_i}` for multisets and
//! selections, `λ_i = m_i x^i / i!` for assemblies. The point mass relative to
//! `k = 0` is then `g(k) θ^k` with `g(k) = C(m+k-1, k)`, `C(m, k)` or `1/k!`.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use super::{Class, StructureSpec};
use crate::random::{open_unit, LazyUniform, Mode};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LawKind {
    Geometric,
    NegativeBinomial,
    Binomial,
    Poisson,
}

/// `c_i(x)`, exact where the class allows it (not for assemblies, where it is
/// `e^{-λ_i}`).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationConstant {
    pub index: usize,
    pub exact: Option<BigRational>,
    pub value: f64,
}

/// Bits of the dyadic brackets cached for Poisson CDF values.
const BRACKET_BITS: u32 = 128;
/// Cache CDF values until the remaining tail is below `2^-CACHE_TAIL_BITS`.
const CACHE_TAIL_BITS: u32 = 40;
const CACHE_MAX_ENTRIES: usize = 4096;

type Bracket = (BigRational, BigRational);

#[derive(Debug)]
pub struct TiltedDistribution {
    index: usize,
    weight: usize,
    kind: LawKind,
    shape: u64,
    tilt: BigRational,
    ln_ratio: f64,
    ratio: f64,
    ratio_exact: OnceLock<BigRational>,
    cdf_cache: OnceLock<Vec<Bracket>>,
}

impl Clone for TiltedDistribution {
    fn clone(&self) -> Self {
        TiltedDistribution {
            index: self.index,
            weight: self.weight,
            kind: self.kind,
            shape: self.shape,
            tilt: self.tilt.clone(),
            ln_ratio: self.ln_ratio,
            ratio: self.ratio,
            ratio_exact: self.ratio_exact.clone(),
            cdf_cache: self.cdf_cache.clone(),
        }
    }
}

fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

fn binomial_coefficient(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, j| acc * j)
}

fn ratio_of(a: &BigUint, b: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(a.clone()), BigInt::from(b.clone()))
}

fn floor_dyadic(r: &BigRational, bits: u32) -> BigRational {
    let scaled = num_integer::Integer::div_floor(&(r.numer() << bits), r.denom());
    BigRational::new(scaled, BigInt::one() << bits)
}

fn ceil_dyadic(r: &BigRational, bits: u32) -> BigRational {
    let scaled = num_integer::Integer::div_ceil(&(r.numer() << bits), r.denom());
    BigRational::new(scaled, BigInt::one() << bits)
}

/// A rigorous dyadic bracket `[lo, hi] ∋ e^{-λ}` with `hi - lo ≲ 2^-bits`.
fn exp_neg_bracket(lambda: &BigRational, bits: u32) -> Bracket {
    let one = BigRational::one();
    let mut term = one.clone();
    let mut sum = one.clone();
    let threshold = BigRational::new(BigInt::one(), BigInt::one() << (bits + 2));
    let mut n = 0u64;
    loop {
        n += 1;
        term = term * lambda / BigRational::from_integer(n.into());
        sum += &term;
        let next = BigRational::from_integer((n + 2).into());
        if &next > lambda {
            // tail ≤ term·λ/(n+1) · 1/(1 - λ/(n+2))
            let tail = &term * lambda / BigRational::from_integer((n + 1).into()) * &next
                / (&next - lambda);
            if &tail / &sum < threshold {
                let lo = one.clone() / (&sum + &tail);
                let hi = one / &sum;
                return (floor_dyadic(&lo, bits), ceil_dyadic(&hi, bits));
            }
        }
    }
}

impl TiltedDistribution {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    /// Number of component types `m_i` (trials, or negative-binomial shape).
    pub fn shape(&self) -> u64 {
        self.shape
    }

    /// `θ`: `x^{w_i}` or `λ_i`.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn ratio_exact(&self) -> &BigRational {
        self.ratio_exact.get_or_init(|| {
            let power: BigRational = Pow::pow(&self.tilt, self.weight as u64);
            match self.kind {
                LawKind::Poisson => {
                    power * BigRational::from_integer(self.shape.into())
                        / ratio_of(&factorial(self.index as u64), &BigUint::one())
                }
                _ => power,
            }
        })
    }

    /// The success probability of one trial for binomial laws.
    pub fn success_probability(&self) -> Option<f64> {
        (self.kind == LawKind::Binomial).then(|| self.ratio / (1.0 + self.ratio))
    }

    pub fn support_max(&self) -> Option<u64> {
        (self.kind == LawKind::Binomial).then_some(self.shape)
    }

    fn in_support(&self, k: u64) -> bool {
        self.support_max().is_none_or(|m| k <= m)
    }

    fn ln_g(&self, k: u64) -> f64 {
        let m = self.shape;
        match self.kind {
            LawKind::Geometric => 0.0,
            LawKind::NegativeBinomial => {
                ln_gamma((m + k) as f64) - ln_factorial(k) - ln_gamma(m as f64)
            }
            LawKind::Binomial => ln_factorial(m) - ln_factorial(k) - ln_factorial(m - k),
            LawKind::Poisson => -ln_factorial(k),
        }
    }

    fn g_exact(&self, k: u64) -> BigRational {
        let m = self.shape;
        match self.kind {
            LawKind::Geometric => BigRational::one(),
            LawKind::NegativeBinomial => ratio_of(&binomial_coefficient(m + k - 1, k), &BigUint::one()),
            LawKind::Binomial => ratio_of(&binomial_coefficient(m, k), &BigUint::one()),
            LawKind::Poisson => ratio_of(&BigUint::one(), &factorial(k)),
        }
    }

    /// `ln(P(Z = k) / P(Z = 0))`.
    pub fn ln_relative_mass(&self, k: u64) -> f64 {
        if !self.in_support(k) {
            return f64::NEG_INFINITY;
        }
        if k == 0 {
            return 0.0;
        }
        self.ln_g(k) + k as f64 * self.ln_ratio
    }

    /// `P(Z = k) / P(Z = 0) = g(k) θ^k`, exactly.
    pub fn relative_mass(&self, k: u64) -> BigRational {
        if !self.in_support(k) {
            return BigRational::zero();
        }
        self.g_exact(k) * Pow::pow(self.ratio_exact(), k)
    }

    /// `ln c_i(x) = ln P(Z = 0)`.
    pub fn ln_normalization(&self) -> f64 {
        let m = self.shape as f64;
        match self.kind {
            LawKind::Geometric | LawKind::NegativeBinomial => m * (-self.ratio).ln_1p(),
            LawKind::Binomial => -m * self.ratio.ln_1p(),
            LawKind::Poisson => -self.ratio,
        }
    }

    pub fn normalization(&self) -> NormalizationConstant {
        let exact = match self.kind {
            LawKind::Geometric | LawKind::NegativeBinomial => {
                let base = BigRational::one() - self.ratio_exact();
                Some(Pow::pow(&base, self.shape))
            }
            LawKind::Binomial => {
                let base = BigRational::one() + self.ratio_exact();
                Some(BigRational::one() / Pow::pow(&base, self.shape))
            }
            LawKind::Poisson => None,
        };
        NormalizationConstant {
            index: self.index,
            exact,
            value: self.ln_normalization().exp(),
        }
    }

    pub fn point_mass(&self, k: u64) -> f64 {
        (self.ln_normalization() + self.ln_relative_mass(k)).exp()
    }

    /// Exact point mass; `None` for Poisson laws, whose masses are irrational.
    pub fn point_mass_exact(&self, k: u64) -> Option<BigRational> {
        self.normalization().exact.map(|c| c * self.relative_mass(k))
    }

    /// `P(Z = k + 1) / P(Z = k)`.
    fn step_ratio_exact(&self, k: u64) -> BigRational {
        let m = self.shape;
        let theta = self.ratio_exact();
        let (num, den) = match self.kind {
            LawKind::Geometric => (1, 1),
            LawKind::NegativeBinomial => (m + k, k + 1),
            LawKind::Binomial => (m.saturating_sub(k), k + 1),
            LawKind::Poisson => (1, k + 1),
        };
        theta * BigRational::new(num.into(), den.into())
    }

    fn step_ratio(&self, k: u64) -> f64 {
        let m = self.shape as f64;
        let k = k as f64;
        match self.kind {
            LawKind::Geometric => self.ratio,
            LawKind::NegativeBinomial => (m + k) / (k + 1.0) * self.ratio,
            LawKind::Binomial => (m - k).max(0.0) / (k + 1.0) * self.ratio,
            LawKind::Poisson => self.ratio / (k + 1.0),
        }
    }

    /// The smallest maximiser of the point mass. All four laws are
    /// log-concave, so the scan stops at the first non-increase.
    pub fn mode(&self) -> u64 {
        let one = BigRational::one();
        let mut k = 0;
        while self.in_support(k + 1) && self.step_ratio_exact(k) > one {
            k += 1;
        }
        k
    }

    /// Floating-point variant of [`mode`](Self::mode).
    pub fn mode_approx(&self) -> u64 {
        let mut k = 0;
        while self.in_support(k + 1) && self.step_ratio(k) > 1.0 {
            k += 1;
        }
        k
    }

    pub fn mean(&self) -> f64 {
        let m = self.shape as f64;
        match self.kind {
            LawKind::Geometric | LawKind::NegativeBinomial => m * self.ratio / (1.0 - self.ratio),
            LawKind::Binomial => m * self.ratio / (1.0 + self.ratio),
            LawKind::Poisson => self.ratio,
        }
    }

    /// `P(Z ≥ 1)`.
    pub fn prob_positive(&self) -> f64 {
        -self.ln_normalization().exp_m1()
    }

    /// Exact CDF value `P(Z ≤ k)` as a bracket; degenerate for rational laws.
    fn cdf_bracket(&self, k: u64, bits: u32) -> Bracket {
        match self.kind {
            LawKind::Poisson => {
                let lambda = self.ratio_exact();
                let (lo_e, hi_e) = exp_neg_bracket(lambda, bits);
                let mut term = BigRational::one();
                let mut sum = BigRational::one();
                for j in 1..=k {
                    term = term * lambda / BigRational::from_integer(j.into());
                    sum += &term;
                }
                let hi = ceil_dyadic(&(hi_e * &sum), bits).min(BigRational::one());
                (floor_dyadic(&(lo_e * &sum), bits), hi)
            }
            _ => {
                let c = self.normalization().exact.expect("rational law");
                let mut term = c;
                let mut sum = term.clone();
                for j in 0..k {
                    term *= self.step_ratio_exact(j);
                    sum += &term;
                }
                (sum.clone(), sum)
            }
        }
    }

    fn cdf_cache(&self) -> &[Bracket] {
        self.cdf_cache.get_or_init(|| {
            let tail = BigRational::new(BigInt::one(), BigInt::one() << CACHE_TAIL_BITS);
            let cutoff = BigRational::one() - tail;
            let mut out = Vec::new();
            match self.kind {
                LawKind::Poisson => {
                    let lambda = self.ratio_exact();
                    let (lo_e, hi_e) = exp_neg_bracket(lambda, BRACKET_BITS);
                    let mut term = BigRational::one();
                    let mut sum = BigRational::one();
                    for j in 0u64.. {
                        if j > 0 {
                            term = term * lambda / BigRational::from_integer(j.into());
                            sum += &term;
                        }
                        let lo = floor_dyadic(&(&lo_e * &sum), BRACKET_BITS);
                        let hi = ceil_dyadic(&(&hi_e * &sum), BRACKET_BITS).min(BigRational::one());
                        let done = lo >= cutoff || out.len() >= CACHE_MAX_ENTRIES;
                        out.push((lo, hi));
                        if done {
                            break;
                        }
                    }
                }
                _ => {
                    let mut term = self.normalization().exact.expect("rational law");
                    let mut sum = term.clone();
                    for j in 0u64.. {
                        if j > 0 {
                            term *= self.step_ratio_exact(j - 1);
                            sum += &term;
                        }
                        let done = sum >= cutoff
                            || out.len() >= CACHE_MAX_ENTRIES
                            || self.support_max() == Some(j);
                        out.push((sum.clone(), sum.clone()));
                        if done {
                            break;
                        }
                    }
                }
            }
            out
        })
    }

    /// One exact draw by inversion: the smallest `k` with `U < P(Z ≤ k)`,
    /// where `U` is a lazily refined uniform.
    fn sample_exact<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let cache = self.cdf_cache();
        let mut u = LazyUniform::new();
        let mut k = 0u64;
        loop {
            if self.support_max() == Some(k) {
                return k;
            }
            let mut bits = BRACKET_BITS;
            let refine = || {
                bits *= 2;
                self.cdf_bracket(k, bits)
            };
            let below = match cache.get(k as usize) {
                Some((lo, hi)) => u.less_than_bracketed(lo, hi, refine, rng),
                None => {
                    let (lo, hi) = self.cdf_bracket(k, BRACKET_BITS);
                    u.less_than_bracketed(&lo, &hi, refine, rng)
                }
            };
            if below {
                return k;
            }
            k += 1;
        }
    }

    fn sample_fast<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.kind {
            LawKind::Geometric => self.geometric_fast(rng),
            LawKind::NegativeBinomial => (0..self.shape).map(|_| self.geometric_fast(rng)).sum(),
            LawKind::Binomial => {
                let p = self.ratio / (1.0 + self.ratio);
                if self.shape == 1 {
                    u64::from(rng.random::<f64>() < p)
                } else {
                    Binomial::new(self.shape, p).map(|d| d.sample(rng)).unwrap_or(0)
                }
            }
            LawKind::Poisson => {
                if self.ratio <= 0.0 {
                    0
                } else {
                    Poisson::new(self.ratio).map(|d| d.sample(rng) as u64).unwrap_or(0)
                }
            }
        }
    }

    /// `⌊ln U / ln θ⌋`.
    fn geometric_fast<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.ratio <= 0.0 {
            return 0;
        }
        let v = open_unit(rng).ln() / self.ln_ratio;
        if v >= u64::MAX as f64 {
            u64::MAX
        } else {
            v as u64
        }
    }

    /// A draw from the law conditioned on `Z ≥ 1` (floating point).
    pub(crate) fn sample_positive_fast<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match (self.kind, self.shape) {
            (LawKind::Geometric, _) => 1 + self.geometric_fast(rng),
            (LawKind::Binomial, 1) => 1,
            _ => {
                let target = rng.random::<f64>() * self.prob_positive();
                let mut mass = self.point_mass(1);
                let mut acc = 0.0;
                let mut k = 1u64;
                loop {
                    acc += mass;
                    if acc >= target || mass == 0.0 || self.support_max() == Some(k) {
                        return k;
                    }
                    mass *= self.step_ratio(k);
                    k += 1;
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, mode: Mode, rng: &mut R) -> u64 {
        match mode {
            Mode::Exact => self.sample_exact(rng),
            Mode::Fast => self.sample_fast(rng),
        }
    }
}

/// The tilted law of `Z_i` for the structure's class.
pub fn component_distribution(spec: &StructureSpec, i: usize) -> Result<TiltedDistribution> {
    if i == 0 || i > spec.n() {
        return Err(Error::IndexOutOfRange { index: i, n: spec.n() });
    }
    let m = spec.multiplicity(i);
    let w = spec.weight(i);
    let x = spec.tilt().value();
    let (kind, ln_ratio) = match spec.class() {
        Class::Multiset => {
            let kind = if m == 1 { LawKind::Geometric } else { LawKind::NegativeBinomial };
            (kind, w as f64 * x.ln())
        }
        Class::Selection => (LawKind::Binomial, w as f64 * x.ln()),
        Class::Assembly => (
            LawKind::Poisson,
            (m as f64).ln() + i as f64 * x.ln() - ln_factorial(i as u64),
        ),
    };
    let ratio = ln_ratio.exp();
    Ok(TiltedDistribution {
        index: i,
        weight: w,
        kind,
        shape: m,
        tilt: spec.tilt().exact().clone(),
        ln_ratio,
        ratio,
        ratio_exact: OnceLock::new(),
        cdf_cache: OnceLock::new(),
    })
}

/// One draw from `dist`.
pub fn sample_component<R: Rng + ?Sized>(dist: &TiltedDistribution, mode: Mode, rng: &mut R) -> u64 {
    dist.sample(mode, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_for_stream;
    use crate::structures::Tilt;
    use approx::assert_relative_eq;
    use num_traits::ToPrimitive;

    fn half_multiset(n: usize) -> StructureSpec {
        StructureSpec::new(Class::Multiset, n, Tilt::ratio(1, 2).unwrap()).unwrap()
    }

    #[test]
    fn kinds_follow_class() {
        let p = StructureSpec::partitions(5).unwrap();
        let d = StructureSpec::distinct_partitions(5).unwrap();
        let s = StructureSpec::set_partitions(5).unwrap();
        assert_eq!(component_distribution(&p, 2).unwrap().kind(), LawKind::Geometric);
        assert_eq!(component_distribution(&d, 2).unwrap().kind(), LawKind::Binomial);
        assert_eq!(component_distribution(&s, 2).unwrap().kind(), LawKind::Poisson);
        let m2 = p.with_multiplicities(vec![2; 5]).unwrap();
        assert_eq!(component_distribution(&m2, 2).unwrap().kind(), LawKind::NegativeBinomial);
        assert!(component_distribution(&s, 0).is_err());
        assert!(component_distribution(&s, 6).is_err());
    }

    #[test]
    fn geometric_point_mass() {
        let law = component_distribution(&half_multiset(3), 1).unwrap();
        for k in 0..6u64 {
            let expected = BigRational::new(1.into(), BigInt::from(2u64.pow(k as u32 + 1)));
            assert_eq!(law.point_mass_exact(k).unwrap(), expected);
        }
        assert_eq!(law.mode(), 0);
    }

    #[test]
    fn bernoulli_parameter() {
        let spec = StructureSpec::new(Class::Selection, 4, Tilt::ratio(1, 3).unwrap()).unwrap();
        let law = component_distribution(&spec, 2).unwrap();
        // x^2/(1+x^2) = (1/9)/(10/9)
        assert_eq!(law.point_mass_exact(1).unwrap(), BigRational::new(1.into(), 10.into()));
        assert_eq!(law.point_mass_exact(2).unwrap(), BigRational::zero());
    }

    #[test]
    fn poisson_mean_is_tilt_at_index_one() {
        let spec = StructureSpec::set_partitions(10).unwrap();
        let law = component_distribution(&spec, 1).unwrap();
        assert_relative_eq!(law.mean(), spec.tilt().value(), max_relative = 1e-15);
        let l3 = component_distribution(&spec, 3).unwrap();
        assert_relative_eq!(l3.mean(), spec.tilt().value().powi(3) / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn normalization_closed_forms() {
        let x = BigRational::new(1.into(), 3.into());
        let ms = StructureSpec::new(Class::Multiset, 4, Tilt::new(x.clone()).unwrap())
            .unwrap()
            .with_multiplicities(vec![1, 3, 1, 1])
            .unwrap();
        let c = component_distribution(&ms, 2).unwrap().normalization().exact.unwrap();
        let one = BigRational::one();
        assert_eq!(c, Pow::pow(&(&one - &x * &x), 3u32));
        let sel = StructureSpec::new(Class::Selection, 4, Tilt::new(x.clone()).unwrap())
            .unwrap()
            .with_multiplicities(vec![2; 4])
            .unwrap();
        let c = component_distribution(&sel, 1).unwrap().normalization().exact.unwrap();
        assert_eq!(c, &one / Pow::pow(&(&one + &x), 2u32));
    }

    #[test]
    fn masses_sum_to_one() {
        let specs = [
            StructureSpec::partitions(12).unwrap(),
            StructureSpec::distinct_partitions(12).unwrap(),
            StructureSpec::set_partitions(12).unwrap(),
            StructureSpec::partitions(12).unwrap().with_multiplicities(vec![3; 12]).unwrap(),
            StructureSpec::distinct_partitions(12).unwrap().with_multiplicities(vec![4; 12]).unwrap(),
        ];
        for spec in &specs {
            for i in [1, 2, 5, 12] {
                let law = component_distribution(spec, i).unwrap();
                let total: f64 = (0..2000).map(|k| law.point_mass(k)).sum();
                assert!((total - 1.0).abs() < 1e-12, "{:?} i={i} total={total}", spec.class());
            }
        }
        // exact partial sums of a rational law approach 1 with the geometric tail
        let law = component_distribution(&half_multiset(2), 1).unwrap();
        let partial: BigRational = (0..40).map(|k| law.point_mass_exact(k).unwrap()).sum();
        assert_eq!(BigRational::one() - partial, BigRational::new(1.into(), BigInt::one() << 40u32));
    }

    #[test]
    fn exp_bracket_contains_value() {
        for v in [0.1f64, 1.0, 3.7, 12.0] {
            let lambda = BigRational::from_float(v).unwrap();
            let (lo, hi) = exp_neg_bracket(&lambda, 80);
            assert!(lo <= hi);
            assert_relative_eq!(lo.to_f64().unwrap(), (-v).exp(), max_relative = 1e-15);
            assert!(&hi - &lo < BigRational::new(1.into(), BigInt::one() << 70u32));
        }
    }

    #[test]
    fn mode_of_non_geometric_laws() {
        let ms = StructureSpec::new(Class::Multiset, 3, Tilt::ratio(3, 4).unwrap())
            .unwrap()
            .with_multiplicities(vec![5, 1, 1])
            .unwrap();
        let law = component_distribution(&ms, 1).unwrap();
        // NB(5, 3/4): the step ratio (k+5)/(k+1) · 3/4 equals 1 at k = 11,
        // so 11 and 12 tie and the smaller is reported
        assert_eq!(law.mode(), 11);
        assert_eq!(law.relative_mass(11), law.relative_mass(12));
        assert!((11..=12).contains(&law.mode_approx()));
        let s = StructureSpec::set_partitions(40).unwrap();
        let law = component_distribution(&s, 1).unwrap();
        assert_eq!(law.mode(), s.tilt().value().floor() as u64);
    }

    #[test]
    fn bernoulli_zero_never_fires() {
        // a selection with an index whose weight makes θ astronomically small in f64
        let spec = StructureSpec::new(Class::Selection, 2, Tilt::ratio(1, 2).unwrap())
            .unwrap()
            .with_weights(vec![1, 5000])
            .unwrap();
        let law = component_distribution(&spec, 2).unwrap();
        let mut rng = rng_for_stream(9, 0);
        assert!((0..1000).all(|_| law.sample(Mode::Fast, &mut rng) == 0));
    }

    fn zero_frequency_within_3_sigma(mode: Mode, draws: usize) {
        let spec = StructureSpec::partitions(10).unwrap();
        let law = component_distribution(&spec, 2).unwrap();
        let p0 = 1.0 - law.ratio();
        let mut rng = rng_for_stream(11, mode as u64);
        let zeros = (0..draws).filter(|_| law.sample(mode, &mut rng) == 0).count() as f64;
        let sd = (draws as f64 * p0 * (1.0 - p0)).sqrt();
        assert!((zeros - draws as f64 * p0).abs() < 3.0 * sd, "{mode} zeros={zeros}");
    }

    #[test]
    fn geometric_zero_frequency() {
        zero_frequency_within_3_sigma(Mode::Fast, 100_000);
        zero_frequency_within_3_sigma(Mode::Exact, 100_000);
    }

    fn poisson_mean_within_3_sigma(mode: Mode) {
        let spec = StructureSpec::set_partitions(8).unwrap();
        let law = component_distribution(&spec, 2).unwrap();
        let lambda = law.mean();
        let draws = 100_000;
        let mut rng = rng_for_stream(12, mode as u64);
        let total: u64 = (0..draws).map(|_| law.sample(mode, &mut rng)).sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - lambda).abs() < 3.0 * (lambda / draws as f64).sqrt(), "{mode} mean={mean}");
    }

    #[test]
    fn poisson_sample_mean() {
        poisson_mean_within_3_sigma(Mode::Fast);
        poisson_mean_within_3_sigma(Mode::Exact);
    }

    #[test]
    fn zero_truncated_draws_match_conditional_law() {
        let spec = StructureSpec::partitions(6)
            .unwrap()
            .with_multiplicities(vec![3; 6])
            .unwrap();
        let law = component_distribution(&spec, 1).unwrap();
        let mut rng = rng_for_stream(13, 0);
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| law.sample_positive_fast(&mut rng) == 1)
            .count() as f64;
        let p1 = law.point_mass(1) / law.prob_positive();
        let sd = (draws as f64 * p1 * (1.0 - p1)).sqrt();
        assert!((ones - draws as f64 * p1).abs() < 4.0 * sd);
    }
}
