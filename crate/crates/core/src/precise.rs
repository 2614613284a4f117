//! Binary fixed-point arithmetic on big integers.
//!
//! `f64` carries 53 bits, which is not enough to certify the tilt values to
//! the required relative accuracy. Everything here works on a mantissa scaled
//! by `2^bits` with a few guard bits on top.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default working precision, in fractional bits.
pub const WORKING_BITS: u32 = 256;

const GUARD_BITS: u32 = 32;

/// The real number `mantissa / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    mantissa: BigInt,
    bits: u32,
}

impl Fixed {
    pub fn from_int(v: i64, bits: u32) -> Self {
        Fixed {
            mantissa: BigInt::from(v) << bits,
            bits,
        }
    }

    /// Rounds `r` to the nearest multiple of `2^-bits`.
    pub fn from_rational(r: &BigRational, bits: u32) -> Self {
        let scaled = r.numer() << bits;
        let twice = (&scaled << 1u32) + r.denom();
        let mantissa = num_integer::Integer::div_floor(&twice, &(r.denom() << 1u32));
        Fixed { mantissa, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    fn with_bits(&self, bits: u32) -> Self {
        let mantissa = match bits.cmp(&self.bits) {
            Ordering::Equal => self.mantissa.clone(),
            Ordering::Greater => &self.mantissa << (bits - self.bits),
            Ordering::Less => &self.mantissa >> (self.bits - bits),
        };
        Fixed { mantissa, bits }
    }

    pub fn add(&self, other: &Fixed) -> Fixed {
        let bits = self.bits.max(other.bits);
        Fixed {
            mantissa: self.with_bits(bits).mantissa + other.with_bits(bits).mantissa,
            bits,
        }
    }

    pub fn sub(&self, other: &Fixed) -> Fixed {
        let bits = self.bits.max(other.bits);
        Fixed {
            mantissa: self.with_bits(bits).mantissa - other.with_bits(bits).mantissa,
            bits,
        }
    }

    pub fn mul(&self, other: &Fixed) -> Fixed {
        let other = other.with_bits(self.bits);
        Fixed {
            mantissa: (&self.mantissa * &other.mantissa) >> self.bits,
            bits: self.bits,
        }
    }

    pub fn div(&self, other: &Fixed) -> Fixed {
        let other = other.with_bits(self.bits);
        Fixed {
            mantissa: (&self.mantissa << self.bits) / &other.mantissa,
            bits: self.bits,
        }
    }

    pub fn neg(&self) -> Fixed {
        Fixed {
            mantissa: -&self.mantissa,
            bits: self.bits,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Fixed {
        Fixed {
            mantissa: self.mantissa.abs(),
            bits: self.bits,
        }
    }

    /// Square root of a nonnegative value (truncated).
    pub fn sqrt(&self) -> Fixed {
        assert!(!self.is_negative(), "sqrt of a negative value");
        Fixed {
            mantissa: (&self.mantissa << self.bits).sqrt(),
            bits: self.bits,
        }
    }

    /// `e^self`, accurate to a few units in the last place.
    pub fn exp(&self) -> Fixed {
        let bits = self.bits;
        // halve until |r| < 1/256 so the Taylor series converges in a handful of terms
        let mag = self.mantissa.abs().bits() as i64 - bits as i64;
        let halvings = (mag + 8).max(0) as u32;
        let work = bits + GUARD_BITS + 2 * halvings;
        let r = Fixed {
            mantissa: self.with_bits(work).mantissa >> halvings,
            bits: work,
        };
        let one = Fixed::from_int(1, work);
        let mut sum = one.clone();
        let mut term = one;
        let mut k = 1i64;
        loop {
            term = Fixed {
                mantissa: term.mul(&r).mantissa / k,
                bits: work,
            };
            if term.mantissa.is_zero() {
                break;
            }
            sum = sum.add(&term);
            k += 1;
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        sum.with_bits(bits)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// The exact value `mantissa / 2^bits`.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.bits)
    }

    /// Rounds to a dyadic rational with `frac_bits` fractional bits.
    pub fn to_dyadic(&self, frac_bits: u32) -> BigRational {
        let shift = self.bits.saturating_sub(frac_bits);
        let half = if shift > 0 {
            BigInt::one() << (shift - 1)
        } else {
            BigInt::zero()
        };
        let rounded = (&self.mantissa + half) >> shift;
        BigRational::new(rounded, BigInt::one() << (self.bits - shift))
    }

    pub fn cmp_value(&self, other: &Fixed) -> Ordering {
        let bits = self.bits.max(other.bits);
        self.with_bits(bits)
            .mantissa
            .cmp(&other.with_bits(bits).mantissa)
    }
}

/// `atan(1/k)` by its alternating series.
fn atan_inv(k: u32, bits: u32) -> BigInt {
    let k = BigInt::from(k);
    let k2 = &k * &k;
    let mut power = (BigInt::one() << bits) / &k;
    let mut sum = power.clone();
    let mut j = 1u64;
    loop {
        power /= &k2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * j + 1);
        if j % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        j += 1;
    }
    sum
}

/// π via Machin's formula.
pub fn pi(bits: u32) -> Fixed {
    let work = bits + GUARD_BITS;
    let m = atan_inv(5, work) * 16 - atan_inv(239, work) * 4;
    Fixed {
        mantissa: m,
        bits: work,
    }
    .with_bits(bits)
}

/// `e^{-π / sqrt(d)}` for a positive integer `d`.
pub fn exp_neg_pi_over_sqrt(d: u64, bits: u32) -> Fixed {
    assert!(d > 0);
    let work = bits + GUARD_BITS;
    let root = Fixed {
        mantissa: BigInt::from(d) << work,
        bits: work,
    }
    .sqrt();
    pi(work).div(&root).neg().exp().with_bits(bits)
}

/// `x e^x` at working precision.
pub fn x_exp_x(x: &Fixed) -> Fixed {
    x.mul(&x.exp())
}

/// The positive root of `x e^x = target`, by bisection on the increasing map.
pub fn solve_x_exp_x(target: &BigUint, bits: u32) -> Fixed {
    let work = bits + GUARD_BITS;
    let target = Fixed {
        mantissa: BigInt::from_biguint(Sign::Plus, target.clone()) << work,
        bits: work,
    };
    let mut lo = Fixed::from_int(0, work);
    // ln(t) + 1 overshoots: (ln t + 1) t e > t
    let hi_guess = target.to_f64().ln().max(0.0).ceil() as i64 + 1;
    let mut hi = Fixed::from_int(hi_guess.max(1), work);
    while x_exp_x(&hi).cmp_value(&target) == Ordering::Less {
        hi = hi.add(&hi);
    }
    for _ in 0..(work + 8) {
        let mid = Fixed {
            mantissa: (&lo.mantissa + &hi.mantissa) >> 1u32,
            bits: work,
        };
        if mid.mantissa == lo.mantissa || mid.mantissa == hi.mantissa {
            break;
        }
        if x_exp_x(&mid).cmp_value(&target) == Ordering::Less {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.with_bits(bits)
}

/// Natural logarithm of a big unsigned integer as `f64` (no overflow for huge values).
pub fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational as `f64`.
pub fn ln_rational(r: &BigRational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    ln_biguint(&n.magnitude().clone()) - ln_biguint(&d.magnitude().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pi_digits() {
        let p = pi(200).to_f64();
        assert_eq!(p, std::f64::consts::PI);
        // 50 digits of pi
        let reference: BigRational = "314159265358979323846264338327950288419716939937510/100000000000000000000000000000000000000000000000000"
            .parse()
            .unwrap();
        let diff = (pi(200).to_rational() - reference).abs();
        assert!(diff < BigRational::new(BigInt::one(), BigInt::from(10).pow(49)));
    }

    #[test]
    fn exp_matches_f64() {
        for v in [-3.5, -0.7, 0.0, 0.25, 1.0, 2.0, 11.3] {
            let x = Fixed::from_rational(&BigRational::from_float(v).unwrap(), 128);
            assert_relative_eq!(x.exp().to_f64(), f64::exp(v), max_relative = 1e-15);
        }
    }

    #[test]
    fn lambert_residual() {
        for n in [1u32, 10, 1000, 1_000_000] {
            let x = solve_x_exp_x(&BigUint::from(n), 128);
            let r = x_exp_x(&x).sub(&Fixed::from_int(n as i64, 128)).abs();
            assert!(r.to_f64() < n as f64 * 2f64.powi(-100), "n={n}");
        }
    }

    #[test]
    fn ln_of_huge_integer() {
        let v = BigUint::one() << 5000u32;
        assert_relative_eq!(ln_biguint(&v), 5000.0 * std::f64::consts::LN_2, max_relative = 1e-12);
        assert_relative_eq!(ln_biguint(&BigUint::from(42u32)), 42f64.ln());
    }
}
