use num_bigint::BigUint;

use super::Tilt;
use crate::precise::{exp_neg_pi_over_sqrt, solve_x_exp_x, WORKING_BITS};

/// Fractional bits kept in the stored tilt. Far below the 2^-53 relative
/// accuracy the closed forms are required to meet.
pub const TILT_FRACTION_BITS: u32 = 64;

fn dyadic(fixed: crate::precise::Fixed) -> Tilt {
    Tilt::new(fixed.to_dyadic(TILT_FRACTION_BITS)).expect("closed-form tilts are positive")
}

/// `e^{-π/√(6n)}`, the tilt maximising the hit probability for integer partitions.
pub fn tilt_unrestricted(n: u64) -> Tilt {
    assert!(n >= 1, "n must be positive");
    dyadic(exp_neg_pi_over_sqrt(6 * n, WORKING_BITS))
}

/// `e^{-π/√(12n)}`, the tilt for partitions into distinct parts.
pub fn tilt_distinct(n: u64) -> Tilt {
    assert!(n >= 1, "n must be positive");
    dyadic(exp_neg_pi_over_sqrt(12 * n, WORKING_BITS))
}

/// The root of `x e^x = n`, the tilt for set partitions.
pub fn tilt_set_partition(n: u64) -> Tilt {
    assert!(n >= 1, "n must be positive");
    dyadic(solve_x_exp_x(&BigUint::from(n), WORKING_BITS))
}
