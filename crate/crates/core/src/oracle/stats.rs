//! Pearson chi-square tests.

use std::collections::HashMap;
use std::hash::Hash;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Cells with a smaller expected count are pooled into one cell.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareResult {
    fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).map_or(f64::NAN, |d| d.sf(statistic))
        };
        ChiSquareResult {
            statistic,
            dof,
            p_value,
        }
    }
}

/// Goodness of fit of `observed` counts to cell probabilities `probs`.
/// Cells whose expected count falls below [`MIN_EXPECTED`] are pooled.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total;
        if e < MIN_EXPECTED {
            pooled_obs += o as f64;
            pooled_exp += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled_exp > 0.0 || pooled_obs > 0.0 {
        cells.push((pooled_obs, pooled_exp));
    }
    let statistic = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    ChiSquareResult::from_statistic(statistic, cells.len().saturating_sub(1))
}

/// Two-sample homogeneity test on categorical counts.
pub fn chi_square_homogeneity<K: Hash + Eq + Ord + Clone>(a: &HashMap<K, u64>, b: &HashMap<K, u64>) -> ChiSquareResult {
    let mut keys: Vec<K> = a.keys().chain(b.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let n = (na + nb) as f64;
    let (fa, fb) = (na as f64 / n, nb as f64 / n);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for k in &keys {
        let oa = a.get(k).copied().unwrap_or(0) as f64;
        let ob = b.get(k).copied().unwrap_or(0) as f64;
        let row = oa + ob;
        if row * fa.min(fb) < MIN_EXPECTED {
            pooled.0 += oa;
            pooled.1 += ob;
        } else {
            cells.push((oa, ob));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let statistic = cells
        .iter()
        .map(|&(oa, ob)| {
            let row = oa + ob;
            let (ea, eb) = (row * fa, row * fb);
            (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb
        })
        .sum();
    ChiSquareResult::from_statistic(statistic, cells.len().saturating_sub(1))
}

/// The p-value of [`chi_square_homogeneity`].
pub fn homogeneity_p_value<K: Hash + Eq + Ord + Clone>(a: &HashMap<K, u64>, b: &HashMap<K, u64>) -> f64 {
    chi_square_homogeneity(a, b).p_value
}

/// Per-test threshold keeping the family-wise error rate at `alpha` over
/// `tests` tests.
pub fn bonferroni(alpha: f64, tests: usize) -> f64 {
    alpha / tests.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn balanced_counts() {
        let r = chi_square_gof(&[100; 11], &[1.0 / 11.0; 11]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn degenerate_alternative() {
        let mut obs = [0u64; 11];
        obs[0] = 10_000;
        let r = chi_square_gof(&obs, &[1.0 / 11.0; 11]);
        assert!(r.p_value < 1e-9);
    }

    #[test]
    fn known_statistic() {
        // (60-50)^2/50 + (40-50)^2/50 = 4, dof 1
        let r = chi_square_gof(&[60, 40], &[0.5, 0.5]);
        assert_relative_eq!(r.statistic, 4.0);
        assert_relative_eq!(r.p_value, 0.045_500_263_896_358_4, max_relative = 1e-9);
    }

    #[test]
    fn homogeneity_identical_samples() {
        let a: HashMap<u32, u64> = [(1, 50), (2, 70), (3, 30)].into_iter().collect();
        let r = chi_square_homogeneity(&a, &a);
        assert_eq!(r.statistic, 0.0);
        let b: HashMap<u32, u64> = [(1, 150), (2, 0), (3, 0)].into_iter().collect();
        assert!(chi_square_homogeneity(&a, &b).p_value < 1e-9);
    }

    #[test]
    fn bonferroni_split() {
        assert_eq!(bonferroni(0.001, 10), 0.0001);
        assert_eq!(bonferroni(0.05, 0), 0.05);
    }
}
