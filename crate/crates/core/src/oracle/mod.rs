//! Brute-force ground truth: exhaustive enumeration of small objects, exact
//! conditional laws, and chi-square tests against them.

mod stats;

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::structures::{component_distribution, Class, ComponentVector, IndexSet, StructureSpec};
use crate::{Error, Result};

pub use stats::{
    bonferroni, chi_square_gof, chi_square_homogeneity, homogeneity_p_value, ChiSquareResult, MIN_EXPECTED,
};

/// Largest weight enumerated for component profiles.
pub const PROFILE_LIMIT: usize = 14;
/// Largest `n` for which labelled set partitions are listed.
pub const LABELED_LIMIT: usize = 8;

/// A set partition in canonical form: blocks sorted internally, listed by
/// increasing smallest element.
pub type SetPartition = Vec<Vec<usize>>;

/// Every object of one weight.
#[derive(Clone, Debug)]
pub struct ObjectCensus {
    class: Class,
    n: usize,
    profiles: Vec<ComponentVector>,
    multiplicities: Vec<BigUint>,
    profile_lookup: HashMap<ComponentVector, usize>,
    labeled: Option<Vec<SetPartition>>,
    labeled_lookup: HashMap<SetPartition, usize>,
    count: BigUint,
}

impl ObjectCensus {
    pub fn class(&self) -> Class {
        self.class
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of objects.
    pub fn count(&self) -> &BigUint {
        &self.count
    }

    /// Distinct component profiles, in enumeration order.
    pub fn profiles(&self) -> &[ComponentVector] {
        &self.profiles
    }

    /// Objects sharing each profile.
    pub fn multiplicities(&self) -> &[BigUint] {
        &self.multiplicities
    }

    pub fn profile_index(&self, v: &ComponentVector) -> Option<usize> {
        self.profile_lookup.get(v).copied()
    }

    /// Labelled set partitions, for assemblies with unit multiplicities and
    /// `n ≤ LABELED_LIMIT`.
    pub fn labeled(&self) -> Option<&[SetPartition]> {
        self.labeled.as_deref()
    }

    pub fn labeled_index(&self, p: &SetPartition) -> Option<usize> {
        self.labeled_lookup.get(p).copied()
    }

    /// Probability of each profile under the uniform law on objects.
    pub fn profile_probabilities(&self) -> Vec<f64> {
        let total = big_to_f64(&self.count);
        self.multiplicities.iter().map(|m| big_to_f64(m) / total).collect()
    }
}

fn big_to_f64(v: &BigUint) -> f64 {
    num_traits::ToPrimitive::to_f64(v).unwrap_or(f64::INFINITY)
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, j| acc * (n - j) / (j + 1))
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, j| acc * j)
}

/// Number of objects with component counts `v`.
pub fn profile_multiplicity(spec: &StructureSpec, v: &ComponentVector) -> BigUint {
    match spec.class() {
        Class::Multiset => v
            .sparse()
            .iter()
            .map(|&(i, z)| binomial(spec.multiplicity(i) + z - 1, z))
            .product(),
        Class::Selection => v
            .sparse()
            .iter()
            .map(|&(i, z)| binomial(spec.multiplicity(i), z))
            .product(),
        Class::Assembly => {
            // n! / Π (i!^{z_i} z_i!) · Π m_i^{z_i}
            let mut num = factorial(v.size());
            let mut den = BigUint::one();
            for (i, z) in v.sparse() {
                den *= num_traits::Pow::pow(&factorial(i as u64), z) * factorial(z);
                num *= num_traits::Pow::pow(&BigUint::from(spec.multiplicity(i)), z);
            }
            num / den
        }
    }
}

/// All count vectors `(z_i)_{i ∈ allowed}` with `Σ w_i z_i = n`, by
/// backtracking from the largest allowed index.
fn profiles_of_weight(spec: &StructureSpec, allowed: &[usize], n: usize) -> Vec<ComponentVector> {
    fn go(
        spec: &StructureSpec,
        allowed: &[usize],
        rest: usize,
        current: &mut Vec<u64>,
        out: &mut Vec<ComponentVector>,
    ) {
        let Some((&i, smaller)) = allowed.split_last() else {
            if rest == 0 {
                out.push(ComponentVector::from_counts(current.clone()));
            }
            return;
        };
        let w = spec.weight(i);
        let cap = match spec.class() {
            Class::Selection => (rest / w).min(spec.multiplicity(i) as usize),
            _ => rest / w,
        };
        for z in (0..=cap).rev() {
            current[i - 1] = z as u64;
            go(spec, smaller, rest - z * w, current, out);
        }
        current[i - 1] = 0;
    }
    let mut out = Vec::new();
    let mut current = vec![0u64; spec.n()];
    go(spec, allowed, n, &mut current, &mut out);
    out
}

/// All set partitions of `{1..n}` in canonical form, via restricted growth
/// strings.
pub fn set_partitions(n: usize) -> Vec<SetPartition> {
    fn go(pos: usize, n: usize, growth: &mut Vec<usize>, blocks: usize, out: &mut Vec<SetPartition>) {
        if pos == n {
            let mut parts: SetPartition = vec![Vec::new(); blocks];
            for (label, &b) in growth.iter().enumerate() {
                parts[b].push(label + 1);
            }
            out.push(parts);
            return;
        }
        for b in 0..=blocks {
            growth.push(b);
            go(pos + 1, n, growth, blocks.max(b + 1), out);
            growth.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Every object of weight `spec.n()`.
pub fn enumerate(spec: &StructureSpec) -> Result<ObjectCensus> {
    enumerate_within(spec, &IndexSet::prefix(spec.n()), spec.n())
}

/// Every object of weight `n` whose components have indices in `allowed`.
pub fn enumerate_within(spec: &StructureSpec, allowed: &IndexSet, n: usize) -> Result<ObjectCensus> {
    if n > PROFILE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: PROFILE_LIMIT,
        });
    }
    allowed.check_within(spec.n())?;
    let profiles = profiles_of_weight(spec, allowed.members(), n);
    let multiplicities: Vec<BigUint> = profiles.iter().map(|v| profile_multiplicity(spec, v)).collect();
    let count = multiplicities.iter().sum();
    let profile_lookup = profiles.iter().cloned().enumerate().map(|(k, v)| (v, k)).collect();
    let labeled = (spec.class() == Class::Assembly && spec.has_unit_multiplicities() && n <= LABELED_LIMIT).then(|| {
        set_partitions(n)
            .into_iter()
            .filter(|p| p.iter().all(|b| allowed.contains(b.len())))
            .collect::<Vec<_>>()
    });
    let labeled_lookup = labeled
        .iter()
        .flatten()
        .cloned()
        .enumerate()
        .map(|(k, p)| (p, k))
        .collect();
    Ok(ObjectCensus {
        class: spec.class(),
        n,
        profiles,
        multiplicities,
        profile_lookup,
        labeled,
        labeled_lookup,
        count,
    })
}

/// Chi-square test of sampled profiles against the uniform law on objects.
/// A sample outside the census is a hard error.
pub fn chi_square_uniformity(samples: &[ComponentVector], census: &ObjectCensus) -> Result<ChiSquareResult> {
    let mut observed = vec![0u64; census.profiles().len()];
    for v in samples {
        let k = census
            .profile_index(v)
            .ok_or_else(|| Error::UnmappedSample(format!("{:?}", v.sparse())))?;
        observed[k] += 1;
    }
    Ok(chi_square_gof(&observed, &census.profile_probabilities()))
}

/// Chi-square test of labelled set partitions against the uniform law.
pub fn chi_square_uniformity_labeled(samples: &[SetPartition], census: &ObjectCensus) -> Result<ChiSquareResult> {
    let labeled = census
        .labeled()
        .ok_or_else(|| Error::InvalidSpec("census holds no labelled objects".into()))?;
    let mut observed = vec![0u64; labeled.len()];
    for p in samples {
        let k = census
            .labeled_index(p)
            .ok_or_else(|| Error::UnmappedSample(format!("{p:?}")))?;
        observed[k] += 1;
    }
    let probs = vec![1.0 / labeled.len() as f64; labeled.len()];
    Ok(chi_square_gof(&observed, &probs))
}

/// `P(Z = z | Σ w_i Z_i = n)` for every profile, computed exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalLaw {
    pub profiles: Vec<(ComponentVector, BigRational)>,
    /// The common probability of every single object.
    pub per_object: BigRational,
}

/// The conditional law of the tilted component vector given weight `n`,
/// from the exact point masses; errors unless every object gets the same
/// probability. The normalising constants `c_i` cancel, so only the
/// relative masses `g(k) θ^k` enter and the result is exact for Poisson
/// laws as well.
pub fn exact_conditional_law(spec: &StructureSpec) -> Result<ConditionalLaw> {
    let census = enumerate(spec)?;
    let laws = (1..=spec.n())
        .map(|i| component_distribution(spec, i))
        .collect::<Result<Vec<_>>>()?;
    let joint: Vec<BigRational> = census
        .profiles()
        .iter()
        .map(|v| {
            v.sparse()
                .iter()
                .map(|&(i, z)| laws[i - 1].relative_mass(z))
                .fold(BigRational::one(), |acc, m| acc * m)
        })
        .collect();
    let total: BigRational = joint.iter().sum();
    if total.is_zero() {
        return Err(Error::Unreachable { weight: spec.n() });
    }
    let profiles: Vec<(ComponentVector, BigRational)> = census
        .profiles()
        .iter()
        .cloned()
        .zip(joint.into_iter().map(|p| p / &total))
        .collect();
    let per_object = BigRational::new(BigInt::one(), BigInt::from(census.count().clone()));
    for ((v, p), m) in profiles.iter().zip(census.multiplicities()) {
        let each = p / BigRational::from_integer(BigInt::from(m.clone()));
        if each != per_object {
            return Err(Error::NonUniform(format!(
                "profile {:?} has per-object probability {each}, expected {per_object}",
                v.sparse()
            )));
        }
    }
    Ok(ConditionalLaw { profiles, per_object })
}
