//! Combinatorial class declarations, their tilted component laws and the
//! stage-one samplers built from them.

mod laws;
mod stage1;
mod tilt;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub use laws::{component_distribution, sample_component, LawKind, NormalizationConstant, TiltedDistribution};
pub use stage1::{sample_stage1, Stage1Draw, Stage1Sampler, Stage1Strategy};
pub use tilt::{tilt_distinct, tilt_set_partition, tilt_unrestricted, TILT_FRACTION_BITS};

/// The three decomposable classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    /// Labelled components; Poisson counts (set partitions when `m ≡ 1`).
    Assembly,
    /// Unlabelled components with repetition; negative binomial counts
    /// (integer partitions when `m ≡ 1`).
    Multiset,
    /// Unlabelled components without repetition per type; binomial counts
    /// (partitions into distinct parts when `m ≡ 1`).
    Selection,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Assembly => "assembly",
            Class::Multiset => "multiset",
            Class::Selection => "selection",
        })
    }
}

/// A named family: the three classical instances with `m ≡ 1`, or a bare
/// class whose multiplicities and weights are supplied separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    Partitions,
    DistinctPartitions,
    SetPartitions,
    Assembly,
    Multiset,
    Selection,
}

impl Structure {
    pub const ALL: [Structure; 6] = [
        Structure::Partitions,
        Structure::DistinctPartitions,
        Structure::SetPartitions,
        Structure::Assembly,
        Structure::Multiset,
        Structure::Selection,
    ];

    pub fn class(self) -> Class {
        match self {
            Structure::Partitions | Structure::Multiset => Class::Multiset,
            Structure::DistinctPartitions | Structure::Selection => Class::Selection,
            Structure::SetPartitions | Structure::Assembly => Class::Assembly,
        }
    }

    /// The structure of weight `n` with `m ≡ 1`, `w_i = i` and the default tilt.
    pub fn spec(self, n: usize) -> Result<StructureSpec> {
        StructureSpec::new(self.class(), n, StructureSpec::default_tilt(self.class(), n))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::Partitions => "partitions",
            Structure::DistinctPartitions => "distinct-partitions",
            Structure::SetPartitions => "set-partitions",
            Structure::Assembly => "assembly",
            Structure::Multiset => "multiset",
            Structure::Selection => "selection",
        })
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Structure::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::Parse(format!("unknown structure `{s}`")))
    }
}

/// The Boltzmann parameter `x`, held as an exact rational with a cached
/// floating-point copy.
#[derive(Clone, Debug)]
pub struct Tilt {
    exact: BigRational,
    value: f64,
}

impl PartialEq for Tilt {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for Tilt {}

impl Tilt {
    pub fn new(exact: BigRational) -> Result<Self> {
        if !exact.is_positive() {
            return Err(Error::InvalidSpec(format!("tilt must be positive, got {exact}")));
        }
        let value = exact.to_f64().unwrap_or(f64::NAN);
        Ok(Tilt { exact, value })
    }

    pub fn ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidSpec("tilt denominator is zero".into()));
        }
        Tilt::new(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// The exact dyadic value of a finite `f64`.
    pub fn from_f64(v: f64) -> Result<Self> {
        let exact = BigRational::from_float(v)
            .ok_or_else(|| Error::InvalidSpec(format!("tilt {v} is not finite")))?;
        Tilt::new(exact)
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl fmt::Display for Tilt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FromStr for Tilt {
    type Err = Error;

    /// Accepts `a/b` or a decimal literal.
    fn from_str(s: &str) -> Result<Self> {
        if let Some((a, b)) = s.split_once('/') {
            let a: BigInt = a.trim().parse().map_err(|_| Error::Parse(format!("bad tilt `{s}`")))?;
            let b: BigInt = b.trim().parse().map_err(|_| Error::Parse(format!("bad tilt `{s}`")))?;
            if b.is_zero() {
                return Err(Error::Parse(format!("bad tilt `{s}`")));
            }
            Tilt::new(BigRational::new(a, b))
        } else {
            let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad tilt `{s}`")))?;
            Tilt::from_f64(v)
        }
    }
}

/// A sorted, duplicate-free set of component indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let mut members: Vec<usize> = items.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        IndexSet { members }
    }

    pub fn empty() -> Self {
        IndexSet::default()
    }

    /// `{1, ..., k}`.
    pub fn prefix(k: usize) -> Self {
        IndexSet { members: (1..=k).collect() }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max(&self) -> Option<usize> {
        self.members.last().copied()
    }

    /// True when the set is exactly `{1, ..., max}`.
    pub fn is_prefix(&self) -> bool {
        self.members.iter().enumerate().all(|(pos, &i)| i == pos + 1)
    }

    pub fn check_within(&self, n: usize) -> Result<()> {
        match self.members.iter().find(|&&i| i == 0 || i > n) {
            Some(&index) => Err(Error::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for IndexSet {
    /// Comma-separated members, or `-` for the empty set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.members.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.members.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for IndexSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(IndexSet::empty());
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad index set `{s}`"))))
            .collect::<Result<Vec<_>>>()
            .map(IndexSet::new)
    }
}

/// Declares a class, a target weight and the tilted component laws.
///
/// Indices run over `1..=n`; `multiplicity(i)` is the number of component
/// types of size `i` and `weight(i)` the weight one such component adds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureSpec {
    class: Class,
    n: usize,
    multiplicities: Vec<u64>,
    weights: Vec<usize>,
    tilt: Tilt,
}

impl StructureSpec {
    /// A class with `m ≡ 1` and `w_i = i`.
    pub fn new(class: Class, n: usize, tilt: Tilt) -> Result<Self> {
        let spec = StructureSpec {
            class,
            n,
            multiplicities: vec![1; n],
            weights: (1..=n).collect(),
            tilt,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Integer partitions of `n` at the optimal tilt.
    pub fn partitions(n: usize) -> Result<Self> {
        StructureSpec::new(Class::Multiset, n, tilt_unrestricted(n.max(1) as u64))
    }

    /// Partitions of `n` into distinct parts at the optimal tilt.
    pub fn distinct_partitions(n: usize) -> Result<Self> {
        StructureSpec::new(Class::Selection, n, tilt_distinct(n.max(1) as u64))
    }

    /// Set partitions of `{1..n}` with `x e^x = n`.
    pub fn set_partitions(n: usize) -> Result<Self> {
        StructureSpec::new(Class::Assembly, n, tilt_set_partition(n.max(1) as u64))
    }

    /// Default tilt for a class: the closed forms of the `m ≡ 1` instances.
    pub fn default_tilt(class: Class, n: usize) -> Tilt {
        let n = n.max(1) as u64;
        match class {
            Class::Multiset => tilt_unrestricted(n),
            Class::Selection => tilt_distinct(n),
            Class::Assembly => tilt_set_partition(n),
        }
    }

    pub fn with_tilt(mut self, tilt: Tilt) -> Result<Self> {
        self.tilt = tilt;
        self.validate()?;
        Ok(self)
    }

    /// `multiplicities[i - 1]` is `m_i`.
    pub fn with_multiplicities(mut self, multiplicities: Vec<u64>) -> Result<Self> {
        self.multiplicities = multiplicities;
        self.validate()?;
        Ok(self)
    }

    /// `weights[i - 1]` is `w_i`.
    pub fn with_weights(mut self, weights: Vec<usize>) -> Result<Self> {
        self.weights = weights;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.multiplicities.len() != self.n || self.weights.len() != self.n {
            return Err(Error::InvalidSpec(format!(
                "expected {} multiplicities and weights, got {} and {}",
                self.n,
                self.multiplicities.len(),
                self.weights.len()
            )));
        }
        if let Some(pos) = self.multiplicities.iter().position(|&m| m == 0) {
            return Err(Error::InvalidSpec(format!("multiplicity of index {} is zero", pos + 1)));
        }
        if let Some(pos) = self.weights.iter().position(|&w| w == 0) {
            return Err(Error::InvalidSpec(format!("weight of index {} is zero", pos + 1)));
        }
        let x = self.tilt.exact();
        match self.class {
            Class::Multiset | Class::Selection => {
                if !(x.is_positive() && x < &BigRational::one()) {
                    return Err(Error::InvalidSpec(format!(
                        "{} tilt must lie in (0, 1), got {}",
                        self.class, self.tilt
                    )));
                }
            }
            Class::Assembly => {
                if !x.is_positive() {
                    return Err(Error::InvalidSpec(format!("assembly tilt must be positive, got {}", self.tilt)));
                }
                if self.weights.iter().enumerate().any(|(pos, &w)| w != pos + 1) {
                    return Err(Error::InvalidSpec("assemblies require w_i = i".into()));
                }
            }
        }
        Ok(())
    }

    pub fn class(&self) -> Class {
        self.class
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tilt(&self) -> &Tilt {
        &self.tilt
    }

    pub fn multiplicity(&self, i: usize) -> u64 {
        self.multiplicities[i - 1]
    }

    pub fn weight(&self, i: usize) -> usize {
        self.weights[i - 1]
    }

    pub fn has_unit_multiplicities(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    pub fn has_identity_weights(&self) -> bool {
        self.weights.iter().enumerate().all(|(pos, &w)| w == pos + 1)
    }

    /// The same class and laws re-targeted at weight `n`, keeping the tilt.
    /// Multiplicities and weights beyond the old range extend with `1` / `i`.
    pub fn retarget(&self, n: usize) -> Result<Self> {
        let multiplicities = (1..=n)
            .map(|i| self.multiplicities.get(i - 1).copied().unwrap_or(1))
            .collect();
        let weights = (1..=n)
            .map(|i| self.weights.get(i - 1).copied().unwrap_or(i))
            .collect();
        let spec = StructureSpec {
            class: self.class,
            n,
            multiplicities,
            weights,
            tilt: self.tilt.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Counts `z_i` of components of each index `i = 1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentVector {
    counts: Vec<u64>,
}

impl ComponentVector {
    pub fn zeros(n: usize) -> Self {
        ComponentVector { counts: vec![0; n] }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        ComponentVector { counts }
    }

    /// Builds a vector of length `n` from sparse `(index, count)` pairs.
    pub fn from_sparse(n: usize, pairs: &[(usize, u64)]) -> Result<Self> {
        let mut v = ComponentVector::zeros(n);
        for &(i, z) in pairs {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            v.counts[i - 1] += z;
        }
        Ok(v)
    }

    /// Builds the vector of a partition given by its parts.
    pub fn from_parts(n: usize, parts: &[usize]) -> Result<Self> {
        let pairs: Vec<(usize, u64)> = parts.iter().map(|&p| (p, 1)).collect();
        ComponentVector::from_sparse(n, &pairs)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.counts[i - 1]
    }

    pub fn add(&mut self, i: usize, z: u64) {
        self.counts[i - 1] += z;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Nonzero `(index, count)` pairs in increasing index order.
    pub fn sparse(&self) -> Vec<(usize, u64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &z)| z > 0)
            .map(|(pos, &z)| (pos + 1, z))
            .collect()
    }

    /// `Σ w_i z_i` under the structure's weights.
    pub fn weighted_sum(&self, spec: &StructureSpec) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(pos, &z)| spec.weight(pos + 1) as u64 * z)
            .sum()
    }

    /// `Σ i z_i`.
    pub fn size(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(pos, &z)| (pos as u64 + 1) * z)
            .sum()
    }

    /// Part sizes in descending order, reading `z_i` as the multiplicity of `i`.
    pub fn parts(&self) -> Vec<usize> {
        let mut parts = Vec::new();
        for (pos, &z) in self.counts.iter().enumerate().rev() {
            parts.extend(std::iter::repeat_n(pos + 1, z as usize));
        }
        parts
    }

    pub fn total_components(&self) -> u64 {
        self.counts.iter().sum()
    }
}
