//! Rejection engines: hard rejection, the deterministic second half, and
//! divide-and-conquer with a recursive-method completion.
//!
//! All three condition the same independent vector `(Z_1..Z_n)` on
//! `Σ w_i Z_i = n` and therefore produce the same (uniform) law over objects;
//! they differ only in how many stage-one draws they spend per sample.

mod acceptance;
mod engines;
mod overlap;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::structures::{Class, ComponentVector, IndexSet, StructureSpec};
use crate::{Error, Result};

pub use acceptance::{accept_test, AcceptanceFunction};
pub use engines::{
    boost_factor, expected_attempts, hard_rejection, pdc_dsh, pdc_recursive, table_for, DeterministicSecondHalf,
    EulerSampler, HardRejection, PdcRecursive, Sampler, DEFAULT_ATTEMPT_CAP,
};
pub use overlap::{pdc_recursive_overlapped, OverlappedRun};

/// One accepted object and the number of stage-one draws it cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub vector: ComponentVector,
    pub attempts: u64,
}

/// Counters shared by every sample drawn from one engine.
#[derive(Debug, Default)]
pub struct RejectionStats {
    attempts: AtomicU64,
    acceptances: AtomicU64,
    stage1_component_draws: AtomicU64,
    table_build_ns: AtomicU64,
    sampling_ns: AtomicU64,
}

/// A point-in-time copy of [`RejectionStats`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StatsSnapshot {
    pub attempts: u64,
    pub acceptances: u64,
    pub stage1_component_draws: u64,
    pub table_build_ns: u64,
    pub sampling_ns: u64,
}

impl StatsSnapshot {
    /// `attempts / acceptances`.
    pub fn rejection_ratio(&self) -> f64 {
        self.attempts as f64 / self.acceptances as f64
    }
}

impl RejectionStats {
    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            attempts: self.attempts.load(Ordering::Relaxed),
            acceptances: self.acceptances.load(Ordering::Relaxed),
            stage1_component_draws: self.stage1_component_draws.load(Ordering::Relaxed),
            table_build_ns: self.table_build_ns.load(Ordering::Relaxed),
            sampling_ns: self.sampling_ns.load(Ordering::Relaxed),
        }
    }

    pub(crate) fn record_attempt(&self, component_draws: u64) {
        self.attempts.fetch_add(1, Ordering::Relaxed);
        self.stage1_component_draws.fetch_add(component_draws, Ordering::Relaxed);
    }

    pub(crate) fn record_acceptance(&self, elapsed_ns: u64) {
        self.acceptances.fetch_add(1, Ordering::Relaxed);
        self.sampling_ns.fetch_add(elapsed_ns, Ordering::Relaxed);
    }

    pub(crate) fn record_sampling_time(&self, elapsed_ns: u64) {
        self.sampling_ns.fetch_add(elapsed_ns, Ordering::Relaxed);
    }

    pub(crate) fn record_table_build(&self, elapsed_ns: u64) {
        self.table_build_ns.fetch_add(elapsed_ns, Ordering::Relaxed);
    }
}

/// The sampling algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Hard,
    Dsh,
    PdcRecursive,
    /// Integer partitions only: the divisor method, no rejection.
    Euler,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hard => "hard",
            Method::Dsh => "dsh",
            Method::PdcRecursive => "pdc-recursive",
            Method::Euler => "euler",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hard" => Method::Hard,
            "dsh" => Method::Dsh,
            "pdc-recursive" => Method::PdcRecursive,
            "euler" => Method::Euler,
            other => return Err(Error::Parse(format!("unknown method `{other}`"))),
        })
    }
}

/// How the index set `I` of the second half is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IndexPolicy {
    /// `{1..k}`, clamped to `n`.
    Prefix(usize),
    /// `[x - α√x, x + α√x]` rounded to integers and clamped to `[1, n]`.
    Window(f64),
    /// `{i}`.
    Singleton(usize),
}

impl fmt::Display for IndexPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexPolicy::Prefix(k) => write!(f, "prefix:{k}"),
            IndexPolicy::Window(a) => write!(f, "window:{a}"),
            IndexPolicy::Singleton(i) => write!(f, "singleton:{i}"),
        }
    }
}

impl FromStr for IndexPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad policy `{s}` (expected prefix:k, window:a or singleton:i)"));
        let (name, value) = s.split_once(':').ok_or_else(bad)?;
        match name {
            "prefix" => value.parse().map(IndexPolicy::Prefix).map_err(|_| bad()),
            "window" => value
                .parse::<f64>()
                .ok()
                .filter(|a| a.is_finite() && *a >= 0.0)
                .map(IndexPolicy::Window)
                .ok_or_else(bad),
            "singleton" => value.parse().map(IndexPolicy::Singleton).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// The index set a policy selects for `spec`.
pub fn choose_index_set(spec: &StructureSpec, policy: IndexPolicy) -> Result<IndexSet> {
    let n = spec.n();
    let set = match policy {
        IndexPolicy::Prefix(k) => IndexSet::prefix(k.min(n)),
        IndexPolicy::Singleton(i) => {
            let set = IndexSet::new([i]);
            set.check_within(n)?;
            set
        }
        IndexPolicy::Window(alpha) => {
            let x = spec.tilt().value();
            let half = alpha * x.sqrt();
            let lo = ((x - half).round().max(1.0) as usize).max(1);
            let hi = ((x + half).round().max(0.0) as usize).min(n);
            IndexSet::new(lo..=hi)
        }
    };
    if set.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    Ok(set)
}

/// The default single index for the deterministic second half: `1` for
/// multisets and selections, the nearest integer to `x` for assemblies.
pub fn default_dsh_index(spec: &StructureSpec) -> usize {
    match spec.class() {
        Class::Assembly => (spec.tilt().value().round() as usize).clamp(1, spec.n().max(1)),
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_parsing() {
        assert_eq!("prefix:3".parse::<IndexPolicy>().unwrap(), IndexPolicy::Prefix(3));
        assert_eq!("window:1.5".parse::<IndexPolicy>().unwrap(), IndexPolicy::Window(1.5));
        assert_eq!("singleton:2".parse::<IndexPolicy>().unwrap(), IndexPolicy::Singleton(2));
        assert!("prefix".parse::<IndexPolicy>().is_err());
        assert!("window:-1".parse::<IndexPolicy>().is_err());
        assert_eq!(IndexPolicy::Window(2.0).to_string(), "window:2");
    }

    #[test]
    fn index_sets_from_policies() {
        let p = StructureSpec::partitions(10).unwrap();
        assert_eq!(choose_index_set(&p, IndexPolicy::Prefix(3)).unwrap().members(), &[1, 2, 3]);
        assert_eq!(choose_index_set(&p, IndexPolicy::Singleton(1)).unwrap().members(), &[1]);
        assert!(choose_index_set(&p, IndexPolicy::Singleton(11)).is_err());
        assert!(choose_index_set(&p, IndexPolicy::Prefix(0)).is_err());
        let s = StructureSpec::set_partitions(1000).unwrap();
        let set = choose_index_set(&s, IndexPolicy::Window(2.0)).unwrap();
        // x ≈ 5.2496, 2√x ≈ 4.58
        assert_eq!(set.members(), &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        assert_eq!(default_dsh_index(&s), 5);
    }
}
