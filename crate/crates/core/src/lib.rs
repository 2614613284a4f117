//! Exact uniform samplers for decomposable combinatorial structures.
//!
//! Objects of a fixed weight `n` (integer partitions, partitions into distinct
//! parts, set partitions, and general assemblies, multisets and selections)
//! are sampled uniformly by conditioning a vector of independent tilted
//! component counts on its weighted sum. Three interchangeable engines are
//! provided:
//!
//! * [`pdc::HardRejection`]: draw the whole vector, keep it iff the weight is
//!   exactly `n`.
//! * [`pdc::DeterministicSecondHalf`]: leave one component out, accept the rest
//!   in proportion to the point mass that would complete it.
//! * [`pdc::PdcRecursive`]: leave an index set out, accept in proportion to a
//!   table of restricted counts, then complete the object from that table by
//!   unranking.
//!
//! The [`oracle`] module holds brute-force enumerators and goodness-of-fit
//! tests; [`cost`] measures rejection counts against closed-form predictions.

pub mod cost;
pub mod error;
pub mod oracle;
pub mod pdc;
pub mod precise;
pub mod random;
pub mod structures;
pub mod tables;

pub use error::{Error, Result};
pub use pdc::{
    DeterministicSecondHalf, EulerSampler, HardRejection, IndexPolicy, Method, Outcome,
    PdcRecursive, RejectionStats, Sampler,
};
pub use random::{rng_for_stream, Mode, StreamRng};
pub use structures::{
    Class, ComponentVector, IndexSet, LawKind, Structure, StructureSpec, Tilt, TiltedDistribution,
};
pub use tables::{CountTable, TableKind};
