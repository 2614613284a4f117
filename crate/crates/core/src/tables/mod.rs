//! Arbitrary-precision tables of restricted counts and the unranking walks
//! that turn a uniform rank into an object.
//!
//! Multiset and selection tables keep one column per index of `I` (in
//! increasing index order): column `c` holds the number of objects of weight
//! `j` built from the first `c` indices only. Column 0 is `[1, 0, 0, ...]`.
//! For `I = {1..k}` and unit multiplicities the columns are the bounded
//! counts `p(j, κ)` and `q(j, κ)`.

mod dump;
mod euler;
mod unrank;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use crate::structures::{Class, IndexSet, StructureSpec};
use crate::{Error, Result};

pub use dump::TableDump;
pub use euler::{divisor_sum, euler_sample, EulerTable};
pub use unrank::{realize_set_partition, unrank_partition, unrank_partition_with_rank, unrank_restricted, unrank_restricted_with_rank};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableKind {
    PartitionBounded,
    DistinctBounded,
    Bell,
    RestrictedAssembly,
    RestrictedMultiset,
    RestrictedSelection,
}

impl TableKind {
    pub fn class(self) -> Class {
        match self {
            TableKind::PartitionBounded | TableKind::RestrictedMultiset => Class::Multiset,
            TableKind::DistinctBounded | TableKind::RestrictedSelection => Class::Selection,
            TableKind::Bell | TableKind::RestrictedAssembly => Class::Assembly,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, TableKind::PartitionBounded | TableKind::DistinctBounded)
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::PartitionBounded => "partitionBounded",
            TableKind::DistinctBounded => "distinctBounded",
            TableKind::Bell => "bell",
            TableKind::RestrictedAssembly => "restrictedAssembly",
            TableKind::RestrictedMultiset => "restrictedMultiset",
            TableKind::RestrictedSelection => "restrictedSelection",
        })
    }
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "partitionBounded" => TableKind::PartitionBounded,
            "distinctBounded" => TableKind::DistinctBounded,
            "bell" => TableKind::Bell,
            "restrictedAssembly" => TableKind::RestrictedAssembly,
            "restrictedMultiset" => TableKind::RestrictedMultiset,
            "restrictedSelection" => TableKind::RestrictedSelection,
            other => return Err(Error::Parse(format!("unknown table kind `{other}`"))),
        })
    }
}

/// One index of `I` as seen by the recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Slot {
    pub index: usize,
    pub weight: usize,
    pub multiplicity: u64,
}

/// An immutable table of exact counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    kind: TableKind,
    max_weight: usize,
    vector_len: usize,
    index_set: IndexSet,
    slots: Vec<Slot>,
    columns: Vec<Vec<BigUint>>,
    totals: Vec<BigUint>,
}

impl CountTable {
    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn class(&self) -> Class {
        self.kind.class()
    }

    /// Largest weight `n` covered.
    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    /// Length of the component vectors produced by unranking.
    pub fn vector_len(&self) -> usize {
        self.vector_len
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    /// Number of columns beyond column 0; `k` for bounded tables.
    pub fn bound(&self) -> usize {
        self.columns.len().saturating_sub(1)
    }

    pub fn has_columns(&self) -> bool {
        !self.columns.is_empty()
    }

    /// `p_I(j)`: objects of weight `j` using only indices in `I`.
    pub fn total(&self, j: usize) -> &BigUint {
        &self.totals[j]
    }

    pub fn totals(&self) -> &[BigUint] {
        &self.totals
    }

    /// Column entry: objects of weight `j` built from the first `c` indices
    /// of `I`. For bounded tables this is `p(j, c)` or `q(j, c)`.
    pub fn entry(&self, j: usize, c: usize) -> Option<&BigUint> {
        self.columns.get(c).and_then(|col| col.get(j))
    }

    pub(crate) fn column(&self, c: usize) -> &[BigUint] {
        &self.columns[c]
    }

    pub(crate) fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Errors unless the table covers weight `n`.
    pub fn require_weight(&self, n: usize) -> Result<()> {
        if n > self.max_weight {
            return Err(Error::TableTooSmall {
                needed: n,
                have: self.max_weight,
            });
        }
        Ok(())
    }
}

/// `g(k)` for `k` copies of one slot: `C(m+k-1, k)` for multisets,
/// `C(m, k)` for selections.
pub(crate) fn copy_coefficient(class: Class, m: u64, k: u64) -> BigUint {
    let (top, k) = match class {
        Class::Multiset => (m + k - 1, k),
        Class::Selection => {
            if k > m {
                return BigUint::zero();
            }
            (m, k)
        }
        Class::Assembly => unreachable!("assemblies have no column recursion"),
    };
    let k = k.min(top - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * (top - j) / (j + 1);
    }
    acc
}

/// Column `c` from column `c - 1` and slot `c`.
fn next_column(class: Class, prev: &[BigUint], slot: &Slot) -> Vec<BigUint> {
    let n = prev.len() - 1;
    let w = slot.weight;
    let mut col: Vec<BigUint> = Vec::with_capacity(n + 1);
    match (class, slot.multiplicity) {
        (Class::Multiset, 1) => {
            for j in 0..=n {
                let v = if j >= w { &prev[j] + &col[j - w] } else { prev[j].clone() };
                col.push(v);
            }
        }
        (Class::Selection, 1) => {
            for j in 0..=n {
                let v = if j >= w { &prev[j] + &prev[j - w] } else { prev[j].clone() };
                col.push(v);
            }
        }
        (_, m) => {
            let max_copies = n / w;
            let coeffs: Vec<BigUint> = (0..=max_copies as u64)
                .map(|k| if k == 0 { BigUint::one() } else { copy_coefficient(class, m, k) })
                .collect();
            for j in 0..=n {
                let mut v = BigUint::zero();
                for (k, g) in coeffs.iter().enumerate().take(j / w + 1) {
                    if !g.is_zero() {
                        v += g * &prev[j - k * w];
                    }
                }
                col.push(v);
            }
        }
    }
    col
}

fn build_columns(class: Class, n: usize, slots: &[Slot]) -> Vec<Vec<BigUint>> {
    let mut first = vec![BigUint::zero(); n + 1];
    first[0] = BigUint::one();
    let mut columns = vec![first];
    for slot in slots {
        let col = next_column(class, columns.last().expect("column 0"), slot);
        columns.push(col);
    }
    columns
}

/// `p(j, κ)` for `0 ≤ j ≤ n`, `0 ≤ κ ≤ k`: partitions of `j` into parts of
/// size at most `κ`.
pub fn build_partition_table(n: usize, k: usize) -> Result<CountTable> {
    build_bounded(TableKind::PartitionBounded, n, k)
}

/// `q(j, κ)`: partitions of `j` into distinct parts of size at most `κ`.
pub fn build_distinct_table(n: usize, k: usize) -> Result<CountTable> {
    build_bounded(TableKind::DistinctBounded, n, k)
}

fn build_bounded(kind: TableKind, n: usize, k: usize) -> Result<CountTable> {
    if k > n {
        return Err(Error::InvalidSpec(format!("bound k = {k} exceeds n = {n}")));
    }
    let slots: Vec<Slot> = (1..=k)
        .map(|i| Slot {
            index: i,
            weight: i,
            multiplicity: 1,
        })
        .collect();
    let columns = build_columns(kind.class(), n, &slots);
    let totals = columns.last().expect("column 0").clone();
    Ok(CountTable {
        kind,
        max_weight: n,
        vector_len: n,
        index_set: IndexSet::prefix(k),
        slots,
        columns,
        totals,
    })
}

/// Bell numbers `B_0..B_n` from `B_j = Σ_{i<j} C(j-1, i) B_i`.
pub fn build_bell(n: usize) -> CountTable {
    let mut bell = vec![BigUint::one()];
    // row holds C(j-1, 0..=j-1)
    let mut row: Vec<BigUint> = Vec::new();
    for _ in 1..=n {
        row = pascal_next(&row);
        let b: BigUint = row.iter().zip(&bell).map(|(c, b)| c * b).sum();
        bell.push(b);
    }
    CountTable {
        kind: TableKind::Bell,
        max_weight: n,
        vector_len: n,
        index_set: IndexSet::prefix(n),
        slots: Vec::new(),
        columns: Vec::new(),
        totals: bell,
    }
}

/// The next row of Pascal's triangle (`[]` → `[1]` → `[1, 1]` → ...).
fn pascal_next(row: &[BigUint]) -> Vec<BigUint> {
    let mut next = Vec::with_capacity(row.len() + 1);
    next.push(BigUint::one());
    for w in row.windows(2) {
        next.push(&w[0] + &w[1]);
    }
    if !row.is_empty() {
        next.push(BigUint::one());
    }
    next
}

/// Counts `p_I(0..=n)` of objects of each weight whose components all have
/// indices in `I`, for the class, multiplicities and weights of `spec`.
pub fn build_restricted_table(spec: &StructureSpec, index_set: &IndexSet, n: usize) -> Result<CountTable> {
    if index_set.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    index_set.check_within(spec.n())?;
    let slots: Vec<Slot> = index_set
        .members()
        .iter()
        .map(|&i| Slot {
            index: i,
            weight: spec.weight(i),
            multiplicity: spec.multiplicity(i),
        })
        .collect();
    let base = CountTable {
        kind: TableKind::RestrictedAssembly,
        max_weight: n,
        vector_len: spec.n(),
        index_set: index_set.clone(),
        slots,
        columns: Vec::new(),
        totals: Vec::new(),
    };
    match spec.class() {
        Class::Assembly => {
            let totals = restricted_assembly_counts(&base.slots, n);
            Ok(CountTable { totals, ..base })
        }
        class => {
            let totals = divisor_recursion(class, &base.slots, n)?;
            let columns = build_columns(class, n, &base.slots);
            let last = columns.last().expect("column 0");
            if let Some(j) = (0..=n).find(|&j| last[j] != totals[j]) {
                return Err(Error::InconsistentTable(format!(
                    "column walk and divisor recursion disagree at weight {j}: {} vs {}",
                    last[j], totals[j]
                )));
            }
            let kind = if class == Class::Multiset {
                TableKind::RestrictedMultiset
            } else {
                TableKind::RestrictedSelection
            };
            Ok(CountTable {
                kind,
                columns,
                totals,
                ..base
            })
        }
    }
}

/// `p_I(j) = Σ_{b ∈ I, b ≤ j} C(j-1, b-1) m_b p_I(j - b)`: the block holding
/// label 1 has size `b`, its other `b - 1` labels are chosen from `j - 1`.
fn restricted_assembly_counts(slots: &[Slot], n: usize) -> Vec<BigUint> {
    let mut p = vec![BigUint::one()];
    let mut row: Vec<BigUint> = Vec::new();
    for j in 1..=n {
        row = pascal_next(&row);
        let mut v = BigUint::zero();
        for slot in slots.iter().take_while(|s| s.weight <= j) {
            let b = slot.weight;
            let term = &row[b - 1] * &p[j - b];
            v += term * slot.multiplicity;
        }
        p.push(v);
    }
    p
}

/// `k p_I(k) = Σ_{i=1}^k g_I(i) p_I(k - i)` with
/// `g_I(i) = Σ_{d ∈ I, w_d | i} w_d m_d` (multisets) or
/// `Σ_{d ∈ I, w_d | i} (-1)^{i/w_d - 1} w_d m_d` (selections),
/// i.e. the logarithmic derivative of the generating function at `x = 1`.
fn divisor_recursion(class: Class, slots: &[Slot], n: usize) -> Result<Vec<BigUint>> {
    let mut g = vec![BigInt::zero(); n + 1];
    for slot in slots {
        let w = slot.weight;
        let base = BigInt::from(w as u64) * BigInt::from(slot.multiplicity);
        let mut i = w;
        let mut t = 1u64;
        while i <= n {
            if class == Class::Selection && t.is_multiple_of(2) {
                g[i] -= &base;
            } else {
                g[i] += &base;
            }
            i += w;
            t += 1;
        }
    }
    let support: Vec<usize> = (1..=n).filter(|&i| !g[i].is_zero()).collect();
    let mut p: Vec<BigInt> = vec![BigInt::one()];
    for k in 1..=n {
        let mut acc = BigInt::zero();
        for &i in support.iter().take_while(|&&i| i <= k) {
            acc += &g[i] * &p[k - i];
        }
        let (q, r) = num_integer::Integer::div_rem(&acc, &BigInt::from(k as u64));
        if !r.is_zero() {
            return Err(Error::InconsistentTable(format!("non-integral count at weight {k}")));
        }
        if q.sign() == Sign::Minus {
            return Err(Error::NegativeCount { weight: k });
        }
        p.push(q);
    }
    Ok(p.into_iter()
        .map(|v| v.to_biguint().expect("checked nonnegative"))
        .collect())
}
