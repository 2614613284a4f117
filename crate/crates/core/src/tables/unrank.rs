//! Rank-to-object walks over count tables.
//!
//! Ranks run over `1..=count`. In a column table the objects of weight `j`
//! built from the first `c` indices are ordered as: first those that do not
//! use index `c` at all, then those with one copy of it, then two, and so
//! on, each group ordered recursively.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use super::{copy_coefficient, CountTable, TableKind};
use crate::random::uniform_rank;
use crate::structures::ComponentVector;
use crate::{Error, Result};

fn check_rank(rank: &BigUint, count: &BigUint, y: usize) -> Result<()> {
    if count.is_zero() {
        return Err(Error::Unreachable { weight: y });
    }
    if rank.is_zero() || rank > count {
        return Err(Error::InconsistentTable(format!("rank {rank} outside 1..={count}")));
    }
    Ok(())
}

/// `(index, copies)` pairs for the object of weight `y` with the given rank
/// among those built from the first `c` columns.
fn walk_columns(table: &CountTable, y: usize, c: usize, rank: &BigUint) -> Result<Vec<(usize, u64)>> {
    let class = table.class();
    let mut out = Vec::new();
    let mut r = rank.clone();
    let (mut j, mut c) = (y, c);
    while j > 0 {
        // smallest c' with N_{c'}(j) ≥ r; columns are nondecreasing in c'
        let cp = (1..=c)
            .find(|&cp| table.column(cp)[j] >= r)
            .ok_or_else(|| Error::InconsistentTable(format!("rank {r} exceeds count at weight {j}")))?;
        let prev = table.column(cp - 1);
        r -= &prev[j];
        let slot = &table.slots()[cp - 1];
        let w = slot.weight;
        let mut copies = 1u64;
        loop {
            let used = copies as usize * w;
            if used > j {
                return Err(Error::InconsistentTable(format!("no completion at weight {j}")));
            }
            let rest = &prev[j - used];
            let block = copy_coefficient(class, slot.multiplicity, copies) * rest;
            if r <= block {
                // which of the g(copies) variants is irrelevant for the counts
                r = (&r - 1u32) % rest + 1u32;
                break;
            }
            r -= block;
            copies += 1;
        }
        out.push((slot.index, copies));
        j -= copies as usize * w;
        c = cp - 1;
    }
    Ok(out)
}

/// The partition of `y` into parts at most `k` with the given rank in
/// `1..=p(y, k)` (or `q(y, k)` for distinct tables). Parts are descending.
pub fn unrank_partition_with_rank(table: &CountTable, y: usize, k: usize, rank: &BigUint) -> Result<Vec<usize>> {
    if !table.kind().is_bounded() {
        return Err(Error::InvalidSpec(format!("{} is not a bounded table", table.kind())));
    }
    table.require_weight(y)?;
    if k > table.bound() {
        return Err(Error::InvalidSpec(format!("bound {k} exceeds table bound {}", table.bound())));
    }
    check_rank(rank, &table.column(k)[y], y)?;
    let mut parts: Vec<usize> = walk_columns(table, y, k, rank)?
        .into_iter()
        .flat_map(|(i, z)| std::iter::repeat_n(i, z as usize))
        .collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Ok(parts)
}

/// A uniform partition of `y` into parts at most `k`.
pub fn unrank_partition<R: RngCore + ?Sized>(table: &CountTable, y: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    table.require_weight(y)?;
    let count = table
        .entry(y, k)
        .ok_or_else(|| Error::InvalidSpec(format!("bound {k} exceeds table bound {}", table.bound())))?;
    if count.is_zero() {
        return Err(Error::Unreachable { weight: y });
    }
    let rank = uniform_rank(count, rng);
    unrank_partition_with_rank(table, y, k, &rank)
}

/// Counts `(z_i)_{i ∈ I}` of weight `y` for the given rank in `1..=p_I(y)`.
pub fn unrank_restricted_with_rank(table: &CountTable, y: usize, rank: &BigUint) -> Result<ComponentVector> {
    table.require_weight(y)?;
    check_rank(rank, table.total(y), y)?;
    let mut v = ComponentVector::zeros(table.vector_len());
    if table.has_columns() {
        for (i, z) in walk_columns(table, y, table.bound(), rank)? {
            v.add(i, z);
        }
        return Ok(v);
    }
    if table.kind() == TableKind::Bell {
        return Err(Error::InvalidSpec("Bell tables carry no index set; use a restricted assembly table".into()));
    }
    // assemblies: the block containing the smallest remaining label has
    // size b with C(y-1, b-1) m_b p_I(y-b) completions
    let mut r = rank.clone();
    let mut y = y;
    while y > 0 {
        let mut chosen = None;
        for slot in table.slots().iter().take_while(|s| s.weight <= y) {
            let b = slot.weight;
            let rest = table.total(y - b);
            let block = binomial(y - 1, b - 1) * slot.multiplicity * rest;
            if r <= block {
                r = (&r - 1u32).mod_floor(rest) + 1u32;
                chosen = Some(slot.index);
                break;
            }
            r -= block;
        }
        let b = chosen.ok_or_else(|| Error::InconsistentTable(format!("rank exceeds count at weight {y}")))?;
        v.add(b, 1);
        y -= b;
    }
    Ok(v)
}

/// A draw from the objects of weight `y` built from `I`, projected to counts.
pub fn unrank_restricted<R: RngCore + ?Sized>(table: &CountTable, y: usize, rng: &mut R) -> Result<ComponentVector> {
    table.require_weight(y)?;
    let count = table.total(y);
    if count.is_zero() {
        return Err(Error::Unreachable { weight: y });
    }
    let rank = uniform_rank(count, rng);
    unrank_restricted_with_rank(table, y, &rank)
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Labels `1..=n` split into blocks with the profile's sizes, uniform over
/// all such set partitions. Blocks are sorted internally and listed by
/// smallest element.
pub fn realize_set_partition<R: Rng + ?Sized>(profile: &ComponentVector, n: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if profile.size() != n as u64 {
        return Err(Error::InvalidSpec(format!(
            "profile has size {}, expected {n}",
            profile.size()
        )));
    }
    let mut labels: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    for size in profile.parts() {
        let mut block = labels[start..start + size].to_vec();
        block.sort_unstable();
        blocks.push(block);
        start += size;
    }
    blocks.sort_unstable_by_key(|b| b[0]);
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_for_stream;
    use crate::structures::{IndexSet, StructureSpec};
    use crate::tables::{build_distinct_table, build_partition_table, build_restricted_table};
    use std::collections::{HashMap, HashSet};

    #[test]
    fn rank_27_of_ten() {
        let t = build_partition_table(10, 10).unwrap();
        let parts = unrank_partition_with_rank(&t, 10, 10, &BigUint::from(27u32)).unwrap();
        assert_eq!(parts, vec![5, 3, 1, 1]);
    }

    #[test]
    fn empty_target() {
        let t = build_partition_table(5, 5).unwrap();
        let mut rng = rng_for_stream(0, 0);
        assert!(unrank_partition(&t, 0, 3, &mut rng).unwrap().is_empty());
        let spec = StructureSpec::set_partitions(5).unwrap();
        let r = build_restricted_table(&spec, &IndexSet::new([2]), 5).unwrap();
        assert_eq!(unrank_restricted(&r, 0, &mut rng).unwrap().total_components(), 0);
        assert!(matches!(unrank_restricted(&r, 3, &mut rng), Err(Error::Unreachable { weight: 3 })));
    }

    #[test]
    fn ranks_biject_onto_partitions() {
        let t = build_partition_table(10, 10).unwrap();
        let d = build_distinct_table(10, 10).unwrap();
        for table in [&t, &d] {
            for y in 0..=10 {
                for k in 0..=10 {
                    let count: u64 = table.entry(y, k).unwrap().try_into().unwrap();
                    let mut seen = HashSet::new();
                    for r in 1..=count {
                        let parts = unrank_partition_with_rank(table, y, k, &BigUint::from(r)).unwrap();
                        assert_eq!(parts.iter().sum::<usize>(), y);
                        assert!(parts.iter().all(|&p| p <= k));
                        if table.kind() == TableKind::DistinctBounded {
                            assert!(parts.windows(2).all(|w| w[0] > w[1]));
                        }
                        assert!(seen.insert(parts));
                    }
                    assert_eq!(seen.len() as u64, count);
                }
            }
        }
    }

    #[test]
    fn out_of_range_rank() {
        let t = build_partition_table(6, 6).unwrap();
        assert!(unrank_partition_with_rank(&t, 6, 6, &BigUint::from(12u32)).is_err());
        assert!(unrank_partition_with_rank(&t, 6, 6, &BigUint::zero()).is_err());
    }

    #[test]
    fn assembly_ranks_cover_profiles_with_multiplicity() {
        // each profile must be hit as many times as it has labelled objects
        let spec = StructureSpec::set_partitions(6).unwrap();
        let t = build_restricted_table(&spec, &IndexSet::prefix(6), 6).unwrap();
        let mut hits: HashMap<Vec<usize>, u64> = HashMap::new();
        for r in 1..=203u32 {
            let v = unrank_restricted_with_rank(&t, 6, &BigUint::from(r)).unwrap();
            *hits.entry(v.parts()).or_default() += 1;
        }
        let fact = |k: u64| (1..=k).product::<u64>();
        for (parts, count) in hits {
            let v = ComponentVector::from_parts(6, &parts).unwrap();
            let denom: u64 = (1..=6).map(|i| fact(i as u64).pow(v.get(i) as u32) * fact(v.get(i))).product();
            assert_eq!(count, 720 / denom, "{parts:?}");
        }
    }

    #[test]
    fn selection_restricted_three() {
        let spec = StructureSpec::distinct_partitions(3).unwrap();
        let t = build_restricted_table(&spec, &IndexSet::prefix(3), 3).unwrap();
        assert_eq!(t.total(3), &BigUint::from(2u32));
        let a = unrank_restricted_with_rank(&t, 3, &BigUint::from(1u32)).unwrap();
        let b = unrank_restricted_with_rank(&t, 3, &BigUint::from(2u32)).unwrap();
        let mut got = vec![a.parts(), b.parts()];
        got.sort();
        assert_eq!(got, vec![vec![2, 1], vec![3]]);
    }

    #[test]
    fn multiplicity_ranks_project_correctly() {
        // two types of size 1, one of size 2: weight 2 objects are
        // {a,a},{a,b},{b,b} (z_1 = 2) and {c} (z_2 = 1)
        let spec = StructureSpec::partitions(2).unwrap().with_multiplicities(vec![2, 1]).unwrap();
        let t = build_restricted_table(&spec, &IndexSet::prefix(2), 2).unwrap();
        assert_eq!(t.total(2), &BigUint::from(4u32));
        let profiles: Vec<Vec<u64>> = (1..=4u32)
            .map(|r| unrank_restricted_with_rank(&t, 2, &BigUint::from(r)).unwrap().counts().to_vec())
            .collect();
        assert_eq!(profiles.iter().filter(|p| **p == vec![2, 0]).count(), 3);
        assert_eq!(profiles.iter().filter(|p| **p == vec![0, 1]).count(), 1);
    }

    #[test]
    fn realized_blocks_match_profile() {
        let mut rng = rng_for_stream(5, 0);
        let profile = ComponentVector::from_parts(7, &[3, 2, 2]).unwrap();
        for _ in 0..100 {
            let blocks = realize_set_partition(&profile, 7, &mut rng).unwrap();
            let mut sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
            sizes.sort_unstable();
            assert_eq!(sizes, vec![2, 2, 3]);
            let mut all: Vec<usize> = blocks.concat();
            all.sort_unstable();
            assert_eq!(all, (1..=7).collect::<Vec<_>>());
            assert!(blocks.windows(2).all(|w| w[0][0] < w[1][0]));
        }
        let whole = ComponentVector::from_parts(4, &[4]).unwrap();
        assert_eq!(realize_set_partition(&whole, 4, &mut rng).unwrap(), vec![vec![1, 2, 3, 4]]);
        assert!(realize_set_partition(&whole, 5, &mut rng).is_err());
    }
}
