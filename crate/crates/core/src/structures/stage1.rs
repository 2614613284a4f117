//! Stage one: the independent counts `Z_i` for `i ∉ I`.

use rand::Rng;

use super::laws::{component_distribution, TiltedDistribution};
use super::{Class, ComponentVector, IndexSet, StructureSpec};
use crate::random::{open_unit, Mode};
use crate::Result;

/// How the fast-mode sampler walks the indices outside `I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Stage1Strategy {
    /// One draw per index. Always used in exact mode.
    PerIndex,
    /// Thinning with geometric skips (multisets, selections) or a Poisson
    /// process over the cumulative rates (assemblies). Equal in law to
    /// `PerIndex`, but its cost scales with the number of nonzero counts.
    #[default]
    Batched,
}

/// Blocks with a larger positive-probability bound are walked directly.
const DIRECT_THRESHOLD: f64 = 0.3;

#[derive(Clone, Debug)]
struct Block {
    start: usize,
    end: usize,
    bound: f64,
    ln_miss: f64,
}

/// The result of one stage-one draw.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stage1Draw {
    /// Nonzero `(index, count)` pairs, increasing in index.
    pub entries: Vec<(usize, u64)>,
    /// `Σ w_i z_i` over the entries. When `exceeded` is set this is only a
    /// partial sum already beyond the limit.
    pub weight: u64,
    /// Number of elementary law evaluations spent.
    pub component_draws: u64,
    pub exceeded: bool,
}

impl Stage1Draw {
    pub fn to_vector(&self, n: usize) -> ComponentVector {
        let mut v = ComponentVector::zeros(n);
        for &(i, z) in &self.entries {
            v.add(i, z);
        }
        v
    }
}

/// Samples `(Z_i)_{i ∉ I}` repeatedly for one spec.
#[derive(Clone, Debug)]
pub struct Stage1Sampler {
    class: Class,
    laws: Vec<TiltedDistribution>,
    positive: Vec<f64>,
    blocks: Vec<Block>,
    cumulative: Vec<f64>,
    strategy: Stage1Strategy,
}

impl Stage1Sampler {
    pub fn new(spec: &StructureSpec, index_set: &IndexSet, strategy: Stage1Strategy) -> Result<Self> {
        index_set.check_within(spec.n())?;
        let laws = (1..=spec.n())
            .filter(|&i| !index_set.contains(i))
            .map(|i| component_distribution(spec, i))
            .collect::<Result<Vec<_>>>()?;
        let positive: Vec<f64> = laws.iter().map(|l| l.prob_positive()).collect();
        let mut blocks = Vec::new();
        let mut cumulative = Vec::new();
        if strategy == Stage1Strategy::Batched {
            if spec.class() == Class::Assembly {
                let mut acc = 0.0;
                cumulative = laws
                    .iter()
                    .map(|l| {
                        acc += l.ratio();
                        acc
                    })
                    .collect();
            } else {
                blocks = build_blocks(&positive);
            }
        }
        Ok(Stage1Sampler {
            class: spec.class(),
            laws,
            positive,
            blocks,
            cumulative,
            strategy,
        })
    }

    pub fn strategy(&self) -> Stage1Strategy {
        self.strategy
    }

    /// Number of indices outside `I`.
    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    /// Draws every `Z_i`, `i ∉ I`. With a `limit`, stops as soon as the
    /// running weight exceeds it.
    pub fn draw<R: Rng + ?Sized>(&self, mode: Mode, limit: Option<u64>, rng: &mut R) -> Stage1Draw {
        let mut out = Stage1Draw::default();
        let limit = limit.unwrap_or(u64::MAX);
        match (mode, self.strategy) {
            (Mode::Exact, _) | (Mode::Fast, Stage1Strategy::PerIndex) => {
                for law in &self.laws {
                    out.component_draws += 1;
                    let z = law.sample(mode, rng);
                    if z > 0 && push(&mut out, law, z, limit) {
                        return out;
                    }
                }
            }
            (Mode::Fast, Stage1Strategy::Batched) => {
                if self.class == Class::Assembly {
                    self.draw_poisson_process(&mut out, limit, rng);
                } else {
                    self.draw_thinned(&mut out, limit, rng);
                }
            }
        }
        out
    }

    fn draw_thinned<R: Rng + ?Sized>(&self, out: &mut Stage1Draw, limit: u64, rng: &mut R) {
        for block in &self.blocks {
            if block.bound >= DIRECT_THRESHOLD {
                for law in &self.laws[block.start..block.end] {
                    out.component_draws += 1;
                    let z = law.sample(Mode::Fast, rng);
                    if z > 0 && push(out, law, z, limit) {
                        return;
                    }
                }
                continue;
            }
            // candidates arrive as a Bernoulli(bound) process; each is kept
            // with probability π_i / bound
            let mut pos = block.start;
            loop {
                let skip = open_unit(rng).ln() / block.ln_miss;
                if skip >= (block.end - pos) as f64 {
                    break;
                }
                pos += skip as usize;
                out.component_draws += 1;
                if rng.random::<f64>() * block.bound < self.positive[pos] {
                    let law = &self.laws[pos];
                    let z = law.sample_positive_fast(rng);
                    if push(out, law, z, limit) {
                        return;
                    }
                }
                pos += 1;
                if pos >= block.end {
                    break;
                }
            }
        }
    }

    fn draw_poisson_process<R: Rng + ?Sized>(&self, out: &mut Stage1Draw, limit: u64, rng: &mut R) {
        let Some(&total) = self.cumulative.last() else {
            return;
        };
        let mut hits: Vec<usize> = Vec::new();
        let mut weight = 0u64;
        let mut t = 0.0;
        loop {
            t -= open_unit(rng).ln();
            if t >= total {
                break;
            }
            out.component_draws += 1;
            let pos = self.cumulative.partition_point(|&c| c <= t).min(self.laws.len() - 1);
            weight += self.laws[pos].weight() as u64;
            hits.push(pos);
            if weight > limit {
                out.weight = weight;
                out.exceeded = true;
                return;
            }
        }
        hits.sort_unstable();
        for chunk in hits.chunk_by(|a, b| a == b) {
            out.entries.push((self.laws[chunk[0]].index(), chunk.len() as u64));
        }
        out.weight = weight;
    }
}

/// Appends a count; true when the running weight passed `limit`.
fn push(out: &mut Stage1Draw, law: &TiltedDistribution, z: u64, limit: u64) -> bool {
    out.entries.push((law.index(), z));
    out.weight = out.weight.saturating_add((law.weight() as u64).saturating_mul(z));
    if out.weight > limit {
        out.exceeded = true;
        true
    } else {
        false
    }
}

/// Splits the laws into runs over which `P(Z_i ≥ 1)` varies by at most a
/// factor of two.
fn build_blocks(positive: &[f64]) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < positive.len() {
        let mut hi = positive[start];
        let mut lo = positive[start];
        let mut end = start + 1;
        while end < positive.len() {
            let p = positive[end];
            let (h, l) = (hi.max(p), lo.min(p));
            if h > 2.0 * l {
                break;
            }
            hi = h;
            lo = l;
            end += 1;
        }
        blocks.push(Block {
            start,
            end,
            bound: hi,
            ln_miss: (-hi).ln_1p(),
        });
        start = end;
    }
    blocks
}

/// One stage-one draw with the per-index strategy: the counts `Z_i`, `i ∉ I`,
/// and their weight `Σ w_i Z_i`.
pub fn sample_stage1<R: Rng + ?Sized>(
    spec: &StructureSpec,
    index_set: &IndexSet,
    mode: Mode,
    rng: &mut R,
) -> Result<(ComponentVector, u64)> {
    let sampler = Stage1Sampler::new(spec, index_set, Stage1Strategy::PerIndex)?;
    let draw = sampler.draw(mode, None, rng);
    Ok((draw.to_vector(spec.n()), draw.weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_for_stream;
    use crate::structures::Tilt;
    use std::collections::HashMap;

    #[test]
    fn full_index_set_leaves_nothing() {
        let spec = StructureSpec::partitions(10).unwrap();
        let mut rng = rng_for_stream(1, 0);
        let (v, m) = sample_stage1(&spec, &IndexSet::prefix(10), Mode::Fast, &mut rng).unwrap();
        assert_eq!(m, 0);
        assert_eq!(v.total_components(), 0);
    }

    #[test]
    fn draws_avoid_the_index_set() {
        let spec = StructureSpec::partitions(10).unwrap();
        let set = IndexSet::prefix(3);
        let mut rng = rng_for_stream(2, 0);
        for strategy in [Stage1Strategy::PerIndex, Stage1Strategy::Batched] {
            let sampler = Stage1Sampler::new(&spec, &set, strategy).unwrap();
            for _ in 0..2000 {
                let d = sampler.draw(Mode::Fast, None, &mut rng);
                assert!(d.entries.iter().all(|&(i, z)| i > 3 && z > 0));
                let v = d.to_vector(10);
                assert_eq!(v.weighted_sum(&spec), d.weight);
            }
        }
    }

    #[test]
    fn limit_stops_early() {
        let spec = StructureSpec::set_partitions(30).unwrap();
        let sampler = Stage1Sampler::new(&spec, &IndexSet::empty(), Stage1Strategy::Batched).unwrap();
        let mut rng = rng_for_stream(3, 0);
        let d = sampler.draw(Mode::Fast, Some(0), &mut rng);
        assert!(d.exceeded);
        assert!(d.weight > 0);
    }

    // Two-sample homogeneity of the weight M under both strategies.
    fn compare_strategies(spec: &StructureSpec, set: &IndexSet, draws: usize) {
        let mut counts: [HashMap<u64, u64>; 2] = Default::default();
        for (slot, strategy) in [Stage1Strategy::PerIndex, Stage1Strategy::Batched].iter().enumerate() {
            let sampler = Stage1Sampler::new(spec, set, *strategy).unwrap();
            let mut rng = rng_for_stream(40 + slot as u64, 0);
            for _ in 0..draws {
                let d = sampler.draw(Mode::Fast, None, &mut rng);
                *counts[slot].entry(d.weight.min(3 * spec.n() as u64)).or_default() += 1;
            }
        }
        let p = crate::oracle::homogeneity_p_value(&counts[0], &counts[1]);
        assert!(p > 1e-4, "{:?} p={p}", spec.class());
    }

    #[test]
    fn batched_matches_per_index() {
        compare_strategies(&StructureSpec::set_partitions(8).unwrap(), &IndexSet::empty(), 100_000);
        compare_strategies(&StructureSpec::partitions(20).unwrap(), &IndexSet::prefix(2), 100_000);
        let multi = StructureSpec::distinct_partitions(20)
            .unwrap()
            .with_multiplicities((1..=20).map(|i| 1 + (i % 3) as u64).collect())
            .unwrap();
        compare_strategies(&multi, &IndexSet::new([3]), 100_000);
    }

    #[test]
    fn exact_mode_weight_frequency() {
        // P(M = 0) = Π c_i exactly for a rational tilt
        let spec = StructureSpec::new(Class::Multiset, 4, Tilt::ratio(1, 2).unwrap()).unwrap();
        let p0: f64 = (1..=4).map(|i| 1.0 - 0.5f64.powi(i)).product();
        let mut rng = rng_for_stream(5, 0);
        let draws = 40_000;
        let zeros = (0..draws)
            .filter(|_| sample_stage1(&spec, &IndexSet::empty(), Mode::Exact, &mut rng).unwrap().1 == 0)
            .count() as f64;
        let sd = (draws as f64 * p0 * (1.0 - p0)).sqrt();
        assert!((zeros - draws as f64 * p0).abs() < 4.0 * sd);
    }
}
