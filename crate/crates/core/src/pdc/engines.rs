use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_rational::BigRational;
use rand::Rng;

use super::acceptance::AcceptanceFunction;
use super::{choose_index_set, default_dsh_index, IndexPolicy, Method, Outcome, RejectionStats};
use crate::precise::ln_biguint;
use crate::random::{bernoulli_exact, Mode};
use crate::structures::{
    component_distribution, Class, ComponentVector, IndexSet, Stage1Draw, Stage1Sampler, Stage1Strategy,
    StructureSpec, TiltedDistribution,
};
use crate::tables::{
    build_distinct_table, build_partition_table, build_restricted_table, unrank_restricted, CountTable, EulerTable,
};
use crate::{Error, Result};

/// Attempts allowed per sample before giving up.
pub const DEFAULT_ATTEMPT_CAP: u64 = 10_000_000;

/// State shared by the rejection engines: the stage-one sampler over the
/// indices outside `I` and the counters.
#[derive(Debug)]
struct Core {
    spec: StructureSpec,
    index_set: IndexSet,
    stage1: Stage1Sampler,
    mode: Mode,
    cap: u64,
    stats: RejectionStats,
}

impl Core {
    fn new(spec: &StructureSpec, index_set: IndexSet, mode: Mode) -> Result<Self> {
        let stage1 = Stage1Sampler::new(spec, &index_set, Stage1Strategy::default())?;
        Ok(Core {
            spec: spec.clone(),
            index_set,
            stage1,
            mode,
            cap: DEFAULT_ATTEMPT_CAP,
            stats: RejectionStats::default(),
        })
    }

    fn set_strategy(&mut self, strategy: Stage1Strategy) -> Result<()> {
        self.stage1 = Stage1Sampler::new(&self.spec, &self.index_set, strategy)?;
        Ok(())
    }

    fn target(&self) -> usize {
        self.spec.n()
    }

    /// One stage-one draw, stopping early once the weight passes `n`.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Stage1Draw {
        let draw = self.stage1.draw(self.mode, Some(self.target() as u64), rng);
        self.stats.record_attempt(draw.component_draws);
        draw
    }

    /// Repeats stage one until `complete` accepts.
    fn run<R, F>(&self, rng: &mut R, mut complete: F) -> Result<Outcome>
    where
        R: Rng + ?Sized,
        F: FnMut(&Stage1Draw, &mut R) -> Result<Option<ComponentVector>>,
    {
        let start = Instant::now();
        for attempt in 1..=self.cap {
            let draw = self.draw(rng);
            if draw.exceeded {
                continue;
            }
            if let Some(vector) = complete(&draw, rng)? {
                self.stats.record_acceptance(start.elapsed().as_nanos() as u64);
                return Ok(Outcome { vector, attempts: attempt });
            }
        }
        self.stats.record_sampling_time(start.elapsed().as_nanos() as u64);
        Err(Error::BudgetExhausted { attempts: self.cap })
    }
}

/// Draws the whole vector and keeps it iff its weight is exactly `n`.
#[derive(Debug)]
pub struct HardRejection {
    core: Core,
}

impl HardRejection {
    pub fn new(spec: &StructureSpec, mode: Mode) -> Result<Self> {
        Ok(HardRejection {
            core: Core::new(spec, IndexSet::empty(), mode)?,
        })
    }

    pub fn with_strategy(mut self, strategy: Stage1Strategy) -> Result<Self> {
        self.core.set_strategy(strategy)?;
        Ok(self)
    }

    pub fn with_attempt_cap(mut self, cap: u64) -> Self {
        self.core.cap = cap;
        self
    }

    pub fn stats(&self) -> &RejectionStats {
        &self.core.stats
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Outcome> {
        let n = self.core.target();
        self.core.run(rng, |draw, _| {
            Ok((draw.weight == n as u64).then(|| draw.to_vector(n)))
        })
    }
}

/// Leaves index `i` out of stage one; the residual weight then fixes
/// `z_i`, accepted with probability `P(Z_i = z_i) / max_k P(Z_i = k)`.
#[derive(Debug)]
pub struct DeterministicSecondHalf {
    core: Core,
    law: TiltedDistribution,
    mode_count: u64,
    ln_mode_mass: f64,
    mode_mass: OnceLock<BigRational>,
}

impl DeterministicSecondHalf {
    pub fn new(spec: &StructureSpec, i: usize, mode: Mode) -> Result<Self> {
        let law = component_distribution(spec, i)?;
        let mode_count = match mode {
            Mode::Exact => law.mode(),
            Mode::Fast => law.mode_approx(),
        };
        Ok(DeterministicSecondHalf {
            core: Core::new(spec, IndexSet::new([i]), mode)?,
            ln_mode_mass: law.ln_relative_mass(mode_count),
            law,
            mode_count,
            mode_mass: OnceLock::new(),
        })
    }

    pub fn with_strategy(mut self, strategy: Stage1Strategy) -> Result<Self> {
        self.core.set_strategy(strategy)?;
        Ok(self)
    }

    pub fn with_attempt_cap(mut self, cap: u64) -> Self {
        self.core.cap = cap;
        self
    }

    pub fn stats(&self) -> &RejectionStats {
        &self.core.stats
    }

    pub fn index(&self) -> usize {
        self.law.index()
    }

    /// The acceptance probability when the residual forces `Z_i = z`.
    pub fn acceptance(&self, z: u64) -> BigRational {
        let top = self.mode_mass.get_or_init(|| self.law.relative_mass(self.mode_count));
        self.law.relative_mass(z) / top
    }

    fn accept<R: Rng + ?Sized>(&self, z: u64, rng: &mut R) -> bool {
        match self.core.mode {
            Mode::Exact => bernoulli_exact(&self.acceptance(z), rng),
            Mode::Fast => {
                let ln_t = self.law.ln_relative_mass(z) - self.ln_mode_mass;
                rng.random::<f64>() < ln_t.exp()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Outcome> {
        let n = self.core.target();
        let i = self.law.index();
        let w = self.law.weight() as u64;
        self.core.run(rng, |draw, rng| {
            let y = n as u64 - draw.weight;
            if !y.is_multiple_of(w) {
                return Ok(None);
            }
            let z = y / w;
            if self.law.support_max().is_some_and(|m| z > m) || !self.accept(z, rng) {
                return Ok(None);
            }
            let mut v = draw.to_vector(n);
            v.add(i, z);
            Ok(Some(v))
        })
    }
}

/// The table a recursive engine uses for `I`: the bounded `p(j, κ)` /
/// `q(j, κ)` table when `I = {1..k}` with unit multiplicities and identity
/// weights, otherwise the general restricted table.
pub fn table_for(spec: &StructureSpec, index_set: &IndexSet) -> Result<CountTable> {
    let n = spec.n();
    let plain = spec.has_unit_multiplicities() && spec.has_identity_weights() && index_set.is_prefix();
    match (spec.class(), index_set.max()) {
        (Class::Multiset, Some(k)) if plain => build_partition_table(n, k),
        (Class::Selection, Some(k)) if plain => build_distinct_table(n, k),
        _ => build_restricted_table(spec, index_set, n),
    }
}

/// Leaves the indices in `I` out of stage one, accepts the residual weight
/// `y` with probability `t(y)`, then completes by unranking from the table.
#[derive(Debug)]
pub struct PdcRecursive {
    core: Core,
    acceptance: AcceptanceFunction,
}

impl PdcRecursive {
    pub fn new(spec: &StructureSpec, index_set: &IndexSet, mode: Mode) -> Result<Self> {
        let start = Instant::now();
        let table = Arc::new(table_for(spec, index_set)?);
        let elapsed = start.elapsed().as_nanos() as u64;
        let engine = PdcRecursive::with_table(spec, index_set, table, mode)?;
        engine.core.stats.record_table_build(elapsed);
        Ok(engine)
    }

    /// Uses a prebuilt table, which must count objects over exactly `I`.
    pub fn with_table(spec: &StructureSpec, index_set: &IndexSet, table: Arc<CountTable>, mode: Mode) -> Result<Self> {
        if table.index_set() != index_set {
            return Err(Error::InconsistentTable(format!(
                "table is over {{{}}}, engine over {{{}}}",
                table.index_set(),
                index_set
            )));
        }
        if table.class() != spec.class() {
            return Err(Error::InconsistentTable(format!(
                "{} table for a {} spec",
                table.kind(),
                spec.class()
            )));
        }
        Ok(PdcRecursive {
            core: Core::new(spec, index_set.clone(), mode)?,
            acceptance: AcceptanceFunction::new(spec, table, spec.n())?,
        })
    }

    pub fn with_strategy(mut self, strategy: Stage1Strategy) -> Result<Self> {
        self.core.set_strategy(strategy)?;
        Ok(self)
    }

    pub fn with_attempt_cap(mut self, cap: u64) -> Self {
        self.core.cap = cap;
        self
    }

    pub fn stats(&self) -> &RejectionStats {
        &self.core.stats
    }

    pub fn acceptance(&self) -> &AcceptanceFunction {
        &self.acceptance
    }

    pub fn table(&self) -> &Arc<CountTable> {
        self.acceptance.table()
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.core.index_set
    }

    pub(crate) fn mode(&self) -> Mode {
        self.core.mode
    }

    pub(crate) fn cap(&self) -> u64 {
        self.core.cap
    }

    /// The second half for one stage-one draw: `Some(vector)` on acceptance.
    pub(crate) fn complete<R: Rng + ?Sized>(&self, draw: &Stage1Draw, rng: &mut R) -> Result<Option<ComponentVector>> {
        let n = self.core.target();
        if draw.exceeded {
            return Ok(None);
        }
        let y = n - draw.weight as usize;
        if !self.acceptance.accept(y, self.core.mode, rng) {
            return Ok(None);
        }
        let rest = unrank_restricted(self.acceptance.table(), y, rng)?;
        let mut v = draw.to_vector(n);
        for (i, z) in rest.sparse() {
            v.add(i, z);
        }
        Ok(Some(v))
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Stage1Draw {
        self.core.draw(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Outcome> {
        self.core.run(rng, |draw, rng| self.complete(draw, rng))
    }

    /// Like [`sample`](Self::sample) with stage one and the second half fed
    /// from separate generators.
    pub fn sample_split<R1, R2>(&self, stage1_rng: &mut R1, second_rng: &mut R2) -> Result<Outcome>
    where
        R1: Rng + ?Sized,
        R2: Rng + ?Sized,
    {
        let start = Instant::now();
        for attempt in 1..=self.core.cap {
            let draw = self.draw(stage1_rng);
            if let Some(vector) = self.complete(&draw, second_rng)? {
                self.core.stats.record_acceptance(start.elapsed().as_nanos() as u64);
                return Ok(Outcome { vector, attempts: attempt });
            }
        }
        Err(Error::BudgetExhausted { attempts: self.core.cap })
    }
}

/// Uniform integer partitions by the divisor method (no rejection).
#[derive(Debug)]
pub struct EulerSampler {
    n: usize,
    table: EulerTable,
    stats: RejectionStats,
}

impl EulerSampler {
    pub fn new(spec: &StructureSpec) -> Result<Self> {
        if spec.class() != Class::Multiset || !spec.has_unit_multiplicities() || !spec.has_identity_weights() {
            return Err(Error::InvalidSpec("the divisor method samples integer partitions only".into()));
        }
        let start = Instant::now();
        let table = EulerTable::new(spec.n());
        let stats = RejectionStats::default();
        stats.record_table_build(start.elapsed().as_nanos() as u64);
        Ok(EulerSampler {
            n: spec.n(),
            table,
            stats,
        })
    }

    pub fn stats(&self) -> &RejectionStats {
        &self.stats
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Outcome> {
        let start = Instant::now();
        let parts = self.table.sample(self.n, rng);
        self.stats.record_attempt(0);
        self.stats.record_acceptance(start.elapsed().as_nanos() as u64);
        Ok(Outcome {
            vector: ComponentVector::from_parts(self.n, &parts)?,
            attempts: 1,
        })
    }
}

/// Any of the engines behind one interface.
#[derive(Debug)]
pub enum Sampler {
    Hard(HardRejection),
    Dsh(DeterministicSecondHalf),
    Recursive(PdcRecursive),
    Euler(EulerSampler),
}

impl Sampler {
    /// Builds the engine for `method`. `policy` selects `I` for the
    /// divide-and-conquer methods; without one, DSH uses
    /// [`default_dsh_index`] and the recursive method uses `{1..⌈√n⌉}`
    /// (multisets, selections) or the window of half-width `√x` around `x`
    /// (assemblies).
    pub fn build(spec: &StructureSpec, method: Method, policy: Option<IndexPolicy>, mode: Mode) -> Result<Self> {
        Ok(match method {
            Method::Hard => Sampler::Hard(HardRejection::new(spec, mode)?),
            Method::Euler => Sampler::Euler(EulerSampler::new(spec)?),
            Method::Dsh => {
                let i = match policy {
                    None => default_dsh_index(spec),
                    Some(p) => {
                        let set = choose_index_set(spec, p)?;
                        match set.members() {
                            [i] => *i,
                            _ => {
                                return Err(Error::InvalidSpec(format!(
                                    "the deterministic second half needs a single index, policy {p} gives {{{set}}}"
                                )))
                            }
                        }
                    }
                };
                Sampler::Dsh(DeterministicSecondHalf::new(spec, i, mode)?)
            }
            Method::PdcRecursive => {
                let policy = policy.unwrap_or_else(|| default_recursive_policy(spec));
                let set = choose_index_set(spec, policy)?;
                Sampler::Recursive(PdcRecursive::new(spec, &set, mode)?)
            }
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Sampler::Hard(_) => Method::Hard,
            Sampler::Dsh(_) => Method::Dsh,
            Sampler::Recursive(_) => Method::PdcRecursive,
            Sampler::Euler(_) => Method::Euler,
        }
    }

    /// The second-half index set (empty for hard rejection and Euler).
    pub fn index_set(&self) -> IndexSet {
        match self {
            Sampler::Hard(_) | Sampler::Euler(_) => IndexSet::empty(),
            Sampler::Dsh(e) => IndexSet::new([e.index()]),
            Sampler::Recursive(e) => e.index_set().clone(),
        }
    }

    pub fn stats(&self) -> &RejectionStats {
        match self {
            Sampler::Hard(e) => e.stats(),
            Sampler::Dsh(e) => e.stats(),
            Sampler::Recursive(e) => e.stats(),
            Sampler::Euler(e) => e.stats(),
        }
    }

    pub fn with_attempt_cap(self, cap: u64) -> Self {
        match self {
            Sampler::Hard(e) => Sampler::Hard(e.with_attempt_cap(cap)),
            Sampler::Dsh(e) => Sampler::Dsh(e.with_attempt_cap(cap)),
            Sampler::Recursive(e) => Sampler::Recursive(e.with_attempt_cap(cap)),
            Sampler::Euler(e) => Sampler::Euler(e),
        }
    }

    pub fn with_strategy(self, strategy: Stage1Strategy) -> Result<Self> {
        Ok(match self {
            Sampler::Hard(e) => Sampler::Hard(e.with_strategy(strategy)?),
            Sampler::Dsh(e) => Sampler::Dsh(e.with_strategy(strategy)?),
            Sampler::Recursive(e) => Sampler::Recursive(e.with_strategy(strategy)?),
            Sampler::Euler(e) => Sampler::Euler(e),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Outcome> {
        match self {
            Sampler::Hard(e) => e.sample(rng),
            Sampler::Dsh(e) => e.sample(rng),
            Sampler::Recursive(e) => e.sample(rng),
            Sampler::Euler(e) => e.sample(rng),
        }
    }
}

fn default_recursive_policy(spec: &StructureSpec) -> IndexPolicy {
    match spec.class() {
        Class::Assembly => IndexPolicy::Window(1.0),
        _ => IndexPolicy::Prefix((spec.n() as f64).sqrt().ceil() as usize),
    }
}

/// One exact Boltzmann sample by hard rejection.
pub fn hard_rejection<R: Rng + ?Sized>(spec: &StructureSpec, mode: Mode, rng: &mut R) -> Result<ComponentVector> {
    HardRejection::new(spec, mode)?.sample(rng).map(|o| o.vector)
}

/// One sample by the deterministic second half on index `i`.
pub fn pdc_dsh<R: Rng + ?Sized>(spec: &StructureSpec, i: usize, mode: Mode, rng: &mut R) -> Result<ComponentVector> {
    DeterministicSecondHalf::new(spec, i, mode)?.sample(rng).map(|o| o.vector)
}

/// One sample by divide-and-conquer with a recursive-method completion.
pub fn pdc_recursive<R: Rng + ?Sized>(
    spec: &StructureSpec,
    index_set: &IndexSet,
    table: Arc<CountTable>,
    mode: Mode,
    rng: &mut R,
) -> Result<ComponentVector> {
    PdcRecursive::with_table(spec, index_set, table, mode)?
        .sample(rng)
        .map(|o| o.vector)
}

fn ln_normalization_over(spec: &StructureSpec, indices: impl Iterator<Item = usize>) -> Result<f64> {
    indices
        .map(|i| component_distribution(spec, i).map(|l| l.ln_normalization()))
        .sum()
}

/// `1 / max_ℓ P(T_I = ℓ)`, where `T_I = Σ_{i ∈ I} w_i Z_i`: the factor by
/// which the second half over `I` cuts the expected number of attempts.
/// `table` may be omitted, in which case it is built.
pub fn boost_factor(spec: &StructureSpec, index_set: &IndexSet, table: Option<&CountTable>) -> Result<f64> {
    if index_set.is_empty() {
        return Ok(1.0);
    }
    let owned;
    let table = match table {
        Some(t) => t,
        None => {
            owned = build_restricted_table(spec, index_set, spec.n())?;
            &owned
        }
    };
    let acc = AcceptanceFunction::new(spec, Arc::new(table.clone()), spec.n())?;
    let ln_c = ln_normalization_over(spec, index_set.members().iter().copied())?;
    Ok((-(acc.log_max_weight() + ln_c)).exp())
}

/// Expected stage-one draws per accepted sample with second half over `I`:
/// `max_ℓ P(T_I = ℓ) / P(T = n)`. Builds the full count table, so cost is
/// quadratic in `n`.
pub fn expected_attempts(spec: &StructureSpec, index_set: &IndexSet) -> Result<f64> {
    let n = spec.n();
    let full = build_restricted_table(spec, &IndexSet::prefix(n), n)?;
    let mut ln_hit = ln_biguint(full.total(n)) + n as f64 * spec.tilt().value().ln();
    if spec.class() == Class::Assembly {
        ln_hit -= statrs::function::gamma::ln_gamma(n as f64 + 1.0);
    }
    ln_hit += ln_normalization_over(spec, 1..=n)?;
    let boost = boost_factor(spec, index_set, None)?;
    Ok((-ln_hit).exp() / boost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_for_stream;
    use crate::structures::Tilt;
    use approx::assert_relative_eq;

    #[test]
    fn weights_are_conserved() {
        let specs = [
            StructureSpec::partitions(30).unwrap(),
            StructureSpec::distinct_partitions(30).unwrap(),
            StructureSpec::set_partitions(30).unwrap(),
        ];
        let mut rng = rng_for_stream(1, 0);
        for spec in &specs {
            for method in [Method::Hard, Method::Dsh, Method::PdcRecursive] {
                let sampler = Sampler::build(spec, method, None, Mode::Fast).unwrap();
                for _ in 0..50 {
                    let out = sampler.sample(&mut rng).unwrap();
                    assert_eq!(out.vector.weighted_sum(spec), 30, "{method} {}", spec.class());
                    assert!(out.attempts >= 1);
                }
                let s = sampler.stats().snapshot();
                assert_eq!(s.acceptances, 50);
                assert!(s.attempts >= s.acceptances);
            }
        }
    }

    #[test]
    fn unit_target_is_single_part() {
        let spec = StructureSpec::partitions(1).unwrap();
        let mut rng = rng_for_stream(2, 0);
        for method in [Method::Hard, Method::Dsh, Method::PdcRecursive, Method::Euler] {
            let s = Sampler::build(&spec, method, None, Mode::Exact).unwrap();
            for _ in 0..20 {
                assert_eq!(s.sample(&mut rng).unwrap().vector.parts(), vec![1]);
            }
        }
    }

    #[test]
    fn budget_exhaustion() {
        // weights all even, target odd: unreachable
        let spec = StructureSpec::new(Class::Multiset, 3, Tilt::ratio(1, 2).unwrap())
            .unwrap()
            .with_weights(vec![2, 2, 2])
            .unwrap();
        let s = Sampler::build(&spec, Method::Hard, None, Mode::Fast)
            .unwrap()
            .with_attempt_cap(100);
        let mut rng = rng_for_stream(3, 0);
        assert!(matches!(s.sample(&mut rng), Err(Error::BudgetExhausted { attempts: 100 })));
    }

    #[test]
    fn euler_rejects_other_classes() {
        let spec = StructureSpec::set_partitions(5).unwrap();
        assert!(Sampler::build(&spec, Method::Euler, None, Mode::Fast).is_err());
    }

    #[test]
    fn dsh_policy_must_be_single() {
        let spec = StructureSpec::partitions(8).unwrap();
        assert!(Sampler::build(&spec, Method::Dsh, Some(IndexPolicy::Prefix(2)), Mode::Fast).is_err());
        let s = Sampler::build(&spec, Method::Dsh, Some(IndexPolicy::Singleton(2)), Mode::Fast).unwrap();
        assert_eq!(s.index_set().members(), &[2]);
    }

    #[test]
    fn partition_dsh_acceptance_is_tilt_power() {
        let spec = StructureSpec::new(Class::Multiset, 6, Tilt::ratio(2, 3).unwrap()).unwrap();
        let dsh = DeterministicSecondHalf::new(&spec, 1, Mode::Exact).unwrap();
        for z in 0..6u32 {
            let want = BigRational::new(2.into(), 3.into());
            assert_eq!(dsh.acceptance(z as u64), num_traits::Pow::pow(&want, z));
        }
    }

    #[test]
    fn boost_values() {
        let spec = StructureSpec::partitions(400).unwrap();
        assert_eq!(boost_factor(&spec, &IndexSet::empty(), None).unwrap(), 1.0);
        let x = spec.tilt().value();
        assert_relative_eq!(boost_factor(&spec, &IndexSet::new([1]), None).unwrap(), 1.0 / (1.0 - x), max_relative = 1e-10);
        let d = StructureSpec::distinct_partitions(400).unwrap();
        let b = boost_factor(&d, &IndexSet::new([1]), None).unwrap();
        assert!(b <= 2.0 && b > 1.0);
    }

    #[test]
    fn expected_attempts_small_case() {
        // partitions of 4 at x = 1/2: P(T = 4) = 5 x^4 Π_{i≤4} (1 - x^i)
        let spec = StructureSpec::new(Class::Multiset, 4, Tilt::ratio(1, 2).unwrap()).unwrap();
        let c: f64 = (1..=4).map(|i| 1.0 - 0.5f64.powi(i)).product();
        let hit = 5.0 * 0.5f64.powi(4) * c;
        assert_relative_eq!(expected_attempts(&spec, &IndexSet::empty()).unwrap(), 1.0 / hit, max_relative = 1e-12);
        // I = {1}: max_ℓ P(Z_1 = ℓ) = 1 - x
        assert_relative_eq!(expected_attempts(&spec, &IndexSet::new([1])).unwrap(), 0.5 / hit, max_relative = 1e-12);
    }

    #[test]
    fn table_choice() {
        let p = StructureSpec::partitions(10).unwrap();
        assert!(table_for(&p, &IndexSet::prefix(3)).unwrap().kind().is_bounded());
        assert!(!table_for(&p, &IndexSet::new([2, 3])).unwrap().kind().is_bounded());
        let mismatch = Arc::new(build_partition_table(10, 3).unwrap());
        assert!(PdcRecursive::with_table(&p, &IndexSet::prefix(4), mismatch, Mode::Fast).is_err());
    }
}
