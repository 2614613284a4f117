//! `pdcsample verify`: oracle checks with per-test p-values and exact
//! comparisons.

use std::fmt;
use std::fs;
use std::thread;

use pdc_core::oracle::{
    bonferroni, chi_square_uniformity, chi_square_uniformity_labeled, enumerate, exact_conditional_law,
    ObjectCensus, SetPartition,
};
use pdc_core::tables::{realize_set_partition, TableDump};
use pdc_core::{rng_for_stream, IndexPolicy, Method, Mode, Sampler, Structure, StructureSpec};

use crate::record::SampleRecord;
use crate::{seed_or_entropy, CliError, CliResult, Failure, VerifyArgs};

type MethodCell = (Method, Option<IndexPolicy>);

#[derive(Clone, Debug)]
pub enum Check {
    /// A chi-square test, compared with `threshold` after correction.
    Statistical { p_value: f64, threshold: f64 },
    /// An exact comparison.
    Exact { ok: bool, detail: String },
}

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub check: Check,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        match &self.check {
            Check::Statistical { p_value, threshold } => p_value > threshold,
            Check::Exact { ok, .. } => *ok,
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        match &self.check {
            Check::Statistical { p_value, threshold } => {
                write!(f, "{verdict} {}: p = {p_value:.6} (threshold {threshold:.2e})", self.name)
            }
            Check::Exact { detail, .. } => write!(f, "{verdict} {}: {detail}", self.name),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    fn exact(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            name: name.into(),
            check: Check::Exact {
                ok,
                detail: detail.into(),
            },
        });
    }

    fn statistical(&mut self, name: impl Into<String>, p_value: f64) {
        self.lines.push(CheckLine {
            name: name.into(),
            check: Check::Statistical {
                p_value,
                threshold: 0.0,
            },
        });
    }

    /// Splits `alpha` over the statistical tests.
    fn correct(&mut self, alpha: f64) {
        let tests = self
            .lines
            .iter()
            .filter(|l| matches!(l.check, Check::Statistical { .. }))
            .count();
        let threshold = bonferroni(alpha, tests);
        for l in &mut self.lines {
            if let Check::Statistical { threshold: t, .. } = &mut l.check {
                *t = threshold;
            }
        }
    }

    /// The exit class of the worst failure, if any.
    pub fn failure(&self) -> Option<Failure> {
        let failed = self.lines.iter().filter(|l| !l.passed());
        let mut worst = None;
        for l in failed {
            match l.check {
                Check::Exact { .. } => return Some(Failure::ExactMismatch),
                Check::Statistical { .. } => worst = Some(Failure::Statistical),
            }
        }
        worst
    }
}

/// Methods and policies exercised for a structure: hard rejection, the
/// deterministic second half, the recursive method with two index sets, and
/// Euler's method for partitions.
pub fn suite_methods(structure: Structure, n: usize) -> Vec<(Method, Option<IndexPolicy>)> {
    let mut out = vec![(Method::Hard, None), (Method::Dsh, None)];
    match structure.class() {
        pdc_core::Class::Assembly => {
            out.push((Method::PdcRecursive, Some(IndexPolicy::Window(1.0))));
            out.push((Method::PdcRecursive, Some(IndexPolicy::Prefix(n))));
        }
        _ => {
            out.push((Method::PdcRecursive, Some(IndexPolicy::Prefix(2))));
            out.push((Method::PdcRecursive, Some(IndexPolicy::Prefix(n))));
        }
    }
    if structure == Structure::Partitions {
        out.push((Method::Euler, None));
    }
    out
}

fn method_name(method: Method, policy: Option<IndexPolicy>) -> String {
    match policy {
        Some(p) => format!("{method}[{p}]"),
        None => method.to_string(),
    }
}

/// Draws `samples` objects per method and tests them against the census;
/// also checks the exact conditional law.
pub fn verify_suite(
    structure: Structure,
    n: usize,
    samples: usize,
    seed: u64,
    mode: Mode,
    alpha: f64,
    workers: usize,
) -> CliResult<VerifyReport> {
    let spec = structure.spec(n)?;
    let census = enumerate(&spec)?;
    let mut report = VerifyReport::default();
    match exact_conditional_law(&spec) {
        Ok(law) => report.exact(
            format!("{structure} n={n} conditional law"),
            true,
            format!("{} profiles, every object has probability {}", law.profiles.len(), law.per_object),
        ),
        Err(e) => report.exact(format!("{structure} n={n} conditional law"), false, e.to_string()),
    }
    let methods = suite_methods(structure, n);
    let labeled = census.labeled().is_some();
    let results: Vec<CliResult<Vec<(String, f64)>>> = thread::scope(|scope| {
        let chunks: Vec<Vec<(usize, MethodCell)>> = {
            let w = workers.clamp(1, methods.len());
            let mut c = vec![Vec::new(); w];
            for (j, m) in methods.iter().copied().enumerate() {
                c[j % w].push((j, m));
            }
            c
        };
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let (spec, census) = (&spec, &census);
                scope.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|(j, (method, policy))| {
                            run_method(spec, census, method, policy, samples, seed, j as u64, mode, labeled)
                                .map(|ps| (j, method_name(method, policy), ps))
                        })
                        .collect::<CliResult<Vec<_>>>()
                })
            })
            .collect();
        let mut all = Vec::new();
        for h in handles {
            match h.join().expect("verify worker panicked") {
                Ok(v) => all.extend(v),
                Err(e) => return vec![Err(e)],
            }
        }
        all.sort_by_key(|(j, _, _)| *j);
        all.into_iter()
            .map(|(_, name, ps)| Ok(ps.into_iter().map(|(what, p)| (format!("{structure} n={n} {name} {what}"), p)).collect()))
            .collect()
    });
    for r in results {
        for (name, p) in r? {
            report.statistical(name, p);
        }
    }
    report.correct(alpha);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_method(
    spec: &StructureSpec,
    census: &ObjectCensus,
    method: Method,
    policy: Option<IndexPolicy>,
    samples: usize,
    seed: u64,
    stream: u64,
    mode: Mode,
    labeled: bool,
) -> CliResult<Vec<(&'static str, f64)>> {
    let sampler = Sampler::build(spec, method, policy, mode)?;
    let mut rng = rng_for_stream(seed, stream);
    let mut vectors = Vec::with_capacity(samples);
    let mut partitions: Vec<SetPartition> = Vec::new();
    for _ in 0..samples {
        let v = sampler.sample(&mut rng)?.vector;
        if labeled {
            partitions.push(realize_set_partition(&v, spec.n(), &mut rng)?);
        }
        vectors.push(v);
    }
    let mut out = vec![("profiles", chi_square_uniformity(&vectors, census)?.p_value)];
    if labeled {
        out.push(("labelled", chi_square_uniformity_labeled(&partitions, census)?.p_value));
    }
    Ok(out)
}

/// Checks records from `sample`: exact weight and shape checks on every
/// record, then chi-square uniformity when the census is small enough.
pub fn verify_records(structure: Structure, records: &[SampleRecord], alpha: f64) -> CliResult<VerifyReport> {
    let mut report = VerifyReport::default();
    let Some(first) = records.first() else {
        return Err(CliError::new(Failure::Config, "no records to verify"));
    };
    let n = first.n;
    let spec = structure.spec(n)?;
    let mut bad = Vec::new();
    let mut vectors = Vec::with_capacity(records.len());
    let mut partitions = Vec::new();
    for r in records {
        if let Some(problem) = record_problem(&spec, r) {
            bad.push(format!("record {}: {problem}", r.index));
            continue;
        }
        vectors.push(r.vector()?);
        if let Some(b) = &r.blocks {
            partitions.push(b.clone());
        }
    }
    report.exact(
        format!("{structure} n={n} weights and shapes"),
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} records consistent", records.len())
        } else {
            format!("{} bad records, first: {}", bad.len(), bad[0])
        },
    );
    if let Ok(census) = enumerate(&spec) {
        match chi_square_uniformity(&vectors, &census) {
            Ok(r) => report.statistical(format!("{structure} n={n} profiles"), r.p_value),
            Err(e) => report.exact(format!("{structure} n={n} profiles"), false, e.to_string()),
        }
        if census.labeled().is_some() && partitions.len() == vectors.len() && !partitions.is_empty() {
            match chi_square_uniformity_labeled(&partitions, &census) {
                Ok(r) => report.statistical(format!("{structure} n={n} labelled"), r.p_value),
                Err(e) => report.exact(format!("{structure} n={n} labelled"), false, e.to_string()),
            }
        }
    }
    report.correct(alpha);
    Ok(report)
}

fn record_problem(spec: &StructureSpec, r: &SampleRecord) -> Option<String> {
    if r.n != spec.n() {
        return Some(format!("n = {} in a file of n = {}", r.n, spec.n()));
    }
    let v = match r.vector() {
        Ok(v) => v,
        Err(e) => return Some(e.message),
    };
    if v.weighted_sum(spec) != r.n as u64 {
        return Some(format!("weight {} != {}", v.weighted_sum(spec), r.n));
    }
    if let Some(p) = &r.parts {
        if *p != v.parts() {
            return Some("parts disagree with counts".into());
        }
    }
    if let Some(blocks) = &r.blocks {
        let mut labels: Vec<usize> = blocks.iter().flatten().copied().collect();
        labels.sort_unstable();
        if labels != (1..=r.n).collect::<Vec<_>>() {
            return Some("blocks do not partition 1..n".into());
        }
        let mut sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        if sizes != v.parts() {
            return Some("block sizes disagree with counts".into());
        }
    }
    None
}

/// Re-derives a dumped table and compares every entry.
pub fn verify_table(text: &str) -> VerifyReport {
    let mut report = VerifyReport::default();
    match text.parse::<TableDump>() {
        Ok(dump) => {
            let name = format!("table {} n={}", dump.kind, dump.n);
            match dump.check() {
                Ok(()) => report.exact(name, true, "all entries match"),
                Err(e) => report.exact(name, false, e.to_string()),
            }
        }
        Err(e) => report.exact("table", false, e.to_string()),
    }
    report
}

pub fn run(args: &VerifyArgs) -> CliResult<()> {
    let mut report = VerifyReport::default();
    if let Some(path) = &args.table {
        report.lines.extend(verify_table(&fs::read_to_string(path)?).lines);
    }
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path)?;
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(SampleRecord::from_json)
            .collect::<CliResult<Vec<_>>>()?;
        report.lines.extend(verify_records(args.structure, &records, args.alpha)?.lines);
    } else if args.table.is_none() || args.n.is_some() {
        let n = args
            .n
            .ok_or_else(|| CliError::new(Failure::Config, "verify needs --n, --input or --table"))?;
        let seed = seed_or_entropy(args.seed);
        println!("seed {seed}");
        let suite = verify_suite(args.structure, n, args.samples, seed, args.mode, args.alpha, args.workers)?;
        report.lines.extend(suite.lines);
    }
    for l in &report.lines {
        println!("{l}");
    }
    match report.failure() {
        None => Ok(()),
        Some(f) => {
            let failed = report.lines.iter().filter(|l| !l.passed()).count();
            Err(CliError::new(f, format!("{failed} of {} checks failed", report.lines.len())))
        }
    }
}
