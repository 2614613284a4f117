//! Rejection-cost measurement against the asymptotic predictions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use crate::pdc::{IndexPolicy, Method, Sampler, DEFAULT_ATTEMPT_CAP};
use crate::random::{rng_for_stream, Mode};
use crate::structures::{Structure, StructureSpec};
use crate::{Error, Result};

/// Column names of [`CostReport::csv_row`].
pub const CSV_HEADER: &str = "structure,method,n,policy,samples,mean_attempts,stderr,predicted,table_ms,sample_ms";

/// Predicted mean number of stage-one draws per accepted sample, where a
/// closed form is known: hard rejection on the three classical families
/// and the deterministic second half (default index) on partitions and
/// distinct partitions.
pub fn predict_cost(structure: Structure, method: Method, n: usize) -> Option<f64> {
    let nf = n as f64;
    match (structure, method) {
        (Structure::Partitions, Method::Hard) => Some((96.0 * nf.powi(3)).powf(0.25)),
        (Structure::Partitions, Method::Dsh) => Some((96.0 * nf.powi(3)).powf(0.25) * PI / (6.0 * nf).sqrt()),
        (Structure::DistinctPartitions, Method::Hard) => Some((192.0 * nf.powi(3)).powf(0.25)),
        (Structure::DistinctPartitions, Method::Dsh) => {
            // Z_1 is Bernoulli(x/(1+x)); its largest point mass is 1/(1+x)
            let x = StructureSpec::default_tilt(structure.class(), n).value();
            Some((192.0 * nf.powi(3)).powf(0.25) / (1.0 + x))
        }
        (Structure::SetPartitions, Method::Hard) => {
            let x = StructureSpec::default_tilt(structure.class(), n).value();
            Some((2.0 * PI * nf * (x + 1.0)).sqrt())
        }
        _ => None,
    }
}

/// One benchmark cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchCell {
    pub structure: Structure,
    pub method: Method,
    pub n: usize,
    pub policy: Option<IndexPolicy>,
}

impl BenchCell {
    pub fn new(structure: Structure, method: Method, n: usize, policy: Option<IndexPolicy>) -> Self {
        BenchCell {
            structure,
            method,
            n,
            policy,
        }
    }

    /// Parses `structure,method,n[,policy]`; a missing policy or `none`
    /// means the method's default.
    pub fn parse_csv(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::Parse(format!("bad grid line `{line}`")));
        }
        let n = fields[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad n `{}`", fields[2])))?;
        let policy = match fields.get(3) {
            None | Some(&"") | Some(&"none") => None,
            Some(p) => Some(p.parse()?),
        };
        Ok(BenchCell::new(fields[0].parse()?, fields[1].parse()?, n, policy))
    }
}

/// Measured cost of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub cell: BenchCell,
    /// `I` as chosen for the cell, comma-separated.
    pub index_set: String,
    pub samples: usize,
    pub mean_attempts: f64,
    pub stderr: f64,
    pub predicted: Option<f64>,
    pub table_ms: f64,
    pub sample_ms: f64,
    pub stage1_component_draws: u64,
    /// The attempt budget ran out before `samples` reached the target.
    pub exhausted: bool,
}

impl CostReport {
    pub fn csv_row(&self) -> String {
        let policy = self.cell.policy.map_or_else(|| "none".to_string(), |p| p.to_string());
        let predicted = self.predicted.map_or_else(String::new, |p| format!("{p:.4}"));
        format!(
            "{},{},{},{},{},{:.4},{:.4},{},{:.3},{:.3}",
            self.cell.structure,
            self.cell.method,
            self.cell.n,
            policy,
            self.samples,
            self.mean_attempts,
            self.stderr,
            predicted,
            self.table_ms,
            self.sample_ms
        )
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.csv_row())
    }
}

/// Benchmark settings shared by every cell.
#[derive(Clone, Copy, Debug)]
pub struct BenchConfig {
    pub samples_per_cell: usize,
    pub seed: u64,
    pub attempt_cap: u64,
    /// Cells run concurrently on this many threads.
    pub workers: usize,
}

impl BenchConfig {
    pub fn new(samples_per_cell: usize, seed: u64) -> Self {
        BenchConfig {
            samples_per_cell,
            seed,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
            workers: thread::available_parallelism().map_or(1, |p| p.get()),
        }
    }
}

/// Runs one cell in fast mode with the generator stream `stream`.
pub fn run_cell(cell: &BenchCell, config: &BenchConfig, stream: u64) -> Result<CostReport> {
    let spec = cell.structure.spec(cell.n)?;
    let sampler = Sampler::build(&spec, cell.method, cell.policy, Mode::Fast)?.with_attempt_cap(config.attempt_cap);
    let index_set = sampler.index_set().to_string();
    let mut rng = rng_for_stream(config.seed, stream);
    let mut attempts: Vec<f64> = Vec::with_capacity(config.samples_per_cell);
    let mut exhausted = false;
    let start = Instant::now();
    while attempts.len() < config.samples_per_cell {
        match sampler.sample(&mut rng) {
            Ok(out) => attempts.push(out.attempts as f64),
            Err(Error::BudgetExhausted { .. }) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let sample_ms = start.elapsed().as_secs_f64() * 1e3;
    let samples = attempts.len();
    let mean = attempts.iter().sum::<f64>() / samples as f64;
    let var = if samples > 1 {
        attempts.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (samples - 1) as f64
    } else {
        f64::NAN
    };
    let snap = sampler.stats().snapshot();
    Ok(CostReport {
        cell: *cell,
        index_set,
        samples,
        mean_attempts: mean,
        stderr: (var / samples as f64).sqrt(),
        predicted: predict_cost(cell.structure, cell.method, cell.n),
        table_ms: snap.table_build_ns as f64 / 1e6,
        sample_ms,
        stage1_component_draws: snap.stage1_component_draws,
        exhausted,
    })
}

/// Runs every cell, cell `j` on stream `j` of `config.seed`, and returns the
/// reports in grid order. Budget exhaustion is recorded in the report;
/// other errors abort.
pub fn run_benchmark(grid: &[BenchCell], config: &BenchConfig) -> Result<Vec<CostReport>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<CostReport>>>> = Mutex::new((0..grid.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..config.workers.clamp(1, grid.len().max(1)) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = grid.get(j) else { break };
                let report = run_cell(cell, config, j as u64);
                results.lock().expect("result lock poisoned")[j] = Some(report);
            });
        }
    });
    results
        .into_inner()
        .expect("result lock poisoned")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// Least-squares slope of `ys` against `xs` and its standard error.
pub fn slope_with_stderr(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let se = if xs.len() > 2 {
        (resid / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn partition_predictions() {
        // (96·10^6)^(1/4)
        let hard = predict_cost(Structure::Partitions, Method::Hard, 100).unwrap();
        assert_relative_eq!(hard, 98.984_640, max_relative = 1e-6);
        let dsh = predict_cost(Structure::Partitions, Method::Dsh, 100).unwrap();
        assert_relative_eq!(dsh, hard * PI / 600f64.sqrt(), max_relative = 1e-12);
        assert!((dsh - 12.7).abs() < 0.1);
    }

    #[test]
    fn missing_predictions() {
        assert!(predict_cost(Structure::Partitions, Method::PdcRecursive, 100).is_none());
        assert!(predict_cost(Structure::Assembly, Method::Hard, 100).is_none());
        assert!(predict_cost(Structure::SetPartitions, Method::Hard, 100).is_some());
    }

    #[test]
    fn grid_lines() {
        let c = BenchCell::parse_csv("partitions,pdc-recursive,100,prefix:10").unwrap();
        assert_eq!(c.policy, Some(IndexPolicy::Prefix(10)));
        let c = BenchCell::parse_csv("set-partitions, hard, 50").unwrap();
        assert_eq!(c.structure, Structure::SetPartitions);
        assert!(c.policy.is_none());
        assert!(BenchCell::parse_csv("partitions,hard").is_err());
        assert!(BenchCell::parse_csv("trees,hard,5").is_err());
    }

    #[test]
    fn same_seed_same_report() {
        let grid = [
            BenchCell::new(Structure::Partitions, Method::Dsh, 60, None),
            BenchCell::new(Structure::DistinctPartitions, Method::Hard, 40, None),
        ];
        let config = BenchConfig::new(200, 11);
        let a = run_benchmark(&grid, &config).unwrap();
        let b = run_benchmark(&grid, &config).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean_attempts, y.mean_attempts);
            assert_eq!(x.samples, 200);
            assert!(x.mean_attempts >= 1.0);
        }
    }

    #[test]
    fn exhaustion_is_recorded() {
        let grid = [BenchCell::new(Structure::Partitions, Method::Hard, 400, None)];
        let mut config = BenchConfig::new(50, 3);
        config.attempt_cap = 2;
        let r = &run_benchmark(&grid, &config).unwrap()[0];
        assert!(r.exhausted);
        assert!(r.samples < 50);
    }

    #[test]
    fn csv_row_shape() {
        let grid = [BenchCell::new(Structure::Partitions, Method::Euler, 30, None)];
        let r = &run_benchmark(&grid, &BenchConfig::new(10, 1)).unwrap()[0];
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("partitions,euler,30,none,10,1.0000,"));
    }

    #[test]
    fn slope_of_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (s, se) = slope_with_stderr(&xs, &ys);
        assert_relative_eq!(s, 2.0);
        assert!(se.abs() < 1e-12);
    }
}
