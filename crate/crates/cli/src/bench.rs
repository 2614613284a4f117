//! `pdcsample bench`.

use std::fs;
use std::io::Write;

use pdc_core::cost::{run_benchmark, BenchCell, BenchConfig, CSV_HEADER};

use crate::{open_output, seed_or_entropy, BenchArgs, CliError, CliResult, Failure};

/// Grid lines: blank lines, `#` comments and a header starting with
/// `structure` are skipped.
pub fn parse_grid(text: &str) -> CliResult<Vec<BenchCell>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("structure"))
        .map(|l| BenchCell::parse_csv(l).map_err(CliError::from))
        .collect()
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let mut grid = match &args.grid {
        Some(path) => parse_grid(&fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    for c in &args.cell {
        grid.push(BenchCell::parse_csv(c)?);
    }
    if grid.is_empty() {
        return Err(CliError::new(Failure::Config, "no cells: pass --grid or --cell"));
    }
    let seed = seed_or_entropy(args.seed);
    let mut config = BenchConfig::new(args.samples, seed);
    if let Some(w) = args.workers {
        config.workers = w.max(1);
    }
    if let Some(cap) = args.attempt_cap {
        config.attempt_cap = cap;
    }
    let reports = run_benchmark(&grid, &config)?;
    let mut out = open_output(args.output.as_ref())?;
    writeln!(out, "{CSV_HEADER}")?;
    for r in &reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()?;
    eprintln!("seed {seed}");
    for r in reports.iter().filter(|r| r.exhausted) {
        eprintln!(
            "budget exhausted: {},{},{} after {} samples",
            r.cell.structure, r.cell.method, r.cell.n, r.samples
        );
    }
    Ok(())
}
