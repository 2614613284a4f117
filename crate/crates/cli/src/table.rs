//! `pdcsample table`.

use std::io::Write;

use pdc_core::pdc::choose_index_set;
use pdc_core::tables::{build_bell, build_distinct_table, build_partition_table, build_restricted_table};
use pdc_core::{CountTable, IndexPolicy, Structure};

use crate::{open_output, CliError, CliResult, Failure, TableArgs};

/// The table `args` describes: bounded tables for (distinct) partitions
/// with `--k`, Bell numbers for set partitions without a policy, a
/// restricted table otherwise.
pub fn build(args: &TableArgs) -> CliResult<CountTable> {
    let n = args.n;
    Ok(match (args.structure, args.k, args.policy) {
        (Structure::Partitions, Some(k), None) => build_partition_table(n, k)?,
        (Structure::DistinctPartitions, Some(k), None) => build_distinct_table(n, k)?,
        (_, Some(_), _) => {
            return Err(CliError::new(
                Failure::Config,
                "--k applies to partitions and distinct-partitions without --policy",
            ))
        }
        (Structure::SetPartitions, None, None) => build_bell(n),
        (structure, None, policy) => {
            let spec = structure.spec(n)?;
            let set = choose_index_set(&spec, policy.unwrap_or(IndexPolicy::Prefix(n)))?;
            build_restricted_table(&spec, &set, n)?
        }
    })
}

pub fn run(args: &TableArgs) -> CliResult<()> {
    let table = build(args)?;
    let mut out = open_output(args.output.as_ref())?;
    write!(out, "{}", table.to_dump())?;
    out.flush()?;
    Ok(())
}
