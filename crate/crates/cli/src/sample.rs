//! `pdcsample sample`.
//!
//! Object `j` is drawn from stream `j` of the root seed, so the set of
//! records does not depend on the number of workers; `--ordered` also fixes
//! their order.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use pdc_core::tables::realize_set_partition;
use pdc_core::{rng_for_stream, Class, Sampler, StructureSpec};

use crate::record::SampleRecord;
use crate::{open_output, seed_or_entropy, CliError, CliResult, Format, SampleArgs};

/// Draws object `index` of `seed`.
pub fn draw_record(
    sampler: &Sampler,
    spec: &StructureSpec,
    structure: &str,
    seed: u64,
    index: u64,
) -> pdc_core::Result<SampleRecord> {
    let mut rng = rng_for_stream(seed, index);
    let out = sampler.sample(&mut rng)?;
    let blocks = if spec.class() == Class::Assembly && spec.has_unit_multiplicities() && spec.has_identity_weights() {
        Some(realize_set_partition(&out.vector, spec.n(), &mut rng)?)
    } else {
        None
    };
    Ok(SampleRecord::new(index, spec, structure, &out.vector, blocks, out.attempts, seed))
}

fn format_record(r: &SampleRecord, format: Format) -> String {
    match format {
        Format::Jsonl => r.to_json(),
        Format::Csv => r.to_csv(),
        Format::Text => r.object_text(),
    }
}

pub fn run(args: &SampleArgs) -> CliResult<()> {
    let spec = args.spec.spec()?;
    let mut sampler = Sampler::build(&spec, args.method, args.policy, args.mode)?;
    if let Some(cap) = args.attempt_cap {
        sampler = sampler.with_attempt_cap(cap);
    }
    let seed = seed_or_entropy(args.seed);
    let structure = args.spec.structure.to_string();
    let mut out = open_output(args.output.as_ref())?;
    if args.format == Format::Csv {
        writeln!(out, "{}", SampleRecord::CSV_HEADER)?;
    }
    let workers = args.workers.clamp(1, args.count.max(1));
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, pdc_core::Result<SampleRecord>)>();
    let result: CliResult<()> = thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (sampler, spec, structure, next, stop) = (&sampler, &spec, &structure, &next, &stop);
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let j = next.fetch_add(1, Ordering::Relaxed);
                if j >= args.count {
                    break;
                }
                let r = draw_record(sampler, spec, structure, seed, j as u64);
                if tx.send((j, r)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut emit_next = 0;
        for (j, r) in rx {
            let record = match r {
                Ok(rec) => rec,
                Err(e) => {
                    stop.store(true, Ordering::Relaxed);
                    return Err(CliError::from(e));
                }
            };
            if args.ordered {
                pending.insert(j, record);
                while let Some(rec) = pending.remove(&emit_next) {
                    writeln!(out, "{}", format_record(&rec, args.format))?;
                    emit_next += 1;
                }
            } else {
                writeln!(out, "{}", format_record(&record, args.format))?;
            }
        }
        Ok(())
    });
    out.flush()?;
    result
}
