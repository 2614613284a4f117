//! Table construction overlapped with stage one.
//!
//! Stage one does not need the table, so its draws start immediately and
//! are buffered while another thread builds the table. Stage one and the
//! second half read separate generators and buffered draws are consumed in
//! order, so the result does not depend on thread timing: it equals running
//! [`PdcRecursive::sample_split`] with the same two generators.

use std::sync::Arc;
use std::thread;

use rand::Rng;

use super::engines::{table_for, PdcRecursive};
use super::Outcome;
use crate::random::Mode;
use crate::structures::{IndexSet, Stage1Sampler, Stage1Strategy, StructureSpec};
use crate::{Error, Result};

/// Stage-one draws kept while waiting for the table.
const MAX_BUFFERED: usize = 1 << 16;

#[derive(Debug)]
pub struct OverlappedRun {
    pub outcomes: Vec<Outcome>,
    /// Stage-one draws taken before the table was ready.
    pub buffered_draws: usize,
    pub engine: PdcRecursive,
}

/// Draws `count` samples while the table for `I` is built concurrently.
pub fn pdc_recursive_overlapped<R1, R2>(
    spec: &StructureSpec,
    index_set: &IndexSet,
    mode: Mode,
    count: usize,
    stage1_rng: &mut R1,
    second_rng: &mut R2,
) -> Result<OverlappedRun>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let n = spec.n() as u64;
    let stage1 = Stage1Sampler::new(spec, index_set, Stage1Strategy::default())?;
    let (table, buffer) = thread::scope(|scope| {
        let builder = scope.spawn(|| table_for(spec, index_set));
        let mut buffer = Vec::new();
        while !builder.is_finished() && buffer.len() < MAX_BUFFERED {
            buffer.push(stage1.draw(mode, Some(n), stage1_rng));
        }
        let table = builder.join().expect("table builder panicked");
        (table, buffer)
    });
    let engine = PdcRecursive::with_table(spec, index_set, Arc::new(table?), mode)?;
    for draw in &buffer {
        engine.stats().record_attempt(draw.component_draws);
    }
    let buffered_draws = buffer.len();
    let mut queue = buffer.into_iter();
    let mut outcomes = Vec::with_capacity(count);
    let mut attempts = 0u64;
    while outcomes.len() < count {
        let draw = match queue.next() {
            Some(d) => d,
            None => engine.draw(stage1_rng),
        };
        attempts += 1;
        if let Some(vector) = engine.complete(&draw, second_rng)? {
            engine.stats().record_acceptance(0);
            outcomes.push(Outcome { vector, attempts });
            attempts = 0;
        } else if attempts >= engine.cap() {
            return Err(Error::BudgetExhausted { attempts });
        }
    }
    debug_assert_eq!(engine.mode(), mode);
    Ok(OverlappedRun {
        outcomes,
        buffered_draws,
        engine,
    })
}
