//! Plain-text table dumps.
//!
//! The first line is the header `kind n k I` (`-` where a field does not
//! apply). Bounded tables then list one row per bound `κ = 1..k` holding the
//! entries for weights `1..n`; every other kind has a single row of counts
//! for weights `0..n`. Entries are decimal integers separated by one space.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use super::{build_bell, build_distinct_table, build_partition_table, build_restricted_table, CountTable, TableKind};
use crate::structures::{IndexSet, StructureSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDump {
    pub kind: TableKind,
    pub n: usize,
    pub k: Option<usize>,
    pub index_set: Option<IndexSet>,
    pub rows: Vec<Vec<BigUint>>,
}

impl CountTable {
    pub fn to_dump(&self) -> TableDump {
        let n = self.max_weight();
        if self.kind().is_bounded() {
            let k = self.bound();
            TableDump {
                kind: self.kind(),
                n,
                k: Some(k),
                index_set: None,
                rows: (1..=k).map(|c| self.column(c)[1..].to_vec()).collect(),
            }
        } else {
            TableDump {
                kind: self.kind(),
                n,
                k: None,
                index_set: (self.kind() != TableKind::Bell).then(|| self.index_set().clone()),
                rows: vec![self.totals().to_vec()],
            }
        }
    }
}

impl TableDump {
    /// Rebuilds the table the header describes, with unit multiplicities and
    /// identity weights.
    pub fn rebuild(&self) -> Result<CountTable> {
        let n = self.n;
        let missing = |what: &str| Error::Parse(format!("{} dump needs {what}", self.kind));
        match self.kind {
            TableKind::PartitionBounded => build_partition_table(n, self.k.ok_or_else(|| missing("k"))?),
            TableKind::DistinctBounded => build_distinct_table(n, self.k.ok_or_else(|| missing("k"))?),
            TableKind::Bell => Ok(build_bell(n)),
            kind => {
                let set = self.index_set.as_ref().ok_or_else(|| missing("an index set"))?;
                let spec_n = set.max().unwrap_or(1).max(n);
                let class = kind.class();
                let spec = StructureSpec::new(class, spec_n, StructureSpec::default_tilt(class, spec_n))?;
                build_restricted_table(&spec, set, n)
            }
        }
    }

    /// Compares every entry with a fresh build.
    pub fn check(&self) -> Result<()> {
        let fresh = self.rebuild()?.to_dump();
        if fresh.rows.len() != self.rows.len() {
            return Err(Error::InconsistentTable(format!(
                "expected {} rows, found {}",
                fresh.rows.len(),
                self.rows.len()
            )));
        }
        for (r, (want, got)) in fresh.rows.iter().zip(&self.rows).enumerate() {
            if want.len() != got.len() {
                return Err(Error::InconsistentTable(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    got.len(),
                    want.len()
                )));
            }
            if let Some(c) = want.iter().zip(got).position(|(a, b)| a != b) {
                return Err(Error::InconsistentTable(format!(
                    "row {} entry {}: expected {}, found {}",
                    r + 1,
                    c + 1,
                    want[c],
                    got[c]
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TableDump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.k.map_or("-".to_string(), |k| k.to_string());
        let set = self.index_set.as_ref().map_or("-".to_string(), |s| s.to_string());
        writeln!(f, "{} {} {} {}", self.kind, self.n, k, set)?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for TableDump {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty table dump".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("bad table header `{header}`")));
        }
        let kind: TableKind = fields[0].parse()?;
        let n: usize = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad n in header `{header}`")))?;
        let k = match fields[2] {
            "-" => None,
            v => Some(v.parse().map_err(|_| Error::Parse(format!("bad k in header `{header}`")))?),
        };
        let index_set = match fields[3] {
            "-" => None,
            v => Some(v.parse()?),
        };
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(' ')
                    .map(|cell| {
                        cell.parse::<BigUint>()
                            .map_err(|_| Error::Parse(format!("bad table entry `{cell}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TableDump {
            kind,
            n,
            k,
            index_set,
            rows,
        })
    }
}
