//! One sampled object as a JSONL, CSV or text record.

use pdc_core::{Class, ComponentVector, StructureSpec};
use serde_json::{json, Value};

use crate::{CliError, CliResult, Failure};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRecord {
    /// Position in the draw order; object `index` used stream `index` of `seed`.
    pub index: u64,
    pub structure: String,
    pub n: usize,
    /// Nonzero `(i, z_i)` pairs.
    pub counts: Vec<(usize, u64)>,
    /// Descending parts, for unlabelled families with identity weights.
    pub parts: Option<Vec<usize>>,
    /// Labelled blocks, for assemblies with unit multiplicities.
    pub blocks: Option<Vec<Vec<usize>>>,
    pub attempts: u64,
    pub seed: u64,
}

impl SampleRecord {
    pub fn new(
        index: u64,
        spec: &StructureSpec,
        structure: &str,
        vector: &ComponentVector,
        blocks: Option<Vec<Vec<usize>>>,
        attempts: u64,
        seed: u64,
    ) -> Self {
        let parts = (spec.class() != Class::Assembly && spec.has_identity_weights()).then(|| vector.parts());
        SampleRecord {
            index,
            structure: structure.to_string(),
            n: spec.n(),
            counts: vector.sparse(),
            parts,
            blocks,
            attempts,
            seed,
        }
    }

    pub fn vector(&self) -> CliResult<ComponentVector> {
        ComponentVector::from_sparse(self.n, &self.counts).map_err(|e| CliError::new(Failure::ExactMismatch, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut v = json!({
            "index": self.index,
            "structure": self.structure,
            "n": self.n,
            "counts": self.counts,
            "attempts": self.attempts,
            "seed": self.seed,
        });
        if let Some(p) = &self.parts {
            v["parts"] = json!(p);
        }
        if let Some(b) = &self.blocks {
            v["blocks"] = json!(b);
        }
        v.to_string()
    }

    pub fn from_json(line: &str) -> CliResult<Self> {
        let bad = |what: &str| CliError::new(Failure::Config, format!("bad record ({what}): {line}"));
        let v: Value = serde_json::from_str(line).map_err(|e| bad(&e.to_string()))?;
        let uint = |key: &str| v.get(key).and_then(Value::as_u64);
        let list = |x: &Value| -> Option<Vec<usize>> {
            x.as_array()?.iter().map(|e| e.as_u64().map(|u| u as usize)).collect()
        };
        let counts = v
            .get("counts")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("counts"))?
            .iter()
            .map(|pair| match pair.as_array().map(Vec::as_slice) {
                Some([i, z]) => Some((i.as_u64()? as usize, z.as_u64()?)),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("counts"))?;
        let blocks = match v.get("blocks") {
            None => None,
            Some(b) => Some(
                b.as_array()
                    .ok_or_else(|| bad("blocks"))?
                    .iter()
                    .map(list)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| bad("blocks"))?,
            ),
        };
        let parts = match v.get("parts") {
            None => None,
            Some(p) => Some(list(p).ok_or_else(|| bad("parts"))?),
        };
        Ok(SampleRecord {
            index: uint("index").unwrap_or(0),
            structure: v.get("structure").and_then(Value::as_str).unwrap_or("").to_string(),
            n: uint("n").ok_or_else(|| bad("n"))? as usize,
            counts,
            parts,
            blocks,
            attempts: uint("attempts").ok_or_else(|| bad("attempts"))?,
            seed: uint("seed").ok_or_else(|| bad("seed"))?,
        })
    }

    pub const CSV_HEADER: &'static str = "index,structure,n,attempts,seed,counts,object";

    pub fn to_csv(&self) -> String {
        let counts: Vec<String> = self.counts.iter().map(|(i, z)| format!("{i}:{z}")).collect();
        format!(
            "{},{},{},{},{},{},{}",
            self.index,
            self.structure,
            self.n,
            self.attempts,
            self.seed,
            counts.join(";"),
            self.object_text()
        )
    }

    /// Parts separated by spaces, or blocks as `{1 3} {2}`.
    pub fn object_text(&self) -> String {
        if let Some(b) = &self.blocks {
            b.iter().map(|blk| format!("{{{}}}", join(blk))).collect::<Vec<_>>().join(" ")
        } else if let Some(p) = &self.parts {
            join(p)
        } else {
            self.counts.iter().map(|(i, z)| format!("{i}^{z}")).collect::<Vec<_>>().join(" ")
        }
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use pdc_core::Structure;

    #[test]
    fn json_round_trip() {
        let spec = Structure::SetPartitions.spec(4).unwrap();
        let v = ComponentVector::from_parts(4, &[3, 1]).unwrap();
        let r = SampleRecord::new(2, &spec, "set-partitions", &v, Some(vec![vec![1, 2, 4], vec![3]]), 5, 9);
        let line = r.to_json();
        assert!(line.contains("\"blocks\":[[1,2,4],[3]]"));
        assert!(!line.contains("parts"));
        assert_eq!(SampleRecord::from_json(&line).unwrap(), r);
        assert_eq!(r.object_text(), "{1 2 4} {3}");
    }

    #[test]
    fn partition_record() {
        let spec = Structure::Partitions.spec(10).unwrap();
        let v = ComponentVector::from_parts(10, &[5, 3, 1, 1]).unwrap();
        let r = SampleRecord::new(0, &spec, "partitions", &v, None, 1, 7);
        assert_eq!(r.counts, vec![(1, 2), (3, 1), (5, 1)]);
        assert_eq!(r.to_csv(), "0,partitions,10,1,7,1:2;3:1;5:1,5 3 1 1");
        assert_eq!(SampleRecord::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn malformed_lines() {
        assert!(SampleRecord::from_json("{}").is_err());
        assert!(SampleRecord::from_json("not json").is_err());
        assert!(SampleRecord::from_json(r#"{"n":3,"counts":[[1]],"attempts":1,"seed":0}"#).is_err());
    }
}
