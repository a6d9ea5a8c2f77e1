//! Plain-text triplet dumps of symmetric operators.
//!
//! ```text
//! # qcoll-triplets 1
//! dimension 21904
//! nnz 98568
//! meta {"form":"planar-2var",...}
//! 0 0 1.2345678901234567e1
//! ...
//! ```
//!
//! The body lists the upper triangle only (`row <= col`), one entry per
//! line, zero-based.

use std::io::{BufRead, Write};

use super::{CsrMatrix, OperatorMeta, SparseOperator};
use crate::error::{Error, Result};

const MAGIC: &str = "# qcoll-triplets 1";

pub fn write_triplets(op: &SparseOperator, mut out: impl Write) -> Result<()> {
    let triplets: Vec<_> = op.matrix.upper_triplets().collect();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "dimension {}", op.dimension())?;
    writeln!(out, "nnz {}", triplets.len())?;
    let meta = serde_json::to_string(&op.meta).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(out, "meta {meta}")?;
    for (i, j, v) in triplets {
        writeln!(out, "{i} {j} {v:.16e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TripletFile {
    pub matrix: CsrMatrix,
    pub meta: OperatorMeta,
}

fn bad(line: usize, what: &str) -> Error {
    Error::Config(format!("triplet file line {line}: {what}"))
}

pub fn read_triplets(input: impl BufRead) -> Result<TripletFile> {
    let mut lines = input.lines().enumerate();
    let mut header = |key: &str| -> Result<String> {
        let (no, line) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
        let line = line?;
        line.strip_prefix(key).map(|s| s.trim().to_owned()).ok_or_else(|| bad(no + 1, &format!("expected `{key}`")))
    };
    if !header(MAGIC)?.is_empty() {
        return Err(bad(1, "bad magic"));
    }
    let n: usize = header("dimension")?.parse().map_err(|_| bad(2, "bad dimension"))?;
    let nnz: usize = header("nnz")?.parse().map_err(|_| bad(3, "bad nnz"))?;
    let meta: OperatorMeta = serde_json::from_str(&header("meta")?).map_err(|e| bad(4, &e.to_string()))?;
    let mut rows = vec![Vec::new(); n];
    let mut count = 0;
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut field = || it.next().ok_or_else(|| bad(no + 1, "missing field"));
        let i: usize = field()?.parse().map_err(|_| bad(no + 1, "bad row"))?;
        let j: usize = field()?.parse().map_err(|_| bad(no + 1, "bad column"))?;
        let v: f64 = field()?.parse().map_err(|_| bad(no + 1, "bad value"))?;
        if i > j || j >= n {
            return Err(bad(no + 1, "entry outside the upper triangle"));
        }
        rows[i].push((j, v));
        count += 1;
    }
    if count != nnz {
        return Err(Error::DimensionMismatch { expected: nnz, got: count });
    }
    Ok(TripletFile { matrix: CsrMatrix::from_upper_rows(rows), meta })
}
