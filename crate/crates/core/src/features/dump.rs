//! Feature dump: little-endian `u32 step_count, u32 dim`, then row-major
//! `f32` values.

use std::fs;
use std::path::Path;

use super::{FeatureSequence, StepFeature, STEP_DIM};
use crate::error::{Error, Result};

pub fn write_feature_dump(path: &Path, seq: &FeatureSequence) -> Result<()> {
    let mut buf = Vec::with_capacity(8 + seq.len() * STEP_DIM * 4);
    buf.extend((seq.len() as u32).to_le_bytes());
    buf.extend((STEP_DIM as u32).to_le_bytes());
    for row in seq.rows() {
        for v in row {
            buf.extend((v as f32).to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_feature_dump(path: &Path) -> Result<FeatureSequence> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg,
    };
    if bytes.len() < 8 {
        return Err(bad("truncated header".into()));
    }
    let steps = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if dim != STEP_DIM {
        return Err(bad(format!("dimension {dim}, expected {STEP_DIM}")));
    }
    if bytes.len() != 8 + steps * dim * 4 {
        return Err(bad(format!(
            "payload is {} bytes, expected {}",
            bytes.len() - 8,
            steps * dim * 4
        )));
    }
    let vals: Vec<f64> = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let steps = vals
        .chunks_exact(dim)
        .map(StepFeature::from_concat)
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureSequence { steps })
}

/// CSV equivalent of the binary dump: one step per row, columns `a0..a58,m0..m58`.
pub fn write_feature_csv(path: &Path, seq: &FeatureSequence) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (0..STEP_DIM / 2)
        .map(|i| format!("a{i}"))
        .chain((0..STEP_DIM / 2).map(|i| format!("m{i}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in seq.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{}", *v as f32)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
