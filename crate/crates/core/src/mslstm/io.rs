//! Binary model files: `MSL1`, five little-endian u32 fields, then f64 parameter blocks.

use std::io::{Read, Write};
use std::path::Path;

use super::{Hyper, LstmLayerParams, MsLstmModel, GATES};
use crate::dataset::write_atomic;
use crate::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"MSL1";

pub fn write_model<W: Write>(model: &MsLstmModel, mut out: W) -> std::io::Result<()> {
    out.write_all(MODEL_MAGIC)?;
    let h = model.hyper;
    for v in [
        h.layers as u32,
        h.scales as u32,
        h.hidden as u32,
        model.input_dim() as u32,
        h.margin,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    for block in model.param_blocks() {
        for v in block {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_model<R: Read>(mut input: R) -> Result<MsLstmModel> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::InvalidModel(e.to_string()))?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<MsLstmModel> {
    if bytes.len() < 24 || &bytes[..4] != MODEL_MAGIC {
        return Err(Error::InvalidModel("missing MSL1 header".into()));
    }
    let field = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let hyper = Hyper {
        layers: field(0) as usize,
        scales: field(1) as usize,
        hidden: field(2) as usize,
        margin: field(4),
    };
    let input_dim = field(3) as usize;
    hyper.validate().map_err(|e| Error::InvalidModel(e.to_string()))?;
    if input_dim == 0 {
        return Err(Error::InvalidModel("input dimension is zero".into()));
    }
    let hd = hyper.hidden;
    let g = GATES * hd;
    let mut expected = 0usize;
    for l in 0..hyper.layers {
        let in_dim = if l == 0 { input_dim } else { hd };
        expected += in_dim * g + hd * g + g;
    }
    expected += 2 * hyper.feature_dim();
    let body = &bytes[24..];
    if body.len() != expected * 8 {
        return Err(Error::InvalidModel(format!(
            "expected {} parameter bytes, found {}",
            expected * 8,
            body.len()
        )));
    }
    let mut values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |n: usize| values.by_ref().take(n).collect::<Vec<f64>>();
    let mut layers = Vec::with_capacity(hyper.layers);
    for l in 0..hyper.layers {
        let in_dim = if l == 0 { input_dim } else { hd };
        let w = take(in_dim * g);
        let u = take(hd * g);
        let b = take(g);
        layers.push(
            LstmLayerParams::from_parts(in_dim, hd, w, u, b)
                .map_err(|e| Error::InvalidModel(e.to_string()))?,
        );
    }
    let head = [take(hyper.feature_dim()), take(hyper.feature_dim())];
    let model = MsLstmModel {
        hyper,
        layers,
        head,
    };
    model
        .validate()
        .map_err(|e| Error::InvalidModel(e.to_string()))?;
    Ok(model)
}

pub fn save_model(model: &MsLstmModel, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    write_model(model, &mut bytes).map_err(|e| Error::io(path, e))?;
    write_atomic(path, &bytes)
}

pub fn load_model(path: &Path) -> Result<MsLstmModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
