//! Uniform local binary patterns over the 8-neighborhood at radius 1.
//!
//! Neighbor `p` sets bit `p` when its intensity is `>=` the center. Patterns
//! with at most two circular 0/1 transitions are uniform (58 of the 256) and
//! get their own bin in ascending code order; everything else lands in the
//! last bin.

use crate::dataset::GrayFrame;
use crate::error::{Error, Result};

pub const LBP_BINS: usize = 59;

// (dx, dy) of neighbor p, walking counter-clockwise from the right.
const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

const fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_left(1)).count_ones()
}

pub const fn is_uniform(code: u8) -> bool {
    transitions(code) <= 2
}

const fn build_bins() -> [u8; 256] {
    let mut table = [58u8; 256];
    let mut next = 0u8;
    let mut code = 0usize;
    while code < 256 {
        if is_uniform(code as u8) {
            table[code] = next;
            next += 1;
        }
        code += 1;
    }
    table
}

static BIN_OF: [u8; 256] = build_bins();

pub fn uniform_bin(code: u8) -> usize {
    BIN_OF[code as usize] as usize
}

/// LBP code of an interior pixel.
#[inline]
pub fn lbp_code(patch: &GrayFrame, x: usize, y: usize) -> u8 {
    let c = patch.get(x, y);
    let mut code = 0u8;
    for (p, &(dx, dy)) in NEIGHBORS.iter().enumerate() {
        let n = patch.get((x as i64 + dx) as usize, (y as i64 + dy) as usize);
        if n >= c {
            code |= 1 << p;
        }
    }
    code
}

/// L1-normalized 59-bin uniform LBP histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct LbpHistogram([f64; LBP_BINS]);

impl LbpHistogram {
    pub fn from_bins(bins: [f64; LBP_BINS]) -> Result<Self> {
        if bins.iter().any(|&b| !(b >= 0.0)) {
            return Err(Error::invalid("histogram bins must be non-negative"));
        }
        let sum: f64 = bins.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("histogram sums to {sum}, expected 1")));
        }
        Ok(Self(bins))
    }

    pub fn bins(&self) -> &[f64; LBP_BINS] {
        &self.0
    }
}

pub fn uniform_lbp(patch: &GrayFrame) -> Result<LbpHistogram> {
    let (w, h) = (patch.width(), patch.height());
    if w < 3 || h < 3 {
        return Err(Error::invalid(format!("LBP needs at least 3x3, got {w}x{h}")));
    }
    let mut counts = [0u32; LBP_BINS];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            counts[uniform_bin(lbp_code(patch, x, y))] += 1;
        }
    }
    let total = ((w - 2) * (h - 2)) as f64;
    let mut bins = [0.0; LBP_BINS];
    for (b, &c) in bins.iter_mut().zip(&counts) {
        *b = c as f64 / total;
    }
    Ok(LbpHistogram(bins))
}
