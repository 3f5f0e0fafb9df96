//! Recall, precision, F1, localization failure rate, normalized localization error and
//! temporal average precision, plus report emission.

mod ap;
mod report;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use ap::{average_precision, average_precision_grouped, pr_curve, ApResult, PrPoint, ScoredInterval};
pub use report::{
    emit_report, read_report_json, write_pr_curve, EvalReport, EyeMetrics, RunMeta, PR_CURVE_HEADER,
    REPORT_VERSION,
};

/// Largest normalized error still counted as a correct localization.
pub const ME_THRESHOLD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Recall, precision and F1, each 0 when its denominator is 0.
pub fn prf(c: ConfusionCounts) -> Prf {
    let recall = ratio(c.tp, c.tp + c.fn_);
    let precision = ratio(c.tp, c.tp + c.fp);
    let f1 = if recall > 0.0 && precision > 0.0 {
        2.0 / (1.0 / recall + 1.0 / precision)
    } else {
        0.0
    };
    Prf {
        recall,
        precision,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocalizationTally {
    pub n_miss: u64,
    pub n_err: u64,
    pub n_all: u64,
}

/// `(n_miss + n_err) / n_all`.
pub fn fr(t: LocalizationTally) -> Result<f64> {
    if t.n_all == 0 {
        return Err(Error::invalid("failure rate needs at least one sample"));
    }
    if t.n_miss + t.n_err > t.n_all {
        return Err(Error::invalid(format!(
            "{} missed plus {} wrong exceeds {} samples",
            t.n_miss, t.n_err, t.n_all
        )));
    }
    Ok((t.n_miss + t.n_err) as f64 / t.n_all as f64)
}

fn manhattan(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

/// Manhattan distance from `detected` to `gt`, normalized by the inter-ocular Manhattan
/// distance.
pub fn me(detected: (f64, f64), gt: (f64, f64), gt_left: (f64, f64), gt_right: (f64, f64)) -> Result<f64> {
    let d = manhattan(gt_left, gt_right);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::DegenerateGeometry(
            "inter-ocular distance is zero".into(),
        ));
    }
    Ok(manhattan(detected, gt) / d)
}

pub fn me_correct(value: f64) -> bool {
    value <= ME_THRESHOLD
}
