use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fr, prf, ApResult, ConfusionCounts, LocalizationTally, PrPoint};
use crate::dataset::write_atomic;
use crate::{Error, Result};

pub const REPORT_VERSION: u32 = 1;
pub const PR_CURVE_HEADER: &str = "threshold,precision,recall";
const CSV_HEADER: &str = "eye,tp,fp,fn,recall,precision,f1,fr,n_miss,n_err,n_all";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeMetrics {
    pub eye: String,
    pub counts: ConfusionCounts,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub fr: Option<f64>,
    pub localization: Option<LocalizationTally>,
    /// A recall or precision denominator was zero and the metric was reported as 0.
    pub zero_denominator: bool,
}

impl EyeMetrics {
    pub fn new(eye: impl Into<String>, counts: ConfusionCounts, tally: Option<LocalizationTally>) -> Result<Self> {
        let p = prf(counts);
        let fr = match tally {
            Some(t) => Some(fr(t)?),
            None => None,
        };
        Ok(Self {
            eye: eye.into(),
            counts,
            recall: p.recall,
            precision: p.precision,
            f1: p.f1,
            fr,
            localization: tally,
            zero_denominator: counts.tp + counts.fn_ == 0 || counts.tp + counts.fp == 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    /// Wall-clock duration; the only field that varies between identical runs.
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub per_eye: Vec<EyeMetrics>,
    pub ap: Option<ApResult>,
    pub meta: RunMeta,
}

impl EvalReport {
    pub fn new(per_eye: Vec<EyeMetrics>, ap: Option<ApResult>, meta: RunMeta) -> Self {
        Self {
            version: REPORT_VERSION,
            per_eye,
            ap,
            meta,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let optu = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        for m in &self.per_eye {
            let t = m.localization;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                m.eye,
                m.counts.tp,
                m.counts.fp,
                m.counts.fn_,
                m.recall,
                m.precision,
                m.f1,
                opt(m.fr),
                optu(t.map(|t| t.n_miss)),
                optu(t.map(|t| t.n_err)),
                optu(t.map(|t| t.n_all)),
            );
        }
        out
    }
}

/// Writes `<stem>.json` and `<stem>.csv`; returns both paths.
pub fn emit_report(report: &EvalReport, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let json = stem.with_extension("json");
    let csv = stem.with_extension("csv");
    write_atomic(&json, report.to_json().as_bytes())?;
    write_atomic(&csv, report.to_csv().as_bytes())?;
    Ok((json, csv))
}

pub fn read_report_json(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_pr_curve(path: &Path, points: &[PrPoint]) -> Result<()> {
    let mut out = String::from(PR_CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.precision, p.recall);
    }
    write_atomic(path, out.as_bytes())
}
