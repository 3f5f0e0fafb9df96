use std::collections::VecDeque;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{Eye, GrayFrame};
use crate::features::{eye_histogram, EyeBox, FeatureSequence, LbpHistogram, DEFAULT_PATCH};
use crate::mslstm::MsLstmModel;
use crate::pipeline::{box_of, seed_track, EyeLocator, TrackParams};
use crate::tracker::{kcf_update, KcfState};
use crate::{Error, Result};

/// Latency summary of one stage in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
}

impl StageStats {
    /// Summary of `samples` (milliseconds). The 95th percentile uses the nearest-rank rule.
    pub fn of(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("no timing samples"));
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Ok(Self {
            mean_ms: s.iter().sum::<f64>() / n as f64,
            median_ms: median,
            p95_ms: s[rank - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Frames timed after warm-up.
    pub frames: usize,
    pub warmup: usize,
    pub tracking: StageStats,
    pub features: StageStats,
    pub inference: StageStats,
    /// Sum of the three stages per frame.
    pub total: StageStats,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut out = format!("{:<10} {:>10} {:>10} {:>10}\n", "stage", "mean_ms", "median_ms", "p95_ms");
        for (name, s) in [
            ("tracking", self.tracking),
            ("features", self.features),
            ("inference", self.inference),
            ("total", self.total),
        ] {
            let _ = writeln!(out, "{name:<10} {:>10.4} {:>10.4} {:>10.4}", s.mean_ms, s.median_ms, s.p95_ms);
        }
        let _ = writeln!(out, "frames {} (after {} warm-up)", self.frames, self.warmup);
        out
    }
}

struct EyeState {
    eye: Eye,
    kcf: KcfState,
    current: EyeBox,
    hists: VecDeque<LbpHistogram>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Times the per-frame work of streaming detection on both eyes: tracker update with
/// re-localization, appearance histogram, and classification of the window ending at the frame.
/// The first `warmup` frames are processed but not timed.
pub fn bench_stream(
    frames: &[GrayFrame],
    locator: &dyn EyeLocator,
    model: &MsLstmModel,
    track: &TrackParams,
    window: usize,
    warmup: usize,
) -> Result<BenchReport> {
    if window < 2 {
        return Err(Error::invalid("window must be at least 2"));
    }
    if warmup + 1 < window || frames.len() <= warmup {
        return Err(Error::invalid(format!(
            "{} frames with {warmup} warm-up frames leave nothing to time with a {window}-frame window",
            frames.len()
        )));
    }
    let first = locator.locate(&frames[0], 0);
    let mut eyes = Eye::BOTH
        .into_iter()
        .map(|eye| {
            let (current, kcf) = seed_track(&frames[0], first, eye, track)
                .ok_or_else(|| Error::TrackLost(format!("no {} eye on the first frame", eye.as_str())))?;
            Ok(EyeState {
                eye,
                kcf,
                current,
                hists: VecDeque::with_capacity(window),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut stages: [Vec<f64>; 4] = Default::default();
    for (t, frame) in frames.iter().enumerate() {
        let mut spent = [0.0; 3];
        for st in &mut eyes {
            let clock = Instant::now();
            if t > 0 {
                let (next, score) = match kcf_update(&st.kcf, frame) {
                    Ok((s, r)) => (Some(s), r.score),
                    Err(Error::TrackLost(_)) => (None, f64::NEG_INFINITY),
                    Err(e) => return Err(e),
                };
                match next {
                    Some(s) if score >= track.track_thresh => {
                        st.current = box_of(s.region());
                        st.kcf = s;
                    }
                    _ => {
                        if let Some((b, s)) = seed_track(frame, locator.locate(frame, t), st.eye, track) {
                            st.current = b;
                            st.kcf = s;
                        }
                    }
                }
            }
            spent[0] += ms(clock);

            let clock = Instant::now();
            if st.hists.len() == window {
                st.hists.pop_front();
            }
            st.hists.push_back(eye_histogram(frame, st.current, DEFAULT_PATCH)?);
            spent[1] += ms(clock);

            let clock = Instant::now();
            if st.hists.len() == window {
                let hists: Vec<LbpHistogram> = st.hists.iter().cloned().collect();
                model.predict(&FeatureSequence::from_histograms(&hists))?;
            }
            spent[2] += ms(clock);
        }
        if t >= warmup {
            for (k, v) in spent.iter().enumerate() {
                stages[k].push(*v);
            }
            stages[3].push(spent.iter().sum());
        }
    }
    Ok(BenchReport {
        frames: frames.len() - warmup,
        warmup,
        tracking: StageStats::of(&stages[0])?,
        features: StageStats::of(&stages[1])?,
        inference: StageStats::of(&stages[2])?,
        total: StageStats::of(&stages[3])?,
    })
}
