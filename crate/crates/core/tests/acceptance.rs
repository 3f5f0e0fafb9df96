//! Acceptance suite. Runs every criterion, prints one PASS/FAIL/SKIP line each and exits
//! non-zero if any criterion fails. Pass a substring to run only matching criteria.

use std::cmp::Ordering;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blinkwild::cli::{bench_stream, synth_dataset, SynthCounts};
use blinkwild::dataset::{load_manifest, synth_clip, synth_stream, Eye, GrayFrame, Label, Manifest, Split};
use blinkwild::eval::{
    average_precision, average_precision_grouped, fr, me, me_correct, prf, ConfusionCounts, LocalizationTally,
    ScoredInterval,
};
use blinkwild::features::{uniform_lbp, LBP_BINS};
use blinkwild::mslstm::{
    asoftmax_loss, loss_and_gradient, train, Hyper, LossKind, MsLstmModel, TrainConfig,
};
use blinkwild::pipeline::{
    annotation_locator, clip_sequences, detect_stream, metrics_by_eye, split_sequences, temporal_iou,
    temporal_nms, verify_split, BlinkEvent, DetectParams, TrackParams,
};
use blinkwild::tracker::{gaussian_correlation, kcf_init, KcfParams, Plane, TrackRegion};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------------------------------------
// gradients

fn loss_of(model: &MsLstmModel, rows: &[Vec<f64>], label: Label, kind: LossKind) -> f64 {
    loss_and_gradient(model, rows, label, kind).unwrap().0.loss
}

fn gradient_correctness() -> Verdict {
    let started = Instant::now();
    let hyper = Hyper {
        layers: 2,
        scales: 2,
        hidden: 3,
        margin: 4,
    };
    let model = MsLstmModel::new(hyper, 118, 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let rows: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..118).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for (kind, label) in [
        (LossKind::ASoftmax, Label::Blink),
        (LossKind::ASoftmax, Label::NonBlink),
        (LossKind::Softmax, Label::Blink),
        (LossKind::Softmax, Label::NonBlink),
    ] {
        let (_, grad) = loss_and_gradient(&model, &rows, label, kind).unwrap();
        let analytic: Vec<Vec<f64>> = grad.param_blocks().iter().map(|b| b.to_vec()).collect();
        for (bi, block) in analytic.iter().enumerate() {
            for (k, &a) in block.iter().enumerate() {
                let mut plus = model.clone();
                plus.param_blocks_mut()[bi][k] += h;
                let mut minus = model.clone();
                minus.param_blocks_mut()[bi][k] -= h;
                let fd = (loss_of(&plus, &rows, label, kind) - loss_of(&minus, &rows, label, kind)) / (2.0 * h);
                let err = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        worst < 1e-4 && secs < 10.0,
        format!("max relative error {worst:.2e} over {checked} partials, {secs:.1} s (limits 1e-4, 10 s)"),
    )
}

// ---------------------------------------------------------------------------------------------
// unit margin

fn unit_margin_reduction() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let norm = rng.random_range(0.01..20.0);
        let cy = rng.random_range(-1.0..=1.0);
        let co = rng.random_range(-1.0..=1.0);
        let (a, _) = asoftmax_loss(norm, cy, co, 1).unwrap();
        let (ly, lo) = (norm * cy, norm * co);
        let m = ly.max(lo);
        let plain = -(ly - m) + ((ly - m).exp() + (lo - m).exp()).ln();
        worst = worst.max((a - plain).abs());
    }
    verdict(worst <= 1e-12, format!("max |difference| {worst:.2e} on 100 inputs (limit 1e-12)"))
}

// ---------------------------------------------------------------------------------------------
// LBP

fn circular_transitions(code: u32) -> u32 {
    (0..8).filter(|&p| ((code >> p) & 1) != ((code >> ((p + 1) % 8)) & 1)).count() as u32
}

fn naive_lbp(w: usize, h: usize, px: &[f32]) -> [f64; LBP_BINS] {
    let uniform: Vec<u32> = (0..256).filter(|&c| circular_transitions(c) <= 2).collect();
    let offsets: Vec<(i64, i64)> = (0..8)
        .map(|p| {
            let a = std::f64::consts::FRAC_PI_4 * p as f64;
            (a.cos().round() as i64, -(a.sin().round() as i64))
        })
        .collect();
    let mut counts = [0u32; LBP_BINS];
    for y in 1..h as i64 - 1 {
        for x in 1..w as i64 - 1 {
            let at = |x: i64, y: i64| px[(y as usize) * w + x as usize];
            let c = at(x, y);
            let mut code = 0u32;
            for (p, (dx, dy)) in offsets.iter().enumerate() {
                if at(x + dx, y + dy) >= c {
                    code += 1 << p;
                }
            }
            let bin = uniform.iter().position(|&u| u == code).unwrap_or(LBP_BINS - 1);
            counts[bin] += 1;
        }
    }
    let total = ((w - 2) * (h - 2)) as f64;
    let mut out = [0.0; LBP_BINS];
    for (o, c) in out.iter_mut().zip(counts) {
        *o = c as f64 / total;
    }
    out
}

fn lbp_oracle() -> Verdict {
    let n_uniform = (0..256).filter(|&c| circular_transitions(c) <= 2).count();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let (mut matches, mut invariant) = (0, 0);
    for _ in 0..50 {
        let px: Vec<f32> = (0..256).map(|_| rng.random_range(0..=255) as f32).collect();
        let frame = GrayFrame::new(16, 16, px.clone()).unwrap();
        let got = uniform_lbp(&frame).unwrap();
        if got.bins() == &naive_lbp(16, 16, &px) {
            matches += 1;
        }
        let remapped: Vec<f32> = px.iter().map(|&v| (255.0 * (v as f64 / 255.0).powf(1.5)) as f32).collect();
        if uniform_lbp(&GrayFrame::new(16, 16, remapped).unwrap()).unwrap() == got {
            invariant += 1;
        }
    }
    verdict(
        n_uniform == 58 && matches == 50 && invariant == 50,
        format!("{n_uniform} uniform codes, {matches}/50 exact matches, {invariant}/50 remap-invariant"),
    )
}

// ---------------------------------------------------------------------------------------------
// KCF

fn spatial_kernel(x: &Plane, z: &Plane, sigma: f64) -> Vec<f64> {
    let (w, h) = (x.width, x.height);
    let sq = |p: &Plane| p.data.iter().map(|v| v * v).sum::<f64>();
    let mut out = Vec::with_capacity(w * h);
    for ty in 0..h {
        for tx in 0..w {
            let mut cross = 0.0;
            for py in 0..h {
                for px in 0..w {
                    cross += x.get(px, py) * z.get((px + tx) % w, (py + ty) % h);
                }
            }
            let d = ((sq(x) + sq(z) - 2.0 * cross) / (w * h) as f64).max(0.0);
            out.push((-d / (sigma * sigma)).exp());
        }
    }
    out
}

fn shifted(base: &GrayFrame, dx: i32, dy: i32) -> GrayFrame {
    GrayFrame::from_fn(base.width(), base.height(), |x, y| {
        base.get_clamped(x as i64 - dx as i64, y as i64 - dy as i64)
    })
    .unwrap()
}

fn kcf_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut plane = || Plane::new(8, 8, (0..64).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let (x, z) = (plane(), plane());
        for sigma in [0.2, 0.5, 2.0] {
            let fast = gaussian_correlation(&x, &z, sigma).unwrap();
            for (a, b) in fast.data.iter().zip(spatial_kernel(&x, &z, sigma)) {
                worst = worst.max((a - b).abs());
            }
        }
    }

    let clip = synth_clip(8, Label::NonBlink, 1).unwrap();
    let base = &clip.frames()[0];
    let eye = clip.annotations()[0].left_eye;
    let region = TrackRegion {
        cx: eye.x,
        cy: eye.y,
        h: 24,
        w: 24,
    };
    let params = KcfParams {
        interp: 0.0,
        ..KcfParams::default()
    };
    let mut state = kcf_init(base, region, params).unwrap();
    let (mut ox, mut oy) = (0i32, 0i32);
    let mut exact = 0;
    for _ in 0..50 {
        let nx = (ox + rng.random_range(-3..=3)).clamp(-6, 6);
        let ny = (oy + rng.random_range(-3..=3)).clamp(-6, 6);
        let (next, res) = state.update(&shifted(base, nx, ny)).unwrap();
        if (res.region.cx - region.cx, res.region.cy - region.cy) == (nx, ny) {
            exact += 1;
        }
        state = next;
        (ox, oy) = (nx, ny);
    }
    verdict(
        worst <= 1e-6 && exact == 50,
        format!("kernel max |difference| {worst:.2e} (limit 1e-6), {exact}/50 translations exact"),
    )
}

// ---------------------------------------------------------------------------------------------
// NMS and AP

fn rank(a: &BlinkEvent, b: &BlinkEvent) -> Ordering {
    let eye = |e: Eye| (e == Eye::Right) as u8;
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.start.cmp(&b.start))
        .then(eye(a.eye).cmp(&eye(b.eye)))
        .then(a.end.cmp(&b.end))
}

/// The unique keep/drop assignment in which every dropped proposal overlaps a kept, better
/// ranked proposal of the same eye and no kept proposal does.
fn nms_brute_force(props: &[BlinkEvent], thr: f64) -> Vec<BlinkEvent> {
    let n = props.len();
    let beats = |a: usize, b: usize| rank(&props[a], &props[b]).then(a.cmp(&b)) == Ordering::Less;
    let clash = |a: usize, b: usize| {
        props[a].eye == props[b].eye
            && temporal_iou((props[a].start, props[a].end), (props[b].start, props[b].end)) > thr
    };
    let consistent: Vec<u32> = (0u32..1 << n)
        .filter(|mask| {
            let kept = |i: usize| mask & (1 << i) != 0;
            (0..n).all(|i| kept(i) != (0..n).any(|j| j != i && kept(j) && beats(j, i) && clash(i, j)))
        })
        .collect();
    assert_eq!(consistent.len(), 1);
    let mut idx: Vec<usize> = (0..n).filter(|&i| consistent[0] & (1 << i) != 0).collect();
    idx.sort_by(|&a, &b| rank(&props[a], &props[b]).then(a.cmp(&b)));
    idx.into_iter().map(|i| props[i]).collect()
}

fn frame_iou(a: (usize, usize), b: (usize, usize)) -> f64 {
    let inside = |f: usize, iv: (usize, usize)| iv.0 <= f && f <= iv.1;
    let lo = a.0.min(b.0);
    let hi = a.1.max(b.1);
    let inter = (lo..=hi).filter(|&f| inside(f, a) && inside(f, b)).count();
    let union = (lo..=hi).filter(|&f| inside(f, a) || inside(f, b)).count();
    inter as f64 / union as f64
}

fn ap_brute_force(events: &[ScoredInterval], gt: &[(usize, usize)], overlap: f64) -> f64 {
    if gt.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by(|&a, &b| events[b].confidence.total_cmp(&events[a].confidence).then(a.cmp(&b)));
    let mut used = vec![false; gt.len()];
    let mut hits = Vec::new();
    for &i in &order {
        let e = (events[i].start, events[i].end);
        let mut best: Option<usize> = None;
        for j in 0..gt.len() {
            if used[j] || frame_iou(e, gt[j]) < overlap {
                continue;
            }
            if best.is_none_or(|k| frame_iou(e, gt[j]) > frame_iou(e, gt[k])) {
                best = Some(j);
            }
        }
        if let Some(j) = best {
            used[j] = true;
        }
        hits.push(best.is_some());
    }
    let mut total = 0.0;
    for k in 0..hits.len() {
        if hits[k] {
            total += hits[..=k].iter().filter(|&&h| h).count() as f64 / (k + 1) as f64;
        }
    }
    total / gt.len() as f64
}

fn nms_and_ap_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut nms_bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(0..=6);
        let props: Vec<BlinkEvent> = (0..n)
            .map(|_| {
                let a = rng.random_range(0..=30);
                let b = rng.random_range(0..=30);
                BlinkEvent {
                    start: a.min(b),
                    end: a.max(b),
                    confidence: rng.random_range(0..5) as f64 / 4.0,
                    eye: if rng.random_bool(0.5) { Eye::Left } else { Eye::Right },
                }
            })
            .collect();
        if temporal_nms(&props, 0.33) != nms_brute_force(&props, 0.33) {
            nms_bad += 1;
        }
    }
    let mut ap_bad = 0;
    for _ in 0..1000 {
        let interval = |rng: &mut ChaCha8Rng| {
            let a = rng.random_range(0..=20);
            (a, a + rng.random_range(0..=8))
        };
        let events: Vec<ScoredInterval> = (0..rng.random_range(0..=4))
            .map(|_| {
                let (start, end) = interval(&mut rng);
                ScoredInterval {
                    start,
                    end,
                    confidence: rng.random_range(0..4) as f64 / 3.0,
                }
            })
            .collect();
        let gt: Vec<(usize, usize)> = (0..rng.random_range(0..=3)).map(|_| interval(&mut rng)).collect();
        let got = average_precision(&events, &gt, 0.5).unwrap().ap;
        if (got - ap_brute_force(&events, &gt, 0.5)).abs() > 1e-12 {
            ap_bad += 1;
        }
    }
    verdict(
        nms_bad == 0 && ap_bad == 0,
        format!("NMS mismatches {nms_bad}/1000, AP mismatches {ap_bad}/1000"),
    )
}

// ---------------------------------------------------------------------------------------------
// metrics

fn metric_arithmetic() -> Verdict {
    let mut failures = Vec::new();
    let mut expect = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let p = prf(ConfusionCounts { tp: 5, fp: 0, fn_: 0 });
    expect("perfect counts", (p.recall, p.precision, p.f1) == (1.0, 1.0, 1.0));
    let p = prf(ConfusionCounts { tp: 0, fp: 3, fn_: 4 });
    expect("no true positives", (p.recall, p.precision, p.f1) == (0.0, 0.0, 0.0));
    let p = prf(ConfusionCounts::default());
    expect("empty counts", (p.recall, p.precision, p.f1) == (0.0, 0.0, 0.0));
    let t = |n_miss, n_err, n_all| LocalizationTally { n_miss, n_err, n_all };
    expect("fr zero", fr(t(0, 0, 10)).unwrap() == 0.0);
    expect("fr 0.3", fr(t(2, 1, 10)).unwrap() == 0.3);
    expect("fr empty", fr(t(0, 0, 0)).is_err());
    let (l, r) = ((0.0, 0.0), (10.0, 0.0));
    expect("me exact", me((4.0, 4.0), (4.0, 4.0), l, r).unwrap() == 0.0);
    let v = me((6.0, 6.0), (4.0, 4.0), l, r).unwrap();
    expect("me boundary", v == 0.4 && me_correct(v));
    let v = me((7.0, 7.0), (4.0, 4.0), l, r).unwrap();
    expect("me failure", (v - 0.6).abs() < 1e-15 && !me_correct(v));
    expect("me degenerate", me((0.0, 0.0), (1.0, 1.0), l, l).is_err());

    let row = prf(ConfusionCounts { tp: 66, fp: 8, fn_: 56 });
    let dev = [
        (row.recall - 0.5410).abs(),
        (row.precision - 0.8919).abs(),
        (row.f1 - 0.6735).abs(),
    ];
    let worst = dev.iter().cloned().fold(0.0, f64::max);
    expect("left-eye table row", worst <= 5e-4);
    let detail = format!(
        "table row R {:.4} P {:.4} F1 {:.4} (max deviation {worst:.1e}, limit 5e-4); failed: {}",
        row.recall,
        row.precision,
        row.f1,
        if failures.is_empty() { "none".to_string() } else { failures.join(", ") }
    );
    verdict(failures.is_empty(), detail)
}

// ---------------------------------------------------------------------------------------------
// end-to-end learning

/// Optimizer steps used by the learning criteria: the first segments of the default schedule.
const E2E_STEPS: u64 = 1000;

fn verification_f1(manifest: &Manifest, loss: LossKind, track: &TrackParams) -> f64 {
    let set = split_sequences(manifest, Split::Train, track).unwrap();
    let cfg = TrainConfig {
        max_steps: E2E_STEPS,
        loss,
        ..TrainConfig::default()
    };
    let (model, _) = train(MsLstmModel::with_defaults(0).unwrap(), &set, &cfg).unwrap();
    let rows = verify_split(manifest, Split::Test, &model, track).unwrap();
    let all = metrics_by_eye(&rows).unwrap().pop().unwrap();
    all.f1
}

fn end_to_end_learning() -> Verdict {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = synth_dataset(0, &SynthCounts::default(), dir.path()).unwrap();
    let manifest = load_manifest(&path).unwrap();
    let track = TrackParams::default();
    let a = verification_f1(&manifest, LossKind::ASoftmax, &track);
    let s = verification_f1(&manifest, LossKind::Softmax, &track);
    let secs = started.elapsed().as_secs_f64();
    verdict(
        a >= 0.95 && a >= s - 0.02 && secs < 300.0,
        format!(
            "A-softmax F1 {a:.4} (>= 0.95), softmax F1 {s:.4} (A-softmax >= softmax - 0.02), {secs:.0} s (< 300 s)"
        ),
    )
}

// ---------------------------------------------------------------------------------------------
// untrimmed detection

const DETECTOR_CLIPS: u64 = 2000;
const DETECTOR_STEPS: u64 = 3000;

fn detector() -> MsLstmModel {
    let track = TrackParams::default();
    let mut set = Vec::new();
    for seed in 0..DETECTOR_CLIPS {
        let label = if seed % 2 == 0 { Label::Blink } else { Label::NonBlink };
        let clip = synth_clip(seed, label, 10).unwrap();
        for (_, seq) in clip_sequences(&clip, &annotation_locator(&clip), &track).unwrap() {
            set.push((seq, label));
        }
    }
    let cfg = TrainConfig {
        max_steps: DETECTOR_STEPS,
        ..TrainConfig::default()
    };
    train(MsLstmModel::with_defaults(0).unwrap(), &set, &cfg).unwrap().0
}

fn untrimmed_detection(model: &MsLstmModel) -> Verdict {
    let params = DetectParams::default();
    let mut groups = Vec::new();
    for k in 0..20u64 {
        let center = 15 + (k as usize * 7) % 20;
        let s = synth_stream(1000 + k, 50, &[center]).unwrap();
        let det = detect_stream(s.clip.frames(), &annotation_locator(&s.clip), model, &params).unwrap();
        let gt = s.gt_intervals(params.window);
        for eye in Eye::BOTH {
            let ev = det
                .events
                .iter()
                .filter(|e| e.eye == eye)
                .map(|e| ScoredInterval {
                    start: e.start,
                    end: e.end,
                    confidence: e.confidence,
                })
                .collect();
            groups.push((ev, gt.clone()));
        }
    }
    let ap = average_precision_grouped(&groups, 0.5).unwrap();
    let mut negatives = 0;
    for k in 0..20u64 {
        let s = synth_stream(2000 + k, 50, &[]).unwrap();
        negatives += detect_stream(s.clip.frames(), &annotation_locator(&s.clip), model, &params)
            .unwrap()
            .events
            .len();
    }
    verdict(
        ap.ap >= 0.9 && negatives == 0,
        format!(
            "AP {:.4} over 20 streams (>= 0.9), {negatives} events on 20 blink-free streams (== 0)",
            ap.ap
        ),
    )
}

// ---------------------------------------------------------------------------------------------
// throughput

fn throughput(model: &MsLstmModel) -> Verdict {
    let s = synth_stream(0, 550, &[]).unwrap();
    let r = bench_stream(s.clip.frames(), &annotation_locator(&s.clip), model, &TrackParams::default(), 10, 50)
        .unwrap();
    verdict(
        r.total.median_ms <= 10.0,
        format!(
            "median per-frame {:.3} ms (tracking {:.3}, features {:.3}, inference {:.3}) over {} frames (<= 10 ms)",
            r.total.median_ms, r.tracking.median_ms, r.features.median_ms, r.inference.median_ms, r.frames
        ),
    )
}

// ---------------------------------------------------------------------------------------------
// real data, when present

/// Manifest of the annotated movie dataset, converted to the toolkit's layout.
const REAL_DATA_ENV: &str = "BLINKWILD_HUST_LEBW";
const REAL_F1: [(Eye, f64); 2] = [(Eye::Left, 0.7589), (Eye::Right, 0.8046)];

fn real_data_verification() -> Verdict {
    let Some(path) = std::env::var_os(REAL_DATA_ENV).map(PathBuf::from) else {
        return Verdict::Skip(format!("{REAL_DATA_ENV} not set"));
    };
    let manifest = match load_manifest(&path) {
        Ok(m) => m,
        Err(e) => return Verdict::Fail(format!("cannot load {}: {e}", path.display())),
    };
    let track = TrackParams::default();
    let set = split_sequences(&manifest, Split::Train, &track).unwrap();
    let (model, _) = train(MsLstmModel::with_defaults(0).unwrap(), &set, &TrainConfig::default()).unwrap();
    let rows = verify_split(&manifest, Split::Test, &model, &track).unwrap();
    let metrics = metrics_by_eye(&rows).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (eye, want) in REAL_F1 {
        let got = metrics.iter().find(|m| m.eye == eye.as_str()).unwrap().f1;
        ok &= (got - want).abs() <= 0.08;
        parts.push(format!("{} F1 {got:.4} (target {want} +/- 0.08)", eye.as_str()));
    }
    verdict(ok, parts.join(", "))
}

// ---------------------------------------------------------------------------------------------

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let names = [
        "gradient correctness",
        "unit-margin reduction",
        "lbp oracle",
        "kcf oracle",
        "nms and ap oracles",
        "metric arithmetic",
        "end-to-end learning",
        "untrimmed detection",
        "throughput",
        "real-data verification",
    ];
    if args.iter().any(|a| a == "--list") {
        for n in names {
            println!("{n}: test");
        }
        return;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let wanted = |n: &str| filters.is_empty() || filters.iter().any(|f| n.contains(f.as_str()));

    let mut detector_model: Option<MsLstmModel> = None;
    let mut get_detector = || detector_model.get_or_insert_with(detector).clone();
    let mut failed = 0;
    let mut ran = 0;
    for name in names.into_iter().filter(|n| wanted(n)) {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| match name {
            "gradient correctness" => gradient_correctness(),
            "unit-margin reduction" => unit_margin_reduction(),
            "lbp oracle" => lbp_oracle(),
            "kcf oracle" => kcf_oracle(),
            "nms and ap oracles" => nms_and_ap_oracles(),
            "metric arithmetic" => metric_arithmetic(),
            "end-to-end learning" => end_to_end_learning(),
            "untrimmed detection" => untrimmed_detection(&get_detector()),
            "throughput" => throughput(&get_detector()),
            "real-data verification" => real_data_verification(),
            _ => unreachable!(),
        }))
        .unwrap_or_else(|_| Verdict::Fail("panicked".into()));
        let took = fmt_duration(started.elapsed());
        ran += 1;
        match outcome {
            Verdict::Pass(d) => println!("PASS {name}: {d} [{took}]"),
            Verdict::Skip(d) => println!("SKIP {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{took}]");
            }
        }
    }
    println!("acceptance: {} run, {failed} failed", ran);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}
