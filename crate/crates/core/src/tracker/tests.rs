use super::*;
use crate::dataset::{synth_clip, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Plane {
    Plane::new(w, h, (0..w * h).map(|_| rng.random_range(-0.5..0.5)).collect()).unwrap()
}

/// Direct evaluation of the kernel over every cyclic lag.
fn kernel_oracle(x: &Plane, z: &Plane, sigma: f64) -> Plane {
    let (w, h) = (x.width, x.height);
    let n = (w * h) as f64;
    let xx: f64 = x.data.iter().map(|v| v * v).sum();
    let zz: f64 = z.data.iter().map(|v| v * v).sum();
    let mut out = vec![0.0; w * h];
    for ty in 0..h {
        for tx in 0..w {
            let mut c = 0.0;
            for py in 0..h {
                for px in 0..w {
                    c += x.get(px, py) * z.get((px + tx) % w, (py + ty) % h);
                }
            }
            let d = ((xx + zz - 2.0 * c) / n).max(0.0);
            out[ty * w + tx] = (-d / (sigma * sigma)).exp();
        }
    }
    Plane::new(w, h, out).unwrap()
}

#[test]
fn kernel_matches_spatial_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (w, h) in [(8, 8), (8, 8), (8, 8), (7, 5), (6, 9)] {
        let x = random_plane(&mut rng, w, h);
        let z = random_plane(&mut rng, w, h);
        let got = gaussian_correlation(&x, &z, 0.2).unwrap();
        let want = kernel_oracle(&x, &z, 0.2);
        for (a, b) in got.data.iter().zip(&want.data) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}

#[test]
fn kernel_self_at_zero_lag_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_plane(&mut rng, 8, 8);
    let k = gaussian_correlation(&x, &x, 0.2).unwrap();
    assert!((k.data[0] - 1.0).abs() < 1e-12);
    assert!(k.data.iter().all(|&v| v <= 1.0 + 1e-12));
}

#[test]
fn kernel_swap_mirrors_lags() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (w, h) = (8, 6);
    let x = random_plane(&mut rng, w, h);
    let z = random_plane(&mut rng, w, h);
    let kxz = gaussian_correlation(&x, &z, 0.3).unwrap();
    let kzx = gaussian_correlation(&z, &x, 0.3).unwrap();
    for ty in 0..h {
        for tx in 0..w {
            let mirrored = kzx.get((w - tx) % w, (h - ty) % h);
            assert!((kxz.get(tx, ty) - mirrored).abs() < 1e-12);
        }
    }
}

#[test]
fn kernel_rejects_mismatched_sizes() {
    let a = Plane::new(4, 4, vec![0.0; 16]).unwrap();
    let b = Plane::new(4, 3, vec![0.0; 12]).unwrap();
    assert!(gaussian_correlation(&a, &b, 0.2).is_err());
}

/// Large textured scene; frames are integer-shifted views of it.
fn scene(seed: u64) -> GrayFrame {
    let clip = synth_clip(seed, Label::NonBlink, 1).unwrap();
    clip.frames()[0].clone()
}

fn shifted(base: &GrayFrame, dx: i32, dy: i32) -> GrayFrame {
    // content moves by (+dx, +dy)
    GrayFrame::from_fn(base.width(), base.height(), |x, y| {
        base.get_clamped(x as i64 - dx as i64, y as i64 - dy as i64)
    })
    .unwrap()
}

fn eye_region_of(seed: u64) -> TrackRegion {
    let clip = synth_clip(seed, Label::NonBlink, 1).unwrap();
    let a = clip.annotations()[0];
    TrackRegion {
        cx: a.left_eye.x,
        cy: a.left_eye.y,
        h: 24,
        w: 24,
    }
}

#[test]
fn self_detection_peaks_at_origin() {
    let f = scene(3);
    let st = kcf_init(&f, eye_region_of(3), KcfParams::default()).unwrap();
    let resp = st.response(&f).unwrap();
    let ((dx, dy), score) = resp.peak();
    assert_eq!((dx, dy), (0, 0));
    assert!((score - 1.0).abs() < 1e-3, "score {score}");
    let (next, res) = st.update(&f).unwrap();
    assert_eq!(res.region, st.region());
    assert_eq!(next.region(), st.region());
}

#[test]
fn response_is_real() {
    let f = scene(4);
    let st = kcf_init(&f, eye_region_of(4), KcfParams::default()).unwrap();
    let g = shifted(&f, 3, -2);
    let r = st.response(&g).unwrap();
    let peak = r.map.data.iter().cloned().fold(0.0, f64::max);
    assert!(r.max_imag <= 1e-9 * peak.max(1.0), "imag residue {}", r.max_imag);
}

#[test]
fn constant_patch_gives_flat_map_and_no_motion() {
    let f = GrayFrame::filled(80, 60, 128.0).unwrap();
    let region = TrackRegion { cx: 40, cy: 30, h: 16, w: 16 };
    let st = kcf_init(&f, region, KcfParams::default()).unwrap();
    let r = st.response(&f).unwrap();
    let (lo, hi) = r
        .map
        .data
        .iter()
        .fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi - lo <= 1e-9 * hi.abs().max(1.0), "map not flat: {lo}..{hi}");
    let (_, res) = st.update(&f).unwrap();
    assert_eq!(res.region, region);
}

#[test]
fn recovers_integer_translations() {
    let f = scene(5);
    let region = eye_region_of(5);
    let st = kcf_init(&f, region, KcfParams::default()).unwrap();
    for dy in -6..=6 {
        for dx in -6..=6 {
            let (_, res) = st.update(&shifted(&f, dx, dy)).unwrap();
            assert_eq!(
                (res.region.cx - region.cx, res.region.cy - region.cy),
                (dx, dy),
                "shift ({dx}, {dy})"
            );
        }
    }
}

#[test]
fn unchanged_frame_peak_dominates_every_other_lag() {
    let f = scene(6);
    let st = kcf_init(&f, eye_region_of(6), KcfParams::default()).unwrap();
    let r = st.response(&f).unwrap();
    let (_, res) = st.update(&f).unwrap();
    assert_eq!(res.region, st.region());
    assert_eq!(res.score, r.map.data[0]);
    assert!(r.map.data[1..].iter().all(|&v| v < res.score));
}

#[test]
fn noise_frames_fall_below_relocalization_threshold() {
    let f = scene(7);
    let st = kcf_init(&f, eye_region_of(7), KcfParams::default()).unwrap();
    let mut below = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = GrayFrame::from_fn(f.width(), f.height(), |_, _| {
            rng.random_range(0.0f32..=255.0).round()
        })
        .unwrap();
        let (_, res) = st.update(&noise).unwrap();
        if res.score < 0.25 {
            below += 1;
        }
    }
    assert!(below >= 90, "only {below}/100 noise frames scored below 0.25");
}

#[test]
fn long_translation_track_with_frozen_model() {
    let base = scene(8);
    let region = eye_region_of(8);
    let params = KcfParams {
        interp: 0.0,
        ..KcfParams::default()
    };
    let mut st = kcf_init(&base, region, params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut ox, mut oy) = (0i32, 0i32);
    for _ in 0..50 {
        let (sx, sy) = (rng.random_range(-3..=3), rng.random_range(-3..=3));
        let (nx, ny) = ((ox + sx).clamp(-6, 6), (oy + sy).clamp(-6, 6));
        let (next, res) = st.update(&shifted(&base, nx, ny)).unwrap();
        assert_eq!((res.region.cx - region.cx, res.region.cy - region.cy), (nx, ny));
        st = next;
        (ox, oy) = (nx, ny);
    }
}

fn noisy(f: &GrayFrame, sigma: f64, seed: u64) -> GrayFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
    GrayFrame::from_fn(f.width(), f.height(), |x, y| {
        let n: f64 = rand_distr::Distribution::sample(&normal, &mut rng);
        (f.get(x, y) as f64 + n).round().clamp(0.0, 255.0) as f32
    })
    .unwrap()
}

#[test]
fn mean_score_drops_with_noise() {
    for scene_seed in [9, 10, 11] {
        let f = scene(scene_seed);
        let st = kcf_init(&f, eye_region_of(scene_seed), KcfParams::default()).unwrap();
        let clean = st.update(&f).unwrap().1.score;
        let mean_at = |sigma: f64| {
            (0..20)
                .map(|s| st.update(&noisy(&f, sigma, s)).unwrap().1.score)
                .sum::<f64>()
                / 20.0
        };
        let (s8, s32) = (mean_at(8.0), mean_at(32.0));
        eprintln!("scene {scene_seed}: {clean} {s8} {s32}");
        assert!(clean >= s8 && s8 >= s32, "scene {scene_seed}: {clean} {s8} {s32}");
    }
}

#[test]
fn rejects_degenerate_and_lost_regions() {
    let f = scene(1);
    let tiny = TrackRegion { cx: 10, cy: 10, h: 3, w: 5 };
    assert!(kcf_init(&f, tiny, KcfParams::default()).is_err());
    let st = kcf_init(&f, eye_region_of(1), KcfParams::default()).unwrap();
    let far = KcfState {
        region: TrackRegion { cx: -500, cy: -500, ..st.region() },
        ..st
    };
    assert!(matches!(far.update(&f), Err(Error::TrackLost(_))));
}
