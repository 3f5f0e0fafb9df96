use super::{EyeCenter, FaceBox, GrayFrame};
use crate::error::{Error, Result};

/// Side lengths of the square local eye image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EyeRegion {
    pub height: usize,
    pub width: usize,
}

pub fn manhattan(a: (i32, i32), b: (i32, i32)) -> i64 {
    (a.0 as i64 - b.0 as i64).abs() + (a.1 as i64 - b.1 as i64).abs()
}

fn round_side(v: f64) -> usize {
    (v.round() as i64).max(1) as usize
}

/// Local eye image size. With both eyes visible the side is 0.4 times the
/// inter-ocular Manhattan distance; with one eye it is a ninth of the face
/// width. Rounded to the nearest pixel, never below 1.
pub fn eye_region(left: EyeCenter, right: EyeCenter, face_box: FaceBox) -> Result<EyeRegion> {
    let side = match (left.visible, right.visible) {
        (true, true) => round_side(0.4 * manhattan((left.x, left.y), (right.x, right.y)) as f64),
        (true, false) | (false, true) => round_side(face_box.w as f64 / 9.0),
        (false, false) => return Err(Error::NoVisibleEye),
    };
    Ok(EyeRegion {
        height: side,
        width: side,
    })
}

/// Extracts an `h x w` patch centered at `center`. The top-left corner is
/// `(x - w/2, y - h/2)`; out-of-frame pixels replicate the nearest edge.
pub fn crop_eye(frame: &GrayFrame, center: EyeCenter, size: EyeRegion) -> Result<GrayFrame> {
    if !center.visible {
        return Err(Error::NoVisibleEye);
    }
    crop_at(frame, center.x as i64, center.y as i64, size.height, size.width)
}

pub(crate) fn crop_at(
    frame: &GrayFrame,
    cx: i64,
    cy: i64,
    h: usize,
    w: usize,
) -> Result<GrayFrame> {
    if h == 0 || w == 0 {
        return Err(Error::invalid(format!("crop size {h}x{w} has a zero dimension")));
    }
    let x0 = cx - (w / 2) as i64;
    let y0 = cy - (h / 2) as i64;
    let mut data = Vec::with_capacity(h * w);
    for dy in 0..h as i64 {
        for dx in 0..w as i64 {
            data.push(frame.get_clamped(x0 + dx, y0 + dy));
        }
    }
    GrayFrame::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn face(w: i32) -> FaceBox {
        FaceBox { x: 0, y: 0, w, h: w }
    }

    #[test]
    fn both_eyes_use_manhattan_rule() {
        let r = eye_region(EyeCenter::visible(100, 100), EyeCenter::visible(160, 100), face(300))
            .unwrap();
        assert_eq!((r.height, r.width), (24, 24));
    }

    #[test]
    fn single_eye_uses_face_width() {
        let r = eye_region(EyeCenter::visible(100, 100), EyeCenter::invisible(), face(180)).unwrap();
        assert_eq!((r.height, r.width), (20, 20));
        let r = eye_region(EyeCenter::invisible(), EyeCenter::visible(1, 1), face(3)).unwrap();
        assert_eq!(r.height, 1);
    }

    #[test]
    fn rounding_floors_at_one() {
        // MH = 3, 0.4 * 3 = 1.2 rounds to 1
        let r = eye_region(EyeCenter::visible(0, 0), EyeCenter::visible(1, 2), face(10)).unwrap();
        assert_eq!((r.height, r.width), (1, 1));
        let r = eye_region(EyeCenter::visible(0, 0), EyeCenter::visible(0, 0), face(10)).unwrap();
        assert_eq!(r.height, 1);
    }

    #[test]
    fn no_eye_is_an_error() {
        assert!(matches!(
            eye_region(EyeCenter::invisible(), EyeCenter::invisible(), face(90)),
            Err(Error::NoVisibleEye)
        ));
    }

    fn ramp(w: usize, h: usize) -> GrayFrame {
        GrayFrame::from_fn(w, h, |x, y| ((x * 7 + y * 13) % 256) as f32).unwrap()
    }

    #[test]
    fn interior_crop_equals_direct_indexing() {
        let f = ramp(100, 100);
        let p = crop_eye(&f, EyeCenter::visible(50, 50), EyeRegion { height: 10, width: 10 })
            .unwrap();
        for y in 0..10 {
            for x in 0..10 {
                assert_eq!(p.get(x, y), f.get(45 + x, 45 + y));
            }
        }
    }

    #[test]
    fn corner_crop_replicates_edges() {
        let f = ramp(20, 20);
        let p = crop_eye(&f, EyeCenter::visible(0, 0), EyeRegion { height: 4, width: 4 }).unwrap();
        // reference: pad by replication then index
        let pad = 2usize;
        let pw = 20 + 2 * pad;
        let padded: Vec<f32> = (0..pw * pw)
            .map(|i| {
                let (px, py) = (i % pw, i / pw);
                let sx = px.saturating_sub(pad).min(19);
                let sy = py.saturating_sub(pad).min(19);
                f.get(sx, sy)
            })
            .collect();
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(p.get(x, y), padded[y * pw + x]);
            }
        }
    }

    #[test]
    fn zero_size_crop_rejected() {
        let f = ramp(10, 10);
        assert!(crop_eye(&f, EyeCenter::visible(5, 5), EyeRegion { height: 0, width: 3 }).is_err());
    }

    proptest! {
        #[test]
        fn constant_frame_gives_constant_patch(v in 0u8..=255, cx in -30i32..60, cy in -30i32..60,
                                                h in 1usize..20, w in 1usize..20) {
            let f = GrayFrame::filled(32, 24, v as f32).unwrap();
            let p = crop_eye(&f, EyeCenter { x: cx, y: cy, visible: true },
                             EyeRegion { height: h, width: w }).unwrap();
            prop_assert!(p.data().iter().all(|&q| q == v as f32));
        }

        #[test]
        fn region_is_symmetric_and_translation_invariant(
            lx in 0i32..200, ly in 0i32..200, rx in 0i32..200, ry in 0i32..200,
            dx in -50i32..50, dy in -50i32..50)
        {
            let fb = face(400);
            let a = eye_region(EyeCenter::visible(lx, ly), EyeCenter::visible(rx, ry), fb).unwrap();
            let b = eye_region(EyeCenter::visible(rx, ry), EyeCenter::visible(lx, ly), fb).unwrap();
            let c = eye_region(EyeCenter::visible(lx + dx, ly + dy),
                               EyeCenter::visible(rx + dx, ry + dy), fb).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(a, c);
        }

        #[test]
        fn crop_of_crop_is_identity_on_interior(cx in 0i32..40, cy in 0i32..30, s in 1usize..12) {
            let f = ramp(40, 30);
            let size = EyeRegion { height: s, width: s };
            let c = EyeCenter::visible(cx, cy);
            let once = crop_eye(&f, c, size).unwrap();
            // re-crop the patch at its own center with the same size
            let inner = EyeCenter::visible((s / 2) as i32, (s / 2) as i32);
            let twice = crop_eye(&once, inner, size).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
