//! Fixed-length clip polishing. Blink clips keep their fully-closed frame
//! near the middle; frames are duplicated or cut at the ends alternately.

use super::{crop_eye, eye_region, Clip, Label};
use crate::error::{Error, Result};

/// Mean 6.18 and standard deviation 1.54 frames put the 3-sigma bound at
/// about 10.8 frames; clips are polished to 10.
pub const DEFAULT_POLISH_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Head,
    Tail,
}

impl End {
    fn other(self) -> End {
        match self {
            End::Head => End::Tail,
            End::Tail => End::Head,
        }
    }
}

/// Source frame indices of the polished clip.
pub(crate) fn polish_indices(
    len: usize,
    target_len: usize,
    closed: Option<usize>,
) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    if len == target_len {
        return idx;
    }
    let extend = target_len > len;
    let k = target_len.abs_diff(len);

    let first = match closed {
        Some(c) => {
            let center = (target_len / 2) as i64;
            let (ceil, floor) = (k.div_ceil(2) as i64, (k / 2) as i64);
            let sign = if extend { 1 } else { -1 };
            let head_final = c as i64 + sign * ceil;
            let tail_final = c as i64 + sign * floor;
            if (head_final - center).abs() <= (tail_final - center).abs() {
                End::Head
            } else {
                End::Tail
            }
        }
        None => End::Head,
    };

    // position of the closed frame inside `idx`
    let mut pos = closed;
    let mut next = first;
    for _ in 0..k {
        let mut end = next;
        if !extend {
            if let Some(p) = pos {
                let blocked = match end {
                    End::Head => p == 0,
                    End::Tail => p + 1 == idx.len(),
                };
                if blocked {
                    end = end.other();
                }
            }
        }
        match (extend, end) {
            (true, End::Head) => {
                idx.insert(0, idx[0]);
                pos = pos.map(|p| p + 1);
            }
            (true, End::Tail) => idx.push(*idx.last().expect("non-empty")),
            (false, End::Head) => {
                idx.remove(0);
                pos = pos.map(|p| p - 1);
            }
            (false, End::Tail) => {
                idx.pop();
            }
        }
        next = end.other();
    }
    idx
}

/// Polishes `clip` to exactly `target_len` frames. For blink clips
/// `closed_index` marks the fully-closed frame; it is ignored otherwise.
pub fn polish_clip(clip: &Clip, target_len: usize, closed_index: usize) -> Result<Clip> {
    if target_len < 1 {
        return Err(Error::invalid("target length must be at least 1"));
    }
    if clip.is_empty() {
        return Err(Error::invalid("cannot polish an empty clip"));
    }
    let closed = match clip.label {
        Label::Blink => {
            if closed_index >= clip.len() {
                return Err(Error::invalid(format!(
                    "closed index {closed_index} outside clip of length {}",
                    clip.len()
                )));
            }
            Some(closed_index)
        }
        Label::NonBlink => None,
    };
    let idx = polish_indices(clip.len(), target_len, closed);
    let frames = idx.iter().map(|&i| clip.frames()[i].clone()).collect();
    let annotations = idx
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let mut a = clip.annotations()[i];
            a.frame_index = k;
            a
        })
        .collect();
    Clip::new(frames, annotations, clip.label, clip.source_id.clone())
}

/// Index of the darkest eye-region frame, used as the fully-closed frame
/// when a dataset does not mark it. Falls back to the middle frame when no
/// frame has a visible eye.
pub fn estimate_closed_index(clip: &Clip) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for (i, (frame, ann)) in clip.frames().iter().zip(clip.annotations()).enumerate() {
        let Ok(size) = eye_region(ann.left_eye, ann.right_eye, ann.face_box) else {
            continue;
        };
        let mut sum = 0.0;
        let mut n = 0usize;
        for eye in [ann.left_eye, ann.right_eye] {
            if let Ok(p) = crop_eye(frame, eye, size) {
                sum += p.mean();
                n += 1;
            }
        }
        let m = sum / n as f64;
        if best.is_none_or(|(b, _)| m < b) {
            best = Some((m, i));
        }
    }
    best.map_or(clip.len() / 2, |(_, i)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AnnotationRecord, EyeCenter, FaceBox, GrayFrame};
    use proptest::prelude::*;

    fn tagged_clip(len: usize, label: Label) -> Clip {
        // frame i is filled with intensity i so the source index is recoverable
        let frames = (0..len)
            .map(|i| GrayFrame::filled(8, 8, i as f32).unwrap())
            .collect();
        let ann = (0..len)
            .map(|i| AnnotationRecord {
                frame_index: i,
                face_box: FaceBox { x: 0, y: 0, w: 8, h: 8 },
                left_eye: EyeCenter::visible(2, 3),
                right_eye: EyeCenter::visible(6, 3),
            })
            .collect();
        Clip::new(frames, ann, label, "t").unwrap()
    }

    fn sources(c: &Clip) -> Vec<usize> {
        c.frames().iter().map(|f| f.get(0, 0) as usize).collect()
    }

    /// Brute force: simulate every head/tail operation sequence, keep those
    /// that never drop the closed frame, then pick the most balanced split,
    /// then the one landing the closed frame nearest the middle, then the
    /// one with more head operations.
    fn oracle(len: usize, target: usize, closed: usize) -> Vec<usize> {
        let k = target.abs_diff(len);
        let extend = target > len;
        let mut best: Option<((usize, i64, std::cmp::Reverse<usize>), Vec<usize>)> = None;
        for mask in 0u32..(1 << k) {
            let mut idx: Vec<usize> = (0..len).collect();
            let mut ok = true;
            let mut heads = 0;
            for b in 0..k {
                let head = mask & (1 << b) != 0;
                heads += head as usize;
                match (extend, head) {
                    (true, true) => idx.insert(0, idx[0]),
                    (true, false) => idx.push(*idx.last().unwrap()),
                    (false, true) => {
                        if idx[0] == closed {
                            ok = false;
                        }
                        idx.remove(0);
                    }
                    (false, false) => {
                        if *idx.last().unwrap() == closed {
                            ok = false;
                        }
                        idx.pop();
                    }
                }
            }
            if !ok {
                continue;
            }
            let pos = idx.iter().position(|&i| i == closed).unwrap();
            let pos = if extend { closed + heads } else { pos };
            let key = (
                heads.abs_diff(k - heads),
                (pos as i64 - (target / 2) as i64).abs(),
                std::cmp::Reverse(heads),
            );
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                best = Some((key, idx));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn identity_when_length_matches() {
        let c = tagged_clip(10, Label::Blink);
        assert_eq!(polish_clip(&c, 10, 4).unwrap(), c);
    }

    #[test]
    fn cut_twelve_to_ten() {
        let c = tagged_clip(12, Label::Blink);
        let p = polish_clip(&c, 10, 6).unwrap();
        assert_eq!(sources(&p), (1..=10).collect::<Vec<_>>());
        assert_eq!(sources(&p)[5], 6);
        assert_eq!(sources(&p), oracle(12, 10, 6));
    }

    #[test]
    fn extend_six_to_ten() {
        let c = tagged_clip(6, Label::Blink);
        let p = polish_clip(&c, 10, 3).unwrap();
        assert_eq!(sources(&p), vec![0, 0, 0, 1, 2, 3, 4, 5, 5, 5]);
        assert_eq!(sources(&p)[5], 3);
        assert_eq!(sources(&p), oracle(6, 10, 3));
    }

    #[test]
    fn matches_oracle_exhaustively() {
        for len in 1..=16 {
            for target in [7usize, 10, 13] {
                if target.abs_diff(len) > 12 {
                    continue;
                }
                for closed in 0..len {
                    let got = polish_indices(len, target, Some(closed));
                    assert_eq!(got, oracle(len, target, closed), "len={len} target={target} c={closed}");
                }
            }
        }
    }

    #[test]
    fn annotations_follow_frames() {
        let mut c = tagged_clip(4, Label::Blink);
        c.annotations[2].left_eye = EyeCenter::visible(3, 3);
        let p = polish_clip(&c, 7, 2).unwrap();
        for (f, a) in p.frames().iter().zip(p.annotations()) {
            let src = f.get(0, 0) as usize;
            assert_eq!(a.left_eye, c.annotations()[src].left_eye);
        }
        assert!(p.annotations().iter().enumerate().all(|(i, a)| a.frame_index == i));
    }

    #[test]
    fn non_blink_is_center_aligned() {
        let c = tagged_clip(14, Label::NonBlink);
        let p = polish_clip(&c, 10, 999).unwrap();
        assert_eq!(sources(&p), (2..12).collect::<Vec<_>>());
        let c = tagged_clip(7, Label::NonBlink);
        let p = polish_clip(&c, 10, 0).unwrap();
        assert_eq!(sources(&p), vec![0, 0, 0, 1, 2, 3, 4, 5, 6, 6]);
    }

    #[test]
    fn invalid_arguments() {
        let c = tagged_clip(5, Label::Blink);
        assert!(polish_clip(&c, 0, 2).is_err());
        assert!(polish_clip(&c, 10, 5).is_err());
    }

    proptest! {
        #[test]
        fn output_length_and_idempotence(len in 1usize..=30, target in 1usize..=20, closed_frac in 0.0f64..1.0) {
            let closed = ((len as f64) * closed_frac) as usize;
            let c = tagged_clip(len, Label::Blink);
            let p = polish_clip(&c, target, closed).unwrap();
            prop_assert_eq!(p.len(), target);
            let pos = sources(&p).iter().position(|&s| s == closed);
            prop_assert!(pos.is_some(), "closed frame dropped");
            let again = polish_clip(&p, target, pos.unwrap()).unwrap();
            prop_assert_eq!(again, p);
        }
    }
}
