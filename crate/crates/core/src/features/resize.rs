use crate::dataset::{EyeRegion, GrayFrame};
use crate::error::{Error, Result};

// Sample positions span the source edge to edge, so the first and last
// output pixels coincide with the first and last source pixels.
fn source_coord(i: usize, out: usize, src: usize) -> f64 {
    if out == 1 {
        (src as f64 - 1.0) / 2.0
    } else {
        i as f64 * (src as f64 - 1.0) / (out as f64 - 1.0)
    }
}

/// Bilinear resize to `out`.
pub fn resize_patch(patch: &GrayFrame, out: EyeRegion) -> Result<GrayFrame> {
    if out.height == 0 || out.width == 0 {
        return Err(Error::invalid(format!(
            "resize target {}x{} has a zero dimension",
            out.height, out.width
        )));
    }
    let (sw, sh) = (patch.width(), patch.height());
    if sw == out.width && sh == out.height {
        return Ok(patch.clone());
    }
    let xs: Vec<(usize, usize, f64)> = (0..out.width)
        .map(|i| {
            let s = source_coord(i, out.width, sw);
            let x0 = (s.floor() as usize).min(sw - 1);
            (x0, (x0 + 1).min(sw - 1), s - x0 as f64)
        })
        .collect();
    let mut data = Vec::with_capacity(out.width * out.height);
    for j in 0..out.height {
        let s = source_coord(j, out.height, sh);
        let y0 = (s.floor() as usize).min(sh - 1);
        let y1 = (y0 + 1).min(sh - 1);
        let fy = s - y0 as f64;
        for &(x0, x1, fx) in &xs {
            let top = patch.get(x0, y0) as f64 * (1.0 - fx) + patch.get(x1, y0) as f64 * fx;
            let bot = patch.get(x0, y1) as f64 * (1.0 - fx) + patch.get(x1, y1) as f64 * fx;
            let v = top * (1.0 - fy) + bot * fy;
            data.push(v.clamp(0.0, 255.0) as f32);
        }
    }
    GrayFrame::new(out.width, out.height, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_is_identity() {
        let p = GrayFrame::from_fn(5, 4, |x, y| (x * 10 + y) as f32).unwrap();
        let r = resize_patch(&p, EyeRegion { height: 4, width: 5 }).unwrap();
        assert_eq!(r, p);
    }

    #[test]
    fn constant_stays_constant() {
        let p = GrayFrame::filled(7, 3, 42.0).unwrap();
        for (h, w) in [(1, 1), (24, 24), (5, 13)] {
            let r = resize_patch(&p, EyeRegion { height: h, width: w }).unwrap();
            assert!(r.data().iter().all(|&v| v == 42.0));
        }
    }

    #[test]
    fn two_by_two_to_two_by_four() {
        // columns at source x = 0, 1/3, 2/3, 1
        let p = GrayFrame::new(2, 2, vec![0.0, 255.0, 0.0, 255.0]).unwrap();
        let r = resize_patch(&p, EyeRegion { height: 2, width: 4 }).unwrap();
        for y in 0..2 {
            assert_eq!(r.get(0, y), 0.0);
            assert_eq!(r.get(1, y), 85.0);
            assert_eq!(r.get(2, y), 170.0);
            assert_eq!(r.get(3, y), 255.0);
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        let p = GrayFrame::filled(2, 2, 0.0).unwrap();
        assert!(resize_patch(&p, EyeRegion { height: 0, width: 2 }).is_err());
    }
}
