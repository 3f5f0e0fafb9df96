//! On-disk clip layout: `frame_0000.pgm`, `frame_0001.pgm`, ... (binary PGM,
//! maxval 255) plus `annotations.csv`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{AnnotationRecord, Clip, EyeCenter, FaceBox, GrayFrame, Label};
use crate::error::{Error, Result};

pub const ANNOTATION_HEADER: &str = "frame,face_x,face_y,face_w,face_h,lx,ly,rx,ry";

fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{index:04}.pgm"))
}

pub fn write_pgm(path: &Path, frame: &GrayFrame) -> Result<()> {
    let mut buf = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    buf.extend(frame.data().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|msg| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg,
    })
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayFrame, String> {
    let mut pos = 0usize;
    let mut next_token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of PGM header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = next_token()?;
    if magic != "P5" {
        return Err(format!("expected binary PGM (P5), found `{magic}`"));
    }
    let mut num = |what: &str| -> std::result::Result<usize, String> {
        next_token()?
            .parse::<usize>()
            .map_err(|e| format!("bad {what}: {e}"))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // exactly one whitespace byte separates the header from the raster
    let raster = &bytes[pos + 1..];
    if raster.len() < width * height {
        return Err(format!(
            "raster holds {} bytes, expected {}",
            raster.len(),
            width * height
        ));
    }
    let data = raster[..width * height].iter().map(|&b| b as f32).collect();
    GrayFrame::new(width, height, data).map_err(|e| e.to_string())
}

pub fn write_annotations(path: &Path, records: &[AnnotationRecord]) -> Result<()> {
    let mut out = String::with_capacity(40 * (records.len() + 1));
    out.push_str(ANNOTATION_HEADER);
    out.push('\n');
    for r in records {
        let b = r.face_box;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.frame_index, b.x, b.y, b.w, b.h, r.left_eye.x, r.left_eye.y, r.right_eye.x, r.right_eye.y
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == ANNOTATION_HEADER => {}
        _ => return Err(perr(1, format!("expected header `{ANNOTATION_HEADER}`"))),
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 9 {
            return Err(perr(i + 1, format!("expected 9 fields, found {}", fields.len())));
        }
        let frame_index = fields[0]
            .parse::<usize>()
            .map_err(|e| perr(i + 1, format!("bad frame index: {e}")))?;
        let mut v = [0i32; 8];
        for (k, f) in fields[1..].iter().enumerate() {
            v[k] = f
                .parse::<i32>()
                .map_err(|e| perr(i + 1, format!("bad integer `{f}`: {e}")))?;
        }
        records.push(AnnotationRecord {
            frame_index,
            face_box: FaceBox {
                x: v[0],
                y: v[1],
                w: v[2],
                h: v[3],
            },
            left_eye: EyeCenter::from_coords(v[4], v[5]),
            right_eye: EyeCenter::from_coords(v[6], v[7]),
        });
    }
    Ok(records)
}

/// Loads a clip directory. Annotations are validated against the frames; a
/// visible eye outside its face box is a load error.
pub fn read_clip_dir(dir: &Path, label: Label, source_id: &str) -> Result<Clip> {
    let ann_path = dir.join("annotations.csv");
    if !ann_path.is_file() {
        return Err(Error::MissingAsset(ann_path));
    }
    let annotations = read_annotations(&ann_path)?;
    let mut frames = Vec::with_capacity(annotations.len());
    for i in 0..annotations.len() {
        let p = frame_path(dir, i);
        if !p.is_file() {
            return Err(Error::MissingAsset(p));
        }
        frames.push(read_pgm(&p)?);
    }
    Clip::new(frames, annotations, label, source_id).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Parse {
            path: ann_path,
            line: 0,
            msg,
        },
        other => other,
    })
}

pub fn write_clip_dir(dir: &Path, clip: &Clip) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, frame) in clip.frames().iter().enumerate() {
        write_pgm(&frame_path(dir, i), frame)?;
    }
    let ann: Vec<AnnotationRecord> = clip
        .annotations()
        .iter()
        .enumerate()
        .map(|(i, a)| AnnotationRecord {
            frame_index: i,
            ..*a
        })
        .collect();
    write_annotations(&dir.join("annotations.csv"), &ann)?;
    // drop stale frames from a previous, longer clip in the same directory
    let mut i = clip.len();
    loop {
        let p = frame_path(dir, i);
        if !p.exists() {
            break;
        }
        fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
        i += 1;
    }
    Ok(())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
