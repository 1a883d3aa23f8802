//! Planar point sets per time point, the motion costs built from them, and
//! the frame CSV interchange format (`frame,object_id,x,y`).
//!
//! Object identity is positional: entry `i` of every frame is the same
//! physical object, so the ground-truth association is always the identity.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::CostMatrix;
use crate::tensor::CostTensor3;

/// Coordinates of `n` labeled objects at one time point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    positions: Vec<[f64; 2]>,
    frame_index: i64,
}

impl PointSet {
    pub fn new(positions: Vec<[f64; 2]>, frame_index: i64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter(
                "point set needs at least one object".into(),
            ));
        }
        for (i, p) in positions.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "object {i} has non-finite coordinates ({}, {})",
                    p[0], p[1]
                )));
            }
        }
        Ok(Self {
            positions,
            frame_index,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn frame_index(&self) -> i64 {
        self.frame_index
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    #[inline]
    pub fn get(&self, i: usize) -> [f64; 2] {
        self.positions[i]
    }
}

/// Consecutive frames with a constant object count.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<PointSet>,
}

impl FrameSequence {
    pub fn new(frames: Vec<PointSet>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidParameter(
                "frame sequence needs at least two frames".into(),
            ));
        }
        let n = frames[0].len();
        for (t, frame) in frames.iter().enumerate() {
            if frame.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "object count across frames",
                    expected: n,
                    found: frame.len(),
                });
            }
            if t > 0 && frame.frame_index() != frames[t - 1].frame_index() + 1 {
                return Err(Error::InvalidParameter(format!(
                    "frame indices must be consecutive, got {} after {}",
                    frame.frame_index(),
                    frames[t - 1].frame_index()
                )));
            }
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Number of objects per frame.
    pub fn n(&self) -> usize {
        self.frames[0].len()
    }

    pub fn frame(&self, t: usize) -> &PointSet {
        &self.frames[t]
    }

    pub fn frames(&self) -> &[PointSet] {
        &self.frames
    }
}

#[inline]
fn norm2(dx: f64, dy: f64) -> f64 {
    (dx * dx + dy * dy).sqrt()
}

/// Distance matrix between objects at consecutive time points:
/// `m_ij = ||b_j - a_i||`. With unit frame spacing this is a speed.
pub fn speed_cost(a: &PointSet, b: &PointSet) -> Result<CostMatrix> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "speed cost point sets",
            expected: a.len(),
            found: b.len(),
        });
    }
    CostMatrix::from_fn(a.len(), |i, j| {
        let p = a.get(i);
        let q = b.get(j);
        norm2(q[0] - p[0], q[1] - p[1])
    })
}

/// Velocity-change tensor over candidate triples:
/// `m_ijk = ||(c_k - b_j) - (b_j - a_i)|| = ||c_k - 2 b_j + a_i||`.
pub fn acceleration_cost(a: &PointSet, b: &PointSet, c: &PointSet) -> Result<CostTensor3> {
    if a.len() != b.len() || b.len() != c.len() {
        return Err(Error::DimensionMismatch {
            context: "acceleration cost point sets",
            expected: a.len(),
            found: if a.len() != b.len() { b.len() } else { c.len() },
        });
    }
    CostTensor3::from_fn(a.len(), |i, j, k| {
        let p = a.get(i);
        let q = b.get(j);
        let r = c.get(k);
        norm2(r[0] - 2.0 * q[0] + p[0], r[1] - 2.0 * q[1] + p[1])
    })
}

pub const FRAMES_CSV_HEADER: &str = "frame,object_id,x,y";

/// Serializes a frame sequence in the interchange format. Coordinates use
/// the shortest decimal form that round-trips to the same `f64`.
pub fn frames_to_csv(seq: &FrameSequence) -> String {
    let mut out = String::from(FRAMES_CSV_HEADER);
    out.push('\n');
    for frame in seq.frames() {
        for (id, p) in frame.positions().iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", frame.frame_index(), id, p[0], p[1]));
        }
    }
    out
}

pub fn write_frames_csv(seq: &FrameSequence, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(frames_to_csv(seq).as_bytes())
        .and_then(|_| writer.flush())
        .map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
}

/// Parses the interchange format, enforcing the header, row ordering
/// (frame-major, object ids 0..n-1) and consecutive frame indices.
pub fn frames_from_csv(text: &str, label: &str) -> Result<FrameSequence> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: label.to_string(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    if header.trim_end() != FRAMES_CSV_HEADER {
        return Err(parse_err(
            1,
            format!("expected header `{FRAMES_CSV_HEADER}`, got `{header}`"),
        ));
    }

    let mut frames: Vec<PointSet> = Vec::new();
    let mut current: Option<(i64, Vec<[f64; 2]>)> = None;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                lineno,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let frame: i64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad frame index `{}`", fields[0])))?;
        let object: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad object id `{}`", fields[1])))?;
        let x: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad x coordinate `{}`", fields[2])))?;
        let y: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad y coordinate `{}`", fields[3])))?;

        match &mut current {
            Some((f, positions)) if *f == frame => {
                if object != positions.len() {
                    return Err(parse_err(
                        lineno,
                        format!("expected object id {}, got {object}", positions.len()),
                    ));
                }
                positions.push([x, y]);
            }
            state => {
                if let Some((f, positions)) = state.take() {
                    if frame != f + 1 {
                        return Err(parse_err(
                            lineno,
                            format!("expected frame {} next, got {frame}", f + 1),
                        ));
                    }
                    frames.push(PointSet::new(positions, f)?);
                }
                if object != 0 {
                    return Err(parse_err(
                        lineno,
                        format!("first row of frame {frame} must have object id 0, got {object}"),
                    ));
                }
                *state = Some((frame, vec![[x, y]]));
            }
        }
    }
    if let Some((f, positions)) = current {
        frames.push(PointSet::new(positions, f)?);
    }
    FrameSequence::new(frames)
}

pub fn read_frames_csv(path: &Path) -> Result<FrameSequence> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut text = String::new();
    BufReader::new(file)
        .read_to_string(&mut text)
        .map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    frames_from_csv(&text, &path.display().to_string())
}
