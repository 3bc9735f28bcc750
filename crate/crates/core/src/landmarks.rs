//! Facial landmark sets and the `.pts` text format.
//!
//! A `.pts` file looks like
//!
//! ```text
//! version: 1
//! n_points: 68
//! {
//! 123.000000 245.500000
//! ...
//! }
//! ```
//!
//! Image dimensions are not part of the file; attach them with
//! [`LandmarkSet::with_image_size`].

use std::fmt::Write as _;

use thiserror::Error;

use crate::Point2;

/// Number of points in an ibug face annotation.
pub const IBUG_POINT_COUNT: usize = 68;
/// Number of image-frame anchors appended by [`add_boundary_anchors`].
pub const ANCHOR_COUNT: usize = 8;
/// Inward offset applied to landmarks that touch the image border.
pub const EDGE_NUDGE_PX: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum LandmarkError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("n_points declares {declared} points but {found} were listed")]
    CountMismatch { declared: usize, found: usize },
    #[error("point {index} ({x}, {y}) lies outside the {width}x{height} image")]
    OutOfBounds {
        index: usize,
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },
    #[error("landmark set has no image size attached")]
    MissingImageSize,
    #[error("image size must be at least 1x1, got {0}x{1}")]
    EmptyImage(u32, u32),
}

/// Ordered 2D feature points in pixel coordinates (origin top-left, y down).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkSet {
    pub points: Vec<Point2>,
    size: Option<(u32, u32)>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point2>) -> Self {
        Self { points, size: None }
    }

    /// Attaches image dimensions, checking every point lies in `[0, w] x [0, h]`.
    pub fn with_image_size(mut self, width: u32, height: u32) -> Result<Self, LandmarkError> {
        if width == 0 || height == 0 {
            return Err(LandmarkError::EmptyImage(width, height));
        }
        for (index, p) in self.points.iter().enumerate() {
            let inside = p.x >= 0.0 && p.y >= 0.0 && p.x <= width as f64 && p.y <= height as f64;
            if !inside {
                return Err(LandmarkError::OutOfBounds {
                    index,
                    x: p.x,
                    y: p.y,
                    width,
                    height,
                });
            }
        }
        self.size = Some((width, height));
        Ok(self)
    }

    pub fn image_size(&self) -> Option<(u32, u32)> {
        self.size
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when the last eight points are exactly the frame anchors.
    pub fn is_boundary_augmented(&self) -> bool {
        let Some((w, h)) = self.size else {
            return false;
        };
        if self.points.len() < ANCHOR_COUNT {
            return false;
        }
        let tail = &self.points[self.points.len() - ANCHOR_COUNT..];
        tail == anchor_points(w, h).as_slice()
    }

    /// Moves points closer than [`EDGE_NUDGE_PX`] to the border onto the
    /// line half a pixel inside it, so they cannot coincide with or be
    /// collinear with the frame anchors.
    pub fn nudged_inward(&self) -> Result<Self, LandmarkError> {
        let (w, h) = self.size.ok_or(LandmarkError::MissingImageSize)?;
        let (w, h) = (w as f64, h as f64);
        let clamp = |v: f64, hi: f64| {
            if hi <= 2.0 * EDGE_NUDGE_PX {
                hi / 2.0
            } else {
                v.clamp(EDGE_NUDGE_PX, hi - EDGE_NUDGE_PX)
            }
        };
        let points = self
            .points
            .iter()
            .map(|p| Point2::new(clamp(p.x, w), clamp(p.y, h)))
            .collect();
        Ok(Self {
            points,
            size: self.size,
        })
    }

    /// Scales points by `(sx, sy)` and sets a new image size.
    pub fn rescaled(&self, width: u32, height: u32) -> Result<Self, LandmarkError> {
        let (w0, h0) = self.size.ok_or(LandmarkError::MissingImageSize)?;
        let sx = width as f64 / w0 as f64;
        let sy = height as f64 / h0 as f64;
        let points = self
            .points
            .iter()
            .map(|p| Point2::new(p.x * sx, p.y * sy))
            .collect();
        LandmarkSet::new(points).with_image_size(width, height)
    }
}

/// Frame anchors in order TL, TR, BR, BL, top-mid, right-mid, bottom-mid, left-mid.
pub fn anchor_points(width: u32, height: u32) -> [Point2; ANCHOR_COUNT] {
    let (w, h) = (width as f64, height as f64);
    [
        Point2::new(0.0, 0.0),
        Point2::new(w, 0.0),
        Point2::new(w, h),
        Point2::new(0.0, h),
        Point2::new(w / 2.0, 0.0),
        Point2::new(w, h / 2.0),
        Point2::new(w / 2.0, h),
        Point2::new(0.0, h / 2.0),
    ]
}

/// Appends the eight frame anchors after the existing points.
pub fn add_boundary_anchors(lm: &LandmarkSet) -> Result<LandmarkSet, LandmarkError> {
    let (w, h) = lm.size.ok_or(LandmarkError::MissingImageSize)?;
    let mut points = lm.points.clone();
    points.extend_from_slice(&anchor_points(w, h));
    Ok(LandmarkSet {
        points,
        size: lm.size,
    })
}

fn header_value<'a>(line: &'a str, key: &str, line_no: usize) -> Result<&'a str, LandmarkError> {
    let rest = line
        .trim()
        .strip_prefix(key)
        .and_then(|r| r.trim_start().strip_prefix(':'))
        .ok_or_else(|| LandmarkError::Parse {
            line: line_no,
            message: format!("expected `{key}: ...`, found `{}`", line.trim()),
        })?;
    Ok(rest.trim())
}

/// Parses a `.pts` file. The returned set has no image size attached.
pub fn parse_pts(text: &str) -> Result<LandmarkSet, LandmarkError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let eof = |line| LandmarkError::Parse {
        line,
        message: "unexpected end of file".into(),
    };

    let (no, line) = lines.next().ok_or_else(|| eof(1))?;
    let version = header_value(line, "version", no)?;
    if version.parse::<f64>().is_err() {
        return Err(LandmarkError::Parse {
            line: no,
            message: format!("invalid version `{version}`"),
        });
    }

    let (no, line) = lines.next().ok_or_else(|| eof(no + 1))?;
    let n_str = header_value(line, "n_points", no)?;
    let declared: usize = n_str.parse().map_err(|_| LandmarkError::Parse {
        line: no,
        message: format!("invalid point count `{n_str}`"),
    })?;

    let (no, line) = lines.next().ok_or_else(|| eof(no + 1))?;
    if line.trim() != "{" {
        return Err(LandmarkError::Parse {
            line: no,
            message: format!("expected `{{`, found `{}`", line.trim()),
        });
    }

    let mut points = Vec::with_capacity(declared);
    let mut last = no;
    let mut closed = false;
    for (no, line) in lines.by_ref() {
        last = no;
        let line = line.trim();
        if line == "}" {
            closed = true;
            break;
        }
        let mut fields = line.split_whitespace();
        let mut coord = || -> Result<f64, LandmarkError> {
            let field = fields.next().ok_or_else(|| LandmarkError::Parse {
                line: no,
                message: "expected two coordinates".into(),
            })?;
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| LandmarkError::Parse {
                    line: no,
                    message: format!("non-numeric coordinate `{field}`"),
                })
        };
        let x = coord()?;
        let y = coord()?;
        if fields.next().is_some() {
            return Err(LandmarkError::Parse {
                line: no,
                message: "expected exactly two coordinates".into(),
            });
        }
        points.push(Point2::new(x, y));
    }
    if !closed {
        return Err(LandmarkError::Parse {
            line: last + 1,
            message: "missing closing `}`".into(),
        });
    }
    if let Some((no, line)) = lines.next() {
        return Err(LandmarkError::Parse {
            line: no,
            message: format!("unexpected content after `}}`: `{}`", line.trim()),
        });
    }
    if points.len() != declared {
        return Err(LandmarkError::CountMismatch {
            declared,
            found: points.len(),
        });
    }
    Ok(LandmarkSet::new(points))
}

/// Serializes points with six decimal digits.
pub fn write_pts(lm: &LandmarkSet) -> String {
    let mut out = String::with_capacity(32 + lm.points.len() * 24);
    out.push_str("version: 1\n");
    let _ = writeln!(out, "n_points: {}", lm.points.len());
    out.push_str("{\n");
    for p in &lm.points {
        let _ = writeln!(out, "{:.6} {:.6}", p.x, p.y);
    }
    out.push_str("}\n");
    out
}
