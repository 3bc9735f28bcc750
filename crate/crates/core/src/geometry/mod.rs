//! Planar Delaunay triangulation and barycentric coordinates.
//!
//! Triangles are stored counter-clockwise in a y-up sense, i.e. with positive
//! [`orient2d`]. Landmarks live in y-down pixel coordinates, so on screen the
//! same triangles wind clockwise; nothing downstream depends on which.

mod delaunay;
mod locate;
pub mod predicates;

use std::fmt::Write as _;

use thiserror::Error;

use crate::Point2;

pub use delaunay::delaunay_triangulate;
pub use locate::{locate_point, PointLocator};
pub use predicates::orient2d;

/// Triangles with `|signed area|` at or below this are degenerate.
pub const EPS_AREA: f64 = 1e-12;
/// Points closer than this are duplicates.
pub const EPS_DUPLICATE: f64 = 1e-9;
/// Containment slack on barycentric weights.
pub const EPS_BARY: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all {0} points are collinear")]
    AllCollinear(usize),
    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("degenerate triangle {0:?}")]
    DegenerateTriangle([usize; 3]),
    #[error("triangle {triangle} references point {index} but only {len} points exist")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        len: usize,
    },
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("malformed triangulation file at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A point set with counter-clockwise triangle index triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub points: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// Wraps existing connectivity after checking indices and areas.
    pub fn from_parts(
        points: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, GeometryError> {
        for (t, tri) in triangles.iter().enumerate() {
            for &index in tri {
                if index >= points.len() {
                    return Err(GeometryError::IndexOutOfRange {
                        triangle: t,
                        index,
                        len: points.len(),
                    });
                }
            }
            let [a, b, c] = *tri;
            if orient2d(&points[a], &points[b], &points[c]) / 2.0 <= EPS_AREA {
                return Err(GeometryError::DegenerateTriangle(*tri));
            }
        }
        Ok(Self { points, triangles })
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.points[a], self.points[b], self.points[c]]
    }

    /// Sum of signed triangle areas.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| orient2d(&self.points[a], &self.points[b], &self.points[c]) / 2.0)
            .sum()
    }

    /// Plain-text dump: point count, one `x y` line per point, then one
    /// `i j k` line per triangle.
    pub fn to_tris_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.points.len());
        for p in &self.points {
            let _ = writeln!(out, "{:.6} {:.6}", p.x, p.y);
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(out, "{a} {b} {c}");
        }
        out
    }

    pub fn parse_tris(text: &str) -> Result<Self, GeometryError> {
        let err = |line: usize, message: &str| GeometryError::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (no, first) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        let n: usize = first.parse().map_err(|_| err(no, "expected point count"))?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let (no, line) = lines.next().ok_or_else(|| err(no, "missing point"))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err(no, "non-numeric coordinate"))?;
            if v.len() != 2 {
                return Err(err(no, "expected `x y`"));
            }
            points.push(Point2::new(v[0], v[1]));
        }
        let mut triangles = Vec::new();
        for (no, line) in lines {
            let v: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err(no, "non-integer index"))?;
            if v.len() != 3 {
                return Err(err(no, "expected `i j k`"));
            }
            triangles.push([v[0], v[1], v[2]]);
        }
        Self::from_parts(points, triangles)
    }
}

/// Weights `(w0, w1, w2)` with `w0 + w1 + w2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricWeights {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

impl BarycentricWeights {
    pub fn is_inside(&self, eps: f64) -> bool {
        self.w0 >= -eps && self.w1 >= -eps && self.w2 >= -eps
    }

    pub fn apply(&self, a: &Point2, b: &Point2, c: &Point2) -> Point2 {
        Point2::new(
            self.w0 * a.x + self.w1 * b.x + self.w2 * c.x,
            self.w0 * a.y + self.w1 * b.y + self.w2 * c.y,
        )
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w0, self.w1, self.w2]
    }
}

#[inline]
pub(crate) fn barycentric_with_det(
    a: &Point2,
    b: &Point2,
    c: &Point2,
    det: f64,
    p: &Point2,
) -> BarycentricWeights {
    let w1 = orient2d(a, p, c) / det;
    let w2 = orient2d(a, b, p) / det;
    BarycentricWeights {
        w0: 1.0 - w1 - w2,
        w1,
        w2,
    }
}

#[inline]
pub(crate) fn is_degenerate(det: f64) -> bool {
    (det / 2.0).abs() <= EPS_AREA
}

/// Barycentric coordinates of `p` with respect to triangle `(a, b, c)`.
pub fn barycentric_coords(
    a: &Point2,
    b: &Point2,
    c: &Point2,
    p: &Point2,
) -> Result<BarycentricWeights, GeometryError> {
    let det = orient2d(a, b, c);
    if is_degenerate(det) {
        return Err(GeometryError::DegenerateTriangle([0, 1, 2]));
    }
    Ok(barycentric_with_det(a, b, c, det, p))
}

/// Strict in-circle test; the winding of `(a, b, c)` does not matter.
pub fn circumcircle_contains(
    a: &Point2,
    b: &Point2,
    c: &Point2,
    p: &Point2,
) -> Result<bool, GeometryError> {
    let orient = orient2d(a, b, c);
    if is_degenerate(orient) {
        return Err(GeometryError::DegenerateTriangle([0, 1, 2]));
    }
    let sign = predicates::incircle_sign(a, b, c, p);
    Ok(if orient > 0.0 { sign > 0 } else { sign < 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn circumcircle_center_and_rim() {
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        assert!(circumcircle_contains(&a, &b, &c, &p(0.5, 0.5)).unwrap());
        assert!(!circumcircle_contains(&a, &b, &c, &p(1.0, 1.0)).unwrap());
        // clockwise input gives the same answers
        assert!(circumcircle_contains(&a, &c, &b, &p(0.5, 0.5)).unwrap());
        assert!(!circumcircle_contains(&a, &c, &b, &p(1.0, 1.0)).unwrap());
        assert!(!circumcircle_contains(&a, &b, &c, &p(2.0, 2.0)).unwrap());
    }

    #[test]
    fn degenerate_triangles_are_errors() {
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0));
        assert!(circumcircle_contains(&a, &b, &c, &p(0.0, 1.0)).is_err());
        assert!(barycentric_coords(&a, &b, &c, &p(0.0, 1.0)).is_err());
    }

    #[test]
    fn barycentric_examples() {
        let (a, b, c) = (p(0.0, 0.0), p(2.0, 0.0), p(0.0, 2.0));
        let w = barycentric_coords(&a, &b, &c, &a).unwrap();
        assert_eq!(w.as_array(), [1.0, 0.0, 0.0]);

        let centroid = p(2.0 / 3.0, 2.0 / 3.0);
        let w = barycentric_coords(&a, &b, &c, &centroid).unwrap();
        for v in w.as_array() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }

        let w = barycentric_coords(&a, &b, &c, &p(1.0, 0.0)).unwrap();
        assert_eq!(w.as_array(), [0.5, 0.5, 0.0]);
    }

    #[test]
    fn tris_round_trip() {
        let tri =
            Triangulation::from_parts(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)], vec![[0, 1, 2]])
                .unwrap();
        let text = tri.to_tris_string();
        assert_eq!(text.lines().next(), Some("3"));
        assert_eq!(Triangulation::parse_tris(&text).unwrap(), tri);
    }

    #[test]
    fn from_parts_checks_indices() {
        let err = Triangulation::from_parts(vec![p(0.0, 0.0)], vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, GeometryError::IndexOutOfRange { .. }));
    }
}
