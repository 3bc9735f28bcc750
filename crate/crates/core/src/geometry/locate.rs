use super::Triangulation;
use super::{barycentric_with_det, is_degenerate, orient2d, BarycentricWeights, EPS_BARY};
use crate::Point2;

/// First triangle (lowest index) containing `p`, boundary included.
pub fn locate_point(tri: &Triangulation, p: &Point2) -> Option<usize> {
    tri.triangles.iter().position(|&[a, b, c]| {
        let (a, b, c) = (&tri.points[a], &tri.points[b], &tri.points[c]);
        let det = orient2d(a, b, c);
        !is_degenerate(det) && barycentric_with_det(a, b, c, det, p).is_inside(EPS_BARY)
    })
}

#[derive(Debug, Clone)]
struct Cached {
    a: Point2,
    b: Point2,
    c: Point2,
    det: f64,
}

/// Uniform-grid index over an arbitrary triangle list.
///
/// Answers the same queries as [`locate_point`] (lowest containing triangle
/// wins) without scanning every triangle. Degenerate triangles are never
/// reported and are listed in [`PointLocator::skipped`].
#[derive(Debug, Clone)]
pub struct PointLocator {
    tris: Vec<Option<Cached>>,
    origin: Point2,
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<u32>>,
    skipped: Vec<usize>,
}

impl PointLocator {
    pub fn new(points: &[Point2], triangles: &[[usize; 3]]) -> Self {
        let mut skipped = Vec::new();
        let tris: Vec<Option<Cached>> = triangles
            .iter()
            .enumerate()
            .map(|(i, &[a, b, c])| {
                let (a, b, c) = (points[a], points[b], points[c]);
                let det = orient2d(&a, &b, &c);
                if is_degenerate(det) {
                    skipped.push(i);
                    None
                } else {
                    Some(Cached { a, b, c, det })
                }
            })
            .collect();

        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for t in tris.iter().flatten() {
            for v in [t.a, t.b, t.c] {
                lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
                hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
            }
        }
        if !lo.x.is_finite() {
            return Self {
                tris,
                origin: Point2::origin(),
                cell: 1.0,
                cols: 0,
                rows: 0,
                cells: Vec::new(),
                skipped,
            };
        }
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let margin = extent * 1e-9;
        lo = Point2::new(lo.x - margin, lo.y - margin);
        hi = Point2::new(hi.x + margin, hi.y + margin);
        let per_side = ((triangles.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let cell = ((hi.x - lo.x).max(hi.y - lo.y) / per_side as f64).max(1e-12);
        let cols = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let rows = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); cols * rows];
        for (i, t) in tris.iter().enumerate() {
            let Some(t) = t else { continue };
            let min_x = t.a.x.min(t.b.x).min(t.c.x) - margin;
            let max_x = t.a.x.max(t.b.x).max(t.c.x) + margin;
            let min_y = t.a.y.min(t.b.y).min(t.c.y) - margin;
            let max_y = t.a.y.max(t.b.y).max(t.c.y) + margin;
            let c0 = (((min_x - lo.x) / cell).floor().max(0.0) as usize).min(cols - 1);
            let c1 = (((max_x - lo.x) / cell).floor().max(0.0) as usize).min(cols - 1);
            let r0 = (((min_y - lo.y) / cell).floor().max(0.0) as usize).min(rows - 1);
            let r1 = (((max_y - lo.y) / cell).floor().max(0.0) as usize).min(rows - 1);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    cells[r * cols + c].push(i as u32);
                }
            }
        }
        Self {
            tris,
            origin: lo,
            cell,
            cols,
            rows,
            cells,
            skipped,
        }
    }

    pub fn from_triangulation(tri: &Triangulation) -> Self {
        Self::new(&tri.points, &tri.triangles)
    }

    /// Indices of triangles ignored because they are degenerate.
    pub fn skipped(&self) -> &[usize] {
        &self.skipped
    }

    pub fn locate(&self, p: &Point2) -> Option<usize> {
        self.locate_with_weights(p).map(|(i, _)| i)
    }

    pub fn locate_with_weights(&self, p: &Point2) -> Option<(usize, BarycentricWeights)> {
        if self.cols == 0 {
            return None;
        }
        let fx = (p.x - self.origin.x) / self.cell;
        let fy = (p.y - self.origin.y) / self.cell;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (c, r) = (fx as usize, fy as usize);
        if c >= self.cols || r >= self.rows {
            return None;
        }
        self.cells[r * self.cols + c].iter().find_map(|&i| {
            let t = self.tris[i as usize].as_ref()?;
            let w = barycentric_with_det(&t.a, &t.b, &t.c, t.det, p);
            w.is_inside(EPS_BARY).then_some((i as usize, w))
        })
    }
}
