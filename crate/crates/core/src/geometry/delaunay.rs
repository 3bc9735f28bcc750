//! Bowyer–Watson insertion with a single ghost vertex at infinity.
//!
//! The running triangulation always covers the convex hull of the inserted
//! points. Every hull edge `a → b` (interior on the left) carries a ghost
//! triangle `[b, a, GHOST]`, whose "circumcircle" is the open half-plane
//! outside the edge plus the open segment itself. A new point outside
//! the hull therefore invalidates exactly the ghosts of the hull edges it can
//! see, and the cavity retriangulation extends the hull in the same pass.

use std::collections::HashSet;

use super::predicates::{incircle_perturbed, orient2d, orient_sign};
use super::{GeometryError, Triangulation, EPS_AREA, EPS_DUPLICATE};
use crate::Point2;

const GHOST: usize = usize::MAX;

fn check_input(points: &[Point2]) -> Result<(), GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    if let Some(i) = points
        .iter()
        .position(|p| !p.x.is_finite() || !p.y.is_finite())
    {
        return Err(GeometryError::NonFinite(i));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].x.total_cmp(&points[j].x).then(i.cmp(&j)));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > EPS_DUPLICATE {
                break;
            }
            if (points[j] - points[i]).norm() <= EPS_DUPLICATE {
                return Err(GeometryError::DuplicatePoints(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

/// Picks the first non-degenerate triangle in input order, made
/// counter-clockwise.
fn seed_triangle(points: &[Point2]) -> Result<[usize; 3], GeometryError> {
    let a = 0;
    let b = 1;
    for c in 2..points.len() {
        let o = orient2d(&points[a], &points[b], &points[c]);
        if orient_sign(&points[a], &points[b], &points[c]) != 0 && (o / 2.0).abs() > EPS_AREA {
            return Ok(if o > 0.0 { [a, b, c] } else { [a, c, b] });
        }
    }
    Err(GeometryError::AllCollinear(points.len()))
}

fn in_conflict(points: &[Point2], tri: [usize; 3], p: usize) -> bool {
    if tri[2] != GHOST {
        return incircle_perturbed(points, tri, p);
    }
    let (a, b, q) = (&points[tri[0]], &points[tri[1]], &points[p]);
    match orient_sign(a, b, q) {
        1 => true,
        -1 => false,
        _ => {
            let ab = b - a;
            (q - a).dot(&ab) > 0.0 && (q - b).dot(&(-ab)) > 0.0
        }
    }
}

/// Delaunay triangulation of `points`. Output triangles are
/// counter-clockwise, each rotated to start at its smallest index, and sorted.
pub fn delaunay_triangulate(points: &[Point2]) -> Result<Triangulation, GeometryError> {
    check_input(points)?;
    let seed = seed_triangle(points)?;
    let [a, b, c] = seed;
    let mut tris: Vec<[usize; 3]> = vec![seed, [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];

    let mut bad_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut keep = Vec::with_capacity(tris.len());
    for p in (0..points.len()).filter(|i| !seed.contains(i)) {
        bad_edges.clear();
        keep.clear();
        for &tri in &tris {
            if in_conflict(points, tri, p) {
                bad_edges.insert((tri[0], tri[1]));
                bad_edges.insert((tri[1], tri[2]));
                bad_edges.insert((tri[2], tri[0]));
            } else {
                keep.push(tri);
            }
        }
        debug_assert!(!bad_edges.is_empty(), "point {p} conflicts with nothing");
        let mut boundary: Vec<(usize, usize)> = bad_edges
            .iter()
            .copied()
            .filter(|&(u, v)| !bad_edges.contains(&(v, u)))
            .collect();
        boundary.sort_unstable();
        for (u, v) in boundary {
            keep.push(if u == GHOST {
                [v, p, GHOST]
            } else if v == GHOST {
                [p, u, GHOST]
            } else {
                [u, v, p]
            });
        }
        std::mem::swap(&mut tris, &mut keep);
    }

    let mut triangles: Vec<[usize; 3]> = tris
        .into_iter()
        .filter(|t| t[2] != GHOST)
        .map(|t| {
            let r = (0..3).min_by_key(|&k| t[k]).unwrap();
            [t[r], t[(r + 1) % 3], t[(r + 2) % 3]]
        })
        .collect();
    triangles.sort_unstable();
    for &[i, j, k] in &triangles {
        if orient2d(&points[i], &points[j], &points[k]) / 2.0 <= EPS_AREA {
            return Err(GeometryError::DegenerateTriangle([i, j, k]));
        }
    }
    Ok(Triangulation {
        points: points.to_vec(),
        triangles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn three_points_make_one_triangle() {
        let t = delaunay_triangulate(&[p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)]).unwrap();
        assert_eq!(t.triangles, vec![[0, 2, 1]]);
    }

    #[test]
    fn unit_square_uses_diagonal_away_from_first_corner() {
        let pts = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        let t = delaunay_triangulate(&pts).unwrap();
        assert_eq!(t.triangles, vec![[0, 1, 3], [1, 2, 3]]);
        // relabelled so corner (1, 1) comes first: diagonal flips
        let pts = [p(1.0, 1.0), p(0.0, 1.0), p(0.0, 0.0), p(1.0, 0.0)];
        let t = delaunay_triangulate(&pts).unwrap();
        assert_eq!(t.triangles, vec![[0, 1, 3], [1, 2, 3]]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            delaunay_triangulate(&[p(0.0, 0.0), p(1.0, 0.0)]),
            Err(GeometryError::TooFewPoints(2))
        );
        assert_eq!(
            delaunay_triangulate(&[p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0), p(-3.0, -3.0)]),
            Err(GeometryError::AllCollinear(4))
        );
        assert_eq!(
            delaunay_triangulate(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)]),
            Err(GeometryError::DuplicatePoints(1, 3))
        );
    }

    #[test]
    fn collinear_prefix_then_offset_point() {
        let pts = [
            p(0.0, 0.0),
            p(1.0, 0.0),
            p(2.0, 0.0),
            p(3.0, 0.0),
            p(1.5, 1.0),
        ];
        let t = delaunay_triangulate(&pts).unwrap();
        assert_eq!(t.triangles.len(), 3);
        assert!((t.area() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn grid_with_hull_collinearities() {
        let pts: Vec<Point2> = (0..5)
            .flat_map(|i| (0..4).map(move |j| p(i as f64, j as f64)))
            .collect();
        let t = delaunay_triangulate(&pts).unwrap();
        // n = 20, 14 hull points
        assert_eq!(t.triangles.len(), 2 * 20 - 2 - 14);
        assert!((t.area() - 12.0).abs() < 1e-12);
    }
}
