//! Orientation and in-circle predicates in double precision.
//!
//! Both predicates compare the determinant against a bound proportional to
//! the sum of the absolute values of its terms; anything inside the bound is
//! reported as exactly zero and left to the caller's tie-break.

use crate::Point2;

const ORIENT_GUARD: f64 = 1e-14;
const INCIRCLE_GUARD: f64 = 1e-13;

/// Twice the signed area of `(a, b, c)`; positive when the turn a → b → c is
/// counter-clockwise in a y-up frame.
#[inline]
pub fn orient2d(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

pub fn orient_sign(a: &Point2, b: &Point2, c: &Point2) -> i8 {
    let l = (b.x - a.x) * (c.y - a.y);
    let r = (b.y - a.y) * (c.x - a.x);
    let det = l - r;
    if det.abs() <= ORIENT_GUARD * (l.abs() + r.abs()) {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    }
}

/// Raw in-circle determinant. Positive when `d` is inside the circle through
/// `a, b, c` given counter-clockwise `a, b, c`.
pub fn incircle_det(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> (f64, f64) {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);

    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;

    let bc = bdx * cdy - cdx * bdy;
    let ca = cdx * ady - adx * cdy;
    let ab = adx * bdy - bdx * ady;

    let det = alift * bc + blift * ca + clift * ab;
    let permanent = alift * ((bdx * cdy).abs() + (cdx * bdy).abs())
        + blift * ((cdx * ady).abs() + (adx * cdy).abs())
        + clift * ((adx * bdy).abs() + (bdx * ady).abs());
    (det, permanent)
}

pub fn incircle_sign(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> i8 {
    let (det, permanent) = incircle_det(a, b, c, d);
    if det.abs() <= INCIRCLE_GUARD * permanent {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    }
}

/// In-circle test for the Delaunay builder with a symbolic tie-break.
///
/// `tri` must be counter-clockwise. Cocircular ties are resolved as if every
/// point `i` were lifted onto the paraboloid with an extra infinitesimal
/// height `eps^(i + 1)`: the lowest index among the four points decides.
/// If that index is `d` the answer is "outside"; otherwise the answer is the
/// sign of `d`'s barycentric coordinate at that vertex.
pub fn incircle_perturbed(points: &[Point2], tri: [usize; 3], d: usize) -> bool {
    let [ia, ib, ic] = tri;
    let (a, b, c, p) = (&points[ia], &points[ib], &points[ic], &points[d]);
    match incircle_sign(a, b, c, p) {
        1 => return true,
        -1 => return false,
        _ => {}
    }
    let lowest = ia.min(ib).min(ic).min(d);
    if lowest == d {
        return false;
    }
    let weight = if lowest == ia {
        orient2d(p, b, c)
    } else if lowest == ib {
        orient2d(a, p, c)
    } else {
        orient2d(a, b, p)
    };
    weight > 0.0
}
