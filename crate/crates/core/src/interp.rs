//! Scalar blending shared by landmark, mesh and colour interpolation.
//!
//! The weights for `t` are `(fl(1 - t), 1 - fl(1 - t))`. Both sum to one
//! exactly, and the pair produced for `fl(1 - t)` is the same pair swapped, so
//! `blend(a, b, t) == blend(b, a, 1 - t)` holds bitwise.

/// Weights `(w_a, w_b)` applied to the start and goal value.
#[inline]
pub fn weights(t: f64) -> (f64, f64) {
    let wa = 1.0 - t;
    (wa, 1.0 - wa)
}

/// Blends two scalars with precomputed weights. Equal inputs are returned
/// unchanged, which keeps endpoints and fixed points bitwise stable.
#[inline]
pub fn blend(a: f64, b: f64, wa: f64, wb: f64) -> f64 {
    if a == b || wb == 0.0 {
        a
    } else if wa == 0.0 {
        b
    } else {
        wa * a + wb * b
    }
}

#[inline]
pub fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let (wa, wb) = weights(t);
    blend(a, b, wa, wb)
}

/// Checks that an interpolation factor is a finite value in `[0, 1]`.
#[inline]
pub fn valid_factor(t: f64) -> bool {
    (0.0..=1.0).contains(&t)
}
