//! Parametric positions of the 68 ibug landmarks on the synthetic head.
//!
//! Coordinates are in the model's `(u, v)` surface parameters, both spanning
//! `[-1, 1]` with `u` to the viewer's right and `v` up. Index order follows
//! the ibug convention: jaw 0-16, brows 17-26, nose 27-35, eyes 36-47,
//! outer lip 48-59, inner lip 60-67.

use std::f64::consts::PI;

fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64, angle: f64) -> (f64, f64) {
    (cx + rx * angle.cos(), cy + ry * angle.sin())
}

pub fn ibug_parameters() -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(68);
    // jaw: from the viewer's left ear, under the chin, to the right ear
    for k in 0..17 {
        let a = PI * k as f64 / 16.0;
        pts.push((-0.55 * a.cos(), 0.15 - 0.95 * a.sin()));
    }
    // brows
    for side in [-1.0, 1.0] {
        for k in 0..5 {
            let s = k as f64 / 4.0;
            let s = if side < 0.0 { s } else { 1.0 - s };
            let u = side * (0.45 - 0.35 * s);
            let v = 0.36 + 0.05 * (PI * s).sin();
            pts.push((u, v));
        }
    }
    // nose bridge
    for k in 0..4 {
        pts.push((0.0, 0.25 - 0.1 * k as f64));
    }
    // nostrils and tip
    for k in 0..5 {
        let u = -0.12 + 0.06 * k as f64;
        pts.push((u, -0.15 - 0.03 * (1.0 - (u / 0.12).powi(2))));
    }
    // eyes, each starting at its leftmost corner: corner, two upper, corner, two lower
    let eye_angles = [
        PI,
        2.0 * PI / 3.0,
        PI / 3.0,
        0.0,
        -PI / 3.0,
        -2.0 * PI / 3.0,
    ];
    for a in eye_angles {
        pts.push(ellipse(-0.27, 0.2, 0.09, 0.04, a));
    }
    for a in eye_angles {
        pts.push(ellipse(0.27, 0.2, 0.09, 0.04, a));
    }
    // outer lip: left corner, across the top to the right corner, back along the bottom
    for k in 0..12 {
        let a = PI - 2.0 * PI * k as f64 / 12.0;
        pts.push(ellipse(0.0, -0.42, 0.22, 0.09, a));
    }
    // inner lip: left corner, top three, right corner, bottom three
    for k in 0..8 {
        let a = PI - 2.0 * PI * k as f64 / 8.0;
        pts.push(ellipse(0.0, -0.42, 0.14, 0.035, a));
    }
    pts
}
