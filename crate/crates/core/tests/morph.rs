mod common;

use common::{
    face_camera, grid_aligned_face_pair, pixel_at, procedural_texture, random_alpha, seeded,
    synthetic_face,
};
use facemorph::landmarks::add_boundary_anchors;
use facemorph::raster::to_unit;
use facemorph::{
    build_correspondence, delaunay_triangulate, interpolate_landmarks, synthesize_model,
    warp_blend, Image, LandmarkSet, MorphMapping, Point2, PointLocator,
};

fn prepare(points: Vec<Point2>, w: u32, h: u32) -> LandmarkSet {
    let lm = LandmarkSet::new(points).with_image_size(w, h).unwrap();
    add_boundary_anchors(&lm.nudged_inward().unwrap()).unwrap()
}

fn square_image(w: u32, h: u32, cx: u32, cy: u32, half: u32) -> Image {
    Image::from_fn(w, h, |x, y| {
        let inside = x + half >= cx && x <= cx + half && y + half >= cy && y <= cy + half;
        [if inside { 1.0 } else { 0.0 }; 3]
    })
    .unwrap()
}

/// Intensity-weighted mean column index.
fn centroid_x(img: &Image) -> f64 {
    let (mut sum, mut weight) = (0.0, 0.0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = to_unit(img.get(x, y)[0]);
            sum += v * x as f64;
            weight += v;
        }
    }
    sum / weight
}

#[test]
fn moving_square_centroid_follows_the_landmark() {
    let (w, h) = (80, 40);
    let a = square_image(w, h, 30, 20, 5);
    let b = square_image(w, h, 50, 20, 5);
    // landmark on the square centre (pixel 30 has its centre at 30.5) and
    // on its corners
    let feature = |cx: f64| {
        vec![
            Point2::new(cx + 0.5, 20.5),
            Point2::new(cx - 5.0, 15.0),
            Point2::new(cx + 6.0, 15.0),
            Point2::new(cx + 6.0, 26.0),
            Point2::new(cx - 5.0, 26.0),
        ]
    };
    let mapping =
        build_correspondence(&prepare(feature(30.0), w, h), &prepare(feature(50.0), w, h)).unwrap();
    assert!((centroid_x(&a) - 30.0).abs() < 1e-12);
    let mid = warp_blend(&a, &b, &mapping, 0.5).unwrap();
    let c = centroid_x(&mid);
    assert!((c - 40.0).abs() <= 0.5, "centroid {c}");
    for (t, expect) in [(0.25, 35.0), (0.75, 45.0)] {
        let c = centroid_x(&warp_blend(&a, &b, &mapping, t).unwrap());
        assert!((c - expect).abs() <= 0.5, "t = {t}: centroid {c}");
    }
}

#[test]
fn rigid_translation_is_reproduced_inside_the_moving_region() {
    let (w, h) = (96, 96);
    let a = procedural_texture(96, 0.4);
    let (dx, dy) = (6.0, -4.0);
    let b = Image::from_fn(w, h, |x, y| {
        let sx = (x as i64 - dx as i64).clamp(0, w as i64 - 1) as u32;
        let sy = (y as i64 - dy as i64).clamp(0, h as i64 - 1) as u32;
        a.get_unit(sx, sy)
    })
    .unwrap();
    let ring: Vec<Point2> = (0..10)
        .map(|k| {
            let ang = k as f64 * std::f64::consts::TAU / 10.0;
            Point2::new(46.0 + 22.0 * ang.cos(), 48.0 + 22.0 * ang.sin())
        })
        .chain([Point2::new(46.3, 47.7)])
        .collect();
    let moved: Vec<Point2> = ring
        .iter()
        .map(|p| Point2::new(p.x + dx, p.y + dy))
        .collect();
    let la = prepare(ring.clone(), w, h);
    let lb = prepare(moved, w, h);
    let n = ring.len();
    let mapping = build_correspondence(&la, &lb).unwrap();
    for t in [0.0, 0.3, 0.5, 1.0] {
        let out = warp_blend(&a, &b, &mapping, t).unwrap();
        let current = interpolate_landmarks(&mapping, t).unwrap();
        let locator = PointLocator::new(&current, &mapping.shared_triangles);
        let mut checked = 0;
        for y in 0..h {
            for x in 0..w {
                let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                let Some(tri) = locator.locate(&p) else {
                    continue;
                };
                if mapping.shared_triangles[tri].iter().any(|&i| i >= n) {
                    continue;
                }
                let expect = a.sample_bilinear(p.x - t * dx, p.y - t * dy);
                let got = out.get_unit(x, y);
                for ch in 0..3 {
                    assert!(
                        (got[ch] - expect[ch]).abs() <= 1.0 / 255.0 + 1e-12,
                        "t {t} at {x},{y}"
                    );
                }
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }
}

fn face_pair(seed: u64) -> (Image, Image, MorphMapping) {
    let model = synthesize_model(seed, 6, 900).unwrap();
    let mut rng = seeded(seed);
    let cam_a = face_camera(70.0, 0.1, 80.0, 80.0);
    let cam_b = face_camera(66.0, -0.1, 82.0, 79.0);
    let (img_a, lm_a) = synthetic_face(&model, &random_alpha(&mut rng, 6, 1.0), &cam_a, 160, 0.0);
    let (img_b, lm_b) = synthetic_face(&model, &random_alpha(&mut rng, 6, 1.0), &cam_b, 160, 2.0);
    let prep = |lm: &LandmarkSet| add_boundary_anchors(&lm.nudged_inward().unwrap()).unwrap();
    let mapping = build_correspondence(&prep(&lm_a), &prep(&lm_b)).unwrap();
    (img_a, img_b, mapping)
}

#[test]
fn endpoints_reproduce_the_inputs() {
    let (a, b, mapping) = face_pair(21);
    let out0 = warp_blend(&a, &b, &mapping, 0.0).unwrap();
    let out1 = warp_blend(&a, &b, &mapping, 1.0).unwrap();
    // every pixel maps to itself at the endpoints up to barycentric rounding
    let max_diff = |x: &Image, y: &Image| {
        x.pixels()
            .iter()
            .zip(y.pixels())
            .flat_map(|(p, q)| (0..3).map(move |c| p[c].abs_diff(q[c])))
            .max()
            .unwrap()
    };
    assert!(max_diff(&out0, &a) <= 1);
    assert!(max_diff(&out1, &b) <= 1);
}

#[test]
fn landmark_colours_are_blended_endpoint_colours() {
    let model = synthesize_model(5, 6, 900).unwrap();
    let (a, b, lm_a, lm_b) = grid_aligned_face_pair(&model, 8, 160);
    let prep = |lm: &LandmarkSet| add_boundary_anchors(lm).unwrap();
    let mapping = build_correspondence(&prep(&lm_a), &prep(&lm_b)).unwrap();
    for t in [0.25, 0.5, 0.75] {
        let out = warp_blend(&a, &b, &mapping, t).unwrap();
        let current = interpolate_landmarks(&mapping, t).unwrap();
        for (i, p) in current.iter().enumerate().take(68) {
            let (xa, ya) = pixel_at(&lm_a.points[i]);
            let (xb, yb) = pixel_at(&lm_b.points[i]);
            let (x, y) = pixel_at(p);
            let (ca, cb, got) = (a.get_unit(xa, ya), b.get_unit(xb, yb), out.get_unit(x, y));
            for c in 0..3 {
                let expect = (1.0 - t) * ca[c] + t * cb[c];
                assert!((got[c] - expect).abs() <= 3.0 / 255.0, "landmark {i} t {t}");
            }
        }
    }
}

#[test]
fn augmented_face_sets_have_the_expected_triangle_count() {
    let (_, _, mapping) = face_pair(23);
    assert_eq!(mapping.landmarks_a.len(), 76);
    assert_eq!(mapping.shared_triangles.len(), 142);
    let mid = mapping.midpoint_triangulation();
    assert_eq!(
        delaunay_triangulate(&mid.points).unwrap().triangles,
        mapping.shared_triangles
    );
}

#[test]
fn frames_are_deterministic() {
    let (a, b, mapping) = face_pair(24);
    let x = warp_blend(&a, &b, &mapping, 0.37).unwrap();
    let y = warp_blend(&a, &b, &mapping, 0.37).unwrap();
    assert_eq!(x, y);
}
