//! Independent oracles and synthetic data shared by the integration tests.
#![allow(dead_code)]

use facemorph::render::{rasterize, RenderCamera, RenderParams};
use facemorph::{
    instance_mesh, AffineCamera, Image, LandmarkSet, Material, MorphableModel, Point2, Point3,
    ShapeCoefficients, TriangleMesh,
};
use nalgebra::Matrix2x4;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Sign of the orientation determinant in exact arithmetic.
pub fn exact_orient(a: &Point2, b: &Point2, c: &Point2) -> i32 {
    let (ax, ay, bx, by, cx, cy) = (
        exact(a.x),
        exact(a.y),
        exact(b.x),
        exact(b.y),
        exact(c.x),
        exact(c.y),
    );
    let det = (&bx - &ax) * (&cy - &ay) - (&by - &ay) * (&cx - &ax);
    sign(&det)
}

/// Sign of the in-circle determinant in exact arithmetic; positive when `d`
/// is inside the circle through counter-clockwise `a, b, c`.
pub fn exact_incircle(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> i32 {
    let rel = |p: &Point2| (exact(p.x) - exact(d.x), exact(p.y) - exact(d.y));
    let (adx, ady) = rel(a);
    let (bdx, bdy) = rel(b);
    let (cdx, cdy) = rel(c);
    let lift = |x: &BigRational, y: &BigRational| x * x + y * y;
    let det = lift(&adx, &ady) * (&bdx * &cdy - &cdx * &bdy)
        + lift(&bdx, &bdy) * (&cdx * &ady - &adx * &cdy)
        + lift(&cdx, &cdy) * (&adx * &bdy - &bdx * &ady);
    sign(&det)
}

/// Exact in-circle sign for integer coordinates below 2^20 in magnitude.
pub fn int_incircle(a: [i64; 2], b: [i64; 2], c: [i64; 2], d: [i64; 2]) -> i32 {
    let rel = |p: [i64; 2]| ((p[0] - d[0]) as i128, (p[1] - d[1]) as i128);
    let ((adx, ady), (bdx, bdy), (cdx, cdy)) = (rel(a), rel(b), rel(c));
    let lift = |x: i128, y: i128| x * x + y * y;
    let det = lift(adx, ady) * (bdx * cdy - cdx * bdy)
        + lift(bdx, bdy) * (cdx * ady - adx * cdy)
        + lift(cdx, cdy) * (adx * bdy - bdx * ady);
    det.signum() as i32
}

/// [`exact_orient`] behind a floating-point filter with a conservative
/// forward error bound; exact arithmetic only runs on near-ties.
pub fn robust_orient(a: &Point2, b: &Point2, c: &Point2) -> i32 {
    let l = (b.x - a.x) * (c.y - a.y);
    let r = (b.y - a.y) * (c.x - a.x);
    let det = l - r;
    if det.abs() > 1e-12 * (l.abs() + r.abs()) {
        return det.signum() as i32;
    }
    exact_orient(a, b, c)
}

/// [`exact_incircle`] behind the same kind of filter.
pub fn robust_incircle(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> i32 {
    let (adx, ady, bdx, bdy, cdx, cdy) = (
        a.x - d.x,
        a.y - d.y,
        b.x - d.x,
        b.y - d.y,
        c.x - d.x,
        c.y - d.y,
    );
    let (al, bl, cl) = (
        adx * adx + ady * ady,
        bdx * bdx + bdy * bdy,
        cdx * cdx + cdy * cdy,
    );
    let det =
        al * (bdx * cdy - cdx * bdy) + bl * (cdx * ady - adx * cdy) + cl * (adx * bdy - bdx * ady);
    let bound = al * ((bdx * cdy).abs() + (cdx * bdy).abs())
        + bl * ((cdx * ady).abs() + (adx * cdy).abs())
        + cl * ((adx * bdy).abs() + (bdx * ady).abs());
    if det.abs() > 1e-11 * bound {
        return det.signum() as i32;
    }
    exact_incircle(a, b, c, d)
}

fn sign(v: &BigRational) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of points on the convex hull boundary, collinear boundary points
/// included (monotone chain with exact orientation).
pub fn hull_boundary_count(points: &[Point2]) -> usize {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i]
            .x
            .total_cmp(&points[j].x)
            .then(points[i].y.total_cmp(&points[j].y))
    });
    let chain = |order: &mut dyn Iterator<Item = usize>| {
        let mut h: Vec<usize> = Vec::new();
        for i in order {
            // pop only on strict right turns so collinear points stay
            while h.len() >= 2
                && robust_orient(&points[h[h.len() - 2]], &points[h[h.len() - 1]], &points[i]) < 0
            {
                h.pop();
            }
            h.push(i);
        }
        h
    };
    let lower = chain(&mut idx.iter().copied());
    let upper = chain(&mut idx.iter().rev().copied());
    let mut all: Vec<usize> = lower.into_iter().chain(upper).collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// Checks the triangle list against the empty-circumcircle property in
/// exact arithmetic, the `2n − 2 − h` count, positive orientation, and that
/// every point is a vertex.
pub fn check_delaunay(points: &[Point2], triangles: &[[usize; 3]]) -> Result<(), String> {
    let n = points.len();
    let h = hull_boundary_count(points);
    if triangles.len() != 2 * n - 2 - h {
        return Err(format!(
            "{} triangles, expected 2n - 2 - h = {}",
            triangles.len(),
            2 * n - 2 - h
        ));
    }
    let mut used = vec![false; n];
    for (ti, &[a, b, c]) in triangles.iter().enumerate() {
        if robust_orient(&points[a], &points[b], &points[c]) <= 0 {
            return Err(format!(
                "triangle {ti} {:?} is not counter-clockwise",
                [a, b, c]
            ));
        }
        used[a] = true;
        used[b] = true;
        used[c] = true;
        for (d, p) in points.iter().enumerate() {
            if d == a || d == b || d == c {
                continue;
            }
            if robust_incircle(&points[a], &points[b], &points[c], p) > 0 {
                return Err(format!(
                    "point {d} lies inside the circumcircle of triangle {ti}"
                ));
            }
        }
    }
    if let Some(unused) = used.iter().position(|u| !u) {
        return Err(format!("point {unused} is not a vertex"));
    }
    Ok(())
}

/// Every Delaunay triangle of a point set in general position, by testing
/// all triples: O(n⁴).
pub fn brute_force_delaunay(points: &[Point2]) -> Vec<[usize; 3]> {
    let n = points.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = match robust_orient(&points[i], &points[j], &points[k]) {
                    1 => (i, j, k),
                    -1 => (i, k, j),
                    _ => continue,
                };
                let empty = (0..n).all(|d| {
                    d == i
                        || d == j
                        || d == k
                        || robust_incircle(&points[a], &points[b], &points[c], &points[d]) < 0
                });
                if empty {
                    out.push(canonical([a, b, c]));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Rotates a triangle so its smallest index comes first.
pub fn canonical(t: [usize; 3]) -> [usize; 3] {
    let m = (0..3).min_by_key(|&i| t[i]).unwrap();
    [t[m], t[(m + 1) % 3], t[(m + 2) % 3]]
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Point2> {
    (0..n)
        .map(|_| Point2::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent)))
        .collect()
}

/// Smooth, feature-rich texture: low-frequency colour waves plus a grid.
pub fn procedural_texture(size: u32, phase: f64) -> Image {
    Image::from_fn(size, size, |x, y| {
        let (u, v) = (x as f64 / size as f64, y as f64 / size as f64);
        let grid = if (x / 16 + y / 16) % 2 == 0 {
            0.08
        } else {
            0.0
        };
        [
            0.5 + 0.35 * (6.0 * u + phase).sin() + grid,
            0.5 + 0.35 * (5.0 * v - phase).cos() - grid,
            0.45 + 0.3 * (4.0 * (u + v) + 2.0 * phase).sin(),
        ]
    })
    .unwrap()
}

/// A front-facing camera with scale, yaw and image-centre offset.
pub fn face_camera(scale: f64, yaw: f64, cx: f64, cy: f64) -> AffineCamera {
    AffineCamera::new(Matrix2x4::new(
        scale * yaw.cos(),
        0.0,
        scale * yaw.sin(),
        cx,
        0.0,
        -scale,
        0.0,
        cy,
    ))
    .unwrap()
}

/// Renders a model instance through `camera` as a "photo" and returns it
/// with the projected landmark vertices.
pub fn synthetic_face(
    model: &MorphableModel,
    alpha: &ShapeCoefficients,
    camera: &AffineCamera,
    size: u32,
    phase: f64,
) -> (Image, LandmarkSet) {
    let mesh = instance_mesh(model, alpha).unwrap();
    let texture = procedural_texture(256, phase);
    let mut params = RenderParams::new(size, size);
    params.camera = RenderCamera::Affine(*camera);
    params.material = Material {
        ka: 0.3,
        kd: 0.7,
        ks: 0.0,
        shininess: 1.0,
    };
    params.background = [40, 40, 40];
    let photo = rasterize(&mesh, &texture, &params).unwrap();
    let points = model
        .landmark_positions(alpha)
        .unwrap()
        .iter()
        .map(|p| camera.project(p))
        .collect();
    let lm = LandmarkSet::new(points)
        .with_image_size(size, size)
        .unwrap();
    (photo, lm)
}

pub fn random_alpha(rng: &mut impl Rng, k: usize, bound: f64) -> ShapeCoefficients {
    let v: Vec<f64> = (0..k).map(|_| rng.random_range(-bound..bound)).collect();
    ShapeCoefficients::from_slice(&v)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two synthetic face photos whose landmarks sit on pixel centres and move
/// by multiples of 4 px, so the interpolated landmarks at t = k/4 are pixel
/// centres too. Returns photos and (unaugmented) landmark sets.
pub fn grid_aligned_face_pair(
    model: &MorphableModel,
    seed: u64,
    size: u32,
) -> (Image, Image, LandmarkSet, LandmarkSet) {
    let mut rng = seeded(seed);
    let k = model.component_count();
    let s = size as f64;
    let cam_a = face_camera(0.42 * s, rng.random_range(-0.2..0.2), 0.5 * s, 0.5 * s);
    let cam_b = face_camera(
        0.42 * s * rng.random_range(0.92..1.05),
        rng.random_range(-0.2..0.2),
        0.5 * s + rng.random_range(-4.0..4.0),
        0.5 * s + rng.random_range(-4.0..4.0),
    );
    let (img_a, lm_a) = synthetic_face(model, &random_alpha(&mut rng, k, 1.0), &cam_a, size, 0.0);
    let (img_b, lm_b) = synthetic_face(model, &random_alpha(&mut rng, k, 1.0), &cam_b, size, 1.7);
    let snap = |v: f64| v.floor() + 0.5;
    let a: Vec<Point2> = lm_a
        .points
        .iter()
        .map(|p| Point2::new(snap(p.x), snap(p.y)))
        .collect();
    let b: Vec<Point2> = a
        .iter()
        .zip(&lm_b.points)
        .map(|(pa, pb)| {
            let step = |from: f64, to: f64| from + 4.0 * ((snap(to) - from) / 4.0).round();
            Point2::new(step(pa.x, pb.x), step(pa.y, pb.y))
        })
        .collect();
    let lm_a = LandmarkSet::new(a).with_image_size(size, size).unwrap();
    let lm_b = LandmarkSet::new(b).with_image_size(size, size).unwrap();
    (img_a, img_b, lm_a, lm_b)
}

/// Pixel whose centre is `p` (which must be a pixel centre).
pub fn pixel_at(p: &Point2) -> (u32, u32) {
    assert_eq!(p.x.fract(), 0.5);
    assert_eq!(p.y.fract(), 0.5);
    (p.x.floor() as u32, p.y.floor() as u32)
}

/// One flat colour per triangle index; never black.
pub fn id_colour(k: usize) -> [u8; 3] {
    [
        (k * 10 % 250) as u8 + 5,
        255 - (k * 7 % 200) as u8,
        (k * 37 % 256) as u8,
    ]
}

/// A scene of `n` overlapping, mutually non-coplanar triangles inside a
/// `size` square, each textured with its [`id_colour`] through a `1 x n`
/// texture.
pub fn id_scene(rng: &mut impl Rng, n: usize, size: f64) -> (TriangleMesh, Image) {
    let mut vertices = Vec::new();
    let mut uvs = Vec::new();
    let mut faces = Vec::new();
    for k in 0..n {
        let v = 1.0 - (k as f64 + 0.5) / n as f64;
        for _ in 0..3 {
            vertices.push(Point3::new(
                rng.random_range(0.0..size),
                rng.random_range(0.0..size),
                rng.random_range(-1.0..1.0),
            ));
            uvs.push(Point2::new(0.5, v));
        }
        let b = 3 * k as u32;
        faces.push([b, b + 1, b + 2]);
    }
    let texture = Image::from_pixels(1, n as u32, (0..n).map(id_colour).collect()).unwrap();
    (TriangleMesh::new(vertices, uvs, faces).unwrap(), texture)
}

/// Index of the nearest triangle covering model point `(x, y)` under an
/// orthographic view down −z, or `None` when uncovered. `Err` marks
/// pixels too close to an edge or a depth tie to decide.
pub fn zbuffer_oracle(mesh: &TriangleMesh, x: f64, y: f64) -> Result<Option<usize>, ()> {
    let mut best: Option<(usize, f64)> = None;
    for (k, f) in mesh.faces.iter().enumerate() {
        let [a, b, c] = f.map(|i| mesh.vertices[i as usize]);
        let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if det.abs() < 1e-9 {
            continue;
        }
        let l1 = ((x - a.x) * (c.y - a.y) - (y - a.y) * (c.x - a.x)) / det;
        let l2 = ((b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x)) / det;
        let l0 = 1.0 - l1 - l2;
        let m = l0.min(l1).min(l2);
        if m.abs() < 1e-6 {
            return Err(());
        }
        if m < 0.0 {
            continue;
        }
        let z = l0 * a.z + l1 * b.z + l2 * c.z;
        match best {
            Some((_, bz)) if (bz - z).abs() < 1e-9 => return Err(()),
            Some((_, bz)) if bz >= z => {}
            _ => best = Some((k, z)),
        }
    }
    Ok(best.map(|(k, _)| k))
}
