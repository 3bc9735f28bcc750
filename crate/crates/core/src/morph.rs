//! Landmark-driven image morphing.
//!
//! Both landmark sets share one triangulation, computed on the midpoint
//! configuration. For an interpolation factor `t` every output pixel is
//! located in the `t`-interpolated configuration; its barycentric weights
//! there pick matching positions in configurations A and B, which are
//! bilinearly sampled and cross-dissolved.

use log::warn;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{
    delaunay_triangulate, orient2d, GeometryError, PointLocator, Triangulation, EPS_AREA,
};
use crate::interp;
use crate::landmarks::LandmarkSet;
use crate::raster::{quantize, Image, ImageError};
use crate::Point2;

#[derive(Debug, Error)]
pub enum MorphError {
    #[error("landmark counts differ: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("landmark set {0} has no image size attached")]
    MissingImageSize(char),
    #[error("landmark set {0} is not boundary-augmented")]
    NotAugmented(char),
    #[error("image sizes differ: {0:?} vs {1:?} (resize B to A first)")]
    SizeMismatch((u32, u32), (u32, u32)),
    #[error("triangles degenerate or folded under configuration {config}: {triangles:?}")]
    DegenerateTriangles {
        config: char,
        triangles: Vec<[usize; 3]>,
    },
    #[error("interpolation factor {0} outside [0, 1]")]
    FactorOutOfRange(f64),
    #[error("image {which} is {got:?} but the landmarks describe {expected:?}")]
    ImageMismatch {
        which: char,
        got: (u32, u32),
        expected: (u32, u32),
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Two landmark configurations with one shared connectivity.
#[derive(Debug, Clone)]
pub struct MorphMapping {
    pub landmarks_a: Vec<Point2>,
    pub landmarks_b: Vec<Point2>,
    pub shared_triangles: Vec<[usize; 3]>,
    pub width: u32,
    pub height: u32,
}

impl MorphMapping {
    /// The midpoint configuration with the shared triangles, as used to
    /// build the mapping.
    pub fn midpoint_triangulation(&self) -> Triangulation {
        Triangulation {
            points: midpoints(&self.landmarks_a, &self.landmarks_b),
            triangles: self.shared_triangles.clone(),
        }
    }
}

fn midpoints(a: &[Point2], b: &[Point2]) -> Vec<Point2> {
    a.iter()
        .zip(b)
        .map(|(p, q)| Point2::new((p.x + q.x) / 2.0, (p.y + q.y) / 2.0))
        .collect()
}

fn bad_triangles(points: &[Point2], triangles: &[[usize; 3]]) -> Vec<[usize; 3]> {
    triangles
        .iter()
        .copied()
        .filter(|&[a, b, c]| orient2d(&points[a], &points[b], &points[c]) / 2.0 <= EPS_AREA)
        .collect()
}

/// Triangulates the midpoint configuration and checks the shared triangles
/// stay positively oriented under both endpoint configurations.
pub fn build_correspondence(
    lm_a: &LandmarkSet,
    lm_b: &LandmarkSet,
) -> Result<MorphMapping, MorphError> {
    if lm_a.len() != lm_b.len() {
        return Err(MorphError::CountMismatch(lm_a.len(), lm_b.len()));
    }
    let size_a = lm_a.image_size().ok_or(MorphError::MissingImageSize('A'))?;
    let size_b = lm_b.image_size().ok_or(MorphError::MissingImageSize('B'))?;
    if size_a != size_b {
        return Err(MorphError::SizeMismatch(size_a, size_b));
    }
    if !lm_a.is_boundary_augmented() {
        return Err(MorphError::NotAugmented('A'));
    }
    if !lm_b.is_boundary_augmented() {
        return Err(MorphError::NotAugmented('B'));
    }
    let mid = midpoints(&lm_a.points, &lm_b.points);
    let triangles = delaunay_triangulate(&mid)?.triangles;
    for (config, points) in [('A', &lm_a.points), ('B', &lm_b.points)] {
        let bad = bad_triangles(points, &triangles);
        if !bad.is_empty() {
            return Err(MorphError::DegenerateTriangles {
                config,
                triangles: bad,
            });
        }
    }
    Ok(MorphMapping {
        landmarks_a: lm_a.points.clone(),
        landmarks_b: lm_b.points.clone(),
        shared_triangles: triangles,
        width: size_a.0,
        height: size_a.1,
    })
}

/// Point `i` is `(1 - t) a_i + t b_i`.
pub fn interpolate_landmarks(mapping: &MorphMapping, t: f64) -> Result<Vec<Point2>, MorphError> {
    if !interp::valid_factor(t) {
        return Err(MorphError::FactorOutOfRange(t));
    }
    let (wa, wb) = interp::weights(t);
    Ok(mapping
        .landmarks_a
        .iter()
        .zip(&mapping.landmarks_b)
        .map(|(a, b)| {
            Point2::new(
                interp::blend(a.x, b.x, wa, wb),
                interp::blend(a.y, b.y, wa, wb),
            )
        })
        .collect())
}

/// Morphs `img_a` towards `img_b` at factor `t`.
///
/// Pixels outside every triangle, or inside a triangle that degenerates at
/// this `t`, fall back to a plain cross-dissolve.
pub fn warp_blend(
    img_a: &Image,
    img_b: &Image,
    mapping: &MorphMapping,
    t: f64,
) -> Result<Image, MorphError> {
    let expected = (mapping.width, mapping.height);
    for (which, img) in [('A', img_a), ('B', img_b)] {
        if img.dimensions() != expected {
            return Err(MorphError::ImageMismatch {
                which,
                got: img.dimensions(),
                expected,
            });
        }
    }
    let current = interpolate_landmarks(mapping, t)?;
    let locator = PointLocator::new(&current, &mapping.shared_triangles);
    if !locator.skipped().is_empty() {
        warn!(
            "{} shared triangles degenerate at t = {t}; cross-dissolving their pixels",
            locator.skipped().len()
        );
    }
    let (wa, wb) = interp::weights(t);
    let (pa, pb) = (&mapping.landmarks_a, &mapping.landmarks_b);

    let mut out = Image::new(mapping.width, mapping.height, [0; 3])?;
    let width = mapping.width as usize;
    out.pixels_mut()
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                let (sa, sb) = match locator.locate_with_weights(&p) {
                    Some((tri, w)) => {
                        let [i, j, k] = mapping.shared_triangles[tri];
                        let qa = w.apply(&pa[i], &pa[j], &pa[k]);
                        let qb = w.apply(&pb[i], &pb[j], &pb[k]);
                        (
                            img_a.sample_bilinear(qa.x, qa.y),
                            img_b.sample_bilinear(qb.x, qb.y),
                        )
                    }
                    None => (
                        img_a.get_unit(x as u32, y as u32),
                        img_b.get_unit(x as u32, y as u32),
                    ),
                };
                *px = [0, 1, 2].map(|c| quantize(interp::blend(sa[c], sb[c], wa, wb)));
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::add_boundary_anchors;

    fn augmented(points: Vec<Point2>, w: u32, h: u32) -> LandmarkSet {
        add_boundary_anchors(&LandmarkSet::new(points).with_image_size(w, h).unwrap()).unwrap()
    }

    fn two_face_sets() -> (LandmarkSet, LandmarkSet) {
        let a = augmented(
            vec![
                Point2::new(20.0, 20.0),
                Point2::new(40.0, 22.0),
                Point2::new(30.0, 40.0),
            ],
            64,
            64,
        );
        let b = augmented(
            vec![
                Point2::new(22.0, 18.0),
                Point2::new(41.0, 25.0),
                Point2::new(31.0, 44.0),
            ],
            64,
            64,
        );
        (a, b)
    }

    #[test]
    fn coincident_sets_reuse_plain_triangulation() {
        let (a, _) = two_face_sets();
        let m = build_correspondence(&a, &a).unwrap();
        assert_eq!(
            m.shared_triangles,
            delaunay_triangulate(&a.points).unwrap().triangles
        );
    }

    #[test]
    fn swapping_endpoints_keeps_triangles() {
        let (a, b) = two_face_sets();
        let ab = build_correspondence(&a, &b).unwrap();
        let ba = build_correspondence(&b, &a).unwrap();
        assert_eq!(ab.shared_triangles, ba.shared_triangles);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let (a, _) = two_face_sets();
        let short = augmented(vec![Point2::new(5.0, 5.0)], 64, 64);
        assert!(matches!(
            build_correspondence(&a, &short),
            Err(MorphError::CountMismatch(11, 9))
        ));
        let other = augmented(
            vec![
                Point2::new(20.0, 20.0),
                Point2::new(40.0, 22.0),
                Point2::new(30.0, 30.0),
            ],
            64,
            32,
        );
        assert!(matches!(
            build_correspondence(&a, &other),
            Err(MorphError::SizeMismatch(..))
        ));
        let bare = LandmarkSet::new(a.points[..3].to_vec())
            .with_image_size(64, 64)
            .unwrap();
        assert!(matches!(
            build_correspondence(&bare, &bare),
            Err(MorphError::NotAugmented('A'))
        ));
    }

    #[test]
    fn folded_endpoint_is_reported() {
        let a = augmented(
            vec![Point2::new(10.0, 32.0), Point2::new(54.0, 32.0)],
            64,
            64,
        );
        // the two interior points swap places in B
        let b = augmented(
            vec![Point2::new(54.0, 30.0), Point2::new(10.0, 34.0)],
            64,
            64,
        );
        match build_correspondence(&a, &b) {
            Err(MorphError::DegenerateTriangles { config, triangles }) => {
                assert!(config == 'A' || config == 'B');
                assert!(!triangles.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn landmark_interpolation() {
        let a = augmented(vec![Point2::new(10.0, 0.5)], 64, 64);
        let b = augmented(vec![Point2::new(20.0, 10.0)], 64, 64);
        let m = build_correspondence(&a, &b).unwrap();
        assert_eq!(interpolate_landmarks(&m, 0.0).unwrap(), a.points);
        assert_eq!(interpolate_landmarks(&m, 1.0).unwrap(), b.points);
        let mid = interpolate_landmarks(&m, 0.5).unwrap();
        assert_eq!(mid[0], Point2::new(15.0, 5.25));
        assert!(matches!(
            interpolate_landmarks(&m, 1.5),
            Err(MorphError::FactorOutOfRange(_))
        ));
        assert!(interpolate_landmarks(&m, -0.1).is_err());
    }

    #[test]
    fn constant_images_blend_exactly() {
        let (a, b) = two_face_sets();
        let m = build_correspondence(&a, &b).unwrap();
        let ia = Image::new(64, 64, [40, 90, 200]).unwrap();
        let ib = Image::new(64, 64, [250, 10, 100]).unwrap();
        for &t in &[0.0, 0.3, 0.5, 1.0] {
            let out = warp_blend(&ia, &ib, &m, t).unwrap();
            let (wa, wb) = interp::weights(t);
            let expect = [0, 1, 2].map(|c| {
                quantize(interp::blend(
                    crate::raster::to_unit(ia.pixels()[0][c]),
                    crate::raster::to_unit(ib.pixels()[0][c]),
                    wa,
                    wb,
                ))
            });
            assert!(out.pixels().iter().all(|p| *p == expect), "t = {t}");
        }
    }

    #[test]
    fn identical_inputs_are_a_fixed_point() {
        let (a, _) = two_face_sets();
        let m = build_correspondence(&a, &a).unwrap();
        let img = Image::from_fn(64, 64, |x, y| {
            [
                (x as f64 / 63.0),
                (y as f64 / 63.0),
                ((x ^ y) & 7) as f64 / 7.0,
            ]
        })
        .unwrap();
        for &t in &[0.0, 0.25, 0.5, 1.0] {
            let out = warp_blend(&img, &img, &m, t).unwrap();
            assert_eq!(out, img);
        }
    }

    #[test]
    fn image_size_must_match_mapping() {
        let (a, b) = two_face_sets();
        let m = build_correspondence(&a, &b).unwrap();
        let ia = Image::new(64, 64, [0; 3]).unwrap();
        let small = Image::new(32, 64, [0; 3]).unwrap();
        assert!(matches!(
            warp_blend(&ia, &small, &m, 0.5),
            Err(MorphError::ImageMismatch { which: 'B', .. })
        ));
    }
}
