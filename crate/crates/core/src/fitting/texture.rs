//! Photo → texture-atlas transfer through a fitted mesh.

use std::collections::VecDeque;

use super::AffineCamera;
use crate::geometry::{barycentric_with_det, is_degenerate, orient2d, EPS_BARY};
use crate::landmarks::{LandmarkError, LandmarkSet};
use crate::mesh::TriangleMesh;
use crate::raster::{quantize, Image, ImageError};
use crate::Point2;

/// Texture pixel position of a uv coordinate (`v` up in the atlas).
#[inline]
pub(crate) fn uv_to_texel(uv: &Point2, size: u32) -> Point2 {
    Point2::new(uv.x * size as f64, (1.0 - uv.y) * size as f64)
}

/// Resamples `photo` into a `texture_size`² uv atlas.
///
/// Every face is scan-converted in texture space; each covered texel is
/// mapped through its barycentric weights to a 3D point, projected with
/// `camera`, and bilinearly sampled from the photo. Texels no face covers
/// take the value of the nearest covered texel (breadth-first, fixed
/// neighbour order).
pub fn extract_texture(
    mesh: &TriangleMesh,
    camera: &AffineCamera,
    photo: &Image,
    texture_size: u32,
) -> Result<Image, ImageError> {
    let mut tex = Image::new(texture_size, texture_size, [0; 3])?;
    let n = texture_size as usize;
    let mut covered = vec![false; n * n];
    for f in &mesh.faces {
        let [ia, ib, ic] = f.map(|i| i as usize);
        let (ta, tb, tc) = (
            uv_to_texel(&mesh.uvs[ia], texture_size),
            uv_to_texel(&mesh.uvs[ib], texture_size),
            uv_to_texel(&mesh.uvs[ic], texture_size),
        );
        let det = orient2d(&ta, &tb, &tc);
        if is_degenerate(det) {
            continue;
        }
        let (pa, pb, pc) = (
            camera.project(&mesh.vertices[ia]),
            camera.project(&mesh.vertices[ib]),
            camera.project(&mesh.vertices[ic]),
        );
        let x0 = (ta.x.min(tb.x).min(tc.x) - 0.5).floor().max(0.0) as usize;
        let x1 = ((ta.x.max(tb.x).max(tc.x) - 0.5).ceil().max(0.0) as usize).min(n - 1);
        let y0 = (ta.y.min(tb.y).min(tc.y) - 0.5).floor().max(0.0) as usize;
        let y1 = ((ta.y.max(tb.y).max(tc.y) - 0.5).ceil().max(0.0) as usize).min(n - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if covered[y * n + x] {
                    continue;
                }
                let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                let w = barycentric_with_det(&ta, &tb, &tc, det, &p);
                if !w.is_inside(EPS_BARY) {
                    continue;
                }
                let q = w.apply(&pa, &pb, &pc);
                let c = photo.sample_bilinear(q.x, q.y);
                tex.set(x as u32, y as u32, c.map(quantize));
                covered[y * n + x] = true;
            }
        }
    }
    fill_uncovered(&mut tex, &mut covered);
    Ok(tex)
}

fn fill_uncovered(tex: &mut Image, covered: &mut [bool]) {
    let n = tex.width() as usize;
    let mut queue: VecDeque<usize> = (0..covered.len()).filter(|&i| covered[i]).collect();
    if queue.is_empty() {
        return;
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % n, i / n);
        let value = tex.pixels()[i];
        let neighbours = [
            (x > 0).then(|| i - 1),
            (x + 1 < n).then(|| i + 1),
            (y > 0).then(|| i - n),
            (y + 1 < n).then(|| i + n),
        ];
        for j in neighbours.into_iter().flatten() {
            if !covered[j] {
                covered[j] = true;
                tex.pixels_mut()[j] = value;
                queue.push_back(j);
            }
        }
    }
}

/// Carries photo landmarks into texture space: each landmark is located in
/// the nearest projected face that contains it and mapped to that face's
/// uvs. Landmarks outside the projected mesh fall back to the uv of their
/// model vertex.
pub fn photo_landmarks_to_texture(
    mesh: &TriangleMesh,
    camera: &AffineCamera,
    landmarks: &LandmarkSet,
    landmark_vertex_ids: &[usize],
    texture_size: u32,
) -> Result<LandmarkSet, LandmarkError> {
    let projected: Vec<Point2> = mesh.vertices.iter().map(|v| camera.project(v)).collect();
    let depth: Vec<f64> = mesh.vertices.iter().map(|v| camera.depth(v)).collect();
    let points = landmarks
        .points
        .iter()
        .zip(landmark_vertex_ids)
        .map(|(x, &vid)| {
            let mut best: Option<(f64, Point2)> = None;
            for f in &mesh.faces {
                let [a, b, c] = f.map(|i| i as usize);
                let det = orient2d(&projected[a], &projected[b], &projected[c]);
                if is_degenerate(det) {
                    continue;
                }
                let w = barycentric_with_det(&projected[a], &projected[b], &projected[c], det, x);
                if !w.is_inside(EPS_BARY) {
                    continue;
                }
                let z = w.w0 * depth[a] + w.w1 * depth[b] + w.w2 * depth[c];
                if best.is_none_or(|(bz, _)| z < bz) {
                    best = Some((z, w.apply(&mesh.uvs[a], &mesh.uvs[b], &mesh.uvs[c])));
                }
            }
            let uv = best.map_or(mesh.uvs[vid], |(_, uv)| uv);
            let t = uv_to_texel(&uv, texture_size);
            let s = texture_size as f64;
            Point2::new(t.x.clamp(0.0, s), t.y.clamp(0.0, s))
        })
        .collect();
    LandmarkSet::new(points).with_image_size(texture_size, texture_size)
}
