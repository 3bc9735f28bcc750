//! Software rasterizer: textured triangles, depth buffer, per-fragment Phong
//! shading under a single directional light.
//!
//! Screen space has `y` pointing down with pixel centres at `i + 0.5`. Depth
//! is measured along the viewing direction, so smaller values are nearer.

use nalgebra::{Matrix3, Vector2};
use rayon::prelude::*;

use crate::fitting::AffineCamera;
use crate::geometry::orient2d;
use crate::mesh::{compute_vertex_normals, TriangleMesh};
use crate::raster::{quantize, Image, ImageError, Rgb};
use crate::{Point2, Point3, Vector3};

/// Fraction of the frame left empty on each side by [`RenderCamera::AutoFit`].
pub const AUTOFIT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub ka: f64,
    pub kd: f64,
    pub ks: f64,
    pub shininess: f64,
}

impl Default for Material {
    fn default() -> Self {
        Self {
            ka: 0.15,
            kd: 0.85,
            ks: 0.1,
            shininess: 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum View {
    #[default]
    Front,
    /// 90° yaw about the vertical axis through the mesh centroid.
    Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RenderCamera {
    /// Orthographic, fitting the viewed bounding box into the frame.
    #[default]
    AutoFit,
    /// `screen = (offset.x + scale·x, offset.y − scale·y)`, depth `−z`.
    Orthographic { scale: f64, offset: Vector2<f64> },
    /// A fitted camera mapping model points straight to pixels.
    Affine(AffineCamera),
}

impl RenderCamera {
    /// Orthographic camera framing the union of the meshes' bounding boxes
    /// (as seen from `view`) with [`AUTOFIT_MARGIN`] on every side.
    pub fn framing(meshes: &[&TriangleMesh], view: View, width: u32, height: u32) -> Self {
        let mut lo = Vector2::repeat(f64::INFINITY);
        let mut hi = Vector2::repeat(f64::NEG_INFINITY);
        for mesh in meshes {
            let rot = ViewTransform::new(view, mesh);
            for v in &mesh.vertices {
                let p = rot.apply(v);
                lo = lo.inf(&p.xy().coords);
                hi = hi.sup(&p.xy().coords);
            }
        }
        if !(lo.x <= hi.x && lo.y <= hi.y) {
            return RenderCamera::Orthographic {
                scale: 1.0,
                offset: Vector2::zeros(),
            };
        }
        let usable = 1.0 - 2.0 * AUTOFIT_MARGIN;
        let extent = hi - lo;
        let sx = width as f64 * usable / extent.x.max(f64::MIN_POSITIVE);
        let sy = height as f64 * usable / extent.y.max(f64::MIN_POSITIVE);
        let scale = sx.min(sy);
        let centre = (lo + hi) / 2.0;
        RenderCamera::Orthographic {
            scale,
            offset: Vector2::new(
                width as f64 / 2.0 - scale * centre.x,
                height as f64 / 2.0 + scale * centre.y,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub width: u32,
    pub height: u32,
    pub camera: RenderCamera,
    pub view: View,
    /// Unit vector toward the light in eye space (`+z` faces the viewer).
    pub light_direction: Vector3,
    pub material: Material,
    pub background: [u8; 3],
}

impl RenderParams {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            camera: RenderCamera::AutoFit,
            view: View::Front,
            light_direction: Vector3::z(),
            material: Material::default(),
            background: [0, 0, 0],
        }
    }
}

/// Phong reflectance of one fragment. All direction vectors are unit length
/// and point away from the surface. Specular is only added when the light
/// is in front of the surface.
pub fn phong_shade(
    normal: &Vector3,
    light_dir: &Vector3,
    view_dir: &Vector3,
    material: &Material,
    texel: Rgb,
) -> Rgb {
    let n_dot_l = normal.dot(light_dir);
    let diffuse = material.kd * n_dot_l.max(0.0);
    let specular = if n_dot_l > 0.0 && material.ks > 0.0 {
        let reflected = 2.0 * n_dot_l * normal - light_dir;
        material.ks * reflected.dot(view_dir).max(0.0).powf(material.shininess)
    } else {
        0.0
    };
    texel.map(|c| (material.ka * c + diffuse * c + specular).clamp(0.0, 1.0))
}

/// Rotation applied to model coordinates before projection.
struct ViewTransform {
    rotation: Matrix3<f64>,
    pivot: Vector3,
}

impl ViewTransform {
    fn new(view: View, mesh: &TriangleMesh) -> Self {
        match view {
            View::Front => Self {
                rotation: Matrix3::identity(),
                pivot: Vector3::zeros(),
            },
            // x' = −z, z' = x: the mesh's +x side turns toward the viewer
            View::Side => Self {
                rotation: Matrix3::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0),
                pivot: mesh.centroid().coords,
            },
        }
    }

    fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.pivot + self.rotation * (p.coords - self.pivot))
    }
}

/// Screen position, depth and eye-space normal of a rotated model point.
struct Projection {
    kind: RenderCamera,
    eye: Matrix3<f64>,
}

impl Projection {
    fn new(camera: RenderCamera) -> Self {
        let eye = match camera {
            RenderCamera::Affine(cam) => {
                let toward_viewer = -cam.view_direction();
                let m = cam.matrix();
                let right = Vector3::new(m[(0, 0)], m[(0, 1)], m[(0, 2)]).normalize();
                let up = toward_viewer.cross(&right);
                Matrix3::from_rows(&[right.transpose(), up.transpose(), toward_viewer.transpose()])
            }
            _ => Matrix3::identity(),
        };
        Self { kind: camera, eye }
    }

    fn screen(&self, p: &Point3) -> (Point2, f64) {
        match self.kind {
            RenderCamera::Orthographic { scale, offset } => (
                Point2::new(offset.x + scale * p.x, offset.y - scale * p.y),
                -p.z,
            ),
            RenderCamera::Affine(cam) => (cam.project(p), cam.depth(p)),
            RenderCamera::AutoFit => unreachable!("resolved before projection"),
        }
    }
}

/// Screen-space data for one triangle.
struct Setup {
    screen: [Point2; 3],
    depth: [f64; 3],
    normal: [Vector3; 3],
    uv: [Point2; 3],
    /// Twice the signed area; positive after winding normalization.
    area: f64,
    /// Whether each edge (opposite vertex `i`) owns its boundary pixels.
    owns_edge: [bool; 3],
    rows: (u32, u32),
    cols: (u32, u32),
}

// Edge v_j → v_k of a positively oriented triangle owns pixel centres lying
// exactly on it when it is a top edge or a left edge in screen space.
fn is_top_left(from: &Point2, to: &Point2) -> bool {
    let d = to - from;
    (d.y == 0.0 && d.x > 0.0) || d.y < 0.0
}

fn setup_triangles(mesh: &TriangleMesh, params: &RenderParams) -> Vec<Setup> {
    let view = ViewTransform::new(params.view, mesh);
    let camera = match params.camera {
        RenderCamera::AutoFit => {
            RenderCamera::framing(&[mesh], params.view, params.width, params.height)
        }
        other => other,
    };
    let projection = Projection::new(camera);
    let normals = mesh.normals.as_ref().expect("normals computed by caller");

    let projected: Vec<(Point2, f64)> = mesh
        .vertices
        .iter()
        .map(|v| projection.screen(&view.apply(v)))
        .collect();
    let eye_normals: Vec<Vector3> = normals
        .iter()
        .map(|n| projection.eye * (view.rotation * n))
        .collect();

    let (w, h) = (params.width as f64, params.height as f64);
    mesh.faces
        .iter()
        .filter_map(|f| {
            let mut idx = f.map(|i| i as usize);
            let mut area = orient2d(
                &projected[idx[0]].0,
                &projected[idx[1]].0,
                &projected[idx[2]].0,
            );
            if !area.is_finite() || area == 0.0 {
                return None;
            }
            if area < 0.0 {
                idx.swap(1, 2);
                area = -area;
            }
            let screen = idx.map(|i| projected[i].0);
            let (min_x, max_x) = (
                screen.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
                screen.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
            );
            let (min_y, max_y) = (
                screen.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
                screen.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
            );
            // pixel i is a candidate when its centre i + 0.5 is within the box
            let lo_x = (min_x - 0.5).ceil().max(0.0);
            let hi_x = (max_x - 0.5).floor().min(w - 1.0);
            let lo_y = (min_y - 0.5).ceil().max(0.0);
            let hi_y = (max_y - 0.5).floor().min(h - 1.0);
            if lo_x > hi_x || lo_y > hi_y {
                return None;
            }
            Some(Setup {
                screen,
                depth: idx.map(|i| projected[i].1),
                normal: idx.map(|i| eye_normals[i]),
                uv: idx.map(|i| mesh.uvs[i]),
                area,
                owns_edge: [
                    is_top_left(&screen[1], &screen[2]),
                    is_top_left(&screen[2], &screen[0]),
                    is_top_left(&screen[0], &screen[1]),
                ],
                rows: (lo_y as u32, hi_y as u32),
                cols: (lo_x as u32, hi_x as u32),
            })
        })
        .collect()
}

/// Draws `tris` into rows `[y0, y0 + rows)`; `color` and `depth` hold just
/// those rows.
fn draw_band(
    tris: &[Setup],
    texture: &Image,
    params: &RenderParams,
    y0: u32,
    color: &mut [[u8; 3]],
    depth: &mut [f64],
) {
    let width = params.width as usize;
    let rows = (color.len() / width) as u32;
    let y1 = y0 + rows;
    let (tw, th) = (texture.width() as f64, texture.height() as f64);
    let view_dir = Vector3::z();
    for tri in tris {
        if tri.rows.1 < y0 || tri.rows.0 >= y1 {
            continue;
        }
        let [a, b, c] = tri.screen;
        for y in tri.rows.0.max(y0)..=tri.rows.1.min(y1 - 1) {
            let py = y as f64 + 0.5;
            for x in tri.cols.0..=tri.cols.1 {
                let p = Point2::new(x as f64 + 0.5, py);
                let e = [
                    orient2d(&b, &c, &p),
                    orient2d(&c, &a, &p),
                    orient2d(&a, &b, &p),
                ];
                let inside = e
                    .iter()
                    .zip(&tri.owns_edge)
                    .all(|(&ei, &owns)| ei > 0.0 || (ei == 0.0 && owns));
                if !inside {
                    continue;
                }
                let w = e.map(|ei| ei / tri.area);
                let z = w[0] * tri.depth[0] + w[1] * tri.depth[1] + w[2] * tri.depth[2];
                let slot = (y - y0) as usize * width + x as usize;
                // strict: on equal depth the earlier triangle stays
                if !(z < depth[slot]) {
                    continue;
                }
                depth[slot] = z;
                let n = w[0] * tri.normal[0] + w[1] * tri.normal[1] + w[2] * tri.normal[2];
                let n = n.try_normalize(0.0).unwrap_or(view_dir);
                let u = w[0] * tri.uv[0].x + w[1] * tri.uv[1].x + w[2] * tri.uv[2].x;
                let v = w[0] * tri.uv[0].y + w[1] * tri.uv[1].y + w[2] * tri.uv[2].y;
                let texel = texture.sample_bilinear(u * tw, (1.0 - v) * th);
                let shaded = phong_shade(
                    &n,
                    &params.light_direction,
                    &view_dir,
                    &params.material,
                    texel,
                );
                color[slot] = shaded.map(quantize);
            }
        }
    }
}

/// Renders `mesh` with `texture` using horizontal bands in parallel.
///
/// Meshes without normals get area-weighted vertex normals. Output does not
/// depend on the band count.
pub fn rasterize(
    mesh: &TriangleMesh,
    texture: &Image,
    params: &RenderParams,
) -> Result<Image, ImageError> {
    let bands = rayon::current_num_threads().max(1) * 2;
    rasterize_in_bands(mesh, texture, params, bands)
}

/// [`rasterize`] with an explicit number of horizontal bands; `1` is the
/// single-threaded path.
pub fn rasterize_in_bands(
    mesh: &TriangleMesh,
    texture: &Image,
    params: &RenderParams,
    bands: usize,
) -> Result<Image, ImageError> {
    let mut frame = Image::new(params.width, params.height, params.background)?;
    let with_normals;
    let mesh = if mesh.normals.is_some() {
        mesh
    } else {
        with_normals = compute_vertex_normals(mesh);
        &with_normals
    };
    let tris = setup_triangles(mesh, params);
    let width = params.width as usize;
    let rows_per_band = (params.height as usize).div_ceil(bands.max(1)).max(1);
    let mut depth = vec![f64::INFINITY; width * params.height as usize];
    frame
        .pixels_mut()
        .par_chunks_mut(rows_per_band * width)
        .zip(depth.par_chunks_mut(rows_per_band * width))
        .enumerate()
        .for_each(|(band, (color, depth))| {
            let y0 = (band * rows_per_band) as u32;
            draw_band(&tris, texture, params, y0, color, depth);
        });
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn aligned() -> Vector3 {
        Vector3::z()
    }

    #[test]
    fn aligned_lighting_without_specular_passes_texel_through() {
        let m = Material {
            ka: 0.1,
            kd: 0.9,
            ks: 0.0,
            shininess: 8.0,
        };
        let texel = [0.2, 0.5, 0.9];
        let out = phong_shade(&aligned(), &aligned(), &aligned(), &m, texel);
        for ch in 0..3 {
            assert!((out[ch] - texel[ch]).abs() < EPS);
        }
    }

    #[test]
    fn light_behind_surface_leaves_ambient_only() {
        let m = Material {
            ka: 0.3,
            kd: 0.7,
            ks: 0.8,
            shininess: 4.0,
        };
        let texel = [0.5, 0.25, 1.0];
        for light in [-Vector3::z(), Vector3::x()] {
            let out = phong_shade(&aligned(), &light, &aligned(), &m, texel);
            assert_eq!(out, texel.map(|c| 0.3 * c));
        }
    }

    #[test]
    fn mirror_alignment_adds_full_specular() {
        let m = Material {
            ka: 0.0,
            kd: 0.4,
            ks: 0.5,
            shininess: 37.0,
        };
        let out = phong_shade(&aligned(), &aligned(), &aligned(), &m, [0.2, 0.4, 1.0]);
        assert!((out[0] - 0.58).abs() < EPS);
        assert!((out[1] - 0.66).abs() < EPS);
        assert_eq!(out[2], 0.9);
    }

    #[test]
    fn shading_is_clamped() {
        let m = Material {
            ka: 1.0,
            kd: 1.0,
            ks: 1.0,
            shininess: 1.0,
        };
        let out = phong_shade(&aligned(), &aligned(), &aligned(), &m, [1.0, 0.9, 0.0]);
        assert_eq!(out, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn top_left_rule_claims_each_shared_edge_once() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 1.0),
            Point2::new(-2.0, 0.0),
            Point2::new(0.0, 4.0),
        ];
        for a in &pts {
            for b in &pts {
                if a != b {
                    assert_ne!(is_top_left(a, b), is_top_left(b, a));
                }
            }
        }
    }

    #[test]
    fn framing_centres_the_bounding_box() {
        let mesh = TriangleMesh::new(
            vec![
                Point3::new(-1.0, -2.0, 0.0),
                Point3::new(3.0, -2.0, 0.0),
                Point3::new(3.0, 2.0, 5.0),
            ],
            vec![Point2::origin(); 3],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let cam = RenderCamera::framing(&[&mesh], View::Front, 200, 100);
        let RenderCamera::Orthographic { scale, offset } = cam else {
            panic!("expected orthographic");
        };
        // height limits: 4 units into 90 px
        assert!((scale - 22.5).abs() < EPS);
        let p = Projection::new(cam);
        let (lo, _) = p.screen(&Point3::new(-1.0, 2.0, 0.0));
        let (hi, _) = p.screen(&Point3::new(3.0, -2.0, 0.0));
        assert!((lo.y - 5.0).abs() < EPS && (hi.y - 95.0).abs() < EPS);
        assert!(((lo.x + hi.x) / 2.0 - 100.0).abs() < EPS);
        assert!((offset.x - (100.0 - 22.5)).abs() < EPS);
    }

    #[test]
    fn side_view_turns_plus_x_toward_viewer() {
        let mesh = TriangleMesh::new(
            vec![
                Point3::new(-1.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![Point2::origin(); 3],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let view = ViewTransform::new(View::Side, &mesh);
        let near = view.apply(&Point3::new(1.0, 0.0, 0.0));
        let far = view.apply(&Point3::new(-1.0, 0.0, 0.0));
        assert!(near.z > far.z);
    }
}
