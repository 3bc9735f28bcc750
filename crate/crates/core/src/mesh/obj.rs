//! Wavefront OBJ subset: `v`, `vt`, `f` and `#` comments.
//!
//! Uvs are stored per vertex, so a face corner `a/b` assigns `vt b` to
//! vertex `a`. Polygons with more than three corners are fanned.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use log::warn;

use super::{MeshError, TriangleMesh};
use crate::{Point2, Point3};

fn parse_floats<const N: usize>(
    fields: &mut std::str::SplitWhitespace<'_>,
    line: usize,
) -> Result<[f64; N], MeshError> {
    let mut out = [0.0; N];
    for slot in out.iter_mut() {
        let field = fields.next().ok_or_else(|| MeshError::Parse {
            line,
            message: format!("expected {N} coordinates"),
        })?;
        *slot = field.parse().map_err(|_| MeshError::Parse {
            line,
            message: format!("invalid number `{field}`"),
        })?;
    }
    Ok(out)
}

fn resolve(raw: &str, len: usize, line: usize) -> Result<usize, MeshError> {
    let idx: i64 = raw.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("invalid index `{raw}`"),
    })?;
    let resolved = match idx {
        0 => None,
        i if i > 0 => Some(i as usize - 1),
        i => (len as i64 + i).try_into().ok(),
    };
    match resolved {
        Some(i) if i < len => Ok(i),
        _ => Err(MeshError::Parse {
            line,
            message: format!("index {idx} out of range ({len} available)"),
        }),
    }
}

/// A face's source line and its `(position, uv)` index pairs.
type FaceCorners = (usize, Vec<(usize, Option<usize>)>);

pub fn load_obj(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut positions: Vec<Point3> = Vec::new();
    let mut tex: Vec<Point2> = Vec::new();
    let mut corners: Vec<FaceCorners> = Vec::new();
    let mut skipped: BTreeSet<String> = BTreeSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        let Some(tag) = fields.next() else { continue };
        match tag {
            "v" => {
                let [x, y, z] = parse_floats::<3>(&mut fields, line_no)?;
                positions.push(Point3::new(x, y, z));
            }
            "vt" => {
                let [u, v] = parse_floats::<2>(&mut fields, line_no)?;
                tex.push(Point2::new(u, v));
            }
            "f" => {
                let refs: Vec<&str> = fields.collect();
                if refs.len() < 3 {
                    return Err(MeshError::Parse {
                        line: line_no,
                        message: "face needs at least 3 corners".into(),
                    });
                }
                let mut face = Vec::with_capacity(refs.len());
                for r in refs {
                    let mut parts = r.split('/');
                    let v = parts.next().unwrap_or("");
                    let pos = resolve(v, positions.len(), line_no).map_err(|_| {
                        MeshError::IndexOutOfRange {
                            face: corners.len(),
                            index: v.parse::<i64>().unwrap_or(0).max(0) as usize,
                            len: positions.len(),
                        }
                    })?;
                    let uv = match parts.next() {
                        Some(t) if !t.is_empty() => Some(resolve(t, tex.len(), line_no)?),
                        _ => None,
                    };
                    face.push((pos, uv));
                }
                corners.push((line_no, face));
            }
            other => {
                skipped.insert(other.to_string());
            }
        }
    }
    if !skipped.is_empty() {
        warn!("skipped unsupported OBJ directives: {skipped:?}");
    }

    let mut uvs: Vec<Option<Point2>> = vec![None; positions.len()];
    let mut faces = Vec::with_capacity(corners.len());
    let (mut fanned, mut conflicts) = (0usize, 0usize);
    for (_, face) in &corners {
        if face.len() > 3 {
            fanned += 1;
        }
        for &(pos, uv) in face {
            if let Some(t) = uv {
                match uvs[pos] {
                    None => uvs[pos] = Some(tex[t]),
                    Some(existing) if existing != tex[t] => conflicts += 1,
                    _ => {}
                }
            }
        }
        for k in 1..face.len() - 1 {
            faces.push([face[0].0 as u32, face[k].0 as u32, face[k + 1].0 as u32]);
        }
    }
    if fanned > 0 {
        warn!("{fanned} polygon faces triangulated by fan");
    }
    if conflicts > 0 {
        warn!("{conflicts} face corners carry a second uv for an already-mapped vertex; kept the first");
    }
    let same_count = tex.len() == positions.len();
    let mut missing = 0usize;
    let uvs = uvs
        .into_iter()
        .enumerate()
        .map(|(i, uv)| {
            uv.unwrap_or_else(|| {
                if same_count {
                    tex[i]
                } else {
                    missing += 1;
                    Point2::origin()
                }
            })
        })
        .collect();
    if missing > 0 {
        warn!("{missing} vertices have no texture coordinate; using (0, 0)");
    }
    TriangleMesh::new(positions, uvs, faces)
}

/// Writes `v`, `vt` and `f i/i j/j k/k` lines with six decimals. Normals are
/// not written.
pub fn save_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::with_capacity(mesh.vertices.len() * 64 + mesh.faces.len() * 24);
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.6} {:.6} {:.6}", v.x, v.y, v.z);
    }
    for uv in &mesh.uvs {
        let _ = writeln!(out, "vt {:.6} {:.6}", uv.x, uv.y);
    }
    for f in &mesh.faces {
        let [a, b, c] = f.map(|i| i + 1);
        let _ = writeln!(out, "f {a}/{a} {b}/{b} {c}/{c}");
    }
    out
}
