//! Mesh and template asset I/O.
//!
//! OBJ output is right-handed, y-up, meters; the garment frame (x right,
//! y depth, z up) maps through a rotation about x, so the garment front
//! faces +z in the file. `vt` uses the bottom-left-origin convention, so v
//! flips relative to the atlas raster rows. All writes are byte-deterministic
//! for fixed input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::GarmentType;
use crate::geom::{Pt2, Pt3};

use super::{Constants, Piece, PieceSource, TemplateAsset, TemplateError};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TemplateError + '_ {
    move |source| TemplateError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Serializes a mesh to OBJ text. `mtl` names the material library and
/// material to reference, if any.
pub fn write_obj(
    vertices: &[Pt3],
    material_coords: &[Pt2],
    faces: &[[u32; 3]],
    mtl: Option<(&str, &str)>,
    precision: usize,
) -> String {
    let mut out = String::new();
    if let Some((lib, _)) = mtl {
        let _ = writeln!(out, "mtllib {lib}");
    }
    for v in vertices {
        // Garment frame to OBJ y-up: (x, y, z) -> (x, z, -y).
        let _ = writeln!(
            out,
            "v {:.p$} {:.p$} {:.p$}",
            v.x,
            v.z,
            -v.y,
            p = precision
        );
    }
    for uv in material_coords {
        let _ = writeln!(out, "vt {:.p$} {:.p$}", uv.x, 1.0 - uv.y, p = precision);
    }
    if let Some((_, material)) = mtl {
        let _ = writeln!(out, "usemtl {material}");
    }
    for f in faces {
        let _ = writeln!(
            out,
            "f {}/{} {}/{} {}/{}",
            f[0] + 1,
            f[0] + 1,
            f[1] + 1,
            f[1] + 1,
            f[2] + 1,
            f[2] + 1
        );
    }
    out
}

/// Parses OBJ text back into the garment frame. Only `v`, `vt` and
/// triangular `f` records are interpreted; texture indices must equal vertex
/// indices (the writer's convention).
pub fn parse_obj(text: &str) -> Result<(Vec<Pt3>, Vec<Pt2>, Vec<[u32; 3]>), String> {
    let mut vertices = Vec::new();
    let mut uvs = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let mut floats = |n: usize| -> Result<Vec<f64>, String> {
            let vals: Result<Vec<f64>, _> = parts.by_ref().take(n).map(str::parse).collect();
            vals.map_err(|e| format!("line {}: {e}", lineno + 1))
        };
        match tag {
            "v" => {
                let v = floats(3)?;
                if v.len() != 3 {
                    return Err(format!("line {}: truncated vertex", lineno + 1));
                }
                // OBJ y-up back to the garment frame: (x, y, z) -> (x, -z, y).
                vertices.push(Pt3::new(v[0], -v[2], v[1]));
            }
            "vt" => {
                let v = floats(2)?;
                if v.len() != 2 {
                    return Err(format!("line {}: truncated texcoord", lineno + 1));
                }
                uvs.push(Pt2::new(v[0], 1.0 - v[1]));
            }
            "f" => {
                let idx: Result<Vec<u32>, String> = parts
                    .map(|p| {
                        let first = p.split('/').next().unwrap();
                        first
                            .parse::<u32>()
                            .map(|i| i - 1)
                            .map_err(|e| format!("line {}: {e}", lineno + 1))
                    })
                    .collect();
                let idx = idx?;
                if idx.len() != 3 {
                    return Err(format!(
                        "line {}: only triangular faces supported, got {} corners",
                        lineno + 1,
                        idx.len()
                    ));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok((vertices, uvs, faces))
}

/// Writes the final textured model: `model.obj` + `model.mtl`, with the MTL
/// referencing `atlas_file`. Returns the obj and mtl paths.
pub fn save_model(
    vertices: &[Pt3],
    material_coords: &[Pt2],
    faces: &[[u32; 3]],
    atlas_file: &str,
    out_dir: &Path,
) -> Result<(std::path::PathBuf, std::path::PathBuf), TemplateError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let obj_path = out_dir.join("model.obj");
    let mtl_path = out_dir.join("model.mtl");
    let obj = write_obj(
        vertices,
        material_coords,
        faces,
        Some(("model.mtl", "garment")),
        6,
    );
    std::fs::write(&obj_path, obj).map_err(io_err(&obj_path))?;
    let mut mtl = String::new();
    let _ = writeln!(mtl, "newmtl garment");
    let _ = writeln!(mtl, "Ka 1.000000 1.000000 1.000000");
    let _ = writeln!(mtl, "Kd 1.000000 1.000000 1.000000");
    let _ = writeln!(mtl, "Ks 0.000000 0.000000 0.000000");
    let _ = writeln!(mtl, "d 1.000000");
    let _ = writeln!(mtl, "illum 1");
    let _ = writeln!(mtl, "map_Kd {atlas_file}");
    std::fs::write(&mtl_path, mtl).map_err(io_err(&mtl_path))?;
    Ok((obj_path, mtl_path))
}

#[derive(Serialize, Deserialize)]
struct PieceFile {
    name: String,
    contour: Vec<[f64; 2]>,
    landmarks: BTreeMap<String, [f64; 2]>,
    source: SourceFile,
}

#[derive(Serialize, Deserialize)]
struct SourceFile {
    view: crate::annotation::View,
    label: u8,
}

#[derive(Serialize, Deserialize)]
struct SidecarFile {
    garment_type: GarmentType,
    pieces: Vec<PieceFile>,
    markers: BTreeMap<String, u32>,
    constants: Constants,
}

/// Writes `template.obj` + `template.json` into `dir`.
pub fn save_template(asset: &TemplateAsset, dir: &Path) -> Result<(), TemplateError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let obj_path = dir.join("template.obj");
    // High precision: constants are re-derived from these positions on load
    // and must agree to 1e-9.
    let obj = write_obj(&asset.vertices, &asset.material_coords, &asset.faces, None, 12);
    std::fs::write(&obj_path, obj).map_err(io_err(&obj_path))?;

    let sidecar = SidecarFile {
        garment_type: asset.garment_type,
        pieces: asset
            .pieces
            .iter()
            .map(|p| PieceFile {
                name: p.name.clone(),
                contour: p.contour.iter().map(|v| [v.x, v.y]).collect(),
                landmarks: p
                    .landmarks
                    .iter()
                    .map(|(k, v)| (k.clone(), [v.x, v.y]))
                    .collect(),
                source: SourceFile {
                    view: p.source.view,
                    label: p.source.label,
                },
            })
            .collect(),
        markers: asset.markers.clone(),
        constants: asset.constants,
    };
    let json_path = dir.join("template.json");
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    std::fs::write(&json_path, text).map_err(io_err(&json_path))?;
    Ok(())
}

/// Loads and validates a template from a directory written by
/// [`save_template`] (or authored externally to the same schema).
pub fn load_template(dir: &Path) -> Result<TemplateAsset, TemplateError> {
    let obj_path = dir.join("template.obj");
    let obj_text = std::fs::read_to_string(&obj_path).map_err(io_err(&obj_path))?;
    let (vertices, material_coords, faces) =
        parse_obj(&obj_text).map_err(|detail| TemplateError::Parse {
            path: obj_path.display().to_string(),
            detail,
        })?;

    let json_path = dir.join("template.json");
    let json_text = std::fs::read_to_string(&json_path).map_err(io_err(&json_path))?;
    let sidecar: SidecarFile =
        serde_json::from_str(&json_text).map_err(|e| TemplateError::Parse {
            path: json_path.display().to_string(),
            detail: e.to_string(),
        })?;

    let asset = TemplateAsset {
        garment_type: sidecar.garment_type,
        vertices,
        faces,
        material_coords,
        pieces: sidecar
            .pieces
            .into_iter()
            .map(|p| Piece {
                name: p.name,
                contour: p.contour.iter().map(|v| Pt2::new(v[0], v[1])).collect(),
                landmarks: p
                    .landmarks
                    .into_iter()
                    .map(|(k, v)| (k, Pt2::new(v[0], v[1])))
                    .collect(),
                source: PieceSource {
                    view: p.source.view,
                    label: p.source.label,
                },
            })
            .collect(),
        markers: sidecar.markers,
        constants: sidecar.constants,
    };
    asset.validate()?;
    Ok(asset)
}
