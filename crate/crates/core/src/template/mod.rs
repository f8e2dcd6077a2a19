//! Garment templates: a world-space triangle mesh whose per-vertex texture
//! coordinates are material coordinates into a planar reference layout, plus
//! the reference piece polygons, named marker vertices, and template
//! constants the deformation solver needs.
//!
//! Templates are generated procedurally (see [`generate`]) rather than
//! bundled, and can also be loaded from a mesh + sidecar JSON directory.
//!
//! Coordinate conventions: the garment frame is x right (viewed from the
//! front), y depth (front of the garment at negative y), z up, in meters.
//! Layout space is the unit square with v increasing downward, matching the
//! atlas raster; the OBJ writer flips v to the bottom-left-origin `vt`
//! convention.

mod generate;
mod io;

pub use generate::{make_pants_template, make_tshirt_template, PantsParams, TshirtParams};
pub use io::{load_template, parse_obj, save_model, save_template, write_obj};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{CaptureMode, GarmentType, View};
use crate::geom::{point_in_polygon, polygon_distance, Aabb, Pt2, Pt3};
use crate::geomkit::ellipse_girth_from_width;
use crate::measure::{
    MeasurementReport, PantsMeasurements, ScaleSpec, SidePair, TshirtMeasurements,
};

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("degenerate template parameter: {0}")]
    BadParams(String),
    #[error("template invariant violated: {0}")]
    Invalid(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
}

/// Scalar constants measured from the template geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Left sleeve angle below horizontal, radians. Placeholder for pants.
    pub alpha: f64,
    /// Right sleeve angle below horizontal, radians. Placeholder for pants.
    pub beta: f64,
    /// Rest depth divided by rest armpit-to-shoulder (crotch-to-waist for
    /// pants) distance.
    pub s_depth: f64,
    /// Waist girth of the template in meters (hem girth for the T-shirt).
    pub waist_girth: f64,
    /// Chest cross-section depth/width ratio.
    pub chest_rho: f64,
    /// Waist cross-section depth/width ratio.
    pub waist_rho: f64,
}

/// Which photo region textures a reference piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceSource {
    pub view: View,
    pub label: u8,
}

/// One planar reference piece: its layout polygon and the landmarks that
/// register photo contours onto it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub name: String,
    /// Layout-space polygon, implicitly closed.
    pub contour: Vec<Pt2>,
    /// Reference landmark positions on (or snapped to) the contour. Keyed by
    /// the landmark names of the source view.
    pub landmarks: BTreeMap<String, Pt2>,
    pub source: PieceSource,
}

/// Marker vertex names required per garment type.
pub fn marker_registry(garment: GarmentType) -> &'static [&'static str] {
    match garment {
        GarmentType::Tshirt => &[
            "armpit_left",
            "armpit_right",
            "shoulder_left",
            "shoulder_right",
            "cuff_left",
            "cuff_right",
            "neck_center",
            "hem_left",
            "hem_right",
        ],
        GarmentType::Pants => &[
            "waist_left",
            "waist_right",
            "crotch",
            "bottom_left",
            "bottom_right",
        ],
    }
}

/// A complete garment template asset.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateAsset {
    pub garment_type: GarmentType,
    pub vertices: Vec<Pt3>,
    pub faces: Vec<[u32; 3]>,
    /// Material coordinates per vertex, layout space (v down).
    pub material_coords: Vec<Pt2>,
    pub pieces: Vec<Piece>,
    pub markers: BTreeMap<String, u32>,
    pub constants: Constants,
}

/// Boundary loops expected on the assembled surface: hem, collar top and two
/// cuffs for the T-shirt; waist and two leg openings for pants.
pub fn expected_boundary_loops(garment: GarmentType) -> usize {
    match garment {
        GarmentType::Tshirt => 4,
        GarmentType::Pants => 3,
    }
}

impl TemplateAsset {
    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices).expect("template has vertices")
    }

    pub fn marker_point(&self, name: &str) -> Option<Pt3> {
        self.markers
            .get(name)
            .map(|&idx| self.vertices[idx as usize])
    }

    pub fn piece(&self, name: &str) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.name == name)
    }

    /// Re-derives the measurement report from marker vertex positions. Used
    /// with deformed vertex sets as the solve/measure closure oracle, and
    /// with the rest vertices as the template's own measurements.
    pub fn remeasure_markers(&self, verts: &[Pt3]) -> MeasurementReport {
        let m = |name: &str| verts[self.markers[name] as usize];
        let scale = ScaleSpec {
            reference_name: "template".into(),
            reference_meters: 1.0,
            pixels_per_meter: 1.0,
            default_scale: false,
        };
        match self.garment_type {
            GarmentType::Tshirt => {
                let armpit_l = m("armpit_left");
                let armpit_r = m("armpit_right");
                let shoulder_l = m("shoulder_left");
                let shoulder_r = m("shoulder_right");
                let cuff_l = m("cuff_left");
                let cuff_r = m("cuff_right");
                let hem_l = m("hem_left");
                let hem_r = m("hem_right");
                let neck = m("neck_center");
                let a2h = SidePair {
                    left: armpit_l.z - hem_l.z,
                    right: armpit_r.z - hem_r.z,
                };
                let a2s = SidePair {
                    left: shoulder_l.z - armpit_l.z,
                    right: shoulder_r.z - armpit_r.z,
                };
                MeasurementReport::Tshirt(TshirtMeasurements {
                    left_sleeve_length: (armpit_l.x - cuff_l.x) / self.constants.alpha.cos(),
                    right_sleeve_length: (cuff_r.x - armpit_r.x) / self.constants.beta.cos(),
                    chest_width: armpit_r.x - armpit_l.x,
                    armpit_to_hemline: 0.5 * (a2h.left + a2h.right),
                    armpit_to_shoulder: 0.5 * (a2s.left + a2s.right),
                    neck_to_hemline: neck.z - 0.5 * (hem_l.z + hem_r.z),
                    capture_mode: CaptureMode::Mannequin,
                    scale,
                    armpit_to_hemline_sides: a2h,
                    armpit_to_shoulder_sides: a2s,
                })
            }
            GarmentType::Pants => {
                let waist_l = m("waist_left");
                let waist_r = m("waist_right");
                let crotch = m("crotch");
                let bottom_l = m("bottom_left");
                let bottom_r = m("bottom_right");
                let c2b = SidePair {
                    left: crotch.z - bottom_l.z,
                    right: crotch.z - bottom_r.z,
                };
                let width = waist_r.x - waist_l.x;
                MeasurementReport::Pants(PantsMeasurements {
                    crotch_to_bottom: 0.5 * (c2b.left + c2b.right),
                    crotch_to_waist: 0.5 * (waist_l.z + waist_r.z) - crotch.z,
                    waist_girth: ellipse_girth_from_width(width, self.constants.waist_rho)
                        .expect("template waist is a valid ellipse"),
                    capture_mode: CaptureMode::Mannequin,
                    scale,
                    crotch_to_bottom_sides: c2b,
                })
            }
        }
    }

    /// The template's own measurements (identity input for the lattice
    /// solver).
    pub fn intrinsic_report(&self) -> MeasurementReport {
        self.remeasure_markers(&self.vertices)
    }

    /// Recomputes the stored constants from the mesh; validation requires
    /// agreement to 1e-9.
    pub fn recompute_constants(&self) -> Constants {
        let bb = self.aabb();
        let depth = bb.max.y - bb.min.y;
        match self.garment_type {
            GarmentType::Tshirt => {
                let armpit_l = self.marker_point("armpit_left").unwrap();
                let armpit_r = self.marker_point("armpit_right").unwrap();
                let shoulder_l = self.marker_point("shoulder_left").unwrap();
                let cuff_l = self.marker_point("cuff_left").unwrap();
                let cuff_r = self.marker_point("cuff_right").unwrap();
                let root_mid_z = 0.5 * (armpit_l.z + shoulder_l.z);
                let alpha = (root_mid_z - cuff_l.z).atan2(armpit_l.x - cuff_l.x);
                let beta = (root_mid_z - cuff_r.z).atan2(cuff_r.x - armpit_r.x);
                let a2s = shoulder_l.z - armpit_l.z;
                let chest_w = armpit_r.x - armpit_l.x;
                let chest_depth = self.section_depth(armpit_l.z);
                let hem_l = self.marker_point("hem_left").unwrap();
                let hem_depth = self.section_depth(hem_l.z);
                let hem_rho = hem_depth / chest_w;
                Constants {
                    alpha,
                    beta,
                    s_depth: depth / a2s,
                    waist_girth: crate::geomkit::ramanujan_perimeter(
                        0.5 * chest_w,
                        0.5 * hem_depth,
                    ),
                    chest_rho: chest_depth / chest_w,
                    waist_rho: hem_rho,
                }
            }
            GarmentType::Pants => {
                let waist_l = self.marker_point("waist_left").unwrap();
                let waist_r = self.marker_point("waist_right").unwrap();
                let crotch = self.marker_point("crotch").unwrap();
                let width = waist_r.x - waist_l.x;
                let waist_depth = self.section_depth(waist_l.z);
                let waist_rho = waist_depth / width;
                Constants {
                    // Sleeve angles do not apply to pants; fixed placeholder.
                    alpha: std::f64::consts::FRAC_PI_4,
                    beta: std::f64::consts::FRAC_PI_4,
                    s_depth: depth / (waist_l.z - crotch.z),
                    waist_girth: crate::geomkit::ramanujan_perimeter(
                        0.5 * width,
                        0.5 * waist_depth,
                    ),
                    chest_rho: waist_rho,
                    waist_rho,
                }
            }
        }
    }

    /// Depth (y extent) of the mesh cross-section at height `z`.
    fn section_depth(&self, z: f64) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.vertices {
            if (v.z - z).abs() < 1e-9 {
                lo = lo.min(v.y);
                hi = hi.max(v.y);
            }
        }
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }

    /// Checks all structural invariants; returns the first violation.
    pub fn validate(&self) -> Result<(), TemplateError> {
        if self.vertices.len() != self.material_coords.len() {
            return Err(TemplateError::Invalid(format!(
                "{} vertices but {} material coords",
                self.vertices.len(),
                self.material_coords.len()
            )));
        }
        for name in marker_registry(self.garment_type) {
            let idx = self
                .markers
                .get(*name)
                .ok_or_else(|| TemplateError::Invalid(format!("missing marker \"{name}\"")))?;
            if *idx as usize >= self.vertices.len() {
                return Err(TemplateError::Invalid(format!(
                    "marker \"{name}\" index {idx} out of range"
                )));
            }
        }
        let c = &self.constants;
        for (name, v) in [("alpha", c.alpha), ("beta", c.beta)] {
            if !(v > 0.0 && v < std::f64::consts::FRAC_PI_2) {
                return Err(TemplateError::Invalid(format!(
                    "constant {name}={v} outside (0, pi/2)"
                )));
            }
        }
        let recomputed = self.recompute_constants();
        for (name, stored, again) in [
            ("alpha", c.alpha, recomputed.alpha),
            ("beta", c.beta, recomputed.beta),
            ("s_depth", c.s_depth, recomputed.s_depth),
            ("waist_girth", c.waist_girth, recomputed.waist_girth),
            ("chest_rho", c.chest_rho, recomputed.chest_rho),
            ("waist_rho", c.waist_rho, recomputed.waist_rho),
        ] {
            if (stored - again).abs() > 1e-9 * stored.abs().max(1.0) {
                return Err(TemplateError::Invalid(format!(
                    "constant {name} stored {stored} but recomputed {again}"
                )));
            }
        }

        // Every vertex's material coords inside exactly one piece polygon.
        for (vi, uv) in self.material_coords.iter().enumerate() {
            let hits: Vec<&str> = self
                .pieces
                .iter()
                .filter(|p| point_in_polygon(*uv, &p.contour, 1e-9))
                .map(|p| p.name.as_str())
                .collect();
            if hits.len() != 1 {
                return Err(TemplateError::Invalid(format!(
                    "vertex {vi} material coords ({}, {}) inside {} piece polygons ({:?})",
                    uv.x,
                    uv.y,
                    hits.len(),
                    hits
                )));
            }
        }

        // Faces must not straddle pieces.
        let piece_of = |uv: Pt2| -> usize {
            self.pieces
                .iter()
                .position(|p| point_in_polygon(uv, &p.contour, 1e-9))
                .unwrap()
        };
        for (fi, f) in self.faces.iter().enumerate() {
            let p0 = piece_of(self.material_coords[f[0] as usize]);
            for &v in &f[1..] {
                if piece_of(self.material_coords[v as usize]) != p0 {
                    return Err(TemplateError::Invalid(format!(
                        "face {fi} straddles reference pieces"
                    )));
                }
            }
        }

        // Pairwise disjoint piece polygons with at least 2% layout gutter.
        for i in 0..self.pieces.len() {
            for j in (i + 1)..self.pieces.len() {
                let d = polygon_distance(&self.pieces[i].contour, &self.pieces[j].contour);
                if d < 0.02 {
                    return Err(TemplateError::Invalid(format!(
                        "pieces \"{}\" and \"{}\" separated by {d:.4} < 0.02 layout units",
                        self.pieces[i].name, self.pieces[j].name
                    )));
                }
            }
        }

        // Reference landmarks must lie on their piece contour.
        for piece in &self.pieces {
            for (name, uv) in &piece.landmarks {
                let poly = crate::geomkit::ClosedPolyline::new(piece.contour.clone())
                    .map_err(|e| TemplateError::Invalid(e.to_string()))?;
                let snapped = crate::geomkit::snap_to_contour(*uv, &poly);
                if snapped.position.distance(*uv) > 1e-6 {
                    return Err(TemplateError::Invalid(format!(
                        "piece \"{}\" landmark \"{name}\" not on its contour",
                        piece.name
                    )));
                }
            }
        }

        self.check_watertight()
    }

    /// Positional watertightness: every mesh edge, matched across pieces by
    /// quantized endpoint positions, must be shared by exactly two faces;
    /// edges used once must form exactly the expected opening loops.
    fn check_watertight(&self) -> Result<(), TemplateError> {
        let key = |v: u32| -> (i64, i64, i64) {
            let p = self.vertices[v as usize];
            let q = 1e7;
            (
                (p.x * q).round() as i64,
                (p.y * q).round() as i64,
                (p.z * q).round() as i64,
            )
        };
        let mut counts: BTreeMap<((i64, i64, i64), (i64, i64, i64)), usize> = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let a = key(f[k]);
                let b = key(f[(k + 1) % 3]);
                let e = if a <= b { (a, b) } else { (b, a) };
                *counts.entry(e).or_insert(0) += 1;
            }
        }
        let mut boundary: Vec<((i64, i64, i64), (i64, i64, i64))> = Vec::new();
        for (e, n) in &counts {
            match n {
                2 => {}
                1 => boundary.push(*e),
                n => {
                    return Err(TemplateError::Invalid(format!(
                        "edge {e:?} shared by {n} faces"
                    )))
                }
            }
        }
        // Boundary edges must decompose into closed loops.
        let mut adj: BTreeMap<(i64, i64, i64), Vec<(i64, i64, i64)>> = BTreeMap::new();
        for (a, b) in &boundary {
            adj.entry(*a).or_default().push(*b);
            adj.entry(*b).or_default().push(*a);
        }
        for (p, ns) in &adj {
            if ns.len() != 2 {
                return Err(TemplateError::Invalid(format!(
                    "boundary vertex {p:?} has {} boundary edges",
                    ns.len()
                )));
            }
        }
        let mut visited: std::collections::BTreeSet<(i64, i64, i64)> = Default::default();
        let mut loops = 0;
        for start in adj.keys() {
            if visited.contains(start) {
                continue;
            }
            loops += 1;
            let mut prev = *start;
            let mut cur = adj[start][0];
            visited.insert(prev);
            while cur != *start {
                visited.insert(cur);
                let ns = &adj[&cur];
                let next = if ns[0] == prev { ns[1] } else { ns[0] };
                prev = cur;
                cur = next;
            }
        }
        let expected = expected_boundary_loops(self.garment_type);
        if loops != expected {
            return Err(TemplateError::Invalid(format!(
                "found {loops} opening loops, expected {expected}"
            )));
        }
        Ok(())
    }
}
