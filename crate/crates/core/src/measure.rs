//! Metric measurement estimation from landmark pixel geometry.
//!
//! Point-to-point measurements (sleeve lengths, chest width) use Euclidean
//! pixel distances. Vertical measurements (armpit-to-hemline and friends) use
//! image-axis y-differences: product photos are upright and the deformation
//! lattice is axis-aligned, so this is the quantity the solver needs. That
//! makes vertical fields sensitive to image rotation, which is a documented
//! limitation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{CaptureMode, GarmentType, LandmarkSet};
use crate::geom::Pt2;
use crate::geomkit::{ellipse_girth_from_width, ellipse_width_from_half_perimeter};

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("landmark \"{0}\" missing from set")]
    MissingLandmark(String),
    #[error("landmark \"{0}\" is not visible; required for measuring")]
    InvisibleLandmark(String),
    #[error("reference landmarks coincide; zero-length scale reference")]
    ZeroReference,
    #[error("non-positive reference measurement: {0} m")]
    BadReference(f64),
    #[error("measurement inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Geom(#[from] crate::geomkit::GeomError),
}

/// Default reference lengths when the user supplies no measurement; the model
/// is then only correct up to scale and the report is flagged.
pub const DEFAULT_TSHIRT_SLEEVE_M: f64 = 0.25;
pub const DEFAULT_PANTS_SIDE_M: f64 = 1.0;

/// Reference measurement names accepted per garment type.
pub fn scale_reference_name(garment: GarmentType) -> &'static str {
    match garment {
        GarmentType::Tshirt => "sleeve_length_left",
        GarmentType::Pants => "side_length_left",
    }
}

/// Conversion between image pixels and world meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub reference_name: String,
    pub reference_meters: f64,
    pub pixels_per_meter: f64,
    /// True when no user measurement was given and a default was applied.
    pub default_scale: bool,
}

fn require_visible(set: &LandmarkSet, name: &str) -> Result<Pt2, MeasureError> {
    let lm = set
        .get(name)
        .ok_or_else(|| MeasureError::MissingLandmark(name.to_string()))?;
    if !lm.visible {
        return Err(MeasureError::InvisibleLandmark(name.to_string()));
    }
    Ok(Pt2::new(lm.x, lm.y))
}

/// Pixel length of the garment's scale reference feature.
///
/// T-shirt: shoulder_left to the midpoint of the left cuff corners.
/// Pants: waist_left to bottom_left_outer.
fn reference_pixels(set: &LandmarkSet) -> Result<f64, MeasureError> {
    let len = match set.garment_type {
        GarmentType::Tshirt => {
            let shoulder = require_visible(set, "shoulder_left")?;
            let cuff = require_visible(set, "cuff_left_outer")?
                .midpoint(require_visible(set, "cuff_left_inner")?);
            shoulder.distance(cuff)
        }
        GarmentType::Pants => {
            let waist = require_visible(set, "waist_left")?;
            let bottom = require_visible(set, "bottom_left_outer")?;
            waist.distance(bottom)
        }
    };
    if len <= 0.0 {
        return Err(MeasureError::ZeroReference);
    }
    Ok(len)
}

/// Derives the pixel scale from the user measurement, or the per-garment
/// default when none is given.
pub fn pixel_scale(
    set: &LandmarkSet,
    user: Option<(&str, f64)>,
) -> Result<ScaleSpec, MeasureError> {
    let ref_px = reference_pixels(set)?;
    let (name, meters, default_scale) = match user {
        Some((name, meters)) => (name.to_string(), meters, false),
        None => {
            let meters = match set.garment_type {
                GarmentType::Tshirt => DEFAULT_TSHIRT_SLEEVE_M,
                GarmentType::Pants => DEFAULT_PANTS_SIDE_M,
            };
            (scale_reference_name(set.garment_type).to_string(), meters, true)
        }
    };
    if meters <= 0.0 {
        return Err(MeasureError::BadReference(meters));
    }
    Ok(ScaleSpec {
        reference_name: name,
        reference_meters: meters,
        pixels_per_meter: ref_px / meters,
        default_scale,
    })
}

/// Per-side raw values kept for diagnostics next to the averaged fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidePair {
    pub left: f64,
    pub right: f64,
}

impl SidePair {
    fn mean(self) -> f64 {
        0.5 * (self.left + self.right)
    }
}

/// T-shirt measurements in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TshirtMeasurements {
    pub left_sleeve_length: f64,
    pub right_sleeve_length: f64,
    pub chest_width: f64,
    pub armpit_to_hemline: f64,
    pub armpit_to_shoulder: f64,
    pub neck_to_hemline: f64,
    pub capture_mode: CaptureMode,
    pub scale: ScaleSpec,
    pub armpit_to_hemline_sides: SidePair,
    pub armpit_to_shoulder_sides: SidePair,
}

impl TshirtMeasurements {
    pub fn validate(&self) -> Result<(), MeasureError> {
        for (name, v) in [
            ("left_sleeve_length", self.left_sleeve_length),
            ("right_sleeve_length", self.right_sleeve_length),
            ("chest_width", self.chest_width),
            ("armpit_to_hemline", self.armpit_to_hemline),
            ("armpit_to_shoulder", self.armpit_to_shoulder),
            ("neck_to_hemline", self.neck_to_hemline),
        ] {
            if !(v > 0.0) {
                return Err(MeasureError::Inconsistent(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.neck_to_hemline <= self.armpit_to_hemline {
            return Err(MeasureError::Inconsistent(format!(
                "neck_to_hemline ({}) must exceed armpit_to_hemline ({})",
                self.neck_to_hemline, self.armpit_to_hemline
            )));
        }
        Ok(())
    }
}

/// Pants measurements in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PantsMeasurements {
    pub crotch_to_bottom: f64,
    pub crotch_to_waist: f64,
    pub waist_girth: f64,
    pub capture_mode: CaptureMode,
    pub scale: ScaleSpec,
    pub crotch_to_bottom_sides: SidePair,
}

impl PantsMeasurements {
    pub fn validate(&self) -> Result<(), MeasureError> {
        for (name, v) in [
            ("crotch_to_bottom", self.crotch_to_bottom),
            ("crotch_to_waist", self.crotch_to_waist),
            ("waist_girth", self.waist_girth),
        ] {
            if !(v > 0.0) {
                return Err(MeasureError::Inconsistent(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A garment-typed measurement report, the unit the CLI serializes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "garment_type", rename_all = "snake_case")]
pub enum MeasurementReport {
    Tshirt(TshirtMeasurements),
    Pants(PantsMeasurements),
}

impl MeasurementReport {
    pub fn garment_type(&self) -> GarmentType {
        match self {
            MeasurementReport::Tshirt(_) => GarmentType::Tshirt,
            MeasurementReport::Pants(_) => GarmentType::Pants,
        }
    }
}

/// Measures a T-shirt from front-view landmarks.
///
/// `rho_chest` is the chest cross-section aspect ratio used for flat-lay
/// half-perimeter inversion (taken from the template constants).
pub fn measure_tshirt(
    front: &LandmarkSet,
    mode: CaptureMode,
    scale: &ScaleSpec,
    rho_chest: f64,
) -> Result<TshirtMeasurements, MeasureError> {
    assert_eq!(front.garment_type, GarmentType::Tshirt);
    let ppm = scale.pixels_per_meter;
    if !(ppm > 0.0) {
        return Err(MeasureError::BadReference(ppm));
    }

    let shoulder_l = require_visible(front, "shoulder_left")?;
    let shoulder_r = require_visible(front, "shoulder_right")?;
    let armpit_l = require_visible(front, "armpit_left")?;
    let armpit_r = require_visible(front, "armpit_right")?;
    let hem_l = require_visible(front, "hem_left")?;
    let hem_r = require_visible(front, "hem_right")?;
    let neck_c = require_visible(front, "neck_center_front")?;
    let cuff_l = require_visible(front, "cuff_left_outer")?
        .midpoint(require_visible(front, "cuff_left_inner")?);
    let cuff_r = require_visible(front, "cuff_right_outer")?
        .midpoint(require_visible(front, "cuff_right_inner")?);

    let left_sleeve_length = shoulder_l.distance(cuff_l) / ppm;
    let right_sleeve_length = shoulder_r.distance(cuff_r) / ppm;

    let a2h = SidePair {
        left: (armpit_l.y - hem_l.y).abs() / ppm,
        right: (armpit_r.y - hem_r.y).abs() / ppm,
    };
    let a2s = SidePair {
        left: (armpit_l.y - shoulder_l.y).abs() / ppm,
        right: (armpit_r.y - shoulder_r.y).abs() / ppm,
    };
    let hem_mid = hem_l.midpoint(hem_r);
    let neck_to_hemline = (neck_c.y - hem_mid.y).abs() / ppm;

    let armpit_px = armpit_l.distance(armpit_r);
    let chest_width = match mode {
        CaptureMode::Mannequin => armpit_px / ppm,
        CaptureMode::FlatLay => ellipse_width_from_half_perimeter(armpit_px / ppm, rho_chest)?,
    };

    let report = TshirtMeasurements {
        left_sleeve_length,
        right_sleeve_length,
        chest_width,
        armpit_to_hemline: a2h.mean(),
        armpit_to_shoulder: a2s.mean(),
        neck_to_hemline,
        capture_mode: mode,
        scale: scale.clone(),
        armpit_to_hemline_sides: a2h,
        armpit_to_shoulder_sides: a2s,
    };
    report.validate()?;
    Ok(report)
}

/// Measures pants from front-view landmarks.
///
/// The waist girth from a single front width mirrors the chest logic:
/// flat-lay doubles the width, mannequin runs the ellipse girth at
/// `rho_waist`.
pub fn measure_pants(
    front: &LandmarkSet,
    mode: CaptureMode,
    scale: &ScaleSpec,
    rho_waist: f64,
) -> Result<PantsMeasurements, MeasureError> {
    assert_eq!(front.garment_type, GarmentType::Pants);
    let ppm = scale.pixels_per_meter;
    if !(ppm > 0.0) {
        return Err(MeasureError::BadReference(ppm));
    }

    let waist_l = require_visible(front, "waist_left")?;
    let waist_r = require_visible(front, "waist_right")?;
    let crotch = require_visible(front, "crotch")?;
    let bottom_l = require_visible(front, "bottom_left_outer")?
        .midpoint(require_visible(front, "bottom_left_inner")?);
    let bottom_r = require_visible(front, "bottom_right_outer")?
        .midpoint(require_visible(front, "bottom_right_inner")?);

    let c2b = SidePair {
        left: (crotch.y - bottom_l.y).abs() / ppm,
        right: (crotch.y - bottom_r.y).abs() / ppm,
    };
    let waist_mid = waist_l.midpoint(waist_r);
    let crotch_to_waist = (crotch.y - waist_mid.y).abs() / ppm;

    let waist_width = waist_l.distance(waist_r) / ppm;
    let waist_girth = match mode {
        CaptureMode::FlatLay => 2.0 * waist_width,
        CaptureMode::Mannequin => ellipse_girth_from_width(waist_width, rho_waist)?,
    };

    let report = PantsMeasurements {
        crotch_to_bottom: c2b.mean(),
        crotch_to_waist,
        waist_girth,
        capture_mode: mode,
        scale: scale.clone(),
        crotch_to_bottom_sides: c2b,
    };
    report.validate()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{landmark_registry, Landmark, View};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn tshirt_set(points: &[(&str, f64, f64)]) -> LandmarkSet {
        let mut map = BTreeMap::new();
        for name in landmark_registry(GarmentType::Tshirt) {
            map.insert(
                name.to_string(),
                Landmark {
                    x: 50.0,
                    y: 50.0,
                    visible: true,
                },
            );
        }
        for (name, x, y) in points {
            map.insert(
                name.to_string(),
                Landmark {
                    x: *x,
                    y: *y,
                    visible: true,
                },
            );
        }
        LandmarkSet::new(GarmentType::Tshirt, View::Front, (1200, 1200), map).unwrap()
    }

    /// Geometrically consistent synthetic T-shirt landmarks generated from
    /// chosen metric values at a chosen scale.
    fn generated_tshirt(ppm: f64) -> (LandmarkSet, [f64; 6]) {
        let chest = 0.5;
        let a2h = 0.35;
        let a2s = 0.15;
        let n2h = 0.57;
        let sleeve = 0.25;
        let hem_y = 1000.0;
        let armpit_y = hem_y - a2h * ppm;
        let shoulder_y = armpit_y - a2s * ppm;
        let neck_y = hem_y - n2h * ppm;
        let xl = 300.0;
        let xr = xl + chest * ppm;
        let set = tshirt_set(&[
            ("hem_left", xl, hem_y),
            ("hem_right", xr, hem_y),
            ("armpit_left", xl, armpit_y),
            ("armpit_right", xr, armpit_y),
            ("shoulder_left", xl, shoulder_y),
            ("shoulder_right", xr, shoulder_y),
            ("neck_center_front", 0.5 * (xl + xr), neck_y),
            // Cuff midpoints sit at shoulder height so the shoulder-to-cuff
            // distance equals the x gap exactly.
            ("cuff_left_outer", xl - sleeve * ppm, shoulder_y - 10.0),
            ("cuff_left_inner", xl - sleeve * ppm, shoulder_y + 10.0),
            ("cuff_right_outer", xr + sleeve * ppm, shoulder_y - 10.0),
            ("cuff_right_inner", xr + sleeve * ppm, shoulder_y + 10.0),
        ]);
        (set, [sleeve, sleeve, chest, a2h, a2s, n2h])
    }

    #[test]
    fn pixel_scale_ratio() {
        let set = tshirt_set(&[
            ("shoulder_left", 400.0, 100.0),
            ("cuff_left_outer", 700.0, 90.0),
            ("cuff_left_inner", 700.0, 110.0),
        ]);
        let scale = pixel_scale(&set, Some(("sleeve_length_left", 0.6))).unwrap();
        assert_eq!(scale.pixels_per_meter, 500.0);
        assert!(!scale.default_scale);
    }

    #[test]
    fn pixel_scale_default_flagged() {
        let set = tshirt_set(&[
            ("shoulder_left", 400.0, 100.0),
            ("cuff_left_outer", 650.0, 100.0),
            ("cuff_left_inner", 650.0, 100.0),
        ]);
        let scale = pixel_scale(&set, None).unwrap();
        assert!(scale.default_scale);
        assert_eq!(scale.reference_meters, DEFAULT_TSHIRT_SLEEVE_M);
        assert_eq!(scale.pixels_per_meter, 250.0 / 0.25);
    }

    #[test]
    fn pixel_scale_zero_reference() {
        let set = tshirt_set(&[
            ("shoulder_left", 400.0, 100.0),
            ("cuff_left_outer", 400.0, 100.0),
            ("cuff_left_inner", 400.0, 100.0),
        ]);
        assert!(matches!(
            pixel_scale(&set, None),
            Err(MeasureError::ZeroReference)
        ));
    }

    #[test]
    fn chest_width_mannequin_vs_flat_lay() {
        let scale = ScaleSpec {
            reference_name: "sleeve_length_left".into(),
            reference_meters: 0.25,
            pixels_per_meter: 500.0,
            default_scale: false,
        };
        let set = tshirt_set(&[
            ("armpit_left", 100.0, 200.0),
            ("armpit_right", 300.0, 200.0),
            ("hem_left", 100.0, 500.0),
            ("hem_right", 300.0, 500.0),
            ("shoulder_left", 100.0, 150.0),
            ("shoulder_right", 300.0, 150.0),
            ("neck_center_front", 200.0, 100.0),
            ("cuff_left_outer", 50.0, 150.0),
            ("cuff_left_inner", 50.0, 170.0),
            ("cuff_right_outer", 350.0, 150.0),
            ("cuff_right_inner", 350.0, 170.0),
        ]);
        let mannequin = measure_tshirt(&set, CaptureMode::Mannequin, &scale, 1.0).unwrap();
        assert!((mannequin.chest_width - 0.4).abs() < 1e-12);

        let flat = measure_tshirt(&set, CaptureMode::FlatLay, &scale, 1.0).unwrap();
        assert!((flat.chest_width - 0.4 * 2.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn generator_round_trip_mannequin() {
        let ppm = 500.0;
        let (set, expected) = generated_tshirt(ppm);
        let scale = pixel_scale(&set, Some(("sleeve_length_left", 0.25))).unwrap();
        assert!((scale.pixels_per_meter - ppm).abs() < 1e-9);
        let report = measure_tshirt(&set, CaptureMode::Mannequin, &scale, 0.55).unwrap();
        let got = [
            report.left_sleeve_length,
            report.right_sleeve_length,
            report.chest_width,
            report.armpit_to_hemline,
            report.armpit_to_shoulder,
            report.neck_to_hemline,
        ];
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!((g - e).abs() < 1e-9, "{g} vs {e}");
        }
    }

    #[test]
    fn inconsistent_report_rejected() {
        let ppm = 500.0;
        let (set, _) = generated_tshirt(ppm);
        let scale = pixel_scale(&set, Some(("sleeve_length_left", 0.25))).unwrap();
        // Push the neck below the armpit line: neck_to_hemline drops under
        // armpit_to_hemline and the report must refuse.
        let mut bad = set.clone();
        let armpit_y = bad.get("armpit_left").unwrap().y;
        bad.landmarks.get_mut("neck_center_front").unwrap().y = armpit_y + 50.0;
        let err = measure_tshirt(&bad, CaptureMode::Mannequin, &scale, 0.55).unwrap_err();
        assert!(err.to_string().contains("neck_to_hemline"), "{err}");
    }

    fn pants_set(points: &[(&str, f64, f64)]) -> LandmarkSet {
        let mut map = BTreeMap::new();
        for name in landmark_registry(GarmentType::Pants) {
            map.insert(
                name.to_string(),
                Landmark {
                    x: 50.0,
                    y: 50.0,
                    visible: true,
                },
            );
        }
        for (name, x, y) in points {
            map.insert(
                name.to_string(),
                Landmark {
                    x: *x,
                    y: *y,
                    visible: true,
                },
            );
        }
        LandmarkSet::new(GarmentType::Pants, View::Front, (1200, 1200), map).unwrap()
    }

    #[test]
    fn pants_flat_lay_girth_doubles_width() {
        let set = pants_set(&[
            ("waist_left", 50.0, 10.0),
            ("waist_right", 250.0, 10.0),
            ("crotch", 150.0, 300.0),
            ("bottom_left_outer", 50.0, 700.0),
            ("bottom_left_inner", 120.0, 700.0),
            ("bottom_right_inner", 180.0, 700.0),
            ("bottom_right_outer", 250.0, 700.0),
        ]);
        let scale = ScaleSpec {
            reference_name: "side_length_left".into(),
            reference_meters: 1.0,
            pixels_per_meter: 500.0,
            default_scale: false,
        };
        let report = measure_pants(&set, CaptureMode::FlatLay, &scale, 0.7).unwrap();
        assert!((report.waist_girth - 0.8).abs() < 1e-12);

        let mannequin = measure_pants(&set, CaptureMode::Mannequin, &scale, 1.0).unwrap();
        assert!((mannequin.waist_girth - 0.4 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn mirror_swaps_sides_in_report() {
        let ppm = 500.0;
        let (mut set, _) = generated_tshirt(ppm);
        // Make the sides distinguishable.
        set.landmarks.get_mut("cuff_left_outer").unwrap().x -= 30.0;
        set.landmarks.get_mut("cuff_left_inner").unwrap().x -= 30.0;
        let scale = ScaleSpec {
            reference_name: "sleeve_length_left".into(),
            reference_meters: 0.25,
            pixels_per_meter: ppm,
            default_scale: false,
        };
        let report = measure_tshirt(&set, CaptureMode::Mannequin, &scale, 0.55).unwrap();

        let mask = crate::annotation::SegmentationMask::new(
            GarmentType::Tshirt,
            View::Front,
            1200,
            1200,
            vec![0u8; 1200 * 1200],
        )
        .unwrap();
        let (mirrored, _) = crate::annotation::mirror_annotations(&set, &mask);
        let mreport = measure_tshirt(&mirrored, CaptureMode::Mannequin, &scale, 0.55).unwrap();

        assert!((report.left_sleeve_length - mreport.right_sleeve_length).abs() < 1e-9);
        assert!((report.right_sleeve_length - mreport.left_sleeve_length).abs() < 1e-9);
        assert!((report.chest_width - mreport.chest_width).abs() < 1e-9);
        assert!((report.neck_to_hemline - mreport.neck_to_hemline).abs() < 1e-9);
    }

    #[test]
    fn doubling_reference_doubles_fields_exactly() {
        let (set, _) = generated_tshirt(500.0);
        let s1 = pixel_scale(&set, Some(("sleeve_length_left", 0.25))).unwrap();
        let s2 = pixel_scale(&set, Some(("sleeve_length_left", 0.5))).unwrap();
        let r1 = measure_tshirt(&set, CaptureMode::FlatLay, &s1, 0.55).unwrap();
        let r2 = measure_tshirt(&set, CaptureMode::FlatLay, &s2, 0.55).unwrap();
        assert_eq!(r2.left_sleeve_length, 2.0 * r1.left_sleeve_length);
        assert_eq!(r2.chest_width, 2.0 * r1.chest_width);
        assert_eq!(r2.armpit_to_hemline, 2.0 * r1.armpit_to_hemline);
        assert_eq!(r2.neck_to_hemline, 2.0 * r1.neck_to_hemline);
    }

    proptest! {
        /// Rigid motions leave the distance-based fields unchanged;
        /// translations leave the y-difference fields unchanged too.
        #[test]
        fn rigid_invariance(angle in -0.5..0.5f64, tx in -40.0..40.0f64, ty in -40.0..40.0f64) {
            let (set, _) = generated_tshirt(400.0);
            let scale = ScaleSpec {
                reference_name: "sleeve_length_left".into(),
                reference_meters: 0.25,
                pixels_per_meter: 400.0,
                default_scale: false,
            };
            let base = measure_tshirt(&set, CaptureMode::Mannequin, &scale, 0.55).unwrap();

            let (s, c) = angle.sin_cos();
            let rot = |p: Landmark| {
                let (cx, cy) = (600.0, 600.0);
                let (dx, dy) = (p.x - cx, p.y - cy);
                Landmark {
                    x: cx + c * dx - s * dy + tx,
                    y: cy + s * dx + c * dy + ty,
                    visible: true,
                }
            };
            let mut rotated = set.clone();
            for lm in rotated.landmarks.values_mut() {
                *lm = rot(*lm);
            }
            let moved = measure_tshirt(&rotated, CaptureMode::Mannequin, &scale, 0.55).unwrap();
            prop_assert!((moved.left_sleeve_length - base.left_sleeve_length).abs() < 1e-9);
            prop_assert!((moved.right_sleeve_length - base.right_sleeve_length).abs() < 1e-9);
            prop_assert!((moved.chest_width - base.chest_width).abs() < 1e-9);

            let mut shifted = set.clone();
            for lm in shifted.landmarks.values_mut() {
                lm.x += tx;
                lm.y += ty;
            }
            let shifted = measure_tshirt(&shifted, CaptureMode::Mannequin, &scale, 0.55).unwrap();
            prop_assert!((shifted.armpit_to_hemline - base.armpit_to_hemline).abs() < 1e-9);
            prop_assert!((shifted.armpit_to_shoulder - base.armpit_to_shoulder).abs() < 1e-9);
            prop_assert!((shifted.neck_to_hemline - base.neck_to_hemline).abs() < 1e-9);
        }
    }
}
