//! Annotation interchange formats: fashion landmarks and semantic part masks.
//!
//! These types stand in for the outputs of an upstream parsing network. The
//! artifact only consumes them as files: landmarks as UTF-8 JSON, masks as
//! 8-bit single-channel PNG with raw label ids.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use image::{GrayImage, RgbaImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Supported garment types. Every pipeline artifact is tagged with one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarmentType {
    Tshirt,
    Pants,
}

impl fmt::Display for GarmentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GarmentType::Tshirt => write!(f, "tshirt"),
            GarmentType::Pants => write!(f, "pants"),
        }
    }
}

/// Which photo a set of annotations belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Front,
    Back,
}

impl View {
    pub fn flipped(self) -> View {
        match self {
            View::Front => View::Back,
            View::Back => View::Front,
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            View::Front => write!(f, "front"),
            View::Back => write!(f, "back"),
        }
    }
}

/// How the garment was photographed. Flat-lay widths are half-perimeters and
/// need ellipse inversion; mannequin widths are read directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureMode {
    Mannequin,
    FlatLay,
}

/// Canonical landmark name registry. Thirteen names for tops, seven for
/// pants. "left"/"right" are image-space (a back photo names its own sides).
pub fn landmark_registry(garment: GarmentType) -> &'static [&'static str] {
    match garment {
        GarmentType::Tshirt => &[
            "neck_center_front",
            "neck_left",
            "neck_right",
            "shoulder_left",
            "shoulder_right",
            "cuff_left_outer",
            "cuff_left_inner",
            "cuff_right_outer",
            "cuff_right_inner",
            "armpit_left",
            "armpit_right",
            "hem_left",
            "hem_right",
        ],
        GarmentType::Pants => &[
            "waist_left",
            "waist_right",
            "crotch",
            "bottom_left_outer",
            "bottom_left_inner",
            "bottom_right_inner",
            "bottom_right_outer",
        ],
    }
}

/// Left/right counterpart for a landmark name, identity for center names.
pub fn mirrored_landmark_name(name: &str) -> String {
    if let Some(rest) = name.find("_left") {
        let _ = rest;
        return name.replacen("_left", "_right", 1);
    }
    if name.contains("_right") {
        return name.replacen("_right", "_left", 1);
    }
    name.to_string()
}

/// Segmentation label registry: `(id, name)` pairs, background included.
pub fn label_registry(garment: GarmentType) -> &'static [(u8, &'static str)] {
    match garment {
        GarmentType::Tshirt => &[
            (0, "background"),
            (1, "torso"),
            (2, "left_sleeve"),
            (3, "right_sleeve"),
            (4, "collar"),
            // `hat` is accepted and carried through but never textured; the
            // T-shirt template has no hood piece.
            (5, "hat"),
        ],
        GarmentType::Pants => &[(0, "background"), (1, "left_part"), (2, "right_part")],
    }
}

/// Label id swap table under horizontal mirroring.
fn mirrored_label(garment: GarmentType, id: u8) -> u8 {
    match garment {
        GarmentType::Tshirt => match id {
            2 => 3,
            3 => 2,
            other => other,
        },
        GarmentType::Pants => match id {
            1 => 2,
            2 => 1,
            other => other,
        },
    }
}

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed landmark file {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("landmark schema error: {0}")]
    Schema(String),
    #[error("mask decode error {path}: {detail}")]
    MaskDecode { path: String, detail: String },
    #[error("mask contains unknown label id {id} ({count} px) for {garment}")]
    UnknownLabel {
        id: u8,
        count: usize,
        garment: GarmentType,
    },
}

/// One named key point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    pub visible: bool,
}

/// A complete, validated set of landmarks for one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    pub garment_type: GarmentType,
    pub view: View,
    /// `(width, height)` of the annotated image in pixels.
    pub image_size: (u32, u32),
    pub landmarks: BTreeMap<String, Landmark>,
}

impl LandmarkSet {
    /// Build and validate: all registry names present, nothing unknown, all
    /// coordinates finite and within `[0, size-1]` on each axis (so that the
    /// mirror map `x -> width-1-x` stays in bounds).
    pub fn new(
        garment_type: GarmentType,
        view: View,
        image_size: (u32, u32),
        landmarks: BTreeMap<String, Landmark>,
    ) -> Result<Self, AnnotationError> {
        let registry = landmark_registry(garment_type);
        for name in registry {
            if !landmarks.contains_key(*name) {
                return Err(AnnotationError::Schema(format!(
                    "missing landmark \"{name}\" for {garment_type}"
                )));
            }
        }
        for (name, lm) in &landmarks {
            if !registry.contains(&name.as_str()) {
                return Err(AnnotationError::Schema(format!(
                    "unknown landmark \"{name}\" for {garment_type}"
                )));
            }
            if !lm.x.is_finite() || !lm.y.is_finite() {
                return Err(AnnotationError::Schema(format!(
                    "landmark \"{name}\" has non-finite coordinates"
                )));
            }
            let (w, h) = (image_size.0 as f64, image_size.1 as f64);
            if lm.x < 0.0 || lm.x > w - 1.0 || lm.y < 0.0 || lm.y > h - 1.0 {
                return Err(AnnotationError::Schema(format!(
                    "landmark \"{name}\" at ({}, {}) is out of bounds for {}x{} image",
                    lm.x, lm.y, image_size.0, image_size.1
                )));
            }
        }
        Ok(Self {
            garment_type,
            view,
            image_size,
            landmarks,
        })
    }

    pub fn get(&self, name: &str) -> Option<Landmark> {
        self.landmarks.get(name).copied()
    }

    pub fn point(&self, name: &str) -> Option<crate::geom::Pt2> {
        self.get(name).map(|l| crate::geom::Pt2::new(l.x, l.y))
    }
}

/// Per-pixel semantic part labels for one view.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMask {
    pub garment_type: GarmentType,
    pub view: View,
    pub width: u32,
    pub height: u32,
    /// Row-major label ids, `width * height` entries.
    pub data: Vec<u8>,
}

impl SegmentationMask {
    pub fn new(
        garment_type: GarmentType,
        view: View,
        width: u32,
        height: u32,
        data: Vec<u8>,
    ) -> Result<Self, AnnotationError> {
        assert_eq!(data.len(), (width as usize) * (height as usize));
        let registry = label_registry(garment_type);
        let mut counts = [0usize; 256];
        for &id in &data {
            counts[id as usize] += 1;
        }
        for (id, count) in counts.iter().enumerate() {
            if *count > 0 && !registry.iter().any(|(rid, _)| *rid as usize == id) {
                return Err(AnnotationError::UnknownLabel {
                    id: id as u8,
                    count: *count,
                    garment: garment_type,
                });
            }
        }
        Ok(Self {
            garment_type,
            view,
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn label_at(&self, x: u32, y: u32) -> u8 {
        self.data[(y as usize) * (self.width as usize) + (x as usize)]
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.data.iter().filter(|&&v| v == label).count()
    }
}

/// Loads a landmark JSON file (see the module docs for the schema).
pub fn load_landmarks(path: &Path) -> Result<LandmarkSet, AnnotationError> {
    let text = std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_landmarks(&text).map_err(|e| match e {
        AnnotationError::Parse { detail, .. } => AnnotationError::Parse {
            path: path.display().to_string(),
            detail,
        },
        other => other,
    })
}

#[derive(Serialize, Deserialize)]
struct LandmarkFile {
    garment_type: GarmentType,
    view: View,
    image_size: [u32; 2],
    landmarks: BTreeMap<String, Landmark>,
}

/// Parses landmark JSON from a string.
pub fn parse_landmarks(text: &str) -> Result<LandmarkSet, AnnotationError> {
    let raw: LandmarkFile = serde_json::from_str(text).map_err(|e| AnnotationError::Parse {
        path: String::new(),
        detail: e.to_string(),
    })?;
    LandmarkSet::new(
        raw.garment_type,
        raw.view,
        (raw.image_size[0], raw.image_size[1]),
        raw.landmarks,
    )
}

/// Serializes a landmark set back to its JSON file form.
pub fn landmarks_to_json(set: &LandmarkSet) -> String {
    let file = LandmarkFile {
        garment_type: set.garment_type,
        view: set.view,
        image_size: [set.image_size.0, set.image_size.1],
        landmarks: set.landmarks.clone(),
    };
    serde_json::to_string_pretty(&file).expect("landmark serialization cannot fail")
}

pub fn save_landmarks(set: &LandmarkSet, path: &Path) -> Result<(), AnnotationError> {
    std::fs::write(path, landmarks_to_json(set)).map_err(|source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads an 8-bit single-channel PNG as a segmentation mask.
pub fn load_mask(
    path: &Path,
    garment_type: GarmentType,
    view: View,
) -> Result<SegmentationMask, AnnotationError> {
    let img = image::open(path).map_err(|e| AnnotationError::MaskDecode {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let gray: GrayImage = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(AnnotationError::MaskDecode {
                path: path.display().to_string(),
                detail: format!(
                    "expected 8-bit single-channel raster, got {:?}",
                    other.color()
                ),
            })
        }
    };
    let (width, height) = gray.dimensions();
    SegmentationMask::new(garment_type, view, width, height, gray.into_raw())
}

pub fn save_mask(mask: &SegmentationMask, path: &Path) -> Result<(), AnnotationError> {
    let img = GrayImage::from_raw(mask.width, mask.height, mask.data.clone())
        .expect("mask buffer matches dimensions");
    img.save(path).map_err(|e| AnnotationError::MaskDecode {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Horizontally mirrors a view's annotations: the raster flips, landmark x
/// maps to `width-1-x`, left/right landmark names and label ids swap, and the
/// view toggles front/back. Applying it twice restores the input bit-exactly.
pub fn mirror_annotations(
    landmarks: &LandmarkSet,
    mask: &SegmentationMask,
) -> (LandmarkSet, SegmentationMask) {
    let (w, _h) = landmarks.image_size;
    let mut mirrored = BTreeMap::new();
    for (name, lm) in &landmarks.landmarks {
        mirrored.insert(
            mirrored_landmark_name(name),
            Landmark {
                x: (w as f64 - 1.0) - lm.x,
                y: lm.y,
                visible: lm.visible,
            },
        );
    }
    let lm_out = LandmarkSet::new(
        landmarks.garment_type,
        landmarks.view.flipped(),
        landmarks.image_size,
        mirrored,
    )
    .expect("mirroring a valid set stays valid");

    let mut data = vec![0u8; mask.data.len()];
    let mw = mask.width as usize;
    for y in 0..mask.height as usize {
        for x in 0..mw {
            let src = mask.data[y * mw + x];
            data[y * mw + (mw - 1 - x)] = mirrored_label(mask.garment_type, src);
        }
    }
    let mask_out = SegmentationMask {
        garment_type: mask.garment_type,
        view: mask.view.flipped(),
        width: mask.width,
        height: mask.height,
        data,
    };
    (lm_out, mask_out)
}

/// Horizontally mirrors an RGBA photo (companion to [`mirror_annotations`]
/// for symmetric single-photo mode).
pub fn mirror_image(image: &RgbaImage) -> RgbaImage {
    let (w, h) = image.dimensions();
    let mut out = RgbaImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            out.put_pixel(w - 1 - x, y, *image.get_pixel(x, y));
        }
    }
    out
}

/// Everything describing one photographed view.
#[derive(Debug, Clone)]
pub struct ViewData {
    pub image: RgbaImage,
    pub landmarks: LandmarkSet,
    pub mask: SegmentationMask,
}

/// The complete input to the pipeline. `back` may be absent, in which case
/// front-back symmetry is assumed and the back view is derived by mirroring.
#[derive(Debug, Clone)]
pub struct AnnotationBundle {
    pub garment_type: GarmentType,
    pub capture_mode: CaptureMode,
    pub front: ViewData,
    pub back: Option<ViewData>,
    /// Optional user measurement: `(reference name, meters)`.
    pub scale_measurement: Option<(String, f64)>,
}

impl AnnotationBundle {
    /// Derives the back view by mirroring the front (symmetric mode).
    pub fn mirrored_back(&self) -> ViewData {
        let (landmarks, mask) = mirror_annotations(&self.front.landmarks, &self.front.mask);
        ViewData {
            image: mirror_image(&self.front.image),
            landmarks,
            mask,
        }
    }
}

/// One validation check outcome.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Result of [`validate_bundle`]; failures are entries, not errors.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "CHECK {}: {} {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Mask labels a landmark is expected to sit near.
fn associated_labels(garment: GarmentType, name: &str) -> Vec<u8> {
    match garment {
        GarmentType::Tshirt => match name {
            "neck_center_front" | "neck_left" | "neck_right" => vec![1, 4],
            "shoulder_left" => vec![1, 2],
            "shoulder_right" => vec![1, 3],
            "cuff_left_outer" | "cuff_left_inner" => vec![2],
            "cuff_right_outer" | "cuff_right_inner" => vec![3],
            "armpit_left" => vec![1, 2],
            "armpit_right" => vec![1, 3],
            "hem_left" | "hem_right" => vec![1],
            _ => vec![],
        },
        GarmentType::Pants => match name {
            "waist_left" | "bottom_left_outer" | "bottom_left_inner" => vec![1],
            "waist_right" | "bottom_right_outer" | "bottom_right_inner" => vec![2],
            "crotch" => vec![1, 2],
            _ => vec![],
        },
    }
}

fn min_distance_to_labels(mask: &SegmentationMask, labels: &[u8], px: f64, py: f64) -> f64 {
    let mut best = f64::INFINITY;
    let w = mask.width as usize;
    for y in 0..mask.height as usize {
        for x in 0..w {
            if labels.contains(&mask.data[y * w + x]) {
                let dx = x as f64 - px;
                let dy = y as f64 - py;
                let d = dx * dx + dy * dy;
                if d < best {
                    best = d;
                }
            }
        }
    }
    best.sqrt()
}

fn validate_view(garment: GarmentType, view: &ViewData, which: &str, checks: &mut Vec<Check>) {
    let (iw, ih) = view.image.dimensions();
    let dims_ok = view.landmarks.image_size == (iw, ih)
        && view.mask.width == iw
        && view.mask.height == ih;
    checks.push(Check {
        name: format!("{which}_dimensions"),
        passed: dims_ok,
        detail: format!(
            "image {}x{}, landmarks {}x{}, mask {}x{}",
            iw,
            ih,
            view.landmarks.image_size.0,
            view.landmarks.image_size.1,
            view.mask.width,
            view.mask.height
        ),
    });

    let invisible: Vec<&str> = view
        .landmarks
        .landmarks
        .iter()
        .filter(|(_, lm)| !lm.visible)
        .map(|(n, _)| n.as_str())
        .collect();
    checks.push(Check {
        name: format!("{which}_visibility"),
        passed: invisible.is_empty(),
        detail: if invisible.is_empty() {
            "all landmarks visible".to_string()
        } else {
            format!("invisible landmarks: {}", invisible.join(", "))
        },
    });

    if !dims_ok {
        return; // proximity against a mismatched mask is meaningless
    }
    // Proximity threshold: 2% of the image diagonal.
    let diag = ((iw as f64).powi(2) + (ih as f64).powi(2)).sqrt();
    let threshold = 0.02 * diag;
    let mut worst: Option<(String, f64)> = None;
    for (name, lm) in &view.landmarks.landmarks {
        let labels = associated_labels(garment, name);
        if labels.is_empty() {
            continue;
        }
        let d = min_distance_to_labels(&view.mask, &labels, lm.x, lm.y);
        if worst.as_ref().map(|(_, wd)| d > *wd).unwrap_or(true) {
            worst = Some((name.clone(), d));
        }
    }
    let (worst_name, worst_d) = worst.unwrap_or(("none".into(), 0.0));
    checks.push(Check {
        name: format!("{which}_landmark_proximity"),
        passed: worst_d <= threshold,
        detail: format!(
            "worst: {worst_name} at {:.1} px (threshold {:.1} px)",
            worst_d, threshold
        ),
    });

    // Fragment census: how many connected components each garment label has.
    // Extra fragments are dropped by contour extraction; surface them here.
    let mut fragged = Vec::new();
    for &(id, name) in label_registry(garment) {
        if id == 0 {
            continue;
        }
        let n = crate::geomkit::count_components(&view.mask, id);
        if n > 1 {
            fragged.push(format!("{name}:{n}"));
        }
    }
    checks.push(Check {
        name: format!("{which}_label_fragments"),
        passed: true,
        detail: if fragged.is_empty() {
            "all labels in one piece".to_string()
        } else {
            format!("fragmented labels (largest component used): {}", fragged.join(", "))
        },
    });
}

/// Runs all bundle sanity checks and reports per-check pass/fail.
pub fn validate_bundle(bundle: &AnnotationBundle) -> ValidationReport {
    let mut checks = Vec::new();

    let mut type_ok = bundle.front.landmarks.garment_type == bundle.garment_type
        && bundle.front.mask.garment_type == bundle.garment_type;
    if let Some(back) = &bundle.back {
        type_ok = type_ok
            && back.landmarks.garment_type == bundle.garment_type
            && back.mask.garment_type == bundle.garment_type;
    }
    checks.push(Check {
        name: "garment_type_agreement".into(),
        passed: type_ok,
        detail: format!("bundle is {}", bundle.garment_type),
    });

    validate_view(bundle.garment_type, &bundle.front, "front", &mut checks);
    if let Some(back) = &bundle.back {
        validate_view(bundle.garment_type, back, "back", &mut checks);
    } else {
        checks.push(Check {
            name: "back_view".into(),
            passed: true,
            detail: "absent; symmetric mode implied".into(),
        });
    }

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_tshirt_landmarks(w: u32, h: u32) -> BTreeMap<String, Landmark> {
        let mut map = BTreeMap::new();
        for (i, name) in landmark_registry(GarmentType::Tshirt).iter().enumerate() {
            map.insert(
                name.to_string(),
                Landmark {
                    x: 10.0 + i as f64 * 7.0,
                    y: 20.0 + i as f64 * 3.0,
                    visible: true,
                },
            );
        }
        assert!(map.len() == 13 && w > 120 && h > 80);
        map
    }

    #[test]
    fn registry_sizes() {
        assert_eq!(landmark_registry(GarmentType::Tshirt).len(), 13);
        assert_eq!(landmark_registry(GarmentType::Pants).len(), 7);
    }

    #[test]
    fn accepts_schema_complete_tops_file() {
        let set = LandmarkSet::new(
            GarmentType::Tshirt,
            View::Front,
            (400, 300),
            full_tshirt_landmarks(400, 300),
        )
        .unwrap();
        assert_eq!(set.landmarks.len(), 13);
    }

    #[test]
    fn missing_landmark_named_in_error() {
        let mut map = full_tshirt_landmarks(400, 300);
        map.remove("cuff_right_inner");
        let err = LandmarkSet::new(GarmentType::Tshirt, View::Front, (400, 300), map)
            .unwrap_err();
        assert!(err.to_string().contains("cuff_right_inner"), "{err}");
    }

    #[test]
    fn out_of_bounds_rejected() {
        let mut map = BTreeMap::new();
        for name in landmark_registry(GarmentType::Pants) {
            map.insert(
                name.to_string(),
                Landmark {
                    x: 10.0,
                    y: 10.0,
                    visible: true,
                },
            );
        }
        map.insert(
            "waist_left".into(),
            Landmark {
                x: -3.0,
                y: 10.0,
                visible: true,
            },
        );
        let err =
            LandmarkSet::new(GarmentType::Pants, View::Front, (100, 100), map).unwrap_err();
        assert!(err.to_string().contains("out of bounds"), "{err}");
        assert!(err.to_string().contains("waist_left"), "{err}");
    }

    #[test]
    fn landmark_json_round_trip() {
        let set = LandmarkSet::new(
            GarmentType::Tshirt,
            View::Front,
            (400, 300),
            full_tshirt_landmarks(400, 300),
        )
        .unwrap();
        let text = landmarks_to_json(&set);
        let reloaded = parse_landmarks(&text).unwrap();
        assert_eq!(set, reloaded);
    }

    #[test]
    fn mask_label_validation() {
        let data = vec![0u8, 1, 2, 3];
        assert!(SegmentationMask::new(GarmentType::Tshirt, View::Front, 2, 2, data).is_ok());
        let bad = vec![0u8, 7, 0, 0];
        let err = SegmentationMask::new(GarmentType::Tshirt, View::Front, 2, 2, bad)
            .unwrap_err();
        match err {
            AnnotationError::UnknownLabel { id, count, .. } => {
                assert_eq!(id, 7);
                assert_eq!(count, 1);
            }
            other => panic!("unexpected error {other}"),
        }
        let pants = vec![0u8, 1, 2, 0];
        assert!(SegmentationMask::new(GarmentType::Pants, View::Front, 2, 2, pants).is_ok());
    }

    #[test]
    fn mirror_swaps_sides_and_reflects() {
        let mut map = full_tshirt_landmarks(400, 300);
        map.insert(
            "armpit_left".into(),
            Landmark {
                x: 100.0,
                y: 200.0,
                visible: true,
            },
        );
        let set =
            LandmarkSet::new(GarmentType::Tshirt, View::Front, (400, 300), map).unwrap();
        let mut data = vec![0u8; 400 * 300];
        data[10 * 400 + 10] = 2; // left_sleeve at (10, 10)
        let mask =
            SegmentationMask::new(GarmentType::Tshirt, View::Front, 400, 300, data).unwrap();

        let (mlm, mmask) = mirror_annotations(&set, &mask);
        assert_eq!(mlm.view, View::Back);
        let ar = mlm.get("armpit_right").unwrap();
        assert_eq!((ar.x, ar.y), (299.0, 200.0));
        assert_eq!(mmask.label_at(389, 10), 3);

        let (back_lm, back_mask) = mirror_annotations(&mlm, &mmask);
        assert_eq!(back_lm, set);
        assert_eq!(back_mask, mask);
    }

    #[test]
    fn validate_bundle_dimension_mismatch_fails() {
        let lm = LandmarkSet::new(
            GarmentType::Tshirt,
            View::Front,
            (640, 480),
            full_tshirt_landmarks(640, 480),
        )
        .unwrap();
        let mask = SegmentationMask::new(
            GarmentType::Tshirt,
            View::Front,
            512,
            512,
            vec![0u8; 512 * 512],
        )
        .unwrap();
        let bundle = AnnotationBundle {
            garment_type: GarmentType::Tshirt,
            capture_mode: CaptureMode::Mannequin,
            front: ViewData {
                image: RgbaImage::new(640, 480),
                landmarks: lm,
                mask,
            },
            back: None,
            scale_measurement: None,
        };
        let report = validate_bundle(&bundle);
        assert!(!report.passed());
        let dim = report
            .checks
            .iter()
            .find(|c| c.name == "front_dimensions")
            .unwrap();
        assert!(!dim.passed);
    }

    #[test]
    fn validate_bundle_proximity_fails_for_distant_landmark() {
        // All parts painted as adjacent blocks; armpit_left placed far away.
        let mut data = vec![0u8; 400 * 400];
        let mut block = |x0: usize, x1: usize, y0: usize, y1: usize, id: u8| {
            for y in y0..y1 {
                for x in x0..x1 {
                    data[y * 400 + x] = id;
                }
            }
        };
        block(300, 340, 300, 340, 1); // torso
        block(260, 300, 300, 340, 2); // left sleeve
        block(340, 380, 300, 340, 3); // right sleeve
        block(300, 340, 260, 300, 4); // collar
        let mask =
            SegmentationMask::new(GarmentType::Tshirt, View::Front, 400, 400, data).unwrap();
        let near = |x: f64, y: f64| Landmark { x, y, visible: true };
        let mut map = BTreeMap::new();
        map.insert("neck_center_front".into(), near(320.0, 280.0));
        map.insert("neck_left".into(), near(310.0, 280.0));
        map.insert("neck_right".into(), near(330.0, 280.0));
        map.insert("shoulder_left".into(), near(305.0, 305.0));
        map.insert("shoulder_right".into(), near(335.0, 305.0));
        map.insert("cuff_left_outer".into(), near(270.0, 310.0));
        map.insert("cuff_left_inner".into(), near(270.0, 330.0));
        map.insert("cuff_right_outer".into(), near(370.0, 310.0));
        map.insert("cuff_right_inner".into(), near(370.0, 330.0));
        map.insert("armpit_right".into(), near(340.0, 320.0));
        map.insert("hem_left".into(), near(305.0, 335.0));
        map.insert("hem_right".into(), near(335.0, 335.0));
        map.insert("armpit_left".into(), near(20.0, 20.0));
        let lm = LandmarkSet::new(GarmentType::Tshirt, View::Front, (400, 400), map).unwrap();

        // Brute-force oracle: distance from (20,20) to the nearest pixel of
        // the torso or left-sleeve blocks.
        let mut oracle = f64::INFINITY;
        for y in 300..340 {
            for x in 260..340 {
                let d = ((x as f64 - 20.0).powi(2) + (y as f64 - 20.0).powi(2)).sqrt();
                oracle = oracle.min(d);
            }
        }
        assert!(oracle > 200.0);

        let bundle = AnnotationBundle {
            garment_type: GarmentType::Tshirt,
            capture_mode: CaptureMode::Mannequin,
            front: ViewData {
                image: RgbaImage::new(400, 400),
                landmarks: lm,
                mask,
            },
            back: None,
            scale_measurement: None,
        };
        let report = validate_bundle(&bundle);
        let prox = report
            .checks
            .iter()
            .find(|c| c.name == "front_landmark_proximity")
            .unwrap();
        assert!(!prox.passed, "{}", prox.detail);
        assert!(prox.detail.contains("armpit_left"));
    }
}
