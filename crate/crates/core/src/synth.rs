//! Deterministic synthetic annotation fixtures.
//!
//! The pipeline consumes landmark/mask files produced by an upstream parsing
//! network; this module synthesizes equivalent inputs for tests and demos.
//! Two families:
//!
//! * [`make_bundle`] draws a stylized garment photo (matching the template
//!   topology) with exact landmarks and part labels;
//! * [`make_checker_fixture`] places each reference piece into the image by a
//!   known uniform-scale similarity and renders a checkerboard atlas through
//!   it, giving a ground-truth pair for texture round-trip checks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{Rgba, RgbaImage};

use crate::annotation::{
    landmark_registry, AnnotationBundle, CaptureMode, GarmentType, Landmark, LandmarkSet,
    SegmentationMask, View, ViewData,
};
use crate::geom::{point_in_polygon, Pt2};
use crate::template::{PantsParams, TemplateAsset, TshirtParams};

/// Options for the stylized garment fixtures.
#[derive(Debug, Clone)]
pub struct BundleOptions {
    pub garment: GarmentType,
    pub capture_mode: CaptureMode,
    /// Pixels per meter of the rendered photo.
    pub ppm: f64,
    pub margin_px: u32,
    /// Generate the back view files (otherwise single-photo symmetric mode).
    pub with_back: bool,
    pub tshirt: TshirtParams,
    pub pants: PantsParams,
}

impl Default for BundleOptions {
    fn default() -> Self {
        Self {
            garment: GarmentType::Tshirt,
            capture_mode: CaptureMode::Mannequin,
            ppm: 420.0,
            margin_px: 32,
            with_back: true,
            tshirt: TshirtParams::default(),
            pants: PantsParams::default(),
        }
    }
}

struct WorldToImage {
    ppm: f64,
    cx: f64,
    base_y: f64,
}

impl WorldToImage {
    fn map(&self, x: f64, z: f64) -> Pt2 {
        Pt2::new(self.cx + x * self.ppm, self.base_y - z * self.ppm)
    }
    fn unmap(&self, p: Pt2) -> (f64, f64) {
        ((p.x - self.cx) / self.ppm, (self.base_y - p.y) / self.ppm)
    }
}

fn stripe_color(base: [u8; 3], alt: [u8; 3], z_px: f64, period: f64) -> Rgba<u8> {
    let band = (z_px / period).floor() as i64;
    let c = if band.rem_euclid(2) == 0 { base } else { alt };
    Rgba([c[0], c[1], c[2], 255])
}

fn tshirt_view(opts: &BundleOptions, view: View) -> ViewData {
    let p = &opts.tshirt;
    let w2 = 0.5 * p.chest_width;
    let wn2 = 0.5 * p.neck_width;
    let z_a = p.hem_to_armpit;
    let z_sh = z_a + p.armpit_to_shoulder;
    let z_top = z_sh + p.collar_height;
    let (sin_a, cos_a) = p.sleeve_angle.sin_cos();
    let drop = match view {
        View::Front => p.neck_drop_front,
        View::Back => p.neck_drop_back,
    };
    let tip_x = w2 + p.sleeve_length * cos_a;

    let margin = opts.margin_px as f64;
    let width = (2.0 * tip_x * opts.ppm + 2.0 * margin).ceil() as u32;
    let height = (z_top * opts.ppm + 2.0 * margin).ceil() as u32;
    let to = WorldToImage {
        ppm: opts.ppm,
        cx: margin + tip_x * opts.ppm,
        base_y: margin + z_top * opts.ppm,
    };

    // Region tests in world coordinates.
    let in_torso = |x: f64, z: f64| -> bool {
        x.abs() <= w2
            && (0.0..=z_sh).contains(&z)
            && !(x.abs() < wn2 && z > z_sh - drop)
    };
    let in_sleeve = |side: f64, x: f64, z: f64| -> bool {
        let d = (side * x - w2) / cos_a;
        if !(0.0..=p.sleeve_length).contains(&d) {
            return false;
        }
        let zeta = z + d * sin_a;
        (z_a..=z_sh).contains(&zeta)
    };
    let in_collar =
        |x: f64, z: f64| -> bool { x.abs() <= wn2 && z >= z_sh - drop && z <= z_top };

    let mut mask_data = vec![0u8; (width * height) as usize];
    let mut image = RgbaImage::from_pixel(width, height, Rgba([204, 204, 204, 255]));
    let torso_colors = match view {
        View::Front => ([183, 28, 28], [255, 236, 179]),
        View::Back => ([21, 101, 192], [224, 242, 241]),
    };
    for py in 0..height {
        for px in 0..width {
            let c = Pt2::new(px as f64, py as f64);
            let (x, z) = to.unmap(c);
            let label = if in_collar(x, z) {
                4
            } else if in_torso(x, z) {
                1
            } else if in_sleeve(-1.0, x, z) {
                2
            } else if in_sleeve(1.0, x, z) {
                3
            } else {
                0
            };
            if label == 0 {
                continue;
            }
            mask_data[(py * width + px) as usize] = label;
            let color = match label {
                1 => stripe_color(torso_colors.0, torso_colors.1, c.y, 24.0),
                2 => Rgba([46, 125, 50, 255]),
                3 => Rgba([123, 31, 162, 255]),
                _ => Rgba([255, 193, 7, 255]),
            };
            image.put_pixel(px, py, color);
        }
    }
    let mask =
        SegmentationMask::new(GarmentType::Tshirt, view, width, height, mask_data).unwrap();

    let z_mid = 0.5 * (z_a + z_sh);
    let lm = |x: f64, z: f64| {
        let p = to.map(x, z);
        Landmark {
            x: p.x,
            y: p.y,
            visible: true,
        }
    };
    let mut points = BTreeMap::new();
    points.insert("hem_left".into(), lm(-w2, 0.0));
    points.insert("hem_right".into(), lm(w2, 0.0));
    points.insert("armpit_left".into(), lm(-w2, z_a));
    points.insert("armpit_right".into(), lm(w2, z_a));
    points.insert("shoulder_left".into(), lm(-w2, z_sh));
    points.insert("shoulder_right".into(), lm(w2, z_sh));
    points.insert("neck_left".into(), lm(-wn2, z_sh));
    points.insert("neck_right".into(), lm(wn2, z_sh));
    points.insert("neck_center_front".into(), lm(0.0, z_top));
    points.insert("cuff_left_outer".into(), lm(-tip_x, z_sh - p.sleeve_length * sin_a));
    points.insert("cuff_left_inner".into(), lm(-tip_x, z_a - p.sleeve_length * sin_a));
    points.insert("cuff_right_outer".into(), lm(tip_x, z_sh - p.sleeve_length * sin_a));
    points.insert("cuff_right_inner".into(), lm(tip_x, z_a - p.sleeve_length * sin_a));
    let _ = z_mid;
    let landmarks =
        LandmarkSet::new(GarmentType::Tshirt, view, (width, height), points).unwrap();
    ViewData {
        image,
        landmarks,
        mask,
    }
}

fn pants_view(opts: &BundleOptions, view: View) -> ViewData {
    let p = &opts.pants;
    let w2 = 0.5 * p.waist_width;
    let inner = w2 - p.leg_width;
    let z_c = p.crotch_to_bottom;
    let z_w = z_c + p.crotch_to_waist;

    let margin = opts.margin_px as f64;
    let width = (2.0 * w2 * opts.ppm + 2.0 * margin).ceil() as u32;
    let height = (z_w * opts.ppm + 2.0 * margin).ceil() as u32;
    let to = WorldToImage {
        ppm: opts.ppm,
        cx: margin + w2 * opts.ppm,
        base_y: margin + z_w * opts.ppm,
    };

    let in_pants = |x: f64, z: f64| -> bool {
        if x.abs() > w2 || !(0.0..=z_w).contains(&z) {
            return false;
        }
        !(x.abs() < inner && z < z_c)
    };

    let mut mask_data = vec![0u8; (width * height) as usize];
    let mut image = RgbaImage::from_pixel(width, height, Rgba([204, 204, 204, 255]));
    let (left_base, right_base) = match view {
        View::Front => ([13, 71, 161], [0, 105, 92]),
        View::Back => ([69, 39, 160], [130, 119, 23]),
    };
    for py in 0..height {
        for px in 0..width {
            let c = Pt2::new(px as f64, py as f64);
            let (x, z) = to.unmap(c);
            if !in_pants(x, z) {
                continue;
            }
            let label = if x < 0.0 { 1 } else { 2 };
            mask_data[(py * width + px) as usize] = label;
            let base = if label == 1 { left_base } else { right_base };
            image.put_pixel(px, py, stripe_color(base, [236, 239, 241], c.y, 28.0));
        }
    }
    let mask = SegmentationMask::new(GarmentType::Pants, view, width, height, mask_data).unwrap();

    let lm = |x: f64, z: f64| {
        let p = to.map(x, z);
        Landmark {
            x: p.x,
            y: p.y,
            visible: true,
        }
    };
    let mut points = BTreeMap::new();
    points.insert("waist_left".into(), lm(-w2, z_w));
    points.insert("waist_right".into(), lm(w2, z_w));
    points.insert("crotch".into(), lm(0.0, z_c));
    points.insert("bottom_left_outer".into(), lm(-w2, 0.0));
    points.insert("bottom_left_inner".into(), lm(-inner, 0.0));
    points.insert("bottom_right_inner".into(), lm(inner, 0.0));
    points.insert("bottom_right_outer".into(), lm(w2, 0.0));
    let landmarks = LandmarkSet::new(GarmentType::Pants, view, (width, height), points).unwrap();
    ViewData {
        image,
        landmarks,
        mask,
    }
}

/// Builds a stylized annotation bundle. Returns the bundle together with the
/// true world length of the garment's scale reference feature, usable as the
/// user measurement for an exact pixel scale.
pub fn make_bundle(opts: &BundleOptions) -> (AnnotationBundle, (String, f64)) {
    let (front, back) = match opts.garment {
        GarmentType::Tshirt => (
            tshirt_view(opts, View::Front),
            opts.with_back.then(|| tshirt_view(opts, View::Back)),
        ),
        GarmentType::Pants => (
            pants_view(opts, View::Front),
            opts.with_back.then(|| pants_view(opts, View::Back)),
        ),
    };
    let reference = match opts.garment {
        GarmentType::Tshirt => {
            let p = &opts.tshirt;
            let (sin_a, cos_a) = p.sleeve_angle.sin_cos();
            let dx = p.sleeve_length * cos_a;
            let dz = 0.5 * p.armpit_to_shoulder + p.sleeve_length * sin_a;
            (
                "sleeve_length_left".to_string(),
                (dx * dx + dz * dz).sqrt(),
            )
        }
        GarmentType::Pants => (
            "side_length_left".to_string(),
            opts.pants.crotch_to_bottom + opts.pants.crotch_to_waist,
        ),
    };
    let bundle = AnnotationBundle {
        garment_type: opts.garment,
        capture_mode: opts.capture_mode,
        front,
        back,
        scale_measurement: Some(reference.clone()),
    };
    (bundle, reference)
}

/// File paths produced by [`write_bundle_files`].
#[derive(Debug, Clone)]
pub struct BundleFiles {
    pub front_image: PathBuf,
    pub front_landmarks: PathBuf,
    pub front_mask: PathBuf,
    pub back_image: Option<PathBuf>,
    pub back_landmarks: Option<PathBuf>,
    pub back_mask: Option<PathBuf>,
}

/// Writes a bundle as the file set the CLI consumes.
pub fn write_bundle_files(
    bundle: &AnnotationBundle,
    dir: &Path,
) -> Result<BundleFiles, crate::annotation::AnnotationError> {
    std::fs::create_dir_all(dir).map_err(|source| crate::annotation::AnnotationError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let write_view = |view: &ViewData, prefix: &str| -> Result<
        (PathBuf, PathBuf, PathBuf),
        crate::annotation::AnnotationError,
    > {
        let image_path = dir.join(format!("{prefix}.png"));
        view.image
            .save(&image_path)
            .map_err(|e| crate::annotation::AnnotationError::MaskDecode {
                path: image_path.display().to_string(),
                detail: e.to_string(),
            })?;
        let lm_path = dir.join(format!("{prefix}_landmarks.json"));
        crate::annotation::save_landmarks(&view.landmarks, &lm_path)?;
        let mask_path = dir.join(format!("{prefix}_mask.png"));
        crate::annotation::save_mask(&view.mask, &mask_path)?;
        Ok((image_path, lm_path, mask_path))
    };
    let (front_image, front_landmarks, front_mask) = write_view(&bundle.front, "front")?;
    let back = bundle
        .back
        .as_ref()
        .map(|view| write_view(view, "back"))
        .transpose()?;
    let (back_image, back_landmarks, back_mask) = match back {
        Some((a, b, c)) => (Some(a), Some(b), Some(c)),
        None => (None, None, None),
    };
    Ok(BundleFiles {
        front_image,
        front_landmarks,
        front_mask,
        back_image,
        back_landmarks,
        back_mask,
    })
}

/// Uniform-scale placement of one reference piece into image space.
#[derive(Debug, Clone, Copy)]
pub struct Placement {
    pub scale: f64,
    pub offset: Pt2,
}

impl Placement {
    pub fn map(&self, p: Pt2) -> Pt2 {
        p * self.scale + self.offset
    }
    pub fn unmap(&self, q: Pt2) -> Pt2 {
        (q - self.offset) * (1.0 / self.scale)
    }
}

/// A checkerboard ground-truth fixture: every piece of every view placed by a
/// known similarity, the photo rendered from a checker atlas through it.
pub struct CheckerFixture {
    pub bundle: AnnotationBundle,
    pub atlas: RgbaImage,
    /// Piece name to its layout-to-image placement.
    pub placements: Vec<(String, Placement)>,
}

/// Renders a checkerboard atlas raster.
pub fn checker_atlas(size: u32, cell: u32) -> RgbaImage {
    let mut img = RgbaImage::new(size, size);
    for y in 0..size {
        for x in 0..size {
            let on = ((x / cell) + (y / cell)) % 2 == 0;
            let c = if on { 230 } else { 40 };
            img.put_pixel(x, y, Rgba([c, c, c, 255]));
        }
    }
    img
}

fn view_from_placements(
    template: &TemplateAsset,
    view: View,
    placements: &[(String, Placement)],
    atlas: &RgbaImage,
    image_size: u32,
) -> ViewData {
    let garment = template.garment_type;
    let pieces: Vec<(&crate::template::Piece, Placement)> = template
        .pieces
        .iter()
        .filter(|p| p.source.view == view)
        .map(|p| {
            let placement = placements
                .iter()
                .find(|(n, _)| *n == p.name)
                .map(|(_, pl)| *pl)
                .expect("placement computed for every piece");
            (p, placement)
        })
        .collect();

    let atlas_size = atlas.width() as f64;
    let mut mask_data = vec![0u8; (image_size * image_size) as usize];
    let mut image = RgbaImage::from_pixel(image_size, image_size, Rgba([204, 204, 204, 255]));
    for py in 0..image_size {
        for px in 0..image_size {
            let c = Pt2::new(px as f64, py as f64);
            for (piece, placement) in &pieces {
                let uv = placement.unmap(c);
                if !point_in_polygon(uv, &piece.contour, 0.0) {
                    continue;
                }
                mask_data[(py * image_size + px) as usize] = piece.source.label;
                // Sample the atlas at the texel that owns this uv.
                let ax = (uv.x * atlas_size - 0.5)
                    .round()
                    .clamp(0.0, atlas_size - 1.0) as u32;
                let ay = (uv.y * atlas_size - 0.5)
                    .round()
                    .clamp(0.0, atlas_size - 1.0) as u32;
                image.put_pixel(px, py, *atlas.get_pixel(ax, ay));
                break;
            }
        }
    }
    let mask = SegmentationMask::new(garment, view, image_size, image_size, mask_data).unwrap();

    // Landmarks: every name placed by the piece that owns it; shared names
    // agree across pieces by construction. Names untouched by this view's
    // pieces are synthesized along the shoulder line.
    let mut points: BTreeMap<String, Landmark> = BTreeMap::new();
    for (piece, placement) in &pieces {
        for (name, uv) in &piece.landmarks {
            let q = placement.map(*uv);
            points.entry(name.clone()).or_insert(Landmark {
                x: q.x,
                y: q.y,
                visible: true,
            });
        }
    }
    for name in landmark_registry(garment) {
        if points.contains_key(*name) {
            continue;
        }
        // Only the neck trio can be missing (back views of tops).
        let sl = points["shoulder_left"];
        let sr = points["shoulder_right"];
        let t = match *name {
            "neck_left" => 0.35,
            "neck_center_front" => 0.5,
            _ => 0.65,
        };
        points.insert(
            name.to_string(),
            Landmark {
                x: sl.x + (sr.x - sl.x) * t,
                y: sl.y + (sr.y - sl.y) * t + 2.0,
                visible: true,
            },
        );
    }
    let landmarks = LandmarkSet::new(garment, view, (image_size, image_size), points).unwrap();
    ViewData {
        image,
        landmarks,
        mask,
    }
}

/// Computes per-piece placements for one view: a base scale plus offsets,
/// with pieces sharing landmarks pinned to agree at them.
fn view_placements(
    template: &TemplateAsset,
    view: View,
    scale: f64,
    base_offset: Pt2,
) -> Vec<(String, Placement)> {
    let mut placed: BTreeMap<String, Pt2> = BTreeMap::new();
    let mut out = Vec::new();
    for piece in template.pieces.iter().filter(|p| p.source.view == view) {
        let shared: Vec<(&String, &Pt2)> = piece
            .landmarks
            .iter()
            .filter(|(n, _)| placed.contains_key(*n))
            .collect();
        let offset = if let Some((name, uv)) = shared.first() {
            placed[*name] - **uv * scale
        } else {
            base_offset
        };
        let placement = Placement { scale, offset };
        // Shared landmarks must agree; the template geometry guarantees the
        // matching edge lengths that make a pure offset sufficient.
        for (name, uv) in &shared {
            let q = placement.map(**uv);
            let want = placed[*name];
            assert!(
                q.distance(want) < 1e-6,
                "piece {} landmark {} disagrees: {:?} vs {:?}",
                piece.name,
                name,
                q,
                want
            );
        }
        for (name, uv) in &piece.landmarks {
            placed.entry(name.clone()).or_insert(placement.map(*uv));
        }
        out.push((piece.name.clone(), placement));
    }
    out
}

/// Builds the checkerboard ground-truth fixture for a template.
///
/// Pieces are placed garment-like (sewn together at shared landmarks) by a
/// uniform-scale similarity per piece, automatically fitted into the image
/// with `margin_px` of padding on every side.
pub fn make_checker_fixture(
    template: &TemplateAsset,
    image_size: u32,
    atlas_size: u32,
    cell: u32,
    margin_px: f64,
) -> CheckerFixture {
    let atlas = checker_atlas(atlas_size, cell);

    // Trial placement at unit scale to learn the assembled extent.
    let trial: Vec<(String, Placement)> = {
        let mut t = view_placements(template, View::Front, 1.0, Pt2::new(0.0, 0.0));
        t.extend(view_placements(template, View::Back, 1.0, Pt2::new(0.0, 0.0)));
        t
    };
    let mut lo = Pt2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Pt2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for piece in &template.pieces {
        let placement = trial
            .iter()
            .find(|(n, _)| *n == piece.name)
            .map(|(_, p)| *p)
            .unwrap();
        for v in &piece.contour {
            let q = placement.map(*v);
            lo = Pt2::new(lo.x.min(q.x), lo.y.min(q.y));
            hi = Pt2::new(hi.x.max(q.x), hi.y.max(q.y));
        }
    }
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    // Keep the scale off integer pixel ratios so bilinear filtering engages.
    let scale = ((image_size as f64 - 2.0 * margin_px) / extent).floor() + 0.37;
    let base_offset = Pt2::new(margin_px - lo.x * scale + 0.23, margin_px - lo.y * scale + 0.41);

    let mut placements = view_placements(template, View::Front, scale, base_offset);
    placements.extend(view_placements(template, View::Back, scale, base_offset));

    let front = view_from_placements(template, View::Front, &placements, &atlas, image_size);
    let back = view_from_placements(template, View::Back, &placements, &atlas, image_size);
    let bundle = AnnotationBundle {
        garment_type: template.garment_type,
        capture_mode: CaptureMode::Mannequin,
        front,
        back: Some(back),
        scale_measurement: None,
    };
    CheckerFixture {
        bundle,
        atlas,
        placements,
    }
}
