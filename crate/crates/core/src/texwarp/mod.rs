//! Texture lifting: from photo pixels onto the planar reference layout.
//!
//! The warp runs backward: for every atlas texel inside a piece polygon, the
//! MLS (or TPS) map built from reference-to-image control pairs produces an
//! image point, which is bilinearly sampled. Control pairs come from snapping
//! landmarks onto both contours and sampling N extra points per landmark
//! segment on each side.
//!
//! Continuous image coordinates center pixel `(i, j)` at `(i, j)`, matching
//! the crack contours from [`crate::geomkit`] and the landmark mirror map.
//! Layout coordinates are `[0, 1]^2` with v down; atlas texel `(tx, ty)`
//! covers `[tx, tx+1] x [ty, ty+1] / size` (center at half-integers).

mod mls;
mod morpho;
mod tps;

pub use mls::{mls_similarity_map, MlsWarp};
pub use morpho::{erode_segment, extrapolate_colors, nearest_site_transform};
pub use tps::TpsWarp;

use image::{Rgba, RgbaImage};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::annotation::{
    AnnotationBundle, GarmentType, LandmarkSet, SegmentationMask, View, ViewData,
};
use crate::geom::Pt2;
use crate::geomkit::{extract_contour, sample_between, snap_to_contour, ClosedPolyline};
use crate::template::TemplateAsset;

#[derive(Debug, Error)]
pub enum TexWarpError {
    #[error("neckline correction applies to tops only")]
    NotTops,
    #[error("need at least 2 control pairs, got {0}")]
    TooFewPairs(usize),
    #[error("control points coincide")]
    DuplicateControlPoints,
    #[error("degenerate control configuration")]
    DegenerateConfiguration,
    #[error("landmark cycles disagree: {0}")]
    CycleMismatch(String),
    #[error("landmark \"{0}\" missing or invisible in the source view")]
    MissingLandmark(String),
    #[error("piece \"{piece}\": {source}")]
    Piece {
        piece: String,
        #[source]
        source: Box<TexWarpError>,
    },
    #[error("back view required: provide back annotations or enable symmetric mode")]
    MissingBackView,
    #[error(transparent)]
    Geom(#[from] crate::geomkit::GeomError),
}

/// Matched reference-to-image control points for one piece, ordered
/// consistently along both contours.
#[derive(Debug, Clone)]
pub struct ControlPairSet {
    /// `(p, q)`: p in layout space, q in image space.
    pub pairs: Vec<(Pt2, Pt2)>,
    pub landmark_count: usize,
    pub samples_per_segment: usize,
}

impl ControlPairSet {
    pub fn new(
        pairs: Vec<(Pt2, Pt2)>,
        landmark_count: usize,
        samples_per_segment: usize,
    ) -> Result<Self, TexWarpError> {
        if pairs.len() < 3 {
            return Err(TexWarpError::TooFewPairs(pairs.len()));
        }
        for (i, (p, _)) in pairs.iter().enumerate() {
            for (q, _) in pairs.iter().skip(i + 1) {
                if p.distance(*q) < 1e-9 {
                    return Err(TexWarpError::DuplicateControlPoints);
                }
            }
        }
        Ok(Self {
            pairs,
            landmark_count,
            samples_per_segment,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Removes torso-labeled pixels strictly above the shoulder-neck-shoulder
/// polyline (within the shoulders' x-span). Tops only.
pub fn correct_neckline(
    mask: &SegmentationMask,
    landmarks: &LandmarkSet,
) -> Result<SegmentationMask, TexWarpError> {
    if mask.garment_type != GarmentType::Tshirt {
        return Err(TexWarpError::NotTops);
    }
    let need = |name: &str| {
        landmarks
            .point(name)
            .ok_or_else(|| TexWarpError::MissingLandmark(name.to_string()))
    };
    let sl = need("shoulder_left")?;
    let nc = need("neck_center_front")?;
    let sr = need("shoulder_right")?;
    let segments = [(sl, nc), (nc, sr)];
    let span = (sl.x.min(sr.x), sl.x.max(sr.x));

    let mut out = mask.clone();
    let w = mask.width as usize;
    for y in 0..mask.height as usize {
        for x in 0..w {
            if out.data[y * w + x] != 1 {
                continue;
            }
            let cx = x as f64;
            let cy = y as f64;
            if cx < span.0 || cx > span.1 {
                continue;
            }
            // Polyline height at cx: the lower (larger y) covering segment
            // wins, so only pixels above the whole polyline are cut.
            let mut line_y = f64::NEG_INFINITY;
            for (a, b) in segments {
                let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
                if cx < x0 || cx > x1 || (b.x - a.x).abs() < 1e-12 {
                    continue;
                }
                let t = (cx - a.x) / (b.x - a.x);
                line_y = line_y.max(a.y + t * (b.y - a.y));
            }
            if line_y.is_finite() && cy < line_y {
                out.data[y * w + x] = 0;
            }
        }
    }
    Ok(out)
}

fn cyclic_equal(a: &[usize], b: &[usize]) -> bool {
    let n = a.len();
    if b.len() != n {
        return false;
    }
    (0..n).any(|shift| (0..n).all(|i| a[i] == b[(i + shift) % n]))
}

/// Builds matched control pairs for one piece.
///
/// Landmarks are snapped onto both contours; between each pair of adjacent
/// landmarks, `samples_per_segment` extra points are sampled arc-uniformly
/// on each side and matched by index. If the image cycle runs opposite to
/// the reference cycle the image contour is reversed; scrambled cycles are
/// an error.
pub fn build_control_pairs(
    image_contour: &ClosedPolyline,
    image_landmarks: &[(String, Pt2)],
    reference_contour: &ClosedPolyline,
    reference_landmarks: &[(String, Pt2)],
    samples_per_segment: usize,
) -> Result<ControlPairSet, TexWarpError> {
    let mut ref_names: Vec<&str> = reference_landmarks.iter().map(|(n, _)| n.as_str()).collect();
    ref_names.sort_unstable();
    let mut img_names: Vec<&str> = image_landmarks.iter().map(|(n, _)| n.as_str()).collect();
    img_names.sort_unstable();
    if ref_names != img_names {
        return Err(TexWarpError::CycleMismatch(format!(
            "name sets differ: reference {ref_names:?} vs image {img_names:?}"
        )));
    }
    let count = reference_landmarks.len();
    if count < 3 {
        return Err(TexWarpError::TooFewPairs(count));
    }

    // Snap and order along the reference contour; that order is canonical.
    let mut ref_snapped: Vec<(usize, crate::geomkit::ContourPoint)> = reference_landmarks
        .iter()
        .enumerate()
        .map(|(i, (_, p))| (i, snap_to_contour(*p, reference_contour)))
        .collect();
    ref_snapped.sort_by(|a, b| a.1.arc_param.partial_cmp(&b.1.arc_param).unwrap());
    let ref_order: Vec<usize> = ref_snapped.iter().map(|(i, _)| *i).collect();

    let snap_image = |contour: &ClosedPolyline| -> Vec<(usize, crate::geomkit::ContourPoint)> {
        let mut v: Vec<(usize, crate::geomkit::ContourPoint)> = image_landmarks
            .iter()
            .map(|(name, p)| {
                let ref_idx = reference_landmarks
                    .iter()
                    .position(|(rn, _)| rn == name)
                    .expect("name sets match");
                (ref_idx, snap_to_contour(*p, contour))
            })
            .collect();
        v.sort_by(|a, b| a.1.arc_param.partial_cmp(&b.1.arc_param).unwrap());
        v
    };

    let mut image_contour_owned = image_contour.clone();
    let mut img_snapped = snap_image(&image_contour_owned);
    let img_order: Vec<usize> = img_snapped.iter().map(|(i, _)| *i).collect();
    if !cyclic_equal(&ref_order, &img_order) {
        let mut reversed_order = img_order.clone();
        reversed_order.reverse();
        if cyclic_equal(&ref_order, &reversed_order) {
            image_contour_owned = image_contour_owned.reversed();
            img_snapped = snap_image(&image_contour_owned);
        } else {
            return Err(TexWarpError::CycleMismatch(format!(
                "orders {ref_order:?} vs {img_order:?}"
            )));
        }
    }

    // Align both cycles to start at the same landmark.
    let start = ref_order[0];
    let img_start = img_snapped.iter().position(|(i, _)| *i == start).unwrap();
    img_snapped.rotate_left(img_start);

    let mut pairs = Vec::with_capacity(count * (samples_per_segment + 1));
    for k in 0..count {
        let (ri, rp) = &ref_snapped[k];
        let (ii, ip) = &img_snapped[k];
        debug_assert_eq!(ri, ii);
        pairs.push((rp.position, ip.position));
        let (_, rn) = &ref_snapped[(k + 1) % count];
        let (_, inx) = &img_snapped[(k + 1) % count];
        let rs = sample_between(
            reference_contour,
            rp.arc_param,
            rn.arc_param,
            samples_per_segment,
        );
        let is = sample_between(
            &image_contour_owned,
            ip.arc_param,
            inx.arc_param,
            samples_per_segment,
        );
        for (r, i) in rs.iter().zip(&is) {
            pairs.push((r.position, i.position));
        }
    }
    ControlPairSet::new(pairs, count, samples_per_segment)
}

/// Either warp family behind one evaluation interface.
#[derive(Debug, Clone)]
pub enum PieceWarp {
    Mls(MlsWarp),
    Tps(TpsWarp),
}

impl PieceWarp {
    pub fn build(
        kind: WarpKind,
        pairs: &ControlPairSet,
        alpha: f64,
    ) -> Result<Self, TexWarpError> {
        match kind {
            WarpKind::Mls => Ok(PieceWarp::Mls(MlsWarp::new(&pairs.pairs, alpha)?)),
            WarpKind::Tps => Ok(PieceWarp::Tps(TpsWarp::new(&pairs.pairs)?)),
        }
    }

    pub fn map(&self, v: Pt2) -> Pt2 {
        match self {
            PieceWarp::Mls(w) => w.map(v),
            PieceWarp::Tps(w) => w.map(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WarpKind {
    Mls,
    Tps,
}

/// Texel provenance in the atlas coverage map.
pub const COVER_EMPTY: u8 = 0;
pub const COVER_PIECE: u8 = 1;
pub const COVER_GUTTER: u8 = 2;

/// The texture atlas raster plus coverage bookkeeping.
pub struct TextureAtlas {
    pub size: u32,
    pub raster: RgbaImage,
    /// Per texel: empty / written by a piece / gutter dilation.
    pub coverage: Vec<u8>,
}

impl TextureAtlas {
    pub fn new(size: u32) -> Self {
        Self {
            size,
            raster: RgbaImage::from_pixel(size, size, Rgba([0, 0, 0, 0])),
            coverage: vec![COVER_EMPTY; (size as usize) * (size as usize)],
        }
    }
}

/// Per-piece warp diagnostics for the pipeline report.
#[derive(Debug, Clone, Serialize)]
pub struct PieceStats {
    pub piece: String,
    pub pair_count: usize,
    pub texels: usize,
    pub spill_texels: usize,
    pub spill_fraction: f64,
    pub spill_warning: bool,
    pub erosion_radius: f64,
    pub skipped: bool,
}

/// Bilinear sample with pixel centers at integer coordinates; samples clamp
/// to the image border.
fn bilinear(image: &RgbaImage, p: Pt2) -> [u8; 4] {
    let (w, h) = image.dimensions();
    let x = p.x;
    let y = p.y;
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let clamp = |v: f64, hi: u32| -> u32 { (v.max(0.0) as u32).min(hi - 1) };
    let x0i = clamp(x0, w);
    let x1i = clamp(x0 + 1.0, w);
    let y0i = clamp(y0, h);
    let y1i = clamp(y0 + 1.0, h);
    let p00 = image.get_pixel(x0i, y0i).0;
    let p10 = image.get_pixel(x1i, y0i).0;
    let p01 = image.get_pixel(x0i, y1i).0;
    let p11 = image.get_pixel(x1i, y1i).0;
    let mut out = [0u8; 4];
    for c in 0..4 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bot = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = (top * (1.0 - fy) + bot * fy).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Horizontal texel spans covered by a polygon on one atlas row (even-odd
/// rule at the row of texel centers).
fn polygon_row_spans(polygon: &[Pt2], v: f64, size: u32) -> Vec<(u32, u32)> {
    let n = polygon.len();
    let mut crossings = Vec::new();
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        if (a.y > v) != (b.y > v) {
            crossings.push(a.x + (v - a.y) / (b.y - a.y) * (b.x - a.x));
        }
    }
    crossings.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut spans = Vec::new();
    for pair in crossings.chunks(2) {
        if pair.len() < 2 {
            break;
        }
        let lo = (pair[0] * size as f64 - 0.5).ceil().max(0.0) as u32;
        let hi = ((pair[1] * size as f64 - 0.5).floor()).min(size as f64 - 1.0) as i64;
        if hi >= lo as i64 {
            spans.push((lo, hi as u32));
        }
    }
    spans
}

/// Warps one source image into the piece polygon on the atlas. The source is
/// expected pre-eroded and pre-extrapolated. Returns warp diagnostics.
pub fn warp_piece(
    source: &RgbaImage,
    warp: &PieceWarp,
    polygon: &[Pt2],
    pairs_len: usize,
    atlas: &mut TextureAtlas,
    piece_name: &str,
) -> PieceStats {
    let size = atlas.size;
    let (iw, ih) = source.dimensions();
    let in_image = |q: Pt2| -> bool {
        q.x >= -0.5 && q.x <= iw as f64 - 0.5 && q.y >= -0.5 && q.y <= ih as f64 - 0.5
    };

    // Deterministic row-parallel evaluation.
    let rows: Vec<(u32, Vec<(u32, Option<[u8; 4]>)>)> = (0..size)
        .into_par_iter()
        .map(|ty| {
            let v = (ty as f64 + 0.5) / size as f64;
            let mut row = Vec::new();
            for (lo, hi) in polygon_row_spans(polygon, v, size) {
                for tx in lo..=hi {
                    let p = Pt2::new((tx as f64 + 0.5) / size as f64, v);
                    let q = warp.map(p);
                    if in_image(q) {
                        row.push((tx, Some(bilinear(source, q))));
                    } else {
                        row.push((tx, None));
                    }
                }
            }
            (ty, row)
        })
        .collect();

    let mut texels = 0usize;
    let mut spill: Vec<(u32, u32)> = Vec::new();
    for (ty, row) in rows {
        for (tx, color) in row {
            texels += 1;
            let idx = (ty * size + tx) as usize;
            atlas.coverage[idx] = COVER_PIECE;
            match color {
                Some(c) => atlas.raster.put_pixel(tx, ty, Rgba(c)),
                None => spill.push((tx, ty)),
            }
        }
    }

    // Spilled texels take the nearest written texel's color.
    if !spill.is_empty() && texels > spill.len() {
        let s = size as usize;
        let mut spill_mask = vec![false; s * s];
        for &(tx, ty) in &spill {
            spill_mask[(ty * size + tx) as usize] = true;
        }
        let mut sites = vec![false; s * s];
        for (idx, site) in sites.iter_mut().enumerate() {
            *site = atlas.coverage[idx] == COVER_PIECE && !spill_mask[idx];
        }
        let field = nearest_site_transform(s, s, &sites);
        for &(tx, ty) in &spill {
            let idx = (ty * size + tx) as usize;
            let site = field.site[idx];
            if site != u32::MAX {
                let sx = site % size;
                let sy = site / size;
                let c = *atlas.raster.get_pixel(sx, sy);
                atlas.raster.put_pixel(tx, ty, c);
            }
        }
    }

    let spill_fraction = if texels > 0 {
        spill.len() as f64 / texels as f64
    } else {
        0.0
    };
    PieceStats {
        piece: piece_name.to_string(),
        pair_count: pairs_len,
        texels,
        spill_texels: spill.len(),
        spill_fraction,
        spill_warning: spill_fraction > 0.05,
        erosion_radius: 0.0,
        skipped: false,
    }
}

/// Atlas composition options.
#[derive(Debug, Clone)]
pub struct AtlasOptions {
    /// Contour samples per landmark segment.
    pub samples_per_segment: usize,
    pub atlas_size: u32,
    pub warp: WarpKind,
    /// MLS weight exponent.
    pub alpha: f64,
    /// Override for the per-piece erosion radius; `None` uses
    /// `max(1, 1% of the label bbox diagonal)`.
    pub erosion_radius: Option<f64>,
    /// Gutter dilation width in texels.
    pub gutter_texels: u32,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        Self {
            samples_per_segment: 50,
            atlas_size: 2048,
            warp: WarpKind::Mls,
            alpha: 1.0,
            erosion_radius: None,
            gutter_texels: 4,
        }
    }
}

fn label_bbox_diagonal(mask: &SegmentationMask, label: u8) -> Option<f64> {
    let mut min = (u32::MAX, u32::MAX);
    let mut max = (0u32, 0u32);
    let mut any = false;
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.label_at(x, y) == label {
                any = true;
                min = (min.0.min(x), min.1.min(y));
                max = (max.0.max(x), max.1.max(y));
            }
        }
    }
    if !any {
        return None;
    }
    let dx = (max.0 - min.0 + 1) as f64;
    let dy = (max.1 - min.1 + 1) as f64;
    Some((dx * dx + dy * dy).sqrt())
}

/// Runs the full texture extraction for every template piece.
///
/// Per piece: select view and label, correct the neckline (front torso of
/// tops), extract the contour, build control pairs, erode, extrapolate, warp.
/// Symmetric mode (no back view in the bundle) textures back-sourced pieces
/// from mirrored front annotations.
pub fn compose_atlas(
    bundle: &AnnotationBundle,
    template: &TemplateAsset,
    options: &AtlasOptions,
) -> Result<(TextureAtlas, Vec<PieceStats>), TexWarpError> {
    let mut atlas = TextureAtlas::new(options.atlas_size);
    let mut stats = Vec::new();

    let mirrored_back: Option<ViewData> = if bundle.back.is_none() {
        Some(bundle.mirrored_back())
    } else {
        None
    };

    // Front-torso neckline correction, once.
    let corrected_front_mask = if bundle.garment_type == GarmentType::Tshirt {
        Some(correct_neckline(&bundle.front.mask, &bundle.front.landmarks)?)
    } else {
        None
    };

    for piece in &template.pieces {
        let view: &ViewData = match piece.source.view {
            View::Front => &bundle.front,
            View::Back => bundle
                .back
                .as_ref()
                .or(mirrored_back.as_ref())
                .ok_or(TexWarpError::MissingBackView)?,
        };
        let use_corrected = piece.source.view == View::Front
            && piece.source.label == 1
            && bundle.garment_type == GarmentType::Tshirt;
        let mask: &SegmentationMask = if use_corrected {
            corrected_front_mask.as_ref().unwrap()
        } else {
            &view.mask
        };

        let wrap_piece_err = |e: TexWarpError| TexWarpError::Piece {
            piece: piece.name.clone(),
            source: Box::new(e),
        };

        // Erosion first decides whether the piece survives at all.
        let radius = options.erosion_radius.unwrap_or_else(|| {
            label_bbox_diagonal(mask, piece.source.label)
                .map(|d| (0.01 * d).max(1.0))
                .unwrap_or(1.0)
        });
        let (eroded, emptied) = erode_segment(mask, piece.source.label, radius);
        if emptied || mask.count_label(piece.source.label) == 0 {
            stats.push(PieceStats {
                piece: piece.name.clone(),
                pair_count: 0,
                texels: 0,
                spill_texels: 0,
                spill_fraction: 0.0,
                spill_warning: false,
                erosion_radius: radius,
                skipped: true,
            });
            continue;
        }

        let contour = extract_contour(mask, piece.source.label)
            .map_err(|e| wrap_piece_err(TexWarpError::Geom(e)))?;
        let image_landmarks: Vec<(String, Pt2)> = piece
            .landmarks
            .keys()
            .map(|name| {
                let lm = view
                    .landmarks
                    .get(name)
                    .filter(|l| l.visible)
                    .ok_or_else(|| TexWarpError::MissingLandmark(name.clone()))?;
                Ok((name.clone(), Pt2::new(lm.x, lm.y)))
            })
            .collect::<Result<_, TexWarpError>>()
            .map_err(&wrap_piece_err)?;
        let ref_landmarks: Vec<(String, Pt2)> = piece
            .landmarks
            .iter()
            .map(|(n, p)| (n.clone(), *p))
            .collect();
        let ref_contour = ClosedPolyline::new(piece.contour.clone())
            .map_err(|e| wrap_piece_err(TexWarpError::Geom(e)))?;
        let pairs = build_control_pairs(
            &contour,
            &image_landmarks,
            &ref_contour,
            &ref_landmarks,
            options.samples_per_segment,
        )
        .map_err(&wrap_piece_err)?;

        let region: Vec<bool> = eroded
            .data
            .iter()
            .map(|&l| l == piece.source.label)
            .collect();
        let band = 3.0 * radius;
        let source = extrapolate_colors(&view.image, &region, band);

        let warp =
            PieceWarp::build(options.warp, &pairs, options.alpha).map_err(&wrap_piece_err)?;
        let mut piece_stats = warp_piece(
            &source,
            &warp,
            &piece.contour,
            pairs.len(),
            &mut atlas,
            &piece.name,
        );
        piece_stats.erosion_radius = radius;
        stats.push(piece_stats);
    }

    dilate_gutter(&mut atlas, options.gutter_texels);
    Ok((atlas, stats))
}

/// Dilates written texels outward by `width` texels to suppress sampling
/// bleed at piece borders; gutter texels are tracked separately in the
/// coverage map.
fn dilate_gutter(atlas: &mut TextureAtlas, width: u32) {
    if width == 0 {
        return;
    }
    let s = atlas.size as usize;
    let sites: Vec<bool> = atlas.coverage.iter().map(|&c| c == COVER_PIECE).collect();
    if !sites.iter().any(|&b| b) {
        return;
    }
    let field = nearest_site_transform(s, s, &sites);
    let band = width as f64;
    for ty in 0..atlas.size {
        for tx in 0..atlas.size {
            let idx = (ty * atlas.size + tx) as usize;
            if atlas.coverage[idx] != COVER_EMPTY {
                continue;
            }
            if field.dist_sq[idx].sqrt() <= band {
                let site = field.site[idx];
                let sx = site % atlas.size;
                let sy = site / atlas.size;
                let c = *atlas.raster.get_pixel(sx, sy);
                atlas.raster.put_pixel(tx, ty, c);
                atlas.coverage[idx] = COVER_GUTTER;
            }
        }
    }
}
