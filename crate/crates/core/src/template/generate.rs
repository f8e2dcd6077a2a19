//! Procedural template generation.
//!
//! Both garments are built as inflated front/back panels sharing a common
//! parameter grid, so seam vertices coincide exactly and the assembled
//! surface is watertight up to the garment openings. The T-shirt adds a
//! collar band ring glued onto the neck notch; sleeves are parallelogram
//! strips whose root profile is matched by a bulge patch on the torso side
//! wall.

use std::collections::BTreeMap;

use crate::annotation::{GarmentType, View};
use crate::geom::{Pt2, Pt3};
use crate::geomkit::ramanujan_perimeter;

use super::{Constants, Piece, PieceSource, TemplateAsset, TemplateError};

/// T-shirt template parameters (meters / radians).
#[derive(Debug, Clone)]
pub struct TshirtParams {
    pub chest_width: f64,
    pub hem_to_armpit: f64,
    pub armpit_to_shoulder: f64,
    pub collar_height: f64,
    pub neck_width: f64,
    pub neck_drop_front: f64,
    pub neck_drop_back: f64,
    pub sleeve_length: f64,
    /// Sleeve angle below horizontal (the A-pose angle), radians.
    pub sleeve_angle: f64,
    /// Chest cross-section depth/width ratio.
    pub chest_rho: f64,
    /// Grid cells across the chest; other axes scale to match.
    pub segments_across: usize,
}

impl Default for TshirtParams {
    fn default() -> Self {
        Self {
            chest_width: 0.50,
            hem_to_armpit: 0.35,
            armpit_to_shoulder: 0.15,
            collar_height: 0.07,
            neck_width: 0.16,
            neck_drop_front: 0.05,
            neck_drop_back: 0.02,
            sleeve_length: 0.25,
            sleeve_angle: 30.0_f64.to_radians(),
            chest_rho: 0.55,
            segments_across: 24,
        }
    }
}

/// Pants template parameters (meters).
#[derive(Debug, Clone)]
pub struct PantsParams {
    pub waist_width: f64,
    pub leg_width: f64,
    pub crotch_to_bottom: f64,
    pub crotch_to_waist: f64,
    /// Waist cross-section depth/width ratio.
    pub waist_rho: f64,
    pub segments_across: usize,
}

impl Default for PantsParams {
    fn default() -> Self {
        Self {
            waist_width: 0.40,
            leg_width: 0.18,
            crotch_to_bottom: 0.70,
            crotch_to_waist: 0.25,
            waist_rho: 0.70,
            segments_across: 24,
        }
    }
}

struct MeshBuilder {
    vertices: Vec<Pt3>,
    uvs: Vec<Pt2>,
    faces: Vec<[u32; 3]>,
}

impl MeshBuilder {
    fn new() -> Self {
        Self {
            vertices: Vec::new(),
            uvs: Vec::new(),
            faces: Vec::new(),
        }
    }

    fn push_vertex(&mut self, p: Pt3, uv: Pt2) -> u32 {
        self.vertices.push(p);
        self.uvs.push(uv);
        (self.vertices.len() - 1) as u32
    }
}

/// Builds an axis with exact feature knots; gaps between knots are filled
/// uniformly at roughly `step` spacing, so no two samples nearly coincide.
fn axis_with_features(lo: f64, hi: f64, step: f64, features: &[f64]) -> Vec<f64> {
    let mut knots = vec![lo, hi];
    for &f in features {
        if f > lo + 1e-12 && f < hi - 1e-12 {
            knots.push(f);
        }
    }
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut out = vec![knots[0]];
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let n = ((b - a) / step).round().max(1.0) as usize;
        for k in 1..=n {
            out.push(a + (b - a) * k as f64 / n as f64);
        }
    }
    out
}

/// Emits one grid panel; returns the node index map (None where no kept cell
/// touches the node).
fn grid_panel(
    mb: &mut MeshBuilder,
    axis_a: &[f64],
    axis_b: &[f64],
    keep: &dyn Fn(f64, f64) -> bool,
    pos: &dyn Fn(f64, f64) -> Pt3,
    uv: &dyn Fn(f64, f64) -> Pt2,
    outward_y: f64,
) -> Vec<Vec<Option<u32>>> {
    let na = axis_a.len();
    let nb = axis_b.len();
    let mut kept = vec![vec![false; nb.saturating_sub(1)]; na.saturating_sub(1)];
    let mut touched = vec![vec![false; nb]; na];
    for i in 0..na - 1 {
        for j in 0..nb - 1 {
            let ca = 0.5 * (axis_a[i] + axis_a[i + 1]);
            let cb = 0.5 * (axis_b[j] + axis_b[j + 1]);
            if keep(ca, cb) {
                kept[i][j] = true;
                for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    touched[i + di][j + dj] = true;
                }
            }
        }
    }
    let mut nodes: Vec<Vec<Option<u32>>> = vec![vec![None; nb]; na];
    for i in 0..na {
        for j in 0..nb {
            if touched[i][j] {
                nodes[i][j] = Some(mb.push_vertex(
                    pos(axis_a[i], axis_b[j]),
                    uv(axis_a[i], axis_b[j]),
                ));
            }
        }
    }
    // Panel orientation from the parameterization sign in the xz plane.
    let flip = if outward_y == 0.0 {
        false
    } else {
        let p00 = pos(axis_a[0], axis_b[0]);
        let p10 = pos(axis_a[na - 1], axis_b[0]);
        let p01 = pos(axis_a[0], axis_b[nb - 1]);
        let da = p10 - p00;
        let db = p01 - p00;
        let ny = da.z * db.x - da.x * db.z;
        (ny > 0.0) != (outward_y > 0.0)
    };
    for i in 0..na - 1 {
        for j in 0..nb - 1 {
            if !kept[i][j] {
                continue;
            }
            let n00 = nodes[i][j].unwrap();
            let n10 = nodes[i + 1][j].unwrap();
            let n01 = nodes[i][j + 1].unwrap();
            let n11 = nodes[i + 1][j + 1].unwrap();
            if flip {
                mb.faces.push([n00, n11, n10]);
                mb.faces.push([n00, n01, n11]);
            } else {
                mb.faces.push([n00, n10, n11]);
                mb.faces.push([n00, n11, n01]);
            }
        }
    }
    nodes
}

fn axis_index(axis: &[f64], value: f64) -> usize {
    axis.iter()
        .position(|&a| (a - value).abs() < 1e-9)
        .unwrap_or_else(|| panic!("axis value {value} not found"))
}

fn check_positive(pairs: &[(&str, f64)]) -> Result<(), TemplateError> {
    for (name, v) in pairs {
        if !(*v > 0.0) {
            return Err(TemplateError::BadParams(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    Ok(())
}

/// Layout rectangle helper (v grows downward).
#[derive(Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
}

pub fn make_tshirt_template(params: &TshirtParams) -> Result<TemplateAsset, TemplateError> {
    let p = params;
    check_positive(&[
        ("chest_width", p.chest_width),
        ("hem_to_armpit", p.hem_to_armpit),
        ("armpit_to_shoulder", p.armpit_to_shoulder),
        ("collar_height", p.collar_height),
        ("neck_width", p.neck_width),
        ("neck_drop_front", p.neck_drop_front),
        ("neck_drop_back", p.neck_drop_back),
        ("sleeve_length", p.sleeve_length),
        ("chest_rho", p.chest_rho),
    ])?;
    if p.segments_across < 8 {
        return Err(TemplateError::BadParams(format!(
            "segments_across must be >= 8, got {}",
            p.segments_across
        )));
    }
    if !(p.sleeve_angle > 0.0 && p.sleeve_angle < std::f64::consts::FRAC_PI_2) {
        return Err(TemplateError::BadParams(format!(
            "sleeve_angle must be in (0, pi/2), got {}",
            p.sleeve_angle
        )));
    }
    if !(p.chest_rho <= 1.0) {
        return Err(TemplateError::BadParams("chest_rho must be <= 1".into()));
    }
    if p.neck_width >= 0.8 * p.chest_width {
        return Err(TemplateError::BadParams(
            "neck_width must be well below chest_width".into(),
        ));
    }
    let w2 = 0.5 * p.chest_width;
    let wn2 = 0.5 * p.neck_width;
    let hs = p.armpit_to_shoulder;
    let z_a = p.hem_to_armpit;
    let z_sh = z_a + hs;
    let z_top = z_sh + p.collar_height;
    let z_mid = 0.5 * (z_a + z_sh);
    let (sin_a, cos_a) = p.sleeve_angle.sin_cos();
    let sleeve_bottom = z_a - p.sleeve_length * sin_a;
    if sleeve_bottom <= 0.01 {
        return Err(TemplateError::BadParams(format!(
            "sleeve reaches below the hem (lowest point {sleeve_bottom:.3} m)"
        )));
    }
    if p.neck_drop_front >= hs || p.neck_drop_back >= hs {
        return Err(TemplateError::BadParams(
            "neck drop must be smaller than the armpit-to-shoulder span".into(),
        ));
    }
    if p.neck_drop_back > p.neck_drop_front {
        return Err(TemplateError::BadParams(
            "back neck drop must not exceed the front drop".into(),
        ));
    }

    let b_t = p.chest_rho * w2;
    let b_s = p.chest_rho * 0.5 * hs;
    let blend_w = (0.125 * p.chest_width).min(0.5 * (w2 - wn2));
    let step = p.chest_width / p.segments_across as f64;

    let taper = move |z: f64| -> f64 {
        if z <= z_a {
            1.0
        } else {
            ((z_sh - z) / (z_sh - z_a)).max(0.0)
        }
    };
    let root_profile = move |z: f64| -> f64 {
        let t = (z - z_mid) / (0.5 * hs);
        (1.0 - t * t).max(0.0).sqrt()
    };
    let bulge = move |x: f64, z: f64| -> f64 {
        let torso = b_t * (1.0 - (x / w2) * (x / w2)).max(0.0).sqrt() * taper(z);
        let patch = if (z_a..=z_sh).contains(&z) {
            let ramp = ((x.abs() - (w2 - blend_w)) / blend_w).clamp(0.0, 1.0);
            b_s * root_profile(z) * ramp
        } else {
            0.0
        };
        torso.max(patch)
    };

    let xs = axis_with_features(-w2, w2, step, &[-wn2, 0.0, wn2]);
    let zs = axis_with_features(
        0.0,
        z_sh,
        step,
        &[z_a, z_mid, z_sh - p.neck_drop_front, z_sh - p.neck_drop_back],
    );
    let zeta: Vec<f64> = zs
        .iter()
        .copied()
        .filter(|&z| z >= z_a - 1e-12)
        .collect();
    let ds = axis_with_features(0.0, p.sleeve_length, step, &[]);

    // --- layout ---------------------------------------------------------
    let g = 0.04;
    // Ring arc for the collar strip width (computed on the exact ring below;
    // an upper bound is enough for the scale choice).
    let ring_arc_bound = 2.0 * (2.0 * wn2 + p.neck_drop_front + p.neck_drop_back + 2.0 * b_t);
    let sigma = {
        let h_total = z_sh + hs + (p.collar_height + p.neck_drop_front);
        let s1 = (1.0 - 3.0 * g) / (2.0 * p.chest_width);
        let s2 = (1.0 - 5.0 * g) / (4.0 * p.sleeve_length);
        let s3 = (1.0 - 2.0 * g) / ring_arc_bound;
        let s4 = (1.0 - 4.0 * g) / h_total;
        0.98 * s1.min(s2).min(s3).min(s4)
    };
    let row1 = g;
    let row2 = row1 + z_sh * sigma + g;
    let row3 = row2 + hs * sigma + g;
    let rect_front = Rect { x0: g, y0: row1 };
    let rect_back = Rect {
        x0: 2.0 * g + p.chest_width * sigma,
        y0: row1,
    };
    let sleeve_w = p.sleeve_length * sigma;
    let rect_sleeve = |k: usize| Rect {
        x0: g + k as f64 * (sleeve_w + g),
        y0: row2,
    };
    let rect_collar = Rect { x0: g, y0: row3 };

    let uv_front = move |x: f64, z: f64| -> Pt2 {
        Pt2::new(rect_front.x0 + (x + w2) * sigma, rect_front.y0 + (z_sh - z) * sigma)
    };
    let uv_back = move |x: f64, z: f64| -> Pt2 {
        Pt2::new(rect_back.x0 + (w2 - x) * sigma, rect_back.y0 + (z_sh - z) * sigma)
    };

    let mut mb = MeshBuilder::new();

    // --- torso panels -----------------------------------------------------
    let notch_front = move |xc: f64, zc: f64| -> bool {
        xc.abs() < wn2 && zc > z_sh - p.neck_drop_front
    };
    let notch_back = move |xc: f64, zc: f64| -> bool {
        xc.abs() < wn2 && zc > z_sh - p.neck_drop_back
    };
    let front_nodes = grid_panel(
        &mut mb,
        &xs,
        &zs,
        &move |xc, zc| !notch_front(xc, zc),
        &move |x, z| Pt3::new(x, -bulge(x, z), z),
        &uv_front,
        -1.0,
    );
    let _back_nodes = grid_panel(
        &mut mb,
        &xs,
        &zs,
        &move |xc, zc| !notch_back(xc, zc),
        &move |x, z| Pt3::new(x, bulge(x, z), z),
        &uv_back,
        1.0,
    );

    // --- sleeves ----------------------------------------------------------
    // Parameterized by (d along axis, zeta root height); tubes with an
    // elliptical profile that vanishes at the strip edges.
    let sleeve_pos = move |side: f64, front: f64, d: f64, zeta: f64| -> Pt3 {
        Pt3::new(
            side * (w2 + d * cos_a),
            front * b_s * root_profile(zeta),
            zeta - d * sin_a,
        )
    };
    // Layout: the root edge faces the torso exactly as photographed.
    let sleeve_uv = move |rect: Rect, root_at_right: bool, d: f64, zeta: f64| -> Pt2 {
        let u = if root_at_right {
            rect.x0 + (p.sleeve_length - d) * sigma
        } else {
            rect.x0 + d * sigma
        };
        Pt2::new(u, rect.y0 + (z_sh - zeta) * sigma)
    };
    // (side, front, rect index, root_at_right)
    let sleeve_specs: [(f64, f64, usize, bool); 4] = [
        (-1.0, -1.0, 0, true),  // left front
        (1.0, -1.0, 1, false),  // right front
        (-1.0, 1.0, 2, false),  // left back (image right in the back photo)
        (1.0, 1.0, 3, true),    // right back
    ];
    let mut sleeve_nodes = Vec::new();
    for (side, front, rect_idx, root_right) in sleeve_specs {
        let rect = rect_sleeve(rect_idx);
        let nodes = grid_panel(
            &mut mb,
            &ds,
            &zeta,
            &|_, _| true,
            &move |d, zeta| sleeve_pos(side, front, d, zeta),
            &move |d, zeta| sleeve_uv(rect, root_right, d, zeta),
            front,
        );
        sleeve_nodes.push(nodes);
    }

    // --- collar band -------------------------------------------------------
    // Ring along the neck notch, ordered from the left pinch through the
    // front scoop to the right pinch, then back through the rear scoop.
    let mut ring: Vec<Pt3> = Vec::new();
    {
        let zf: Vec<f64> = zs
            .iter()
            .copied()
            .filter(|&z| z >= z_sh - p.neck_drop_front - 1e-12)
            .collect();
        let zb: Vec<f64> = zs
            .iter()
            .copied()
            .filter(|&z| z >= z_sh - p.neck_drop_back - 1e-12)
            .collect();
        let xn: Vec<f64> = xs
            .iter()
            .copied()
            .filter(|&x| x.abs() <= wn2 + 1e-12)
            .collect();
        // front-left pinch downwards
        for &z in zf.iter().rev() {
            ring.push(Pt3::new(-wn2, -bulge(-wn2, z), z));
        }
        // front scoop bottom, left to right (endpoints already covered)
        for &x in &xn[1..xn.len() - 1] {
            ring.push(Pt3::new(x, -bulge(x, z_sh - p.neck_drop_front), z_sh - p.neck_drop_front));
        }
        // front-right pinch upwards
        for &z in &zf {
            ring.push(Pt3::new(wn2, -bulge(wn2, z), z));
        }
        // back-right downwards (skip the shared pinch vertex)
        for &z in zb.iter().rev().skip(1) {
            ring.push(Pt3::new(wn2, bulge(wn2, z), z));
        }
        // back scoop, right to left
        for &x in xn[1..xn.len() - 1].iter().rev() {
            ring.push(Pt3::new(x, bulge(x, z_sh - p.neck_drop_back), z_sh - p.neck_drop_back));
        }
        // back-left upwards, stopping short of the shared pinch vertex
        for &z in zb.iter().take(zb.len() - 1) {
            ring.push(Pt3::new(-wn2, bulge(-wn2, z), z));
        }
    }
    // Rotate the ring to start at the back-center seam.
    let seam_at = ring
        .iter()
        .position(|v| v.x.abs() < 1e-9 && v.y > 0.0)
        .expect("back center vertex on the ring");
    ring.rotate_left(seam_at);

    let ring_len = ring.len();
    let mut ring_arc = vec![0.0; ring_len + 1];
    for i in 0..ring_len {
        ring_arc[i + 1] = ring_arc[i] + ring[i].distance(ring[(i + 1) % ring_len]);
    }
    let collar_rows = 3.max((p.collar_height / step).round() as usize);
    let mut collar_nodes: Vec<Vec<u32>> = Vec::with_capacity(ring_len + 1);
    for c in 0..=ring_len {
        let base = ring[c % ring_len];
        let u = rect_collar.x0 + ring_arc[c] * sigma;
        let mut column = Vec::with_capacity(collar_rows + 1);
        for r in 0..=collar_rows {
            let z = base.z + (z_top - base.z) * r as f64 / collar_rows as f64;
            let uv = Pt2::new(u, rect_collar.y0 + (z_top - z) * sigma);
            column.push(mb.push_vertex(Pt3::new(base.x, base.y, z), uv));
        }
        collar_nodes.push(column);
    }
    for c in 0..ring_len {
        for r in 0..collar_rows {
            let n00 = collar_nodes[c][r];
            let n10 = collar_nodes[c + 1][r];
            let n01 = collar_nodes[c][r + 1];
            let n11 = collar_nodes[c + 1][r + 1];
            mb.faces.push([n00, n10, n11]);
            mb.faces.push([n00, n11, n01]);
        }
    }

    // --- markers -----------------------------------------------------------
    let xi = |v: f64| axis_index(&xs, v);
    let zi = |v: f64| axis_index(&zs, v);
    let mut markers = BTreeMap::new();
    let front_node = |x: f64, z: f64| front_nodes[xi(x)][zi(z)].expect("front torso node");
    markers.insert("hem_left".to_string(), front_node(-w2, 0.0));
    markers.insert("hem_right".to_string(), front_node(w2, 0.0));
    markers.insert("armpit_left".to_string(), front_node(-w2, z_a));
    markers.insert("armpit_right".to_string(), front_node(w2, z_a));
    markers.insert("shoulder_left".to_string(), front_node(-w2, z_sh));
    markers.insert("shoulder_right".to_string(), front_node(w2, z_sh));
    let di = axis_index(&ds, p.sleeve_length);
    let zmi = axis_index(&zeta, z_mid);
    markers.insert(
        "cuff_left".to_string(),
        sleeve_nodes[0][di][zmi].expect("left cuff node"),
    );
    markers.insert(
        "cuff_right".to_string(),
        sleeve_nodes[1][di][zmi].expect("right cuff node"),
    );
    // Collar-top front center: the highest point of the garment at x = 0.
    let front_center_col = (0..ring_len)
        .find(|&c| ring[c].x.abs() < 1e-9 && ring[c].y < 0.0)
        .expect("front center column on the ring");
    markers.insert(
        "neck_center".to_string(),
        collar_nodes[front_center_col][collar_rows],
    );

    // --- pieces ------------------------------------------------------------
    let torso_outline = |uv: &dyn Fn(f64, f64) -> Pt2, drop: f64| -> Vec<Pt2> {
        vec![
            uv(-w2, z_sh),
            uv(-wn2, z_sh),
            uv(-wn2, z_sh - drop),
            uv(wn2, z_sh - drop),
            uv(wn2, z_sh),
            uv(w2, z_sh),
            uv(w2, 0.0),
            uv(-w2, 0.0),
        ]
    };
    let mut pieces = Vec::new();
    {
        let uvf: &dyn Fn(f64, f64) -> Pt2 = &uv_front;
        let mut landmarks = BTreeMap::new();
        landmarks.insert("shoulder_left".into(), uv_front(-w2, z_sh));
        landmarks.insert("shoulder_right".into(), uv_front(w2, z_sh));
        landmarks.insert("armpit_left".into(), uv_front(-w2, z_a));
        landmarks.insert("armpit_right".into(), uv_front(w2, z_a));
        landmarks.insert("hem_left".into(), uv_front(-w2, 0.0));
        landmarks.insert("hem_right".into(), uv_front(w2, 0.0));
        pieces.push(Piece {
            name: "front_torso".into(),
            contour: torso_outline(uvf, p.neck_drop_front),
            landmarks,
            source: PieceSource {
                view: View::Front,
                label: 1,
            },
        });
    }
    {
        let uvb: &dyn Fn(f64, f64) -> Pt2 = &uv_back;
        // In the back photo image-left is the garment's +x side.
        let mut landmarks = BTreeMap::new();
        landmarks.insert("shoulder_left".into(), uv_back(w2, z_sh));
        landmarks.insert("shoulder_right".into(), uv_back(-w2, z_sh));
        landmarks.insert("armpit_left".into(), uv_back(w2, z_a));
        landmarks.insert("armpit_right".into(), uv_back(-w2, z_a));
        landmarks.insert("hem_left".into(), uv_back(w2, 0.0));
        landmarks.insert("hem_right".into(), uv_back(-w2, 0.0));
        pieces.push(Piece {
            name: "back_torso".into(),
            contour: torso_outline(uvb, p.neck_drop_back),
            landmarks,
            source: PieceSource {
                view: View::Back,
                label: 1,
            },
        });
    }
    let sleeve_piece = |name: &str,
                        rect_idx: usize,
                        root_right: bool,
                        view: View,
                        label: u8,
                        lm_prefix: &str|
     -> Piece {
        let rect = rect_sleeve(rect_idx);
        let uv = |d: f64, zeta: f64| sleeve_uv(rect, root_right, d, zeta);
        let contour = vec![
            uv(0.0, z_sh),
            uv(p.sleeve_length, z_sh),
            uv(p.sleeve_length, z_a),
            uv(0.0, z_a),
        ];
        let mut landmarks = BTreeMap::new();
        landmarks.insert(format!("shoulder_{lm_prefix}"), uv(0.0, z_sh));
        landmarks.insert(format!("cuff_{lm_prefix}_outer"), uv(p.sleeve_length, z_sh));
        landmarks.insert(format!("cuff_{lm_prefix}_inner"), uv(p.sleeve_length, z_a));
        landmarks.insert(format!("armpit_{lm_prefix}"), uv(0.0, z_a));
        Piece {
            name: name.into(),
            contour,
            landmarks,
            source: PieceSource { view, label },
        }
    };
    pieces.push(sleeve_piece("left_sleeve_front", 0, true, View::Front, 2, "left"));
    pieces.push(sleeve_piece("right_sleeve_front", 1, false, View::Front, 3, "right"));
    // The back photo shows the physical left sleeve on image right, where it
    // carries the right_sleeve label and the *_right landmark names.
    pieces.push(sleeve_piece("left_sleeve_back", 2, false, View::Back, 3, "right"));
    pieces.push(sleeve_piece("right_sleeve_back", 3, true, View::Back, 2, "left"));
    {
        // Collar piece polygon: straight top edge, seam verticals, wavy
        // bottom following the notch depth.
        let top_v = rect_collar.y0;
        let u_at = |c: usize| rect_collar.x0 + ring_arc[c] * sigma;
        let mut contour = Vec::new();
        contour.push(Pt2::new(u_at(0), top_v));
        contour.push(Pt2::new(u_at(ring_len), top_v));
        for c in (0..=ring_len).rev() {
            let z = ring[c % ring_len].z;
            contour.push(Pt2::new(u_at(c), rect_collar.y0 + (z_top - z) * sigma));
        }
        let left_pinch = (0..ring_len)
            .find(|&c| (ring[c].x + wn2).abs() < 1e-9 && (ring[c].z - z_sh).abs() < 1e-9)
            .expect("left pinch on ring");
        let right_pinch = (0..ring_len)
            .find(|&c| (ring[c].x - wn2).abs() < 1e-9 && (ring[c].z - z_sh).abs() < 1e-9)
            .expect("right pinch on ring");
        let mut landmarks = BTreeMap::new();
        landmarks.insert("neck_left".into(), Pt2::new(u_at(left_pinch), top_v));
        landmarks.insert("neck_center_front".into(), Pt2::new(u_at(front_center_col), top_v));
        landmarks.insert("neck_right".into(), Pt2::new(u_at(right_pinch), top_v));
        pieces.push(Piece {
            name: "collar".into(),
            contour,
            landmarks,
            source: PieceSource {
                view: View::Front,
                label: 4,
            },
        });
    }

    let constants = Constants {
        alpha: p.sleeve_angle,
        beta: p.sleeve_angle,
        s_depth: 2.0 * b_t / hs,
        waist_girth: ramanujan_perimeter(w2, b_t),
        chest_rho: p.chest_rho,
        waist_rho: p.chest_rho,
    };
    let asset = TemplateAsset {
        garment_type: GarmentType::Tshirt,
        vertices: mb.vertices,
        faces: mb.faces,
        material_coords: mb.uvs,
        pieces,
        markers,
        constants,
    };
    asset.validate()?;
    Ok(asset)
}

pub fn make_pants_template(params: &PantsParams) -> Result<TemplateAsset, TemplateError> {
    let p = params;
    check_positive(&[
        ("waist_width", p.waist_width),
        ("leg_width", p.leg_width),
        ("crotch_to_bottom", p.crotch_to_bottom),
        ("crotch_to_waist", p.crotch_to_waist),
        ("waist_rho", p.waist_rho),
    ])?;
    if p.segments_across < 8 {
        return Err(TemplateError::BadParams(format!(
            "segments_across must be >= 8, got {}",
            p.segments_across
        )));
    }
    if !(p.waist_rho <= 1.0) {
        return Err(TemplateError::BadParams("waist_rho must be <= 1".into()));
    }
    if 2.0 * p.leg_width >= p.waist_width {
        return Err(TemplateError::BadParams(
            "legs must leave a gap: 2 * leg_width < waist_width".into(),
        ));
    }
    let w2 = 0.5 * p.waist_width;
    let z_c = p.crotch_to_bottom;
    let z_w = z_c + p.crotch_to_waist;
    let b_w = p.waist_rho * w2;
    let b_leg = p.waist_rho * 0.5 * p.leg_width;
    let inner = w2 - p.leg_width;
    let step = p.waist_width / p.segments_across as f64;

    let one_hump = move |x: f64| -> f64 { b_w * (1.0 - (x / w2) * (x / w2)).max(0.0).sqrt() };
    let two_hump = move |x: f64| -> f64 {
        let c = w2 - 0.5 * p.leg_width;
        let cx = if x < 0.0 { -c } else { c };
        if x.abs() < inner - 1e-12 {
            return 0.0;
        }
        let t = (x - cx) / (0.5 * p.leg_width);
        b_leg * (1.0 - t * t).max(0.0).sqrt()
    };
    let bulge = move |x: f64, z: f64| -> f64 {
        if z <= z_c {
            two_hump(x)
        } else {
            let tau = ((z - z_c) / (z_w - z_c)).clamp(0.0, 1.0);
            (1.0 - tau) * two_hump(x) + tau * one_hump(x)
        }
    };

    let xs_left = axis_with_features(-w2, 0.0, step, &[-inner]);
    let xs_right = axis_with_features(0.0, w2, step, &[inner]);
    let zs = axis_with_features(0.0, z_w, step, &[z_c]);
    let in_gap = move |xc: f64, zc: f64| -> bool { xc.abs() < inner && zc < z_c };

    // --- layout: 2x2 grid -----------------------------------------------
    let g = 0.04;
    let sigma = {
        let s1 = (1.0 - 3.0 * g) / (2.0 * w2 * 2.0);
        let s2 = (1.0 - 3.0 * g) / (2.0 * z_w);
        0.98 * s1.min(s2)
    };
    let rects = [
        Rect { x0: g, y0: g },                                   // left front
        Rect { x0: 2.0 * g + w2 * sigma, y0: g },                // right front
        Rect { x0: g, y0: 2.0 * g + z_w * sigma },               // left back
        Rect { x0: 2.0 * g + w2 * sigma, y0: 2.0 * g + z_w * sigma }, // right back
    ];
    // Front pieces map +x to +u; back pieces flip x to match the back photo.
    let mut mb = MeshBuilder::new();
    let lf_rect = rects[0];
    let rf_rect = rects[1];
    let lb_rect = rects[2];
    let rb_rect = rects[3];
    let left_front_uv =
        move |x: f64, z: f64| Pt2::new(lf_rect.x0 + (x + w2) * sigma, lf_rect.y0 + (z_w - z) * sigma);
    let right_front_uv =
        move |x: f64, z: f64| Pt2::new(rf_rect.x0 + x * sigma, rf_rect.y0 + (z_w - z) * sigma);
    let left_back_uv =
        move |x: f64, z: f64| Pt2::new(lb_rect.x0 + (-x) * sigma, lb_rect.y0 + (z_w - z) * sigma);
    let right_back_uv = move |x: f64, z: f64| {
        Pt2::new(rb_rect.x0 + (w2 - x) * sigma, rb_rect.y0 + (z_w - z) * sigma)
    };

    let lf_nodes = grid_panel(
        &mut mb,
        &xs_left,
        &zs,
        &move |xc, zc| !in_gap(xc, zc),
        &move |x, z| Pt3::new(x, -bulge(x, z), z),
        &left_front_uv,
        -1.0,
    );
    let rf_nodes = grid_panel(
        &mut mb,
        &xs_right,
        &zs,
        &move |xc, zc| !in_gap(xc, zc),
        &move |x, z| Pt3::new(x, -bulge(x, z), z),
        &right_front_uv,
        -1.0,
    );
    grid_panel(
        &mut mb,
        &xs_left,
        &zs,
        &move |xc, zc| !in_gap(xc, zc),
        &move |x, z| Pt3::new(x, bulge(x, z), z),
        &left_back_uv,
        1.0,
    );
    grid_panel(
        &mut mb,
        &xs_right,
        &zs,
        &move |xc, zc| !in_gap(xc, zc),
        &move |x, z| Pt3::new(x, bulge(x, z), z),
        &right_back_uv,
        1.0,
    );

    let zi = |v: f64| axis_index(&zs, v);
    let mut markers = BTreeMap::new();
    let lf_node = |x: f64, z: f64| lf_nodes[axis_index(&xs_left, x)][zi(z)].expect("left front node");
    let rf_node =
        |x: f64, z: f64| rf_nodes[axis_index(&xs_right, x)][zi(z)].expect("right front node");
    markers.insert("waist_left".to_string(), lf_node(-w2, z_w));
    markers.insert("bottom_left".to_string(), lf_node(-w2, 0.0));
    markers.insert("crotch".to_string(), lf_node(0.0, z_c));
    markers.insert("waist_right".to_string(), rf_node(w2, z_w));
    markers.insert("bottom_right".to_string(), rf_node(w2, 0.0));

    // --- pieces -----------------------------------------------------------
    // L-shaped outlines; corner order follows the garment silhouette.
    let lshape = |uv: &dyn Fn(f64, f64) -> Pt2, left: bool| -> Vec<Pt2> {
        let (outer, inner_x) = if left { (-w2, -inner) } else { (w2, inner) };
        vec![
            uv(outer, z_w),
            uv(0.0, z_w),
            uv(0.0, z_c),
            uv(inner_x, z_c),
            uv(inner_x, 0.0),
            uv(outer, 0.0),
        ]
    };
    let mut pieces = Vec::new();
    {
        let uv: &dyn Fn(f64, f64) -> Pt2 = &left_front_uv;
        let mut landmarks = BTreeMap::new();
        landmarks.insert("waist_left".into(), uv(-w2, z_w));
        landmarks.insert("crotch".into(), uv(0.0, z_c));
        landmarks.insert("bottom_left_inner".into(), uv(-inner, 0.0));
        landmarks.insert("bottom_left_outer".into(), uv(-w2, 0.0));
        pieces.push(Piece {
            name: "left_front".into(),
            contour: lshape(uv, true),
            landmarks,
            source: PieceSource {
                view: View::Front,
                label: 1,
            },
        });
    }
    {
        let uv: &dyn Fn(f64, f64) -> Pt2 = &right_front_uv;
        let mut landmarks = BTreeMap::new();
        landmarks.insert("waist_right".into(), uv(w2, z_w));
        landmarks.insert("crotch".into(), uv(0.0, z_c));
        landmarks.insert("bottom_right_inner".into(), uv(inner, 0.0));
        landmarks.insert("bottom_right_outer".into(), uv(w2, 0.0));
        pieces.push(Piece {
            name: "right_front".into(),
            contour: lshape(uv, false),
            landmarks,
            source: PieceSource {
                view: View::Front,
                label: 2,
            },
        });
    }
    {
        // Physical left leg, seen from the back on image right: right_part.
        let uv: &dyn Fn(f64, f64) -> Pt2 = &left_back_uv;
        let mut landmarks = BTreeMap::new();
        landmarks.insert("waist_right".into(), uv(-w2, z_w));
        landmarks.insert("crotch".into(), uv(0.0, z_c));
        landmarks.insert("bottom_right_inner".into(), uv(-inner, 0.0));
        landmarks.insert("bottom_right_outer".into(), uv(-w2, 0.0));
        pieces.push(Piece {
            name: "left_back".into(),
            contour: lshape(uv, true),
            landmarks,
            source: PieceSource {
                view: View::Back,
                label: 2,
            },
        });
    }
    {
        let uv: &dyn Fn(f64, f64) -> Pt2 = &right_back_uv;
        let mut landmarks = BTreeMap::new();
        landmarks.insert("waist_left".into(), uv(w2, z_w));
        landmarks.insert("crotch".into(), uv(0.0, z_c));
        landmarks.insert("bottom_left_inner".into(), uv(inner, 0.0));
        landmarks.insert("bottom_left_outer".into(), uv(w2, 0.0));
        pieces.push(Piece {
            name: "right_back".into(),
            contour: lshape(uv, false),
            landmarks,
            source: PieceSource {
                view: View::Back,
                label: 1,
            },
        });
    }

    let constants = Constants {
        alpha: std::f64::consts::FRAC_PI_4,
        beta: std::f64::consts::FRAC_PI_4,
        s_depth: 2.0 * b_w / p.crotch_to_waist,
        waist_girth: ramanujan_perimeter(w2, b_w),
        chest_rho: p.waist_rho,
        waist_rho: p.waist_rho,
    };
    let asset = TemplateAsset {
        garment_type: GarmentType::Pants,
        vertices: mb.vertices,
        faces: mb.faces,
        material_coords: mb.uvs,
        pieces,
        markers,
        constants,
    };
    asset.validate()?;
    Ok(asset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasurementReport;

    #[test]
    fn default_tshirt_passes_invariants() {
        let asset = make_tshirt_template(&TshirtParams::default()).unwrap();
        assert_eq!(asset.pieces.len(), 7);
        let chest = asset.marker_point("armpit_right").unwrap().x
            - asset.marker_point("armpit_left").unwrap().x;
        assert!((chest - 0.5).abs() < 1e-6);
    }

    #[test]
    fn sleeve_angle_is_recovered() {
        let mut params = TshirtParams::default();
        params.sleeve_angle = 30.0_f64.to_radians();
        let asset = make_tshirt_template(&params).unwrap();
        let again = asset.recompute_constants();
        assert!((again.alpha - params.sleeve_angle).abs() < 1e-9);
        assert!((again.beta - params.sleeve_angle).abs() < 1e-9);
    }

    #[test]
    fn chest_rho_one_is_circular_section() {
        let mut params = TshirtParams::default();
        params.chest_rho = 1.0;
        let asset = make_tshirt_template(&params).unwrap();
        assert!((asset.constants.chest_rho - 1.0).abs() < 1e-12);
        assert!((asset.recompute_constants().chest_rho - 1.0).abs() < 1e-9);
    }

    #[test]
    fn default_pants_pass_invariants() {
        let asset = make_pants_template(&PantsParams::default()).unwrap();
        assert_eq!(asset.pieces.len(), 4);
        let p = PantsParams::default();
        let expected = ramanujan_perimeter(0.5 * p.waist_width, p.waist_rho * 0.5 * p.waist_width);
        assert!((asset.constants.waist_girth - expected).abs() < 1e-6);
        match asset.intrinsic_report() {
            MeasurementReport::Pants(r) => {
                assert!((r.crotch_to_bottom - p.crotch_to_bottom).abs() < 1e-9);
                assert!((r.crotch_to_waist - p.crotch_to_waist).abs() < 1e-9);
                assert!((r.waist_girth - expected).abs() < 1e-9);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn pants_piece_polygons_disjoint_brute_force() {
        let asset = make_pants_template(&PantsParams::default()).unwrap();
        // Dense edge sampling oracle for pairwise polygon separation.
        let sample_edges = |poly: &[Pt2]| -> Vec<Pt2> {
            let mut pts = Vec::new();
            let n = poly.len();
            for i in 0..n {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                for k in 0..50 {
                    pts.push(a.lerp(b, k as f64 / 50.0));
                }
            }
            pts
        };
        for i in 0..asset.pieces.len() {
            for j in (i + 1)..asset.pieces.len() {
                let pa = sample_edges(&asset.pieces[i].contour);
                let pb = sample_edges(&asset.pieces[j].contour);
                let mut min_d = f64::INFINITY;
                for a in &pa {
                    for b in &pb {
                        min_d = min_d.min(a.distance(*b));
                    }
                }
                assert!(
                    min_d >= 0.02,
                    "pieces {} and {} too close: {min_d}",
                    asset.pieces[i].name,
                    asset.pieces[j].name
                );
            }
        }
    }

    #[test]
    fn degenerate_params_rejected() {
        let mut p = TshirtParams::default();
        p.sleeve_length = 1.5; // reaches far below the hem
        assert!(make_tshirt_template(&p).is_err());

        let mut p = TshirtParams::default();
        p.segments_across = 4;
        assert!(make_tshirt_template(&p).is_err());

        let mut p = PantsParams::default();
        p.leg_width = 0.3; // 2*leg >= waist
        assert!(make_pants_template(&p).is_err());
    }

    #[test]
    fn tshirt_intrinsic_matches_params() {
        let p = TshirtParams::default();
        let asset = make_tshirt_template(&p).unwrap();
        match asset.intrinsic_report() {
            MeasurementReport::Tshirt(r) => {
                assert!((r.chest_width - p.chest_width).abs() < 1e-9);
                assert!((r.armpit_to_hemline - p.hem_to_armpit).abs() < 1e-9);
                assert!((r.armpit_to_shoulder - p.armpit_to_shoulder).abs() < 1e-9);
                assert!(
                    (r.neck_to_hemline
                        - (p.hem_to_armpit + p.armpit_to_shoulder + p.collar_height))
                        .abs()
                        < 1e-9
                );
                assert!((r.left_sleeve_length - p.sleeve_length).abs() < 1e-9);
                assert!((r.right_sleeve_length - p.sleeve_length).abs() < 1e-9);
            }
            _ => unreachable!(),
        }
    }
}
