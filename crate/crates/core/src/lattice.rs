//! Trivariate Bernstein free-form deformation.
//!
//! The control lattice is a single Bernstein patch over the template's
//! bounding box (degree = count-1 per axis, no B-spline locality). Rest
//! control planes are uniform over the box, so the affine box embedding makes
//! the rest lattice reproduce the mesh exactly.
//!
//! The solvers compute displaced planes so that the *deformed marker
//! vertices* realize the measurement report exactly: interior Bernstein
//! planes are not interpolating, so gap targets are imposed through the
//! basis evaluated at the markers' parameters and solved as a small linear
//! system per axis. Anchoring (hemline plane, chest-span midpoint, depth
//! midplane; crotch plane and mid planes for pants) removes the translation
//! freedom.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::GarmentType;
use crate::geom::{solve_dense, Aabb, Pt3};
use crate::measure::{PantsMeasurements, TshirtMeasurements};
use crate::template::TemplateAsset;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("vertex {index} outside the lattice box by {excess:.6} m on {axis}")]
    VertexOutside {
        index: usize,
        axis: char,
        excess: f64,
    },
    #[error("infeasible measurement: {0}")]
    Infeasible(String),
    #[error("lattice dims {got:?} do not match garment type (expected {expected:?})")]
    DimsMismatch {
        got: (usize, usize, usize),
        expected: (usize, usize, usize),
    },
    #[error("singular solve for axis {0}")]
    Singular(char),
}

/// Lattice dimensions per garment type: (l, m, n) control-point counts along
/// width, depth and height.
pub fn lattice_dims(garment: GarmentType) -> (usize, usize, usize) {
    match garment {
        GarmentType::Tshirt => (4, 2, 4),
        GarmentType::Pants => (3, 2, 3),
    }
}

/// An axis-aligned trivariate Bernstein control grid with rest and displaced
/// control positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlLattice {
    pub dims: (usize, usize, usize),
    pub rest: Vec<Pt3>,
    pub displaced: Vec<Pt3>,
    pub bbox: Aabb,
}

impl ControlLattice {
    /// Rest lattice with uniformly spaced planes over `bbox`.
    pub fn rest_over_box(dims: (usize, usize, usize), bbox: Aabb) -> Self {
        let (l, m, n) = dims;
        assert!(l >= 2 && m >= 2 && n >= 2);
        let mut rest = Vec::with_capacity(l * m * n);
        for i in 0..l {
            for j in 0..m {
                for k in 0..n {
                    rest.push(Pt3::new(
                        bbox.min.x + (bbox.max.x - bbox.min.x) * i as f64 / (l - 1) as f64,
                        bbox.min.y + (bbox.max.y - bbox.min.y) * j as f64 / (m - 1) as f64,
                        bbox.min.z + (bbox.max.z - bbox.min.z) * k as f64 / (n - 1) as f64,
                    ));
                }
            }
        }
        let displaced = rest.clone();
        Self {
            dims,
            rest,
            displaced,
            bbox,
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    /// Replaces the displaced grid with separable plane coordinates.
    pub fn set_displaced_planes(&mut self, xs: &[f64], ys: &[f64], zs: &[f64]) {
        assert_eq!((xs.len(), ys.len(), zs.len()), self.dims);
        for i in 0..self.dims.0 {
            for j in 0..self.dims.1 {
                for k in 0..self.dims.2 {
                    let idx = self.index(i, j, k);
                    self.displaced[idx] = Pt3::new(xs[i], ys[j], zs[k]);
                }
            }
        }
    }

    /// Rest plane coordinates along one axis (the rest grid is separable by
    /// construction).
    pub fn rest_planes(&self, axis: usize) -> Vec<f64> {
        let (l, m, n) = self.dims;
        match axis {
            0 => (0..l).map(|i| self.rest[self.index(i, 0, 0)].x).collect(),
            1 => (0..m).map(|j| self.rest[self.index(0, j, 0)].y).collect(),
            2 => (0..n).map(|k| self.rest[self.index(0, 0, k)].z).collect(),
            _ => panic!("axis out of range"),
        }
    }
}

/// Bernstein basis of the given degree at `t`: weights sum to one.
pub fn bernstein_weights(degree: usize, t: f64) -> Result<Vec<f64>, LatticeError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(LatticeError::OutOfRange(format!(
            "t must be in [0, 1], got {t}"
        )));
    }
    let mut w = vec![0.0; degree + 1];
    let mut binom = 1.0;
    for (i, slot) in w.iter_mut().enumerate() {
        *slot = binom * t.powi(i as i32) * (1.0 - t).powi((degree - i) as i32);
        binom = binom * (degree - i) as f64 / (i + 1) as f64;
    }
    Ok(w)
}

/// Per-vertex normalized coordinates in the rest box.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeEmbedding {
    pub coords: Vec<[f64; 3]>,
}

/// Slack absorbed when vertices sit marginally outside the box (meters).
pub const EMBED_EPSILON: f64 = 1e-6;

/// Affine normalization of each vertex into `[0, 1]^3` relative to the rest
/// bounding box, with an epsilon-inflated acceptance band.
pub fn embed(vertices: &[Pt3], bbox: &Aabb) -> Result<LatticeEmbedding, LatticeError> {
    let size = bbox.size();
    let mut coords = Vec::with_capacity(vertices.len());
    for (index, v) in vertices.iter().enumerate() {
        let raw = [
            (v.x - bbox.min.x, size.x, 'x'),
            (v.y - bbox.min.y, size.y, 'y'),
            (v.z - bbox.min.z, size.z, 'z'),
        ];
        let mut c = [0.0; 3];
        for (slot, (offset, extent, axis)) in c.iter_mut().zip(raw) {
            if offset < -EMBED_EPSILON {
                return Err(LatticeError::VertexOutside {
                    index,
                    axis,
                    excess: -offset,
                });
            }
            if offset > extent + EMBED_EPSILON {
                return Err(LatticeError::VertexOutside {
                    index,
                    axis,
                    excess: offset - extent,
                });
            }
            *slot = (offset / extent).clamp(0.0, 1.0);
        }
        coords.push(c);
    }
    Ok(LatticeEmbedding { coords })
}

/// Evaluates the FFD at every embedded vertex against the displaced grid.
pub fn deform(embedding: &LatticeEmbedding, lattice: &ControlLattice) -> Vec<Pt3> {
    let (l, m, n) = lattice.dims;
    embedding
        .coords
        .iter()
        .map(|&[s, t, u]| {
            let ws = bernstein_weights(l - 1, s).expect("embedding in range");
            let wt = bernstein_weights(m - 1, t).expect("embedding in range");
            let wu = bernstein_weights(n - 1, u).expect("embedding in range");
            let mut acc = Pt3::new(0.0, 0.0, 0.0);
            for (i, &wi) in ws.iter().enumerate() {
                for (j, &wj) in wt.iter().enumerate() {
                    let wij = wi * wj;
                    for (k, &wk) in wu.iter().enumerate() {
                        acc = acc + lattice.displaced[lattice.index(i, j, k)] * (wij * wk);
                    }
                }
            }
            acc
        })
        .collect()
}

/// Normalized box coordinate of one marker vertex along one axis.
fn marker_param(template: &TemplateAsset, bbox: &Aabb, name: &str, axis: usize) -> f64 {
    let p = template
        .marker_point(name)
        .unwrap_or_else(|| panic!("marker {name} present"));
    let (lo, extent) = match axis {
        0 => (bbox.min.x, bbox.max.x - bbox.min.x),
        1 => (bbox.min.y, bbox.max.y - bbox.min.y),
        2 => (bbox.min.z, bbox.max.z - bbox.min.z),
        _ => unreachable!(),
    };
    let v = match axis {
        0 => p.x,
        1 => p.y,
        2 => p.z,
        _ => unreachable!(),
    };
    ((v - lo) / extent).clamp(0.0, 1.0)
}

/// Solves displaced plane coordinates along one axis so that the deformed
/// positions of points with parameters `params` hit `targets` exactly.
fn solve_axis_planes(
    degree: usize,
    params: &[f64],
    targets: &[f64],
    axis: char,
) -> Result<Vec<f64>, LatticeError> {
    assert_eq!(params.len(), degree + 1);
    assert_eq!(targets.len(), degree + 1);
    let n = degree + 1;
    let mut a = vec![vec![0.0; n]; n];
    for (row, &t) in params.iter().enumerate() {
        let w = bernstein_weights(degree, t)?;
        a[row].copy_from_slice(&w);
    }
    solve_dense(a, targets.to_vec()).ok_or(LatticeError::Singular(axis))
}

fn positive_gap(name: &str, value: f64) -> Result<f64, LatticeError> {
    if !(value > 0.0) {
        return Err(LatticeError::Infeasible(format!(
            "derived gap {name} must be positive, got {value:.6}"
        )));
    }
    Ok(value)
}

/// Solves the T-shirt lattice from a measurement report.
///
/// Deformed marker spans realize: sleeve x-extents (`length * cos(angle)`),
/// the chest width between armpits, the hemline/armpit/shoulder/neck-top
/// height structure, and the depth `armpit_to_shoulder * s_depth`. The
/// hemline plane, the chest-span midpoint and the depth midplane stay fixed.
pub fn solve_lattice_tshirt(
    report: &TshirtMeasurements,
    template: &TemplateAsset,
) -> Result<ControlLattice, LatticeError> {
    assert_eq!(template.garment_type, GarmentType::Tshirt);
    let dims = lattice_dims(GarmentType::Tshirt);
    let bbox = template.aabb();
    let mut lattice = ControlLattice::rest_over_box(dims, bbox);
    let c = &template.constants;

    let left_x = positive_gap("left sleeve x-extent", report.left_sleeve_length * c.alpha.cos())?;
    let right_x =
        positive_gap("right sleeve x-extent", report.right_sleeve_length * c.beta.cos())?;
    let chest = positive_gap("chest width", report.chest_width)?;
    let a2h = positive_gap("armpit-to-hemline", report.armpit_to_hemline)?;
    let a2s = positive_gap("armpit-to-shoulder", report.armpit_to_shoulder)?;
    let neck_gap = positive_gap(
        "shoulder-to-neck-top (neck_to_hemline - armpit_to_hemline - armpit_to_shoulder)",
        report.neck_to_hemline - a2h - a2s,
    )?;
    let depth = positive_gap("depth (armpit_to_shoulder * s_depth)", a2s * c.s_depth)?;

    // x axis: markers cuff_left, armpit_left, armpit_right, cuff_right.
    let s_cuff_l = marker_param(template, &bbox, "cuff_left", 0);
    let s_arm_l = marker_param(template, &bbox, "armpit_left", 0);
    let s_arm_r = marker_param(template, &bbox, "armpit_right", 0);
    let s_cuff_r = marker_param(template, &bbox, "cuff_right", 0);
    let arm_l_rest = template.marker_point("armpit_left").unwrap().x;
    let arm_r_rest = template.marker_point("armpit_right").unwrap().x;
    let mid = 0.5 * (arm_l_rest + arm_r_rest);
    let x_arm_l = mid - 0.5 * chest;
    let x_arm_r = mid + 0.5 * chest;
    let xs = solve_axis_planes(
        dims.0 - 1,
        &[s_cuff_l, s_arm_l, s_arm_r, s_cuff_r],
        &[x_arm_l - left_x, x_arm_l, x_arm_r, x_arm_r + right_x],
        'x',
    )?;

    // z axis: markers hemline, armpit, shoulder, neck top; hemline anchored.
    let u_hem = marker_param(template, &bbox, "hem_left", 2);
    let u_arm = marker_param(template, &bbox, "armpit_left", 2);
    let u_sh = marker_param(template, &bbox, "shoulder_left", 2);
    let u_neck = marker_param(template, &bbox, "neck_center", 2);
    let hem_rest = template.marker_point("hem_left").unwrap().z;
    let zs = solve_axis_planes(
        dims.2 - 1,
        &[u_hem, u_arm, u_sh, u_neck],
        &[
            hem_rest,
            hem_rest + a2h,
            hem_rest + a2h + a2s,
            hem_rest + a2h + a2s + neck_gap,
        ],
        'z',
    )?;

    // y axis: depth span around the fixed midplane.
    let mid_y = 0.5 * (bbox.min.y + bbox.max.y);
    let ys = vec![mid_y - 0.5 * depth, mid_y + 0.5 * depth];

    lattice.set_displaced_planes(&xs, &ys, &zs);
    Ok(lattice)
}

/// Solves the pants lattice: every width/depth span scales by the waist
/// girth ratio, heights realize the crotch structure, and the crotch plane
/// plus the mid x/y planes stay fixed.
pub fn solve_lattice_pants(
    report: &PantsMeasurements,
    template: &TemplateAsset,
) -> Result<ControlLattice, LatticeError> {
    assert_eq!(template.garment_type, GarmentType::Pants);
    let dims = lattice_dims(GarmentType::Pants);
    let bbox = template.aabb();
    let mut lattice = ControlLattice::rest_over_box(dims, bbox);
    let c = &template.constants;

    if !(c.waist_girth > 0.0) {
        return Err(LatticeError::Infeasible(format!(
            "template waist girth must be positive, got {}",
            c.waist_girth
        )));
    }
    let scale = positive_gap("waist girth ratio", report.waist_girth / c.waist_girth)?;
    let c2b = positive_gap("crotch-to-bottom", report.crotch_to_bottom)?;
    let c2w = positive_gap("crotch-to-waist", report.crotch_to_waist)?;

    // x axis: waist markers at the box faces, crotch pinned at the midplane.
    let s_waist_l = marker_param(template, &bbox, "waist_left", 0);
    let s_crotch = marker_param(template, &bbox, "crotch", 0);
    let s_waist_r = marker_param(template, &bbox, "waist_right", 0);
    let waist_l_rest = template.marker_point("waist_left").unwrap().x;
    let waist_r_rest = template.marker_point("waist_right").unwrap().x;
    let crotch_rest = template.marker_point("crotch").unwrap();
    let mid_x = 0.5 * (waist_l_rest + waist_r_rest);
    let half_span = 0.5 * (waist_r_rest - waist_l_rest) * scale;
    let xs = solve_axis_planes(
        dims.0 - 1,
        &[s_waist_l, s_crotch, s_waist_r],
        &[mid_x - half_span, crotch_rest.x, mid_x + half_span],
        'x',
    )?;

    // z axis: bottom, crotch (anchored), waist.
    let u_bottom = marker_param(template, &bbox, "bottom_left", 2);
    let u_crotch = marker_param(template, &bbox, "crotch", 2);
    let u_waist = marker_param(template, &bbox, "waist_left", 2);
    let zs = solve_axis_planes(
        dims.2 - 1,
        &[u_bottom, u_crotch, u_waist],
        &[crotch_rest.z - c2b, crotch_rest.z, crotch_rest.z + c2w],
        'z',
    )?;

    // y axis: scaled depth around the fixed midplane.
    let depth = (bbox.max.y - bbox.min.y) * scale;
    let mid_y = 0.5 * (bbox.min.y + bbox.max.y);
    let ys = vec![mid_y - 0.5 * depth, mid_y + 0.5 * depth];

    lattice.set_displaced_planes(&xs, &ys, &zs);
    Ok(lattice)
}
