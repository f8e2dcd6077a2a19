//! Small geometric primitives shared across the crate.

use serde::{Deserialize, Serialize};

/// A 2D point. Used both for image pixels (y down) and layout coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pt2 {
    pub x: f64,
    pub y: f64,
}

impl Pt2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(self, other: Self) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        Self::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl std::ops::Add for Pt2 {
    type Output = Pt2;
    fn add(self, rhs: Pt2) -> Pt2 {
        Pt2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Pt2 {
    type Output = Pt2;
    fn sub(self, rhs: Pt2) -> Pt2 {
        Pt2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Pt2 {
    type Output = Pt2;
    fn mul(self, s: f64) -> Pt2 {
        Pt2::new(self.x * s, self.y * s)
    }
}

/// A 3D point in the garment frame (x right, y depth, z up, meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pt3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Pt3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(self, other: Self) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

impl std::ops::Add for Pt3 {
    type Output = Pt3;
    fn add(self, rhs: Pt3) -> Pt3 {
        Pt3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Pt3 {
    type Output = Pt3;
    fn sub(self, rhs: Pt3) -> Pt3 {
        Pt3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Mul<f64> for Pt3 {
    type Output = Pt3;
    fn mul(self, s: f64) -> Pt3 {
        Pt3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Axis-aligned bounding box in 3D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Pt3,
    pub max: Pt3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Pt3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut min = first;
        let mut max = first;
        for p in it {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            min.z = min.z.min(p.z);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
            max.z = max.z.max(p.z);
        }
        Some(Self { min, max })
    }

    pub fn size(&self) -> Pt3 {
        self.max - self.min
    }
}

/// Signed area of a polygon by the shoelace formula, in the raw coordinate
/// frame (no axis flipping). Positive for counter-clockwise order when the
/// coordinates are read as a standard xy plane.
pub fn polygon_signed_area(pts: &[Pt2]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Point-in-polygon test by ray crossing; points on the boundary count as
/// inside (within `eps`).
pub fn point_in_polygon(p: Pt2, poly: &[Pt2], eps: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        if point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= eps {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from a point to a segment, and the parameter of the closest point.
pub fn project_on_segment(p: Pt2, a: Pt2, b: Pt2) -> (f64, f64) {
    let ab = b - a;
    let len_sq = ab.x * ab.x + ab.y * ab.y;
    let t = if len_sq <= 0.0 {
        0.0
    } else {
        (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len_sq).clamp(0.0, 1.0)
    };
    let q = a.lerp(b, t);
    (p.distance(q), t)
}

pub fn point_segment_distance(p: Pt2, a: Pt2, b: Pt2) -> f64 {
    project_on_segment(p, a, b).0
}

/// Minimum distance between two polygons (vertex-to-edge both ways).
/// Assumes the polygons do not intersect.
pub fn polygon_distance(a: &[Pt2], b: &[Pt2]) -> f64 {
    let mut best = f64::INFINITY;
    let na = a.len();
    let nb = b.len();
    for &p in a {
        for j in 0..nb {
            best = best.min(point_segment_distance(p, b[j], b[(j + 1) % nb]));
        }
    }
    for &p in b {
        for i in 0..na {
            best = best.min(point_segment_distance(p, a[i], a[(i + 1) % na]));
        }
    }
    best
}

/// Solve a small dense linear system `A x = rhs` by Gaussian elimination with
/// partial pivoting. `a` is row-major n×n. Returns None for singular systems.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_area_square() {
        let sq = [
            Pt2::new(0.0, 0.0),
            Pt2::new(2.0, 0.0),
            Pt2::new(2.0, 2.0),
            Pt2::new(0.0, 2.0),
        ];
        assert_eq!(polygon_signed_area(&sq), 4.0);
        let mut rev = sq;
        rev.reverse();
        assert_eq!(polygon_signed_area(&rev), -4.0);
    }

    #[test]
    fn point_in_polygon_basics() {
        let sq = [
            Pt2::new(0.0, 0.0),
            Pt2::new(2.0, 0.0),
            Pt2::new(2.0, 2.0),
            Pt2::new(0.0, 2.0),
        ];
        assert!(point_in_polygon(Pt2::new(1.0, 1.0), &sq, 1e-9));
        assert!(point_in_polygon(Pt2::new(0.0, 1.0), &sq, 1e-9));
        assert!(!point_in_polygon(Pt2::new(2.5, 1.0), &sq, 1e-9));
    }

    #[test]
    fn solve_dense_small() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_dense(a, vec![5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }
}
