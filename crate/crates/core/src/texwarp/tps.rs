//! Thin-plate-spline warp, the alternative to MLS behind `--warp tps`.
//!
//! Standard TPS interpolation: radial kernel `U(r) = r^2 ln(r)` plus an
//! affine part, coefficients from the (n+3) x (n+3) system with the side
//! conditions that the radial weights have zero sum and zero first moments.

use crate::geom::{solve_dense, Pt2};

use super::TexWarpError;

#[derive(Debug, Clone)]
pub struct TpsWarp {
    controls: Vec<Pt2>,
    /// Per output coordinate: n radial weights followed by (a0, ax, ay).
    coeffs_x: Vec<f64>,
    coeffs_y: Vec<f64>,
}

fn kernel(r_sq: f64) -> f64 {
    if r_sq <= 0.0 {
        0.0
    } else {
        0.5 * r_sq * r_sq.ln()
    }
}

impl TpsWarp {
    pub fn new(pairs: &[(Pt2, Pt2)]) -> Result<Self, TexWarpError> {
        let n = pairs.len();
        if n < 3 {
            return Err(TexWarpError::TooFewPairs(n));
        }
        for (i, (p, _)) in pairs.iter().enumerate() {
            for (q, _) in pairs.iter().skip(i + 1) {
                if p.distance(*q) < 1e-9 {
                    return Err(TexWarpError::DuplicateControlPoints);
                }
            }
        }
        let dim = n + 3;
        let mut a = vec![vec![0.0; dim]; dim];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = kernel(pairs[i].0.distance_sq(pairs[j].0));
            }
            a[i][n] = 1.0;
            a[i][n + 1] = pairs[i].0.x;
            a[i][n + 2] = pairs[i].0.y;
            a[n][i] = 1.0;
            a[n + 1][i] = pairs[i].0.x;
            a[n + 2][i] = pairs[i].0.y;
        }
        let mut rhs_x = vec![0.0; dim];
        let mut rhs_y = vec![0.0; dim];
        for (i, (_, q)) in pairs.iter().enumerate() {
            rhs_x[i] = q.x;
            rhs_y[i] = q.y;
        }
        let coeffs_x =
            solve_dense(a.clone(), rhs_x).ok_or(TexWarpError::DegenerateConfiguration)?;
        let coeffs_y = solve_dense(a, rhs_y).ok_or(TexWarpError::DegenerateConfiguration)?;
        Ok(Self {
            controls: pairs.iter().map(|(p, _)| *p).collect(),
            coeffs_x,
            coeffs_y,
        })
    }

    pub fn map(&self, v: Pt2) -> Pt2 {
        let n = self.controls.len();
        let mut x = self.coeffs_x[n] + self.coeffs_x[n + 1] * v.x + self.coeffs_x[n + 2] * v.y;
        let mut y = self.coeffs_y[n] + self.coeffs_y[n + 1] * v.x + self.coeffs_y[n + 2] * v.y;
        for (i, c) in self.controls.iter().enumerate() {
            let k = kernel(c.distance_sq(v));
            x += self.coeffs_x[i] * k;
            y += self.coeffs_y[i] * k;
        }
        Pt2::new(x, y)
    }
}
