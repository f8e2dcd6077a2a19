//! Moving least squares with similarity transforms.
//!
//! Each evaluation point gets its own weighted least-squares similarity
//! (rotation + uniform scale + translation) fitted to the control pairs,
//! with weights `1 / |p_i - v|^(2*alpha)`. In 2D the similarity class is a
//! linear space (complex multiplication plus offset), so the fit is closed
//! form: with centered controls, the optimal complex factor is
//! `sum(w * q_hat * conj(p_hat)) / sum(w * |p_hat|^2)`.

use crate::geom::Pt2;

use super::TexWarpError;

/// Distance under which an evaluation point counts as coincident with a
/// control point and maps to its paired target exactly.
pub const COINCIDENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MlsWarp {
    ps: Vec<Pt2>,
    qs: Vec<Pt2>,
    alpha: f64,
}

impl MlsWarp {
    pub fn new(pairs: &[(Pt2, Pt2)], alpha: f64) -> Result<Self, TexWarpError> {
        if pairs.len() < 2 {
            return Err(TexWarpError::TooFewPairs(pairs.len()));
        }
        for (i, (p, _)) in pairs.iter().enumerate() {
            for (q, _) in pairs.iter().skip(i + 1) {
                if p.distance(*q) < COINCIDENT_EPS {
                    return Err(TexWarpError::DuplicateControlPoints);
                }
            }
        }
        Ok(Self {
            ps: pairs.iter().map(|(p, _)| *p).collect(),
            qs: pairs.iter().map(|(_, q)| *q).collect(),
            alpha,
        })
    }

    /// Evaluates the warp at `v`.
    pub fn map(&self, v: Pt2) -> Pt2 {
        let n = self.ps.len();
        let mut weights = Vec::with_capacity(n);
        for (i, p) in self.ps.iter().enumerate() {
            let d2 = p.distance_sq(v);
            if d2 < COINCIDENT_EPS * COINCIDENT_EPS {
                return self.qs[i];
            }
            weights.push(1.0 / d2.powf(self.alpha));
        }
        let w_sum: f64 = weights.iter().sum();

        let mut p_star = Pt2::new(0.0, 0.0);
        let mut q_star = Pt2::new(0.0, 0.0);
        for ((w, p), q) in weights.iter().zip(&self.ps).zip(&self.qs) {
            p_star = p_star + *p * *w;
            q_star = q_star + *q * *w;
        }
        p_star = p_star * (1.0 / w_sum);
        q_star = q_star * (1.0 / w_sum);

        // Complex least squares for the similarity factor.
        let mut num_re = 0.0;
        let mut num_im = 0.0;
        let mut mu = 0.0;
        for ((w, p), q) in weights.iter().zip(&self.ps).zip(&self.qs) {
            let ph = *p - p_star;
            let qh = *q - q_star;
            num_re += w * (qh.x * ph.x + qh.y * ph.y);
            num_im += w * (qh.y * ph.x - qh.x * ph.y);
            mu += w * (ph.x * ph.x + ph.y * ph.y);
        }
        let c_re = num_re / mu;
        let c_im = num_im / mu;
        let d = v - p_star;
        Pt2::new(
            q_star.x + c_re * d.x - c_im * d.y,
            q_star.y + c_im * d.x + c_re * d.y,
        )
    }
}

/// One-shot evaluation, the per-point entry the texwarp pipeline composes.
pub fn mls_similarity_map(
    v: Pt2,
    pairs: &[(Pt2, Pt2)],
    alpha: f64,
) -> Result<Pt2, TexWarpError> {
    Ok(MlsWarp::new(pairs, alpha)?.map(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::solve_dense;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_pairs(rng: &mut StdRng, n: usize) -> Vec<(Pt2, Pt2)> {
        (0..n)
            .map(|_| {
                (
                    Pt2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
                    Pt2::new(rng.gen_range(-5.0..15.0), rng.gen_range(-5.0..15.0)),
                )
            })
            .collect()
    }

    /// Independent oracle: minimize the weighted least-squares objective over
    /// the 4-parameter similarity (a, b, tx, ty) by normal equations.
    fn brute_force_similarity(v: Pt2, pairs: &[(Pt2, Pt2)], alpha: f64) -> Pt2 {
        let mut a = vec![vec![0.0; 4]; 4];
        let mut rhs = vec![0.0; 4];
        for (p, q) in pairs {
            let w = 1.0 / p.distance_sq(v).powf(alpha);
            // rows of the residual Jacobian for (a, b, tx, ty):
            // rx = a*px - b*py + tx - qx
            // ry = b*px + a*py + ty - qy
            let jx = [p.x, -p.y, 1.0, 0.0];
            let jy = [p.y, p.x, 0.0, 1.0];
            for i in 0..4 {
                for j in 0..4 {
                    a[i][j] += w * (jx[i] * jx[j] + jy[i] * jy[j]);
                }
                rhs[i] += w * (jx[i] * q.x + jy[i] * q.y);
            }
        }
        let sol = solve_dense(a, rhs).unwrap();
        let (sa, sb, tx, ty) = (sol[0], sol[1], sol[2], sol[3]);
        Pt2::new(sa * v.x - sb * v.y + tx, sb * v.x + sa * v.y + ty)
    }

    #[test]
    fn interpolates_control_points_exactly() {
        let mut rng = StdRng::seed_from_u64(5);
        let pairs = random_pairs(&mut rng, 12);
        let warp = MlsWarp::new(&pairs, 1.0).unwrap();
        for (p, q) in &pairs {
            let out = warp.map(*p);
            assert!(out.distance(*q) < 1e-9);
        }
    }

    #[test]
    fn identity_configuration_is_identity() {
        let mut rng = StdRng::seed_from_u64(6);
        let ps: Vec<Pt2> = (0..20)
            .map(|_| Pt2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
            .collect();
        let pairs: Vec<(Pt2, Pt2)> = ps.iter().map(|p| (*p, *p)).collect();
        let warp = MlsWarp::new(&pairs, 1.0).unwrap();
        for _ in 0..1000 {
            let v = Pt2::new(rng.gen_range(-2.0..12.0), rng.gen_range(-2.0..12.0));
            assert!(warp.map(v).distance(v) < 1e-9);
        }
    }

    #[test]
    fn reproduces_translation() {
        let mut rng = StdRng::seed_from_u64(7);
        let delta = Pt2::new(3.0, -2.0);
        let ps: Vec<Pt2> = (0..15)
            .map(|_| Pt2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
            .collect();
        let pairs: Vec<(Pt2, Pt2)> = ps.iter().map(|p| (*p, *p + delta)).collect();
        let warp = MlsWarp::new(&pairs, 1.0).unwrap();
        for _ in 0..200 {
            let v = Pt2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            assert!(warp.map(v).distance(v + delta) < 1e-7);
        }
    }

    #[test]
    fn reproduces_rotation_scale() {
        let mut rng = StdRng::seed_from_u64(8);
        // q = 2 * R(90 deg) * p
        let sim = |p: Pt2| Pt2::new(-2.0 * p.y, 2.0 * p.x);
        let ps: Vec<Pt2> = (0..15)
            .map(|_| Pt2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
            .collect();
        let pairs: Vec<(Pt2, Pt2)> = ps.iter().map(|p| (*p, sim(*p))).collect();
        let warp = MlsWarp::new(&pairs, 1.0).unwrap();
        for _ in 0..200 {
            let v = Pt2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            let expected = sim(v);
            let got = warp.map(v);
            assert!(
                got.distance(expected) < 1e-7,
                "{got:?} vs {expected:?}"
            );
            // Cross-check against the brute-force weighted LSQ oracle.
            let oracle = brute_force_similarity(v, &pairs, 1.0);
            assert!(got.distance(oracle) < 1e-6);
        }
    }

    #[test]
    fn matches_brute_force_on_general_pairs() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..10 {
            let pairs = random_pairs(&mut rng, 10);
            let warp = MlsWarp::new(&pairs, 1.0).unwrap();
            for _ in 0..50 {
                let v = Pt2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
                if pairs.iter().any(|(p, _)| p.distance(v) < 1e-3) {
                    continue;
                }
                let got = warp.map(v);
                let oracle = brute_force_similarity(v, &pairs, 1.0);
                assert!(got.distance(oracle) < 1e-6, "{got:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn rejects_underdetermined_input() {
        let one = [(Pt2::new(0.0, 0.0), Pt2::new(1.0, 1.0))];
        assert!(matches!(
            MlsWarp::new(&one, 1.0),
            Err(TexWarpError::TooFewPairs(1))
        ));
        let dup = [
            (Pt2::new(0.0, 0.0), Pt2::new(1.0, 1.0)),
            (Pt2::new(0.0, 0.0), Pt2::new(2.0, 2.0)),
        ];
        assert!(matches!(
            MlsWarp::new(&dup, 1.0),
            Err(TexWarpError::DuplicateControlPoints)
        ));
    }
}
