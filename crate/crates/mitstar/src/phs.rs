//! Prolate hyperspheroid geometry.
//!
//! A prolate hyperspheroid (PHS) is the set of points whose summed distance
//! to two foci stays below a transverse diameter `s_diam`. Both the informed
//! set (diameter = current solution cost) and the estimated informed set
//! (diameter = estimated cost) are PHS instances, so construction, membership,
//! measure, and the unit-ball transform live here.

use crate::space::StateVec;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhsError {
    #[error("foci coincide; the transverse axis is undefined")]
    DegenerateFoci,
    #[error("transverse diameter {s_diam} does not exceed the focal distance {s_min}")]
    InfeasibleDiameter { s_diam: f64, s_min: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// An axis-aligned-in-its-own-frame ellipsoid with one long (transverse)
/// axis through the foci and equal shorter axes.
#[derive(Clone, Debug)]
pub struct ProlateHyperspheroid {
    pub focus_a: StateVec,
    pub focus_b: StateVec,
    /// Focal separation, the minimum possible focal-distance sum.
    pub s_min: f64,
    /// Transverse diameter; strictly greater than `s_min`.
    pub s_diam: f64,
    pub center: StateVec,
    /// World-from-ellipsoid rotation; column 0 points from `focus_a` toward
    /// `focus_b`, determinant +1.
    pub rotation: DMatrix<f64>,
    /// Semi-axis lengths: `s_diam / 2` transverse, then
    /// `sqrt(s_diam^2 - s_min^2) / 2` on every conjugate axis.
    pub axis_lengths: Vec<f64>,
}

/// Builds the PHS with the given foci and transverse diameter.
///
/// The rotation comes from the rank-1 decomposition of the outer product
/// `k1 e1^T` where `k1` is the unit transverse direction: its left factor is
/// `k1` completed to an orthonormal basis over the standard basis vectors,
/// with the final column flipped if needed so the determinant is +1. This
/// closed form is deterministic across platforms, unlike general SVD sign
/// conventions.
pub fn build_phs(
    focus_a: &StateVec,
    focus_b: &StateVec,
    s_diam: f64,
) -> Result<ProlateHyperspheroid, PhsError> {
    let n = focus_a.dim();
    if focus_b.dim() != n {
        return Err(PhsError::DimensionMismatch {
            expected: n,
            got: focus_b.dim(),
        });
    }
    let s_min = focus_a.distance(focus_b);
    if s_min == 0.0 {
        return Err(PhsError::DegenerateFoci);
    }
    if !(s_diam > s_min) {
        return Err(PhsError::InfeasibleDiameter { s_diam, s_min });
    }

    let center = focus_a.lerp(focus_b, 0.5);
    let k1 = DVector::from_iterator(
        n,
        focus_a
            .coords()
            .iter()
            .zip(focus_b.coords())
            .map(|(a, b)| (b - a) / s_min),
    );
    let rotation = rotation_from_transverse_axis(&k1);

    let conjugate = (s_diam * s_diam - s_min * s_min).sqrt() / 2.0;
    let mut axis_lengths = vec![conjugate; n];
    axis_lengths[0] = s_diam / 2.0;

    Ok(ProlateHyperspheroid {
        focus_a: focus_a.clone(),
        focus_b: focus_b.clone(),
        s_min,
        s_diam,
        center,
        rotation,
        axis_lengths,
    })
}

/// Orthonormal matrix with determinant +1 whose first column is the unit
/// vector `k1`. Remaining columns come from modified Gram-Schmidt over the
/// standard basis; near-dependent candidates are skipped.
fn rotation_from_transverse_axis(k1: &DVector<f64>) -> DMatrix<f64> {
    let n = k1.len();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    cols.push(k1.clone());
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 1e-9 {
            cols.push(v / norm);
        }
    }
    debug_assert_eq!(cols.len(), n, "Gram-Schmidt failed to complete a basis");
    let mut r = DMatrix::from_columns(&cols);
    if r.determinant() < 0.0 {
        // Flipping one non-transverse column restores a proper rotation.
        let last = n - 1;
        for row in 0..n {
            r[(row, last)] = -r[(row, last)];
        }
    }
    r
}

impl ProlateHyperspheroid {
    pub fn dim(&self) -> usize {
        self.focus_a.dim()
    }

    /// Maps a point of the closed unit ball into the PHS:
    /// `R * diag(axis_lengths) * x_ball + center`.
    pub fn transform_ball_point(&self, x_ball: &StateVec) -> StateVec {
        debug_assert_eq!(x_ball.dim(), self.dim(), "dimension mismatch");
        let scaled = DVector::from_iterator(
            self.dim(),
            x_ball
                .coords()
                .iter()
                .zip(&self.axis_lengths)
                .map(|(c, l)| c * l),
        );
        let rotated = &self.rotation * scaled;
        StateVec(
            rotated
                .iter()
                .zip(self.center.coords())
                .map(|(r, c)| r + c)
                .collect(),
        )
    }

    /// Sum of distances from `x` to the two foci.
    pub fn focal_distance_sum(&self, x: &StateVec) -> f64 {
        x.distance(&self.focus_a) + x.distance(&self.focus_b)
    }

    /// Strict membership: the focal-distance sum must be below `s_diam`.
    /// Boundary points are outside.
    pub fn contains(&self, x: &StateVec) -> Result<bool, PhsError> {
        if x.dim() != self.dim() {
            return Err(PhsError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(self.focal_distance_sum(x) < self.s_diam)
    }

    /// Lebesgue measure: unit-ball volume times the product of semi-axes.
    pub fn measure(&self) -> f64 {
        unit_ball_measure(self.dim()) * self.axis_lengths.iter().product::<f64>()
    }
}

/// Volume of the unit n-ball via the recurrence `zeta_n = (2 pi / n) zeta_{n-2}`
/// with `zeta_0 = 1`, `zeta_1 = 2`.
pub fn unit_ball_measure(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => (2.0 * PI / n as f64) * unit_ball_measure(n - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sv(coords: &[f64]) -> StateVec {
        StateVec(coords.to_vec())
    }

    #[test]
    fn aligned_foci_give_identity_rotation() {
        let phs = build_phs(&sv(&[0.0, 0.0]), &sv(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(phs.center, sv(&[0.5, 0.0]));
        let expected = DMatrix::<f64>::identity(2, 2);
        assert!((phs.rotation.clone() - expected).norm() < 1e-12);
        assert!((phs.axis_lengths[0] - 1.0).abs() < 1e-12);
        assert!((phs.axis_lengths[1] - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_foci_rotate_e1_upward_with_positive_determinant() {
        let phs = build_phs(&sv(&[0.0, 0.0]), &sv(&[0.0, 1.0]), 2.0).unwrap();
        let e1_image = &phs.rotation * DVector::from_vec(vec![1.0, 0.0]);
        assert!((e1_image[0] - 0.0).abs() < 1e-12);
        assert!((e1_image[1] - 1.0).abs() < 1e-12);
        assert!((phs.rotation.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fg_foci_axis_lengths() {
        let phs = build_phs(&sv(&[0.3, 0.5]), &sv(&[0.7, 0.5]), 0.5).unwrap();
        assert!((phs.s_min - 0.4).abs() < 1e-15);
        assert!((phs.axis_lengths[0] - 0.25).abs() < 1e-15);
        assert!((phs.axis_lengths[1] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        let a = sv(&[0.2, 0.2]);
        assert!(matches!(
            build_phs(&a, &a, 1.0),
            Err(PhsError::DegenerateFoci)
        ));
        assert!(matches!(
            build_phs(&a, &sv(&[0.8, 0.2]), 0.6),
            Err(PhsError::InfeasibleDiameter { .. })
        ));
        assert!(matches!(
            build_phs(&a, &sv(&[0.8, 0.2, 0.0]), 2.0),
            Err(PhsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transform_maps_origin_to_center_and_e1_to_apex() {
        let phs = build_phs(&sv(&[0.0, 0.0]), &sv(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(phs.transform_ball_point(&sv(&[0.0, 0.0])), phs.center);
        let apex = phs.transform_ball_point(&sv(&[1.0, 0.0]));
        assert!((apex.coords()[0] - 1.5).abs() < 1e-12);
        assert!(apex.coords()[1].abs() < 1e-12);
        assert!((phs.focal_distance_sum(&apex) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn membership_is_strict() {
        let phs = build_phs(&sv(&[0.0, 0.0]), &sv(&[1.0, 0.0]), 2.0).unwrap();
        assert!(phs.contains(&phs.center.clone()).unwrap());
        assert!(phs.contains(&sv(&[0.0, 0.0])).unwrap());
        // Apex sits exactly on the boundary.
        assert!(!phs.contains(&sv(&[1.5, 0.0])).unwrap());
        assert!(matches!(
            phs.contains(&sv(&[0.0, 0.0, 0.0])),
            Err(PhsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rotation_is_orthonormal_with_unit_determinant_across_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[2usize, 4, 8, 16] {
            for _ in 0..2500 {
                let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let fa = sv(&a);
                let fb = sv(&b);
                let s_min = fa.distance(&fb);
                if s_min < 1e-6 {
                    continue;
                }
                let phs = build_phs(&fa, &fb, s_min * 1.5).unwrap();
                let r = &phs.rotation;
                let gram = r.transpose() * r;
                let identity = DMatrix::<f64>::identity(n, n);
                assert!((gram - identity).abs().max() < 1e-9);
                assert!((r.determinant() - 1.0).abs() < 1e-9);
                // Column 0 is the unit transverse direction.
                let mut dot = 0.0;
                for i in 0..n {
                    dot += r[(i, 0)] * (b[i] - a[i]) / s_min;
                }
                assert!((dot - 1.0).abs() < 1e-9);
                assert!(phs.axis_lengths[1..]
                    .iter()
                    .all(|l| *l <= phs.axis_lengths[0]));
            }
        }
    }

    #[test]
    fn transformed_ball_points_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &n in &[2usize, 4, 8] {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fa = sv(&a);
            let fb = sv(&b);
            if fa.distance(&fb) < 1e-6 {
                continue;
            }
            let phs = build_phs(&fa, &fb, fa.distance(&fb) * 1.3).unwrap();
            for _ in 0..2000 {
                let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm == 0.0 {
                    continue;
                }
                let radius: f64 = rng.gen_range(0.0..1.0f64);
                let scale = radius.powf(1.0 / n as f64) / norm;
                let ball = StateVec(dir.iter().map(|c| c * scale).collect());
                let x = phs.transform_ball_point(&ball);
                assert!(phs.focal_distance_sum(&x) <= phs.s_diam + 1e-9);
            }
        }
    }

    #[test]
    fn measure_closed_forms() {
        let ellipse = ProlateHyperspheroid {
            focus_a: sv(&[0.0, 0.0]),
            focus_b: sv(&[1.0, 0.0]),
            s_min: 1.0,
            s_diam: 2.0,
            center: sv(&[0.5, 0.0]),
            rotation: DMatrix::identity(2, 2),
            axis_lengths: vec![1.0, 0.5],
        };
        assert!((ellipse.measure() - PI * 0.5).abs() < 1e-12);

        assert!((unit_ball_measure(0) - 1.0).abs() < 1e-15);
        assert!((unit_ball_measure(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_measure(2) - PI).abs() < 1e-12);
        assert!((unit_ball_measure(3) - 4.0 * PI / 3.0).abs() < 1e-12);

        // Hand-derived: pi * 0.25 * 0.15 = pi * 3/80.
        let phs = build_phs(&sv(&[0.3, 0.5]), &sv(&[0.7, 0.5]), 0.5).unwrap();
        assert!((phs.measure() - 0.117_809_724_509_617_24).abs() < 1e-12);
        assert!((phs.measure() - 0.11781).abs() < 1e-5);
    }

    #[test]
    fn measure_shrinks_toward_zero_as_diameter_approaches_s_min() {
        let a = sv(&[0.3, 0.5]);
        let b = sv(&[0.7, 0.5]);
        let s_min = 0.4;
        let mut last = f64::INFINITY;
        for step in 1..=7 {
            let s_diam = s_min * (1.0 + 10f64.powi(-step));
            let m = build_phs(&a, &b, s_diam).unwrap().measure();
            assert!(m < last, "measure must shrink with the diameter");
            last = m;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn transform_matches_rejection_sampling_acceptance() {
        // Compare the fraction of points landing in a fixed sub-box under
        // (a) the ball transform and (b) rejection sampling from the
        // bounding box. Both target the same uniform law on the ellipse.
        let phs = build_phs(&sv(&[0.3, 0.5]), &sv(&[0.7, 0.5]), 0.5).unwrap();
        let n_draws = 100_000usize;
        let sub = |x: &StateVec| x.coords()[0] < 0.5 && x.coords()[1] < 0.55;

        // Disk-uniform ball points by rejection from the square.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut transform_hits = 0usize;
        let mut drawn = 0usize;
        while drawn < n_draws {
            let x = rng.gen_range(-1.0..1.0f64);
            let y = rng.gen_range(-1.0..1.0f64);
            if x * x + y * y > 1.0 {
                continue;
            }
            drawn += 1;
            if sub(&phs.transform_ball_point(&sv(&[x, y]))) {
                transform_hits += 1;
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut rejection_hits = 0usize;
        let mut accepted = 0usize;
        while accepted < n_draws {
            let x = sv(&[rng.gen_range(0.25..0.75), rng.gen_range(0.35..0.65)]);
            if phs.focal_distance_sum(&x) < phs.s_diam {
                accepted += 1;
                if sub(&x) {
                    rejection_hits += 1;
                }
            }
        }

        let p1 = transform_hits as f64 / n_draws as f64;
        let p2 = rejection_hits as f64 / n_draws as f64;
        let pooled = (transform_hits + rejection_hits) as f64 / (2.0 * n_draws as f64);
        let sigma = (pooled * (1.0 - pooled) * 2.0 / n_draws as f64).sqrt();
        assert!(
            (p1 - p2).abs() < 3.0 * sigma,
            "acceptance fractions diverge: {p1} vs {p2} (3 sigma = {})",
            3.0 * sigma
        );
    }
}
