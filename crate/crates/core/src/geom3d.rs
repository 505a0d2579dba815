//! Rigid-body geometry: Kabsch superposition, RMSD, dihedral measurement
//! and rotation about a bond axis.
//!
//! Angles are radians everywhere inside the crate; degrees appear only at
//! I/O boundaries.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::molgraph::Vec3;

/// Proper rigid motion `x ↦ R·x + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl RigidTransform {
    /// Validates orthonormality and `det = +1` to 1e-9.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<RigidTransform> {
        let gram = rotation.transpose() * rotation;
        let err = (gram - Matrix3::identity()).norm();
        if err > 1e-9 {
            return Err(Error::Geometry(format!(
                "rotation is not orthonormal (|RᵀR - I| = {err:.2e})"
            )));
        }
        if (rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::Geometry("rotation is not proper (det ≠ +1)".into()));
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    pub fn identity() -> RigidTransform {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_all(&self, points: &[Vec3]) -> Vec<Vec3> {
        points.iter().map(|&p| self.apply(p)).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Rotation by `angle` about the axis through `origin` along `axis`.
    pub fn about_axis(origin: Vec3, axis: Vec3, angle: f64) -> Result<RigidTransform> {
        let norm = axis.norm();
        if norm < 1e-12 {
            return Err(Error::Geometry("rotation axis has zero length".into()));
        }
        let rotation = rodrigues(axis / norm, angle);
        let translation = origin - rotation * origin;
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    /// Minimal rotation mapping unit direction `from` onto unit `to`.
    pub fn rotation_between(from: Vec3, to: Vec3) -> Result<Matrix3<f64>> {
        let f = normalize(from)?;
        let t = normalize(to)?;
        let cross = f.cross(&t);
        let dot = f.dot(&t);
        if cross.norm() < 1e-12 {
            if dot > 0.0 {
                return Ok(Matrix3::identity());
            }
            // Antiparallel: rotate π about any stable perpendicular.
            let perp = stable_perpendicular(f);
            return Ok(rodrigues(perp, std::f64::consts::PI));
        }
        let angle = cross.norm().atan2(dot);
        Ok(rodrigues(cross / cross.norm(), angle))
    }
}

fn rodrigues(axis: Vec3, angle: f64) -> Matrix3<f64> {
    let (sin, cos) = angle.sin_cos();
    let k = Matrix3::new(
        0.0, -axis.z, axis.y, //
        axis.z, 0.0, -axis.x, //
        -axis.y, axis.x, 0.0,
    );
    Matrix3::identity() + k * sin + k * k * (1.0 - cos)
}

fn normalize(v: Vec3) -> Result<Vec3> {
    let n = v.norm();
    if n < 1e-12 {
        return Err(Error::Geometry("zero-length direction".into()));
    }
    Ok(v / n)
}

fn stable_perpendicular(v: Vec3) -> Vec3 {
    let trial = if v.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let perp = v.cross(&trial);
    perp / perp.norm()
}

fn centroid(points: &[Vec3]) -> Vec3 {
    let mut sum = Vec3::zeros();
    for p in points {
        sum += p;
    }
    sum / points.len() as f64
}

fn collinear(points: &[Vec3]) -> bool {
    let c = centroid(points);
    let mut dir = Vec3::zeros();
    for p in points {
        let d = p - c;
        if d.norm() > 1e-9 {
            dir = d / d.norm();
            break;
        }
    }
    if dir.norm() == 0.0 {
        return true; // all coincident
    }
    points.iter().all(|p| (p - c).cross(&dir).norm() < 1e-9)
}

/// Optimal rotation for the centered cross-covariance, with the
/// determinant sign corrected to keep the rotation proper.
fn optimal_rotation(p_centered: &[Vec3], q_centered: &[Vec3]) -> Matrix3<f64> {
    let mut cov = Matrix3::zeros();
    for (p, q) in p_centered.iter().zip(q_centered) {
        cov += q * p.transpose();
    }
    let svd = nalgebra::SVD::new(cov, true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let d = (u.determinant() * v_t.determinant()).signum();
    let correction = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d));
    u * correction * v_t
}

/// Least-squares superposition of `p` onto `q` over proper rotations.
///
/// Returns the transform applied to `p` together with the residual RMSD.
pub fn kabsch(p: &[Vec3], q: &[Vec3]) -> Result<(RigidTransform, f64)> {
    if p.len() != q.len() {
        return Err(Error::Geometry(format!(
            "point set sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if p.len() < 3 {
        return Err(Error::Geometry("kabsch needs at least 3 points".into()));
    }
    if collinear(p) || collinear(q) {
        return Err(Error::Geometry(
            "kabsch input is collinear; rotation is underdetermined".into(),
        ));
    }
    let (pc, qc) = (centroid(p), centroid(q));
    let p_centered: Vec<Vec3> = p.iter().map(|x| x - pc).collect();
    let q_centered: Vec<Vec3> = q.iter().map(|x| x - qc).collect();
    let rotation = optimal_rotation(&p_centered, &q_centered);
    let translation = qc - rotation * pc;
    let transform = RigidTransform {
        rotation,
        translation,
    };
    let value = rmsd_raw(&transform.apply_all(p), q);
    Ok((transform, value))
}

fn rmsd_raw(p: &[Vec3], q: &[Vec3]) -> f64 {
    let sum: f64 = p.iter().zip(q).map(|(a, b)| (a - b).norm_squared()).sum();
    (sum / p.len() as f64).sqrt()
}

/// Root-mean-square deviation, optionally after optimal superposition.
pub fn rmsd(p: &[Vec3], q: &[Vec3], superpose: bool) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Geometry(format!(
            "point set sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::Geometry("empty point set".into()));
    }
    if !superpose {
        return Ok(rmsd_raw(p, q));
    }
    // Degenerate (small or collinear) sets skip the strict kabsch
    // preconditions: the SVD formula still yields an optimal rotation.
    let (pc, qc) = (centroid(p), centroid(q));
    let p_centered: Vec<Vec3> = p.iter().map(|x| x - pc).collect();
    let q_centered: Vec<Vec3> = q.iter().map(|x| x - qc).collect();
    let rotation = optimal_rotation(&p_centered, &q_centered);
    let moved: Vec<Vec3> = p_centered.iter().map(|x| rotation * x).collect();
    Ok(rmsd_raw(&moved, &q_centered))
}

/// Signed torsion about `p2`-`p3` in `(-π, π]`, IUPAC convention
/// (cis = 0, trans = π).
pub fn dihedral(p1: Vec3, p2: Vec3, p3: Vec3, p4: Vec3) -> Result<f64> {
    let b1 = p2 - p1;
    let b2 = p3 - p2;
    let b3 = p4 - p3;
    if b2.norm() < 1e-12 {
        return Err(Error::Geometry("dihedral axis has zero length".into()));
    }
    let n1 = b1.cross(&b2);
    let n2 = b2.cross(&b3);
    if n1.norm() < 1e-12 || n2.norm() < 1e-12 {
        return Err(Error::Geometry(
            "dihedral undefined: flank collinear with axis".into(),
        ));
    }
    let b2n = b2 / b2.norm();
    let angle = n1.cross(&n2).dot(&b2n).atan2(n1.dot(&n2));
    // atan2 returns [-π, π]; fold -π onto +π.
    if angle <= -std::f64::consts::PI {
        Ok(std::f64::consts::PI)
    } else {
        Ok(angle)
    }
}

/// Rotate the atoms in `moving` about the `a`→`b` axis by `angle`
/// (right-handed). Everything else stays put.
pub fn rotate_about_bond(
    coords: &[Vec3],
    moving: &[usize],
    axis: (usize, usize),
    angle: f64,
) -> Result<Vec<Vec3>> {
    let (a, b) = axis;
    if a == b {
        return Err(Error::Geometry("bond axis endpoints coincide".into()));
    }
    if moving.contains(&a) || moving.contains(&b) {
        return Err(Error::Geometry(
            "axis endpoints may not be in the moving set".into(),
        ));
    }
    let transform = RigidTransform::about_axis(coords[a], coords[b] - coords[a], angle)?;
    let mut out = coords.to_vec();
    for &i in moving {
        out[i] = transform.apply(coords[i]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn triad() -> Vec<Vec3> {
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.5, 0.0, 0.0),
            Vec3::new(0.3, 1.2, 0.4),
        ]
    }

    #[test]
    fn identity_on_equal_sets() {
        let p = triad();
        let (t, value) = kabsch(&p, &p).unwrap();
        assert_relative_eq!(t.rotation, Matrix3::identity(), epsilon = 1e-12);
        assert!(t.translation.norm() < 1e-12);
        assert!(value < 1e-12);
    }

    #[test]
    fn recovers_constructed_transform() {
        let p = triad();
        let rot = RigidTransform::about_axis(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2)
            .unwrap();
        let q: Vec<Vec3> = p
            .iter()
            .map(|&x| rot.apply(x) + Vec3::new(1.0, 2.0, 3.0))
            .collect();
        let (t, value) = kabsch(&p, &q).unwrap();
        assert!(value < 1e-9);
        let mapped = t.apply_all(&p);
        for (m, expect) in mapped.iter().zip(&q) {
            assert!((m - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn mirror_image_keeps_positive_rmsd() {
        // A chiral (non-planar) point set and its reflection: no proper
        // rotation superposes them exactly. Planar sets are achiral, so
        // the probe needs a fourth out-of-plane point.
        let p = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.4, 1.1, 0.0),
            Vec3::new(0.3, 0.2, 0.9),
        ];
        let q: Vec<Vec3> = p.iter().map(|v| Vec3::new(-v.x, v.y, v.z)).collect();
        let (_, value) = kabsch(&p, &q).unwrap();
        assert!(value > 0.05, "reflection must not be reachable: {value}");
    }

    #[test]
    fn collinear_rejected() {
        let p: Vec<Vec3> = (0..4).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(kabsch(&p, &p).is_err());
    }

    #[test]
    fn rmsd_hand_case() {
        // Two points at distance 2 vs a coincident pair: deviations 0 and 2,
        // so rmsd = √((0 + 4)/2) = √2.
        let p = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        let q = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0)];
        let d = rmsd(&p, &q, false).unwrap();
        assert_relative_eq!(d, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn rmsd_superpose_rotation_invariant() {
        let p = triad();
        let rot =
            RigidTransform::about_axis(Vec3::new(0.2, 0.3, -0.1), Vec3::new(1.0, 1.0, 0.2), 1.1)
                .unwrap();
        let q = rot.apply_all(&p);
        assert!(rmsd(&p, &q, true).unwrap() < 1e-9);
    }

    #[test]
    fn dihedral_cis_trans() {
        let p2 = Vec3::new(0.0, 0.0, 0.0);
        let p3 = Vec3::new(1.5, 0.0, 0.0);
        let p1 = Vec3::new(-0.5, 1.0, 0.0);
        let cis = Vec3::new(2.0, 1.0, 0.0);
        let trans = Vec3::new(2.0, -1.0, 0.0);
        assert_relative_eq!(dihedral(p1, p2, p3, cis).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(dihedral(p1, p2, p3, trans).unwrap(), PI, epsilon = 1e-12);
    }

    #[test]
    fn rotation_shifts_dihedral() {
        let coords = vec![
            Vec3::new(-0.5, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.5, 0.0, 0.0),
            Vec3::new(2.0, 1.0, 0.0),
        ];
        let before = dihedral(coords[0], coords[1], coords[2], coords[3]).unwrap();
        let theta = 2.0 * PI / 3.0;
        let rotated = rotate_about_bond(&coords, &[3], (1, 2), theta).unwrap();
        let after = dihedral(rotated[0], rotated[1], rotated[2], rotated[3]).unwrap();
        let delta = (after - before - theta).rem_euclid(2.0 * PI);
        assert!(delta < 1e-9 || (2.0 * PI - delta) < 1e-9);
    }

    #[test]
    fn full_turn_is_identity() {
        let coords = triad();
        let out = rotate_about_bond(&coords, &[2], (0, 1), 2.0 * PI).unwrap();
        for (a, b) in out.iter().zip(&coords) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn degenerate_axis_rejected() {
        let coords = triad();
        assert!(rotate_about_bond(&coords, &[2], (1, 1), 0.3).is_err());
        assert!(rotate_about_bond(&coords, &[1], (0, 1), 0.3).is_err());
    }
}
