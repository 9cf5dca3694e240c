//! Obstacles, scenes and boundary differential geometry.

pub mod curve;
pub mod livshits;
mod obstacle;
mod scene;
mod validate;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use thiserror::Error;

pub use curve::{Curve, Piece};
pub use livshits::{livshits_pair, livshits_scene, LivshitsParams, LivshitsScene, Rect};
pub use obstacle::{direction_set, Obstacle, Shape};
pub use scene::Scene;
pub use validate::{inspect_scene, validate_scene, ObstacleSummary, PairGap, ValidationOptions, ValidationReport, Violation};

use crate::Vec3;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("scene file: {0}")]
    SceneFormat(String),
    #[error("gradient norm {norm:e} is below the floor {floor:e}")]
    SingularGradient { norm: f64, floor: f64 },
    #[error("point is not on the boundary (distance estimate {0:e})")]
    NotOnBoundary(f64),
    #[error("scene validation failed: {0}")]
    ValidationFailed(Violation),
}

/// Smallest gradient norm accepted on a boundary.
pub const GRADIENT_FLOOR: f64 = 1e-10;

/// Relative distance (in units of the obstacle size) within which a point
/// counts as lying on the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-7;

/// Implicit value of `obstacle` at `point`.
pub fn implicit_value(obstacle: &Obstacle, point: &Vec3) -> f64 {
    obstacle.value(point)
}

/// Normal, tangent plane and shape operator at a boundary point.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    pub point: Vec3,
    /// Unit normal pointing out of the obstacle, into the exterior.
    pub normal: Vec3,
    /// Orthonormal tangent vectors (`n − 1` of them).
    pub tangent_basis: Vec<Vec3>,
    /// Shape operator in `tangent_basis`; positive definite on convex parts.
    pub shape: DMatrix<f64>,
    /// The same operator as an ambient 3×3 map on tangent vectors (`dν = W dx`).
    pub weingarten: Matrix3<f64>,
    pub gradient_norm: f64,
}

impl SurfaceFrame {
    /// Principal curvatures, ascending.
    pub fn principal_curvatures(&self) -> Vec<f64> {
        let mut k: Vec<f64> = SymmetricEigen::new(self.shape.clone()).eigenvalues.iter().copied().collect();
        k.sort_by(f64::total_cmp);
        k
    }
}

pub fn surface_frame(obstacle: &Obstacle, point: &Vec3) -> Result<SurfaceFrame, GeometryError> {
    let g = obstacle.gradient(point);
    let gn = g.norm();
    if !(gn >= GRADIENT_FLOOR) {
        return Err(GeometryError::SingularGradient { norm: gn, floor: GRADIENT_FLOOR });
    }
    let f = obstacle.value(point);
    let tol = BOUNDARY_TOLERANCE * obstacle.bounding_radius().max(1.0);
    if (f / gn).abs() > tol {
        return Err(GeometryError::NotOnBoundary(f / gn));
    }
    let nu = g / gn;
    let projector = Matrix3::identity() - nu * nu.transpose();
    let mut w = projector * obstacle.hessian(point) * projector / gn;
    w = 0.5 * (w + w.transpose());
    let basis = orthonormal_complement(&nu, obstacle.dim());
    let m = basis.len();
    let shape = DMatrix::from_fn(m, m, |i, j| basis[i].dot(&(w * basis[j])));
    Ok(SurfaceFrame { point: *point, normal: nu, tangent_basis: basis, shape, weingarten: w, gradient_norm: gn })
}

/// Deterministic orthonormal basis of the complement of `v` (unit) inside
/// the scene's `dim`-dimensional space.
pub fn orthonormal_complement(v: &Vec3, dim: usize) -> Vec<Vec3> {
    if dim == 2 {
        vec![Vec3::new(-v.y, v.x, 0.0).normalize()]
    } else {
        let a = v.abs();
        let helper = if a.x <= a.y && a.x <= a.z {
            Vec3::x()
        } else if a.y <= a.z {
            Vec3::y()
        } else {
            Vec3::z()
        };
        let e1 = (helper - v * v.dot(&helper)).normalize();
        let e2 = v.cross(&e1).normalize();
        vec![e1, e2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_frame_radius_two() {
        let s = Obstacle::sphere(Vec3::zeros(), 2.0, 3);
        let f = surface_frame(&s, &Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((f.normal - Vec3::x()).norm() < 1e-15);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert!((f.shape[(i, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ellipse_major_vertex_curvature() {
        // closed form κ = ab / (a² sin²t + b² cos²t)^{3/2}; at t = 0 this is a / b²
        let (a, b) = (2.0f64, 1.0f64);
        let t = 0.0f64;
        let oracle = a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5);
        let e = Obstacle::new(2, Shape::Ellipsoid { semi_axes: Vec3::new(a, b, 1.0) }, Vec3::zeros(), None).unwrap();
        let f = surface_frame(&e, &Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((f.normal - Vec3::x()).norm() < 1e-15);
        assert!((f.shape[(0, 0)] - oracle).abs() < 1e-12, "{}", f.shape[(0, 0)]);
        assert_eq!(oracle, 2.0);
    }

    #[test]
    fn interior_point_is_rejected() {
        let s = Obstacle::sphere(Vec3::zeros(), 1.0, 3);
        assert!(matches!(surface_frame(&s, &Vec3::zeros()), Err(GeometryError::SingularGradient { .. })));
        assert!(matches!(
            surface_frame(&s, &Vec3::new(0.5, 0.0, 0.0)),
            Err(GeometryError::NotOnBoundary(_))
        ));
    }

    fn builtin(kind: u8) -> Obstacle {
        match kind {
            0 => Obstacle::sphere(Vec3::new(0.3, -0.2, 0.1), 1.3, 3),
            1 => Obstacle::new(3, Shape::Ellipsoid { semi_axes: Vec3::new(2.0, 1.0, 1.5) }, Vec3::zeros(), Some(vec![0.3, 0.5, -0.2])).unwrap(),
            2 => Obstacle::new(3, Shape::Superellipsoid { semi_axes: Vec3::new(1.0, 1.2, 0.9), exponent: 4.0 }, Vec3::zeros(), Some(vec![0.0, 0.4, 0.0])).unwrap(),
            _ => Obstacle::new(2, Shape::Ellipsoid { semi_axes: Vec3::new(2.0, 0.7, 1.0) }, Vec3::new(1.0, 1.0, 0.0), Some(vec![1.1])).unwrap(),
        }
    }

    fn boundary_point(o: &Obstacle, th: f64, ph: f64) -> Vec3 {
        let dir = if o.dim() == 2 {
            Vec3::new(th.cos(), th.sin(), 0.0)
        } else {
            Vec3::new(ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos())
        };
        // bisection along the ray from the center
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if o.value(&(o.center() + m * dir)) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        o.center() + lo * dir
    }

    proptest! {
        #[test]
        fn normal_is_unit_and_outward(kind in 0u8..4, th in 0.0..2.0 * PI, ph in 0.05..PI - 0.05) {
            let o = builtin(kind);
            let p = boundary_point(&o, th, ph);
            let f = surface_frame(&o, &p).unwrap();
            prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
            prop_assert!(f.normal.dot(&o.gradient(&p)) > 0.0);
        }

        #[test]
        fn shape_operator_matches_normal_map_differences(kind in 0u8..4, th in 0.0..2.0 * PI, ph in 0.2..PI - 0.2) {
            let o = builtin(kind);
            let p = boundary_point(&o, th, ph);
            let f = surface_frame(&o, &p).unwrap();
            let h = 1e-5;
            let unit = |x: &Vec3| o.gradient(x).normalize();
            for (j, e) in f.tangent_basis.iter().enumerate() {
                let dn = (unit(&(p + h * e)) - unit(&(p - h * e))) / (2.0 * h);
                for (i, ei) in f.tangent_basis.iter().enumerate() {
                    let fd = ei.dot(&dn);
                    let s = f.shape[(i, j)];
                    let scale = f.shape.amax().max(1e-3);
                    prop_assert!((fd - s).abs() <= 1e-5 * scale, "({i},{j}) fd {fd} vs {s}");
                }
            }
        }
    }
}
