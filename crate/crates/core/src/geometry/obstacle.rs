use nalgebra::{Matrix3, Rotation3};

use super::curve::{Curve, Piece};
use super::GeometryError;
use crate::Vec3;

/// Shape in the obstacle's local frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `F = |y|² − r²`.
    Sphere { radius: f64 },
    /// `F = Σ (y_i / a_i)² − 1`.
    Ellipsoid { semi_axes: Vec3 },
    /// `F = Σ |y_i / a_i|^p − 1`, `p ≥ 2`.
    Superellipsoid { semi_axes: Vec3, exponent: f64 },
    /// Planar closed curve; `F` is the signed distance.
    Curve(Curve),
}

/// An implicitly defined obstacle: `F < 0` inside, `F = 0` on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    shape: Shape,
    center: Vec3,
    rotation: Rotation3<f64>,
    /// Rotation as given in the scene file (angle in 2D, rotation vector in 3D).
    rotation_params: Option<Vec<f64>>,
    dim: usize,
}

impl Obstacle {
    pub fn new(dim: usize, shape: Shape, center: Vec3, rotation_params: Option<Vec<f64>>) -> Result<Self, GeometryError> {
        if dim != 2 && dim != 3 {
            return Err(GeometryError::InvalidParameters(format!("dimension {dim} is not 2 or 3")));
        }
        if matches!(shape, Shape::Curve(_)) && dim != 2 {
            return Err(GeometryError::InvalidParameters("curve obstacles are two-dimensional".into()));
        }
        let rotation = match (&rotation_params, dim) {
            (None, _) => Rotation3::identity(),
            (Some(r), 2) if r.len() == 1 => Rotation3::from_axis_angle(&Vec3::z_axis(), r[0]),
            (Some(r), 3) if r.len() == 3 => Rotation3::new(Vec3::new(r[0], r[1], r[2])),
            (Some(r), _) => {
                return Err(GeometryError::InvalidParameters(format!(
                    "rotation needs {} component(s), got {}",
                    if dim == 2 { 1 } else { 3 },
                    r.len()
                )))
            }
        };
        let mut center = center;
        if dim == 2 {
            center.z = 0.0;
        }
        Ok(Obstacle { shape, center, rotation, rotation_params, dim })
    }

    pub fn sphere(center: Vec3, radius: f64, dim: usize) -> Self {
        Obstacle::new(dim, Shape::Sphere { radius }, center, None).expect("valid dimension")
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn rotation_params(&self) -> Option<&[f64]> {
        self.rotation_params.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::Sphere { .. } => "sphere",
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::Superellipsoid { .. } => "superellipsoid",
            Shape::Curve(_) => "curve",
        }
    }

    fn local(&self, x: &Vec3) -> Vec3 {
        let mut y = self.rotation.inverse() * (x - self.center);
        if self.dim == 2 {
            y.z = 0.0;
        }
        y
    }

    fn active(&self) -> usize {
        self.dim
    }

    /// Implicit value `F(x)`.
    pub fn value(&self, x: &Vec3) -> f64 {
        let y = self.local(x);
        match &self.shape {
            Shape::Sphere { radius } => y.norm_squared() - radius * radius,
            Shape::Ellipsoid { semi_axes } => (0..self.active()).map(|i| (y[i] / semi_axes[i]).powi(2)).sum::<f64>() - 1.0,
            Shape::Superellipsoid { semi_axes, exponent } => {
                (0..self.active()).map(|i| (y[i] / semi_axes[i]).abs().powf(*exponent)).sum::<f64>() - 1.0
            }
            Shape::Curve(c) => c.eval([y.x, y.y]).distance,
        }
    }

    /// `∇F(x)` in world coordinates.
    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        let y = self.local(x);
        let g = match &self.shape {
            Shape::Sphere { .. } => 2.0 * y,
            Shape::Ellipsoid { semi_axes } => {
                let mut g = Vec3::zeros();
                for i in 0..self.active() {
                    g[i] = 2.0 * y[i] / (semi_axes[i] * semi_axes[i]);
                }
                g
            }
            Shape::Superellipsoid { semi_axes, exponent } => {
                let p = *exponent;
                let mut g = Vec3::zeros();
                for i in 0..self.active() {
                    let u = y[i] / semi_axes[i];
                    g[i] = p * u.abs().powf(p - 1.0) * u.signum() / semi_axes[i];
                }
                g
            }
            Shape::Curve(c) => {
                let e = c.eval([y.x, y.y]);
                Vec3::new(e.normal[0], e.normal[1], 0.0)
            }
        };
        self.rotation * g
    }

    /// Hessian of `F` in world coordinates.
    pub fn hessian(&self, x: &Vec3) -> Matrix3<f64> {
        let y = self.local(x);
        let h = match &self.shape {
            Shape::Sphere { .. } => {
                let mut h = Matrix3::zeros();
                for i in 0..self.active() {
                    h[(i, i)] = 2.0;
                }
                h
            }
            Shape::Ellipsoid { semi_axes } => {
                let mut h = Matrix3::zeros();
                for i in 0..self.active() {
                    h[(i, i)] = 2.0 / (semi_axes[i] * semi_axes[i]);
                }
                h
            }
            Shape::Superellipsoid { semi_axes, exponent } => {
                let p = *exponent;
                let mut h = Matrix3::zeros();
                for i in 0..self.active() {
                    let u = (y[i] / semi_axes[i]).abs();
                    h[(i, i)] = p * (p - 1.0) * u.powf(p - 2.0) / (semi_axes[i] * semi_axes[i]);
                }
                h
            }
            Shape::Curve(c) => {
                let e = c.eval([y.x, y.y]);
                let t = Vec3::new(-e.normal[1], e.normal[0], 0.0);
                let denom = 1.0 + e.curvature * e.distance;
                let k = if denom > 1e-9 { e.curvature / denom } else { e.curvature / 1e-9 };
                k * t * t.transpose()
            }
        };
        self.rotation.matrix() * h * self.rotation.matrix().transpose()
    }

    /// Lower bound on the Euclidean distance from an exterior point to the
    /// boundary; zero when no bound is available.
    pub fn clearance(&self, x: &Vec3) -> f64 {
        let y = self.local(x);
        let d = match &self.shape {
            Shape::Sphere { radius } => y.norm() - radius,
            Shape::Ellipsoid { semi_axes } => {
                let rho = (0..self.active()).map(|i| (y[i] / semi_axes[i]).powi(2)).sum::<f64>().sqrt();
                (rho - 1.0) * self.min_semi_axis(semi_axes)
            }
            Shape::Superellipsoid { semi_axes, exponent } => {
                let p = *exponent;
                let rho = (0..self.active()).map(|i| (y[i] / semi_axes[i]).abs().powf(p)).sum::<f64>().powf(1.0 / p);
                (rho - 1.0) * self.min_semi_axis(semi_axes)
            }
            Shape::Curve(c) => c.eval([y.x, y.y]).distance,
        };
        // shave off rounding so the bound stays conservative
        (d * (1.0 - 1e-9) - 1e-12).max(0.0)
    }

    fn min_semi_axis(&self, semi_axes: &Vec3) -> f64 {
        (0..self.active()).map(|i| semi_axes[i]).fold(f64::INFINITY, f64::min)
    }

    /// Radius of a ball about [`Obstacle::center`] containing the obstacle.
    pub fn bounding_radius(&self) -> f64 {
        match &self.shape {
            Shape::Sphere { radius } => *radius,
            Shape::Ellipsoid { semi_axes } | Shape::Superellipsoid { semi_axes, .. } => {
                // a superellipsoid with p ≥ 2 fits in the box of its semi-axes
                (0..self.active()).map(|i| semi_axes[i] * semi_axes[i]).sum::<f64>().sqrt()
            }
            Shape::Curve(c) => c.bounding_radius(),
        }
    }

    /// Checks the shape parameters (positive radii, exponent ≥ 2).
    pub fn check_parameters(&self) -> Result<(), String> {
        match &self.shape {
            Shape::Sphere { radius } if !(*radius > 0.0 && radius.is_finite()) => Err(format!("sphere radius {radius} is not positive")),
            Shape::Ellipsoid { semi_axes } if (0..self.active()).any(|i| !(semi_axes[i] > 0.0)) => {
                Err("ellipsoid semi-axes must be positive".into())
            }
            Shape::Superellipsoid { semi_axes, exponent } => {
                if (0..self.active()).any(|i| !(semi_axes[i] > 0.0)) {
                    Err("superellipsoid semi-axes must be positive".into())
                } else if !(*exponent >= 2.0) {
                    Err(format!("superellipsoid exponent {exponent} is below 2"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Boundary point along the local direction `d` from the center, for
    /// star-shaped kinds.
    fn radial_boundary_point(&self, d: &Vec3) -> Vec3 {
        let r = match &self.shape {
            Shape::Sphere { radius } => *radius,
            Shape::Ellipsoid { semi_axes } => {
                1.0 / (0..self.active()).map(|i| (d[i] / semi_axes[i]).powi(2)).sum::<f64>().sqrt()
            }
            Shape::Superellipsoid { semi_axes, exponent } => {
                let p = *exponent;
                (0..self.active()).map(|i| (d[i] / semi_axes[i]).abs().powf(p)).sum::<f64>().powf(-1.0 / p)
            }
            Shape::Curve(_) => unreachable!("curves are sampled along their pieces"),
        };
        self.center + self.rotation * (r * d)
    }

    /// Deterministic boundary samples. `count` is the target number of points.
    ///
    /// Star-shaped kinds are sampled along rays from the center; the set of
    /// rays always contains the coordinate axes of the local frame.
    pub fn boundary_samples(&self, count: usize) -> Vec<Vec3> {
        let count = count.max(8);
        match &self.shape {
            Shape::Curve(c) => {
                let density = count as f64 / c.length();
                c.samples(density)
                    .into_iter()
                    .map(|p| self.center + self.rotation * Vec3::new(p[0], p[1], 0.0))
                    .collect()
            }
            _ => direction_set(self.dim, count).iter().map(|d| self.radial_boundary_point(d)).collect(),
        }
    }

    /// Thick circular arc with round ends: inner radius `inner_radius`
    /// about `center`, angular extent `mid_angle ± half_width`. The inner
    /// face is a concave mirror seen from `center`.
    pub fn arc_shell(center: [f64; 2], inner_radius: f64, thickness: f64, mid_angle: f64, half_width: f64) -> Result<Self, GeometryError> {
        if !(inner_radius > 0.0 && thickness > 0.0 && half_width > 0.0 && half_width < std::f64::consts::PI) {
            return Err(GeometryError::InvalidParameters("arc shell needs positive radius, thickness and half width below π".into()));
        }
        let (r, w) = (inner_radius, thickness);
        let (t0, t1) = (mid_angle - half_width, mid_angle + half_width);
        let cap_center = |th: f64| [(r + 0.5 * w) * th.cos(), (r + 0.5 * w) * th.sin()];
        let pieces = vec![
            Piece::Arc { center: [0.0, 0.0], radius: r + w, start: t0, sweep: 2.0 * half_width },
            Piece::Arc { center: cap_center(t1), radius: 0.5 * w, start: t1, sweep: std::f64::consts::PI },
            Piece::Arc { center: [0.0, 0.0], radius: r, start: t1, sweep: -2.0 * half_width },
            Piece::Arc { center: cap_center(t0), radius: 0.5 * w, start: t0 + std::f64::consts::PI, sweep: std::f64::consts::PI },
        ];
        Obstacle::curve(Vec3::new(center[0], center[1], 0.0), pieces, None)
    }

    /// Builds a curve obstacle from pieces.
    pub fn curve(center: Vec3, pieces: Vec<Piece>, rotation: Option<f64>) -> Result<Self, GeometryError> {
        let curve = Curve::new(pieces)?;
        Obstacle::new(2, Shape::Curve(curve), center, rotation.map(|r| vec![r]))
    }
}

/// Unit directions covering the circle (2D) or sphere (3D), including the
/// coordinate axes.
pub fn direction_set(dim: usize, count: usize) -> Vec<Vec3> {
    if dim == 2 {
        let n = count.div_ceil(4) * 4;
        (0..n)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / n as f64;
                Vec3::new(th.cos(), th.sin(), 0.0)
            })
            .collect()
    } else {
        let mut dirs = vec![Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
        // Fibonacci lattice for the rest
        let n = count.saturating_sub(6).max(1);
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for i in 0..n {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            dirs.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
        }
        dirs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_implicit_values() {
        let s = Obstacle::sphere(Vec3::zeros(), 1.0, 3);
        assert_eq!(s.value(&Vec3::new(2.0, 0.0, 0.0)), 3.0);
        assert_eq!(s.value(&Vec3::new(1.0, 0.0, 0.0)), 0.0);
        assert_eq!(s.value(&Vec3::zeros()), -1.0);
    }

    #[test]
    fn rotated_ellipse_gradient_matches_central_differences() {
        let o = Obstacle::new(2, Shape::Ellipsoid { semi_axes: Vec3::new(2.0, 1.0, 1.0) }, Vec3::new(0.5, -0.3, 0.0), Some(vec![0.7])).unwrap();
        let x = Vec3::new(1.3, 0.4, 0.0);
        let g = o.gradient(&x);
        let h = 1e-6;
        for i in 0..2 {
            let mut e = Vec3::zeros();
            e[i] = h;
            let fd = (o.value(&(x + e)) - o.value(&(x - e))) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "component {i}: {fd} vs {}", g[i]);
        }
        assert_eq!(g.z, 0.0);
    }

    #[test]
    fn superellipsoid_hessian_matches_differences_of_gradient() {
        let o = Obstacle::new(
            3,
            Shape::Superellipsoid { semi_axes: Vec3::new(1.0, 1.5, 0.8), exponent: 4.0 },
            Vec3::new(0.1, 0.2, -0.1),
            Some(vec![0.2, -0.4, 0.3]),
        )
        .unwrap();
        let x = Vec3::new(0.6, 0.9, 0.3);
        let hm = o.hessian(&x);
        let h = 1e-6;
        for j in 0..3 {
            let mut e = Vec3::zeros();
            e[j] = h;
            let col = (o.gradient(&(x + e)) - o.gradient(&(x - e))) / (2.0 * h);
            for i in 0..3 {
                assert!((col[i] - hm[(i, j)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn clearance_never_exceeds_true_distance() {
        let o = Obstacle::new(3, Shape::Ellipsoid { semi_axes: Vec3::new(3.0, 1.0, 2.0) }, Vec3::zeros(), None).unwrap();
        let samples = o.boundary_samples(4000);
        for x in [Vec3::new(4.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0), Vec3::new(2.0, 2.0, 2.0)] {
            let truth = samples.iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min);
            assert!(o.clearance(&x) <= truth + 1e-9);
        }
    }

    #[test]
    fn boundary_samples_lie_on_boundary() {
        let o = Obstacle::new(3, Shape::Superellipsoid { semi_axes: Vec3::new(1.0, 2.0, 1.0), exponent: 8.0 }, Vec3::new(1.0, 0.0, 0.0), None).unwrap();
        for p in o.boundary_samples(200) {
            assert!(o.value(&p).abs() < 1e-12);
        }
    }
}
