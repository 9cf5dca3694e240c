//! Planar scenes whose focusing behaviour is known in closed form from the
//! mirror equation `1/d + 1/d' = 2/(r cos φ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::flow::PhasePoint;
use crate::geometry::{GeometryError, Obstacle, Scene};
use crate::Vec3;

/// Focal distance of a concave mirror of radius `r` for a source at
/// distance `d` and incidence angle `phi`.
pub fn mirror_image_distance(r: f64, d: f64, phi: f64) -> f64 {
    1.0 / (2.0 / (r * phi.cos()) - 1.0 / d)
}

/// A concave arc of radius `r` centred at the origin, facing up, in a ball of
/// radius 10. A ray leaving the centre downwards returns to it after `2r`.
pub fn concave_arc(r: f64) -> Result<(Scene, PhasePoint), GeometryError> {
    let shell = Obstacle::arc_shell([0.0, 0.0], r, 0.5, -FRAC_PI_2, 0.9)?;
    let scene = Scene::new("concave-arc", 2, 10.0, vec![shell])?;
    Ok((scene, PhasePoint::new(Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0))))
}

/// Source disc, concave arc of radius 4, and a target disc placed at the
/// refocusing distance. Events 0 and 2 of the orbit from the returned entry
/// are conjugate.
pub fn refocusing() -> Result<(Scene, PhasePoint), GeometryError> {
    let (r, d, phi) = (4.0, 3.0, PI / 6.0);
    let mirror = Vec3::new(0.0, -r, 0.0);
    let down = Vec3::new(phi.sin(), -phi.cos(), 0.0);
    let up = Vec3::new(phi.sin(), phi.cos(), 0.0);
    let x_i = mirror - d * down;
    // outward normal at x_i turning +x into `down`
    let n_i = (down - Vec3::x()).normalize();
    let x_j = mirror + mirror_image_distance(r, d, phi) * up;
    let disc = 0.5;
    let obstacles = vec![
        Obstacle::sphere(x_i - disc * n_i, disc, 2),
        Obstacle::arc_shell([0.0, 0.0], r, 0.5, -FRAC_PI_2, 0.9)?,
        Obstacle::sphere(x_j + disc * up, disc, 2),
    ];
    let scene = Scene::new("refocusing", 2, 10.0, obstacles)?;
    let a: f64 = 10.0;
    let entry = PhasePoint::new(Vec3::new(-(a * a - x_i.y * x_i.y).sqrt(), x_i.y, 0.0), Vec3::x());
    Ok((scene, entry))
}

/// A wide concave arc that focuses the axial beam from `(−a, 0)` exactly at
/// time `exit + a`, so the orbit fails the regularity test.
pub fn focused_on_exit() -> Result<(Scene, PhasePoint), GeometryError> {
    // mirror at x = 5, d = 15, d' = 25 = 15 back to the sphere plus a
    let (a, d, d_image) = (10.0, 15.0, 25.0);
    let r = 2.0 / (1.0 / d + 1.0 / d_image);
    let shell = Obstacle::arc_shell([d - a - r, 0.0], r, 0.5, 0.0, 0.2)?;
    let scene = Scene::new("focused-on-exit", 2, a, vec![shell])?;
    Ok((scene, PhasePoint::new(Vec3::new(-a, 0.0, 0.0), Vec3::x())))
}
