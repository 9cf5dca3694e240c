//! Livshits' planar obstacle with an open set of trapped rays.
//!
//! The boundary contains the upper half `E` of the ellipse
//! `(x/A)² + (y/B)² = 1` as an exact elliptic arc. Below the major axis two
//! thin fingers end in round caps whose tops touch the axis exactly at the
//! foci `(±c, 0)`. Between each finger and the ellipse end point lies a slot
//! (the pocket). Rays that enter between the fingers cross the major axis
//! inside the focal segment, reflect on `E` and cross it inside the focal
//! segment again, so no ray coming from outside ever reaches a pocket.
//!
//! Loop layout in local coordinates, counter-clockwise with the solid on
//! the left: `E` from `P = (−A, 0)` over the top to `Q = (A, 0)`, the right
//! slot, the right finger, the bottom of the right leg, the outer dome of
//! radius `A + w`, then the mirror image on the left.

use std::f64::consts::PI;

use super::curve::Piece;
use super::obstacle::Obstacle;
use super::scene::Scene;
use super::GeometryError;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct LivshitsParams {
    /// Semi-major and semi-minor axis of the ellipse.
    pub semi_axes: (f64, f64),
    /// Wall thickness `w` of the dome and legs.
    pub wall: f64,
    /// Radius `ρ` of the finger caps and corner fillets.
    pub smoothing: f64,
    /// Extra depth `δ` of both pockets; `0` gives the base scene.
    pub deformation: f64,
    pub ball_radius: f64,
    /// Offset of the ellipse center in the scene.
    pub center: (f64, f64),
}

impl Default for LivshitsParams {
    fn default() -> Self {
        LivshitsParams { semi_axes: (4.0, 3.5), wall: 1.0, smoothing: 0.25, deformation: 0.0, ball_radius: 10.0, center: (0.0, 0.0) }
    }
}

/// Axis-aligned box `[x0, x1] × [y0, y1]` in scene coordinates.
pub type Rect = ([f64; 2], [f64; 2]);

#[derive(Debug, Clone)]
pub struct LivshitsScene {
    pub scene: Scene,
    /// `f1 = (−c, 0)` and `f2 = (c, 0)`, shifted by the center.
    pub foci: [Vec3; 2],
    pub params: LivshitsParams,
    /// The two slots below the ellipse end points, each open towards `E`.
    pub pockets: [Rect; 2],
}

struct Dims {
    a: f64,
    b: f64,
    c: f64,
    rho: f64,
    /// Pocket depth down to the center of its round bottom.
    depth: f64,
    /// Half width of a pocket.
    rp: f64,
    outer: f64,
    bottom: f64,
}

fn dims(p: &LivshitsParams) -> Result<Dims, GeometryError> {
    let bad = |m: String| Err(GeometryError::InvalidParameters(m));
    let (a, b) = p.semi_axes;
    if !(b > 0.0 && a > b && a.is_finite()) {
        return bad(format!("need semi-major > semi-minor > 0, got ({a}, {b})"));
    }
    let c = (a * a - b * b).sqrt();
    let rho = p.smoothing;
    if !(rho > 0.0) {
        return bad("smoothing radius must be positive".into());
    }
    if rho >= 0.5 * c {
        return bad(format!("smoothing radius {rho} is too large for the focal gap {}", 2.0 * c));
    }
    let rp = 0.5 * (a - c - rho);
    if !(rp > 0.0) {
        return bad(format!("smoothing radius {rho} leaves no room for the pockets (A − c = {})", a - c));
    }
    let w = p.wall;
    if !(w > rho) {
        return bad(format!("wall thickness {w} must exceed the smoothing radius {rho}"));
    }
    if !(p.deformation >= 0.0 && p.deformation < w) {
        return bad(format!("pocket deformation {} must lie in [0, wall)", p.deformation));
    }
    let base_depth = 0.5 * b;
    let dims = Dims {
        a,
        b,
        c,
        rho,
        depth: base_depth + p.deformation,
        rp,
        outer: a + w,
        bottom: base_depth + rp + 2.0 * w,
    };
    let (cx, cy) = p.center;
    let reach = [(dims.outer, -dims.bottom), (-dims.outer, -dims.bottom), (0.0, dims.outer), (dims.outer, 0.0), (-dims.outer, 0.0)]
        .iter()
        .map(|(x, y)| (x + cx).hypot(y + cy))
        .fold(0.0, f64::max);
    if reach >= p.ball_radius {
        return bad(format!("obstacle reaches radius {reach}, outside the ball of radius {}", p.ball_radius));
    }
    Ok(dims)
}

fn pieces(d: &Dims) -> Vec<Piece> {
    let Dims { a, b, c, rho, depth, rp, outer, bottom, .. } = *d;
    let seg = |from: [f64; 2], to: [f64; 2]| Piece::Segment { from, to };
    let arc = |center: [f64; 2], radius: f64, start: f64, sweep: f64| Piece::Arc { center, radius, start, sweep };
    vec![
        Piece::EllipticArc { center: [0.0, 0.0], semi_axes: [a, b], start: PI, sweep: -PI },
        seg([a, 0.0], [a, -depth]),
        arc([a - rp, -depth], rp, 0.0, -PI),
        seg([c + rho, -depth], [c + rho, -rho]),
        arc([c, -rho], rho, 0.0, PI),
        seg([c - rho, -rho], [c - rho, -bottom + rho]),
        arc([c, -bottom + rho], rho, PI, PI / 2.0),
        seg([c, -bottom], [outer - rho, -bottom]),
        arc([outer - rho, -bottom + rho], rho, -PI / 2.0, PI / 2.0),
        seg([outer, -bottom + rho], [outer, 0.0]),
        arc([0.0, 0.0], outer, 0.0, PI),
        seg([-outer, 0.0], [-outer, -bottom + rho]),
        arc([-outer + rho, -bottom + rho], rho, PI, PI / 2.0),
        seg([-outer + rho, -bottom], [-c, -bottom]),
        arc([-c, -bottom + rho], rho, -PI / 2.0, PI / 2.0),
        seg([-c + rho, -bottom + rho], [-c + rho, -rho]),
        arc([-c, -rho], rho, 0.0, PI),
        seg([-c - rho, -rho], [-c - rho, -depth]),
        arc([-a + rp, -depth], rp, 0.0, -PI),
        seg([-a, -depth], [-a, 0.0]),
    ]
}

/// Builds the obstacle for `params`.
pub fn livshits_scene(params: &LivshitsParams) -> Result<LivshitsScene, GeometryError> {
    let d = dims(params)?;
    let (cx, cy) = params.center;
    let offset = Vec3::new(cx, cy, 0.0);
    let obstacle = Obstacle::curve(offset, pieces(&d), None)?;
    let name = if params.deformation > 0.0 { "livshits-deformed" } else { "livshits" };
    let scene = Scene::new(name, 2, params.ball_radius, vec![obstacle])?;
    let pocket = |sign: f64| -> Rect {
        let (x0, x1) = if sign > 0.0 { (d.c + d.rho, d.a) } else { (-d.a, -d.c - d.rho) };
        ([x0 + cx, x1 + cx], [-d.depth - d.rp + cy, cy])
    };
    Ok(LivshitsScene {
        scene,
        foci: [offset - Vec3::new(d.c, 0.0, 0.0), offset + Vec3::new(d.c, 0.0, 0.0)],
        params: params.clone(),
        pockets: [pocket(-1.0), pocket(1.0)],
    })
}

/// Base scene and its twin whose pockets are deeper by `deformation`.
pub fn livshits_pair(params: &LivshitsParams, deformation: f64) -> Result<(LivshitsScene, LivshitsScene), GeometryError> {
    let base = livshits_scene(&LivshitsParams { deformation: 0.0, ..params.clone() })?;
    let deformed = livshits_scene(&LivshitsParams { deformation, ..params.clone() })?;
    Ok((base, deformed))
}
