//! Closed planar curves assembled from analytic pieces.
//!
//! A [`Curve`] is a counter-clockwise loop (obstacle interior on the left)
//! of segments, circular arcs and elliptic arcs joined with continuous
//! tangents. Its implicit function is the exact signed distance.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Joint mismatch allowed when checking closure.
const JOIN_TOL: f64 = 1e-9;
/// Tangent mismatch allowed at joints (radians, as a chord of unit vectors).
const TANGENT_TOL: f64 = 1e-6;

type P2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Piece {
    Segment {
        from: P2,
        to: P2,
    },
    /// `center + radius (cos θ, sin θ)` for `θ` from `start` to `start + sweep`.
    Arc {
        center: P2,
        radius: f64,
        start: f64,
        sweep: f64,
    },
    /// `center + (A cos θ, B sin θ)` for `θ` from `start` to `start + sweep`.
    EllipticArc {
        center: P2,
        semi_axes: P2,
        start: f64,
        sweep: f64,
    },
}

/// Closest point of a piece to a query point.
#[derive(Debug, Clone, Copy)]
struct Closest {
    /// Normalized parameter in `[0, 1]`.
    s: f64,
    dist2: f64,
}

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl Piece {
    pub fn point(&self, s: f64) -> P2 {
        match *self {
            Piece::Segment { from, to } => [from[0] + s * (to[0] - from[0]), from[1] + s * (to[1] - from[1])],
            Piece::Arc { center, radius, start, sweep } => {
                let th = start + s * sweep;
                [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
            Piece::EllipticArc { center, semi_axes, start, sweep } => {
                let th = start + s * sweep;
                [center[0] + semi_axes[0] * th.cos(), center[1] + semi_axes[1] * th.sin()]
            }
        }
    }

    /// Unit tangent in the traversal direction.
    pub fn tangent(&self, s: f64) -> P2 {
        let d = match *self {
            Piece::Segment { from, to } => sub(to, from),
            Piece::Arc { start, sweep, .. } => {
                let th = start + s * sweep;
                [-th.sin() * sweep.signum(), th.cos() * sweep.signum()]
            }
            Piece::EllipticArc { semi_axes, start, sweep, .. } => {
                let th = start + s * sweep;
                [-semi_axes[0] * th.sin() * sweep.signum(), semi_axes[1] * th.cos() * sweep.signum()]
            }
        };
        let n = norm(d);
        [d[0] / n, d[1] / n]
    }

    /// Signed curvature: positive where the loop turns left (convex obstacle side).
    pub fn curvature(&self, s: f64) -> f64 {
        match *self {
            Piece::Segment { .. } => 0.0,
            Piece::Arc { radius, sweep, .. } => sweep.signum() / radius,
            Piece::EllipticArc { semi_axes: [a, b], start, sweep, .. } => {
                let th = start + s * sweep;
                let q = a * a * th.sin().powi(2) + b * b * th.cos().powi(2);
                sweep.signum() * a * b / q.powf(1.5)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { from, to } => norm(sub(to, from)),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
            Piece::EllipticArc { .. } => {
                // composite Simpson on the speed |dp/dθ|
                let n = 512;
                let mut acc = 0.0;
                let speed = |s: f64| {
                    if let Piece::EllipticArc { semi_axes: [a, b], start, sweep, .. } = *self {
                        let th = start + s * sweep;
                        (a * th.sin()).hypot(b * th.cos()) * sweep.abs()
                    } else {
                        unreachable!()
                    }
                };
                for i in 0..=n {
                    let w = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += w * speed(i as f64 / n as f64);
                }
                acc / (3.0 * n as f64)
            }
        }
    }

    /// Bounding circle `(center, radius)`.
    fn bounds(&self) -> (P2, f64) {
        match *self {
            Piece::Segment { from, to } => {
                let c = [(from[0] + to[0]) / 2.0, (from[1] + to[1]) / 2.0];
                (c, norm(sub(to, from)) / 2.0)
            }
            Piece::Arc { center, radius, .. } => (center, radius),
            Piece::EllipticArc { center, semi_axes, .. } => (center, semi_axes[0].max(semi_axes[1])),
        }
    }

    fn closest(&self, x: P2) -> Closest {
        let end_candidates = |piece: &Piece| {
            let d0 = norm(sub(x, piece.point(0.0))).powi(2);
            let d1 = norm(sub(x, piece.point(1.0))).powi(2);
            if d0 <= d1 {
                Closest { s: 0.0, dist2: d0 }
            } else {
                Closest { s: 1.0, dist2: d1 }
            }
        };
        match *self {
            Piece::Segment { from, to } => {
                let d = sub(to, from);
                let l2 = dot(d, d);
                let s = (dot(sub(x, from), d) / l2).clamp(0.0, 1.0);
                let p = self.point(s);
                Closest { s, dist2: norm(sub(x, p)).powi(2) }
            }
            Piece::Arc { center, radius, start, sweep } => {
                let r = sub(x, center);
                if norm(r) == 0.0 {
                    return Closest { s: 0.0, dist2: radius * radius };
                }
                let th = r[1].atan2(r[0]);
                let u = if sweep > 0.0 { (th - start).rem_euclid(TAU) } else { (start - th).rem_euclid(TAU) };
                if u <= sweep.abs() {
                    let d = norm(r) - radius;
                    Closest { s: u / sweep.abs(), dist2: d * d }
                } else {
                    end_candidates(self)
                }
            }
            Piece::EllipticArc { center, semi_axes: [a, b], start, sweep } => {
                let [px, py] = sub(x, center);
                // half the derivative of the squared distance in θ
                let g = |th: f64| (b * b - a * a) * th.sin() * th.cos() + a * px * th.sin() - b * py * th.cos();
                let dg = |th: f64| (b * b - a * a) * (2.0 * th).cos() + a * px * th.cos() + b * py * th.sin();
                let mut best = end_candidates(self);
                let n = 24;
                let theta = |s: f64| start + s * sweep;
                let mut s_prev = 0.0;
                let mut g_prev = g(theta(0.0));
                for i in 1..=n {
                    let s_i = i as f64 / n as f64;
                    let g_i = g(theta(s_i));
                    if g_prev == 0.0 || g_prev.signum() != g_i.signum() {
                        let (mut lo, mut hi) = (s_prev, s_i);
                        let glo = g(theta(lo));
                        let mut s = 0.5 * (lo + hi);
                        for _ in 0..60 {
                            let gs = g(theta(s));
                            if gs == 0.0 {
                                break;
                            }
                            if gs.signum() == glo.signum() {
                                lo = s;
                            } else {
                                hi = s;
                            }
                            // Newton in s, kept inside the bracket
                            let slope = dg(theta(s)) * sweep;
                            let sn = s - gs / slope;
                            s = if slope != 0.0 && sn > lo && sn < hi { sn } else { 0.5 * (lo + hi) };
                            if hi - lo < 1e-16 {
                                break;
                            }
                        }
                        let p = self.point(s);
                        let d2 = norm(sub(x, p)).powi(2);
                        if d2 < best.dist2 {
                            best = Closest { s, dist2: d2 };
                        }
                    }
                    s_prev = s_i;
                    g_prev = g_i;
                }
                best
            }
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::InvalidParameters(m.to_string()));
        match *self {
            Piece::Segment { from, to } => {
                if norm(sub(to, from)) <= 0.0 {
                    return bad("curve segment has zero length");
                }
            }
            Piece::Arc { radius, sweep, .. } => {
                if !(radius > 0.0) || sweep == 0.0 || sweep.abs() > TAU {
                    return bad("curve arc needs radius > 0 and 0 < |sweep| <= 2π");
                }
            }
            Piece::EllipticArc { semi_axes, sweep, .. } => {
                if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) || sweep == 0.0 || sweep.abs() > TAU {
                    return bad("elliptic arc needs positive semi-axes and 0 < |sweep| <= 2π");
                }
            }
        }
        Ok(())
    }
}

/// Signed-distance evaluation of a curve.
#[derive(Debug, Clone, Copy)]
pub struct CurveEval {
    /// Negative inside the obstacle.
    pub distance: f64,
    /// Outward unit normal at the closest boundary point.
    pub normal: P2,
    /// Signed curvature at the closest boundary point.
    pub curvature: f64,
    pub piece: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pieces: Vec<Piece>,
    bounds: Vec<(P2, f64)>,
}

impl Curve {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, GeometryError> {
        if pieces.is_empty() {
            return Err(GeometryError::InvalidParameters("curve has no pieces".into()));
        }
        for p in &pieces {
            p.validate()?;
        }
        for (i, p) in pieces.iter().enumerate() {
            let next = &pieces[(i + 1) % pieces.len()];
            let gap = norm(sub(p.point(1.0), next.point(0.0)));
            if gap > JOIN_TOL {
                return Err(GeometryError::InvalidParameters(format!(
                    "curve pieces {i} and {} do not join (gap {gap:e})",
                    (i + 1) % pieces.len()
                )));
            }
            let kink = norm(sub(p.tangent(1.0), next.tangent(0.0)));
            if kink > TANGENT_TOL {
                return Err(GeometryError::InvalidParameters(format!(
                    "curve has a corner between pieces {i} and {}",
                    (i + 1) % pieces.len()
                )));
            }
        }
        let bounds = pieces.iter().map(Piece::bounds).collect();
        let curve = Curve { pieces, bounds };
        if curve.signed_area() <= 0.0 {
            return Err(GeometryError::InvalidParameters(
                "curve must be counter-clockwise (interior on the left)".into(),
            ));
        }
        Ok(curve)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    /// Shoelace area of a fine polyline approximation.
    pub fn signed_area(&self) -> f64 {
        let pts: Vec<P2> = self
            .pieces
            .iter()
            .flat_map(|p| (0..64).map(move |i| p.point(i as f64 / 64.0)))
            .collect();
        let n = pts.len();
        (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            / 2.0
    }

    /// Largest distance from the origin of the local frame to the curve.
    pub fn bounding_radius(&self) -> f64 {
        self.bounds.iter().map(|(c, r)| norm(*c) + r).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: P2) -> CurveEval {
        let mut best: Option<(usize, Closest)> = None;
        for (i, (piece, (bc, br))) in self.pieces.iter().zip(&self.bounds).enumerate() {
            if let Some((_, b)) = best {
                let lb = (norm(sub(x, *bc)) - br).max(0.0);
                if lb * lb >= b.dist2 {
                    continue;
                }
            }
            let c = piece.closest(x);
            if best.is_none_or(|(_, b)| c.dist2 < b.dist2) {
                best = Some((i, c));
            }
        }
        let (i, c) = best.expect("curve has pieces");
        let piece = &self.pieces[i];
        let t = piece.tangent(c.s);
        let normal = [t[1], -t[0]];
        let p = piece.point(c.s);
        let d = c.dist2.sqrt();
        let side = dot(sub(x, p), normal);
        CurveEval {
            distance: if side < 0.0 { -d } else { d },
            normal,
            curvature: piece.curvature(c.s),
            piece: i,
            s: c.s,
        }
    }

    /// Points spaced roughly `1/density` apart along the loop.
    pub fn samples(&self, density: f64) -> Vec<P2> {
        self.pieces
            .iter()
            .flat_map(|p| {
                let n = ((p.length() * density).ceil() as usize).max(2);
                (0..n).map(move |i| p.point(i as f64 / n as f64))
            })
            .collect()
    }

    /// Circle of radius `r` as a single closed arc.
    pub fn circle(center: P2, r: f64) -> Result<Self, GeometryError> {
        Curve::new(vec![Piece::Arc { center, radius: r, start: -PI, sweep: TAU }])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_with_fillets() -> Curve {
        // unit-radius fillets on a 4x4 square centered at the origin
        let r = 1.0;
        let h = 2.0;
        Curve::new(vec![
            Piece::Segment { from: [-h + r, -h], to: [h - r, -h] },
            Piece::Arc { center: [h - r, -h + r], radius: r, start: -PI / 2.0, sweep: PI / 2.0 },
            Piece::Segment { from: [h, -h + r], to: [h, h - r] },
            Piece::Arc { center: [h - r, h - r], radius: r, start: 0.0, sweep: PI / 2.0 },
            Piece::Segment { from: [h - r, h], to: [-h + r, h] },
            Piece::Arc { center: [-h + r, h - r], radius: r, start: PI / 2.0, sweep: PI / 2.0 },
            Piece::Segment { from: [-h, h - r], to: [-h, -h + r] },
            Piece::Arc { center: [-h + r, -h + r], radius: r, start: PI, sweep: PI / 2.0 },
        ])
        .unwrap()
    }

    #[test]
    fn circle_distance_matches_radial_formula() {
        let c = Curve::circle([1.0, -2.0], 3.0).unwrap();
        for &(x, y) in &[(5.0, 1.0), (1.0, -2.5), (-4.0, -2.0), (1.0, 1.0)] {
            let e = c.eval([x, y]);
            let expect = ((x - 1.0f64).hypot(y + 2.0)) - 3.0;
            assert!((e.distance - expect).abs() < 1e-12, "{x},{y}: {} vs {expect}", e.distance);
            assert!((e.curvature - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rounded_square_signs_and_normals() {
        let c = square_with_fillets();
        assert!(c.eval([0.0, 0.0]).distance < 0.0);
        let e = c.eval([3.0, 0.0]);
        assert!((e.distance - 1.0).abs() < 1e-12);
        assert!((e.normal[0] - 1.0).abs() < 1e-12);
        let corner = c.eval([3.0, 3.0]);
        assert!((corner.distance - (2.0f64.sqrt() * 2.0 - 1.0)).abs() < 1e-12);
        assert!((c.signed_area() - (16.0 - 4.0 + PI)).abs() < 1e-2);
    }

    #[test]
    fn elliptic_arc_closest_point_beats_dense_scan() {
        let arc = Piece::EllipticArc { center: [0.0, 0.0], semi_axes: [4.0, 3.0], start: PI, sweep: -PI };
        for &x in &[[0.3, 0.2], [3.5, 1.0], [-1.0, 2.9], [0.0, -0.5], [5.0, 4.0], [-3.9, 0.01]] {
            let c = arc.closest(x);
            let brute = (0..=200_000)
                .map(|i| norm(sub(x, arc.point(i as f64 / 200_000.0))).powi(2))
                .fold(f64::INFINITY, f64::min);
            assert!(c.dist2 <= brute + 1e-9, "{x:?}: {} > {brute}", c.dist2);
        }
    }

    #[test]
    fn ellipse_vertex_curvature() {
        // curvature at the end of the major axis is A/B²... for (A,B)=(2,1): 2
        let e = Piece::EllipticArc { center: [0.0, 0.0], semi_axes: [2.0, 1.0], start: 0.0, sweep: TAU };
        assert!((e.curvature(0.0) - 2.0).abs() < 1e-12);
        assert!((e.curvature(0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_open_or_clockwise_loops() {
        let open = Curve::new(vec![Piece::Segment { from: [0.0, 0.0], to: [1.0, 0.0] }]);
        assert!(open.is_err());
        let cw = Curve::new(vec![Piece::Arc { center: [0.0, 0.0], radius: 1.0, start: 0.0, sweep: -TAU }]);
        assert!(cw.is_err());
    }
}
