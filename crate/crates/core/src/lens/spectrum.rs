use rayon::prelude::*;
use serde::Serialize;

use super::LensError;
use crate::flow::{sojourn_time, trace, PhasePoint, Status, TraceLimits};
use crate::geometry::{orthonormal_complement, Scene};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumOptions {
    /// Largest accepted angle between the exit direction and `θ`.
    pub angular_tolerance: f64,
    /// Impact points per axis of the incoming disc.
    pub impact_samples: usize,
    /// Sojourn times closer than this fall into one bin.
    pub gap: f64,
}

impl SpectrumOptions {
    /// Defaults for a ball of radius `a`: 401 impact points across the disc
    /// in 2D, a 101 × 101 grid in 3D.
    pub fn new(a: f64, dim: usize) -> Self {
        let impact_samples = if dim == 2 { 401 } else { 101 };
        SpectrumOptions { angular_tolerance: 1e-2, impact_samples, gap: 1e-3 * a }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumBin {
    /// Sojourn time of the member whose exit is closest to `θ`.
    pub sojourn: f64,
    pub members: usize,
    /// Angle between that member's exit direction and `θ`.
    pub deviation: f64,
    pub min: f64,
    pub max: f64,
}

/// Sojourn-time bins of rays entering with direction `ω` and leaving
/// within the angular tolerance of `θ`, sorted by sojourn time.
///
/// Incoming rays are spread over the disc perpendicular to `ω` that covers
/// every obstacle.
pub fn scattering_spectrum(
    scene: &Scene,
    omega: &Vec3,
    theta: &Vec3,
    opts: &SpectrumOptions,
    limits: &TraceLimits,
) -> Result<Vec<SpectrumBin>, LensError> {
    for (name, d) in [("omega", omega), ("theta", theta)] {
        if (d.norm() - 1.0).abs() > 1e-9 {
            return Err(LensError::BadSpec(format!("{name} is not a unit vector")));
        }
        if scene.dim() == 2 && d.z != 0.0 {
            return Err(LensError::BadSpec(format!("{name} needs z = 0 in a planar scene")));
        }
    }
    let a = scene.ball_radius();
    let reach = scene.obstacles().iter().map(|o| o.center().norm() + o.bounding_radius()).fold(0.0, f64::max);
    let radius = if scene.obstacles().is_empty() { a } else { reach.min(a) };
    let basis = orthonormal_complement(omega, scene.dim());
    let n = opts.impact_samples.max(1);
    let node = |k: usize| radius * (-1.0 + (2 * k + 1) as f64 / n as f64);
    let mut impacts = Vec::new();
    if scene.dim() == 2 {
        impacts.extend((0..n).map(|k| node(k) * basis[0]));
    } else {
        for i in 0..n {
            for j in 0..n {
                let b = node(i) * basis[0] + node(j) * basis[1];
                if b.norm() < radius {
                    impacts.push(b);
                }
            }
        }
    }
    let mut hits: Vec<(f64, f64)> = impacts
        .par_iter()
        .filter_map(|b| {
            let depth = (a * a - b.norm_squared()).sqrt();
            let entry = PhasePoint { q: b - depth * omega, v: *omega };
            let traj = trace(scene, &entry, limits).ok()?;
            if traj.has_tangent() || !matches!(traj.status, Status::Exited { .. }) {
                return None;
            }
            let (_, out) = crate::flow::omega_theta(&traj).ok()?;
            let deviation = out.dot(theta).clamp(-1.0, 1.0).acos();
            if deviation > opts.angular_tolerance {
                return None;
            }
            Some((sojourn_time(scene, &traj).ok()?, deviation))
        })
        .collect();
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut bins: Vec<SpectrumBin> = Vec::new();
    for (s, dev) in hits {
        match bins.last_mut() {
            Some(bin) if s - bin.max <= opts.gap => {
                bin.members += 1;
                bin.max = s;
                if dev < bin.deviation {
                    bin.deviation = dev;
                    bin.sojourn = s;
                }
            }
            _ => bins.push(SpectrumBin { sojourn: s, members: 1, deviation: dev, min: s, max: s }),
        }
    }
    Ok(bins)
}
