use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::sample::SampleSpec;
use super::table::{build_lens_table, SampleStatus};
use super::LensError;
use crate::flow::{trace_from, PhasePoint, Status, TraceLimits};
use crate::geometry::{Rect, Scene};
use crate::Vec3;

/// Trapped fraction at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrappedLevel {
    pub spec: String,
    pub samples: usize,
    pub trapped: usize,
    pub fraction: f64,
    /// Heuristic: radius of the largest ball in normalized sample
    /// coordinates, centred at a sample, that holds only trapped samples.
    /// Zero when nothing is trapped.
    pub cluster_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrappedEstimate {
    pub levels: Vec<TrappedLevel>,
    /// Fractions never increase along the ladder.
    pub non_increasing: bool,
}

impl TrappedEstimate {
    fn new(levels: Vec<TrappedLevel>) -> Self {
        let non_increasing = levels.windows(2).all(|w| w[1].fraction <= w[0].fraction);
        TrappedEstimate { levels, non_increasing }
    }
}

/// Distance in the unit cube with the listed coordinates periodic.
fn distance(x: &[f64], y: &[f64], periodic: &[bool]) -> f64 {
    x.iter()
        .zip(y)
        .zip(periodic)
        .map(|((a, b), &p)| {
            let d = (a - b).abs();
            let d = if p { d.min(1.0 - d) } else { d };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn cluster_radius(points: &[Vec<f64>], trapped: &[bool], periodic: &[bool]) -> f64 {
    let free: Vec<&Vec<f64>> = points.iter().zip(trapped).filter(|(_, &t)| !t).map(|(p, _)| p).collect();
    let inner: Vec<&Vec<f64>> = points.iter().zip(trapped).filter(|(_, &t)| t).map(|(p, _)| p).collect();
    if inner.is_empty() {
        return 0.0;
    }
    if free.is_empty() {
        return 1.0;
    }
    inner
        .par_iter()
        .map(|p| free.iter().map(|q| distance(p, q, periodic)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Entry parameters mapped to the unit cube, with their periodicity.
fn normalize(params: &[f64]) -> (Vec<f64>, Vec<bool>) {
    match *params {
        [phi, psi] => (vec![phi / (2.0 * PI), psi / PI + 0.5], vec![true, false]),
        [polar, azimuth, alpha, beta] => (
            vec![0.5 * (1.0 - polar.cos()), azimuth / (2.0 * PI), 1.0 - alpha.cos(), beta / (2.0 * PI)],
            vec![false, true, false, true],
        ),
        _ => (params.to_vec(), vec![false; params.len()]),
    }
}

fn check_ladder(counts: &[usize]) -> Result<(), LensError> {
    if counts.len() < 3 || counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LensError::BadSpec(format!("need at least 3 increasing resolutions, got {counts:?}")));
    }
    Ok(())
}

/// Trapped fractions of `S*_+(S0)` over a ladder of sampling specs.
pub fn estimate_trapped(scene: &Scene, ladder: &[SampleSpec]) -> Result<TrappedEstimate, LensError> {
    check_ladder(&ladder.iter().map(SampleSpec::count).collect::<Vec<_>>())?;
    let levels = ladder
        .iter()
        .map(|spec| {
            let table = build_lens_table(scene, spec);
            let trapped: Vec<bool> = table.samples.iter().map(|s| s.status == SampleStatus::Trapped).collect();
            let count = trapped.iter().filter(|&&t| t).count();
            let mut periodic = Vec::new();
            let points: Vec<Vec<f64>> = table
                .samples
                .iter()
                .map(|s| {
                    let (p, per) = normalize(&s.params);
                    periodic = per;
                    p
                })
                .collect();
            TrappedLevel {
                spec: spec.mode.to_string(),
                samples: table.samples.len(),
                trapped: count,
                fraction: count as f64 / table.samples.len().max(1) as f64,
                cluster_radius: cluster_radius(&points, &trapped, &periodic),
            }
        })
        .collect();
    Ok(TrappedEstimate::new(levels))
}

/// Resolution of a phase-space sample inside planar boxes: a
/// `per_side × per_side` grid of positions in each box times `directions`
/// equally spaced directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionGrid {
    pub per_side: usize,
    pub directions: usize,
}

/// Trapped fractions of phase points started inside `boxes` (2D scenes).
/// Positions inside an obstacle are skipped.
pub fn estimate_trapped_region(scene: &Scene, boxes: &[Rect], ladder: &[RegionGrid], limits: &TraceLimits) -> Result<TrappedEstimate, LensError> {
    if scene.dim() != 2 {
        return Err(LensError::BadSpec("region sampling needs a planar scene".into()));
    }
    check_ladder(&ladder.iter().map(|g| g.per_side * g.per_side * g.directions).collect::<Vec<_>>())?;
    let mut levels = Vec::new();
    for g in ladder {
        let mut starts = Vec::new();
        for (bi, &([x0, x1], [y0, y1])) in boxes.iter().enumerate() {
            for i in 0..g.per_side {
                for j in 0..g.per_side {
                    let u = (i as f64 + 0.5) / g.per_side as f64;
                    let w = (j as f64 + 0.5) / g.per_side as f64;
                    let q = Vec3::new(x0 + u * (x1 - x0), y0 + w * (y1 - y0), 0.0);
                    if scene.obstacles().iter().any(|o| o.value(&q) <= 0.0) {
                        continue;
                    }
                    for k in 0..g.directions {
                        let s = (k as f64 + 0.5) / g.directions as f64;
                        let ang = 2.0 * PI * s;
                        // boxes are laid side by side along the first axis
                        let coords = vec![(bi as f64 + u) / boxes.len() as f64, w, s];
                        starts.push((coords, PhasePoint::new(q, Vec3::new(ang.cos(), ang.sin(), 0.0))));
                    }
                }
            }
        }
        let trapped: Vec<bool> = starts
            .par_iter()
            .map(|(_, p)| matches!(trace_from(scene, p, limits).map(|t| t.status), Ok(Status::Trapped(_))))
            .collect();
        let points: Vec<Vec<f64>> = starts.into_iter().map(|(c, _)| c).collect();
        let count = trapped.iter().filter(|&&t| t).count();
        levels.push(TrappedLevel {
            spec: format!("region:{}x{}x{}", g.per_side, g.per_side, g.directions),
            samples: points.len(),
            trapped: count,
            fraction: count as f64 / points.len().max(1) as f64,
            cluster_radius: cluster_radius(&points, &trapped, &[false, false, true]),
        });
    }
    Ok(TrappedEstimate::new(levels))
}
