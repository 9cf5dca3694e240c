use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{LensTable, SampleStatus};
use super::LensError;
use crate::geometry::Scene;
use crate::Vec3;

/// Default time tolerance, relative to the ball radius.
pub const TIME_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Indistinguishable,
    Distinguishable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub samples: usize,
    /// Samples that took part in the comparison (neither side tangent
    /// flagged, gliding or failed).
    pub matched: usize,
    pub both_trapped: usize,
    pub status_mismatches: usize,
    /// Matched samples with a travelling time on both sides and different
    /// numbers of reflections.
    pub reflection_mismatches: usize,
    /// Samples with a travelling time on both sides.
    pub timed: usize,
    pub max_abs_dt: f64,
    pub mean_abs_dt: f64,
    pub exceed_count: usize,
    pub exceed_fraction: f64,
    pub excluded: usize,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Compares two tables sample by sample.
pub fn compare_lens(k: &LensTable, l: &LensTable, tolerance: f64) -> Result<ComparisonReport, LensError> {
    if k.spec != l.spec || k.dim != l.dim || k.samples.len() != l.samples.len() {
        return Err(LensError::SpecMismatch(format!(
            "{} ({}D, {} samples) vs {} ({}D, {} samples)",
            k.spec.mode,
            k.dim,
            k.samples.len(),
            l.spec.mode,
            l.dim,
            l.samples.len()
        )));
    }
    let mut r = ComparisonReport {
        samples: k.samples.len(),
        matched: 0,
        both_trapped: 0,
        status_mismatches: 0,
        reflection_mismatches: 0,
        timed: 0,
        max_abs_dt: 0.0,
        mean_abs_dt: 0.0,
        exceed_count: 0,
        exceed_fraction: 0.0,
        excluded: 0,
        tolerance,
        verdict: Verdict::Indistinguishable,
    };
    let mut sum = 0.0;
    let excluded = |s: SampleStatus| matches!(s, SampleStatus::TangentFlagged | SampleStatus::GlidingRejected | SampleStatus::Failed);
    for (x, y) in k.samples.iter().zip(&l.samples) {
        if x.index != y.index || x.params != y.params {
            return Err(LensError::SpecMismatch(format!("sample {} has different entry parameters", x.index)));
        }
        if excluded(x.status) || excluded(y.status) {
            r.excluded += 1;
            continue;
        }
        r.matched += 1;
        match (x.status, y.status, x.t, y.t) {
            (SampleStatus::Trapped, SampleStatus::Trapped, ..) => r.both_trapped += 1,
            (sx, sy, Some(tx), Some(ty)) if sx.has_time() && sy.has_time() => {
                if sx != sy {
                    r.status_mismatches += 1;
                }
                if x.reflections != y.reflections {
                    r.reflection_mismatches += 1;
                }
                let dt = (tx - ty).abs();
                r.timed += 1;
                sum += dt;
                r.max_abs_dt = r.max_abs_dt.max(dt);
                if dt > tolerance {
                    r.exceed_count += 1;
                }
            }
            _ => r.status_mismatches += 1,
        }
    }
    if r.timed > 0 {
        r.mean_abs_dt = sum / r.timed as f64;
        r.exceed_fraction = r.exceed_count as f64 / r.timed as f64;
    }
    if r.exceed_count > 0 || r.status_mismatches > 0 {
        r.verdict = Verdict::Distinguishable;
    }
    Ok(r)
}

/// Symmetric Hausdorff distance between the boundary samples of two scenes,
/// with `samples` points per obstacle.
pub fn boundary_distance(k: &Scene, l: &Scene, samples: usize) -> Result<f64, LensError> {
    if k.dim() != l.dim() {
        return Err(LensError::SpecMismatch(format!("dimensions {} and {}", k.dim(), l.dim())));
    }
    let cloud = |s: &Scene| -> Vec<Vec3> { s.obstacles().iter().flat_map(|o| o.boundary_samples(samples)).collect() };
    let (a, b) = (cloud(k), cloud(l));
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => return Ok(f64::INFINITY),
        _ => {}
    }
    Ok(directed(&a, &b).max(directed(&b, &a)))
}

fn directed(from: &[Vec3], to: &[Vec3]) -> f64 {
    from.par_iter()
        .map(|p| to.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
        .sqrt()
}
