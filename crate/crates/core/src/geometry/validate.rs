use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use super::{surface_frame, GeometryError, Scene, GRADIENT_FLOOR};
use crate::Vec3;

/// First broken scene invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    DegenerateParameters { obstacle: usize, reason: String },
    Containment { obstacle: usize, extent: f64, ball_radius: f64 },
    Overlap { first: usize, second: usize, gap: f64 },
    SingularGradient { obstacle: usize, norm: f64 },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegenerateParameters { obstacle, reason } => write!(f, "obstacle {obstacle}: {reason}"),
            Violation::Containment { obstacle, extent, ball_radius } => {
                write!(f, "containment: obstacle {obstacle} reaches radius {extent} but the ball radius is {ball_radius}")
            }
            Violation::Overlap { first, second, gap } => {
                write!(f, "overlap: obstacles {first} and {second} are not disjoint (gap {gap:e})")
            }
            Violation::SingularGradient { obstacle, norm } => {
                write!(f, "obstacle {obstacle}: boundary gradient norm {norm:e} below the floor")
            }
            Violation::Disconnected { components } => write!(f, "exterior has {components} connected components"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// Boundary samples per obstacle.
    pub samples: usize,
    /// Run the flood-fill connectivity check.
    pub connectivity: bool,
    /// Grid cells per ball radius for the flood fill, 2D and 3D.
    pub grid_2d: usize,
    pub grid_3d: usize,
    /// Curvature threshold for the flatness flag, in units of `1/a`.
    pub flatness: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { samples: 1024, connectivity: true, grid_2d: 200, grid_3d: 50, flatness: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstacleSummary {
    pub index: usize,
    pub kind: String,
    /// Largest `|x|` over boundary samples.
    pub extent: f64,
    pub min_gradient_norm: f64,
    pub min_curvature: f64,
    pub max_curvature: f64,
    /// Some sampled point has all principal curvatures below the threshold.
    pub flat: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairGap {
    pub first: usize,
    pub second: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub scene_hash: String,
    pub dimension: usize,
    pub ball_radius: f64,
    pub passed: bool,
    pub obstacles: Vec<ObstacleSummary>,
    pub gaps: Vec<PairGap>,
    pub min_gap: Option<f64>,
    pub max_extent: f64,
    pub min_gradient_norm: Option<f64>,
    pub min_principal_curvature: Option<f64>,
    pub max_principal_curvature: Option<f64>,
    pub flatness_threshold: f64,
    pub flatness_flag: bool,
    /// A flat patch is not convex; the finite-order class-K proxy fails.
    pub class_k_warning: bool,
    pub connected: Option<bool>,
    pub violations: Vec<Violation>,
}

/// Collects every diagnostic and every violated invariant.
pub fn inspect_scene(scene: &Scene, opts: &ValidationOptions) -> ValidationReport {
    let a = scene.ball_radius();
    let threshold = opts.flatness / a;
    let mut violations = Vec::new();
    let mut summaries = Vec::new();
    let mut clouds: Vec<Vec<Vec3>> = Vec::new();
    let mut degenerate = false;
    let mut class_k_warning = false;

    for (idx, o) in scene.obstacles().iter().enumerate() {
        if let Err(reason) = o.check_parameters() {
            violations.push(Violation::DegenerateParameters { obstacle: idx, reason });
            degenerate = true;
            clouds.push(Vec::new());
            continue;
        }
        let pts = o.boundary_samples(opts.samples);
        let extent = pts.iter().map(|p| p.norm()).fold(0.0, f64::max);
        if extent >= a {
            violations.push(Violation::Containment { obstacle: idx, extent, ball_radius: a });
        }
        let mut min_g = f64::INFINITY;
        let (mut kmin, mut kmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut flat = false;
        for p in &pts {
            let g = o.gradient(p).norm();
            min_g = min_g.min(g);
            if g < GRADIENT_FLOOR {
                continue;
            }
            if let Ok(frame) = surface_frame(o, p) {
                let k = frame.principal_curvatures();
                kmin = kmin.min(k[0]);
                kmax = kmax.max(*k.last().unwrap());
                if k.iter().all(|x| x.abs() <= threshold) {
                    flat = true;
                    if k.iter().any(|&x| x < -1e-12 / a) {
                        class_k_warning = true;
                    }
                }
            }
        }
        if min_g < GRADIENT_FLOOR {
            violations.push(Violation::SingularGradient { obstacle: idx, norm: min_g });
        }
        summaries.push(ObstacleSummary {
            index: idx,
            kind: o.kind().to_string(),
            extent,
            min_gradient_norm: min_g,
            min_curvature: kmin,
            max_curvature: kmax,
            flat,
        });
        clouds.push(pts);
    }

    let obstacles = scene.obstacles();
    let mut gaps = Vec::new();
    for i in 0..obstacles.len() {
        for j in i + 1..obstacles.len() {
            if clouds[i].is_empty() || clouds[j].is_empty() {
                continue;
            }
            let interpenetrate = clouds[j].iter().any(|p| obstacles[i].value(p) <= 0.0)
                || clouds[i].iter().any(|p| obstacles[j].value(p) <= 0.0);
            let gap = if interpenetrate { 0.0 } else { cloud_distance(&clouds[i], &clouds[j]) };
            if gap <= 1e-9 * a {
                violations.push(Violation::Overlap { first: i, second: j, gap });
            }
            gaps.push(PairGap { first: i, second: j, gap });
        }
    }

    let connected = if opts.connectivity && !degenerate && !obstacles.is_empty() {
        let components = exterior_components(scene, if scene.dim() == 2 { opts.grid_2d } else { opts.grid_3d });
        if components > 1 {
            violations.push(Violation::Disconnected { components });
        }
        Some(components <= 1)
    } else {
        None
    };

    let fold = |f: fn(&ObstacleSummary) -> f64, min: bool| {
        summaries.iter().map(f).filter(|x| x.is_finite()).reduce(if min { f64::min } else { f64::max })
    };
    ValidationReport {
        name: scene.name().to_string(),
        scene_hash: scene.hash_hex(),
        dimension: scene.dim(),
        ball_radius: a,
        passed: violations.is_empty(),
        min_gap: gaps.iter().map(|g| g.gap).reduce(f64::min),
        max_extent: summaries.iter().map(|s| s.extent).fold(0.0, f64::max),
        min_gradient_norm: fold(|s| s.min_gradient_norm, true),
        min_principal_curvature: fold(|s| s.min_curvature, true),
        max_principal_curvature: fold(|s| s.max_curvature, false),
        flatness_threshold: threshold,
        flatness_flag: summaries.iter().any(|s| s.flat),
        class_k_warning,
        obstacles: summaries,
        gaps,
        connected,
        violations,
    }
}

/// Validates a scene, failing on the first violated invariant.
pub fn validate_scene(scene: &Scene, opts: &ValidationOptions) -> Result<ValidationReport, GeometryError> {
    let report = inspect_scene(scene, opts);
    match report.violations.first() {
        Some(v) => Err(GeometryError::ValidationFailed(v.clone())),
        None => Ok(report),
    }
}

fn cloud_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    let mut best = f64::INFINITY;
    for p in a {
        for q in b {
            best = best.min((p - q).norm_squared());
        }
    }
    best.sqrt()
}

/// Number of 4/6-connected components of free grid cells inside the ball.
fn exterior_components(scene: &Scene, per_radius: usize) -> usize {
    let a = scene.ball_radius();
    let n = 2 * per_radius;
    let h = a / per_radius as f64;
    let dim = scene.dim();
    let nz = if dim == 2 { 1 } else { n };
    let coord = |i: usize| -a + (i as f64 + 0.5) * h;
    let index = |i: usize, j: usize, k: usize| (k * n + j) * n + i;
    let obstacles = scene.obstacles();
    let radii: Vec<f64> = obstacles.iter().map(|o| o.bounding_radius()).collect();

    let mut free = vec![false; n * n * nz];
    for k in 0..nz {
        for j in 0..n {
            for i in 0..n {
                let x = Vec3::new(coord(i), coord(j), if dim == 2 { 0.0 } else { coord(k) });
                if x.norm() >= a {
                    continue;
                }
                free[index(i, j, k)] = obstacles
                    .iter()
                    .zip(&radii)
                    .all(|(o, r)| (x - o.center()).norm() > r + 1e-12 || o.value(&x) > 0.0);
            }
        }
    }

    let mut seen = vec![false; free.len()];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..free.len() {
        if !free[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            let (i, j, k) = (c % n, (c / n) % n, c / (n * n));
            let mut visit = |ii: usize, jj: usize, kk: usize| {
                let id = index(ii, jj, kk);
                if free[id] && !seen[id] {
                    seen[id] = true;
                    queue.push_back(id);
                }
            };
            if i > 0 {
                visit(i - 1, j, k);
            }
            if i + 1 < n {
                visit(i + 1, j, k);
            }
            if j > 0 {
                visit(i, j - 1, k);
            }
            if j + 1 < n {
                visit(i, j + 1, k);
            }
            if k > 0 {
                visit(i, j, k - 1);
            }
            if k + 1 < nz {
                visit(i, j, k + 1);
            }
        }
    }
    components
}
