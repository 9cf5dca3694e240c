//! Linearized billiard flow: Jacobi frames, flow differentials, the
//! finite-difference oracle, and the rank and conjugate-point tests.

pub mod fixtures;
mod frame;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

pub use frame::{propagate_free, propagate_reflection, symplectic_form, transfer_matrix_2d, Incidence, JacobiFrame};

use crate::flow::{trace_from, EventKind, FlowError, PhasePoint, Status, TraceLimits, Trajectory};
use crate::geometry::{orthonormal_complement, GeometryError, Scene};
use crate::Vec3;

/// Relative singular value threshold for the regularity test.
pub const RANK_TOLERANCE: f64 = 1e-6;
/// Relative singular value threshold for the conjugate-point test.
pub const CONJUGATE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum VariationError {
    #[error("tangent incidence (⟨v,ν⟩ = {0:e})")]
    TangentIncidence(f64),
    #[error("tangent event at t = {0} before the requested time")]
    TangentOnPath(f64),
    #[error("perturbed orbit changed its itinerary")]
    ItineraryChanged,
    #[error("event indices ({i}, {j}) out of range for {len} events")]
    IndexOutOfRange { i: usize, j: usize, len: usize },
    #[error("time {0} is outside the traced part of the orbit")]
    TimeOutOfRange(f64),
    #[error("orbit was rejected for gliding")]
    Gliding,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Transverse blocks of the flow differential at time `t`.
///
/// Rows are in the transported basis at time `t`, columns in the
/// basis orthogonal to the entry direction. Direction perturbations are
/// angles, so `position_by_direction` has length units.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDifferentials {
    pub t: f64,
    pub position_by_position: DMatrix<f64>,
    pub position_by_direction: DMatrix<f64>,
    pub direction_by_position: DMatrix<f64>,
    pub direction_by_direction: DMatrix<f64>,
}

impl FlowDifferentials {
    pub fn blocks(&self) -> [&DMatrix<f64>; 4] {
        [
            &self.position_by_position,
            &self.position_by_direction,
            &self.direction_by_position,
            &self.direction_by_direction,
        ]
    }
}

fn check_time(traj: &Trajectory, t: f64) -> Result<(), VariationError> {
    if matches!(traj.status, Status::GlidingRejected) {
        return Err(VariationError::Gliding);
    }
    let covered = matches!(traj.status, Status::Exited { .. }) || t <= traj.total_time();
    if !(t >= 0.0) || !covered {
        return Err(VariationError::TimeOutOfRange(t));
    }
    Ok(())
}

/// Propagates `frame` along `traj` from time `from` (just after any event
/// there) to time `to`.
fn transport(scene: &Scene, traj: &Trajectory, mut frame: JacobiFrame, from: f64, to: f64) -> Result<JacobiFrame, VariationError> {
    let mut now = from;
    for e in traj.events.iter().filter(|e| e.t > from && e.t <= to) {
        if e.kind == EventKind::Tangent {
            return Err(VariationError::TangentOnPath(e.t));
        }
        frame = propagate_free(&frame, e.t - now);
        let inc = Incidence::at(&scene.obstacles()[e.obstacle], &e.x, &e.v_in)?;
        frame = propagate_reflection(&frame, &inc)?;
        now = e.t;
    }
    Ok(propagate_free(&frame, to - now))
}

/// Jacobi propagation of the seeds `(I, 0)` and `(0, I)` from `traj.entry`
/// to time `t`.
pub fn differentials_along(scene: &Scene, traj: &Trajectory, t: f64) -> Result<FlowDifferentials, VariationError> {
    check_time(traj, t)?;
    let dim = scene.dim();
    let v = traj.entry.v;
    let beam = transport(scene, traj, JacobiFrame::parallel_beam(v, dim), 0.0, t)?;
    let source = transport(scene, traj, JacobiFrame::point_source(v, dim), 0.0, t)?;
    Ok(FlowDifferentials {
        t,
        position_by_position: beam.a,
        position_by_direction: source.a,
        direction_by_position: beam.b,
        direction_by_direction: source.b,
    })
}

/// Flow differentials of the orbit starting at `entry`, which may be any
/// exterior phase point inside the ball.
pub fn flow_differentials(scene: &Scene, entry: &PhasePoint, t: f64) -> Result<FlowDifferentials, VariationError> {
    let traj = trace_from(scene, entry, &TraceLimits::for_radius(scene.ball_radius()))?;
    differentials_along(scene, &traj, t)
}

/// Basis at time `t`: the entry basis reflected through the event normals.
fn transported_basis(traj: &Trajectory, dim: usize, t: f64) -> Vec<Vec3> {
    let mut frame = JacobiFrame::point_source(traj.entry.v, dim).basis;
    for e in traj.events.iter().filter(|e| e.t <= t && e.kind == EventKind::Transversal) {
        for b in frame.iter_mut() {
            *b -= 2.0 * b.dot(&e.normal) * e.normal;
        }
    }
    frame
}

fn itinerary(traj: &Trajectory) -> Vec<(usize, EventKind)> {
    traj.events.iter().map(|e| (e.obstacle, e.kind)).collect()
}

/// Central differences of traced orbits, the oracle for
/// [`flow_differentials`].
///
/// Positions move by `±h` along the entry basis; directions rotate by the
/// angle `±h/a` towards it.
pub fn fd_flow_jacobian(scene: &Scene, entry: &PhasePoint, t: f64, h: f64) -> Result<FlowDifferentials, VariationError> {
    let a = scene.ball_radius();
    let limits = TraceLimits::for_radius(a);
    let dim = scene.dim();
    let base = trace_from(scene, entry, &limits)?;
    check_time(&base, t)?;
    if let Some(e) = base.events.iter().find(|e| e.t <= t && e.kind == EventKind::Tangent) {
        return Err(VariationError::TangentOnPath(e.t));
    }
    let reference = itinerary(&base);
    let e_in = orthonormal_complement(&entry.v, dim);
    let e_out = transported_basis(&base, dim, t);
    let m = dim - 1;
    let mut out = FlowDifferentials {
        t,
        position_by_position: DMatrix::zeros(m, m),
        position_by_direction: DMatrix::zeros(m, m),
        direction_by_position: DMatrix::zeros(m, m),
        direction_by_direction: DMatrix::zeros(m, m),
    };
    let angle = h / a;
    let probe = |start: PhasePoint| -> Result<PhasePoint, VariationError> {
        let traj = trace_from(scene, &start, &limits)?;
        if itinerary(&traj) != reference || traj.status.label() != base.status.label() {
            return Err(VariationError::ItineraryChanged);
        }
        Ok(traj.state_at(t))
    };
    for (j, e) in e_in.iter().enumerate() {
        let plus = probe(PhasePoint { q: entry.q + h * e, v: entry.v })?;
        let minus = probe(PhasePoint { q: entry.q - h * e, v: entry.v })?;
        let (dq, dv) = ((plus.q - minus.q) / (2.0 * h), (plus.v - minus.v) / (2.0 * h));
        let turn = |s: f64| PhasePoint { q: entry.q, v: s.cos() * entry.v + s.sin() * e };
        let plus = probe(turn(angle))?;
        let minus = probe(turn(-angle))?;
        let (dq_dir, dv_dir) = ((plus.q - minus.q) / (2.0 * angle), (plus.v - minus.v) / (2.0 * angle));
        for (i, f) in e_out.iter().enumerate() {
            out.position_by_position[(i, j)] = f.dot(&dq);
            out.direction_by_position[(i, j)] = f.dot(&dv);
            out.position_by_direction[(i, j)] = f.dot(&dq_dir);
            out.direction_by_direction[(i, j)] = f.dot(&dv_dir);
        }
    }
    Ok(out)
}

/// Singular values of a block and its rank at a tolerance.
///
/// A singular value counts when it exceeds `tolerance · max(σ_max, scale)`.
/// `scale` is the size of the block for a generic orbit, so that
/// `1×1` blocks of 2D scenes can be rank deficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub tolerance: f64,
    pub scale: f64,
}

impl RankReport {
    pub fn new(matrix: &DMatrix<f64>, tolerance: f64, scale: f64) -> Self {
        let mut singular_values: Vec<f64> = matrix.singular_values().iter().copied().collect();
        singular_values.sort_by(|x, y| y.total_cmp(x));
        let top = singular_values.first().copied().unwrap_or(0.0);
        let cut = tolerance * top.max(scale);
        let rank = singular_values.iter().filter(|&&s| s > cut).count();
        RankReport { singular_values, rank, tolerance, scale }
    }

    pub fn smallest(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Result of [`regularity_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regularity {
    pub t: f64,
    /// Direction perturbation to position response.
    pub position_by_direction: RankReport,
    /// Position perturbation to direction response.
    pub direction_by_position: RankReport,
    pub regular: bool,
}

/// Time used by [`regularity_test`] when none is given: exit time plus `a`.
pub fn default_regularity_time(scene: &Scene, traj: &Trajectory) -> Option<f64> {
    match traj.status {
        Status::Exited { total_time, .. } => Some(total_time + scene.ball_radius()),
        _ => None,
    }
}

/// Rank of both differentials at time `t`. An orbit without events is
/// regular: its direction response to position perturbations vanishes
/// identically.
pub fn regularity_test(scene: &Scene, entry: &PhasePoint, t: Option<f64>, tolerance: f64) -> Result<Regularity, VariationError> {
    let traj = trace_from(scene, entry, &TraceLimits::for_radius(scene.ball_radius()))?;
    let t = match t {
        Some(t) => t,
        None => default_regularity_time(scene, &traj).ok_or(VariationError::TimeOutOfRange(f64::INFINITY))?,
    };
    let d = differentials_along(scene, &traj, t)?;
    let m = scene.dim() - 1;
    let pos = RankReport::new(&d.position_by_direction, tolerance, t);
    let dir = RankReport::new(&d.direction_by_position, tolerance, 1.0 / scene.ball_radius());
    let regular = pos.rank == m && (traj.events.is_empty() || dir.rank == m);
    Ok(Regularity { t, position_by_direction: pos, direction_by_position: dir, regular })
}

/// Result of [`conjugate_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conjugacy {
    pub conjugate: bool,
    pub smallest_singular_value: f64,
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
    /// Path length between the two boundary points.
    pub scale: f64,
}

/// Differential of the map from directions leaving event `i` to arrival
/// points on the boundary near event `j`, and whether it is singular.
pub fn conjugate_test(scene: &Scene, traj: &Trajectory, i: usize, j: usize, tolerance: f64) -> Result<Conjugacy, VariationError> {
    let len = traj.events.len();
    if i >= j || j >= len {
        return Err(VariationError::IndexOutOfRange { i, j, len });
    }
    let (ei, ej) = (&traj.events[i], &traj.events[j]);
    for e in [ei, ej] {
        if e.kind == EventKind::Tangent {
            return Err(VariationError::TangentIncidence(e.v_in.dot(&e.normal)));
        }
    }
    let dim = scene.dim();
    let seed = JacobiFrame::point_source(ei.v_out, dim);
    // stop just before the reflection at x_j
    let before_j = traj.events[j - 1].t.max(ei.t);
    let frame = transport(scene, traj, seed, ei.t, before_j)?;
    let frame = propagate_free(&frame, ej.t - before_j);
    let nu = ej.normal;
    let c = ej.v_in.dot(&nu);
    let tangent = orthonormal_complement(&nu, dim);
    let m = dim - 1;
    let mut g = DMatrix::zeros(m, m);
    for k in 0..m {
        let dq = frame.position_column(k);
        let dx = dq - (dq.dot(&nu) / c) * ej.v_in;
        for (r, e) in tangent.iter().enumerate() {
            g[(r, k)] = e.dot(&dx);
        }
    }
    let length = ej.t - ei.t;
    let report = RankReport::new(&g, tolerance, length);
    let smallest = report.smallest();
    Ok(Conjugacy {
        conjugate: report.rank < m,
        smallest_singular_value: smallest,
        singular_values: report.singular_values,
        tolerance,
        scale: length,
    })
}
