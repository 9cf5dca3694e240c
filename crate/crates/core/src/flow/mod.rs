//! Exterior billiard flow along simply reflecting rays.
//!
//! Rays move at unit speed inside the ball, reflect specularly on obstacle
//! boundaries and continue straight through tangencies. Intersections are
//! found by marching the implicit function along the ray, bracketing sign
//! changes and dips, and polishing with safeguarded Newton steps.

mod hit;

use serde_json::{json, Map, Value};
use thiserror::Error;

pub use hit::{first_hit, first_hit_with, Hit, HitKind};

use crate::geometry::Scene;
use crate::io;
use crate::Vec3;

/// `|⟨v, ν⟩|` at or below which an encounter counts as tangent.
pub const TANGENCY_THRESHOLD: f64 = 1e-7;
/// Re-hit guard after an event, in units of the ball radius.
pub const REHIT_GUARD: f64 = 1e-9;
/// Marching step is `a / MARCH_DIVISIONS`.
pub const MARCH_DIVISIONS: f64 = 1024.0;
/// Root polish target `|F| / |∇F|`, in units of the ball radius.
pub const POLISH_TOLERANCE: f64 = 1e-12;
pub const POLISH_MAX_ITERATIONS: usize = 200;
/// Tolerance on `|q| − a` for points of `S0`, relative to `a`.
pub const SPHERE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("root polish did not converge on obstacle {obstacle} near t = {t}")]
    RootPolishFailed { obstacle: usize, t: f64 },
    #[error("invalid entry: {0}")]
    InvalidEntry(String),
    #[error("trajectory did not scatter")]
    NotScattered,
    #[error("direction is not incoming at the boundary (⟨v,ν⟩ = {0:e})")]
    TangentIncidence(f64),
}

/// Position and unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: Vec3,
    pub v: Vec3,
}

impl PhasePoint {
    /// Normalizes `v`.
    pub fn new(q: Vec3, v: Vec3) -> Self {
        PhasePoint { q, v: v.normalize() }
    }

    /// `{"q": [..], "v": [..]}` with `dim` components each.
    pub fn to_json(&self, dim: usize) -> Value {
        json!({ "q": trim(&self.q, dim), "v": trim(&self.v, dim) })
    }
}

pub(crate) fn trim(x: &Vec3, dim: usize) -> Vec<f64> {
    x.as_slice()[..dim].to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Transversal,
    Tangent,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Transversal => "transversal",
            EventKind::Tangent => "tangent",
        }
    }
}

/// One encounter with an obstacle boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Time since entry.
    pub t: f64,
    pub x: Vec3,
    pub obstacle: usize,
    pub kind: EventKind,
    pub v_in: Vec3,
    pub v_out: Vec3,
    /// Unit normal pointing out of the obstacle.
    pub normal: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrapReason {
    MaxReflections,
    MaxTime,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Exited { exit: PhasePoint, total_time: f64 },
    Trapped(TrapReason),
    GlidingRejected,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Exited { .. } => "exited",
            Status::Trapped(_) => "trapped",
            Status::GlidingRejected => "gliding_rejected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceLimits {
    pub max_reflections: usize,
    pub max_time: f64,
}

impl TraceLimits {
    /// `N_max = 10000`, `T_max = 1000 a`.
    pub fn for_radius(a: f64) -> Self {
        TraceLimits { max_reflections: 10_000, max_time: 1000.0 * a }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub entry: PhasePoint,
    pub events: Vec<Event>,
    pub status: Status,
    /// Lengths of the straight pieces, in order.
    pub segments: Vec<f64>,
}

impl Trajectory {
    pub fn total_time(&self) -> f64 {
        self.segments.iter().sum()
    }

    pub fn exit(&self) -> Option<PhasePoint> {
        match self.status {
            Status::Exited { exit, .. } => Some(exit),
            _ => None,
        }
    }

    pub fn has_tangent(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::Tangent)
    }

    /// Entry point, event points and, if the orbit left the ball, the exit.
    pub fn polyline(&self) -> Vec<Vec3> {
        let mut pts = vec![self.entry.q];
        pts.extend(self.events.iter().map(|e| e.x));
        if let Some(exit) = self.exit() {
            pts.push(exit.q);
        } else if let (Some(last), Some(seg)) = (self.events.last(), self.segments.last()) {
            if self.segments.len() > self.events.len() {
                pts.push(last.x + *seg * last.v_out);
            }
        }
        pts
    }

    /// Phase point at time `t` after entry, continuing straight past the exit.
    pub fn state_at(&self, t: f64) -> PhasePoint {
        let mut last = self.entry;
        let mut t0 = 0.0;
        for e in &self.events {
            if e.t > t {
                break;
            }
            last = PhasePoint { q: e.x, v: e.v_out };
            t0 = e.t;
        }
        PhasePoint { q: last.q + (t - t0) * last.v, v: last.v }
    }

    /// Header line followed by one line per event.
    pub fn to_jsonl(&self, dim: usize, mut header: Map<String, Value>) -> String {
        header.insert("entry".into(), self.entry.to_json(dim));
        header.insert("status".into(), json!(self.status.label()));
        header.insert("events".into(), json!(self.events.len()));
        header.insert("total_time".into(), json!(self.total_time()));
        match &self.status {
            Status::Exited { exit, .. } => {
                header.insert("exit".into(), exit.to_json(dim));
            }
            Status::Trapped(r) => {
                let reason = match r {
                    TrapReason::MaxReflections => "max_reflections",
                    TrapReason::MaxTime => "max_time",
                };
                header.insert("cutoff".into(), json!(reason));
            }
            Status::GlidingRejected => {}
        }
        let mut out = io::to_json_string(&Value::Object(header)).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            let line = json!({
                "t": e.t,
                "x": trim(&e.x, dim),
                "obstacle": e.obstacle,
                "type": e.kind.as_str(),
                "v_in": trim(&e.v_in, dim),
                "v_out": trim(&e.v_out, dim),
            });
            out.push_str(&io::to_json_string(&line).expect("event serializes"));
            out.push('\n');
        }
        out
    }
}

/// Specular reflection `v − 2⟨v,ν⟩ν` of an incoming direction.
pub fn reflect(v: &Vec3, nu: &Vec3) -> Result<Vec3, FlowError> {
    let c = v.dot(nu);
    if !(c < 0.0) {
        return Err(FlowError::TangentIncidence(c));
    }
    Ok((v - 2.0 * c * nu).normalize())
}

/// Checks that `entry` lies on `S0` and points into the ball.
pub fn check_entry(scene: &Scene, entry: &PhasePoint) -> Result<(), FlowError> {
    let a = scene.ball_radius();
    let r = entry.q.norm();
    if (r - a).abs() > SPHERE_TOLERANCE * a {
        return Err(FlowError::InvalidEntry(format!("|q| = {r} is not on the sphere of radius {a}")));
    }
    if ((entry.v.norm() - 1.0).abs()) > 1e-12 {
        return Err(FlowError::InvalidEntry("direction is not a unit vector".into()));
    }
    if scene.dim() == 2 && (entry.q.z != 0.0 || entry.v.z != 0.0) {
        return Err(FlowError::InvalidEntry("two-dimensional entries need z = 0".into()));
    }
    if entry.v.dot(&scene.inward_normal(&entry.q)) < -1e-12 {
        return Err(FlowError::InvalidEntry("direction points out of the ball".into()));
    }
    Ok(())
}

/// Traces an entry of `S*_+(S0)`.
pub fn trace(scene: &Scene, entry: &PhasePoint, limits: &TraceLimits) -> Result<Trajectory, FlowError> {
    check_entry(scene, entry)?;
    if entry.v.dot(&scene.inward_normal(&entry.q)) <= 0.0 {
        // tangent to S0: the orbit never enters
        return Ok(Trajectory {
            entry: *entry,
            events: Vec::new(),
            status: Status::Exited { exit: *entry, total_time: 0.0 },
            segments: Vec::new(),
        });
    }
    trace_from(scene, entry, limits)
}

/// Traces from any exterior point inside the ball.
pub fn trace_from(scene: &Scene, start: &PhasePoint, limits: &TraceLimits) -> Result<Trajectory, FlowError> {
    let a = scene.ball_radius();
    let glide = 2.0 * a / MARCH_DIVISIONS;
    let mut q = start.q;
    let mut v = start.v;
    let mut time = 0.0;
    let mut events: Vec<Event> = Vec::new();
    let mut segments = Vec::new();
    let mut from_event = false;
    loop {
        let t_exit = scene.ball_exit_time(&q, &v);
        let budget = limits.max_time - time;
        let advance = t_exit.min(budget);
        let guard = if from_event { REHIT_GUARD * a } else { 0.0 };
        let hit = match first_hit_with(scene, &PhasePoint { q, v }, advance, guard)? {
            Some(h) => h,
            None => {
                if t_exit <= budget {
                    segments.push(t_exit);
                    time += t_exit;
                    let mut exit = q + t_exit * v;
                    exit *= a / exit.norm();
                    return Ok(Trajectory {
                        entry: *start,
                        events,
                        status: Status::Exited { exit: PhasePoint { q: exit, v }, total_time: time },
                        segments,
                    });
                }
                segments.push(budget.max(0.0));
                return Ok(Trajectory { entry: *start, events, status: Status::Trapped(TrapReason::MaxTime), segments });
            }
        };
        if hit.kind == HitKind::Submerged {
            return Ok(Trajectory { entry: *start, events, status: Status::GlidingRejected, segments });
        }
        segments.push(hit.t);
        time += hit.t;
        let o = &scene.obstacles()[hit.obstacle];
        let nu = o.gradient(&hit.point).normalize();
        let c = v.dot(&nu);
        let (kind, v_out) = if c.abs() <= TANGENCY_THRESHOLD || hit.kind == HitKind::Touch {
            if let Some(prev) = events.last() {
                if prev.kind == EventKind::Tangent && prev.obstacle == hit.obstacle && (prev.x - hit.point).norm() <= glide {
                    return Ok(Trajectory { entry: *start, events, status: Status::GlidingRejected, segments });
                }
            }
            (EventKind::Tangent, v)
        } else if c < 0.0 {
            (EventKind::Transversal, reflect(&v, &nu)?)
        } else {
            // the ray reached the boundary from inside the obstacle
            return Ok(Trajectory { entry: *start, events, status: Status::GlidingRejected, segments });
        };
        events.push(Event { t: time, x: hit.point, obstacle: hit.obstacle, kind, v_in: v, v_out, normal: nu });
        if events.len() > limits.max_reflections {
            return Ok(Trajectory { entry: *start, events, status: Status::Trapped(TrapReason::MaxReflections), segments });
        }
        q = hit.point;
        v = v_out;
        from_event = true;
    }
}

/// Travelling time `t_K` of an entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TravelTime {
    Time(f64),
    Trapped,
    GlidingRejected,
}

pub fn travelling_time(scene: &Scene, entry: &PhasePoint, limits: &TraceLimits) -> Result<TravelTime, FlowError> {
    let traj = trace(scene, entry, limits)?;
    Ok(match traj.status {
        Status::Exited { total_time, .. } => TravelTime::Time(total_time),
        Status::Trapped(_) => TravelTime::Trapped,
        Status::GlidingRejected => TravelTime::GlidingRejected,
    })
}

/// Incoming and outgoing directions of a scattered trajectory.
pub fn omega_theta(traj: &Trajectory) -> Result<(Vec3, Vec3), FlowError> {
    let exit = traj.exit().ok_or(FlowError::NotScattered)?;
    Ok((traj.entry.v, exit.v))
}

/// Sojourn time `T'_γ − 2a`, measured between the hyperplanes `Z_ω` and
/// `Z_{−θ}` tangent to `S0`.
pub fn sojourn_time(scene: &Scene, traj: &Trajectory) -> Result<f64, FlowError> {
    let (omega, theta) = omega_theta(traj)?;
    let exit = traj.exit().unwrap();
    let a = scene.ball_radius();
    // Z_ω = {⟨x,ω⟩ = −a}, Z_{−θ} = {⟨x,θ⟩ = a}
    let before = traj.entry.q.dot(&omega) + a;
    let after = a - exit.q.dot(&theta);
    Ok(before + traj.total_time() + after - 2.0 * a)
}

pub fn reflection_count(traj: &Trajectory) -> Result<usize, FlowError> {
    traj.exit().ok_or(FlowError::NotScattered)?;
    Ok(traj.events.len())
}
