use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::sample::{sample_phase_sphere, Entry, SampleSpec};
use super::LensError;
use crate::flow::{sojourn_time, trace, Status};
use crate::geometry::Scene;
use crate::{io, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    /// Left the ball without touching `∂K`.
    Free,
    /// Left the ball after transversal reflections only.
    Scattered,
    Trapped,
    GlidingRejected,
    /// Some event was tangent.
    TangentFlagged,
    /// Tracing failed numerically.
    Failed,
}

impl SampleStatus {
    pub fn has_time(self) -> bool {
        matches!(self, SampleStatus::Free | SampleStatus::Scattered)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SampleStatus::Free => "free",
            SampleStatus::Scattered => "scattered",
            SampleStatus::Trapped => "trapped",
            SampleStatus::GlidingRejected => "gliding_rejected",
            SampleStatus::TangentFlagged => "tangent_flagged",
            SampleStatus::Failed => "failed",
        }
    }
}

/// Outcome of tracing one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensSample {
    pub index: usize,
    pub params: Vec<f64>,
    pub status: SampleStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub reflections: usize,
    /// Exit direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sojourn: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LensSummary {
    pub free: usize,
    pub scattered: usize,
    pub trapped: usize,
    pub gliding_rejected: usize,
    pub tangent_flagged: usize,
    pub failed: usize,
    pub max_reflections: usize,
    /// Mean travelling time over free and scattered samples.
    pub mean_t: Option<f64>,
}

impl LensSummary {
    pub fn of(samples: &[LensSample]) -> Self {
        let mut s = LensSummary::default();
        let (mut sum, mut n) = (0.0, 0usize);
        for x in samples {
            match x.status {
                SampleStatus::Free => s.free += 1,
                SampleStatus::Scattered => s.scattered += 1,
                SampleStatus::Trapped => s.trapped += 1,
                SampleStatus::GlidingRejected => s.gliding_rejected += 1,
                SampleStatus::TangentFlagged => s.tangent_flagged += 1,
                SampleStatus::Failed => s.failed += 1,
            }
            s.max_reflections = s.max_reflections.max(x.reflections);
            if let Some(t) = x.t {
                sum += t;
                n += 1;
            }
        }
        s.mean_t = (n > 0).then(|| sum / n as f64);
        s
    }
}

/// Travelling-time data of a scene over a sample of `S*_+(S0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LensTable {
    pub scene_hash: String,
    pub dim: usize,
    pub ball_radius: f64,
    pub spec: SampleSpec,
    pub samples: Vec<LensSample>,
}

fn trim(x: &Vec3, dim: usize) -> Vec<f64> {
    x.as_slice()[..dim].to_vec()
}

/// Traces one entry into a sample.
pub fn trace_sample(scene: &Scene, index: usize, entry: &Entry, spec: &SampleSpec) -> LensSample {
    let dim = scene.dim();
    let mut out = LensSample {
        index,
        params: entry.params.clone(),
        status: SampleStatus::Failed,
        t: None,
        reflections: 0,
        theta: None,
        exit: None,
        sojourn: None,
        error: None,
    };
    let traj = match trace(scene, &entry.point, &spec.limits()) {
        Ok(t) => t,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.reflections = traj.events.len();
    out.status = match &traj.status {
        Status::Trapped(_) => SampleStatus::Trapped,
        Status::GlidingRejected => SampleStatus::GlidingRejected,
        Status::Exited { .. } if traj.has_tangent() => SampleStatus::TangentFlagged,
        Status::Exited { .. } if traj.events.is_empty() => SampleStatus::Free,
        Status::Exited { .. } => SampleStatus::Scattered,
    };
    if let (true, Status::Exited { exit, total_time }) = (out.status.has_time(), &traj.status) {
        out.t = Some(*total_time);
        out.theta = Some(trim(&exit.v, dim));
        out.exit = Some(trim(&exit.q, dim));
        out.sojourn = sojourn_time(scene, &traj).ok();
    }
    out
}

/// Traces every entry of `spec` in parallel; the order of the samples is
/// the sampling order.
pub fn build_lens_table(scene: &Scene, spec: &SampleSpec) -> LensTable {
    let entries = sample_phase_sphere(spec, scene.ball_radius(), scene.dim());
    let samples = entries.par_iter().enumerate().map(|(i, e)| trace_sample(scene, i, e, spec)).collect();
    LensTable { scene_hash: scene.hash_hex(), dim: scene.dim(), ball_radius: scene.ball_radius(), spec: *spec, samples }
}

impl LensTable {
    pub fn summary(&self) -> LensSummary {
        LensSummary::of(&self.samples)
    }

    /// Header fields of the JSONL form.
    pub fn header(&self) -> Map<String, Value> {
        let mut h = Map::new();
        h.insert("version".into(), Value::from(crate::VERSION));
        h.insert("scene_hash".into(), Value::from(self.scene_hash.clone()));
        h.insert("spec".into(), Value::from(self.spec.mode.to_string()));
        h.insert("seed".into(), Value::from(self.spec.seed));
        h.insert("nmax".into(), Value::from(self.spec.max_reflections));
        h.insert("tmax".into(), Value::from(self.spec.max_time));
        h.insert("dimension".into(), Value::from(self.dim));
        h.insert("ball_radius".into(), Value::from(self.ball_radius));
        h.insert("samples".into(), Value::from(self.samples.len()));
        h.insert("summary".into(), serde_json::to_value(self.summary()).expect("summary serializes"));
        h
    }

    /// Header line (with `extra` fields merged in) and one line per sample.
    pub fn to_jsonl(&self, extra: &Map<String, Value>) -> String {
        let mut header = self.header();
        for (k, v) in extra {
            header.insert(k.clone(), v.clone());
        }
        let mut out = io::to_json_string(&Value::Object(header)).expect("header serializes");
        out.push('\n');
        for s in &self.samples {
            out.push_str(&io::to_json_string(s).expect("sample serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LensError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Map<String, Value> = serde_json::from_str(lines.next().ok_or_else(|| LensError::Format("empty table".into()))?)
            .map_err(|e| LensError::Format(format!("header: {e}")))?;
        let field = |k: &str| header.get(k).ok_or_else(|| LensError::Format(format!("header is missing `{k}`")));
        let as_u64 = |k: &str| field(k)?.as_u64().ok_or_else(|| LensError::Format(format!("`{k}` is not an integer")));
        let as_f64 = |k: &str| field(k)?.as_f64().ok_or_else(|| LensError::Format(format!("`{k}` is not a number")));
        let mode = field("spec")?.as_str().ok_or_else(|| LensError::Format("`spec` is not a string".into()))?.parse()?;
        let spec = SampleSpec { mode, seed: as_u64("seed")?, max_reflections: as_u64("nmax")? as usize, max_time: as_f64("tmax")? };
        let samples = lines
            .enumerate()
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| LensError::Format(format!("sample line {}: {e}", i + 2))))
            .collect::<Result<Vec<LensSample>, _>>()?;
        let count = as_u64("samples")? as usize;
        if samples.len() != count || count != spec.count() {
            return Err(LensError::Format(format!("header announces {count} samples, found {}", samples.len())));
        }
        Ok(LensTable {
            scene_hash: field("scene_hash")?.as_str().unwrap_or_default().to_string(),
            dim: as_u64("dimension")? as usize,
            ball_radius: as_f64("ball_radius")?,
            spec,
            samples,
        })
    }

    /// CSV with a header row: entry parameters, status, t, reflections, exit
    /// direction, sojourn. Absent values are empty.
    pub fn to_csv(&self) -> String {
        let params = if self.dim == 2 { vec!["phi", "psi"] } else { vec!["polar", "azimuth", "alpha", "beta"] };
        let theta: Vec<String> = (0..self.dim).map(|k| format!("theta_{k}")).collect();
        let mut out = format!("index,{},status,t,reflections,{},sojourn\n", params.join(","), theta.join(","));
        let num = |x: Option<f64>| x.map(io::format_f64).unwrap_or_default();
        for s in &self.samples {
            let _ = write!(out, "{}", s.index);
            for p in &s.params {
                let _ = write!(out, ",{}", io::format_f64(*p));
            }
            let _ = write!(out, ",{},{},{}", s.status.as_str(), num(s.t), s.reflections);
            for k in 0..self.dim {
                let _ = write!(out, ",{}", num(s.theta.as_ref().map(|t| t[k])));
            }
            let _ = writeln!(out, ",{}", num(s.sojourn));
        }
        out
    }
}
