use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::curve::{Curve, Piece};
use super::obstacle::{Obstacle, Shape};
use super::GeometryError;
use crate::io;
use crate::Vec3;

/// Reference ball of radius `a` with the obstacles inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    name: String,
    dim: usize,
    ball_radius: f64,
    obstacles: Vec<Obstacle>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    dimension: usize,
    ball_radius: f64,
    obstacles: Vec<ObstacleFile>,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    kind: String,
    center: Vec<f64>,
    params: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rotation: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereParams {
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EllipsoidParams {
    semi_axes: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuperellipsoidParams {
    semi_axes: Vec<f64>,
    exponent: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveParams {
    pieces: Vec<Piece>,
}

fn fmt_err(e: impl std::fmt::Display) -> GeometryError {
    GeometryError::SceneFormat(e.to_string())
}

fn axes(v: &[f64], dim: usize) -> Result<Vec3, GeometryError> {
    if v.len() != dim {
        return Err(GeometryError::SceneFormat(format!("semi_axes needs {dim} entries, got {}", v.len())));
    }
    Ok(Vec3::new(v[0], v[1], if dim == 3 { v[2] } else { 1.0 }))
}

impl Scene {
    pub fn new(name: impl Into<String>, dim: usize, ball_radius: f64, obstacles: Vec<Obstacle>) -> Result<Self, GeometryError> {
        if dim != 2 && dim != 3 {
            return Err(GeometryError::InvalidParameters(format!("dimension {dim} is not 2 or 3")));
        }
        if !(ball_radius > 0.0 && ball_radius.is_finite()) {
            return Err(GeometryError::InvalidParameters("ball_radius must be positive".into()));
        }
        if let Some(o) = obstacles.iter().find(|o| o.dim() != dim) {
            return Err(GeometryError::InvalidParameters(format!(
                "obstacle of dimension {} in a {dim}-dimensional scene",
                o.dim()
            )));
        }
        Ok(Scene { name: name.into(), dim, ball_radius, obstacles })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let file: SceneFile = serde_json::from_str(text).map_err(fmt_err)?;
        let dim = file.dimension;
        if dim != 2 && dim != 3 {
            return Err(GeometryError::SceneFormat(format!("dimension must be 2 or 3, got {dim}")));
        }
        let mut obstacles = Vec::with_capacity(file.obstacles.len());
        for (i, o) in file.obstacles.into_iter().enumerate() {
            if o.center.len() != dim {
                return Err(GeometryError::SceneFormat(format!("obstacle {i}: center needs {dim} coordinates")));
            }
            let center = Vec3::new(o.center[0], o.center[1], if dim == 3 { o.center[2] } else { 0.0 });
            let params = Value::Object(o.params);
            let shape = match o.kind.as_str() {
                "sphere" => {
                    let p: SphereParams = serde_json::from_value(params).map_err(fmt_err)?;
                    Shape::Sphere { radius: p.radius }
                }
                "ellipsoid" => {
                    let p: EllipsoidParams = serde_json::from_value(params).map_err(fmt_err)?;
                    Shape::Ellipsoid { semi_axes: axes(&p.semi_axes, dim)? }
                }
                "superellipsoid" => {
                    let p: SuperellipsoidParams = serde_json::from_value(params).map_err(fmt_err)?;
                    Shape::Superellipsoid { semi_axes: axes(&p.semi_axes, dim)?, exponent: p.exponent }
                }
                "curve" => {
                    if dim != 2 {
                        return Err(GeometryError::SceneFormat("curve obstacles need dimension 2".into()));
                    }
                    let p: CurveParams = serde_json::from_value(params).map_err(fmt_err)?;
                    Shape::Curve(Curve::new(p.pieces)?)
                }
                other => return Err(GeometryError::SceneFormat(format!("unknown obstacle kind {other:?}"))),
            };
            obstacles.push(Obstacle::new(dim, shape, center, o.rotation)?);
        }
        Scene::new(file.name, dim, file.ball_radius, obstacles)
    }

    fn to_file(&self) -> SceneFile {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| {
                let c = o.center();
                let center = c.as_slice()[..self.dim].to_vec();
                let trim = |v: &Vec3| v.as_slice()[..self.dim].to_vec();
                let params = match o.shape() {
                    Shape::Sphere { radius } => serde_json::json!({ "radius": radius }),
                    Shape::Ellipsoid { semi_axes } => serde_json::json!({ "semi_axes": trim(semi_axes) }),
                    Shape::Superellipsoid { semi_axes, exponent } => {
                        serde_json::json!({ "semi_axes": trim(semi_axes), "exponent": exponent })
                    }
                    Shape::Curve(curve) => serde_json::json!({ "pieces": curve.pieces() }),
                };
                let Value::Object(params) = params else { unreachable!() };
                ObstacleFile { kind: o.kind().to_string(), center, params, rotation: o.rotation_params().map(<[f64]>::to_vec) }
            })
            .collect();
        SceneFile { dimension: self.dim, ball_radius: self.ball_radius, obstacles, name: self.name.clone() }
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self.to_file()).expect("scene serializes")
    }

    /// Canonical serialization: sorted keys, 17-digit floats, no whitespace.
    pub fn to_canonical_json(&self) -> String {
        io::canonical_json(&self.to_file()).expect("scene serializes")
    }

    /// FNV-1a of the canonical serialization.
    pub fn hash(&self) -> u64 {
        io::fnv1a64(self.to_canonical_json().as_bytes())
    }

    pub fn hash_hex(&self) -> String {
        io::hash_hex(self.hash())
    }

    /// `t` for which `q + t v` leaves the ball, `q` inside or on the sphere.
    pub fn ball_exit_time(&self, q: &Vec3, v: &Vec3) -> f64 {
        let a = self.ball_radius;
        let b = q.dot(v);
        let mut c = q.norm_squared() - a * a;
        // treat points within rounding of the sphere as on it, so chords are exact
        if c.abs() <= 1e-9 * a * a {
            c = 0.0;
        }
        if c == 0.0 {
            return (-2.0 * b).max(0.0);
        }
        let disc = (b * b - c).max(0.0);
        (-b + disc.sqrt()).max(0.0)
    }

    /// Unit normal of the sphere `S0` pointing into the ball.
    pub fn inward_normal(&self, q: &Vec3) -> Vec3 {
        -q / q.norm()
    }
}
