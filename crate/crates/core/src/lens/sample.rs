use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::LensError;
use crate::flow::{PhasePoint, TraceLimits};
use crate::geometry::orthonormal_complement;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SampleMode {
    /// `positions × directions` entries.
    Grid { positions: usize, directions: usize },
    MonteCarlo { count: usize },
}

/// How to sample `S*_+(S0)` and how long to trace each entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    #[serde(flatten)]
    pub mode: SampleMode,
    pub seed: u64,
    pub max_reflections: usize,
    pub max_time: f64,
}

impl SampleSpec {
    /// Spec with the default limits for a ball of radius `a`.
    pub fn new(mode: SampleMode, seed: u64, a: f64) -> Self {
        let l = TraceLimits::for_radius(a);
        SampleSpec { mode, seed, max_reflections: l.max_reflections, max_time: l.max_time }
    }

    pub fn grid(positions: usize, directions: usize, a: f64) -> Self {
        SampleSpec::new(SampleMode::Grid { positions, directions }, 0, a)
    }

    pub fn limits(&self) -> TraceLimits {
        TraceLimits { max_reflections: self.max_reflections, max_time: self.max_time }
    }

    pub fn count(&self) -> usize {
        match self.mode {
            SampleMode::Grid { positions, directions } => positions * directions,
            SampleMode::MonteCarlo { count } => count,
        }
    }
}

impl fmt::Display for SampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleMode::Grid { positions, directions } => write!(f, "grid:{positions}x{directions}"),
            SampleMode::MonteCarlo { count } => write!(f, "mc:{count}"),
        }
    }
}

impl FromStr for SampleMode {
    type Err = LensError;

    /// Parses `grid:PxD` or `mc:N`.
    fn from_str(s: &str) -> Result<Self, LensError> {
        let bad = || LensError::BadSpec(s.to_string());
        let count = |t: &str| t.trim().parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(bad);
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "grid" => {
                let (p, d) = rest.split_once(['x', 'X']).ok_or_else(bad)?;
                Ok(SampleMode::Grid { positions: count(p)?, directions: count(d)? })
            }
            "mc" => Ok(SampleMode::MonteCarlo { count: count(rest)? }),
            _ => Err(bad()),
        }
    }
}

/// One sampled entry with its intrinsic coordinates.
///
/// In 2D `params = [φ, ψ]`: the position angle on `S0` and the angle of `v`
/// from the inward normal, positive towards the counter-clockwise tangent.
/// In 3D `params = [polar, azimuth, α, β]`: the position on `S0` in
/// spherical coordinates and `v` at angle `α` from the inward normal with
/// azimuth `β` in the tangent basis at `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub params: Vec<f64>,
    pub point: PhasePoint,
}

/// Entry from intrinsic coordinates.
pub fn entry_from_params(params: &[f64], a: f64, dim: usize) -> Result<Entry, LensError> {
    let point = match (dim, params) {
        (2, &[phi, psi]) => {
            let (s, c) = phi.sin_cos();
            let inward = Vec3::new(-c, -s, 0.0);
            let tangent = Vec3::new(-s, c, 0.0);
            PhasePoint { q: a * Vec3::new(c, s, 0.0), v: psi.cos() * inward + psi.sin() * tangent }
        }
        (3, &[polar, azimuth, alpha, beta]) => {
            let q = a * spherical(polar, azimuth);
            let inward = -q / a;
            let e = orthonormal_complement(&inward, 3);
            let v = alpha.cos() * inward + alpha.sin() * (beta.cos() * e[0] + beta.sin() * e[1]);
            PhasePoint { q, v }
        }
        _ => return Err(LensError::BadSpec(format!("{} entry parameters for dimension {dim}", params.len()))),
    };
    Ok(Entry { params: params.to_vec(), point })
}

fn spherical(polar: f64, azimuth: f64) -> Vec3 {
    let (sp, cp) = polar.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    Vec3::new(sp * ca, sp * sa, cp)
}

/// Uniform double in `[0, 1)` from the top 53 bits.
fn unit(rng: &mut Xoshiro256StarStar) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Entries of `S*_+(S0)` for `spec`, in a fixed order.
pub fn sample_phase_sphere(spec: &SampleSpec, a: f64, dim: usize) -> Vec<Entry> {
    let params: Vec<Vec<f64>> = match (spec.mode, dim) {
        (SampleMode::Grid { positions, directions }, 2) => {
            let mut out = Vec::with_capacity(positions * directions);
            for i in 0..positions {
                let phi = 2.0 * PI * i as f64 / positions as f64;
                for j in 0..directions {
                    let psi = -FRAC_PI_2 + PI * (j as f64 + 0.5) / directions as f64;
                    out.push(vec![phi, psi]);
                }
            }
            out
        }
        (SampleMode::Grid { positions, directions }, _) => {
            let qs = zonal_partition(positions, false);
            let vs = zonal_partition(directions, true);
            qs.iter().flat_map(|&(p, az)| vs.iter().map(move |&(al, be)| vec![p, az, al, be])).collect()
        }
        (SampleMode::MonteCarlo { count }, _) => {
            let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
            (0..count)
                .map(|_| {
                    if dim == 2 {
                        let phi = 2.0 * PI * unit(&mut rng);
                        let psi = PI * (unit(&mut rng) - 0.5);
                        vec![phi, psi]
                    } else {
                        let polar = (1.0 - 2.0 * unit(&mut rng)).acos();
                        let azimuth = 2.0 * PI * unit(&mut rng);
                        // uniform on the hemisphere: cos α is uniform on [0, 1]
                        let alpha = unit(&mut rng).acos();
                        let beta = 2.0 * PI * unit(&mut rng);
                        vec![polar, azimuth, alpha, beta]
                    }
                })
                .collect()
        }
    };
    params.iter().map(|p| entry_from_params(p, a, dim).expect("parameter count matches dimension")).collect()
}

/// Centers `(polar, azimuth)` of an equal-area partition of the sphere (or
/// the upper hemisphere) into `n` regions: polar caps plus collars of
/// regions whose count is rounded with carried error, in the manner of
/// Leopardi's recursive zonal partition of `S²`.
pub fn zonal_partition(n: usize, hemisphere: bool) -> Vec<(f64, f64)> {
    let total = if hemisphere { 2.0 * PI } else { 4.0 * PI };
    // polar angle whose cap has area `area`
    let polar_of = |area: f64| (1.0 - area / (2.0 * PI)).clamp(-1.0, 1.0).acos();
    match n {
        0 => return Vec::new(),
        1 => return vec![(0.0, 0.0)],
        2 if !hemisphere => return vec![(0.0, 0.0), (PI, 0.0)],
        _ => {}
    }
    let region = total / n as f64;
    let caps = if hemisphere { 1 } else { 2 };
    let cap = polar_of(region);
    let end = if hemisphere { FRAC_PI_2 } else { PI - cap };
    let ideal = region.sqrt();
    let collars = (((end - cap) / ideal).round() as usize).max(1);
    let width = (end - cap) / collars as f64;
    let inner = n - caps;
    // ideal counts per collar, rounded with carry so that they add up
    let mut counts = Vec::with_capacity(collars);
    let mut carry = 0.0;
    for k in 0..collars {
        let (t0, t1) = (cap + k as f64 * width, cap + (k + 1) as f64 * width);
        let exact = 2.0 * PI * (t0.cos() - t1.cos()) / region + carry;
        let m = exact.round().max(0.0) as usize;
        carry = exact - m as f64;
        counts.push(m);
    }
    let assigned: usize = counts.iter().sum();
    if assigned != inner {
        let last = counts.len() - 1;
        counts[last] = (counts[last] as isize + inner as isize - assigned as isize).max(0) as usize;
    }
    let mut out = vec![(0.0, 0.0)];
    let mut before = 1usize;
    for (k, &m) in counts.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let lo = polar_of(before as f64 * region);
        let hi = polar_of((before + m) as f64 * region);
        // equal-area midpoint of the collar
        let mid = (0.5 * (lo.cos() + hi.cos())).acos();
        let offset = if k % 2 == 1 { 0.5 } else { 0.0 };
        for j in 0..m {
            out.push((mid, 2.0 * PI * (j as f64 + 0.5 + offset) / m as f64));
        }
        before += m;
    }
    if !hemisphere {
        out.push((PI, 0.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("grid:4x3".parse::<SampleMode>().unwrap(), SampleMode::Grid { positions: 4, directions: 3 });
        assert_eq!("mc:100".parse::<SampleMode>().unwrap(), SampleMode::MonteCarlo { count: 100 });
        for bad in ["grid:0x3", "grid:4", "mc:", "mc:-1", "box:2x2", "grid4x3"] {
            assert!(bad.parse::<SampleMode>().is_err(), "{bad}");
        }
        assert_eq!(SampleMode::Grid { positions: 4, directions: 3 }.to_string(), "grid:4x3");
    }

    #[test]
    fn planar_grid_is_inward() {
        let spec = SampleSpec::grid(4, 3, 10.0);
        let e = sample_phase_sphere(&spec, 10.0, 2);
        assert_eq!(e.len(), 12);
        for x in &e {
            assert!((x.point.q.norm() - 10.0).abs() < 1e-12);
            assert!((x.point.v.norm() - 1.0).abs() < 1e-15);
            assert!(x.point.v.dot(&(-x.point.q)) > 0.0);
        }
    }

    #[test]
    fn zonal_partition_counts_and_balance() {
        for n in [1, 2, 3, 7, 10, 32, 100, 1000] {
            let s = zonal_partition(n, false);
            assert_eq!(s.len(), n);
            if n >= 10 {
                let mean: Vec3 = s.iter().map(|&(p, a)| spherical(p, a)).sum::<Vec3>() / n as f64;
                assert!(mean.norm() < 0.05, "{n}: {mean}");
            }
            let h = zonal_partition(n, true);
            assert_eq!(h.len(), n);
            assert!(h.iter().all(|&(p, _)| p < FRAC_PI_2));
        }
    }

    #[test]
    fn hemisphere_partition_mean_cosine() {
        // uniform hemisphere average of cos α is 1/2
        let h = zonal_partition(2000, true);
        let mean = h.iter().map(|&(p, _)| p.cos()).sum::<f64>() / h.len() as f64;
        assert!((mean - 0.5).abs() < 2e-3, "{mean}");
    }

    #[test]
    fn seeded_draws_repeat() {
        let spec = SampleSpec::new(SampleMode::MonteCarlo { count: 50 }, 7, 10.0);
        for dim in [2, 3] {
            let a = sample_phase_sphere(&spec, 10.0, dim);
            let b = sample_phase_sphere(&spec, 10.0, dim);
            assert_eq!(a, b);
        }
        let other = SampleSpec { seed: 8, ..spec };
        assert_ne!(sample_phase_sphere(&spec, 10.0, 3), sample_phase_sphere(&other, 10.0, 3));
    }

    #[test]
    fn monte_carlo_mean_incidence() {
        // E⟨v, ν⟩ is 1/2 on the hemisphere and 2/π on the half circle
        for (dim, oracle, var) in [(3, 0.5, 1.0 / 12.0), (2, 2.0 / PI, 0.5 - 4.0 / (PI * PI))] {
            let spec = SampleSpec::new(SampleMode::MonteCarlo { count: 10_000 }, 42, 10.0);
            let e = sample_phase_sphere(&spec, 10.0, dim);
            let mean = e.iter().map(|x| x.point.v.dot(&(-x.point.q / 10.0))).sum::<f64>() / e.len() as f64;
            let se = (var / e.len() as f64).sqrt();
            assert!((mean - oracle).abs() < 3.0 * se, "dim {dim}: {mean} vs {oracle}");
        }
    }
}
