use super::{FlowError, PhasePoint, MARCH_DIVISIONS, POLISH_MAX_ITERATIONS, POLISH_TOLERANCE, REHIT_GUARD};
use crate::geometry::{Obstacle, Scene};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitKind {
    /// The implicit function changes sign.
    Crossing,
    /// The ray touches the boundary at a local minimum of `F` without entering.
    Touch,
    /// The ray starts inside the obstacle and stays there longer than the
    /// gliding threshold.
    Submerged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub obstacle: usize,
    pub point: Vec3,
    pub kind: HitKind,
}

/// First boundary point on `q + t v` for `t` in `(t_min, max_advance]` with
/// the default re-hit guard `t_min = 1e−9 a`.
pub fn first_hit(scene: &Scene, p: &PhasePoint, max_advance: f64) -> Result<Option<Hit>, FlowError> {
    first_hit_with(scene, p, max_advance, REHIT_GUARD * scene.ball_radius())
}

/// [`first_hit`] with an explicit lower bound `t_min`.
pub fn first_hit_with(scene: &Scene, p: &PhasePoint, max_advance: f64, t_min: f64) -> Result<Option<Hit>, FlowError> {
    let a = scene.ball_radius();
    let mut best: Option<Hit> = None;
    for (idx, o) in scene.obstacles().iter().enumerate() {
        let t_hi = best.map_or(max_advance, |b| b.t);
        let probe = Probe { o, q: p.q, v: p.v, a };
        if let Some(hit) = probe.march(idx, t_min, t_hi)? {
            if best.is_none_or(|b| hit.t < b.t) {
                best = Some(hit);
            }
        }
    }
    Ok(best)
}

struct Probe<'a> {
    o: &'a Obstacle,
    q: Vec3,
    v: Vec3,
    a: f64,
}

impl Probe<'_> {
    fn at(&self, t: f64) -> Vec3 {
        self.q + t * self.v
    }

    fn f(&self, t: f64) -> f64 {
        self.o.value(&self.at(t))
    }

    fn df(&self, t: f64) -> f64 {
        self.o.gradient(&self.at(t)).dot(&self.v)
    }

    /// `|F| / |∇F|`, a first-order distance to the boundary.
    fn distance(&self, t: f64, f: f64) -> f64 {
        let g = self.o.gradient(&self.at(t)).norm();
        if g > 0.0 {
            f.abs() / g
        } else {
            f64::INFINITY
        }
    }

    /// Parameter interval where the ray is inside the bounding ball.
    fn window(&self, t_lo: f64, t_hi: f64) -> Option<(f64, f64)> {
        let r = self.o.bounding_radius() * (1.0 + 1e-9) + 1e-12 * self.a;
        let d = self.q - self.o.center();
        let b = d.dot(&self.v);
        let c = d.norm_squared() - r * r;
        let disc = b * b - c;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let (t0, t1) = ((-b - s).max(t_lo), (-b + s).min(t_hi));
        (t0 <= t1).then_some((t0, t1))
    }

    fn march(&self, idx: usize, t_lo: f64, t_hi: f64) -> Result<Option<Hit>, FlowError> {
        let Some((start, end)) = self.window(t_lo, t_hi) else { return Ok(None) };
        let h = self.a / MARCH_DIVISIONS;
        let tol = POLISH_TOLERANCE * self.a;
        let hit = |t: f64, kind| Hit { t, obstacle: idx, point: self.at(t), kind };

        let mut t_prev = start;
        let mut f_prev = self.f(t_prev);
        if f_prev <= 0.0 {
            // started inside: find where the ray leaves
            match self.leave(start, end, h)? {
                Some(t_out) if t_out - start <= 2.0 * h => {
                    t_prev = t_out;
                    f_prev = self.f(t_out);
                }
                Some(_) => return Ok(Some(hit(start, HitKind::Submerged))),
                None if end - start > 2.0 * h => return Ok(Some(hit(start, HitKind::Submerged))),
                None => return Ok(None),
            }
        }
        let mut d_prev = self.df(t_prev);
        while t_prev < end {
            let clear = self.o.clearance(&self.at(t_prev));
            if clear > h {
                // the ball of radius `clear` about the current point is free
                let t = t_prev + clear;
                if t >= end {
                    return Ok(None);
                }
                let f = self.f(t);
                if f <= 0.0 {
                    return Ok(Some(hit(self.polish(idx, t_prev, t)?, HitKind::Crossing)));
                }
                t_prev = t;
                f_prev = f;
                d_prev = self.df(t);
                continue;
            }
            let t = (t_prev + h).min(end);
            let f = self.f(t);
            if f <= 0.0 {
                return Ok(Some(hit(self.polish(idx, t_prev, t)?, HitKind::Crossing)));
            }
            let d = self.df(t);
            if d_prev < 0.0 && d > 0.0 {
                let tm = self.argmin(t_prev, t);
                let fm = self.f(tm);
                if fm <= 0.0 {
                    return Ok(Some(hit(self.polish(idx, t_prev, tm)?, HitKind::Crossing)));
                }
                if self.distance(tm, fm) <= tol {
                    return Ok(Some(hit(tm, HitKind::Touch)));
                }
            }
            debug_assert!(f_prev > 0.0);
            t_prev = t;
            f_prev = f;
            d_prev = d;
        }
        Ok(None)
    }

    /// First `t` in `(start, end]` where the ray is outside again.
    fn leave(&self, start: f64, end: f64, h: f64) -> Result<Option<f64>, FlowError> {
        let mut lo = start;
        loop {
            let hi = (lo + h).min(end);
            if self.f(hi) > 0.0 {
                // bisect to the crossing, keeping the outside end
                let (mut a, mut b) = (lo, hi);
                for _ in 0..POLISH_MAX_ITERATIONS {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if self.f(m) > 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                return Ok(Some(b));
            }
            if hi >= end {
                return Ok(None);
            }
            lo = hi;
        }
    }

    /// Minimum of `F` on `[lo, hi]` where `F'` goes from negative to positive.
    fn argmin(&self, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if self.df(m) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }

    /// Safeguarded Newton on a bracket with `F(lo) > 0 ≥ F(hi)`; returns a
    /// point with `F ≥ 0` and `|F|/|∇F| ≤ 1e−12 a` whose position along the
    /// ray is also resolved to that tolerance.
    fn polish(&self, idx: usize, mut lo: f64, mut hi: f64) -> Result<f64, FlowError> {
        let tol = POLISH_TOLERANCE * self.a;
        let mut t = lo;
        let mut ft = self.f(t);
        let mut dt = self.df(t);
        let mut last_width = f64::INFINITY;
        for _ in 0..POLISH_MAX_ITERATIONS {
            let width = hi - lo;
            let newton = t - ft / dt;
            let cand = if newton.is_finite() && newton > lo && newton < hi && width < 0.5 * last_width {
                newton
            } else {
                0.5 * (lo + hi)
            };
            last_width = width;
            if cand <= lo || cand >= hi {
                // bracket exhausted at double precision
                return Ok(lo);
            }
            t = cand;
            ft = self.f(t);
            let g = self.o.gradient(&self.at(t));
            dt = g.dot(&self.v);
            if ft > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let near = ft.abs() <= tol * g.norm();
            let resolved = ft.abs() <= tol * dt.abs() || hi - lo <= tol;
            if !(near && resolved) {
                continue;
            }
            if ft >= 0.0 {
                return Ok(t);
            }
            if hi - lo <= tol {
                return Ok(lo);
            }
            // inside by less than the tolerance: step back out along the ray
            let back = t - 2.0 * ft / dt;
            if back > lo && back < t {
                let fb = self.f(back);
                if fb >= 0.0 {
                    return Ok(back);
                }
                hi = back;
            }
        }
        Err(FlowError::RootPolishFailed { obstacle: idx, t: lo })
    }
}
