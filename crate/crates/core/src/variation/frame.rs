use nalgebra::{DMatrix, Matrix2, Matrix3};

use super::VariationError;
use crate::flow::TANGENCY_THRESHOLD;
use crate::geometry::{orthonormal_complement, surface_frame, Obstacle};
use crate::Vec3;

/// Transverse variations of a family of rays.
///
/// Column `k` of `a` (`b`) holds the position (direction) variation of the
/// `k`-th perturbation in the orthonormal basis `basis`, which spans the
/// plane orthogonal to the ray direction `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiFrame {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub basis: Vec<Vec3>,
    pub v: Vec3,
}

/// Boundary data at a reflection point.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    pub v_in: Vec3,
    /// Unit normal pointing out of the obstacle.
    pub normal: Vec3,
    /// Shape operator as an ambient map on tangent vectors, `dν = W dx`.
    pub weingarten: Matrix3<f64>,
}

impl Incidence {
    pub fn at(obstacle: &Obstacle, x: &Vec3, v_in: &Vec3) -> Result<Self, VariationError> {
        let frame = surface_frame(obstacle, x)?;
        Ok(Incidence { v_in: *v_in, normal: frame.normal, weingarten: frame.weingarten })
    }

    /// Umbilic boundary: `W = κ (I − ννᵀ)`; `κ > 0` convex, `κ < 0` concave.
    pub fn umbilic(v_in: Vec3, normal: Vec3, kappa: f64) -> Self {
        let p = Matrix3::identity() - normal * normal.transpose();
        Incidence { v_in, normal, weingarten: kappa * p }
    }

    /// `cos` of the angle between the incoming ray and the normal.
    pub fn cos_incidence(&self) -> f64 {
        -self.v_in.dot(&self.normal)
    }
}

impl JacobiFrame {
    /// Frame with the deterministic basis orthogonal to `v`.
    pub fn new(v: Vec3, dim: usize, a: DMatrix<f64>, b: DMatrix<f64>) -> Self {
        let basis = orthonormal_complement(&v, dim);
        JacobiFrame { a, b, basis, v }
    }

    /// `(A, B) = (0, I)`: a point source.
    pub fn point_source(v: Vec3, dim: usize) -> Self {
        let m = dim - 1;
        JacobiFrame::new(v, dim, DMatrix::zeros(m, m), DMatrix::identity(m, m))
    }

    /// `(A, B) = (I, 0)`: a parallel beam.
    pub fn parallel_beam(v: Vec3, dim: usize) -> Self {
        let m = dim - 1;
        JacobiFrame::new(v, dim, DMatrix::identity(m, m), DMatrix::zeros(m, m))
    }

    pub fn dim(&self) -> usize {
        self.basis.len() + 1
    }

    fn ambient(&self, m: &DMatrix<f64>, col: usize) -> Vec3 {
        self.basis.iter().enumerate().map(|(i, e)| m[(i, col)] * e).sum()
    }

    pub fn position_column(&self, col: usize) -> Vec3 {
        self.ambient(&self.a, col)
    }

    pub fn direction_column(&self, col: usize) -> Vec3 {
        self.ambient(&self.b, col)
    }
}

/// Free flight over time `t`: `A ← A + tB`.
pub fn propagate_free(frame: &JacobiFrame, t: f64) -> JacobiFrame {
    JacobiFrame { a: &frame.a + t * &frame.b, ..frame.clone() }
}

/// Specular reflection of every column of the frame.
///
/// With `δx = δq − (⟨δq,ν⟩/⟨v,ν⟩) v` the boundary displacement and
/// `δν = W δx`, the reflected variations are `δq' = R δq` and
/// `δv' = R δv − 2⟨v,δν⟩ν − 2⟨v,ν⟩δν`, where `R = I − 2ννᵀ`.
pub fn propagate_reflection(frame: &JacobiFrame, inc: &Incidence) -> Result<JacobiFrame, VariationError> {
    let nu = inc.normal;
    let v = inc.v_in;
    let c = v.dot(&nu);
    if !(c < -TANGENCY_THRESHOLD) {
        return Err(VariationError::TangentIncidence(c));
    }
    let reflect = |x: Vec3| x - 2.0 * x.dot(&nu) * nu;
    let v_out = reflect(v).normalize();
    let basis = reseat(frame.basis.iter().map(|e| reflect(*e)).collect(), &v_out);
    let m = frame.basis.len();
    let mut a = DMatrix::zeros(m, m);
    let mut b = DMatrix::zeros(m, m);
    for k in 0..m {
        let dq = frame.position_column(k);
        let dv = frame.direction_column(k);
        let dx = dq - (dq.dot(&nu) / c) * v;
        let dnu = inc.weingarten * dx;
        let dq_out = reflect(dq);
        let dv_out = reflect(dv) - 2.0 * v.dot(&dnu) * nu - 2.0 * c * dnu;
        for (i, e) in basis.iter().enumerate() {
            a[(i, k)] = e.dot(&dq_out);
            b[(i, k)] = e.dot(&dv_out);
        }
    }
    Ok(JacobiFrame { a, b, basis, v: v_out })
}

/// Gram–Schmidt of `vectors` against `v` and each other.
fn reseat(vectors: Vec<Vec3>, v: &Vec3) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::with_capacity(vectors.len());
    for x in vectors {
        let mut y = x - x.dot(v) * v;
        for e in &out {
            y -= y.dot(e) * e;
        }
        out.push(y.normalize());
    }
    out
}

/// Matrix of pairings `Ω_ij = ⟨A1 e_i, B2 e_j⟩ − ⟨B1 e_i, A2 e_j⟩`.
pub fn symplectic_form(f1: &JacobiFrame, f2: &JacobiFrame) -> DMatrix<f64> {
    f1.a.transpose() * &f2.b - f1.b.transpose() * &f2.a
}

/// Monodromy of a frame map on `(A, B)` for 2D scenes, as a `2×2` matrix
/// acting on `(δq, δv)` coordinates.
pub fn transfer_matrix_2d(map: impl Fn(&JacobiFrame) -> Result<JacobiFrame, VariationError>, v: Vec3) -> Result<Matrix2<f64>, VariationError> {
    let beam = map(&JacobiFrame::parallel_beam(v, 2))?;
    let source = map(&JacobiFrame::point_source(v, 2))?;
    Ok(Matrix2::new(beam.a[(0, 0)], source.a[(0, 0)], beam.b[(0, 0)], source.b[(0, 0)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn free_flight_examples() {
        let v = Vec3::x();
        let beam = propagate_free(&JacobiFrame::parallel_beam(v, 3), 7.0);
        assert_eq!(beam.a, DMatrix::identity(2, 2));
        assert_eq!(beam.b, DMatrix::zeros(2, 2));
        let src = propagate_free(&JacobiFrame::point_source(v, 3), 3.0);
        assert_eq!(src.a, 3.0 * DMatrix::<f64>::identity(2, 2));
        assert_eq!(src.b, DMatrix::identity(2, 2));
    }

    #[test]
    fn flat_mirror_keeps_a_parallel_beam() {
        let v = Vec3::new(0.0, -1.0, 0.0);
        let inc = Incidence::umbilic(v, Vec3::y(), 0.0);
        let out = propagate_reflection(&JacobiFrame::parallel_beam(v, 3), &inc).unwrap();
        assert!(approx(&out.a, &DMatrix::identity(2, 2), 1e-15));
        assert!(approx(&out.b, &DMatrix::zeros(2, 2), 1e-15));
        assert!((out.v - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn concave_mirror_refocuses_at_the_mirror_distance() {
        // point source at d = 2 in front of a concave mirror of radius 1:
        // 1/d + 1/d' = 2/r gives d' = 2/3
        let (r, d) = (1.0, 2.0);
        let v = Vec3::new(0.0, -1.0, 0.0);
        let arriving = propagate_free(&JacobiFrame::point_source(v, 3), d);
        assert_eq!(arriving.a, 2.0 * DMatrix::<f64>::identity(2, 2));
        let inc = Incidence::umbilic(v, Vec3::y(), -1.0 / r);
        let out = propagate_reflection(&arriving, &inc).unwrap();
        let oracle = 1.0 / (2.0 / r - 1.0 / d);
        for i in 0..2 {
            let t = -out.a[(i, i)] / out.b[(i, i)];
            assert!((t - oracle).abs() < 1e-14, "{t} vs {oracle}");
        }
        let focus = propagate_free(&out, oracle);
        assert!(focus.a.amax() < 1e-14);
    }

    #[test]
    fn grazing_incidence_is_rejected() {
        let v = Vec3::x();
        let inc = Incidence::umbilic(v, Vec3::y(), 1.0);
        assert!(matches!(
            propagate_reflection(&JacobiFrame::parallel_beam(v, 3), &inc),
            Err(VariationError::TangentIncidence(_))
        ));
    }

    #[test]
    fn two_dimensional_transfer_maps_are_unimodular() {
        let v = Vec3::new(0.6, -0.8, 0.0);
        let free = transfer_matrix_2d(|f| Ok(propagate_free(f, 2.5)), v).unwrap();
        assert!((free.determinant() - 1.0).abs() < 1e-12);
        for kappa in [-2.0, -0.3, 0.0, 0.7, 5.0] {
            let inc = Incidence::umbilic(v, Vec3::new(0.2, 0.9, 0.0).normalize(), kappa);
            let refl = transfer_matrix_2d(|f| propagate_reflection(f, &inc), v).unwrap();
            assert!((refl.determinant().abs() - 1.0).abs() < 1e-12, "{}", refl.determinant());
        }
    }

    fn random_frame(v: Vec3, vals: &[f64]) -> JacobiFrame {
        JacobiFrame::new(v, 3, DMatrix::from_row_slice(2, 2, &vals[..4]), DMatrix::from_row_slice(2, 2, &vals[4..8]))
    }

    proptest! {
        #[test]
        fn pairing_is_conserved(
            vals1 in prop::collection::vec(-2.0..2.0f64, 8),
            vals2 in prop::collection::vec(-2.0..2.0f64, 8),
            steps in prop::collection::vec((0.0..5.0f64, -1.0..1.0f64, -1.0..1.0f64, -0.9..0.9f64, -2.0..2.0f64, -2.0..2.0f64), 1..5),
        ) {
            let v0 = Vec3::new(1.0, 0.2, -0.1).normalize();
            let mut f1 = random_frame(v0, &vals1);
            let mut f2 = random_frame(v0, &vals2);
            let before = symplectic_form(&f1, &f2);
            for (t, nx, ny, nz, k1, k2) in steps {
                f1 = propagate_free(&f1, t);
                f2 = propagate_free(&f2, t);
                // a normal facing the ray, with a random symmetric shape operator
                let mut n = Vec3::new(nx, ny, nz) - 1.5 * f1.v;
                n.normalize_mut();
                let e = orthonormal_complement(&n, 3);
                let w = k1 * e[0] * e[0].transpose() + k2 * e[1] * e[1].transpose()
                    + 0.3 * (e[0] * e[1].transpose() + e[1] * e[0].transpose());
                let inc = Incidence { v_in: f1.v, normal: n, weingarten: w };
                f1 = propagate_reflection(&f1, &inc).unwrap();
                f2 = propagate_reflection(&f2, &inc).unwrap();
            }
            let after = symplectic_form(&f1, &f2);
            // relative to the sizes of the propagated frames
            let size = |f: &JacobiFrame| (f.a.norm_squared() + f.b.norm_squared()).sqrt();
            let scale = before.amax().max(size(&f1) * size(&f2));
            prop_assert!((&after - &before).amax() <= 1e-9 * scale, "{before} vs {after}");
        }
    }
}
