//! Hyperbolic space `H^{n+1}` in the hyperboloid (Lorentz) model.
//!
//! Points of `H^{n+1}` are future-pointing unit timelike vectors of
//! `R^{n+1,1}` with the time coordinate stored **last**. Boundary points live
//! on the unit sphere `S^n` of the ball model and correspond to the null rays
//! `(xi, 1)`. Isometries are `(n+2) x (n+2)` matrices in `SO+(n+1, 1)`.
//!
//! Group elements act on the right: `x.g` is realized as `M_g * x`, so the
//! matrix of a product is `M_{gh} = M_h * M_g` (see [`Isometry::product`]).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for the hyperboloid / unit-sphere invariants.
pub const POINT_TOL: f64 = 1e-12;
/// Tolerance for the Lorentz-form and determinant checks on isometries.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// Below this ball-model gap the Poisson kernel is treated as singular.
pub const KERNEL_GAP: f64 = 1e-14;

/// Minkowski product with signature `(+, ..., +, -)`, time last.
pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len() - 1;
    let mut s = -a[k] * b[k];
    for i in 0..k {
        s += a[i] * b[i];
    }
    s
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A point of `H^{n+1}` on the upper sheet of the hyperboloid.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct InteriorPoint {
    coords: Vec<f64>,
}

impl InteriorPoint {
    /// The point `(0, ..., 0, 1)`, i.e. the center of the ball model.
    pub fn origin(n: usize) -> Self {
        let mut coords = vec![0.0; n + 2];
        coords[n + 1] = 1.0;
        Self { coords }
    }

    /// Builds a point from hyperboloid coordinates, re-deriving the time
    /// coordinate from the spatial part so that `<x,x> = -1`.
    pub fn from_hyperboloid(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::InvalidPoint(format!(
                "hyperboloid coordinates need at least 3 entries, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        let k = coords.len() - 1;
        if coords[k] <= 0.0 {
            return Err(Error::InvalidPoint("time coordinate must be positive".into()));
        }
        let q = -minkowski(coords, coords);
        let scale = coords[k] * coords[k];
        if (q - 1.0).abs() > 1e-6 * scale.max(1.0) {
            return Err(Error::InvalidPoint(format!("<x,x> = {} is not -1", -q)));
        }
        Ok(Self::renormalized(coords.to_vec()))
    }

    /// Keeps the spatial part and resets `t = sqrt(1 + |x|^2)`.
    fn renormalized(mut coords: Vec<f64>) -> Self {
        let k = coords.len() - 1;
        let r2: f64 = coords[..k].iter().map(|c| c * c).sum();
        coords[k] = (1.0 + r2).sqrt();
        Self { coords }
    }

    /// Point of the Poincare ball with Euclidean coordinates `u`, `|u| < 1`.
    pub fn from_ball(u: &[f64]) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::InvalidPoint("ball point needs n + 1 >= 2 coordinates".into()));
        }
        let r2: f64 = u.iter().map(|c| c * c).sum();
        if !(r2 < 1.0) {
            return Err(Error::InvalidPoint(format!("ball point has |u|^2 = {r2} >= 1")));
        }
        let denom = 1.0 - r2;
        let mut coords: Vec<f64> = u.iter().map(|c| 2.0 * c / denom).collect();
        coords.push((1.0 + r2) / denom);
        Ok(Self { coords })
    }

    /// Euclidean coordinates in the Poincare ball.
    pub fn to_ball(&self) -> Vec<f64> {
        let k = self.coords.len() - 1;
        let t = self.coords[k];
        self.coords[..k].iter().map(|c| c / (1.0 + t)).collect()
    }

    /// Boundary sphere dimension `n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn time(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }

    /// Value of `-<x,x>`, equal to 1 up to rounding.
    pub fn minkowski_norm(&self) -> f64 {
        -minkowski(&self.coords, &self.coords)
    }
}

/// A point of the boundary sphere `S^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BoundaryPoint {
    dir: Vec<f64>,
}

impl BoundaryPoint {
    /// Normalizes `v` onto the unit sphere.
    pub fn new(v: &[f64]) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::InvalidPoint("boundary point needs n + 1 >= 2 coordinates".into()));
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidPoint("cannot normalize a zero or non-finite direction".into()));
        }
        Ok(Self { dir: v.iter().map(|c| c / norm).collect() })
    }

    /// Point `(cos theta, sin theta)` of `S^1`.
    pub fn from_angle(theta: f64) -> Self {
        Self { dir: vec![theta.cos(), theta.sin()] }
    }

    /// Inverse stereographic projection `C -> S^2` matching
    /// `z = (x + i y) / (1 - z3)`.
    pub fn from_complex(z: num_complex::Complex64) -> Self {
        let r2 = z.norm_sqr();
        let d = 1.0 + r2;
        Self { dir: vec![2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d] }
    }

    /// Stereographic coordinate of an `S^2` point (infinite at the north pole).
    pub fn to_complex(&self) -> num_complex::Complex64 {
        let d = 1.0 - self.dir[2];
        num_complex::Complex64::new(self.dir[0] / d, self.dir[1] / d)
    }

    /// Angle in the `(x_1, x_2)` plane, in `(-pi, pi]`.
    pub fn angle(&self) -> f64 {
        self.dir[1].atan2(self.dir[0])
    }

    pub fn dim(&self) -> usize {
        self.dir.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.dir
    }

    /// Null representative `(xi, 1)`.
    pub fn null_vector(&self) -> Vec<f64> {
        let mut v = self.dir.clone();
        v.push(1.0);
        v
    }

    /// Euclidean (chordal) distance in `R^{n+1}`.
    pub fn chordal(&self, other: &BoundaryPoint) -> f64 {
        self.dir
            .iter()
            .zip(&other.dir)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Radial projection of an interior point to the boundary sphere.
pub fn radial_projection(x: &InteriorPoint) -> Result<BoundaryPoint> {
    BoundaryPoint::new(x.spatial())
        .map_err(|_| Error::InvalidPoint("the ball center has no radial projection".into()))
}

/// Orientation- and time-orientation-preserving isometry of `H^{n+1}`.
///
/// The matrix acts on column vectors from the left; the group law is the
/// right action, so `a.product(&b)` has matrix `M_b * M_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    matrix: DMatrix<f64>,
}

impl Isometry {
    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n + 2, n + 2) }
    }

    /// Validates `M^T J M = J`, `det M = 1` and `M_{tt} > 0`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let g = Self { matrix };
        g.validate()?;
        Ok(g)
    }

    /// Wraps a matrix already known to be in `SO+(n+1,1)` (products of
    /// validated generators).
    pub fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        let k = m.nrows();
        if k != m.ncols() || k < 3 {
            return Err(Error::InvalidIsometry(format!("matrix is {}x{}", m.nrows(), m.ncols())));
        }
        let mut j = DMatrix::identity(k, k);
        j[(k - 1, k - 1)] = -1.0;
        let form = m.transpose() * &j * m;
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let defect = (&form - &j).amax();
        if defect > ISOMETRY_TOL * scale * scale {
            return Err(Error::InvalidIsometry(format!("Lorentz form defect {defect:e}")));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ISOMETRY_TOL * scale.powi(k as i32) {
            return Err(Error::InvalidIsometry(format!("determinant {det} != 1")));
        }
        if m[(k - 1, k - 1)] <= 0.0 {
            return Err(Error::InvalidIsometry("reverses time orientation".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `J M^T J`.
    pub fn inverse(&self) -> Self {
        let k = self.matrix.nrows();
        let mut inv = self.matrix.transpose();
        for i in 0..k - 1 {
            inv[(i, k - 1)] = -inv[(i, k - 1)];
            inv[(k - 1, i)] = -inv[(k - 1, i)];
        }
        Self { matrix: inv }
    }

    /// Group product `g h` for the right action: `x.(gh) = (x.g).h`.
    pub fn product(&self, h: &Isometry) -> Self {
        Self { matrix: &h.matrix * &self.matrix }
    }

    /// Euclidean rotation of the ball model in the `(i, j)` coordinate plane.
    pub fn rotation(n: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        if i > n || j > n || i == j {
            return Err(Error::InvalidParameter(format!("rotation plane ({i},{j}) invalid for n = {n}")));
        }
        let mut m = DMatrix::identity(n + 2, n + 2);
        let (s, c) = angle.sin_cos();
        m[(i, i)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        m[(j, j)] = c;
        Ok(Self { matrix: m })
    }

    /// Hyperbolic translation along coordinate axis `axis` by `rapidity`;
    /// sends the origin to the point at distance `rapidity` towards `+e_axis`.
    pub fn boost(n: usize, axis: usize, rapidity: f64) -> Result<Self> {
        if axis > n {
            return Err(Error::InvalidParameter(format!("boost axis {axis} invalid for n = {n}")));
        }
        let t = n + 1;
        let mut m = DMatrix::identity(n + 2, n + 2);
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        m[(axis, axis)] = ch;
        m[(axis, t)] = sh;
        m[(t, axis)] = sh;
        m[(t, t)] = ch;
        Ok(Self { matrix: m })
    }

    /// Entrywise max-distance between matrices.
    pub fn distance(&self, other: &Isometry) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }

    /// Applies the isometry to an interior or boundary point.
    pub fn apply<P: Transform>(&self, p: &P) -> Result<P> {
        p.transformed(self)
    }

    fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let k = v.len();
        let mut out = vec![0.0; k];
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for c in 0..k {
                s += self.matrix[(r, c)] * v[c];
            }
            *o = s;
        }
        out
    }

    /// Isometry class read off from traces. Returns the translation length
    /// for loxodromic elements (`None` when elliptic or parabolic within
    /// `tol`). Exact for `n <= 2`; larger `n` falls back to power iteration.
    pub fn translation_length(&self, tol: f64) -> Option<f64> {
        let n = self.dim();
        let tr = self.matrix.trace();
        let cosh_l = match n {
            1 => (tr - 1.0) / 2.0,
            2 => {
                // tr = 2(c + k), tr(M^2) = 4(c^2 + k^2) - 4 with c = cosh l, k = cos theta.
                let tr2 = (&self.matrix * &self.matrix).trace();
                let sum = tr / 2.0;
                let sq = (tr2 + 4.0) / 4.0;
                let prod = (sum * sum - sq) / 2.0;
                let disc = (sum * sum - 4.0 * prod).max(0.0);
                (sum + disc.sqrt()) / 2.0
            }
            _ => {
                let (lambda, _) = self.dominant_eigen(4000);
                (lambda + 1.0 / lambda) / 2.0
            }
        };
        if cosh_l > 1.0 + tol {
            Some(cosh_l.acosh())
        } else {
            None
        }
    }

    /// Power iteration on the interior action; converges to the attracting
    /// null eigenvector. Returns `(eigenvalue estimate, boundary direction)`.
    fn dominant_eigen(&self, max_iter: usize) -> (f64, Vec<f64>) {
        let k = self.matrix.nrows();
        // Generic timelike start vector.
        let mut v: Vec<f64> = (0..k).map(|i| if i == k - 1 { 1.7 } else { 0.1 / (i as f64 + 1.3) }).collect();
        let mut lambda = 1.0;
        for _ in 0..max_iter {
            let w = self.mul_vec(&v);
            let norm = w[k - 1];
            lambda = norm / v[k - 1];
            let next: Vec<f64> = w.iter().map(|c| c / norm).collect();
            let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            if diff < 1e-16 {
                break;
            }
        }
        (lambda, v)
    }

    /// Attracting fixed point of `xi -> xi.g` for a loxodromic element.
    pub fn attracting_fixed_point(&self) -> Result<BoundaryPoint> {
        let k = self.matrix.nrows();
        // Repeated squaring accelerates the power iteration; the matrix is
        // rescaled to keep entries bounded.
        let mut m = self.matrix.clone();
        for _ in 0..6 {
            let sq = &m * &m;
            let scale = sq.amax();
            m = sq / scale;
        }
        let g = Isometry { matrix: m };
        let (_, v) = g.dominant_eigen(2000);
        let t = v[k - 1];
        if !(t > 0.0) {
            return Err(Error::InvalidIsometry("fixed point iteration left the light cone".into()));
        }
        // Polish with the original matrix.
        let mut xi = BoundaryPoint::new(&v[..k - 1])?;
        for _ in 0..200 {
            let next = self.apply(&xi)?;
            let change = next.chordal(&xi);
            xi = next;
            if change < 1e-16 {
                break;
            }
        }
        Ok(xi)
    }
}

/// Objects an [`Isometry`] can move.
pub trait Transform: Sized {
    fn transformed(&self, g: &Isometry) -> Result<Self>;
}

impl Transform for InteriorPoint {
    fn transformed(&self, g: &Isometry) -> Result<Self> {
        check_dim(g.dim(), self.dim())?;
        Ok(Self::renormalized(g.mul_vec(&self.coords)))
    }
}

impl Transform for BoundaryPoint {
    fn transformed(&self, g: &Isometry) -> Result<Self> {
        check_dim(g.dim(), self.dim())?;
        let v = g.mul_vec(&self.null_vector());
        let k = v.len() - 1;
        if !(v[k] > 0.0) {
            return Err(Error::InvalidIsometry("image of a null vector is not future-pointing".into()));
        }
        BoundaryPoint::new(&v[..k])
    }
}

/// Hyperbolic distance `arccosh(-<x,y>)`, evaluated in a cancellation-free
/// form for nearby points.
pub fn hyp_distance(x: &InteriorPoint, y: &InteriorPoint) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    let s = -minkowski(&x.coords, &y.coords);
    if s > 1.5 {
        return Ok(s.acosh());
    }
    let diff: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a - b).collect();
    let chord2 = minkowski(&diff, &diff).max(0.0);
    Ok(2.0 * (chord2.sqrt() / 2.0).asinh())
}

/// `-<x, (xi, 1)>`, the reciprocal of the Poisson kernel. The sign split
/// avoids cancellation when `x` is far out towards `xi`.
fn horo_height(x: &InteriorPoint, xi: &BoundaryPoint) -> f64 {
    let xs = x.spatial();
    let t = x.time();
    let p: f64 = xs.iter().zip(&xi.dir).map(|(a, b)| a * b).sum();
    if p > 0.0 {
        let perp2: f64 = xs.iter().zip(&xi.dir).map(|(a, b)| (a - p * b) * (a - p * b)).sum();
        (1.0 + perp2) / (t + p)
    } else {
        t - p
    }
}

/// Ball-model Poisson kernel `P(x, xi) = (1 - |x|^2) / |x - xi|^2`.
pub fn poisson_kernel(x: &InteriorPoint, xi: &BoundaryPoint) -> Result<f64> {
    check_dim(x.dim(), xi.dim())?;
    let u = x.to_ball();
    let gap = u.iter().zip(&xi.dir).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if gap < KERNEL_GAP {
        return Err(Error::SingularKernel { gap });
    }
    Ok(1.0 / horo_height(x, xi))
}

/// Busemann cocycle `D(x, x', xi) = log(P(x', xi) / P(x, xi))`, the limit of
/// `d(x, x'') - d(x', x'')` as `x'' -> xi`.
pub fn busemann(x: &InteriorPoint, xp: &InteriorPoint, xi: &BoundaryPoint) -> Result<f64> {
    check_dim(x.dim(), xp.dim())?;
    let a = poisson_kernel(x, xi)?;
    let b = poisson_kernel(xp, xi)?;
    Ok((b / a).ln())
}

/// Point at distance `t` from `x` on the geodesic ray towards `xi`.
pub fn geodesic_toward(x: &InteriorPoint, xi: &BoundaryPoint, t: f64) -> Result<InteriorPoint> {
    check_dim(x.dim(), xi.dim())?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("geodesic parameter t = {t} must be >= 0")));
    }
    let null = xi.null_vector();
    let a = -minkowski(&x.coords, &null);
    let (ch, sh) = (t.cosh(), t.sinh());
    let coords: Vec<f64> = x
        .coords
        .iter()
        .zip(&null)
        .map(|(xc, nc)| ch * xc + sh * (nc / a - xc))
        .collect();
    Ok(InteriorPoint::renormalized(coords))
}

/// Dense column vector view, handy for callers doing linear algebra.
pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_distance(u: &[f64], v: &[f64]) -> f64 {
        let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        let nu: f64 = u.iter().map(|a| a * a).sum();
        let nv: f64 = v.iter().map(|a| a * a).sum();
        (1.0 + 2.0 * d2 / ((1.0 - nu) * (1.0 - nv))).acosh()
    }

    #[test]
    fn distance_to_self_is_zero() {
        let x = InteriorPoint::from_ball(&[0.3, -0.2, 0.1]).unwrap();
        assert_eq!(hyp_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn distance_from_origin_matches_ball_formula() {
        let o = InteriorPoint::origin(1);
        let x = InteriorPoint::from_ball(&[0.5, 0.0]).unwrap();
        let d = hyp_distance(&o, &x).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-12);
        assert!((d - ball_distance(&[0.0, 0.0], &[0.5, 0.0])).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = InteriorPoint::origin(1);
        let b = InteriorPoint::origin(2);
        assert!(matches!(hyp_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rotation_moves_ball_points() {
        let g = Isometry::rotation(1, 0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        let x = InteriorPoint::from_ball(&[0.5, 0.0]).unwrap();
        let u = g.apply(&x).unwrap().to_ball();
        assert!(u[0].abs() < 1e-12 && (u[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_fixes_points() {
        let g = Isometry::identity(2);
        let xi = BoundaryPoint::new(&[0.2, 0.3, -0.9]).unwrap();
        assert_eq!(g.apply(&xi).unwrap(), xi);
    }

    #[test]
    fn boundary_images_stay_on_sphere() {
        let g = Isometry::boost(2, 1, 0.7).unwrap();
        let xi = BoundaryPoint::new(&[0.2, 0.3, -0.9]).unwrap();
        let eta = g.apply(&xi).unwrap();
        let norm: f64 = eta.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < POINT_TOL);
    }

    #[test]
    fn busemann_of_coincident_points_is_zero() {
        let x = InteriorPoint::from_ball(&[0.1, 0.4]).unwrap();
        let xi = BoundaryPoint::from_angle(1.0);
        assert_eq!(busemann(&x, &x, &xi).unwrap(), 0.0);
    }

    #[test]
    fn busemann_along_ray_equals_distance() {
        let o = InteriorPoint::origin(1);
        let xi = BoundaryPoint::from_angle(0.0);
        let xp = InteriorPoint::from_ball(&[0.5, 0.0]).unwrap();
        assert!((busemann(&o, &xp, &xi).unwrap() - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn singular_kernel_is_an_error() {
        let x = InteriorPoint::from_ball(&[1.0, 0.0]);
        assert!(x.is_err());
        let xi = BoundaryPoint::from_angle(0.0);
        let near = geodesic_toward(&InteriorPoint::origin(1), &xi, 40.0).unwrap();
        assert!(matches!(poisson_kernel(&near, &xi), Err(Error::SingularKernel { .. })));
    }

    #[test]
    fn geodesic_parameter_is_distance() {
        let x = InteriorPoint::from_ball(&[0.2, -0.3, 0.1]).unwrap();
        let xi = BoundaryPoint::new(&[-0.5, 0.5, 0.7]).unwrap();
        assert_eq!(geodesic_toward(&x, &xi, 0.0).unwrap(), x);
        let y = geodesic_toward(&x, &xi, 2.0).unwrap();
        assert!((hyp_distance(&x, &y).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let g = Isometry::boost(2, 0, 0.8).unwrap().product(&Isometry::rotation(2, 1, 2, 0.4).unwrap());
        let e = g.product(&g.inverse());
        assert!(e.distance(&Isometry::identity(2)) < 1e-12);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn product_is_right_action() {
        let a = Isometry::boost(1, 0, 0.5).unwrap();
        let b = Isometry::rotation(1, 0, 1, 0.3).unwrap();
        let x = InteriorPoint::from_ball(&[0.1, 0.2]).unwrap();
        let lhs = a.product(&b).apply(&x).unwrap();
        let rhs = b.apply(&a.apply(&x).unwrap()).unwrap();
        assert!(hyp_distance(&lhs, &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn translation_length_of_boost() {
        for n in 1..=3 {
            let mut g = Isometry::boost(n, 0, 1.3).unwrap();
            if n >= 2 {
                g = g.product(&Isometry::rotation(n, 1, 2, 0.4).unwrap());
            }
            let l = g.translation_length(1e-8).unwrap();
            assert!((l - 1.3).abs() < 1e-8, "n = {n}: {l}");
        }
        assert!(Isometry::rotation(2, 0, 1, 0.5).unwrap().translation_length(1e-8).is_none());
    }

    #[test]
    fn attracting_fixed_point_of_boost() {
        let g = Isometry::boost(2, 1, 0.9).unwrap();
        let xi = g.attracting_fixed_point().unwrap();
        assert!((xi.coords()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_matrix_is_rejected() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 0)] = 2.0;
        assert!(Isometry::new(m).is_err());
        let mut flip = DMatrix::identity(3, 3);
        flip[(2, 2)] = -1.0;
        flip[(0, 0)] = -1.0;
        assert!(Isometry::new(flip).is_err());
    }

    #[test]
    fn stereographic_round_trip() {
        let z = num_complex::Complex64::new(0.3, -1.2);
        let xi = BoundaryPoint::from_complex(z);
        assert!((xi.to_complex() - z).norm() < 1e-12);
    }
}
