//! Mobius transformations of the Riemann sphere and their Lorentz matrices.
//!
//! `S^2` is identified with `C u {inf}` by `z = (x + i y) / (1 - x_3)`; with
//! that convention `SL(2,C)` acting by `X -> A X A^*` on Hermitian matrices
//! reproduces the Mobius action on boundary points. Maps preserving the unit
//! circle (`SU(1,1)` up to scale) also fix the `x_3` axis and restrict to
//! isometries of `H^2` with boundary the equator.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hyperbolic::Isometry;

/// `z -> (a z + b) / (c z + d)`, stored with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    /// Normalizes to unit determinant.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.norm() > 1e-300) || !det.is_finite() {
            return Err(Error::Construction(format!("degenerate Mobius matrix (det = {det})")));
        }
        let s = det.sqrt();
        let m = Self { a: a / s, b: b / s, c: c / s, d: d / s };
        if ![m.a, m.b, m.c, m.d].iter().all(|v| v.is_finite()) {
            return Err(Error::Construction("non-finite Mobius entries".into()));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one }
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// `self` after `other`: `z -> self(other(z))`.
    pub fn after(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// The map sending `(z1, z2, z3)` to `(0, 1, inf)`.
    fn to_standard(z1: C64, z2: C64, z3: C64) -> Result<Self> {
        // (z - z1)(z2 - z3) / ((z - z3)(z2 - z1))
        Self::new(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))
    }

    /// Unique Mobius map with `src[i] -> dst[i]` for distinct finite points.
    pub fn from_three_points(src: [C64; 3], dst: [C64; 3]) -> Result<Self> {
        let s = Self::to_standard(src[0], src[1], src[2])?;
        let t = Self::to_standard(dst[0], dst[1], dst[2])?;
        Ok(t.inverse().after(&s))
    }

    /// Conjugate `c m c^{-1}`.
    pub fn conjugated_by(&self, c: &Mobius) -> Mobius {
        c.after(self).after(&c.inverse())
    }

    /// Lorentz matrix on `(x_1, x_2, x_3, t)` realizing this map on `S^2`.
    pub fn lorentz_matrix(&self) -> DMatrix<f64> {
        let m = [[self.a, self.b], [self.c, self.d]];
        let mut out = DMatrix::zeros(4, 4);
        for k in 0..4 {
            let mut v = [0.0; 4];
            v[k] = 1.0;
            let (x, y, z, t) = (v[0], v[1], v[2], v[3]);
            let h = [
                [C64::new(t + z, 0.0), C64::new(x, y)],
                [C64::new(x, -y), C64::new(t - z, 0.0)],
            ];
            // A H A^*
            let mut ah = [[C64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    ah[i][j] = m[i][0] * h[0][j] + m[i][1] * h[1][j];
                }
            }
            let mut r = [[C64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = ah[i][0] * m[j][0].conj() + ah[i][1] * m[j][1].conj();
                }
            }
            out[(0, k)] = r[0][1].re;
            out[(1, k)] = r[0][1].im;
            out[(2, k)] = (r[0][0].re - r[1][1].re) / 2.0;
            out[(3, k)] = (r[0][0].re + r[1][1].re) / 2.0;
        }
        out
    }

    /// Isometry of `H^3` (boundary `S^2`).
    pub fn to_isometry(&self) -> Result<Isometry> {
        Isometry::new(self.lorentz_matrix())
    }

    /// Isometry of `H^2` (boundary the unit circle) for a map preserving the
    /// unit disk. Fails if the map does not fix the unit circle.
    pub fn to_planar_isometry(&self) -> Result<Isometry> {
        let m = self.lorentz_matrix();
        let scale = m.amax().max(1.0);
        let off = [m[(2, 0)], m[(2, 1)], m[(2, 3)], m[(0, 2)], m[(1, 2)], m[(3, 2)]];
        let leak = off.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if leak > 1e-9 * scale || (m[(2, 2)] - 1.0).abs() > 1e-9 * scale {
            return Err(Error::Construction(
                "Mobius map does not preserve the unit disk; it has no planar isometry".into(),
            ));
        }
        let idx = [0usize, 1, 3];
        let planar = DMatrix::from_fn(3, 3, |i, j| m[(idx[i], idx[j])]);
        Isometry::new(planar)
    }

    /// Recovers an `SL(2,C)` representative (up to sign) from a Lorentz matrix
    /// on `H^3` by reading off images of the Hermitian basis.
    pub fn from_lorentz(g: &Isometry) -> Result<Mobius> {
        if g.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: g.dim() });
        }
        let m = g.matrix();
        // Image of the null vectors for z = 0 (south pole), z = inf (north pole), z = 1.
        let img = |v: [f64; 4]| -> C64 {
            let w: Vec<f64> = (0..4).map(|r| (0..4).map(|c| m[(r, c)] * v[c]).sum()).collect();
            let xi = crate::hyperbolic::BoundaryPoint::new(&[w[0], w[1], w[2]]).expect("nonzero image");
            xi.to_complex()
        };
        let w0 = img([0.0, 0.0, -1.0, 1.0]);
        let w1 = img([1.0, 0.0, 0.0, 1.0]);
        let wm1 = img([-1.0, 0.0, 0.0, 1.0]);
        Mobius::from_three_points(
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
            [w0, w1, wm1],
        )
    }
}

/// Cayley transform from the upper half plane to the unit disk.
pub fn cayley() -> Mobius {
    Mobius::new(C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0))
        .expect("Cayley transform is invertible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::BoundaryPoint;

    fn sample() -> Mobius {
        Mobius::new(C64::new(1.2, 0.3), C64::new(-0.4, 0.8), C64::new(0.5, -0.1), C64::new(0.9, 0.2)).unwrap()
    }

    #[test]
    fn lorentz_matrix_reproduces_mobius_action() {
        let m = sample();
        let g = m.to_isometry().unwrap();
        for z in [C64::new(0.3, 0.1), C64::new(-2.0, 1.5), C64::new(0.0, -0.7)] {
            let xi = BoundaryPoint::from_complex(z);
            let img = g.apply(&xi).unwrap().to_complex();
            assert!((img - m.apply(z)).norm() < 1e-10 * (1.0 + img.norm()));
        }
    }

    #[test]
    fn composition_matches_matrix_product() {
        let m = sample();
        let n = Mobius::new(C64::new(0.0, 1.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)).unwrap();
        let lhs = m.after(&n).lorentz_matrix();
        let rhs = m.lorentz_matrix() * n.lorentz_matrix();
        assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn three_point_map() {
        let src = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let dst = [C64::new(2.0, 1.0), C64::new(-1.0, 0.5), C64::new(0.3, -0.3)];
        let m = Mobius::from_three_points(src, dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert!((m.apply(*s) - *d).norm() < 1e-12);
        }
    }

    #[test]
    fn disk_automorphism_restricts_to_planar() {
        // z -> (z + 0.3) / (0.3 z + 1)
        let m = Mobius::new(C64::new(1.0, 0.0), C64::new(0.3, 0.0), C64::new(0.3, 0.0), C64::new(1.0, 0.0)).unwrap();
        let g = m.to_planar_isometry().unwrap();
        let theta = 0.7;
        let img = g.apply(&BoundaryPoint::from_angle(theta)).unwrap();
        let z = m.apply(C64::from_polar(1.0, theta));
        assert!((img.angle() - z.arg()).abs() < 1e-12);
        assert!(sample().to_planar_isometry().is_err());
    }

    #[test]
    fn lorentz_round_trip() {
        let m = sample();
        let back = Mobius::from_lorentz(&m.to_isometry().unwrap()).unwrap();
        let z = C64::new(0.4, -0.9);
        assert!((back.apply(z) - m.apply(z)).norm() < 1e-10);
    }
}
