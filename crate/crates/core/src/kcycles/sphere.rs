use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::FiniteKCycle;
use crate::crossed_product::TruncatedOperator;
use crate::error::{Error, Result};
use crate::hyperbolic::Isometry;
use crate::linalg::hermitian_eigenvalues;

/// Gauss-Legendre nodes and weights on `[-1, 1]`: Golub-Welsch for the
/// start, one Newton step on `P_n` to polish.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let mut x: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
    x.sort_by(f64::total_cmp);
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let (p, pm) = if n == 1 { (x, 1.0) } else { (p1, p0) };
        (p, n as f64 * (x * p - pm) / (x * x - 1.0))
    };
    let mut w = Vec::with_capacity(n);
    for xi in x.iter_mut() {
        let (p, dp) = legendre(*xi);
        *xi -= p / dp;
        let (_, dp) = legendre(*xi);
        w.push(2.0 / ((1.0 - *xi * *xi) * dp * dp));
    }
    (x, w)
}

/// Product rule exact for polynomials of degree `degree` on `S^2`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    pub points: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl SphereQuadrature {
    pub fn new(degree: usize) -> Self {
        let (xs, ws) = gauss_legendre(degree / 2 + 1);
        let nphi = degree + 1;
        let mut points = Vec::with_capacity(xs.len() * nphi);
        let mut weights = Vec::with_capacity(xs.len() * nphi);
        for (x, w) in xs.iter().zip(&ws) {
            let s = (1.0 - x * x).sqrt();
            for j in 0..nphi {
                let phi = TAU * j as f64 / nphi as f64;
                points.push(Vector3::new(s * phi.cos(), s * phi.sin(), *x));
                weights.push(w * TAU / nphi as f64);
            }
        }
        Self { points, weights, degree }
    }
}

fn basis_len(lmax: usize) -> usize {
    lmax * (lmax + 2)
}

fn basis_index(l: usize, m: i64) -> usize {
    (l * l - 1) + (m + l as i64) as usize
}

/// Unit exact and co-exact fields `grad Y_lm / sqrt(l(l+1))` and
/// `p x grad Y_lm / sqrt(l(l+1))` at `p`, for real spherical harmonics,
/// in basis order.
fn hodge_fields(lmax: usize, p: &Vector3<f64>) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let x = p.z.clamp(-1.0, 1.0);
    let s = (p.x * p.x + p.y * p.y).sqrt();
    let phi = p.y.atan2(p.x);
    let (e_th, e_ph) = if s > 0.0 {
        (Vector3::new(x * phi.cos(), x * phi.sin(), -s), Vector3::new(-phi.sin(), phi.cos(), 0.0))
    } else {
        (Vector3::new(x, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0))
    };
    let n = lmax + 2;
    // q[l][m] = normalized P_l^m (Condon-Shortley), r[l][m] = q[l][m] / sin
    let mut q = vec![vec![0.0; n + 1]; n + 1];
    let mut r = vec![vec![0.0; n + 1]; n + 1];
    q[0][0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=n {
        let f = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        q[m][m] = f * s * q[m - 1][m - 1];
        r[m][m] = if m == 1 { f * q[0][0] } else { f * s * r[m - 1][m - 1] };
    }
    for m in 0..n {
        let f = ((2 * m + 3) as f64).sqrt();
        q[m + 1][m] = f * x * q[m][m];
        r[m + 1][m] = f * x * r[m][m];
        for l in m + 2..=n {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            q[l][m] = a * (x * q[l - 1][m] - b * q[l - 2][m]);
            r[l][m] = a * (x * r[l - 1][m] - b * r[l - 2][m]);
        }
    }
    let mut out = vec![(Vector3::zeros(), Vector3::zeros()); basis_len(lmax)];
    let sq2 = std::f64::consts::SQRT_2;
    for l in 1..=lmax {
        let lf = l as f64;
        let norm = 1.0 / (lf * (lf + 1.0)).sqrt();
        for m in 0..=l {
            let mf = m as f64;
            let up = if m < l { ((lf - mf) * (lf + mf + 1.0)).sqrt() * q[l][m + 1] } else { 0.0 };
            let dq = if m == 0 {
                (lf * (lf + 1.0)).sqrt() * q[l][1]
            } else {
                0.5 * (up - ((lf + mf) * (lf - mf + 1.0)).sqrt() * q[l][m - 1])
            };
            let push = |out: &mut Vec<(Vector3<f64>, Vector3<f64>)>, mm: i64, d_th: f64, d_ph: f64| {
                let e = (e_th * d_th + e_ph * d_ph) * norm;
                out[basis_index(l, mm)] = (e, p.cross(&e));
            };
            if m == 0 {
                push(&mut out, 0, dq, 0.0);
            } else {
                let (c, sn) = ((mf * phi).cos(), (mf * phi).sin());
                push(&mut out, m as i64, sq2 * dq * c, -sq2 * mf * r[l][m] * sn);
                push(&mut out, -(m as i64), sq2 * dq * sn, sq2 * mf * r[l][m] * c);
            }
        }
    }
    out
}

fn labels(lmax: usize) -> Vec<String> {
    let mut v = Vec::with_capacity(2 * basis_len(lmax));
    for l in 1..=lmax as i64 {
        for m in -l..=l {
            v.push(format!("l={l},m={m},+"));
            v.push(format!("l={l},m={m},-"));
        }
    }
    v
}

/// Degree of each basis vector in the graded basis.
fn degrees(lmax: usize) -> Vec<usize> {
    (1..=lmax).flat_map(|l| std::iter::repeat(l).take(2 * (2 * l + 1))).collect()
}

#[derive(Clone, Debug)]
pub struct SphereCycle {
    pub cycle: FiniteKCycle,
    pub lmax: usize,
    /// `l` of each basis vector.
    pub degrees: Vec<usize>,
}

/// Signature operator on 1-forms of `S^2` truncated at `l_max`, in the
/// eigenbasis `u_+- = (dY +- i *dY) / sqrt 2` of `gamma = i *`. `F` is `+1`
/// on exact and `-1` on co-exact forms, so it swaps `u_+` and `u_-`.
pub fn sphere_signature_operator(lmax: usize) -> Result<SphereCycle> {
    if lmax < 2 {
        return Err(Error::InvalidParameter(format!("l_max must be at least 2, got {lmax}")));
    }
    let n = 2 * basis_len(lmax);
    let mut f = DMatrix::<C64>::zeros(n, n);
    for i in 0..n / 2 {
        f[(2 * i, 2 * i + 1)] = C64::new(1.0, 0.0);
        f[(2 * i + 1, 2 * i)] = C64::new(1.0, 0.0);
    }
    let grading = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let cycle = FiniteKCycle { labels: labels(lmax), grading: Some(grading), f, weights: vec![1.0; n], kernel: Vec::new() };
    Ok(SphereCycle { cycle, lmax, degrees: degrees(lmax) })
}

/// Boundary map `xi -> (A xi + b) / (c.xi + d)` of a Lorentz matrix and its
/// ambient Jacobian.
fn boundary_map(m: &DMatrix<f64>, p: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let a = Matrix3::from_fn(|i, j| m[(i, j)]);
    let b = Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]);
    let c = Vector3::new(m[(3, 0)], m[(3, 1)], m[(3, 2)]);
    let y = a * p + b;
    let tau = c.dot(p) + m[(3, 3)];
    let jac = a / tau - y * c.transpose() / (tau * tau);
    (y / tau, jac)
}

/// Matrix of the pullback `omega -> g^* omega` on the truncated graded basis,
/// by a product rule of the given degree (default `2 l_max + 2`).
pub fn moebius_pullback(lmax: usize, g: &Isometry, degree: Option<usize>) -> Result<TruncatedOperator> {
    if g.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: g.dim() });
    }
    if lmax < 2 {
        return Err(Error::InvalidParameter(format!("l_max must be at least 2, got {lmax}")));
    }
    let required = 2 * lmax + 2;
    let degree = degree.unwrap_or(required);
    if degree < required {
        return Err(Error::UnderResolved { degree, required });
    }
    let quad = SphereQuadrature::new(degree);
    let nb = basis_len(lmax);
    let nq = quad.points.len();
    let m = g.matrix();
    // Columns of X: sqrt(w) J B_i(q); of Y: sqrt(w) B_j(g q). Real basis order
    // (e_0, f_0, e_1, f_1, ...).
    let cols: Vec<(Vec<f64>, Vec<f64>)> = quad
        .points
        .par_iter()
        .zip(quad.weights.par_iter())
        .map(|(p, w)| {
            let sw = w.sqrt();
            let (gp, jac) = boundary_map(m, p);
            let gp = gp.normalize();
            let here = hodge_fields(lmax, p);
            let there = hodge_fields(lmax, &gp);
            let mut x = Vec::with_capacity(6 * nb);
            let mut y = Vec::with_capacity(6 * nb);
            for ((e, f), (e2, f2)) in here.iter().zip(&there) {
                for v in [jac * e, jac * f] {
                    x.extend((v * sw).iter());
                }
                for v in [e2, f2] {
                    y.extend((v * sw).iter());
                }
            }
            (x, y)
        })
        .collect();
    let n = 2 * nb;
    let mut xm = DMatrix::<f64>::zeros(n, 3 * nq);
    let mut ym = DMatrix::<f64>::zeros(n, 3 * nq);
    for (qi, (x, y)) in cols.iter().enumerate() {
        for i in 0..n {
            for k in 0..3 {
                xm[(i, 3 * qi + k)] = x[3 * i + k];
                ym[(i, 3 * qi + k)] = y[3 * i + k];
            }
        }
    }
    let real = &xm * ym.transpose();
    // u_+ = (e + i f)/sqrt 2, u_- = (e - i f)/sqrt 2; entries <u_a, P u_b>
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(0.0, h), C64::new(0.0, -h)]];
    let mut out = DMatrix::<C64>::zeros(n, n);
    for bi in 0..nb {
        for bj in 0..nb {
            for a in 0..2 {
                for b in 0..2 {
                    let mut z = C64::new(0.0, 0.0);
                    for s in 0..2 {
                        for t in 0..2 {
                            z += v[s][a].conj() * real[(2 * bi + s, 2 * bj + t)] * v[t][b];
                        }
                    }
                    out[(2 * bi + a, 2 * bj + b)] = z;
                }
            }
        }
    }
    let mut op = TruncatedOperator::new(out, labels(lmax))?;
    op.depth = Some(lmax);
    Ok(op)
}

/// Operator norm of `[F, P]` restricted to rows of degree `l <= interior`.
pub fn pullback_commutator_defect(cycle: &SphereCycle, p: &TruncatedOperator, interior: usize) -> Result<f64> {
    let n = cycle.cycle.dim();
    if p.matrix.nrows() != n || p.matrix.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.matrix.nrows() });
    }
    let rows = cycle.degrees.iter().filter(|&&l| l <= interior).count();
    // F swaps each (+, -) pair, so (FP)_ij = P_{i^1, j} and (PF)_ij = P_{i, j^1}.
    let comm = DMatrix::from_fn(rows, n, |i, j| p.matrix[(i ^ 1, j)] - p.matrix[(i, j ^ 1)]);
    let gram = &comm * comm.adjoint();
    Ok(hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Operator norm of `P(g) P(g^{-1}) - I` on the block of degrees
/// `l <= interior`, rows and columns.
pub fn pullback_round_trip_defect(
    cycle: &SphereCycle,
    p: &TruncatedOperator,
    p_inv: &TruncatedOperator,
    interior: usize,
) -> Result<f64> {
    let n = cycle.cycle.dim();
    if p.matrix.nrows() != n || p_inv.matrix.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.matrix.nrows().min(p_inv.matrix.nrows()) });
    }
    let r = cycle.degrees.iter().filter(|&&l| l <= interior).count();
    let mut block = p.matrix.rows(0, r) * p_inv.matrix.columns(0, r);
    for i in 0..r {
        block[(i, i)] -= C64::new(1.0, 0.0);
    }
    let gram = &block * block.adjoint();
    Ok(hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        for k in 0..=11 {
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((approx - exact).abs() < 1e-14, "{k}");
        }
    }

    #[test]
    fn hodge_fields_are_orthonormal() {
        let lmax = 5;
        let quad = SphereQuadrature::new(2 * lmax + 2);
        let nb = basis_len(lmax);
        let mut gram = DMatrix::<f64>::zeros(2 * nb, 2 * nb);
        for (p, w) in quad.points.iter().zip(&quad.weights) {
            let fl: Vec<Vector3<f64>> = hodge_fields(lmax, p).into_iter().flat_map(|(e, f)| [e, f]).collect();
            for i in 0..2 * nb {
                assert!(fl[i].dot(p).abs() < 1e-14);
                for j in 0..2 * nb {
                    gram[(i, j)] += w * fl[i].dot(&fl[j]);
                }
            }
        }
        assert!((gram - DMatrix::identity(2 * nb, 2 * nb)).amax() < 1e-12);
    }

    #[test]
    fn grading_and_involution() {
        let s = sphere_signature_operator(4).unwrap();
        s.cycle.validate().unwrap();
        assert_eq!(s.cycle.anticommutator_defect(), 0.0);
        assert_eq!(s.cycle.involution_defect(), 0.0);
    }

    #[test]
    fn identity_pullback_is_identity() {
        let p = moebius_pullback(4, &Isometry::identity(2), None).unwrap();
        assert!((p.matrix - DMatrix::identity(48, 48)).camax() < 1e-12);
    }

    #[test]
    fn rotations_commute_with_f() {
        let s = sphere_signature_operator(6).unwrap();
        let g = Isometry::rotation(2, 0, 2, 0.7).unwrap().product(&Isometry::rotation(2, 0, 1, 0.4).unwrap());
        let p = moebius_pullback(6, &g, None).unwrap();
        assert!(pullback_commutator_defect(&s, &p, 6).unwrap() < 1e-10);
        // rotations are unitary on each l-block
        let u = &p.matrix * p.matrix.adjoint();
        assert!((u - DMatrix::identity(96, 96)).camax() < 1e-10);
    }

    #[test]
    fn boost_round_trip_converges() {
        let g = Isometry::boost(2, 0, 0.3).unwrap();
        let mut last = f64::INFINITY;
        for l in [4, 8] {
            let s = sphere_signature_operator(l).unwrap();
            let p = moebius_pullback(l, &g, None).unwrap();
            let q = moebius_pullback(l, &g.inverse(), None).unwrap();
            let d = pullback_round_trip_defect(&s, &p, &q, l / 2).unwrap();
            assert!(d < last, "{l}: {d}");
            last = d;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn under_resolved_quadrature_is_rejected() {
        let err = moebius_pullback(6, &Isometry::identity(2), Some(10)).unwrap_err();
        assert!(matches!(err, Error::UnderResolved { degree: 10, required: 14 }));
    }
}
