use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::{FiniteKCycle, SymbolFunction};
use crate::crossed_product::TruncatedOperator;
use crate::error::{Error, Result};

fn modes(n: usize, with_zero: bool) -> Vec<i64> {
    let n = n as i64;
    (-n..=n).filter(|&k| with_zero || k != 0).collect()
}

fn check_cutoff(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("Fourier cutoff must be at least 4, got {n}")));
    }
    Ok(())
}

fn diagonal(vals: impl Iterator<Item = f64>, labels: Vec<String>) -> TruncatedOperator {
    let v: Vec<C64> = vals.map(|x| C64::new(x, 0.0)).collect();
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v));
    TruncatedOperator::new(m, labels).expect("labels match the diagonal")
}

/// Exact 1-forms `e^{ik theta} d theta`, `1 <= |k| <= N`, with `T = sign k`
/// and norms `2 pi / |k|`.
pub fn circle_module(n: usize) -> Result<FiniteKCycle> {
    check_cutoff(n)?;
    let ks = modes(n, false);
    let t: Vec<C64> = ks.iter().map(|&k| C64::new(k.signum() as f64, 0.0)).collect();
    Ok(FiniteKCycle {
        labels: ks.iter().map(|k| format!("k={k}")).collect(),
        grading: None,
        f: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(t)),
        weights: ks.iter().map(|&k| TAU / k.unsigned_abs() as f64).collect(),
        kernel: Vec::new(),
    })
}

/// `(1/|lambda|) int omega ^ conj(*omega)` for `omega = e^{ik theta} d theta`,
/// whose eigenvalue under `-i d*` is `lambda = k`, by an `m`-point rule.
pub fn mode_norm_sq(k: i64, m: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("d theta is not exact".into()));
    }
    let h = TAU / m as f64;
    let s: C64 = (0..m)
        .map(|j| {
            let th = j as f64 * h;
            let w = C64::from_polar(1.0, k as f64 * th);
            // omega = w d theta, *omega = w
            w * w.conj() * h
        })
        .sum();
    Ok(s.re / k.unsigned_abs() as f64)
}

/// `i int eta_1 ^ conj(omega_2)` with the primitive
/// `eta_1 = e^{i k1 theta} / (i k1) + c` of `omega_1 = e^{i k1 theta} d theta`.
pub fn t_pairing(k1: i64, k2: i64, c: C64, m: usize) -> Result<C64> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidParameter("pairing is defined on exact forms, k != 0".into()));
    }
    let h = TAU / m as f64;
    let i = C64::new(0.0, 1.0);
    let s: C64 = (0..m)
        .map(|j| {
            let th = j as f64 * h;
            let eta = C64::from_polar(1.0, k1 as f64 * th) / (i * k1 as f64) + c;
            eta * C64::from_polar(1.0, -(k2 as f64) * th) * h
        })
        .sum();
    Ok(i * s)
}

fn mode_labels(n: usize) -> Vec<String> {
    modes(n, true).iter().map(|k| format!("k={k}")).collect()
}

/// `E_+` and `E_-` on `L^2` 1-forms with modes `|k| <= N`; both vanish on the
/// non-exact form `d theta`.
pub fn hardy_projections(n: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    check_cutoff(n)?;
    let ks = modes(n, true);
    let plus = diagonal(ks.iter().map(|&k| if k > 0 { 1.0 } else { 0.0 }), mode_labels(n));
    let minus = diagonal(ks.iter().map(|&k| if k < 0 { 1.0 } else { 0.0 }), mode_labels(n));
    Ok((plus, minus))
}

/// Multiplication by `e^{i theta}` on modes `|k| <= N`.
pub fn shift_operator(n: usize) -> Result<TruncatedOperator> {
    check_cutoff(n)?;
    let d = 2 * n + 1;
    let mut m = DMatrix::<C64>::zeros(d, d);
    for c in 0..d - 1 {
        m[(c + 1, c)] = C64::new(1.0, 0.0);
    }
    TruncatedOperator::new(m, mode_labels(n))
}

#[derive(Clone, Debug)]
pub struct MultiplicationOperator {
    pub op: TruncatedOperator,
    /// Largest Fourier coefficient magnitude in the upper half of the
    /// resolved band `[M/4, M/2)`; bounds the aliasing error of the entries.
    pub aliasing_bound: f64,
    pub grid: usize,
}

/// Convolution matrix `A_{jk} = a_{j-k}` of the Fourier coefficients of
/// `a`, computed by FFT on `grid >= 8N` points.
pub fn multiplication_operator(a: &SymbolFunction, n: usize, grid: usize) -> Result<MultiplicationOperator> {
    check_cutoff(n)?;
    if grid < 8 * n {
        return Err(Error::InvalidParameter(format!("grid of {grid} points is below 8N = {}", 8 * n)));
    }
    let mut buf: Vec<C64> = (0..grid).map(|j| a.at_angle(TAU * j as f64 / grid as f64)).collect();
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let scale = 1.0 / grid as f64;
    let coef = |k: i64| buf[k.rem_euclid(grid as i64) as usize] * scale;
    let ks = modes(n, true);
    let d = ks.len();
    let m = DMatrix::from_fn(d, d, |r, c| coef(ks[r] - ks[c]));
    let aliasing_bound = (grid / 4..grid / 2)
        .flat_map(|k| [coef(k as i64).norm(), coef(-(k as i64)).norm()])
        .fold(0.0, f64::max);
    Ok(MultiplicationOperator { op: TruncatedOperator::new(m, mode_labels(n))?, aliasing_bound, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kcycles::Smoothness;
    use crate::linalg::singular_values;

    #[test]
    fn t_spectrum_and_weights() {
        let m = circle_module(6).unwrap();
        m.validate().unwrap();
        let diag: Vec<f64> = m.f.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag.iter().filter(|&&v| v == 1.0).count(), 6);
        assert_eq!(diag.iter().filter(|&&v| v == -1.0).count(), 6);
        for k in [-6i64, -1, 1, 3] {
            assert!((mode_norm_sq(k, 64).unwrap() - TAU / k.abs() as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn pairing_ignores_primitive_constant() {
        for (k1, k2) in [(1, 1), (2, 2), (-3, -3), (2, 5)] {
            let a = t_pairing(k1, k2, C64::new(0.0, 0.0), 64).unwrap();
            let b = t_pairing(k1, k2, C64::new(1.7, -0.4), 64).unwrap();
            assert!((a - b).norm() < 1e-12);
            // <T w, w> = sign(k) 2 pi / |k|
            let expect = if k1 == k2 { TAU / k1 as f64 } else { 0.0 };
            assert!((a - C64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn hardy_projection_algebra() {
        let (p, m) = hardy_projections(8).unwrap();
        assert_eq!((&p.matrix * &p.matrix - &p.matrix).camax(), 0.0);
        assert_eq!((&p.matrix * &m.matrix).camax(), 0.0);
        let sum = &p.matrix + &m.matrix;
        for i in 0..17 {
            let expect = if i == 8 { 0.0 } else { 1.0 };
            assert_eq!(sum[(i, i)].re, expect);
        }
    }

    #[test]
    fn hardy_commutator_with_shift_has_rank_one() {
        let n = 10;
        let (p, _) = hardy_projections(n).unwrap();
        let s = shift_operator(n).unwrap().matrix;
        let comm = &p.matrix * &s - &s * &p.matrix;
        let inner = comm.view((1, 1), (2 * n - 1, 2 * n - 1)).into_owned();
        let sv = singular_values(&inner);
        assert!((sv[0] - 1.0).abs() < 1e-14);
        assert!(sv[1..].iter().all(|&v| v < 1e-14));
    }

    #[test]
    fn multiplication_operators() {
        let one = SymbolFunction::constant(1, C64::new(1.0, 0.0));
        let m = multiplication_operator(&one, 6, 64).unwrap();
        assert!((m.op.matrix.clone() - DMatrix::identity(13, 13)).camax() < 1e-15);
        let e = multiplication_operator(&SymbolFunction::exp_i_theta(), 6, 64).unwrap();
        assert!((e.op.matrix - shift_operator(6).unwrap().matrix).camax() < 1e-15);
        let real = SymbolFunction::on_circle(Smoothness::Smooth, |t| C64::new((t.cos()).exp(), 0.0));
        let r = multiplication_operator(&real, 8, 128).unwrap();
        assert!((&r.op.matrix - r.op.matrix.adjoint()).camax() < 1e-10);
        assert!(r.aliasing_bound < 1e-14);
        assert!(multiplication_operator(&real, 8, 63).is_err());
    }
}
