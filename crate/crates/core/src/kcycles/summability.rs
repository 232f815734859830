use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::circle::{hardy_projections, multiplication_operator};
use super::{Smoothness, SymbolFunction};
use crate::crossed_product::TruncatedOperator;
use crate::error::{Error, Result};
use crate::groups::BoundaryConjugacy;
use crate::linalg::{least_squares, schatten_from_singular, singular_values};

/// `(sum s_i^p)^{1/p}` over the singular values of `op`.
pub fn schatten_norm(op: &TruncatedOperator, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("Schatten exponent must be positive, got {p}")));
    }
    Ok(schatten_from_singular(&singular_values(&op.matrix), p))
}

#[derive(Clone, Debug, Serialize)]
pub struct JansonWolffEstimate {
    pub p: f64,
    /// Extrapolated integral, `None` when the band scan diverges.
    pub value: Option<f64>,
    /// `(h, I(h))`: the integral with the band `|x - y| < h` removed.
    pub partial: Vec<(f64, f64)>,
    /// Fitted ratio of successive increments of `I(h)` as `h` halves.
    pub ratio: f64,
    pub divergent: bool,
}

/// Ratio at or above `1 - DIVERGENCE_TOL` counts as divergent.
const DIVERGENCE_TOL: f64 = 0.02;

/// `int int |a(x) - a(y)|^p / |x - y|^2 dx dy` over `S^1 x S^1`, with `|x - y|`
/// chordal. The double sum on `grid` points runs over shifts
/// `Delta >= h` for `h = pi / 2^j` down to `finest_h`; the increments of
/// `I(h)` decide divergence and feed a geometric extrapolation.
pub fn janson_wolff_integral(a: &SymbolFunction, p: f64, grid: usize, finest_h: f64) -> Result<JansonWolffEstimate> {
    if grid < 256 {
        return Err(Error::InvalidParameter(format!("Janson-Wolff grid must have at least 256 points, got {grid}")));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("exponent must be positive, got {p}")));
    }
    let step = TAU / grid as f64;
    if !(finest_h >= 2.0 * step) || finest_h >= PI / 4.0 {
        return Err(Error::InvalidParameter(format!(
            "finest band width {finest_h} must lie in [{:.3e}, pi/4)",
            2.0 * step
        )));
    }
    let vals: Vec<C64> = (0..grid).map(|j| a.at_angle(j as f64 * step)).collect();
    let half = grid / 2;
    // S(m) = int |a(t + m step) - a(t)|^p dt
    let s: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|m| (0..grid).map(|j| (vals[(j + m) % grid] - vals[j]).norm().powf(p)).sum::<f64>() * step)
        .collect();
    let term = |m: usize| {
        let chord = 2.0 * (0.5 * m as f64 * step).sin();
        let mult = if 2 * m == grid { 1.0 } else { 2.0 };
        mult * s[m] * step / (chord * chord)
    };
    let mut ladder = Vec::new();
    let mut h = PI / 2.0;
    while h >= finest_h * (1.0 - 1e-12) {
        ladder.push(h);
        h /= 2.0;
    }
    let partial: Vec<(f64, f64)> = ladder
        .iter()
        .map(|&h| {
            let m0 = (h / step).ceil() as usize;
            (h, (m0.max(1)..=half).map(term).sum())
        })
        .collect();
    let incs: Vec<f64> = partial.windows(2).map(|w| w[1].1 - w[0].1).collect();
    if incs.iter().all(|&d| d <= 1e-300) {
        let total = partial.last().map(|x| x.1).unwrap_or(0.0);
        return Ok(JansonWolffEstimate { p, value: Some(total), partial, ratio: 0.0, divergent: false });
    }
    // Fit over the finer half of the ladder, where the diagonal scaling rules.
    let tail = &incs[incs.len() / 3..];
    let xs: Vec<f64> = (0..tail.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|d| d.max(1e-300).ln()).collect();
    let ratio = if tail.len() >= 2 { least_squares(&xs, &ys).0.exp() } else { 1.0 };
    let divergent = ratio >= 1.0 - DIVERGENCE_TOL;
    let last = partial.last().map(|x| x.1).unwrap_or(0.0);
    let value = (!divergent).then(|| last + tail[tail.len() - 1] * ratio / (1.0 - ratio));
    Ok(JansonWolffEstimate { p, value, partial, ratio, divergent })
}

#[derive(Clone, Debug, Serialize)]
pub struct SchattenRow {
    pub n: usize,
    pub p: f64,
    pub schatten_norm: f64,
    pub jw_integral: Option<f64>,
    pub flags: String,
}

#[derive(Clone, Debug)]
pub struct SummabilityOptions {
    /// Tolerance on the growth diagnostics.
    pub tolerance: f64,
    /// FFT grid as a multiple of `N`.
    pub grid_factor: usize,
    pub jw_grid: usize,
    /// Finest band width of the Janson-Wolff scan, in grid steps.
    pub jw_finest_steps: usize,
}

impl Default for SummabilityOptions {
    fn default() -> Self {
        Self { tolerance: 0.02, grid_factor: 16, jw_grid: 4096, jw_finest_steps: 16 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SummabilityReport {
    /// Least `p` from which `|[E_+, a]|_p` stabilizes as `N` grows.
    pub p_schatten: f64,
    /// Interpolated divergence boundary of the Janson-Wolff integral.
    pub p_janson_wolff: Option<f64>,
    pub rows: Vec<SchattenRow>,
    pub jw: Vec<JansonWolffEstimate>,
    /// Ratio of successive increments of `sum s_i^p` across the cutoffs, per `p`.
    pub schatten_ratios: Vec<(f64, f64)>,
    pub flags: Vec<String>,
    pub low_confidence: bool,
}

/// Estimates the summability threshold of `[E_+, a]` on the flat `L^2`
/// model by two routes: the Schatten scan over cutoffs `ns`, and the
/// divergence boundary of the Janson-Wolff integral over `ps`.
///
/// A `p` counts as stable when the increments of `sum s_i^p` shrink by a
/// factor below `1 - tolerance` per cutoff step, or the norm itself moves
/// by less than `tolerance`.
pub fn summability_threshold(
    a: &SymbolFunction,
    ns: &[usize],
    ps: &[f64],
    opts: &SummabilityOptions,
) -> Result<SummabilityReport> {
    if a.dim != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: a.dim });
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::InsufficientData("summability scans need at least 3 cutoffs".into()));
    }
    let mut ps = ps.to_vec();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    if ps.is_empty() || !(ps[0] > 0.0) {
        return Err(Error::InvalidParameter("p grid must be nonempty and positive".into()));
    }
    let spectra: Result<Vec<Vec<f64>>> = ns
        .iter()
        .map(|&n| {
            let (ep, _) = hardy_projections(n)?;
            let m = multiplication_operator(a, n, opts.grid_factor.max(8) * n)?;
            let c: DMatrix<C64> = &ep.matrix * &m.op.matrix - &m.op.matrix * &ep.matrix;
            Ok(singular_values(&c))
        })
        .collect();
    let spectra = spectra?;
    let mut flags = Vec::new();
    let top = spectra.last().and_then(|s| s.first().copied()).unwrap_or(0.0);
    if top < 1e-13 {
        flags.push("commutator ≡ 0".to_string());
        let rows = ns
            .iter()
            .flat_map(|&n| ps.iter().map(move |&p| SchattenRow { n, p, schatten_norm: 0.0, jw_integral: Some(0.0), flags: "commutator ≡ 0".into() }))
            .collect();
        return Ok(SummabilityReport {
            p_schatten: 0.0,
            p_janson_wolff: Some(0.0),
            rows,
            jw: Vec::new(),
            schatten_ratios: Vec::new(),
            flags,
            low_confidence: false,
        });
    }
    let finest = opts.jw_finest_steps as f64 * TAU / opts.jw_grid as f64;
    let jw: Result<Vec<JansonWolffEstimate>> =
        ps.iter().map(|&p| janson_wolff_integral(a, p, opts.jw_grid, finest)).collect();
    let jw = jw?;

    let tol = opts.tolerance;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut stable = Vec::with_capacity(ps.len());
    for (pi, &p) in ps.iter().enumerate() {
        let sums: Vec<f64> = spectra.iter().map(|s| s.iter().map(|v| v.powf(p)).sum()).collect();
        let norms: Vec<f64> = sums.iter().map(|s| s.powf(1.0 / p)).collect();
        let k = sums.len();
        let d_last = sums[k - 1] - sums[k - 2];
        let d_prev = sums[k - 2] - sums[k - 3];
        let ratio = if d_prev > 0.0 { d_last / d_prev } else { 0.0 };
        let rel = norms[k - 1] / norms[k - 2] - 1.0;
        let ok = ratio < 1.0 - tol || rel < tol;
        ratios.push((p, ratio));
        stable.push(ok);
        for (i, &n) in ns.iter().enumerate() {
            let flag = if i + 1 == k {
                if ok { "stable" } else { "growing" }
            } else {
                ""
            };
            rows.push(SchattenRow {
                n,
                p,
                schatten_norm: norms[i],
                jw_integral: if i + 1 == k { jw[pi].value } else { None },
                flags: if jw[pi].divergent && i + 1 == k { format!("{flag};jw-divergent") } else { flag.to_string() },
            });
        }
    }
    // least p from which every larger grid value is stable
    let mut first = ps.len();
    for i in (0..ps.len()).rev() {
        if stable[i] {
            first = i;
        } else {
            break;
        }
    }
    let mut low_confidence = false;
    if stable[..first].iter().any(|&s| s) {
        flags.push("non-monotone Schatten diagnostics".into());
        low_confidence = true;
    }
    let p_schatten = if first == ps.len() {
        flags.push("no stable p on the grid".into());
        low_confidence = true;
        f64::INFINITY
    } else {
        if first == 0 {
            flags.push("stable at the smallest grid p".into());
        }
        ps[first]
    };
    // divergence boundary: where log(ratio) crosses log(1 - tol)
    let target = (1.0 - tol).ln();
    let mut p_jw = None;
    for i in 1..jw.len() {
        let (a0, a1) = (jw[i - 1].ratio.max(1e-300).ln(), jw[i].ratio.max(1e-300).ln());
        if a0 >= target && a1 < target {
            p_jw = Some(ps[i - 1] + (ps[i] - ps[i - 1]) * (a0 - target) / (a0 - a1));
            break;
        }
    }
    if p_jw.is_none() {
        if jw.first().is_some_and(|j| !j.divergent) {
            flags.push("Janson-Wolff integral finite on the whole grid".into());
            p_jw = Some(ps[0]);
        } else {
            flags.push("Janson-Wolff integral divergent on the whole grid".into());
        }
        low_confidence = true;
    }
    if let Some(q) = p_jw {
        if p_schatten.is_finite() && (p_schatten - q).abs() > 0.25 * q.max(p_schatten) {
            flags.push("estimators disagree by more than 25%".into());
            low_confidence = true;
        }
    }
    Ok(SummabilityReport { p_schatten, p_janson_wolff: p_jw, rows, jw, schatten_ratios: ratios, flags, low_confidence })
}

/// `a = f o phi` on the source circle, tagged with a Hoelder exponent fitted
/// to the sample increments of `phi`.
pub fn pushforward_symbols(phi: &BoundaryConjugacy, f: &SymbolFunction) -> Result<SymbolFunction> {
    if phi.len() < 200 {
        return Err(Error::InsufficientData(format!("conjugacy has {} samples; 200 are needed", phi.len())));
    }
    let alpha = hoelder_exponent(phi);
    let phi_c = phi.clone();
    let f_c = f.clone();
    let sym = SymbolFunction::on_circle(Smoothness::Hoelder(alpha), move |t| match phi_c.evaluate_angle(t) {
        Ok(q) => f_c.eval(&q),
        Err(_) => C64::new(f64::NAN, f64::NAN),
    });
    Ok(sym.with_provenance(format!(
        "pullback by boundary conjugacy {:?} -> {:?}, depth {}",
        phi.source_kind, phi.target_kind, phi.depth
    )))
}

/// Slope of `log` median target chord against `log` median source chord over
/// sample strides `s = 1, 2, 4, ...`, clamped to `(0, 1]`. Medians keep the
/// clustering of fixed points near cusps from dominating.
fn hoelder_exponent(phi: &BoundaryConjugacy) -> f64 {
    let n = phi.len();
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut s = 1;
    while s <= n / 8 {
        let src = median((0..n).map(|i| phi.samples[i].source.chordal(&phi.samples[(i + s) % n].source)).collect());
        let tgt = median((0..n).map(|i| phi.samples[i].target.chordal(&phi.samples[(i + s) % n].target)).collect());
        if src > 0.0 && tgt > 0.0 {
            xs.push(src.ln());
            ys.push(tgt.ln());
        }
        s *= 2;
    }
    if xs.len() < 2 {
        return 1.0;
    }
    least_squares(&xs, &ys).0.clamp(1e-3, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schatten_basics() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(4.0, 0.0)]));
        let op = TruncatedOperator::new(d, vec!["0".into(), "1".into()]).unwrap();
        assert!((schatten_norm(&op, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((schatten_norm(&op, 2.0).unwrap() - op.frobenius()).abs() < 1e-12);
        assert!((schatten_norm(&op, 10.0).unwrap() - 4.0).abs() < 0.1);
        assert!(schatten_norm(&op, 0.0).is_err());
    }

    #[test]
    fn janson_wolff_constant_and_exponential() {
        let c = SymbolFunction::constant(1, C64::new(2.0, 0.0));
        let est = janson_wolff_integral(&c, 1.3, 512, 0.05).unwrap();
        assert_eq!(est.value, Some(0.0));
        let e = janson_wolff_integral(&SymbolFunction::exp_i_theta(), 2.0, 1024, 0.02).unwrap();
        let v = e.value.unwrap();
        assert!((v / (TAU * TAU) - 1.0).abs() < 0.005, "{v}");
    }

    #[test]
    fn janson_wolff_smooth_divergence() {
        let a = SymbolFunction::first_coordinate(1);
        assert!(janson_wolff_integral(&a, 0.8, 4096, 0.025).unwrap().divergent);
        assert!(!janson_wolff_integral(&a, 1.5, 4096, 0.025).unwrap().divergent);
    }

    #[test]
    fn constant_symbol_threshold_is_zero() {
        let c = SymbolFunction::constant(1, C64::new(1.0, 0.0));
        let r = summability_threshold(&c, &[8, 16, 32], &[0.5, 1.0], &SummabilityOptions::default()).unwrap();
        assert_eq!(r.p_schatten, 0.0);
        assert!(r.flags.iter().any(|f| f.contains("commutator")));
    }
}
