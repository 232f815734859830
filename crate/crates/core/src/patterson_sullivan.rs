//! Truncated Patterson–Sullivan measures and the conformal-density laws.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{map_ball, GroupPresentation};
use crate::hyperbolic::{busemann, hyp_distance, radial_projection, BoundaryPoint, InteriorPoint, Isometry};
use crate::word::Word;

/// Finite sum of point masses on the boundary sphere.
#[derive(Clone, Debug, Serialize)]
pub struct AtomicBoundaryMeasure {
    pub atoms: Vec<BoundaryPoint>,
    pub weights: Vec<f64>,
    pub words: Vec<Word>,
    /// The `x` of `mu_x`.
    pub basepoint: InteriorPoint,
    /// The orbit basepoint `x0` whose orbit carries the atoms.
    pub orbit_basepoint: InteriorPoint,
    pub s: f64,
    pub depth: usize,
    /// Exponent used for basepoint changes.
    pub delta_hat: f64,
}

pub type TestFunction<'a> = &'a (dyn Fn(&BoundaryPoint) -> f64 + Sync);

impl AtomicBoundaryMeasure {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basepoint.dim()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: TestFunction) -> f64 {
        // Ordered sum keeps the result independent of the thread count.
        let terms: Vec<f64> = self.atoms.par_iter().zip(self.weights.par_iter()).map(|(a, w)| w * f(a)).collect();
        terms.iter().sum()
    }

    /// Index of the heaviest atom.
    pub fn heaviest(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

/// `sum_g e^{-s d(x, x0 g)} delta_{xi_g} / sum_g e^{-s d(x0, x0 g)}` over the
/// word ball of radius `depth`, with atoms at the radial projections `xi_g`
/// of `x0 g`. Requires `s > delta_hat`.
pub fn ps_measure(
    g: &GroupPresentation,
    x: &InteriorPoint,
    x0: &InteriorPoint,
    s: f64,
    depth: usize,
    delta_hat: f64,
) -> Result<AtomicBoundaryMeasure> {
    if x.dim() != g.dim() || x0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: x.dim().min(x0.dim()) });
    }
    if !(s > delta_hat) {
        return Err(Error::NearDivergence { s, delta_hat });
    }
    if x0.spatial().iter().all(|c| *c == 0.0) {
        return Err(Error::InvalidParameter(
            "orbit basepoint must differ from the ball center, which has no radial projection".into(),
        ));
    }
    let cap = crate::groups::DEFAULT_ELEMENT_CAP;
    let count = crate::word::free_ball_count(g.rank(), depth);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let levels = map_ball(g, depth, |w, m| -> Result<(Word, BoundaryPoint, f64, f64)> {
        let y = m.apply(x0)?;
        Ok((Word::from_letters(w), radial_projection(&y)?, hyp_distance(x, &y)?, hyp_distance(x0, &y)?))
    });
    let mut atoms = Vec::with_capacity(count);
    let mut words = Vec::with_capacity(count);
    let mut dx = Vec::with_capacity(count);
    let mut norm_terms = Vec::with_capacity(count);
    for item in levels.into_iter().flatten() {
        let (w, p, d, d0) = item?;
        words.push(w);
        atoms.push(p);
        dx.push(d);
        norm_terms.push((-s * d0).exp());
    }
    let z: f64 = norm_terms.iter().sum();
    let weights = dx.iter().map(|d| (-s * d).exp() / z).collect();
    Ok(AtomicBoundaryMeasure {
        atoms,
        weights,
        words,
        basepoint: x.clone(),
        orbit_basepoint: x0.clone(),
        s,
        depth,
        delta_hat,
    })
}

/// `mu_{x'} = e^{-delta D(x', x, .)} mu_x`.
pub fn translate_basepoint(mu: &AtomicBoundaryMeasure, xp: &InteriorPoint) -> Result<AtomicBoundaryMeasure> {
    if xp.dim() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: xp.dim() });
    }
    let weights: Result<Vec<f64>> = mu
        .atoms
        .par_iter()
        .zip(mu.weights.par_iter())
        .map(|(a, w)| Ok(w * (-mu.delta_hat * busemann(xp, &mu.basepoint, a)?).exp()))
        .collect();
    Ok(AtomicBoundaryMeasure { weights: weights?, basepoint: xp.clone(), ..mu.clone() })
}

/// Largest relative gap in the transport law
/// `(R_g)_* mu_x = e^{delta D(x, x g, .)} mu_x` over the test functions,
/// normalized by `1 + |int f dmu_x|`.
pub fn transport_defect(mu: &AtomicBoundaryMeasure, g: &Isometry, tests: &[TestFunction]) -> Result<f64> {
    transport_defect_with(mu, g, tests, mu.delta_hat)
}

/// As [`transport_defect`] with an explicit exponent on the right-hand side.
pub fn transport_defect_with(
    mu: &AtomicBoundaryMeasure,
    g: &Isometry,
    tests: &[TestFunction],
    exponent: f64,
) -> Result<f64> {
    if g.dim() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: g.dim() });
    }
    if *g == Isometry::identity(g.dim()) {
        return Ok(0.0);
    }
    let x = &mu.basepoint;
    let xg = g.apply(x)?;
    let rows: Result<Vec<(BoundaryPoint, f64)>> = mu
        .atoms
        .par_iter()
        .map(|a| Ok((g.apply(a)?, (exponent * busemann(x, &xg, a)?).exp())))
        .collect();
    let rows = rows?;
    let mut worst = 0.0f64;
    for f in tests {
        let mut pushed = 0.0;
        let mut reweighted = 0.0;
        let mut plain = 0.0;
        for ((a, w), (moved, factor)) in mu.atoms.iter().zip(&mu.weights).zip(&rows) {
            let fa = f(a);
            pushed += w * f(moved);
            reweighted += w * fa * factor;
            plain += w * fa;
        }
        worst = worst.max((pushed - reweighted).abs() / (1.0 + plain.abs()));
    }
    Ok(worst)
}

/// Lipschitz bump `max(0, 1 - |xi - center| / radius)`.
pub fn lipschitz_bump(center: BoundaryPoint, radius: f64) -> impl Fn(&BoundaryPoint) -> f64 + Sync {
    move |xi| (1.0 - xi.chordal(&center) / radius).max(0.0)
}

/// Total mass of `mu_x` at one site, with the optional Laplacian check.
#[derive(Clone, Debug, Serialize)]
pub struct MassSample {
    pub point: InteriorPoint,
    pub mass: f64,
    /// `|-Lap Phi - delta (n - delta) Phi| / Phi` from a geodesic stencil;
    /// `None` when skipped.
    pub laplacian_defect: Option<f64>,
    pub stencil_points: usize,
}

/// Smallest and largest allowed stencil spacing.
pub const STENCIL_RANGE: (f64, f64) = (1e-3, 1e-1);

/// `Phi(x) = |mu_x|` with `mu_x` obtained from `mu` by the basepoint change
/// law. With `spacing`, also reports the finite-difference eigenfunction
/// defect on a geodesic stencil of `4(n+1) + 1` points.
pub fn mass_profile(
    mu: &AtomicBoundaryMeasure,
    points: &[InteriorPoint],
    spacing: Option<f64>,
) -> Result<Vec<MassSample>> {
    if let Some(h) = spacing {
        if !(STENCIL_RANGE.0..=STENCIL_RANGE.1).contains(&h) {
            return Err(Error::InvalidParameter(format!(
                "stencil spacing {h} outside [{}, {}]",
                STENCIL_RANGE.0, STENCIL_RANGE.1
            )));
        }
    }
    let degenerate = mu.len() < 2;
    if degenerate && spacing.is_some() {
        log::warn!("one-atom measure: Laplacian check skipped");
    }
    let mass = |y: &InteriorPoint| -> Result<f64> {
        let mut acc = 0.0;
        for (a, w) in mu.atoms.iter().zip(&mu.weights) {
            acc += w * (-mu.delta_hat * busemann(y, &mu.basepoint, a)?).exp();
        }
        Ok(acc)
    };
    let n = mu.dim() as f64;
    let eig = mu.delta_hat * (n - mu.delta_hat);
    points
        .par_iter()
        .map(|p| {
            if p.dim() != mu.dim() {
                return Err(Error::DimensionMismatch { expected: mu.dim(), found: p.dim() });
            }
            let phi = mass(p)?;
            let (defect, used) = match spacing {
                Some(h) if !degenerate => {
                    let frames = stencil_frames(p);
                    let mut lap = 0.0;
                    for frame in &frames {
                        let mut sum = 0.0;
                        for v in frame {
                            let plus = exp_map(p, v, h)?;
                            let minus = exp_map(p, v, -h)?;
                            sum += (mass(&plus)? + mass(&minus)? - 2.0 * phi) / (h * h);
                        }
                        lap += sum;
                    }
                    lap /= frames.len() as f64;
                    let used = 1 + 2 * frames.iter().map(|f| f.len()).sum::<usize>();
                    (Some((-lap - eig * phi).abs() / phi), used)
                }
                _ => (None, 1),
            };
            Ok(MassSample { point: p.clone(), mass: phi, laplacian_defect: defect, stencil_points: used })
        })
        .collect()
}

/// Two Lorentz-orthonormal frames of the tangent space at `x`: the boost of
/// the standard frame at the origin, and its image under the Householder
/// reflection along `(1, 2, ..., n+1)`.
fn stencil_frames(x: &InteriorPoint) -> Vec<Vec<Vec<f64>>> {
    let k = x.coords().len();
    let m = k - 1;
    let xs = x.spatial();
    let t = x.time();
    // Columns of the boost taking the origin to x.
    let column = |j: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..m).map(|i| xs[i] * xs[j] / (1.0 + t)).collect();
        v[j] += 1.0;
        v.push(xs[j]);
        v
    };
    let base: Vec<Vec<f64>> = (0..m).map(column).collect();
    let u: Vec<f64> = (1..=m).map(|i| i as f64).collect();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let reflected = (0..m)
        .map(|j| {
            let mut v = base[j].clone();
            for (i, b) in base.iter().enumerate() {
                let c = -2.0 * u[i] * u[j] / uu;
                for (vv, bb) in v.iter_mut().zip(b) {
                    *vv += c * bb;
                }
            }
            v
        })
        .collect();
    vec![base, reflected]
}

fn exp_map(x: &InteriorPoint, v: &[f64], h: f64) -> Result<InteriorPoint> {
    let (ch, sh) = (h.cosh(), h.sinh());
    let coords: Vec<f64> = x.coords().iter().zip(v).map(|(a, b)| ch * a + sh * b).collect();
    InteriorPoint::from_hyperboloid(&coords)
}

/// Shells `S_k = sum_{|g| = k} e^{-delta d(x0, x0 g)}` of the Poincare series
/// at the exponent itself.
#[derive(Clone, Debug, Serialize)]
pub struct PoincareShells {
    pub delta_hat: f64,
    /// `S_k` for `k = 1..=depth`.
    pub sums: Vec<f64>,
    /// Fitted ratio `S_{k+1} / S_k` over the outer half of the shells.
    pub decay: f64,
    pub suspected_convergence_type: bool,
}

/// Shells decaying faster than this per generation mark a series that
/// seems to converge at `delta_hat`.
pub const CONVERGENCE_DECAY: f64 = 0.8;

/// For divergence-type groups the shells stay of order one at the critical
/// exponent; geometric decay suggests convergence type, where the measure
/// needs a slowly varying correction. A heuristic: an error in `delta_hat`
/// also tilts the shells.
pub fn poincare_shells(g: &GroupPresentation, x0: &InteriorPoint, delta_hat: f64, depth: usize) -> Result<PoincareShells> {
    if x0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: x0.dim() });
    }
    if depth < 4 {
        return Err(Error::InvalidParameter(format!("shell scan needs depth at least 4, got {depth}")));
    }
    let cap = crate::groups::DEFAULT_ELEMENT_CAP;
    let count = crate::word::free_ball_count(g.rank(), depth);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let levels = map_ball(g, depth, |_, m| -> Result<f64> { Ok((-delta_hat * hyp_distance(x0, &m.apply(x0)?)?).exp()) });
    let mut sums = Vec::with_capacity(depth);
    for level in levels.into_iter().skip(1) {
        let mut acc = 0.0;
        for t in level {
            acc += t?;
        }
        sums.push(acc);
    }
    let tail = &sums[sums.len() / 2..];
    let xs: Vec<f64> = (0..tail.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|v| v.max(1e-300).ln()).collect();
    let decay = crate::linalg::least_squares(&xs, &ys).0.exp();
    Ok(PoincareShells { delta_hat, sums, decay, suspected_convergence_type: decay < CONVERGENCE_DECAY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic_group, GroupSpec};
    use crate::hyperbolic::minkowski;

    fn x0(n: usize) -> InteriorPoint {
        let mut u = vec![0.0; n + 1];
        u[0] = 0.1;
        u[1] = 0.05;
        InteriorPoint::from_ball(&u).unwrap()
    }

    #[test]
    fn depth_zero_is_one_atom() {
        let g = GroupSpec::demo_schottky().build().unwrap();
        let mu = ps_measure(&g, &x0(2), &x0(2), 1.0, 0, 0.4).unwrap();
        assert_eq!(mu.len(), 1);
        assert!((mu.weights[0] - 1.0).abs() < 1e-15);
        assert!(mu.atoms[0].chordal(&radial_projection(&x0(2)).unwrap()) < 1e-15);
    }

    #[test]
    fn mass_at_reference_is_one() {
        let g = GroupSpec::demo_schottky().build().unwrap();
        let mu = ps_measure(&g, &x0(2), &x0(2), 0.6, 5, 0.41).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        assert!(mu.weights.iter().all(|w| *w >= 0.0 && w.is_finite()));
    }

    #[test]
    fn divergent_exponent_is_rejected() {
        let g = GroupSpec::demo_schottky().build().unwrap();
        let err = ps_measure(&g, &x0(2), &x0(2), 0.4, 3, 0.41).unwrap_err();
        assert!(err.to_string().contains("choose s > delta_hat"));
    }

    #[test]
    fn large_s_concentrates_on_nearest_orbit_point() {
        let g = GroupSpec::demo_schottky().build().unwrap();
        let x = InteriorPoint::from_ball(&[0.5, 0.1, 0.0]).unwrap();
        let mu = ps_measure(&g, &x, &x0(2), 60.0, 3, 0.41).unwrap();
        // Oracle: sort orbit points by distance to x.
        let ball = crate::groups::enumerate_ball(&g, 3, &x0(2)).unwrap();
        let mut best = (f64::INFINITY, 0);
        for (i, e) in ball.elements().iter().enumerate() {
            let d = hyp_distance(&x, &e.apply(&x0(2)).unwrap()).unwrap();
            if d < best.0 {
                best = (d, i);
            }
        }
        let expect = radial_projection(&ball.elements()[best.1].apply(&x0(2)).unwrap()).unwrap();
        assert!(mu.atoms[mu.heaviest()].chordal(&expect) < 1e-14);
        assert!(mu.weights[mu.heaviest()] / mu.total_mass() > 0.9);
    }

    #[test]
    fn basepoint_round_trip() {
        let g = GroupSpec::demo_schottky().build().unwrap();
        let mu = ps_measure(&g, &x0(2), &x0(2), 0.5, 4, 0.41).unwrap();
        let xp = InteriorPoint::from_ball(&[-0.3, 0.2, 0.4]).unwrap();
        let same = translate_basepoint(&mu, &x0(2)).unwrap();
        for (a, b) in mu.weights.iter().zip(&same.weights) {
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
        let back = translate_basepoint(&translate_basepoint(&mu, &xp).unwrap(), &x0(2)).unwrap();
        for (a, b) in mu.weights.iter().zip(&back.weights) {
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn identity_transport_is_exact() {
        let g = GroupSpec::demo_schottky().build().unwrap();
        let mu = ps_measure(&g, &x0(2), &x0(2), 0.5, 3, 0.41).unwrap();
        let f = lipschitz_bump(BoundaryPoint::new(&[1.0, 0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(transport_defect(&mu, &Isometry::identity(2), &[&f]).unwrap(), 0.0);
    }

    #[test]
    fn single_busemann_term_is_an_eigenfunction() {
        // One atom: Phi = w e^{-delta D}, an exact eigenfunction.
        let g = cyclic_group(2, 1.0, 0.0).unwrap();
        let mut mu = ps_measure(&g, &x0(2), &x0(2), 1.0, 1, 0.3).unwrap();
        mu.atoms.truncate(2);
        mu.weights.truncate(2);
        mu.weights[1] = 0.0;
        let p = InteriorPoint::from_ball(&[0.2, -0.1, 0.3]).unwrap();
        let out = mass_profile(&mu, &[p], Some(1e-2)).unwrap();
        assert_eq!(out[0].stencil_points, 13);
        assert!(out[0].laplacian_defect.unwrap() < 1e-3, "{:?}", out[0].laplacian_defect);
    }

    #[test]
    fn stencil_frames_are_orthonormal() {
        for n in [1usize, 2] {
            let x = x0(n);
            for frame in stencil_frames(&x) {
                for (i, a) in frame.iter().enumerate() {
                    assert!(minkowski(a, x.coords()).abs() < 1e-12);
                    for (j, b) in frame.iter().enumerate() {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((minkowski(a, b) - expect).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn spacing_out_of_range_is_rejected() {
        let g = cyclic_group(1, 1.0, 0.0).unwrap();
        let mu = ps_measure(&g, &x0(1), &x0(1), 1.0, 2, 0.0).unwrap();
        assert!(mass_profile(&mu, &[x0(1)], Some(0.5)).is_err());
        assert!(mass_profile(&mu, &[x0(1)], Some(1e-4)).is_err());
    }

    #[test]
    fn schottky_shells_stay_flat_at_the_exponent() {
        let g = GroupSpec::demo_schottky().build().unwrap();
        let x = x0(2);
        let at = poincare_shells(&g, &x, 0.4135, 10).unwrap();
        assert_eq!(at.sums.len(), 10);
        assert!(!at.suspected_convergence_type, "decay {}", at.decay);
        let above = poincare_shells(&g, &x, 0.4135 + 0.3, 10).unwrap();
        assert!(above.suspected_convergence_type, "decay {}", above.decay);
        assert!(poincare_shells(&g, &x, 0.4, 3).is_err());
    }

}
