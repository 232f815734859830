//! Example groups, word balls, limit-set samples, critical exponents and
//! boundary conjugacies.

mod ball;
mod conjugacy;
mod exponent;

pub use ball::{enumerate_ball, map_ball, pruned_orbit, limit_set_sample, BoundaryCloud, WordBall, DEDUP_TOL, DEFAULT_ELEMENT_CAP};
pub use conjugacy::{boundary_conjugacy, BoundaryConjugacy, ConjugacySample};
pub use exponent::{box_dimension, estimate_delta, estimate_delta_with, CriticalExponentEstimate, DeltaOptions};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{hyp_distance, InteriorPoint, Isometry};
use crate::mobius::{cayley, Mobius};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    FreeSchottky,
    PuncturedTorus,
    Cyclic,
    Custom,
}

/// A finitely generated free group of isometries given by its generators.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    generators: Vec<Isometry>,
    inverses: Vec<Isometry>,
    kind: GroupKind,
    dim: usize,
    heuristic: bool,
    /// `SL(2,C)` generators when the group acts on `S^2`, or on the unit
    /// circle by disk-preserving maps.
    mobius: Option<Vec<Mobius>>,
    /// Pairing circles of a Schottky group.
    circles: Option<Vec<(Circle, Circle)>>,
}

impl GroupPresentation {
    /// Generic constructor; every generator is validated.
    pub fn new(generators: Vec<Isometry>, kind: GroupKind) -> Result<Self> {
        let dim = generators
            .first()
            .map(|g| g.dim())
            .ok_or_else(|| Error::Construction("a group needs at least one generator".into()))?;
        if generators.len() > 26 {
            return Err(Error::Construction("at most 26 generators are supported".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
            }
            g.validate().map_err(|e| Error::Construction(format!("generator {i}: {e}")))?;
        }
        let inverses = generators.iter().map(|g| g.inverse()).collect();
        let mobius = if dim == 2 {
            generators.iter().map(Mobius::from_lorentz).collect::<Result<Vec<_>>>().ok()
        } else {
            None
        };
        Ok(Self { generators, inverses, kind, dim, heuristic: false, mobius, circles: None })
    }

    fn with_mobius(mut self, gens: Vec<Mobius>) -> Self {
        self.mobius = Some(gens);
        self
    }

    /// `SL(2,C)` matrix of a word (up to sign), realizing its boundary
    /// action `z -> A z`, when the group carries Mobius generators.
    pub fn mobius_element(&self, w: &Word) -> Option<Mobius> {
        let gens = self.mobius.as_ref()?;
        if w.rank_needed() > gens.len() {
            return None;
        }
        let mut acc = Mobius::identity();
        for &l in w.letters() {
            let m = gens[(l / 2) as usize];
            let m = if l % 2 == 0 { m } else { m.inverse() };
            acc = m.after(&acc);
        }
        Some(acc)
    }

    /// Pairing circles, for groups built by [`schottky_group`].
    pub fn schottky_circles(&self) -> Option<&[(Circle, Circle)]> {
        self.circles.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// True when discreteness is not certified (perturbed parameters).
    pub fn is_heuristic(&self) -> bool {
        self.heuristic
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn letter(&self, l: u8) -> &Isometry {
        let i = (l / 2) as usize;
        if l % 2 == 0 {
            &self.generators[i]
        } else {
            &self.inverses[i]
        }
    }

    /// Isometry of a word, composed for the right action.
    pub fn element(&self, w: &Word) -> Result<Isometry> {
        if w.rank_needed() > self.rank() {
            return Err(Error::InvalidParameter(format!("word {w} uses generators beyond rank {}", self.rank())));
        }
        let mut acc = Isometry::identity(self.dim);
        for &l in w.letters() {
            acc = acc.product(self.letter(l));
        }
        Ok(acc)
    }

    /// Shortest displacement `d(x0, x0 g)` over nontrivial words of length
    /// at most `depth`; a tiny value signals an indiscrete group.
    pub fn shortest_displacement(&self, depth: usize) -> Result<f64> {
        let x0 = InteriorPoint::origin(self.dim);
        let ball = enumerate_ball(self, depth, &x0)?;
        Ok(ball
            .displacements()
            .iter()
            .skip(1)
            .fold(f64::INFINITY, |a, &d| a.min(d)))
    }

    fn runaway_check(mut self) -> Result<Self> {
        let shortest = self.shortest_displacement(4)?;
        if !(shortest > 1e-3) {
            return Err(Error::Construction(format!(
                "orbit returns within {shortest:e} of the basepoint; parameters look indiscrete"
            )));
        }
        self.heuristic = self.heuristic || self.kind == GroupKind::Custom;
        Ok(self)
    }
}

/// Round circle in `C`, read as a circle on the Riemann sphere `S^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    pub fn new(cx: f64, cy: f64, radius: f64) -> Self {
        Self { center: [cx, cy], radius }
    }

    pub fn center_c(&self) -> C64 {
        C64::new(self.center[0], self.center[1])
    }

    /// Circle orthogonal to the unit circle centered in direction `angle`.
    pub fn orthogonal(angle: f64, radius: f64) -> Self {
        let r = (1.0 + radius * radius).sqrt();
        Self { center: [r * angle.cos(), r * angle.sin()], radius }
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center_c()).norm() < self.radius
    }
}

/// Rank-`r` Schottky group: generator `k` maps the exterior of
/// `pairings[k].0` onto the interior of `pairings[k].1`.
///
/// `dim = 2` gives a Kleinian group acting on `S^2`. `dim = 1` requires all
/// circles orthogonal to the unit circle and gives a Fuchsian group acting
/// on `H^2`.
pub fn schottky_group(pairings: &[(Circle, Circle)], dim: usize) -> Result<GroupPresentation> {
    if pairings.is_empty() {
        return Err(Error::Construction("a Schottky group needs at least one pairing".into()));
    }
    let circles: Vec<Circle> = pairings.iter().flat_map(|(a, b)| [*a, *b]).collect();
    for c in &circles {
        if !(c.radius > 0.0) || !c.radius.is_finite() {
            return Err(Error::Construction(format!("circle radius {} must be positive", c.radius)));
        }
    }
    for i in 0..circles.len() {
        for j in i + 1..circles.len() {
            let gap = (circles[i].center_c() - circles[j].center_c()).norm();
            if gap <= circles[i].radius + circles[j].radius {
                return Err(Error::Construction(format!(
                    "circles {i} and {j} (pairing {} and {}) have overlapping closures",
                    i / 2,
                    j / 2
                )));
            }
        }
    }
    let mut gens = Vec::with_capacity(pairings.len());
    let mut mobius = Vec::with_capacity(pairings.len());
    match dim {
        2 => {
            for (c1, c2) in pairings {
                let (p, q) = (c1.center_c(), c2.center_c());
                let m = Mobius::new(q, C64::new(c1.radius * c2.radius, 0.0) - p * q, C64::new(1.0, 0.0), -p)?;
                gens.push(m.to_isometry()?);
                mobius.push(m);
            }
        }
        1 => {
            for (k, (c1, c2)) in pairings.iter().enumerate() {
                for c in [c1, c2] {
                    let defect = c.center_c().norm_sqr() - 1.0 - c.radius * c.radius;
                    if defect.abs() > 1e-9 {
                        return Err(Error::Construction(format!(
                            "pairing {k}: circle is not orthogonal to the unit circle (defect {defect:e})"
                        )));
                    }
                }
                let m = fuchsian_pairing(c1, c2)?;
                gens.push(m.to_planar_isometry()?);
                mobius.push(m);
            }
        }
        _ => {
            return Err(Error::InvalidParameter(format!("Schottky groups are built for n = 1 or 2, not {dim}")));
        }
    }
    let mut g = GroupPresentation::new(gens, GroupKind::FreeSchottky)?.with_mobius(mobius);
    g.circles = Some(pairings.to_vec());
    Ok(g)
}

/// Disk-preserving map from the exterior of `c1` onto the interior of `c2`,
/// both orthogonal to the unit circle.
fn fuchsian_pairing(c1: &Circle, c2: &Circle) -> Result<Mobius> {
    let arc = |c: &Circle| {
        let phi = c.center_c().arg();
        let beta = (1.0 / c.center_c().norm()).acos();
        (phi, beta)
    };
    let (phi1, beta1) = arc(c1);
    let (phi2, beta2) = arc(c2);
    let e = |t: f64| C64::from_polar(1.0, t);
    Mobius::from_three_points(
        [e(phi1 - beta1), e(phi1), e(phi1 + beta1)],
        [e(phi2 + beta2), e(phi2 + std::f64::consts::PI), e(phi2 - beta2)],
    )
}

/// Rank-2 group with generator traces `(trace_a, trace_b)` and parabolic
/// commutator (`tr[a,b] = -2`). The third trace solves the Markov-type
/// relation `x^2 + y^2 + z^2 = xyz`; for real traces the group is Fuchsian
/// and preserves the unit disk, so its limit set is the equator of `S^2`.
pub fn punctured_torus_group(trace_a: C64, trace_b: C64, dim: usize) -> Result<GroupPresentation> {
    let (a, b) = punctured_torus_mobius(trace_a, trace_b)?;
    let real = trace_a.im == 0.0 && trace_b.im == 0.0;
    let gens = match dim {
        2 => vec![a.to_isometry()?, b.to_isometry()?],
        1 => {
            if !real {
                return Err(Error::Construction("complex traces do not give a Fuchsian group in H^2".into()));
            }
            vec![a.to_planar_isometry()?, b.to_planar_isometry()?]
        }
        _ => return Err(Error::InvalidParameter(format!("punctured-torus groups need n = 1 or 2, not {dim}"))),
    };
    let mut g = GroupPresentation::new(gens, GroupKind::PuncturedTorus)?.with_mobius(vec![a, b]);
    g.heuristic = !real;
    g.runaway_check()
}

/// Mobius generators of the punctured-torus group, conjugated into the
/// unit-disk normalization.
pub fn punctured_torus_mobius(trace_a: C64, trace_b: C64) -> Result<(Mobius, Mobius)> {
    let (x, y) = (trace_a, trace_b);
    let disc = x * x * y * y - 4.0 * (x * x + y * y);
    let z = (x * y - disc.sqrt()) / 2.0;
    // a = diag(l, 1/l) with l + 1/l = x
    let l = (x + (x * x - 4.0).sqrt()) / 2.0;
    let li = 1.0 / l;
    let p = (z - y * li) / (l - li);
    let s = y - p;
    let qr = p * s - 1.0;
    let q = qr.sqrt();
    let r = if q.norm() > 0.0 { qr / q } else { C64::new(1.0, 0.0) };
    let entries = [l, li, p, q, r, s];
    if entries.iter().any(|e| !e.is_finite()) {
        return Err(Error::Construction(format!(
            "trace parameters ({trace_a}, {trace_b}) give non-finite matrix entries"
        )));
    }
    let zero = C64::new(0.0, 0.0);
    let ma = Mobius::new(l, zero, zero, li)?;
    let mb = Mobius::new(p, q, r, s)?;
    let c = cayley();
    Ok((ma.conjugated_by(&c), mb.conjugated_by(&c)))
}

/// Infinite cyclic group generated by a loxodromic element of translation
/// length `translation_length` along the first axis, with optional rotation
/// about the axis (`n >= 2`).
pub fn cyclic_group(dim: usize, translation_length: f64, rotation: f64) -> Result<GroupPresentation> {
    if !(translation_length > 0.0) {
        return Err(Error::Construction("translation length must be positive".into()));
    }
    let mut g = Isometry::boost(dim, 0, translation_length)?;
    if dim >= 2 && rotation != 0.0 {
        g = g.product(&Isometry::rotation(dim, 1, 2, rotation)?);
    }
    GroupPresentation::new(vec![g], GroupKind::Cyclic)
}

/// JSON description of a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    FreeSchottky {
        dimension: usize,
        pairings: Vec<[Circle; 2]>,
    },
    PuncturedTorus {
        dimension: usize,
        /// `[re, im]`
        trace_a: [f64; 2],
        trace_b: [f64; 2],
    },
    Cyclic {
        dimension: usize,
        translation_length: f64,
        #[serde(default)]
        rotation: f64,
    },
    Custom {
        dimension: usize,
        /// Row-major `(n+2) x (n+2)` matrices.
        generators: Vec<Vec<Vec<f64>>>,
    },
}

impl GroupSpec {
    pub fn build(&self) -> Result<GroupPresentation> {
        match self {
            GroupSpec::FreeSchottky { dimension, pairings } => {
                let p: Vec<(Circle, Circle)> = pairings.iter().map(|[a, b]| (*a, *b)).collect();
                schottky_group(&p, *dimension)
            }
            GroupSpec::PuncturedTorus { dimension, trace_a, trace_b } => punctured_torus_group(
                C64::new(trace_a[0], trace_a[1]),
                C64::new(trace_b[0], trace_b[1]),
                *dimension,
            ),
            GroupSpec::Cyclic { dimension, translation_length, rotation } => {
                cyclic_group(*dimension, *translation_length, *rotation)
            }
            GroupSpec::Custom { dimension, generators } => {
                let k = dimension + 2;
                let mut gens = Vec::with_capacity(generators.len());
                for (i, rows) in generators.iter().enumerate() {
                    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                        return Err(Error::Construction(format!("generator {i} is not {k}x{k}")));
                    }
                    let m = nalgebra::DMatrix::from_fn(k, k, |r, c| rows[r][c]);
                    gens.push(Isometry::new(m)?);
                }
                GroupPresentation::new(gens, GroupKind::Custom)?.runaway_check()
            }
        }
    }

    /// Rank-2 Fuchsian Schottky group with radius-0.5 circles orthogonal to
    /// the unit circle in the directions `0, pi` and `pi/2, 3pi/2`.
    pub fn demo_fuchsian_schottky() -> Self {
        use std::f64::consts::{FRAC_PI_2, PI};
        GroupSpec::FreeSchottky {
            dimension: 1,
            pairings: vec![
                [Circle::orthogonal(0.0, 0.5), Circle::orthogonal(PI, 0.5)],
                [Circle::orthogonal(FRAC_PI_2, 0.5), Circle::orthogonal(3.0 * FRAC_PI_2, 0.5)],
            ],
        }
    }

    /// The rank-2 Schottky group with radius-0.25 circles at `+-0.6`, `+-0.6i`.
    pub fn demo_schottky() -> Self {
        GroupSpec::FreeSchottky {
            dimension: 2,
            pairings: vec![
                [Circle::new(0.6, 0.0, 0.25), Circle::new(-0.6, 0.0, 0.25)],
                [Circle::new(0.0, 0.6, 0.25), Circle::new(0.0, -0.6, 0.25)],
            ],
        }
    }
}

/// Distance between the basepoint and its image, `d(x0, x0 g)`.
pub fn displacement(g: &Isometry, x0: &InteriorPoint) -> Result<f64> {
    hyp_distance(x0, &g.apply(x0)?)
}
