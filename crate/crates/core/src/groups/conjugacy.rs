use rayon::prelude::*;
use serde::Serialize;

use super::ball::enumerate_ball;
use super::{GroupKind, GroupPresentation};
use crate::error::{Error, Result};
use crate::hyperbolic::{BoundaryPoint, InteriorPoint};
use crate::word::Word;

/// Elements with `cosh l - 1` below this are treated as parabolic or elliptic
/// (trace within about `1e-8` of `+-2`).
const PARABOLIC_TOL: f64 = 2e-8;
const TRACE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacySample {
    pub word: Word,
    pub source: BoundaryPoint,
    pub target: BoundaryPoint,
    pub source_angle: f64,
}

/// Boundary map between the limit sets of two isomorphic groups, sampled at
/// attracting fixed points and interpolated piecewise linearly in the source
/// angle.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryConjugacy {
    pub samples: Vec<ConjugacySample>,
    pub interpolation: &'static str,
    pub source_kind: GroupKind,
    pub target_kind: GroupKind,
    pub target_heuristic: bool,
    /// Generator images in the target, as target words.
    pub correspondence: Vec<Word>,
    pub depth: usize,
    pub skipped: usize,
}

fn mapped_word(correspondence: &[Word], w: &Word) -> Word {
    let mut acc = Word::identity();
    for &l in w.letters() {
        let img = &correspondence[(l / 2) as usize];
        acc = if l % 2 == 0 { acc.mul(img) } else { acc.mul(&img.inverse()) };
    }
    acc
}

/// Attracting fixed point of a word's boundary action, or `None` when the
/// element is parabolic or elliptic within tolerance. Groups carrying Mobius
/// generators use the eigenvectors of the `2 x 2` matrix.
pub(crate) fn attracting_point(g: &GroupPresentation, w: &Word) -> Option<Result<BoundaryPoint>> {
    let Some(m) = g.mobius_element(w) else {
        let el = match g.element(w) {
            Ok(el) => el,
            Err(e) => return Some(Err(e)),
        };
        el.translation_length(PARABOLIC_TOL)?;
        return Some(el.attracting_fixed_point());
    };
    let tau = m.trace();
    let u = tau * tau - 4.0;
    // |tau -+ 2| < 1e-8 or tau real inside (-2, 2)
    if u.norm() < 4.0 * TRACE_TOL || (u.re < 0.0 && u.im.abs() < 4.0 * TRACE_TOL) {
        return None;
    }
    let root = u.sqrt();
    // Multiplier at the fixed point is 4 / (tau +- root)^2.
    let s = if (tau + root).norm() >= (tau - root).norm() { 1.0 } else { -1.0 };
    let num = m.a - m.d + root * s;
    let den = m.a - m.d - root * s;
    let z = if num.norm() >= den.norm() {
        if m.c.norm() == 0.0 {
            return Some(BoundaryPoint::new(&[0.0, 0.0, 1.0]).map(|p| restrict(g, p)));
        }
        num / (m.c * 2.0)
    } else {
        -(m.b * 2.0) / den
    };
    Some(Ok(restrict(g, BoundaryPoint::from_complex(z))))
}

/// Drops the `x_3` coordinate for groups acting on the unit circle.
fn restrict(g: &GroupPresentation, p: BoundaryPoint) -> BoundaryPoint {
    if g.dim() == 1 {
        BoundaryPoint::from_angle(p.angle())
    } else {
        p
    }
}

/// Pairs attracting fixed points of every hyperbolic word of length at most
/// `depth` in `source` with those of the corresponding word in `target`.
///
/// `correspondence[i]` is the image of source generator `i`; pass `None` for
/// the identity correspondence. The source limit set must be the round
/// circle in the `(x_1, x_2)` plane.
pub fn boundary_conjugacy(
    source: &GroupPresentation,
    target: &GroupPresentation,
    correspondence: Option<&[Word]>,
    depth: usize,
) -> Result<BoundaryConjugacy> {
    let corr: Vec<Word> = match correspondence {
        Some(c) => c.to_vec(),
        None => (0..source.rank()).map(Word::generator).collect(),
    };
    if corr.len() != source.rank() {
        return Err(Error::InvalidParameter(format!(
            "correspondence lists {} images for a rank-{} source group",
            corr.len(),
            source.rank()
        )));
    }
    if let Some(w) = corr.iter().find(|w| w.rank_needed() > target.rank()) {
        return Err(Error::InvalidParameter(format!("image {w} uses generators beyond the target rank")));
    }
    if depth < 1 {
        return Err(Error::InvalidParameter("conjugacy needs depth >= 1".into()));
    }
    let ball = enumerate_ball(source, depth, &InteriorPoint::origin(source.dim()))?;
    let pairs: Vec<Option<Result<ConjugacySample>>> = ball
        .words()
        .par_iter()
        .skip(1)
        .map(|w| {
            let src = attracting_point(source, w)?;
            let tgt = attracting_point(target, &mapped_word(&corr, w))?;
            Some(src.and_then(|s| {
                let t = tgt?;
                Ok(ConjugacySample { word: w.clone(), source_angle: s.angle(), source: s, target: t })
            }))
        })
        .collect();
    let mut skipped = 0;
    let mut samples = Vec::with_capacity(pairs.len());
    for p in pairs {
        match p {
            Some(s) => samples.push(s?),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::info!("boundary conjugacy: skipped {skipped} parabolic or elliptic words");
    }
    // Stable sort keeps the shortest word first among equal fixed points.
    samples.sort_by(|a, b| a.source_angle.total_cmp(&b.source_angle));
    samples.dedup_by(|b, a| b.source.chordal(&a.source) < 1e-12);
    if samples.len() < 2 {
        return Err(Error::InsufficientData("fewer than two hyperbolic fixed points found".into()));
    }
    Ok(BoundaryConjugacy {
        samples,
        interpolation: "circular-piecewise-linear",
        source_kind: source.kind(),
        target_kind: target.kind(),
        target_heuristic: target.is_heuristic(),
        correspondence: corr,
        depth,
        skipped,
    })
}

impl BoundaryConjugacy {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Interpolated value at a source boundary point.
    pub fn evaluate(&self, xi: &BoundaryPoint) -> Result<BoundaryPoint> {
        self.evaluate_angle(xi.angle())
    }

    pub fn evaluate_angle(&self, theta: f64) -> Result<BoundaryPoint> {
        use std::f64::consts::{PI, TAU};
        let theta = theta - TAU * ((theta + PI) / TAU).floor();
        let n = self.samples.len();
        let k = self.samples.partition_point(|s| s.source_angle <= theta);
        let (lo, hi) = if k == 0 || k == n { (n - 1, 0) } else { (k - 1, k) };
        let a0 = self.samples[lo].source_angle;
        let mut span = self.samples[hi].source_angle - a0;
        let mut off = theta - a0;
        if span <= 0.0 {
            span += TAU;
        }
        if off < 0.0 {
            off += TAU;
        }
        let w = if span > 0.0 { off / span } else { 0.0 };
        let p = self.samples[lo].target.coords();
        let q = self.samples[hi].target.coords();
        let v: Vec<f64> = p.iter().zip(q).map(|(a, b)| (1.0 - w) * a + w * b).collect();
        BoundaryPoint::new(&v)
    }

    /// Target angles in source order; for orientation-preserving
    /// deformations these are cyclically monotone.
    pub fn target_angles(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.target.angle()).collect()
    }

    pub fn is_cyclically_monotone(&self) -> bool {
        let angles = self.target_angles();
        let n = angles.len();
        let mut descents = 0;
        for i in 0..n {
            if angles[(i + 1) % n] < angles[i] {
                descents += 1;
            }
        }
        descents <= 1
    }

    /// Largest chordal gap between the target fixed point of `s^{-1} w s`
    /// and the image of the target fixed point of `w` under `s`, over stored
    /// samples and all generators `s` of the target correspondence.
    pub fn equivariance_defect(&self, target: &GroupPresentation) -> Result<f64> {
        let letters: Vec<u8> = (0..2 * self.correspondence.len() as u8).collect();
        let worst: Result<Vec<f64>> = self
            .samples
            .par_iter()
            .map(|smp| {
                let mut worst = 0.0f64;
                for &l in &letters {
                    let s = Word::from_letters(&[l]);
                    let conj = mapped_word(&self.correspondence, &s.inverse().mul(&smp.word).mul(&s));
                    let moved = target.element(&mapped_word(&self.correspondence, &s))?.apply(&smp.target)?;
                    match attracting_point(target, &conj) {
                        Some(p) => worst = worst.max(p?.chordal(&moved)),
                        None => continue,
                    }
                }
                Ok(worst)
            })
            .collect();
        Ok(worst?.into_iter().fold(0.0, f64::max))
    }

    /// Largest chordal gap `|phi(xi s') - phi(xi) s|` at stored samples, with
    /// `phi(xi s')` taken from the interpolant.
    pub fn interpolated_equivariance_defect(
        &self,
        source: &GroupPresentation,
        target: &GroupPresentation,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for smp in &self.samples {
            for l in 0..2 * source.rank() as u8 {
                let s = Word::from_letters(&[l]);
                let moved_src = source.letter(l).apply(&smp.source)?;
                let moved_tgt = target.element(&mapped_word(&self.correspondence, &s))?.apply(&smp.target)?;
                worst = worst.max(self.evaluate(&moved_src)?.chordal(&moved_tgt));
            }
        }
        Ok(worst)
    }
}
