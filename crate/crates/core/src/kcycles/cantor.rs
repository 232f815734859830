use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{FiniteKCycle, SymbolFunction};
use crate::crossed_product::DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::groups::{enumerate_ball, GroupKind, GroupPresentation};
use crate::hyperbolic::{BoundaryPoint, InteriorPoint};
use crate::word::Word;

/// Which components of `Omega / Gamma` contribute gaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentSelector {
    All,
    Component(usize),
}

/// A complementary interval `(b, c)` of the limit set, counterclockwise
/// from `b` to `c`, the image of fundamental gap `fundamental` under `word`.
#[derive(Clone, Debug, Serialize)]
pub struct CantorGap {
    pub word: Word,
    pub fundamental: usize,
    pub component: usize,
    pub b: BoundaryPoint,
    pub c: BoundaryPoint,
    pub generation: usize,
}

#[derive(Clone, Debug)]
pub struct CantorCycle {
    pub gaps: Vec<CantorGap>,
    pub components: usize,
    pub depth: usize,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

/// Gaps of the limit set of a Fuchsian Schottky group down to generation
/// `depth`, with `H = l^2({b_i, c_i})`, `gamma = -1` on `b_i`, `+1` on
/// `c_i`, and `F` swapping `b_i` with `c_i`.
pub fn cantor_cycle(g: &GroupPresentation, selector: ComponentSelector, depth: usize) -> Result<CantorCycle> {
    let circles = match (g.kind(), g.schottky_circles()) {
        (GroupKind::FreeSchottky, Some(c)) if g.dim() == 1 => c,
        _ => return Err(Error::InvalidParameter("the Cantor cycle needs a Fuchsian Schottky group (n = 1)".into())),
    };
    if depth < 3 {
        return Err(Error::InvalidParameter(format!("Cantor cycle depth must be at least 3, got {depth}")));
    }
    use std::f64::consts::TAU;
    // Arcs of S^1 inside each circle, sorted by center angle.
    let mut arcs: Vec<(f64, f64)> = circles
        .iter()
        .flat_map(|(a, b)| [a, b])
        .map(|c| {
            let z = c.center_c();
            (z.arg().rem_euclid(TAU), (1.0 / z.norm()).acos())
        })
        .collect();
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = arcs.len();
    let fundamental: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let (p, w) = arcs[i];
            let (q, v) = arcs[(i + 1) % k];
            (p + w, q - v)
        })
        .collect();
    let ends: Vec<[BoundaryPoint; 2]> =
        fundamental.iter().map(|&(s, e)| [BoundaryPoint::from_angle(s), BoundaryPoint::from_angle(e)]).collect();

    // Generators glue gap endpoints lying on paired circles.
    let mut parent: Vec<usize> = (0..k).collect();
    for l in 0..2 * g.rank() as u8 {
        let m = g.letter(l);
        for i in 0..k {
            for p in &ends[i] {
                let q = m.apply(p)?;
                for (j, e) in ends.iter().enumerate() {
                    if e.iter().any(|x| x.chordal(&q) < 1e-9) {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        parent[ri] = rj;
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..k).map(|i| find(&mut parent, i)).collect();
    let mut distinct = roots.clone();
    distinct.sort_unstable();
    distinct.dedup();
    for r in roots.iter_mut() {
        *r = distinct.binary_search(r).expect("root is listed");
    }
    let components = distinct.len();
    if let ComponentSelector::Component(c) = selector {
        if c >= components {
            return Err(Error::InvalidParameter(format!("component {c} requested, but Omega/Gamma has {components}")));
        }
    }

    let ball = enumerate_ball(g, depth, &InteriorPoint::origin(1))?;
    let mut gaps = Vec::new();
    for (w, m) in ball.words().iter().zip(ball.elements()) {
        for (i, [s, e]) in ends.iter().enumerate() {
            let comp = roots[i];
            if matches!(selector, ComponentSelector::Component(c) if c != comp) {
                continue;
            }
            gaps.push(CantorGap {
                word: w.clone(),
                fundamental: i,
                component: comp,
                b: m.apply(s)?,
                c: m.apply(e)?,
                generation: w.len(),
            });
        }
    }
    Ok(CantorCycle { gaps, components, depth })
}

impl CantorCycle {
    pub fn dim(&self) -> usize {
        2 * self.gaps.len()
    }

    /// Dense `(H, gamma, F)`; refused above `DENSE_LIMIT` basis vectors.
    pub fn cycle(&self) -> Result<FiniteKCycle> {
        let n = self.dim();
        if n > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "dense Cantor cycle would have {n} basis vectors, more than {DENSE_LIMIT}; lower the depth"
            )));
        }
        let mut f = DMatrix::<C64>::zeros(n, n);
        let mut labels = Vec::with_capacity(n);
        let mut grading = Vec::with_capacity(n);
        for (i, gap) in self.gaps.iter().enumerate() {
            f[(2 * i, 2 * i + 1)] = C64::new(1.0, 0.0);
            f[(2 * i + 1, 2 * i)] = C64::new(1.0, 0.0);
            labels.push(format!("b{i}:{}:{}", gap.fundamental, gap.word));
            labels.push(format!("c{i}:{}:{}", gap.fundamental, gap.word));
            grading.extend([-1.0, 1.0]);
        }
        Ok(FiniteKCycle { labels, grading: Some(grading), f, weights: vec![1.0; n], kernel: Vec::new() })
    }

    /// Multiplication by `a` on `l^2` of the endpoints.
    pub fn multiplication(&self, a: &SymbolFunction) -> DMatrix<C64> {
        let vals: Vec<C64> = self.gaps.iter().flat_map(|g| [a.eval(&g.b), a.eval(&g.c)]).collect();
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals))
    }

    /// Singular values of `[F, a]` read off the `2 x 2` blocks: each gap
    /// contributes `|a(b) - a(c)|` twice. Sorted decreasingly.
    pub fn commutator_singular_values(&self, a: &SymbolFunction) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .gaps
            .iter()
            .flat_map(|g| {
                let d = (a.eval(&g.b) - a.eval(&g.c)).norm();
                [d, d]
            })
            .collect();
        s.sort_by(|x, y| y.total_cmp(x));
        s
    }

    /// Partial sums of `sum s_i^p` over gaps of generation at most `k`, for
    /// `k = 0..=depth`.
    pub fn generation_scan(&self, a: &SymbolFunction, p: f64) -> Vec<f64> {
        let mut per = vec![0.0; self.depth + 1];
        for g in &self.gaps {
            per[g.generation] += 2.0 * (a.eval(&g.b) - a.eval(&g.c)).norm().powf(p);
        }
        per.iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    /// Longest gap, as a chordal distance, at generation `k`.
    pub fn max_gap(&self, k: usize) -> f64 {
        self.gaps.iter().filter(|g| g.generation == k).map(|g| g.b.chordal(&g.c)).fold(0.0, f64::max)
    }
}
