use std::collections::HashMap;

use rayon::prelude::*;

use super::GroupPresentation;
use crate::error::{Error, Result};
use crate::hyperbolic::{hyp_distance, radial_projection, BoundaryPoint, InteriorPoint, Isometry};
use crate::word::{free_ball_count, inverse_letter, Word};

/// Elements closer than this (entrywise, relative to the matrix scale) are
/// treated as the same group element.
pub const DEDUP_TOL: f64 = 1e-8;

/// Default memory guard for stored word balls.
pub const DEFAULT_ELEMENT_CAP: usize = 2_000_000;

/// All reduced words up to a length, with their isometries and
/// displacements `d(x0, x0 g)`, in shortlex order.
#[derive(Clone, Debug)]
pub struct WordBall {
    words: Vec<Word>,
    elements: Vec<Isometry>,
    displacements: Vec<f64>,
    basepoint: InteriorPoint,
    depth: usize,
    index: HashMap<Word, usize>,
}

impl WordBall {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn elements(&self) -> &[Isometry] {
        &self.elements
    }

    pub fn displacements(&self) -> &[f64] {
        &self.displacements
    }

    pub fn basepoint(&self) -> &InteriorPoint {
        &self.basepoint
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.index.contains_key(w)
    }

    /// Number of stored words of exact length `len`.
    pub fn count_at_length(&self, len: usize) -> usize {
        self.words.iter().filter(|w| w.len() == len).count()
    }
}

/// Enumerates the word ball of radius `depth` with the default element cap.
pub fn enumerate_ball(g: &GroupPresentation, depth: usize, x0: &InteriorPoint) -> Result<WordBall> {
    enumerate_ball_capped(g, depth, x0, DEFAULT_ELEMENT_CAP)
}

pub fn enumerate_ball_capped(
    g: &GroupPresentation,
    depth: usize,
    x0: &InteriorPoint,
    cap: usize,
) -> Result<WordBall> {
    if x0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: x0.dim() });
    }
    let count = free_ball_count(g.rank(), depth);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let letters = 2 * g.rank() as u8;
    let mut words = vec![Word::identity()];
    let mut elements = vec![Isometry::identity(g.dim())];
    let mut level: Vec<(Word, Isometry)> = vec![(Word::identity(), Isometry::identity(g.dim()))];
    for _ in 0..depth {
        level = level
            .par_iter()
            .flat_map_iter(|(w, m)| {
                let last = w.last();
                (0..letters)
                    .filter(move |&l| last != Some(inverse_letter(l)))
                    .map(move |l| (w.extended(l), m.product(g.letter(l))))
            })
            .collect();
        for (w, m) in &level {
            words.push(w.clone());
            elements.push(m.clone());
        }
    }
    let displacements: Vec<f64> = elements
        .par_iter()
        .map(|m| hyp_distance(x0, &m.apply(x0)?))
        .collect::<Result<_>>()?;

    let keep = dedup_mask(&elements, &displacements);
    let removed = keep.iter().filter(|k| !**k).count();
    if removed > 0 {
        log::warn!("word ball: {removed} duplicate elements removed (group is not free on its generators)");
    }
    let mut ball = WordBall {
        words: Vec::with_capacity(count - removed),
        elements: Vec::with_capacity(count - removed),
        displacements: Vec::with_capacity(count - removed),
        basepoint: x0.clone(),
        depth,
        index: HashMap::with_capacity(count - removed),
    };
    for (i, ((w, m), d)) in words.into_iter().zip(elements).zip(displacements).enumerate() {
        if keep[i] {
            ball.index.insert(w.clone(), ball.words.len());
            ball.words.push(w);
            ball.elements.push(m);
            ball.displacements.push(d);
        }
    }
    Ok(ball)
}

/// Marks later entries that coincide with an earlier element. Candidates
/// are restricted to equal displacements, which coinciding elements share.
fn dedup_mask(elements: &[Isometry], displacements: &[f64]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| displacements[a].total_cmp(&displacements[b]).then(a.cmp(&b)));
    let mut keep = vec![true; elements.len()];
    for (pos, &i) in order.iter().enumerate() {
        let di = displacements[i];
        let scale = elements[i].matrix().amax().max(1.0);
        for &j in order[pos + 1..].iter() {
            if displacements[j] - di > 1e-6 * (1.0 + di) {
                break;
            }
            if keep[j] && j > i && elements[i].distance(&elements[j]) < DEDUP_TOL * scale {
                keep[j] = false;
            }
        }
    }
    keep
}

/// Visits every reduced word of length at most `depth` (depth-first,
/// parallel over first letters) and collects `f(word_len, element)` per
/// length. Output order is deterministic.
pub fn map_ball<T, F>(g: &GroupPresentation, depth: usize, f: F) -> Vec<Vec<T>>
where
    T: Send,
    F: Fn(&[u8], &Isometry) -> T + Sync,
{
    let letters = 2 * g.rank() as u8;
    let mut out: Vec<Vec<T>> = (0..=depth).map(|_| Vec::new()).collect();
    out[0].push(f(&[], &Isometry::identity(g.dim())));
    if depth == 0 {
        return out;
    }
    let per_root: Vec<Vec<Vec<T>>> = (0..letters)
        .into_par_iter()
        .map(|root| {
            let mut acc: Vec<Vec<T>> = (0..=depth).map(|_| Vec::new()).collect();
            let mut word = vec![root];
            let mut stack = vec![g.letter(root).clone()];
            dfs(g, depth, letters, &mut word, &mut stack, &mut acc, &f);
            acc
        })
        .collect();
    for root in per_root {
        for (len, items) in root.into_iter().enumerate() {
            out[len].extend(items);
        }
    }
    out
}

fn dfs<T, F>(
    g: &GroupPresentation,
    depth: usize,
    letters: u8,
    word: &mut Vec<u8>,
    stack: &mut Vec<Isometry>,
    acc: &mut [Vec<T>],
    f: &F,
) where
    F: Fn(&[u8], &Isometry) -> T,
{
    let top = stack.last().expect("nonempty stack");
    acc[word.len()].push(f(word, top));
    if word.len() == depth {
        return;
    }
    let last = *word.last().expect("nonempty word");
    for l in 0..letters {
        if l == inverse_letter(last) {
            continue;
        }
        let next = stack.last().expect("nonempty stack").product(g.letter(l));
        word.push(l);
        stack.push(next);
        dfs(g, depth, letters, word, stack, acc, f);
        word.pop();
        stack.pop();
    }
}

/// Row-major matrix of size at most 4x4 kept on the stack.
#[derive(Clone, Copy)]
struct SmallMat {
    k: usize,
    a: [f64; 16],
}

impl SmallMat {
    fn from_isometry(g: &Isometry) -> Self {
        let m = g.matrix();
        let k = m.nrows();
        let mut a = [0.0; 16];
        for r in 0..k {
            for c in 0..k {
                a[r * k + c] = m[(r, c)];
            }
        }
        Self { k, a }
    }

    fn identity(k: usize) -> Self {
        let mut a = [0.0; 16];
        for i in 0..k {
            a[i * k + i] = 1.0;
        }
        Self { k, a }
    }

    /// Right-action product: matrix `h * self`.
    fn product(&self, h: &SmallMat) -> SmallMat {
        let k = self.k;
        let mut a = [0.0; 16];
        for r in 0..k {
            for c in 0..k {
                let mut acc = 0.0;
                for t in 0..k {
                    acc += h.a[r * k + t] * self.a[t * k + c];
                }
                a[r * k + c] = acc;
            }
        }
        SmallMat { k, a }
    }

    fn to_isometry(self) -> Isometry {
        let k = self.k;
        Isometry::from_matrix_unchecked(nalgebra::DMatrix::from_fn(k, k, |r, c| self.a[r * k + c]))
    }
}

/// Orbit displacements up to `keep`, found by a depth-first search over
/// reduced words that abandons a branch once its displacement exceeds `cut`.
/// Returns the sorted displacements and the number of words visited; the
/// search aborts after `node_cap` visits.
pub fn pruned_orbit(
    g: &GroupPresentation,
    x0: &InteriorPoint,
    keep: f64,
    cut: f64,
    node_cap: usize,
) -> Result<(Vec<f64>, usize)> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    if g.dim() > 2 {
        return Err(Error::InvalidParameter("pruned orbit search supports n <= 2".into()));
    }
    let letters = 2 * g.rank() as u8;
    let k = g.dim() + 2;
    let gens: Vec<SmallMat> = (0..letters).map(|l| SmallMat::from_isometry(g.letter(l))).collect();
    let x = x0.coords();
    let disp = |m: &SmallMat| -> Result<f64> {
        // -<x0, M x0>; the stable formula is only needed near x0.
        let mut s = 0.0;
        for r in 0..k {
            let y: f64 = (0..k).map(|c| m.a[r * k + c] * x[c]).sum();
            s += if r == k - 1 { x[r] * y } else { -x[r] * y };
        }
        if s > 1.5 {
            Ok(s.acosh())
        } else {
            let m = m.to_isometry();
            m.apply(x0).and_then(|p| hyp_distance(x0, &p))
        }
    };
    let mut roots: Vec<(u8, SmallMat)> = Vec::new();
    let mut out = vec![0.0];
    let mut visited = 1;
    // Two serial levels give a balanced parallel split.
    for l in 0..letters {
        let m = SmallMat::identity(k).product(&gens[l as usize]);
        let d = disp(&m)?;
        visited += 1;
        if d > cut {
            continue;
        }
        if d <= keep {
            out.push(d);
        }
        for l2 in 0..letters {
            if l2 != inverse_letter(l) {
                roots.push((l2, m.product(&gens[l2 as usize])));
            }
        }
    }
    let count = AtomicUsize::new(visited);
    let parts: Vec<Result<Vec<f64>>> = roots
        .into_par_iter()
        .map(|(l, m)| {
            let mut acc = Vec::new();
            let mut local = 0usize;
            let mut stack: Vec<(u8, SmallMat)> = vec![(l, m)];
            while let Some((last, m)) = stack.pop() {
                local += 1;
                let d = disp(&m)?;
                if d > cut {
                    continue;
                }
                if d <= keep {
                    acc.push(d);
                }
                for l in (0..letters).rev() {
                    if l != inverse_letter(last) {
                        stack.push((l, m.product(&gens[l as usize])));
                    }
                }
                if local >= 1 << 16 {
                    let total = count.fetch_add(local, Ordering::Relaxed) + local;
                    local = 0;
                    if total > node_cap {
                        return Err(Error::EnumerationCap { count: total, cap: node_cap });
                    }
                }
            }
            count.fetch_add(local, Ordering::Relaxed);
            Ok(acc)
        })
        .collect();
    for p in parts {
        out.extend(p?);
    }
    out.sort_by(f64::total_cmp);
    Ok((out, count.into_inner()))
}

/// Sampled limit set: radial projections of orbit points `x0 g`.
#[derive(Clone, Debug)]
pub struct BoundaryCloud {
    pub points: Vec<BoundaryPoint>,
    pub words: Vec<Word>,
}

impl BoundaryCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map(|p| p.dim()).unwrap_or(0)
    }

    /// Largest gap between consecutive angles in the `(x_1, x_2)` plane.
    pub fn largest_angular_gap(&self) -> f64 {
        let mut a: Vec<f64> = self.points.iter().map(|p| p.angle()).collect();
        a.sort_by(f64::total_cmp);
        if a.is_empty() {
            return std::f64::consts::TAU;
        }
        let mut gap = a[0] + std::f64::consts::TAU - a[a.len() - 1];
        for w in a.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap
    }
}

/// Projections of `x0 g` for all words of exact length `depth`.
pub fn limit_set_sample(g: &GroupPresentation, depth: usize, x0: &InteriorPoint) -> Result<BoundaryCloud> {
    if depth < 1 {
        return Err(Error::InvalidParameter("limit set sampling needs depth >= 1".into()));
    }
    if x0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: x0.dim() });
    }
    let count = crate::word::free_sphere_count(g.rank(), depth);
    if count > DEFAULT_ELEMENT_CAP * 4 {
        return Err(Error::EnumerationCap { count, cap: DEFAULT_ELEMENT_CAP * 4 });
    }
    let levels = map_ball(g, depth, |w, m| {
        if w.len() == depth {
            Some((Word::from_letters(w), m.apply(x0).and_then(|p| radial_projection(&p))))
        } else {
            None
        }
    });
    let mut points = Vec::with_capacity(count);
    let mut words = Vec::with_capacity(count);
    for (w, p) in levels.into_iter().nth(depth).unwrap_or_default().into_iter().flatten() {
        points.push(p?);
        words.push(w);
    }
    Ok(BoundaryCloud { points, words })
}
