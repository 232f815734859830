//! The algebraic crossed product `C(Lambda) x| Gamma` at finite truncation.
//!
//! Elements are finite sums `sum_g f_g g` with black-box boundary
//! coefficients. Products, adjoints and the automorphism group are built
//! lazily as closures, so identities can be checked pointwise anywhere on
//! the sphere.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{GroupPresentation, WordBall};
use crate::hyperbolic::{busemann, BoundaryPoint, InteriorPoint, Isometry};
use crate::patterson_sullivan::AtomicBoundaryMeasure;
use crate::word::Word;

pub type Coefficient = Arc<dyn Fn(&BoundaryPoint) -> Result<C64> + Send + Sync>;

/// Largest dense representation built by [`represent`].
pub const DENSE_LIMIT: usize = 6000;

#[derive(Clone)]
pub struct CrossedProductElement {
    group: Arc<GroupPresentation>,
    terms: BTreeMap<Word, Coefficient>,
    /// Optional Lipschitz constants for the coefficients, by word.
    lipschitz: BTreeMap<Word, f64>,
}

impl std::fmt::Debug for CrossedProductElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let support: Vec<String> = self.terms.keys().map(|w| w.to_string()).collect();
        f.debug_struct("CrossedProductElement").field("support", &support).finish()
    }
}

fn constant(c: C64) -> Coefficient {
    Arc::new(move |_| Ok(c))
}

impl CrossedProductElement {
    pub fn zero(group: Arc<GroupPresentation>) -> Self {
        Self { group, terms: BTreeMap::new(), lipschitz: BTreeMap::new() }
    }

    /// `1 * e`.
    pub fn unit(group: Arc<GroupPresentation>) -> Self {
        Self::monomial(group, Word::identity(), constant(C64::new(1.0, 0.0)))
            .expect("identity word is valid")
    }

    /// `f * g` for a single word.
    pub fn monomial(group: Arc<GroupPresentation>, word: Word, f: Coefficient) -> Result<Self> {
        let mut e = Self::zero(group);
        e.add_term(word, f)?;
        Ok(e)
    }

    /// `c * g` with a constant coefficient.
    pub fn constant(group: Arc<GroupPresentation>, word: Word, c: C64) -> Result<Self> {
        let mut e = Self::monomial(group, word.clone(), constant(c))?;
        e.lipschitz.insert(word, 0.0);
        Ok(e)
    }

    /// Adds `f * word`, summing with an existing coefficient.
    pub fn add_term(&mut self, word: Word, f: Coefficient) -> Result<()> {
        if !word.is_reduced() || word.rank_needed() > self.group.rank() {
            return Err(Error::InvalidParameter(format!("word {word} is not a reduced word of this group")));
        }
        self.lipschitz.remove(&word);
        let merged = match self.terms.remove(&word) {
            Some(old) => Arc::new(move |xi: &BoundaryPoint| Ok(old(xi)? + f(xi)?)) as Coefficient,
            None => f,
        };
        self.terms.insert(word, merged);
        Ok(())
    }

    pub fn with_lipschitz(mut self, word: &Word, constant: f64) -> Self {
        if self.terms.contains_key(word) {
            self.lipschitz.insert(word.clone(), constant);
        }
        self
    }

    pub fn lipschitz(&self, word: &Word) -> Option<f64> {
        self.lipschitz.get(word).copied()
    }

    pub fn group(&self) -> &Arc<GroupPresentation> {
        &self.group
    }

    pub fn support(&self) -> Vec<Word> {
        self.terms.keys().cloned().collect()
    }

    /// Longest word in the support.
    pub fn support_radius(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// `f_g(xi)`, zero off the support.
    pub fn coefficient(&self, g: &Word, xi: &BoundaryPoint) -> Result<C64> {
        match self.terms.get(g) {
            Some(f) => f(xi),
            None => Ok(C64::new(0.0, 0.0)),
        }
    }

    pub fn scaled(&self, lambda: C64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(w, f)| {
                let f = f.clone();
                (w.clone(), Arc::new(move |xi: &BoundaryPoint| Ok(lambda * f(xi)?)) as Coefficient)
            })
            .collect();
        let lipschitz = self.lipschitz.iter().map(|(w, l)| (w.clone(), l * lambda.norm())).collect();
        Self { group: self.group.clone(), terms, lipschitz }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_group(self, other)?;
        let mut out = self.clone();
        for (w, f) in &other.terms {
            out.add_term(w.clone(), f.clone())?;
        }
        Ok(out)
    }

    fn element(&self, w: &Word) -> Result<Isometry> {
        self.group.element(w)
    }
}

fn same_group(a: &CrossedProductElement, b: &CrossedProductElement) -> Result<()> {
    if Arc::ptr_eq(&a.group, &b.group) {
        Ok(())
    } else {
        Err(Error::MixedGroups)
    }
}

/// `(f f')_gamma(xi) = sum_{g g' = gamma} f_g(xi) f'_{g'}(xi g)`.
pub fn cp_mul(f: &CrossedProductElement, fp: &CrossedProductElement) -> Result<CrossedProductElement> {
    same_group(f, fp)?;
    let mut out = CrossedProductElement::zero(f.group.clone());
    for (g, fg) in &f.terms {
        let mg = f.element(g)?;
        for (gp, fgp) in &fp.terms {
            let (fg, fgp, mg) = (fg.clone(), fgp.clone(), mg.clone());
            let c: Coefficient = Arc::new(move |xi: &BoundaryPoint| Ok(fg(xi)? * fgp(&mg.apply(xi)?)?));
            out.add_term(g.mul(gp), c)?;
        }
    }
    Ok(out)
}

/// `(f*)_g(xi) = conj(f_{g^{-1}}(xi g))`.
pub fn cp_star(f: &CrossedProductElement) -> Result<CrossedProductElement> {
    let mut out = CrossedProductElement::zero(f.group.clone());
    for (h, fh) in &f.terms {
        let g = h.inverse();
        let mg = f.element(&g)?;
        let fh = fh.clone();
        out.add_term(g.clone(), Arc::new(move |xi: &BoundaryPoint| Ok(fh(&mg.apply(xi)?)?.conj())))?;
        if let Some(l) = f.lipschitz.get(h) {
            if *l == 0.0 {
                out.lipschitz.insert(g, 0.0);
            }
        }
    }
    Ok(out)
}

/// `(alpha_t f)_g(xi) = e^{i t D(x, x g^{-1}, xi)} f_g(xi)`.
pub fn automorphism(f: &CrossedProductElement, t: f64, x: &InteriorPoint) -> Result<CrossedProductElement> {
    let mut out = CrossedProductElement::zero(f.group.clone());
    for (g, fg) in &f.terms {
        let xg_inv = f.element(&g.inverse())?.apply(x)?;
        let (fg, x) = (fg.clone(), x.clone());
        let c: Coefficient = Arc::new(move |xi: &BoundaryPoint| {
            let phase = C64::from_polar(1.0, t * busemann(&x, &xg_inv, xi)?);
            Ok(phase * fg(xi)?)
        });
        out.add_term(g.clone(), c)?;
    }
    Ok(out)
}

/// Square matrix with labelled basis.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub matrix: DMatrix<C64>,
    pub labels: Vec<String>,
    pub depth: Option<usize>,
    pub xi: Option<BoundaryPoint>,
    /// Set when the support is too long for every row to be exact.
    pub truncation_warning: bool,
}

impl TruncatedOperator {
    pub fn new(matrix: DMatrix<C64>, labels: Vec<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: matrix.nrows() });
        }
        let mut seen = std::collections::HashSet::new();
        if !labels.iter().all(|l| seen.insert(l)) {
            return Err(Error::InvalidParameter("operator labels must be unique".into()));
        }
        Ok(Self { matrix, labels, depth: None, xi: None, truncation_warning: false })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { matrix: &self.matrix * &other.matrix, ..self.clone() })
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        crate::linalg::singular_values(&self.matrix)[0]
    }

    pub fn frobenius(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sparse kernel of `pi^xi(f)` on a word ball, by rows.
#[derive(Clone, Debug)]
pub struct SparseKernel {
    pub n: usize,
    pub entries: Vec<(usize, usize, C64)>,
    pub depth: usize,
    pub truncation_warning: bool,
}

impl SparseKernel {
    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for &(r, c, z) in &self.entries {
            out[r] += z * v[c];
        }
        out
    }

    fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for &(r, c, z) in &self.entries {
            out[c] += z.conj() * v[r];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(r, c, z) in &self.entries {
            m[(r, c)] += z;
        }
        m
    }

    /// Lower bound for the operator norm: `|A v|` for the unit vector left by
    /// power iteration on `A^* A`.
    pub fn norm_estimate(&self, iterations: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut v: Vec<C64> = (0..self.n).map(|i| C64::new(1.0 + 1e-3 * (i % 7) as f64, 0.0)).collect();
        let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut best = 0.0f64;
        for _ in 0..iterations {
            let nv = norm(&v);
            if nv == 0.0 {
                break;
            }
            v.iter_mut().for_each(|z| *z /= nv);
            let av = self.apply(&v);
            let est = norm(&av);
            if est <= best * (1.0 + 1e-15) {
                best = best.max(est);
                break;
            }
            best = est;
            v = self.apply_adjoint(&av);
        }
        best
    }
}

/// Kernel `k_{gamma, gamma'}(xi) = f_{gamma gamma'^{-1}}(xi gamma^{-1})` over
/// the labels of `ball`, in sparse form.
pub fn represent_sparse(f: &CrossedProductElement, xi: &BoundaryPoint, ball: &WordBall) -> Result<SparseKernel> {
    let support: Vec<(Word, Coefficient)> = f.terms.iter().map(|(w, c)| (w.inverse(), c.clone())).collect();
    let rows: Result<Vec<Vec<(usize, usize, C64)>>> = ball
        .words()
        .par_iter()
        .zip(ball.elements().par_iter())
        .enumerate()
        .map(|(r, (gamma, m))| {
            let moved = m.inverse().apply(xi)?;
            let mut row = Vec::new();
            for (h_inv, fh) in &support {
                // gamma gamma'^{-1} = h  <=>  gamma' = h^{-1} gamma
                if let Some(c) = ball.position(&h_inv.mul(gamma)) {
                    row.push((r, c, fh(&moved)?));
                }
            }
            Ok(row)
        })
        .collect();
    Ok(SparseKernel {
        n: ball.len(),
        entries: rows?.into_iter().flatten().collect(),
        depth: ball.depth(),
        truncation_warning: f.support_radius() > ball.depth(),
    })
}

/// Dense `pi^xi(f)` over the word ball.
pub fn represent(f: &CrossedProductElement, xi: &BoundaryPoint, ball: &WordBall) -> Result<TruncatedOperator> {
    if ball.len() > DENSE_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "ball of {} words exceeds the dense limit {DENSE_LIMIT}; use norm_lower_bound",
            ball.len()
        )));
    }
    let k = represent_sparse(f, xi, ball)?;
    if k.truncation_warning {
        log::warn!("support radius {} exceeds ball depth {}; rows are truncated", f.support_radius(), ball.depth());
    }
    Ok(TruncatedOperator {
        matrix: k.to_dense(),
        labels: ball.words().iter().map(|w| w.to_string()).collect(),
        depth: Some(ball.depth()),
        xi: Some(xi.clone()),
        truncation_warning: k.truncation_warning,
    })
}

/// Indices of ball rows whose products with an element of support radius
/// `radius` stay inside the ball.
pub fn interior_rows(ball: &WordBall, radius: usize) -> Vec<usize> {
    let limit = ball.depth().saturating_sub(radius);
    ball.words().iter().enumerate().filter(|(_, w)| w.len() <= limit).map(|(i, _)| i).collect()
}

/// `max_xi |pi^xi(f)|` over the samples: a lower bound for the reduced norm.
/// Small balls use a dense SVD, larger ones power iteration.
pub fn norm_lower_bound(f: &CrossedProductElement, samples: &[BoundaryPoint], ball: &WordBall) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("norm bound needs at least one boundary sample".into()));
    }
    let mut best = 0.0f64;
    for xi in samples {
        let k = represent_sparse(f, xi, ball)?;
        let v = if k.n <= 1500 {
            crate::linalg::singular_values(&k.to_dense()).first().copied().unwrap_or(0.0)
        } else {
            k.norm_estimate(400)
        };
        best = best.max(v);
    }
    Ok(best)
}

/// `U(t, xi)`: diagonal phases `e^{i t D(x g, x, xi)}` over the ball.
pub fn covariance_unitary(t: f64, xi: &BoundaryPoint, ball: &WordBall, x: &InteriorPoint) -> Result<Vec<C64>> {
    ball.elements()
        .par_iter()
        .map(|g| Ok(C64::from_polar(1.0, t * busemann(&g.apply(x)?, x, xi)?)))
        .collect()
}

/// Frobenius norm of `pi^xi(alpha_t f) - U pi^xi(f) U^{-1}`.
pub fn covariance_defect(
    f: &CrossedProductElement,
    t: f64,
    xi: &BoundaryPoint,
    ball: &WordBall,
    x: &InteriorPoint,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let lhs = represent_sparse(&automorphism(f, t, x)?, xi, ball)?;
    let rhs = represent_sparse(f, xi, ball)?;
    let u = covariance_unitary(t, xi, ball, x)?;
    let mut acc = 0.0;
    for (&(r, c, a), &(r2, c2, b)) in lhs.entries.iter().zip(&rhs.entries) {
        debug_assert_eq!((r, c), (r2, c2));
        acc += (a - u[r] * b * u[c].conj()).norm_sqr();
    }
    Ok(acc.sqrt())
}

/// `tau(f) = int f_e dmu`.
pub fn tau(f: &CrossedProductElement, mu: &AtomicBoundaryMeasure) -> Result<C64> {
    let Some(fe) = f.terms.get(&Word::identity()) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let parts: Result<Vec<C64>> = mu.atoms.par_iter().zip(mu.weights.par_iter()).map(|(a, w)| Ok(fe(a)? * *w)).collect();
    Ok(parts?.into_iter().sum())
}

/// `F(t + i beta)` from the weight insertion
/// `sum_g f_g(xi) e^{(i t - beta) D(x g^{-1}, x, xi)} f'_{g^{-1}}(xi g)`
/// integrated against `mu_x`.
pub fn kms_continuation(
    f: &CrossedProductElement,
    fp: &CrossedProductElement,
    t: f64,
    beta: f64,
    mu: &AtomicBoundaryMeasure,
) -> Result<C64> {
    same_group(f, fp)?;
    let x = &mu.basepoint;
    let mut pairs = Vec::new();
    for (g, fg) in &f.terms {
        if let Some(fpg) = fp.terms.get(&g.inverse()) {
            let mg = f.element(g)?;
            let xg_inv = f.element(&g.inverse())?.apply(x)?;
            pairs.push((fg.clone(), fpg.clone(), mg, xg_inv));
        }
    }
    let parts: Result<Vec<C64>> = mu
        .atoms
        .par_iter()
        .zip(mu.weights.par_iter())
        .map(|(xi, w)| {
            let mut acc = C64::new(0.0, 0.0);
            for (fg, fpg, mg, xg_inv) in &pairs {
                let d = busemann(xg_inv, x, xi)?;
                acc += fg(xi)? * C64::new(-beta * d, t * d).exp() * fpg(&mg.apply(xi)?)?;
            }
            Ok(acc * *w)
        })
        .collect();
    Ok(parts?.into_iter().sum())
}

/// `|F(t + i beta) - tau(alpha_t(f') f)|` for the measure `mu_x`.
pub fn kms_defect(
    f: &CrossedProductElement,
    fp: &CrossedProductElement,
    t: f64,
    beta: f64,
    mu: &AtomicBoundaryMeasure,
) -> Result<f64> {
    let lhs = kms_continuation(f, fp, t, beta, mu)?;
    let rhs = tau(&cp_mul(&automorphism(fp, t, &mu.basepoint)?, f)?, mu)?;
    Ok((lhs - rhs).norm())
}

/// `|tau_{x gamma}(f) - tau_x(gamma . f)|` where `(gamma . f)_e(xi) = f_e(xi gamma)`.
/// `family` builds `mu_y` for a basepoint `y`.
pub fn equivariance_defect(
    f: &CrossedProductElement,
    gamma: &Isometry,
    x: &InteriorPoint,
    family: &dyn Fn(&InteriorPoint) -> Result<AtomicBoundaryMeasure>,
) -> Result<f64> {
    if *gamma == Isometry::identity(gamma.dim()) {
        return Ok(0.0);
    }
    let mu_x = family(x)?;
    let mu_xg = family(&gamma.apply(x)?)?;
    let lhs = tau(f, &mu_xg)?;
    let Some(fe) = f.terms.get(&Word::identity()) else {
        return Ok(lhs.norm());
    };
    let parts: Result<Vec<C64>> = mu_x
        .atoms
        .par_iter()
        .zip(mu_x.weights.par_iter())
        .map(|(a, w)| Ok(fe(&gamma.apply(a)?)? * *w))
        .collect();
    let rhs: C64 = parts?.into_iter().sum();
    Ok((lhs - rhs).norm())
}

/// Report row for KMS and equivariance checks.
#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub depth: usize,
    pub s: f64,
    pub t: f64,
    pub delta_hat: f64,
    pub defect: f64,
    pub transport_defect: f64,
}
