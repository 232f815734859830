//! Finite truncations of Fredholm modules: the Cantor-set cycle of a
//! Fuchsian Schottky group, the circle model with its Hardy projections,
//! the signature operator on `S^2`, and Schatten-class experiments.

mod cantor;
mod circle;
mod sphere;
mod summability;

pub use cantor::{cantor_cycle, CantorCycle, CantorGap, ComponentSelector};
pub use circle::{
    circle_module, hardy_projections, mode_norm_sq, multiplication_operator, shift_operator, t_pairing,
    MultiplicationOperator,
};
pub use sphere::{
    gauss_legendre, moebius_pullback, pullback_commutator_defect, pullback_round_trip_defect, sphere_signature_operator, SphereCycle,
    SphereQuadrature,
};
pub use summability::{
    janson_wolff_integral, pushforward_symbols, schatten_norm, summability_threshold, JansonWolffEstimate,
    SummabilityOptions, SummabilityReport, SchattenRow,
};

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::BoundaryPoint;

/// `(H, gamma, F)` on a finite basis. `grading` is `None` for ungraded
/// (odd) modules such as the circle model.
#[derive(Clone, Debug)]
pub struct FiniteKCycle {
    pub labels: Vec<String>,
    pub grading: Option<Vec<f64>>,
    pub f: DMatrix<C64>,
    /// Hilbert-space norms squared of the basis vectors.
    pub weights: Vec<f64>,
    /// Basis indices spanning the kernel of `F`.
    pub kernel: Vec<usize>,
}

impl FiniteKCycle {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn grading_matrix(&self) -> Option<DMatrix<C64>> {
        self.grading
            .as_ref()
            .map(|g| DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(g.len(), g.iter().map(|&v| C64::new(v, 0.0)))))
    }

    /// `max |F gamma + gamma F|`, zero for ungraded cycles.
    pub fn anticommutator_defect(&self) -> f64 {
        let Some(g) = &self.grading else { return 0.0 };
        let mut worst = 0.0f64;
        for ((r, c), z) in self.f.iter().enumerate().map(|(i, z)| ((i % self.dim(), i / self.dim()), z)) {
            worst = worst.max((z * (g[r] + g[c])).norm());
        }
        worst
    }

    /// `max |F^2 - (I - P_ker)|`.
    pub fn involution_defect(&self) -> f64 {
        let mut target = DMatrix::<C64>::identity(self.dim(), self.dim());
        for &k in &self.kernel {
            target[(k, k)] = C64::new(0.0, 0.0);
        }
        (&self.f * &self.f - target).camax()
    }

    pub fn self_adjoint_defect(&self) -> f64 {
        (&self.f - self.f.adjoint()).camax()
    }

    /// `[F, A]` for an operator on the same basis.
    pub fn commutator(&self, a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.nrows() });
        }
        Ok(&self.f * a - a * &self.f)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.f.nrows() != n || self.f.ncols() != n || self.weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.f.nrows() });
        }
        if let Some(g) = &self.grading {
            if g.len() != n || g.iter().any(|v| v.abs() != 1.0) {
                return Err(Error::InvalidParameter("grading must be diagonal with entries +-1".into()));
            }
        }
        for (name, d) in [
            ("self-adjointness", self.self_adjoint_defect()),
            ("anticommutation", self.anticommutator_defect()),
            ("F^2 = I - P_ker", self.involution_defect()),
        ] {
            if d > 1e-12 {
                return Err(Error::InvalidParameter(format!("{name} fails by {d:e}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Smooth,
    Hoelder(f64),
    Sampled,
}

/// Complex function on `S^1` or `S^2`.
#[derive(Clone)]
pub struct SymbolFunction {
    f: Arc<dyn Fn(&BoundaryPoint) -> C64 + Send + Sync>,
    pub smoothness: Smoothness,
    pub provenance: Option<String>,
    /// Dimension of the sphere.
    pub dim: usize,
}

impl std::fmt::Debug for SymbolFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolFunction")
            .field("smoothness", &self.smoothness)
            .field("provenance", &self.provenance)
            .field("dim", &self.dim)
            .finish()
    }
}

impl SymbolFunction {
    pub fn new(dim: usize, smoothness: Smoothness, f: impl Fn(&BoundaryPoint) -> C64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), smoothness, provenance: None, dim }
    }

    /// Circle symbol given as a function of the angle.
    pub fn on_circle(smoothness: Smoothness, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::new(1, smoothness, move |p| f(p.angle()))
    }

    pub fn eval(&self, p: &BoundaryPoint) -> C64 {
        (self.f)(p)
    }

    pub fn at_angle(&self, theta: f64) -> C64 {
        (self.f)(&BoundaryPoint::from_angle(theta))
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::new(dim, Smoothness::Smooth, move |_| c)
    }

    /// `xi -> xi_1`.
    pub fn first_coordinate(dim: usize) -> Self {
        Self::new(dim, Smoothness::Smooth, |p| C64::new(p.coords()[0], 0.0))
    }

    /// `e^{i theta}` on the circle.
    pub fn exp_i_theta() -> Self {
        Self::on_circle(Smoothness::Smooth, |t| C64::from_polar(1.0, t))
    }

    /// `sum_{1 <= j <= terms} 2^{-j alpha} cos(2^j theta)`.
    pub fn weierstrass(terms: u32, alpha: f64) -> Self {
        Self::on_circle(Smoothness::Hoelder(alpha), move |t| {
            let v: f64 = (1..=terms).map(|j| 2f64.powf(-(j as f64) * alpha) * (2f64.powi(j as i32) * t).cos()).sum();
            C64::new(v, 0.0)
        })
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = Some(p.into());
        self
    }
}
