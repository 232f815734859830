//! Python bindings. Build with
//! `cargo build --release -p limitlab-py --features extension-module` and
//! copy `target/release/liblimitlab_py.so` to `limitlab.so` somewhere on
//! `sys.path`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use limitlab::crossed_product::{kms_defect as core_kms_defect, tau, CrossedProductElement};
use limitlab::groups::{estimate_delta, limit_set_sample, punctured_torus_group, enumerate_ball};
use limitlab::kcycles::{
    cantor_cycle, janson_wolff_integral, moebius_pullback, pullback_commutator_defect, sphere_signature_operator,
    summability_threshold, ComponentSelector, SummabilityOptions, SymbolFunction,
};
use limitlab::patterson_sullivan::{
    lipschitz_bump, ps_measure as core_ps_measure, transport_defect, translate_basepoint, AtomicBoundaryMeasure,
    TestFunction,
};
use limitlab::{BoundaryPoint, GroupPresentation, GroupSpec, InteriorPoint, Isometry, Word};

trait OrPyErr<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPyErr<T> for limitlab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

fn ball_point(u: Option<Vec<f64>>, dim: usize) -> PyResult<InteriorPoint> {
    match u {
        Some(u) => InteriorPoint::from_ball(&u).py(),
        None => Ok(InteriorPoint::origin(dim)),
    }
}

fn symbol(kind: &str, terms: u32, alpha: f64) -> PyResult<SymbolFunction> {
    match kind {
        "first-coordinate" => Ok(SymbolFunction::first_coordinate(1)),
        "exp-i-theta" => Ok(SymbolFunction::exp_i_theta()),
        "weierstrass" => Ok(SymbolFunction::weierstrass(terms, alpha)),
        other => Err(PyValueError::new_err(format!(
            "unknown symbol {other:?}; expected first-coordinate, exp-i-theta or weierstrass"
        ))),
    }
}

/// A finitely generated discrete group of isometries of `H^{n+1}`.
#[pyclass(name = "Group", frozen)]
struct PyGroup {
    inner: Arc<GroupPresentation>,
}

impl PyGroup {
    fn build(spec: &GroupSpec) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(spec.build().py()?) })
    }
}

#[pymethods]
impl PyGroup {
    /// Builds a group from the JSON group description used by the CLI.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec: GroupSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::build(&spec)
    }

    #[staticmethod]
    fn demo_schottky() -> PyResult<Self> {
        Self::build(&GroupSpec::demo_schottky())
    }

    #[staticmethod]
    fn demo_fuchsian_schottky() -> PyResult<Self> {
        Self::build(&GroupSpec::demo_fuchsian_schottky())
    }

    #[staticmethod]
    #[pyo3(signature = (trace_a, trace_b, dimension = 1))]
    fn punctured_torus(trace_a: (f64, f64), trace_b: (f64, f64), dimension: usize) -> PyResult<Self> {
        let g = punctured_torus_group(C64::new(trace_a.0, trace_a.1), C64::new(trace_b.0, trace_b.1), dimension).py()?;
        Ok(Self { inner: Arc::new(g) })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.inner.kind())
    }

    /// Generator matrices in `SO+(n+1, 1)`, row-major.
    fn generators(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner
            .generators()
            .iter()
            .map(|g| {
                let m = g.matrix();
                (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
            })
            .collect()
    }

    /// Number of reduced words of each length `0..=depth`.
    fn word_counts(&self, depth: usize) -> PyResult<Vec<usize>> {
        let ball = enumerate_ball(&self.inner, depth, &InteriorPoint::origin(self.inner.dim())).py()?;
        Ok((0..=depth).map(|k| ball.count_at_length(k)).collect())
    }

    /// Orbit-counting estimate of the critical exponent.
    fn critical_exponent(&self, depth: usize) -> PyResult<f64> {
        Ok(estimate_delta(&self.inner, depth, &InteriorPoint::origin(self.inner.dim())).py()?.value)
    }

    /// Boundary projections of the orbit of the ball center over words of
    /// length `depth`.
    fn limit_set(&self, depth: usize) -> PyResult<Vec<Vec<f64>>> {
        let cloud = limit_set_sample(&self.inner, depth, &InteriorPoint::origin(self.inner.dim())).py()?;
        Ok(cloud.points.iter().map(|p| p.coords().to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Group(kind={:?}, rank={}, dimension={})", self.inner.kind(), self.rank(), self.dimension())
    }
}

/// Truncated Patterson-Sullivan measure `mu_x`.
#[pyclass(name = "PSMeasure", frozen)]
struct PyPSMeasure {
    inner: AtomicBoundaryMeasure,
    group: Arc<GroupPresentation>,
}

#[pymethods]
impl PyPSMeasure {
    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn atoms(&self) -> Vec<Vec<f64>> {
        self.inner.atoms.iter().map(|a| a.coords().to_vec()).collect()
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.words.iter().map(|w| w.to_string()).collect()
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    #[getter]
    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Moves the basepoint to the ball point `y` by the Busemann reweighting.
    fn translate(&self, y: Vec<f64>) -> PyResult<Self> {
        let y = InteriorPoint::from_ball(&y).py()?;
        Ok(Self { inner: translate_basepoint(&self.inner, &y).py()?, group: self.group.clone() })
    }

    /// Transport-law defect of the group element `word` against Lipschitz
    /// bumps of chordal `radius` centred at `centers`.
    #[pyo3(signature = (word, centers, radius = 0.2))]
    fn transport_defect(&self, word: &str, centers: Vec<Vec<f64>>, radius: f64) -> PyResult<f64> {
        let g = self.group.element(&Word::parse(word).py()?).py()?;
        let bumps = centers
            .iter()
            .map(|c| Ok(lipschitz_bump(BoundaryPoint::new(c).py()?, radius)))
            .collect::<PyResult<Vec<_>>>()?;
        let tests: Vec<TestFunction> = bumps.iter().map(|b| b as TestFunction).collect();
        transport_defect(&self.inner, &g, &tests).py()
    }
}

/// `mu_x` over the word ball of radius `depth` at `s = delta_hat + epsilon`.
#[pyfunction]
#[pyo3(signature = (group, depth, delta_hat, epsilon = 0.05, basepoint = None, orbit_basepoint = None))]
fn ps_measure(
    group: &PyGroup,
    depth: usize,
    delta_hat: f64,
    epsilon: f64,
    basepoint: Option<Vec<f64>>,
    orbit_basepoint: Option<Vec<f64>>,
) -> PyResult<PyPSMeasure> {
    let g = &group.inner;
    let x = ball_point(basepoint, g.dim())?;
    let x0 = match orbit_basepoint {
        Some(u) => InteriorPoint::from_ball(&u).py()?,
        None => {
            let mut u = vec![0.0; g.dim() + 1];
            u[0] = 0.1;
            u[1] = 0.05;
            InteriorPoint::from_ball(&u).py()?
        }
    };
    let mu = core_ps_measure(g, &x, &x0, delta_hat + epsilon, depth, delta_hat).py()?;
    Ok(PyPSMeasure { inner: mu, group: g.clone() })
}

/// Busemann cocycle `D(x, x', xi)` for ball points `x, x'`.
#[pyfunction]
fn busemann(x: Vec<f64>, xp: Vec<f64>, xi: Vec<f64>) -> PyResult<f64> {
    let x = InteriorPoint::from_ball(&x).py()?;
    let xp = InteriorPoint::from_ball(&xp).py()?;
    limitlab::busemann(&x, &xp, &BoundaryPoint::new(&xi).py()?).py()
}

#[pyfunction]
fn hyp_distance(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    limitlab::hyp_distance(&InteriorPoint::from_ball(&x).py()?, &InteriorPoint::from_ball(&y).py()?).py()
}

/// KMS defect of the pair `1 . w`, `1 . w^{-1}` at time `t`, returned with
/// `tau(1)` so callers can normalize.
#[pyfunction]
#[pyo3(signature = (measure, word, t = 0.0, beta = None))]
fn kms_defect<'py>(
    py: Python<'py>,
    measure: &PyPSMeasure,
    word: &str,
    t: f64,
    beta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let g = measure.group.clone();
    let w = Word::parse(word).py()?;
    let one = C64::new(1.0, 0.0);
    let f = CrossedProductElement::constant(g.clone(), w.clone(), one).py()?;
    let fp = CrossedProductElement::constant(g.clone(), w.inverse(), one).py()?;
    let mu = &measure.inner;
    let d = core_kms_defect(&f, &fp, t, beta.unwrap_or(mu.delta_hat), mu).py()?;
    let tu = tau(&CrossedProductElement::unit(g), mu).py()?.norm();
    let out = PyDict::new(py);
    out.set_item("defect", d)?;
    out.set_item("tau_unit", tu)?;
    Ok(out)
}

/// Dual-estimator summability threshold of `[E_+, a]` for a named symbol.
#[pyfunction]
#[pyo3(signature = (symbol_kind, cutoffs, p_grid, terms = 8, alpha = 0.5))]
fn summability<'py>(
    py: Python<'py>,
    symbol_kind: &str,
    cutoffs: Vec<usize>,
    p_grid: Vec<f64>,
    terms: u32,
    alpha: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let a = symbol(symbol_kind, terms, alpha)?;
    let r = summability_threshold(&a, &cutoffs, &p_grid, &SummabilityOptions::default()).py()?;
    let out = PyDict::new(py);
    out.set_item("p_schatten", r.p_schatten)?;
    out.set_item("p_janson_wolff", r.p_janson_wolff)?;
    out.set_item("flags", r.flags)?;
    out.set_item("low_confidence", r.low_confidence)?;
    let rows: Vec<(usize, f64, f64)> = r.rows.iter().map(|row| (row.n, row.p, row.schatten_norm)).collect();
    out.set_item("rows", rows)?;
    Ok(out)
}

/// Extrapolated Janson-Wolff integral, `None` when it diverges.
#[pyfunction]
#[pyo3(signature = (symbol_kind, p, grid = 4096, finest_h = 0.02, terms = 8, alpha = 0.5))]
fn janson_wolff(symbol_kind: &str, p: f64, grid: usize, finest_h: f64, terms: u32, alpha: f64) -> PyResult<Option<f64>> {
    let a = symbol(symbol_kind, terms, alpha)?;
    Ok(janson_wolff_integral(&a, p, grid, finest_h).py()?.value)
}

/// Structure and boost-commutator defects of the signature operator on `S^2`.
#[pyfunction]
#[pyo3(signature = (lmax, rapidity = 0.3))]
fn sphere_defects<'py>(py: Python<'py>, lmax: usize, rapidity: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = sphere_signature_operator(lmax).py()?;
    let p = moebius_pullback(lmax, &Isometry::boost(2, 0, rapidity).py()?, None).py()?;
    let out = PyDict::new(py);
    out.set_item("dim", s.cycle.dim())?;
    out.set_item("anticommutator_defect", s.cycle.anticommutator_defect())?;
    out.set_item("involution_defect", s.cycle.involution_defect())?;
    out.set_item("boost_commutator_defect", pullback_commutator_defect(&s, &p, lmax / 2).py()?)?;
    Ok(out)
}

/// Cumulative `sum s_i^p` by generation for the Cantor cycle of a Fuchsian
/// Schottky group, with `a` the first coordinate.
#[pyfunction]
fn cantor_scan(group: &PyGroup, depth: usize, p: f64) -> PyResult<Vec<f64>> {
    let cc = cantor_cycle(&group.inner, ComponentSelector::All, depth).py()?;
    Ok(cc.generation_scan(&SymbolFunction::first_coordinate(1), p))
}

#[pymodule]
#[pyo3(name = "limitlab")]
fn limitlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyPSMeasure>()?;
    m.add_function(wrap_pyfunction!(ps_measure, m)?)?;
    m.add_function(wrap_pyfunction!(busemann, m)?)?;
    m.add_function(wrap_pyfunction!(hyp_distance, m)?)?;
    m.add_function(wrap_pyfunction!(kms_defect, m)?)?;
    m.add_function(wrap_pyfunction!(summability, m)?)?;
    m.add_function(wrap_pyfunction!(janson_wolff, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_defects, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_scan, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_names() {
        assert!(symbol("first-coordinate", 8, 0.5).is_ok());
        assert!(symbol("weierstrass", 8, 0.5).is_ok());
        assert!(symbol("cosine", 8, 0.5).is_err());
    }
}
