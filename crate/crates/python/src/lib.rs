//! Python bindings: 2D grids, the WaveHoltz operator and its solvers, and a
//! few of the filter and analysis helpers.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use emwaveholtz::analysis::{assemble_dense, spectrum_report};
use emwaveholtz::filter::{self, FilterSpec, Forcing};
use emwaveholtz::grid::{self as g, BoundarySpec, Domain, MaterialSpec, Region, StateMode, YeeGrid};
use emwaveholtz::timedomain::{self, TimeGrid};
use emwaveholtz::waveholtz::{LinearOperator, SolveOptions, SolveReport, SolverKind, WaveHoltzOperator};

create_exception!(pywaveholtz, WaveHoltzError, PyException);

fn err(e: emwaveholtz::Error) -> PyErr {
    WaveHoltzError::new_err(e.to_string())
}

fn boundary(name: &str) -> PyResult<BoundarySpec> {
    match name {
        "pec" => Ok(BoundarySpec::pec(2)),
        "open" | "mur" => Ok(BoundarySpec::open(2)),
        other => Err(PyValueError::new_err(format!("unknown boundary {other:?}; use \"pec\" or \"open\""))),
    }
}

/// Rectangle `[lower, upper]` with a staggered Yee TM mesh.
#[pyclass(name = "Grid2D", module = "pywaveholtz", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid2D {
    inner: g::Grid2D,
}

#[pymethods]
impl PyGrid2D {
    #[new]
    #[pyo3(signature = (lower, upper, cells, boundary="pec", pec_boxes=Vec::new(), eps=1.0))]
    fn new(
        lower: (f64, f64),
        upper: (f64, f64),
        cells: (usize, usize),
        boundary: &str,
        pec_boxes: Vec<((f64, f64), (f64, f64))>,
        eps: f64,
    ) -> PyResult<Self> {
        let domain = Domain::new(vec![lower.0, lower.1], vec![upper.0, upper.1], vec![cells.0, cells.1]).map_err(err)?;
        let regions: Vec<Region> = pec_boxes.iter().map(|(a, b)| Region::rect([a.0, a.1], [b.0, b.1])).collect();
        let inner = g::Grid2D::new(domain, &MaterialSpec::uniform(eps, 1.0), &regions, self::boundary(boundary)?)
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn nx(&self) -> usize {
        self.inner.nx()
    }

    #[getter]
    fn ny(&self) -> usize {
        self.inner.ny()
    }

    #[getter]
    fn spacing(&self) -> (f64, f64) {
        (self.inner.dx(), self.inner.dy())
    }

    /// Stable time step used by the filter for frequencies up to `omega`.
    fn max_step(&self, omega: f64) -> f64 {
        TimeGrid::max_step(&self.inner, omega)
    }

    /// `(x, y)` of every Ez node, row-major with y fastest.
    fn ez_coordinates(&self) -> Vec<(f64, f64)> {
        let f = self.inner.sample_e(|_, _| 0.0);
        let info = &self.inner.e_components()[0];
        (0..f.components[0].len())
            .map(|o| {
                let p = info.position(self.inner.domain(), info.index(o));
                (p[0], p[1])
            })
            .collect()
    }

    /// True at Ez nodes held at zero by PEC.
    fn ez_mask(&self) -> Vec<bool> {
        self.inner.mask().to_vec()
    }

    fn __repr__(&self) -> String {
        let d = self.inner.domain();
        format!(
            "Grid2D([{}, {}] x [{}, {}], cells={}x{})",
            d.lower[0], d.upper[0], d.lower[1], d.upper[1], d.cells[0], d.cells[1]
        )
    }
}

/// Outcome of a solve; fields are flat lists in `Grid2D.ez_coordinates` order.
#[pyclass(name = "Solution", module = "pywaveholtz", frozen, get_all)]
struct PySolution {
    solver: String,
    iterations: usize,
    converged: bool,
    residuals: Vec<f64>,
    wave_solves: usize,
    omega: Vec<f64>,
    im_ez: Vec<Vec<f64>>,
    re_ez: Vec<Vec<f64>>,
    state: Vec<f64>,
}

impl From<SolveReport> for PySolution {
    fn from(r: SolveReport) -> Self {
        Self {
            solver: r.solver.name().to_string(),
            iterations: r.iterations,
            converged: r.converged,
            residuals: r.history.iter().map(|h| h.relative_residual).collect(),
            wave_solves: r.wave_solves,
            omega: r.solutions.iter().map(|s| s.omega).collect(),
            im_ez: r.solutions.iter().map(|s| s.im_e.components[0].clone()).collect(),
            re_ez: r.solutions.iter().map(|s| s.re_e.components[0].clone()).collect(),
            state: r.nu,
        }
    }
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(solver={}, iterations={}, converged={})",
            self.solver, self.iterations, self.converged
        )
    }
}

/// Matrix-free `I - S` for one or several commensurate frequencies.
#[pyclass(name = "Operator", module = "pywaveholtz", frozen)]
struct PyOperator {
    inner: WaveHoltzOperator<g::Grid2D>,
}

#[pymethods]
impl PyOperator {
    /// `currents[k]` is the Ez current of `frequencies[k]`, one value per Ez node.
    #[new]
    #[pyo3(signature = (grid, currents, frequencies, periods=1, forcing="sin", state="auto"))]
    fn new(
        grid: &PyGrid2D,
        currents: Vec<Vec<f64>>,
        frequencies: Vec<f64>,
        periods: usize,
        forcing: &str,
        state: &str,
    ) -> PyResult<Self> {
        let n = grid.inner.ez().len();
        if currents.len() != frequencies.len() {
            return Err(PyValueError::new_err("need one current per frequency"));
        }
        if let Some(c) = currents.iter().find(|c| c.len() != n) {
            return Err(PyValueError::new_err(format!("current has {} values, grid has {n} Ez nodes", c.len())));
        }
        let forcing = match forcing {
            "sin" => Forcing::Sin,
            "cos" => Forcing::Cos,
            o => return Err(PyValueError::new_err(format!("unknown forcing {o:?}"))),
        };
        let closed = grid.inner.boundary().is_all_pec() && !grid.inner.has_embedded_pec();
        let mode = match state {
            "energy" => StateMode::EnergyConserving,
            "full" => StateMode::Full,
            "auto" if closed && forcing == Forcing::Sin && frequencies.len() == 1 => StateMode::EnergyConserving,
            "auto" => StateMode::Full,
            o => return Err(PyValueError::new_err(format!("unknown state {o:?}"))),
        };
        let spec = if frequencies.len() == 1 {
            FilterSpec::single(frequencies[0], periods, forcing)
        } else {
            FilterSpec::multi(frequencies, periods)
        }
        .with_mode(mode);
        let fields = currents.into_iter().map(|c| g::FieldSet { components: vec![c] }).collect();
        let inner = WaveHoltzOperator::build(grid.inner.clone(), fields, spec).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.time_grid().steps
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.time_grid().dt
    }

    #[getter]
    fn wave_solves(&self) -> usize {
        self.inner.wave_solves()
    }

    /// `(I - S) x`.
    fn apply(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(x.len())?;
        py.detach(|| self.inner.apply(&x)).map_err(err)
    }

    /// `S x`.
    fn apply_s(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(x.len())?;
        py.detach(|| self.inner.apply_s(&x)).map_err(err)
    }

    /// `Pi 0`, the right-hand side.
    fn rhs(&self, py: Python<'_>) -> PyResult<Vec<f64>> {
        py.detach(|| self.inner.rhs().map(<[f64]>::to_vec)).map_err(err)
    }

    #[pyo3(signature = (solver="gmres", tol=1e-8, max_iters=200, restart=None))]
    fn solve(
        &self,
        py: Python<'_>,
        solver: &str,
        tol: f64,
        max_iters: usize,
        restart: Option<usize>,
    ) -> PyResult<PySolution> {
        let kind = match solver {
            "gmres" => SolverKind::Gmres,
            "cg" => SolverKind::Cg,
            "fixed-point" | "fixed_point" => SolverKind::FixedPoint,
            o => return Err(PyValueError::new_err(format!("unknown solver {o:?}"))),
        };
        let opts = SolveOptions { restart, ..SolveOptions::new(tol, max_iters) };
        let rep = py.detach(|| self.inner.solve(kind, &opts)).map_err(err)?;
        Ok(rep.into())
    }
}

impl PyOperator {
    fn check(&self, len: usize) -> PyResult<()> {
        if len != self.inner.dim() {
            return Err(PyValueError::new_err(format!("vector has {len} entries, operator has {}", self.inner.dim())));
        }
        Ok(())
    }
}

/// `(2/dt) asin(omega dt / 2)`.
#[pyfunction]
fn modified_omega(omega: f64, dt: f64) -> PyResult<f64> {
    timedomain::modified_omega(omega, dt).map_err(err)
}

/// Trapezoid filter weights over `periods` periods split into `steps` steps.
#[pyfunction]
#[pyo3(signature = (omega, steps, periods=1))]
fn filter_weights(omega: f64, steps: usize, periods: usize) -> PyResult<Vec<f64>> {
    let tg = TimeGrid::new(periods as f64 * 2.0 * std::f64::consts::PI / omega, steps).map_err(err)?;
    filter::filter_weights(&FilterSpec::single(omega, periods, Forcing::Sin), &tg).map_err(err)
}

/// Discrete filter transfer function at `lam` for the weights above.
#[pyfunction]
#[pyo3(signature = (lam, omega, steps, periods=1))]
fn beta(lam: f64, omega: f64, steps: usize, periods: usize) -> PyResult<f64> {
    let tg = TimeGrid::new(periods as f64 * 2.0 * std::f64::consts::PI / omega, steps).map_err(err)?;
    let w = filter::filter_weights(&FilterSpec::single(omega, periods, Forcing::Sin), &tg).map_err(err)?;
    Ok(filter::beta_discrete(lam, &w, &tg))
}

#[pyfunction]
fn common_base_frequency(frequencies: Vec<f64>) -> PyResult<f64> {
    filter::common_base_frequency(&frequencies).map_err(err)
}

/// Assembles `I - S` densely; returns `(asymmetry, min_eig, max_eig, eigenvalues)`.
#[pyfunction]
fn spectrum(py: Python<'_>, op: &PyOperator) -> PyResult<(f64, f64, f64, Vec<f64>)> {
    let r = py
        .detach(|| assemble_dense(&op.inner, "python").map(|d| spectrum_report(&d)))
        .map_err(err)?;
    Ok((r.symmetric_deviation, r.min, r.max, r.eigenvalues))
}

#[pymodule]
fn pywaveholtz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid2D>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(modified_omega, m)?)?;
    m.add_function(wrap_pyfunction!(filter_weights, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(common_base_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add("WaveHoltzError", m.py().get_type::<WaveHoltzError>())?;
    Ok(())
}
