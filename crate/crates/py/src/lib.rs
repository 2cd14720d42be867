//! Python bindings: kernels, box spectra, traces, the trace difference and
//! its decay fit, the Bose-gas observables and parameter sweeps.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mehler_traces::bounds::{fit_decay as core_fit_decay, theorem_rhs, DecayPoint, TheoremBoundInput};
use mehler_traces::cli::{render_csv, run_sweep, SweepConfig};
use mehler_traces::kernels::{self, BoxGeometry, ImageCutoff, OscillatorParams, TimePoint, WidenFactor};
use mehler_traces::spectrum::{self, Discretization, DEFAULT_GRID};
use mehler_traces::statmech::{self, EnsembleParams, Volume};
use mehler_traces::traces::{self, DEFAULT_TOL};
use mehler_traces::Error;

create_exception!(mehler_py, DomainError, PyValueError);
create_exception!(mehler_py, RefusedError, PyRuntimeError);
create_exception!(mehler_py, BelowNoiseFloorError, RefusedError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) => DomainError::new_err(e.to_string()),
        Error::BelowNoiseFloor { .. } => BelowNoiseFloorError::new_err(e.to_string()),
        _ => RefusedError::new_err(e.to_string()),
    }
}

type Res<T> = Result<T, PyErr>;

fn time(t: f64) -> Res<TimePoint> {
    TimePoint::new(t).map_err(to_py)
}

fn disc(n: usize) -> Res<Discretization> {
    Discretization::new(n).map_err(to_py)
}

/// Oscillator of strength `kappa` in the cube of side `L`.
#[pyclass(name = "DirichletOscillatorSpec", frozen)]
struct PySpec(spectrum::DirichletOscillatorSpec);

#[pymethods]
impl PySpec {
    #[new]
    fn new(side: f64, kappa: f64) -> Res<Self> {
        spectrum::DirichletOscillatorSpec::new(side, kappa).map(PySpec).map_err(to_py)
    }

    #[getter]
    fn side(&self) -> f64 {
        self.0.side()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa()
    }

    /// Lowest `count` eigenvalues in one dimension and their error estimates.
    #[pyo3(signature = (count, n = DEFAULT_GRID))]
    fn eigenvalues(&self, count: usize, n: usize) -> Res<(Vec<f64>, Vec<f64>)> {
        let s = spectrum::box_oscillator_eigs(&self.0, disc(n)?, count).map_err(to_py)?;
        Ok((s.values, s.errors))
    }

    /// Trace of the semigroup in the cube: `(value, error)`.
    #[pyo3(signature = (t, d = 1, tol = DEFAULT_TOL, n = DEFAULT_GRID))]
    fn trace(&self, t: f64, d: usize, tol: f64, n: usize) -> Res<(f64, f64)> {
        let r = traces::trace_finite(time(t)?, &self.0, d, tol, disc(n)?).map_err(to_py)?;
        Ok((r.value, r.total_error()))
    }

    #[pyo3(signature = (t, d = 1, tol = DEFAULT_TOL, n = DEFAULT_GRID))]
    fn trace_difference(&self, t: f64, d: usize, tol: f64, n: usize) -> Res<PyTraceDifference> {
        traces::trace_difference(time(t)?, &self.0, d, tol, disc(n)?).map(PyTraceDifference).map_err(to_py)
    }

    #[pyo3(signature = (t, d = 1))]
    fn z_term(&self, t: f64, d: usize) -> Res<f64> {
        traces::z_term(time(t)?, &self.0, d).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("DirichletOscillatorSpec(side={}, kappa={})", self.0.side(), self.0.kappa())
    }
}

/// `Tr_inf - Tr_L = Y + Z` with error bars.
#[pyclass(name = "TraceDifference", frozen)]
struct PyTraceDifference(traces::TraceDifference);

#[pymethods]
impl PyTraceDifference {
    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }
    #[getter]
    fn y(&self) -> f64 {
        self.0.y_term
    }
    #[getter]
    fn z(&self) -> f64 {
        self.0.z_term
    }
    #[getter]
    fn err_delta(&self) -> f64 {
        self.0.err_delta
    }
    #[getter]
    fn err_y(&self) -> f64 {
        self.0.err_y
    }
    #[getter]
    fn err_z(&self) -> f64 {
        self.0.err_z
    }
    #[getter]
    fn noise_floor(&self) -> bool {
        self.0.below_noise_floor
    }

    fn __repr__(&self) -> String {
        let d = &self.0;
        format!("TraceDifference(delta={:e}, y={:e}, z={:e}, err_delta={:e})", d.delta, d.y_term, d.z_term, d.err_delta)
    }
}

#[pyfunction]
pub fn heat_kernel(x: Vec<f64>, y: Vec<f64>, t: f64) -> Res<f64> {
    kernels::heat_kernel(&x, &y, time(t)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, y, t, kappa, gamma = 1.0))]
pub fn mehler_kernel(x: Vec<f64>, y: Vec<f64>, t: f64, kappa: f64, gamma: f64) -> Res<f64> {
    let p = OscillatorParams::new(kappa, x.len()).map_err(to_py)?;
    let g = WidenFactor::new(gamma).map_err(to_py)?;
    kernels::mehler_kernel(&x, &y, time(t)?, p, g).map_err(to_py)
}

/// Dirichlet heat kernel of the cube: `(value, tail_bound)`.
#[pyfunction]
#[pyo3(signature = (x, y, t, side, m_max = None))]
pub fn box_kernel(x: Vec<f64>, y: Vec<f64>, t: f64, side: f64, m_max: Option<usize>) -> Res<(f64, f64)> {
    let cutoff = m_max.map_or(ImageCutoff::Auto, ImageCutoff::Fixed);
    let geometry = BoxGeometry::new(side).map_err(to_py)?;
    let v = kernels::dirichlet_box_kernel(&x, &y, time(t)?, geometry, cutoff).map_err(to_py)?;
    Ok((v.value, v.tail_bound))
}

#[pyfunction]
#[pyo3(signature = (t, kappa, d = 1))]
pub fn trace_infinite(t: f64, kappa: f64, d: usize) -> Res<f64> {
    traces::trace_infinite(time(t)?, OscillatorParams::new(kappa, d).map_err(to_py)?).map_err(to_py)
}

/// Right-hand side of the Gaussian-decay estimate with constant `c`.
#[pyfunction]
#[pyo3(signature = (t, side, kappa, d = 1, c = 1.0))]
pub fn decay_bound(t: f64, side: f64, kappa: f64, d: usize, c: f64) -> Res<f64> {
    theorem_rhs(&TheoremBoundInput::new(t, side, kappa, d, c).map_err(to_py)?).map_err(to_py)
}

/// Fit `-ln delta` against the Gaussian abscissa; returns a dict.
#[pyfunction]
#[pyo3(signature = (sides, deltas, kappa, t, d = 1))]
fn fit_decay<'py>(py: Python<'py>, sides: Vec<f64>, deltas: Vec<f64>, kappa: f64, t: f64, d: usize) -> Res<Bound<'py, pyo3::types::PyDict>> {
    if sides.len() != deltas.len() {
        return Err(DomainError::new_err("sides and deltas differ in length"));
    }
    let points: Vec<DecayPoint> =
        sides.iter().zip(&deltas).map(|(&side, &delta)| DecayPoint { side, delta, below_noise_floor: false }).collect();
    let f = core_fit_decay(&points, kappa, t, d).map_err(to_py)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("fitted_rate", f.fitted_rate)?;
    out.set_item("theorem_rate", f.theorem_rate)?;
    out.set_item("expected_rate", f.expected_rate)?;
    out.set_item("rate_in_side_squared", f.rate_in_side_squared)?;
    out.set_item("intercept", f.intercept)?;
    out.set_item("relative_rms", f.relative_rms())?;
    out.set_item("gaussian_preferred", f.gaussian_preferred())?;
    out.set_item("points_used", f.points_used)?;
    Ok(out)
}

/// Mean particle number; whole space when `side` is `None`. Returns `(value, error)`.
#[pyfunction]
#[pyo3(signature = (beta, z, kappa, d = 1, side = None, tol = 1e-12, n = DEFAULT_GRID))]
pub fn avg_number(beta: f64, z: f64, kappa: f64, d: usize, side: Option<f64>, tol: f64, n: usize) -> Res<(f64, f64)> {
    let ens = EnsembleParams::new(beta, z).map_err(to_py)?;
    let volume = match side {
        None => Volume::WholeSpace,
        Some(l) => Volume::Box(spectrum::DirichletOscillatorSpec::new(l, kappa).map_err(to_py)?),
    };
    let r = statmech::avg_number(ens, volume, kappa, d, tol, disc(n)?).map_err(to_py)?;
    Ok((r.value, r.total_error()))
}

/// Trace differences over a grid, returned as CSV text.
#[pyfunction]
#[pyo3(signature = (sides, times, kappas, dims, c = 1.0, tol = DEFAULT_TOL, n = DEFAULT_GRID))]
fn sweep_csv(
    py: Python<'_>,
    sides: Vec<f64>,
    times: Vec<f64>,
    kappas: Vec<f64>,
    dims: Vec<usize>,
    c: f64,
    tol: f64,
    n: usize,
) -> Res<String> {
    let cfg = SweepConfig { sides, times, kappas, dims, constant: c, tol, grid: n };
    let rows = py.detach(|| run_sweep(&cfg)).map_err(to_py)?;
    Ok(render_csv(&rows))
}

#[pymodule]
fn mehler_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyTraceDifference>()?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(mehler_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(box_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(trace_infinite, m)?)?;
    m.add_function(wrap_pyfunction!(decay_bound, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(avg_number, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("RefusedError", m.py().get_type::<RefusedError>())?;
    m.add("BelowNoiseFloorError", m.py().get_type::<BelowNoiseFloorError>())?;
    Ok(())
}
