//! Python bindings for `hubbard_lax`.

use hubbard_lax::aux_space::AuxSpace as CoreAuxSpace;
use hubbard_lax::commute::{check_commutativity, sample_pairs, CommuteOptions};
use hubbard_lax::lax::LaxParams as CoreLaxParams;
use hubbard_lax::linalg::DenseOperator;
use hubbard_lax::lindblad::{fixed_point_oracle, spectrum, LindbladSpec};
use hubbard_lax::ness::{self, DrivingConfig as CoreDriving};
use hubbard_lax::observables::{profile_and_currents, scaling_fit as core_scaling_fit, TransferEvaluator};
use hubbard_lax::sampling::DEFAULT_SEED;
use hubbard_lax::verify::{verify_params, ResidualReport, DEFAULT_TOL};
use hubbard_lax::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidDriving(_)
        | Error::InvalidArgument(_)
        | Error::InvalidCutoff(_)
        | Error::SiteOutOfRange { .. }
        | Error::TooLarge(_)
        | Error::CutoffMismatch(_)
        | Error::FitRefused(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Per-site densities and per-bond currents, as `(sigma, tau)` pairs.
type Profile = (Vec<(f64, f64)>, Vec<(f64, f64)>);

fn rows(rho: &DenseOperator) -> Vec<Vec<Complex64>> {
    let d = rho.dim();
    rho.as_slice().chunks(d).map(<[Complex64]>::to_vec).collect()
}

#[pyclass(frozen)]
struct AuxSpace(CoreAuxSpace);

#[pymethods]
impl AuxSpace {
    #[new]
    fn new(cutoff: usize) -> PyResult<Self> {
        CoreAuxSpace::new(cutoff).map(AuxSpace).map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Vertex labels in basis order, e.g. `"0+"`, `"1/2+"`.
    fn labels(&self) -> Vec<String> {
        (0..self.0.dim()).map(|i| self.0.label(i)).collect()
    }

    fn index(&self, label: &str) -> Option<usize> {
        hubbard_lax::aux_space::AuxVertex::parse(label).and_then(|v| self.0.index(v))
    }
}

#[pyclass(frozen, get_all)]
struct LaxParams {
    lam: Complex64,
    omega: Complex64,
    u: f64,
}

#[pymethods]
impl LaxParams {
    #[new]
    fn new(lam: Complex64, omega: Complex64, u: f64) -> Self {
        LaxParams { lam, omega, u }
    }

    fn __repr__(&self) -> String {
        format!("LaxParams(lam={}, omega={}, u={})", self.lam, self.omega, self.u)
    }
}

impl LaxParams {
    fn core(&self) -> CoreLaxParams {
        CoreLaxParams::new(self.lam, self.omega, self.u)
    }
}

#[pyclass(frozen, get_all)]
struct Report {
    name: String,
    cutoff: usize,
    residual: f64,
    scale: f64,
    tolerance: f64,
    passed: bool,
}

impl From<ResidualReport> for Report {
    fn from(r: ResidualReport) -> Self {
        Report {
            name: r.identity_name,
            cutoff: r.cutoff_k,
            residual: r.residual_fro,
            scale: r.operand_scale,
            tolerance: r.tolerance,
            passed: r.passed,
        }
    }
}

#[pymethods]
impl Report {
    fn __repr__(&self) -> String {
        format!("Report({}, residual={:.3e}, passed={})", self.name, self.residual, self.passed)
    }
}

/// Residuals of the algebraic identities for one parameter point.
#[pyfunction]
#[pyo3(signature = (params, cutoff = 4, tol = DEFAULT_TOL))]
fn verify(params: &LaxParams, cutoff: usize, tol: f64) -> PyResult<Vec<Report>> {
    let reports = verify_params(params.core(), cutoff, tol).map_err(to_py)?;
    Ok(reports.into_iter().map(Report::from).collect())
}

#[pyclass(frozen, get_all)]
struct DrivingConfig {
    n: usize,
    gamma_l: f64,
    gamma_r: f64,
    mu_l: f64,
    mu_r: f64,
    u: f64,
}

#[pymethods]
impl DrivingConfig {
    #[new]
    #[pyo3(signature = (n, gamma_l = 1.0, gamma_r = 1.0, mu_l = 0.0, mu_r = 0.0, u = 1.0))]
    fn new(n: usize, gamma_l: f64, gamma_r: f64, mu_l: f64, mu_r: f64, u: f64) -> Self {
        DrivingConfig { n, gamma_l, gamma_r, mu_l, mu_r, u }
    }

    /// `(lambda, omega, eta)` fixed by the driving.
    fn params(&self) -> PyResult<(Complex64, Complex64, f64)> {
        let p = ness::map_driving_to_params(&self.core()).map_err(to_py)?;
        Ok((p.lambda, p.omega, p.eta))
    }

    fn __repr__(&self) -> String {
        format!(
            "DrivingConfig(n={}, gamma_l={}, gamma_r={}, mu_l={}, mu_r={}, u={})",
            self.n, self.gamma_l, self.gamma_r, self.mu_l, self.mu_r, self.u
        )
    }
}

impl DrivingConfig {
    fn core(&self) -> CoreDriving {
        CoreDriving {
            gamma_l: self.gamma_l,
            gamma_r: self.gamma_r,
            mu_l: self.mu_l,
            mu_r: self.mu_r,
            u: self.u,
            n_sites: self.n,
        }
    }
}

#[pyclass(frozen, get_all)]
struct Ness {
    cutoff: usize,
    eta: f64,
    hermiticity: f64,
    positivity_min_eig: f64,
    trace_error: f64,
    filter_commutator: f64,
    lindblad_residual: Option<f64>,
    /// Row-major density matrix.
    rho: Vec<Vec<Complex64>>,
    /// `(<s^z_j>, <t^z_j>)` per site.
    densities: Vec<(f64, f64)>,
    /// `(J^s, J^t)` per bond.
    currents: Vec<(f64, f64)>,
}

/// Steady state from the Lax construction (dense, n <= 5).
#[pyfunction]
#[pyo3(signature = (config, cutoff = None))]
fn build_ness(config: &DrivingConfig, cutoff: Option<usize>) -> PyResult<Ness> {
    let r = ness::build_ness(&config.core(), cutoff).map_err(to_py)?;
    let obs = profile_and_currents(&r).map_err(to_py)?;
    let d = &r.diagnostics;
    Ok(Ness {
        cutoff: r.cutoff,
        eta: r.eta,
        hermiticity: d.hermiticity,
        positivity_min_eig: d.positivity_min_eig,
        trace_error: d.trace_error,
        filter_commutator: d.filter_commutator,
        lindblad_residual: d.lindblad_residual,
        rho: rows(&r.rho),
        densities: obs.densities,
        currents: obs.currents,
    })
}

/// Fixed point of the Lindbladian by direct null-space computation.
#[pyfunction]
fn oracle(config: &DrivingConfig) -> PyResult<Vec<Vec<Complex64>>> {
    let spec = LindbladSpec::new(&config.core()).map_err(to_py)?;
    let r = fixed_point_oracle(&spec).map_err(to_py)?;
    Ok(rows(&r.rho))
}

/// Eigenvalues of the Lindbladian superoperator.
#[pyfunction]
fn lindblad_spectrum(config: &DrivingConfig) -> PyResult<Vec<Complex64>> {
    let spec = LindbladSpec::new(&config.core()).map_err(to_py)?;
    spectrum(&spec).map_err(to_py)
}

/// Profile and currents by transfer matrices; works past the dense limit.
#[pyfunction]
#[pyo3(signature = (config, cutoff = None))]
fn observables(config: &DrivingConfig, cutoff: Option<usize>) -> PyResult<Profile> {
    let ev = TransferEvaluator::new(&config.core(), cutoff).map_err(to_py)?;
    let o = ev.observables().map_err(to_py)?;
    Ok((o.densities, o.currents))
}

/// `(exponent, prefactor, r_squared)` of a power-law fit to `(n, J)` points.
#[pyfunction]
fn scaling_fit(points: Vec<(usize, f64)>) -> PyResult<(f64, f64, f64)> {
    let f = core_scaling_fit(&points).map_err(to_py)?;
    Ok((f.exponent, f.prefactor, f.r_squared))
}

/// Relative commutator norms of transfer operators at random parameter pairs.
#[pyfunction]
#[pyo3(signature = (n, u, pairs = 5, seed = DEFAULT_SEED, tol = DEFAULT_TOL))]
fn commutativity(n: usize, u: f64, pairs: usize, seed: u64, tol: f64) -> PyResult<Vec<f64>> {
    let opts = CommuteOptions { tol, ..Default::default() };
    let reports = check_commutativity(n, u, &sample_pairs(seed, pairs), &opts).map_err(to_py)?;
    Ok(reports.into_iter().map(|r| r.residual).collect())
}

#[pymodule]
fn pyhubbard(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<AuxSpace>()?;
    m.add_class::<LaxParams>()?;
    m.add_class::<Report>()?;
    m.add_class::<DrivingConfig>()?;
    m.add_class::<Ness>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(build_ness, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(lindblad_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(observables, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_fit, m)?)?;
    m.add_function(wrap_pyfunction!(commutativity, m)?)?;
    Ok(())
}
