//! Python bindings for `mlab_core`.
//!
//! Sequences cross the boundary as Python lists; complex series are lists of
//! `complex` together with an integer offset (the index of the first entry).

use mlab_core::approximants::{hb_eval_direct, CramerWeight, MangoldtApproximant};
use mlab_core::arith::{build_sieve, SieveTable};
use mlab_core::averaging::{avg_adjoint, avg_full, avg_upper, variation_norm, variation_seminorm};
use mlab_core::experiments::{registry, run_experiment, to_csv, write_outputs, ExperimentConfig};
use mlab_core::gowers::{little_u_lower, u_full_norm};
use mlab_core::padic::bilinear_norm_search;
use mlab_core::poly::{IntPolynomial, RationalPhase};
use mlab_core::series::WindowedSeries;
use mlab_core::symbols::{arithmetic_symbol, continuous_symbol, plancherel_check, weyl_sum_primes};
use mlab_core::{Complex64, MlabError};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(mlab, ScaleError, PyValueError, "Input exceeds a configured scale guard.");
create_exception!(mlab, NumericError, PyValueError, "A numerical routine failed to converge.");

fn err(e: MlabError) -> PyErr {
    match e {
        MlabError::UnsupportedScale { .. } => ScaleError::new_err(e.to_string()),
        MlabError::NumericFailure(_) => NumericError::new_err(e.to_string()),
        MlabError::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn series(offset: i64, values: Vec<Complex64>) -> PyResult<WindowedSeries> {
    WindowedSeries::new(offset, values).map_err(err)
}

fn poly(coeffs: Vec<i64>) -> PyResult<IntPolynomial> {
    IntPolynomial::new(coeffs).map_err(err)
}

/// Linear sieve up to `limit`: smallest prime factors, μ, φ, Λ, Ramanujan sums.
#[pyclass(name = "Sieve", frozen)]
struct PySieve(SieveTable);

#[pymethods]
impl PySieve {
    #[new]
    fn new(limit: u64) -> PyResult<Self> {
        build_sieve(limit).map(Self).map_err(err)
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.0.limit()
    }

    fn primes(&self) -> Vec<u32> {
        self.0.primes().to_vec()
    }

    fn mobius(&self, n: u64) -> PyResult<i8> {
        self.0.mobius(n).map_err(err)
    }

    fn euler_phi(&self, n: u64) -> PyResult<u64> {
        self.0.euler_phi(n).map_err(err)
    }

    fn von_mangoldt(&self, n: u64) -> PyResult<f64> {
        self.0.von_mangoldt(n).map_err(err)
    }

    /// Λ(0..=n_max); index 0 is 0.
    fn mangoldt_values(&self, n_max: u64) -> PyResult<Vec<f64>> {
        self.0.mangoldt_values(n_max).map_err(err)
    }

    fn ramanujan_sum(&self, q: u64, n: i64) -> PyResult<i64> {
        self.0.ramanujan_sum(q, n).map_err(err)
    }

    fn factorize(&self, n: u64) -> PyResult<Vec<(u64, u32)>> {
        self.0.factorize(n).map(|f| f.0).map_err(err)
    }
}

/// Cramér weight `(W/φ(W)) 1{(n, W) = 1}` with `W = ∏_{p ≤ w} p`.
#[pyclass(name = "CramerWeight", frozen)]
struct PyCramer(CramerWeight);

#[pymethods]
impl PyCramer {
    #[new]
    fn new(w: f64, sieve: &PySieve) -> PyResult<Self> {
        CramerWeight::new(w, &sieve.0).map(Self).map_err(err)
    }

    #[getter]
    fn level(&self) -> f64 {
        self.0.level()
    }

    #[getter]
    fn normalization(&self) -> f64 {
        self.0.normalization()
    }

    fn eval(&self, n: i64) -> f64 {
        self.0.eval(n)
    }

    fn eval_range(&self, lo: i64, length: usize) -> Vec<f64> {
        self.0.eval_range(lo, length)
    }
}

/// The approximant Λ_N: a Cramér weight at level `exp(Log(N)^{1/c0})`.
#[pyclass(name = "MangoldtApproximant", frozen)]
struct PyApprox(MangoldtApproximant);

#[pymethods]
impl PyApprox {
    #[new]
    fn new(n: f64, c0: u32, sieve: &PySieve) -> PyResult<Self> {
        MangoldtApproximant::new(n, c0, &sieve.0).map(Self).map_err(err)
    }

    #[getter]
    fn level(&self) -> f64 {
        self.0.level()
    }

    fn eval(&self, n: i64) -> f64 {
        self.0.eval(n)
    }

    fn eval_range(&self, lo: i64, length: usize) -> Vec<f64> {
        self.0.cramer().eval_range(lo, length)
    }
}

#[pyfunction]
fn heath_brown(q: u64, n: u64, sieve: &PySieve) -> PyResult<f64> {
    hb_eval_direct(q, n, &sieve.0).map_err(err)
}

/// `‖f‖_{U^{d+1}[N]}` for `f` given on `[offset, offset + len)`.
#[pyfunction]
#[pyo3(signature = (values, n, d, offset = 1))]
fn gowers_norm(py: Python<'_>, values: Vec<Complex64>, n: usize, d: u32, offset: i64) -> PyResult<f64> {
    let f = series(offset, values)?;
    py.detach(|| u_full_norm(&f, n, d)).map_err(err)
}

/// Lower bound for `‖f‖_{u^{d+1}[N]}` and the phase coefficients attaining it.
#[pyfunction]
#[pyo3(signature = (values, n, d, offset = 1, q_max = 12, grid = 5, refine_steps = 40))]
#[allow(clippy::too_many_arguments)]
fn little_gowers_lower(
    py: Python<'_>,
    values: Vec<Complex64>,
    n: usize,
    d: u32,
    offset: i64,
    q_max: u64,
    grid: usize,
    refine_steps: usize,
) -> PyResult<(f64, Vec<f64>)> {
    let f = series(offset, values)?;
    let (v, phase) = py.detach(|| little_u_lower(&f, n, d, q_max, grid, refine_steps)).map_err(err)?;
    Ok((v, phase.coeffs))
}

fn averaging(
    kind: &str,
    n: u64,
    weights: Vec<f64>,
    f: (i64, Vec<Complex64>),
    g: (i64, Vec<Complex64>),
    p: Vec<i64>,
) -> PyResult<(i64, Vec<Complex64>)> {
    if (weights.len() as u64) < n {
        return Err(PyValueError::new_err(format!("need weights for n = 1..{n}, got {}", weights.len())));
    }
    let (f, g, p) = (series(f.0, f.1)?, series(g.0, g.1)?, poly(p)?);
    let w = |m: u64| weights[(m - 1) as usize];
    let out = match kind {
        "upper" => avg_upper(n, w, &f, &g, &p),
        "full" => avg_full(n, w, &f, &g, &p),
        _ => avg_adjoint(n, w, &f, &g, &p),
    }
    .map_err(err)?;
    Ok((out.offset(), out.values().to_vec()))
}

/// `(1/N) Σ_{N/2 < n ≤ N} w(n) f(x+n) g(x+P(n))`. Series are `(offset, values)`;
/// `weights[k]` is `w(k+1)`; `p` lists integer coefficients from the constant term.
#[pyfunction]
#[pyo3(name = "avg_upper")]
fn avg_upper_py(
    n: u64,
    weights: Vec<f64>,
    f: (i64, Vec<Complex64>),
    g: (i64, Vec<Complex64>),
    p: Vec<i64>,
) -> PyResult<(i64, Vec<Complex64>)> {
    averaging("upper", n, weights, f, g, p)
}

/// Same as `avg_upper` with `n` ranging over `1..=N`.
#[pyfunction]
#[pyo3(name = "avg_full")]
fn avg_full_py(
    n: u64,
    weights: Vec<f64>,
    f: (i64, Vec<Complex64>),
    g: (i64, Vec<Complex64>),
    p: Vec<i64>,
) -> PyResult<(i64, Vec<Complex64>)> {
    averaging("full", n, weights, f, g, p)
}

/// Adjoint of `avg_upper` in its first slot.
#[pyfunction]
#[pyo3(name = "avg_adjoint")]
fn avg_adjoint_py(
    n: u64,
    weights: Vec<f64>,
    h: (i64, Vec<Complex64>),
    g: (i64, Vec<Complex64>),
    p: Vec<i64>,
) -> PyResult<(i64, Vec<Complex64>)> {
    averaging("adjoint", n, weights, h, g, p)
}

/// r-variation seminorm; with `include_sup` the sup term is added.
#[pyfunction]
#[pyo3(signature = (values, r, include_sup = false))]
fn variation(values: Vec<f64>, r: f64, include_sup: bool) -> PyResult<f64> {
    if include_sup { variation_norm(&values, r) } else { variation_seminorm(&values, r) }.map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a1, a2, q, p, units_only = true))]
fn symbol(a1: i64, a2: i64, q: u64, p: Vec<i64>, units_only: bool) -> PyResult<Complex64> {
    arithmetic_symbol(a1, a2, q, &poly(p)?, units_only).map_err(err)
}

#[pyfunction]
#[pyo3(name = "continuous_symbol", signature = (xi1, xi2, n, p, tol = 1e-10))]
fn continuous_symbol_py(py: Python<'_>, xi1: f64, xi2: f64, n: f64, p: Vec<i64>, tol: f64) -> PyResult<Complex64> {
    let p = poly(p)?;
    py.detach(|| continuous_symbol(xi1, xi2, n, &p, tol)).map_err(err)
}

/// `E_{n ≤ N} Λ(n) e(α P(n))`.
#[pyfunction]
fn weyl_sum(py: Python<'_>, n: u64, alpha: f64, p: Vec<i64>, sieve: &PySieve) -> PyResult<Complex64> {
    let p = poly(p)?;
    py.detach(|| weyl_sum_primes(n, alpha, &p, &sieve.0)).map_err(err)
}

/// `Σ_{r ∈ (Z/dZ)^×} |E_{n mod q} e(R(n) − rn/d)|²` with `R(n) = Σ a_j n^j / q`.
#[pyfunction]
fn plancherel(q: u64, d: u64, numerators: Vec<i64>) -> PyResult<f64> {
    let r0 = RationalPhase::new(numerators, q).map_err(err)?;
    plancherel_check(q, d, &r0).map_err(err)
}

/// Searched lower bound for the bilinear `L²×L²→L^q` norm of the unit average
/// on `Z/p^jZ`, with `P(n) = n^degree`.
#[pyfunction]
#[pyo3(signature = (p, j, q, degree = 2, restarts = 20, seed = 0))]
fn padic_norm_lower(py: Python<'_>, p: u64, j: u32, q: f64, degree: usize, restarts: usize, seed: u64) -> PyResult<f64> {
    let poly = IntPolynomial::monomial(degree).map_err(err)?;
    py.detach(|| bilinear_norm_search(p, j, q, &poly, restarts, seed)).map(|s| s.bound).map_err(err)
}

#[pyfunction]
fn experiments() -> Vec<(&'static str, &'static str, Vec<(&'static str, &'static str)>)> {
    registry().iter().map(|s| (s.name, s.description, s.keys.iter().map(|k| (k.name, k.default)).collect())).collect()
}

/// Runs an experiment from a JSON config string. Returns the CSV text; when
/// `out_dir` is given the CSV and SVG files are also written there.
#[pyfunction]
#[pyo3(signature = (config_json, out_dir = None))]
fn run(py: Python<'_>, config_json: &str, out_dir: Option<std::path::PathBuf>) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let out = py.detach(|| run_experiment(&cfg)).map_err(err)?;
    if let Some(dir) = out_dir {
        write_outputs(&out, &dir).map_err(err)?;
    }
    Ok(to_csv(&out.table))
}

#[pymodule]
fn mlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ScaleError", m.py().get_type::<ScaleError>())?;
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    m.add_class::<PySieve>()?;
    m.add_class::<PyCramer>()?;
    m.add_class::<PyApprox>()?;
    m.add_function(wrap_pyfunction!(heath_brown, m)?)?;
    m.add_function(wrap_pyfunction!(gowers_norm, m)?)?;
    m.add_function(wrap_pyfunction!(little_gowers_lower, m)?)?;
    m.add_function(wrap_pyfunction!(avg_upper_py, m)?)?;
    m.add_function(wrap_pyfunction!(avg_full_py, m)?)?;
    m.add_function(wrap_pyfunction!(avg_adjoint_py, m)?)?;
    m.add_function(wrap_pyfunction!(variation, m)?)?;
    m.add_function(wrap_pyfunction!(symbol, m)?)?;
    m.add_function(wrap_pyfunction!(continuous_symbol_py, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_sum, m)?)?;
    m.add_function(wrap_pyfunction!(plancherel, m)?)?;
    m.add_function(wrap_pyfunction!(padic_norm_lower, m)?)?;
    m.add_function(wrap_pyfunction!(experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
