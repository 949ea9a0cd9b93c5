use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dilute_core::error::Error;
use dilute_core::model::{Atom, RngContract};
use dilute_core::pruefer::{OrbitSettings, PsiLaw};
use dilute_core::stats::EstimateWithError;
use dilute_core::{arith, dos, harmonics, lyapunov, model, sl2, verify};

fn err(e: Error) -> PyErr {
    match e {
        Error::Singular { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Consistency(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Quasi-momentum `k` in (0, pi) and energy `E = -2 cos k`.
#[pyclass(name = "EnergyPoint", frozen, from_py_object)]
#[derive(Clone)]
struct EnergyPoint(model::EnergyPoint);

#[pymethods]
impl EnergyPoint {
    #[staticmethod]
    fn from_k(k: f64) -> PyResult<Self> {
        model::EnergyPoint::from_k(k).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_energy(energy: f64) -> PyResult<Self> {
        model::EnergyPoint::from_energy(energy).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_rational(p: u32, q: u32) -> PyResult<Self> {
        model::EnergyPoint::from_rational(p, q).map(Self).map_err(err)
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.0.energy()
    }

    /// `(p, q)` when built from a rational, else `None`.
    #[getter]
    fn rational(&self) -> Option<(u32, u32)> {
        self.0.rational()
    }

    fn __repr__(&self) -> String {
        format!("EnergyPoint(k={}, E={})", self.0.k(), self.0.energy())
    }
}

/// Finite law of impurity values, weights normalized on construction.
#[pyclass(name = "ImpurityLaw", frozen, from_py_object)]
#[derive(Clone)]
struct ImpurityLaw(model::ImpurityLaw);

#[pymethods]
impl ImpurityLaw {
    #[new]
    fn new(atoms: Vec<(f64, f64)>) -> PyResult<Self> {
        model::ImpurityLaw::new(atoms.into_iter().map(|(value, weight)| Atom { value, weight }))
            .map(Self)
            .map_err(err)
    }

    /// From `"v:w,v:w,..."`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        model::ImpurityLaw::parse(text).map(Self).map_err(err)
    }

    #[staticmethod]
    fn dirac(value: f64) -> PyResult<Self> {
        model::ImpurityLaw::dirac(value).map(Self).map_err(err)
    }

    #[getter]
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.0.atoms().iter().map(|a| (a.value, a.weight)).collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ImpurityLaw.parse({:?})", self.0.to_string())
    }
}

/// Impurity density `rho` together with the law of impurity values.
#[pyclass(name = "DisorderSpec", frozen, from_py_object)]
#[derive(Clone)]
struct DisorderSpec(model::DisorderSpec);

#[pymethods]
impl DisorderSpec {
    #[new]
    fn new(rho: f64, law: &ImpurityLaw) -> PyResult<Self> {
        model::DisorderSpec::new(rho, law.0.clone()).map(Self).map_err(err)
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    #[getter]
    fn law(&self) -> ImpurityLaw {
        ImpurityLaw(self.0.law().clone())
    }

    fn __repr__(&self) -> String {
        format!("DisorderSpec(rho={}, law={:?})", self.0.rho(), self.0.law().to_string())
    }
}

/// Monte Carlo value with batch-means standard error.
#[pyclass(name = "Estimate", frozen, skip_from_py_object)]
struct Estimate {
    #[pyo3(get)]
    value: f64,
    #[pyo3(get)]
    std_error: f64,
    #[pyo3(get)]
    n_samples: u64,
}

impl From<EstimateWithError> for Estimate {
    fn from(e: EstimateWithError) -> Self {
        Self {
            value: e.value,
            std_error: e.std_error,
            n_samples: e.n_samples,
        }
    }
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!("Estimate({} +- {})", self.value, self.std_error)
    }
}

fn settings(steps: u64, burn_in: u64, replicas: u64) -> OrbitSettings {
    OrbitSettings {
        n_steps: steps,
        burn_in,
        replicas,
        ..OrbitSettings::default()
    }
}

#[pyfunction]
fn transfer(e: &EnergyPoint, v: f64) -> [[f64; 2]; 2] {
    let m = sl2::transfer(&e.0, v);
    [[m.a11, m.a12], [m.a21, m.a22]]
}

#[pyfunction]
fn expansion_eigenvalue(e: &EnergyPoint, v: f64) -> f64 {
    sl2::expansion_eigenvalue(&e.0, v)
}

#[pyfunction]
fn gamma_hat_infinity(e: &EnergyPoint, law: &ImpurityLaw) -> PyResult<f64> {
    Ok(lyapunov::gamma_hat_infinity(&e.0, &law.0).map_err(err)?.gamma.value)
}

/// Lyapunov exponent of the chain; `estimator` is `"telescopic"` or `"matrix"`.
#[pyfunction]
#[pyo3(signature = (e, disorder, steps=1_000_000, seed=1, burn_in=10_000, replicas=1, estimator="telescopic", renorm_every=20))]
#[allow(clippy::too_many_arguments)]
fn gamma_mc(
    py: Python<'_>,
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    steps: u64,
    seed: u64,
    burn_in: u64,
    replicas: u64,
    estimator: &str,
    renorm_every: u32,
) -> PyResult<Estimate> {
    let s = settings(steps, burn_in, replicas);
    let rng = RngContract::new(seed, 0);
    let r = py.detach(|| match estimator {
        "telescopic" => lyapunov::gamma_mc_telescopic(&e.0, &disorder.0, &s, &rng),
        "matrix" => lyapunov::gamma_mc_matrix_product(&e.0, &disorder.0, &s, renorm_every, &rng),
        other => Err(Error::Config(format!("unknown estimator {other:?}"))),
    });
    Ok(r.map_err(err)?.gamma.into())
}

/// Exponent of the auxiliary chain: uniform rotations, or the grid
/// `{pi j / q}` when `q` is given.
#[pyfunction]
#[pyo3(signature = (e, law, q=None, steps=1_000_000, seed=1, burn_in=10_000))]
fn gamma_hat_mc(
    py: Python<'_>,
    e: &EnergyPoint,
    law: &ImpurityLaw,
    q: Option<u32>,
    steps: u64,
    seed: u64,
    burn_in: u64,
) -> PyResult<Estimate> {
    let psi = q.map_or(PsiLaw::Uniform, PsiLaw::grid);
    let s = settings(steps, burn_in, 1);
    let r = py.detach(|| lyapunov::gamma_hat_mc(&e.0, &law.0, &psi, &s, &RngContract::new(seed, 0)));
    Ok(r.map_err(err)?.gamma.into())
}

/// `(gamma_hat_q, truncation_error)` from the Fourier series.
#[pyfunction]
#[pyo3(signature = (e, law, q, n_max=32, n_grid=1024))]
fn gamma_hat_q_spectral(e: &EnergyPoint, law: &ImpurityLaw, q: u32, n_max: usize, n_grid: usize) -> PyResult<(f64, f64)> {
    let r = lyapunov::gamma_hat_q_spectral(&e.0, &law.0, q, n_max, n_max * q as usize, n_grid).map_err(err)?;
    Ok((r.gamma.value, r.truncation_error.unwrap_or(0.0)))
}

/// `[a_0, ..., a_{m_max}]` and the fitted envelope `(c, xi)`.
#[pyfunction]
#[pyo3(signature = (e, law, m_max=64, n_grid=1024))]
fn fourier_a(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    m_max: usize,
    n_grid: usize,
) -> PyResult<(Vec<Complex64>, Option<(f64, f64)>)> {
    let a = lyapunov::fourier_a(&e.0, &law.0, m_max, n_grid).map_err(err)?;
    Ok(((0..=m_max as i64).map(|m| a.get(m)).collect(), a.envelope))
}

/// Oscillatory sums `[I_1, ..., I_{m_max}]` along a chain orbit.
#[pyfunction]
#[pyo3(signature = (e, disorder, m_max=6, steps=1_000_000, seed=1))]
fn oscillatory_sums(
    py: Python<'_>,
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    m_max: usize,
    steps: u64,
    seed: u64,
) -> PyResult<Vec<Complex64>> {
    let s = settings(steps, 10_000, 1);
    let h = py
        .detach(|| harmonics::oscillatory_sums_physical(&e.0, &disorder.0, m_max, &s, &RngContract::new(seed, 0)))
        .map_err(err)?;
    Ok((1..=m_max as i64).map(|m| h.get(m)).collect())
}

/// `[J_1, ..., J_{n_max}]` of the truncated harmonic system at `k = pi p/q`.
#[pyfunction]
#[pyo3(signature = (e, law, q, n_max=64))]
fn harmonic_system(py: Python<'_>, e: &EnergyPoint, law: &ImpurityLaw, q: u32, n_max: usize) -> PyResult<Vec<Complex64>> {
    let grid = (24 * q as usize * n_max).next_power_of_two();
    let j = py
        .detach(|| harmonics::solve_harmonic_system(&e.0, &law.0, q, n_max, 2 * q as usize * n_max, grid))
        .map_err(err)?;
    Ok((1..=n_max as i64).map(|n| j.get(n)).collect())
}

#[pyfunction]
#[pyo3(signature = (e, disorder, steps=1_000_000, seed=1))]
fn dos_rotation(py: Python<'_>, e: &EnergyPoint, disorder: &DisorderSpec, steps: u64, seed: u64) -> PyResult<Estimate> {
    let s = settings(steps, 10_000, 1);
    let r = py.detach(|| dos::dos_rotation(&e.0, &disorder.0, &s, &RngContract::new(seed, 0)));
    Ok(r.map_err(err)?.value.into())
}

#[pyfunction]
#[pyo3(signature = (e, disorder, box_size=10_000, replicas=8, seed=1))]
fn dos_eigencount(
    py: Python<'_>,
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    box_size: usize,
    replicas: u64,
    seed: u64,
) -> PyResult<Estimate> {
    let r = py.detach(|| dos::dos_eigencount(&e.0, &disorder.0, box_size, replicas, &RngContract::new(seed, 0)));
    Ok(r.map_err(err)?.value.into())
}

/// First-order density of states; the harmonic phase average when `q` is given.
#[pyfunction]
#[pyo3(signature = (e, disorder, q=None, n_max=128, n_grid=4096))]
fn dos_lowdensity(e: &EnergyPoint, disorder: &DisorderSpec, q: Option<u32>, n_max: usize, n_grid: usize) -> PyResult<f64> {
    let avg = match q {
        Some(q) => dos::PhaseAverage::Harmonic { q, n_max, n_grid },
        None => dos::PhaseAverage::Lebesgue { n_grid },
    };
    Ok(dos::dos_lowdensity(&e.0, &disorder.0, &avg).map_err(err)?.value.value)
}

/// `(p, q)` when `k` is within `tol` of `pi p/q` with `q <= q_max`.
#[pyfunction]
#[pyo3(signature = (k, q_max=12, tol=arith::DEFAULT_TOL))]
fn classify_k(k: f64, q_max: u32, tol: f64) -> PyResult<Option<(u32, u32)>> {
    Ok(arith::classify_k(k, q_max, tol).map_err(err)?.rational())
}

/// Runs the acceptance suite and returns the verdict as JSON text.
#[pyfunction]
#[pyo3(signature = (suite="fast", seed=verify::DEFAULT_SEED, threads=0))]
fn run_verify(py: Python<'_>, suite: &str, seed: u64, threads: usize) -> PyResult<String> {
    let suite = match suite {
        "fast" => verify::Suite::Fast,
        "full" => verify::Suite::Full,
        other => return Err(PyValueError::new_err(format!("unknown suite {other:?}"))),
    };
    let v = py.detach(|| verify::cmd_verify(suite, seed, threads)).map_err(err)?;
    Ok(serde_json::to_string(&v).expect("verdict serializes"))
}

#[pymodule]
fn dilute(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<EnergyPoint>()?;
    m.add_class::<ImpurityLaw>()?;
    m.add_class::<DisorderSpec>()?;
    m.add_class::<Estimate>()?;
    m.add_function(wrap_pyfunction!(transfer, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_hat_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_mc, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_hat_mc, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_hat_q_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_a, m)?)?;
    m.add_function(wrap_pyfunction!(oscillatory_sums, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_system, m)?)?;
    m.add_function(wrap_pyfunction!(dos_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(dos_eigencount, m)?)?;
    m.add_function(wrap_pyfunction!(dos_lowdensity, m)?)?;
    m.add_function(wrap_pyfunction!(classify_k, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
