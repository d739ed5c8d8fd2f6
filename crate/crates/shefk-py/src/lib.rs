//! Python bindings for the `shefk` library.
//!
//! Exposes the Monte Carlo solvers, the chaos-expansion algebra, the
//! deterministic reduced PDE, and the self-check battery. Estimates come back
//! as `(value, std_error, n)` tuples; chaos expansions are wrapped in a
//! `ChaosExpansion` class whose terms are `(alpha_tuple, coefficient)` pairs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use shefk::kernels::{self, InitialCondition};
use shefk::pde;
use shefk::solver::{self, SolverConfig};
use shefk::validate::{run_checks, standard_checks, Scale};
use shefk::wick::{self, MultiIndex};
use shefk::{hermite, FieldEstimate};

fn err(e: shefk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn triple(e: FieldEstimate) -> (f64, f64, usize) {
    (e.value, e.std_error, e.n)
}

fn ic(name: &str) -> PyResult<InitialCondition> {
    InitialCondition::from_name(name).map_err(err)
}

/// The orthonormal Hermite function `e_j(x)` (1-based index).
#[pyfunction]
fn hermite_function(j: usize, x: f64) -> PyResult<f64> {
    hermite::hermite_function(j, x).map_err(err)
}

/// Probabilists' Hermite polynomial `He_n(z)`.
#[pyfunction]
fn hermite_polynomial(n: u32, z: f64) -> f64 {
    hermite::hermite_polynomial_prob(n, z)
}

/// A finite Wiener chaos expansion: coefficients over multi-indices.
#[pyclass(name = "ChaosExpansion")]
#[derive(Clone)]
struct PyChaosExpansion {
    inner: wick::ChaosExpansion,
}

#[pymethods]
impl PyChaosExpansion {
    /// Build from `[(alpha_tuple, coefficient), ...]`.
    #[new]
    fn new(terms: Vec<(Vec<u32>, f64)>) -> Self {
        let inner = wick::ChaosExpansion::from_terms(
            terms.into_iter().map(|(a, c)| (MultiIndex::new(a), c)),
        );
        Self { inner }
    }

    /// All nonzero terms as `(alpha_tuple, coefficient)` pairs.
    fn terms(&self) -> Vec<(Vec<u32>, f64)> {
        self.inner.terms().map(|(a, c)| (a.entries().to_vec(), c)).collect()
    }

    fn coefficient(&self, alpha: Vec<u32>) -> f64 {
        self.inner.coefficient(&MultiIndex::new(alpha))
    }

    /// Evaluate at a coordinate vector `z` (needs `len(z) >= basis_bound`).
    fn eval(&self, z: Vec<f64>) -> PyResult<f64> {
        wick::chaos_eval(&self.inner, &z).map_err(err)
    }

    /// Wick product with another expansion.
    fn wick(&self, other: &PyChaosExpansion) -> PyChaosExpansion {
        Self { inner: wick::wick_product(&self.inner, &other.inner) }
    }

    /// Second quantization: project onto the first `kp` coordinates.
    fn project(&self, kp: usize) -> PyChaosExpansion {
        Self { inner: wick::second_quantization(&self.inner, kp) }
    }

    fn l2_norm_sq(&self) -> f64 {
        self.inner.l2_norm_sq()
    }

    fn degree_bound(&self) -> u32 {
        self.inner.degree_bound()
    }

    fn basis_bound(&self) -> usize {
        self.inner.basis_bound()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChaosExpansion(terms={}, degree<={}, basis<={})",
            self.inner.len(),
            self.inner.degree_bound(),
            self.inner.basis_bound()
        )
    }
}

/// Truncated Wick exponential of the Gaussian `sum_j c_j z_j`; returns the
/// expansion up to degree `n` and the exact L2 norm of the dropped tail.
#[pyfunction]
fn wick_exponential(c: Vec<f64>, n: u32) -> (PyChaosExpansion, f64) {
    let we = wick::wick_exponential(&c, n);
    (PyChaosExpansion { inner: we.expansion }, we.tail_l2)
}

/// Configuration shared by the Monte Carlo solvers.
#[pyclass(name = "SolverConfig")]
#[derive(Clone)]
struct PySolverConfig {
    inner: SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (t, x, k, n_paths=10_000, n_noise=1000, dt=1e-3, seed=0, degree=12, bin_width=0.02, u0="one"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        t: f64,
        x: f64,
        k: usize,
        n_paths: usize,
        n_noise: usize,
        dt: f64,
        seed: u64,
        degree: u32,
        bin_width: f64,
        u0: &str,
    ) -> PyResult<Self> {
        let mut cfg = SolverConfig::new(t, x, k);
        cfg.n_paths = n_paths;
        cfg.n_noise = n_noise;
        cfg.dt = dt;
        cfg.seed = seed;
        cfg.degree = degree;
        cfg.bins.width = bin_width;
        cfg.u0 = ic(u0)?;
        cfg.validate().map_err(err)?;
        Ok(Self { inner: cfg })
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn u0(&self) -> String {
        self.inner.u0.name().to_string()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SolverConfig(t={}, x={}, k={}, n_paths={}, n_noise={}, dt={}, seed={}, u0='{}')",
            c.t,
            c.x,
            c.k,
            c.n_paths,
            c.n_noise,
            c.dt,
            c.seed,
            c.u0.name()
        )
    }
}

/// Truncated Feynman-Kac solution `u^K_{t,x}(z)` as `(value, se, n)`.
#[pyfunction]
fn solve_fk(cfg: &PySolverConfig, z: Vec<f64>) -> PyResult<(f64, f64, usize)> {
    solver::solve_fk_truncated(&cfg.inner, &z).map(triple).map_err(err)
}

/// Limit-drift variant: histogram local-time drift, truncated noise part.
#[pyfunction]
fn solve_fk_limit(cfg: &PySolverConfig, z: Vec<f64>) -> PyResult<(f64, f64, usize)> {
    solver::solve_fk_limit(&cfg.inner, &z).map(triple).map_err(err)
}

/// `E[u^K_{t,x}]` over both the noise and the path as `(value, se, n)`.
#[pyfunction]
fn mean_field(cfg: &PySolverConfig, n_samples: usize) -> PyResult<(f64, f64, usize)> {
    solver::mean_field_estimate(&cfg.inner, n_samples).map(triple).map_err(err)
}

/// q-th moment via the q-particle Feynman-Kac formula.
#[pyfunction]
fn moment_fk(q: u32, cfg: &PySolverConfig) -> PyResult<(f64, f64, usize)> {
    solver::moment_fk(q, &cfg.inner).map(triple).map_err(err)
}

/// q-th moment by direct simulation; returns `(value, se, n)` after the
/// q = 2 inner-variance bias correction.
#[pyfunction]
fn empirical_moment(q: u32, cfg: &PySolverConfig) -> PyResult<(f64, f64, usize)> {
    let m = solver::empirical_moment(q, &cfg.inner).map_err(err)?;
    Ok(triple(m.estimate))
}

/// Truncation-convergence table: rows of
/// `(k, mean_over_noise, se_over_noise, median_gap_or_None)`.
#[pyfunction]
fn convergence_study(
    cfg: &PySolverConfig,
    k_list: Vec<usize>,
    n_noise: usize,
) -> PyResult<Vec<(usize, f64, f64, Option<f64>)>> {
    let rows = solver::convergence_study(&cfg.inner, &k_list, n_noise).map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.k, r.mean_over_noise, r.se_over_noise, r.median_gap))
        .collect())
}

/// Chaos kernel `f_n(t, x; x_1..x_n)` by quadrature (n = 1, 2, 3).
#[pyfunction]
fn chaos_kernel(n: usize, t: f64, x: f64, points: Vec<f64>, u0: &str) -> PyResult<f64> {
    kernels::chaos_kernel_quadrature(n, t, x, &points, &ic(u0)?).map_err(err)
}

/// Monte Carlo chaos coefficients of `u^K_{t,x}` up to `degree`; returns the
/// expansion and the per-term standard errors.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn chaos_coefficients(
    t: f64,
    x: f64,
    k: usize,
    degree: u32,
    u0: &str,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> PyResult<(PyChaosExpansion, Vec<(Vec<u32>, f64)>)> {
    let kc = kernels::chaos_coefficients_mc(t, x, k, degree, &ic(u0)?, n_paths, dt, seed)
        .map_err(err)?;
    let ses = kc.std_errors.iter().map(|(a, s)| (a.entries().to_vec(), *s)).collect();
    Ok((PyChaosExpansion { inner: kc.expansion }, ses))
}

/// Conditional expectation of `expr` given the first `len(z_head)`
/// coordinates, by Monte Carlo over the remaining ones (out of `k_big`).
#[pyfunction]
fn conditional_expectation(
    expr: &PyChaosExpansion,
    k_big: usize,
    z_head: Vec<f64>,
    n_samples: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let mut rng = shefk::rng::stream(seed, shefk::rng::StreamRole::Conditional, 0);
    wick::conditional_expectation_mc(
        |z| wick::chaos_eval(&expr.inner, z).unwrap(),
        k_big,
        &z_head,
        n_samples,
        &mut rng,
    )
    .map_err(err)
}

/// Solve the reduced PDE (K = `k`, spacing `h`) and read off `u(t, x, z)`
/// at the nearest grid node.
#[pyfunction]
fn reduced_pde_point(u0: &str, k: usize, h: f64, t: f64, x: f64, z: Vec<f64>) -> PyResult<f64> {
    let grid = pde::PdeGrid::standard(k, h, 0.9).map_err(err)?;
    let field = pde::solve_reduced_pde(&ic(u0)?, &grid, t).map_err(err)?;
    let iz: Vec<usize> = z.iter().map(|&v| grid.z_index_near(v)).collect();
    Ok(field.u_at(grid.x_index_near(x), &iz))
}

/// Feynman-Kac estimate of the same point value, `(u, u_se)` (K = 1 or 2).
#[pyfunction]
fn fk_pde_point(
    t: f64,
    x: f64,
    z: Vec<f64>,
    u0: &str,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let p = pde::fk_pde_point(t, x, &z, &ic(u0)?, n_paths, dt, seed).map_err(err)?;
    Ok((p.u.value, p.u.std_error))
}

/// Run the internal consistency battery; returns `(name, passed, detail)`
/// per check.
#[pyfunction]
#[pyo3(signature = (quick=true, seed=0))]
fn validate(quick: bool, seed: u64) -> Vec<(String, bool, String)> {
    let scale = if quick { Scale::Quick } else { Scale::Full };
    run_checks(&standard_checks(), scale, seed)
        .into_iter()
        .map(|r| (r.name, r.passed, r.detail))
        .collect()
}

#[pymodule]
fn shefk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyChaosExpansion>()?;
    m.add_function(wrap_pyfunction!(hermite_function, m)?)?;
    m.add_function(wrap_pyfunction!(hermite_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(wick_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fk, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fk_limit, m)?)?;
    m.add_function(wrap_pyfunction!(mean_field, m)?)?;
    m.add_function(wrap_pyfunction!(moment_fk, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_moment, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(chaos_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(chaos_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_pde_point, m)?)?;
    m.add_function(wrap_pyfunction!(fk_pde_point, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
