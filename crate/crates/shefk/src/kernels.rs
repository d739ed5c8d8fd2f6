//! Heat kernel/semigroup and the Wiener-chaos kernels of the solution:
//! simplex quadrature for the kernels `f_n`, and the Brownian-path Monte
//! Carlo route to the Cameron-Martin coefficients `x_alpha`.

use crate::error::{Error, Result};
use crate::par::chunked_reduce;
use crate::paths::{basis_time_integrals, sample_path, TimeGrid};
use crate::rng::{stream, StreamRole};
use crate::wick::{multi_indices, ChaosExpansion, MultiIndex};
use rand::Rng;
use std::sync::Arc;

/// Bounded deterministic initial condition `u0`.
#[derive(Clone)]
pub struct InitialCondition {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    sup: f64,
    name: String,
}

impl std::fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialCondition")
            .field("name", &self.name)
            .field("sup", &self.sup)
            .finish()
    }
}

impl InitialCondition {
    pub fn custom(name: impl Into<String>, sup: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), sup, name: name.into() }
    }

    /// `u0 = 1`.
    pub fn one() -> Self {
        Self::custom("one", 1.0, |_| 1.0)
    }

    /// `u0 = 1_{[a,b]}`.
    pub fn indicator(a: f64, b: f64) -> Self {
        Self::custom(format!("indicator:{a},{b}"), 1.0, move |x| {
            if (a..=b).contains(&x) {
                1.0
            } else {
                0.0
            }
        })
    }

    /// `u0(x) = e^{-x^2}`.
    pub fn gauss_bump() -> Self {
        Self::custom("gauss-bump", 1.0, |x| (-x * x).exp())
    }

    /// `u0(x) = (1 + cos x) / 2`.
    pub fn cosine_bounded() -> Self {
        Self::custom("cosine-bounded", 1.0, |x| 0.5 * (1.0 + x.cos()))
    }

    /// Registry lookup: `one`, `indicator[:a,b]`, `gauss-bump`, `cosine-bounded`.
    pub fn from_name(spec: &str) -> Result<Self> {
        match spec {
            "one" => Ok(Self::one()),
            "gauss-bump" => Ok(Self::gauss_bump()),
            "cosine-bounded" => Ok(Self::cosine_bounded()),
            "indicator" => Ok(Self::indicator(0.0, 1.0)),
            other => {
                if let Some(args) = other.strip_prefix("indicator:") {
                    let (a, b) = args
                        .split_once(',')
                        .ok_or_else(|| Error::Config(format!("bad indicator spec: {other}")))?;
                    let a: f64 = a.trim().parse().map_err(|_| {
                        Error::Config(format!("bad indicator bound in: {other}"))
                    })?;
                    let b: f64 = b.trim().parse().map_err(|_| {
                        Error::Config(format!("bad indicator bound in: {other}"))
                    })?;
                    Ok(Self::indicator(a, b))
                } else {
                    Err(Error::Config(format!(
                        "unknown initial condition '{other}' (expected one, indicator[:a,b], gauss-bump, cosine-bounded)"
                    )))
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// The heat kernel `p_tau(y) = (2 pi tau)^{-1/2} exp(-y^2 / (2 tau))`.
pub fn heat_kernel(tau: f64, y: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain("heat kernel needs tau > 0".into()));
    }
    Ok((2.0 * std::f64::consts::PI * tau).sqrt().recip() * (-y * y / (2.0 * tau)).exp())
}

const SEMIGROUP_NODES: usize = 4001; // Simpson nodes over the +-12 sigma window

// Precomputed Gaussian quadrature table (node, simpson weight * density).
fn semigroup_table() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = SEMIGROUP_NODES;
        let (a, b) = (-12.0_f64, 12.0_f64);
        let h = (b - a) / (n - 1) as f64;
        (0..n)
            .map(|m| {
                let u = a + m as f64 * h;
                let s = if m == 0 || m == n - 1 {
                    1.0
                } else if m % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let phi = (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
                (u, s * phi * h / 3.0)
            })
            .collect()
    })
}

/// `(P_t u0)(x) = int p_t(x - y) u0(y) dy` by composite Simpson after the
/// substitution `y = x + sqrt(t) u`, over `|u| <= 12`. `t = 0` is the identity.
pub fn heat_semigroup(u0: &InitialCondition, t: f64, x: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain("heat semigroup needs t >= 0".into()));
    }
    if t == 0.0 {
        return Ok(u0.eval(x));
    }
    let s = t.sqrt();
    Ok(semigroup_table()
        .iter()
        .map(|&(u, w)| w * u0.eval(x + s * u))
        .sum())
}

/// Composite Simpson rule on `[a, b]` with `n` nodes (`n` odd; forced odd here).
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = if n % 2 == 0 { n + 1 } else { n.max(3) };
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for m in 1..n - 1 {
        let w = if m % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + m as f64 * h);
    }
    acc * h / 3.0
}

/// `int_0^T p_{T-s}(delta) w(s) ds` with the endpoint singularity removed by
/// the substitution `s = T - r^2`:
/// the transformed integrand is `sqrt(2/pi) exp(-delta^2 / (2 r^2)) w(T - r^2)`.
pub(crate) fn heat_time_integral(
    t_end: f64,
    delta: f64,
    nodes: usize,
    w: impl Fn(f64) -> f64,
) -> f64 {
    let sqrt_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
    simpson(0.0, t_end.sqrt(), nodes, |r| {
        let kernel = if r == 0.0 {
            if delta == 0.0 {
                sqrt_2_over_pi
            } else {
                0.0
            }
        } else {
            sqrt_2_over_pi * (-delta * delta / (2.0 * r * r)).exp()
        };
        kernel * w(t_end - r * r)
    })
}

/// Tabulation of `s -> (P_s u0)(y)` on a uniform grid with linear interpolation.
struct SemigroupTable {
    t_end: f64,
    values: Vec<f64>,
}

impl SemigroupTable {
    fn build(u0: &InitialCondition, t_end: f64, y: f64, n: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(n);
        for m in 0..n {
            let s = t_end * m as f64 / (n - 1) as f64;
            values.push(heat_semigroup(u0, s, y)?);
        }
        Ok(Self { t_end, values })
    }

    fn at(&self, s: f64) -> f64 {
        let n = self.values.len();
        let pos = (s / self.t_end).clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos as usize).min(n - 2);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

const F1_NODES: usize = 801;
const F2_OUTER_NODES: usize = 301;
const F2_INNER_NODES: usize = 151;
const SEMIGROUP_TABLE_NODES: usize = 401;
const F3_SAMPLES: usize = 200_000;

/// Chaos kernel `f_n(t, x; x_1..x_n)` of the solution, symmetrized over the
/// evaluation points. Nested quadrature for `n <= 2`, Monte Carlo over the
/// time simplex for `n = 3`; `n > 3` is unsupported.
pub fn chaos_kernel_quadrature(
    n: usize,
    t: f64,
    x: f64,
    points: &[f64],
    u0: &InitialCondition,
) -> Result<f64> {
    if n == 0 || n > 3 {
        return Err(Error::Domain(format!("chaos kernel order {n} unsupported (1..=3)")));
    }
    if points.len() != n {
        return Err(Error::Domain(format!(
            "expected {n} evaluation points, got {}",
            points.len()
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain("chaos kernel needs t > 0".into()));
    }
    match n {
        1 => kernel_f1(t, x, points[0], u0),
        2 => {
            let a = kernel_f2(t, x, points[0], points[1], u0)?;
            let b = kernel_f2(t, x, points[1], points[0], u0)?;
            Ok(0.5 * (a + b))
        }
        _ => {
            let mut acc = 0.0;
            // symmetrize over the 6 orderings of the points
            let p = points;
            let perms = [
                [p[0], p[1], p[2]],
                [p[0], p[2], p[1]],
                [p[1], p[0], p[2]],
                [p[1], p[2], p[0]],
                [p[2], p[0], p[1]],
                [p[2], p[1], p[0]],
            ];
            for perm in &perms {
                acc += kernel_f3_mc(t, x, perm, u0)?;
            }
            Ok(acc / 6.0)
        }
    }
}

/// `f_1(t, x; x_1) = int_0^t p_{t-s}(x - x_1) (P_s u0)(x_1) ds`.
fn kernel_f1(t: f64, x: f64, x1: f64, u0: &InitialCondition) -> Result<f64> {
    let tab = SemigroupTable::build(u0, t, x1, SEMIGROUP_TABLE_NODES)?;
    Ok(heat_time_integral(t, x - x1, F1_NODES, |s| tab.at(s)))
}

/// Unsymmetrized `f_2` with the chain `x -> x_2 -> x_1 -> u0`:
/// `int_{0<=s_1<=s_2<=t} p_{t-s_2}(x-x_2) p_{s_2-s_1}(x_2-x_1) (P_{s_1} u0)(x_1)`.
fn kernel_f2(t: f64, x: f64, x1: f64, x2: f64, u0: &InitialCondition) -> Result<f64> {
    let tab = SemigroupTable::build(u0, t, x1, SEMIGROUP_TABLE_NODES)?;
    Ok(kernel_f2_with_table(t, x, x1, x2, &tab))
}

fn kernel_f2_with_table(t: f64, x: f64, x1: f64, x2: f64, tab: &SemigroupTable) -> f64 {
    heat_time_integral(t, x - x2, F2_OUTER_NODES, |s2| {
        heat_time_integral(s2, x2 - x1, F2_INNER_NODES, |s1| tab.at(s1))
    })
}

/// Symmetrized `f_2` on a grid of evaluation points, sharing the semigroup
/// tabulation per column. Entry `[i][j]` is `f_2(t, x; g_i, g_j)`.
pub fn chaos_kernel_grid2(
    t: f64,
    x: f64,
    grid_points: &[f64],
    u0: &InitialCondition,
) -> Result<Vec<Vec<f64>>> {
    let n = grid_points.len();
    let mut tabs = Vec::with_capacity(n);
    for &g in grid_points {
        tabs.push(SemigroupTable::build(u0, t, g, SEMIGROUP_TABLE_NODES)?);
    }
    let mut raw = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            // chain x -> g_j -> g_i -> u0
            raw[i][j] = kernel_f2_with_table(t, x, grid_points[i], grid_points[j], &tabs[i]);
        }
    }
    let mut sym = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            sym[i][j] = 0.5 * (raw[i][j] + raw[j][i]);
        }
    }
    Ok(sym)
}

/// MC estimate of unsymmetrized `f_3` over sorted uniform simplex times.
fn kernel_f3_mc(t: f64, x: f64, pts: &[f64; 3], u0: &InitialCondition) -> Result<f64> {
    let tab = SemigroupTable::build(u0, t, pts[0], SEMIGROUP_TABLE_NODES)?;
    let mut rng = stream(0x5eed_f3, StreamRole::Simplex, 0);
    let mut acc = 0.0;
    for _ in 0..F3_SAMPLES {
        let mut s = [
            rng.random::<f64>() * t,
            rng.random::<f64>() * t,
            rng.random::<f64>() * t,
        ];
        s.sort_by(f64::total_cmp);
        let v = heat_kernel(t - s[2], x - pts[2]).unwrap_or(0.0)
            * heat_kernel(s[2] - s[1], pts[2] - pts[1]).unwrap_or(0.0)
            * heat_kernel(s[1] - s[0], pts[1] - pts[0]).unwrap_or(0.0)
            * tab.at(s[0]);
        acc += v;
    }
    Ok(acc / F3_SAMPLES as f64 * t * t * t / 6.0)
}

/// Cameron-Martin coefficients of the truncated solution at `(t, x)`,
/// estimated by Monte Carlo over Brownian paths:
/// `x_alpha = E^B[u0(B_t^x) prod_j c_j^{alpha_j} / alpha_j!]`.
///
/// All coefficients share the same paths (common random numbers).
#[derive(Debug, Clone)]
pub struct KernelCoefficients {
    pub t: f64,
    pub x: f64,
    pub k: usize,
    pub degree: u32,
    pub n_paths: usize,
    pub expansion: ChaosExpansion,
    /// Standard error per multi-index, aligned with the expansion ordering.
    pub std_errors: Vec<(MultiIndex, f64)>,
}

impl KernelCoefficients {
    /// JSON sidecar with the run metadata and per-term standard errors.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "t": self.t,
            "x": self.x,
            "k": self.k,
            "degree": self.degree,
            "n_paths": self.n_paths,
            "std_errors": self.std_errors.iter()
                .map(|(a, se)| serde_json::json!({"alpha": a.to_string(), "std_error": se}))
                .collect::<Vec<_>>(),
        })
    }
}

pub fn chaos_coefficients_mc(
    t: f64,
    x: f64,
    k: usize,
    degree: u32,
    u0: &InitialCondition,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<KernelCoefficients> {
    if k == 0 {
        return Err(Error::Domain("chaos coefficients need K >= 1".into()));
    }
    if n_paths == 0 {
        return Err(Error::Domain("chaos coefficients need at least one path".into()));
    }
    let grid = TimeGrid::with_dt(t, dt)?;
    let indices = multi_indices(k, degree);
    let nidx = indices.len();

    let (sums, sumsqs) = chunked_reduce(
        n_paths,
        |range| {
            let mut sums = vec![0.0_f64; nidx];
            let mut sumsqs = vec![0.0_f64; nidx];
            for i in range {
                let path = sample_path(x, grid, &mut stream(seed, StreamRole::Path, i as u64));
                let coeffs = basis_time_integrals(&path, k);
                let u0_term = u0.eval(path.terminal());
                for (slot, alpha) in indices.iter().enumerate() {
                    let mut w = u0_term;
                    for (j, &a) in alpha.entries().iter().enumerate() {
                        for m in 1..=a {
                            w *= coeffs[j] / m as f64;
                        }
                    }
                    sums[slot] += w;
                    sumsqs[slot] += w * w;
                }
            }
            (sums, sumsqs)
        },
        (vec![0.0; nidx], vec![0.0; nidx]),
        |(mut sa, mut qa), (sb, qb)| {
            for (a, b) in sa.iter_mut().zip(&sb) {
                *a += b;
            }
            for (a, b) in qa.iter_mut().zip(&qb) {
                *a += b;
            }
            (sa, qa)
        },
    );

    let n = n_paths as f64;
    let mut expansion = ChaosExpansion::new();
    let mut std_errors = Vec::with_capacity(nidx);
    for (slot, alpha) in indices.into_iter().enumerate() {
        let mean = sums[slot] / n;
        let var = (sumsqs[slot] / n - mean * mean).max(0.0);
        expansion.insert(alpha.clone(), mean);
        std_errors.push((alpha, (var / n).sqrt()));
    }
    Ok(KernelCoefficients { t, x, k, degree, n_paths, expansion, std_errors })
}
