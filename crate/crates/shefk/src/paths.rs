//! Brownian path sampling and per-path functionals: basis time integrals
//! `c_j = int_0^t e_j(B_s) ds`, the occupation-time local-time histogram,
//! and the two estimators of `alpha_t = int L_a(t)^2 da`.

use crate::error::{Error, Result};
use crate::hermite::hermite_functions_upto;
use rand::Rng;
use rand_distr::StandardNormal;

/// Uniform discretization of `[0, t]` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::Domain("time horizon must be positive".into()));
        }
        if steps == 0 {
            return Err(Error::Domain("time grid needs at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    /// Grid with step size as close to `dt` as possible.
    pub fn with_dt(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Domain("dt must be positive".into()));
        }
        Self::new(horizon, (horizon / dt).round().max(1.0) as usize)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

/// A discretized Brownian trajectory; the sole source of `E^B` randomness.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    start: f64,
    grid: TimeGrid,
    values: Vec<f64>,
}

impl BrownianPath {
    /// Test fixture: the degenerate frozen path `B = start` (all increments zero).
    pub fn frozen(start: f64, grid: TimeGrid) -> Self {
        Self { start, grid, values: vec![start; grid.steps() + 1] }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Sample a Brownian path started at `x` with independent `N(0, dt)` increments.
pub fn sample_path(x: f64, grid: TimeGrid, rng: &mut impl Rng) -> BrownianPath {
    let sigma = grid.dt().sqrt();
    let mut values = Vec::with_capacity(grid.steps() + 1);
    let mut cur = x;
    values.push(cur);
    for _ in 0..grid.steps() {
        let z: f64 = rng.sample(StandardNormal);
        cur += sigma * z;
        values.push(cur);
    }
    BrownianPath { start: x, grid, values }
}

/// `c_j = int_0^t e_j(B_s) ds` for `j = 1..K`, composite trapezoid along the path.
pub fn basis_time_integrals(path: &BrownianPath, k: usize) -> Vec<f64> {
    let dt = path.grid.dt();
    let vals = &path.values;
    let last = vals.len() - 1;
    let mut coeffs = vec![0.0_f64; k];
    let mut basis = Vec::with_capacity(k);
    for (m, &b) in vals.iter().enumerate() {
        let w = if m == 0 || m == last { 0.5 } else { 1.0 };
        hermite_functions_upto(k, b, &mut basis);
        for j in 0..k {
            coeffs[j] += w * basis[j];
        }
    }
    for c in &mut coeffs {
        *c *= dt;
    }
    coeffs
}

/// Spatial bin width for the local-time histogram.
#[derive(Debug, Clone, Copy)]
pub struct BinSpec {
    pub width: f64,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self { width: 0.02 }
    }
}

/// Occupation-density histogram: `values[i]` estimates `L_a(t)` on the bin
/// `[lo + i w, lo + (i+1) w)`.
#[derive(Debug, Clone)]
pub struct LocalTimeHistogram {
    pub lo: f64,
    pub width: f64,
    pub values: Vec<f64>,
}

impl LocalTimeHistogram {
    /// Total occupation mass `sum L_i * width`; equals the horizon `t`.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.width
    }

    /// `int L^2 da` under the histogram, i.e. `sum L_i^2 * width`.
    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.width
    }

    /// `int L^2 da` with the self-pairing diagonal removed. The plug-in
    /// square of a count histogram contains, for each of the `t/dt` samples,
    /// the term where the sample pairs with itself; that contributes exactly
    /// `t * dt / width` of pure sampling noise rather than occupation mass,
    /// which matters at coarse dt. (U-statistic debiasing of `sum n_i^2`.)
    pub fn l2_pairs(&self, horizon: f64, dt: f64) -> f64 {
        self.l2() - horizon * dt / self.width
    }
}

/// Left-endpoint occupation histogram: sample `s_m`, `m = 0..M-1`, contributes
/// `dt` to the bin containing `B_{s_m}`. The window auto-fits the path range
/// padded by three bin widths.
pub fn local_time_histogram(path: &BrownianPath, bins: BinSpec) -> Result<LocalTimeHistogram> {
    if !(bins.width > 0.0) {
        return Err(Error::Domain("bin width must be positive".into()));
    }
    let w = bins.width;
    let vals = &path.values;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in vals {
        min = min.min(v);
        max = max.max(v);
    }
    let lo = (min / w).floor() * w - 3.0 * w;
    let hi = (max / w).ceil() * w + 3.0 * w;
    let n_bins = ((hi - lo) / w).ceil() as usize + 1;
    let dt = path.grid.dt();
    let mut values = vec![0.0_f64; n_bins];
    for &b in &vals[..vals.len() - 1] {
        let i = (((b - lo) / w) as usize).min(n_bins - 1);
        values[i] += dt / w;
    }
    Ok(LocalTimeHistogram { lo, width: w, values })
}

/// Both estimators of `alpha_t = int L_a(t)^2 da`:
/// the Parseval partial sum `sum_{j<=K} c_j^2` and the histogram `sum L^2 w`.
pub fn alpha(path: &BrownianPath, k: usize, bins: BinSpec) -> Result<(f64, f64)> {
    let coeffs = basis_time_integrals(path, k);
    let parseval = coeffs.iter().map(|c| c * c).sum();
    let hist = local_time_histogram(path, bins)?.l2();
    Ok((parseval, hist))
}

/// All per-path derived quantities.
#[derive(Debug, Clone)]
pub struct PathFunctionals {
    pub coeffs: Vec<f64>,
    pub local_time: LocalTimeHistogram,
    pub alpha_hist: f64,
    pub alpha_parseval: f64,
    pub terminal: f64,
}

pub fn path_functionals(path: &BrownianPath, k: usize, bins: BinSpec) -> Result<PathFunctionals> {
    let coeffs = basis_time_integrals(path, k);
    let alpha_parseval = coeffs.iter().map(|c| c * c).sum();
    let local_time = local_time_histogram(path, bins)?;
    let alpha_hist = local_time.l2();
    Ok(PathFunctionals {
        coeffs,
        local_time,
        alpha_hist,
        alpha_parseval,
        terminal: path.terminal(),
    })
}
