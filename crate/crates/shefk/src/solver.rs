//! Feynman-Kac Monte Carlo solvers for the truncated field `u^K` and its
//! local-time limit, the conditional Gaussian law of the exponent, moment
//! formulas, the S-transform mild-equation residual, and convergence
//! diagnostics in the truncation level `K`.

use crate::error::{Error, Result};
use crate::hermite::hermite_functions_upto;
use crate::kernels::{heat_semigroup, InitialCondition};
use crate::par::{chunked_reduce, MeanAcc};
use crate::paths::{
    basis_time_integrals, local_time_histogram, sample_path, BinSpec, BrownianPath, TimeGrid,
};
use crate::rng::{stream, StreamRole};
use rand::Rng;
use rand_distr::StandardNormal;

/// A Monte Carlo scalar result.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FieldEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

impl FieldEstimate {
    fn from_acc(acc: MeanAcc) -> Self {
        Self { value: acc.mean(), std_error: acc.std_error(), n: acc.n }
    }
}

/// Full configuration of a solver run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub t: f64,
    pub x: f64,
    pub k: usize,
    pub n_paths: usize,
    pub n_noise: usize,
    pub dt: f64,
    pub bins: BinSpec,
    pub degree: u32,
    pub seed: u64,
    pub u0: InitialCondition,
}

impl SolverConfig {
    pub fn new(t: f64, x: f64, k: usize) -> Self {
        Self {
            t,
            x,
            k,
            n_paths: 10_000,
            n_noise: 1000,
            dt: 1e-3,
            bins: BinSpec::default(),
            degree: 12,
            seed: 0,
            u0: InitialCondition::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0) {
            return Err(Error::Config("t must be nonnegative".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("K must be >= 1".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be >= 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::with_dt(self.t, self.dt)
    }
}

/// The exponent of the Feynman-Kac weight for one path and one noise draw.
#[derive(Debug, Clone, Copy)]
pub struct PsiSample {
    /// `sum_j z_j c_j - 1/2 sum_j c_j^2`
    pub psi_k: f64,
    /// same stochastic part, drift replaced by the histogram alpha estimate
    pub psi_limit: f64,
    /// conditional variance `sigma^2 = sum_j c_j^2`
    pub sigma2: f64,
}

/// Assemble the exponent(s) from per-path functionals and a noise draw.
pub fn psi_sample(coeffs: &[f64], alpha_hist: f64, z: &[f64]) -> PsiSample {
    debug_assert_eq!(coeffs.len(), z.len());
    let dot: f64 = coeffs.iter().zip(z).map(|(c, zj)| c * zj).sum();
    let sigma2: f64 = coeffs.iter().map(|c| c * c).sum();
    PsiSample { psi_k: dot - 0.5 * sigma2, psi_limit: dot - 0.5 * alpha_hist, sigma2 }
}

/// `u^K_{t,x}(z) = E^B[u0(B_t^x) exp(sum_j z_j c_j - 1/2 sum_j c_j^2)]`.
///
/// Paths are keyed by `(seed, Path, index)`, so repeated calls with different
/// `z` share the same paths (common random numbers).
pub fn solve_fk_truncated(cfg: &SolverConfig, z: &[f64]) -> Result<FieldEstimate> {
    fk_solve(cfg, z, false)
}

/// Limit form: the stochastic-integral part stays truncated at `K`, the drift
/// is upgraded to the histogram estimate of `1/2 int L_a(t)^2 da`.
pub fn solve_fk_limit(cfg: &SolverConfig, z: &[f64]) -> Result<FieldEstimate> {
    fk_solve(cfg, z, true)
}

fn fk_solve(cfg: &SolverConfig, z: &[f64], limit_drift: bool) -> Result<FieldEstimate> {
    cfg.validate()?;
    if z.len() != cfg.k {
        return Err(Error::Config(format!(
            "noise length {} does not match K = {}",
            z.len(),
            cfg.k
        )));
    }
    if cfg.t == 0.0 {
        return Ok(FieldEstimate { value: cfg.u0.eval(cfg.x), std_error: 0.0, n: 1 });
    }
    let grid = cfg.grid()?;
    let acc = chunked_reduce(
        cfg.n_paths,
        |range| {
            let mut acc = MeanAcc::default();
            for i in range {
                let path = sample_path(cfg.x, grid, &mut stream(cfg.seed, StreamRole::Path, i as u64));
                let coeffs = basis_time_integrals(&path, cfg.k);
                let alpha_hist = if limit_drift {
                    local_time_histogram(&path, cfg.bins).expect("valid bins").l2()
                } else {
                    0.0
                };
                let psi = psi_sample(&coeffs, alpha_hist, z);
                let e = if limit_drift { psi.psi_limit } else { psi.psi_k };
                acc.push(cfg.u0.eval(path.terminal()) * e.exp());
            }
            acc
        },
        MeanAcc::default(),
        MeanAcc::merge,
    );
    Ok(FieldEstimate::from_acc(acc))
}

/// Diagnostics of the conditional law `Psi^K | B ~ N(-sigma^2/2, sigma^2)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PsiLawReport {
    pub sigma2: f64,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub m: usize,
    /// z-scores against the exact conditional law
    pub mean_z: f64,
    pub var_z: f64,
    pub skew_z: f64,
    pub kurt_z: f64,
}

/// Sample `Psi^K` over `m` noise draws with the path held fixed and compare
/// the first four moments to the exact conditional Gaussian law.
pub fn psi_conditional_law_check(
    cfg: &SolverConfig,
    path: &BrownianPath,
    m: usize,
) -> Result<PsiLawReport> {
    if m < 2 {
        return Err(Error::Config("need at least 2 noise draws".into()));
    }
    let coeffs = basis_time_integrals(path, cfg.k);
    let sigma2: f64 = coeffs.iter().map(|c| c * c).sum();
    let samples = chunked_reduce(
        m,
        |range| {
            let mut out = Vec::with_capacity(range.len());
            for i in range {
                let mut rng = stream(cfg.seed, StreamRole::Noise, i as u64);
                let dot: f64 = coeffs
                    .iter()
                    .map(|c| c * rng.sample::<f64, _>(StandardNormal))
                    .sum();
                out.push(dot - 0.5 * sigma2);
            }
            out
        },
        Vec::new(),
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    let n = m as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for s in &samples {
        let d = s - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let sd = m2.sqrt();
    let skew = m3 / m2.powf(1.5);
    let kurt_excess = m4 / (m2 * m2) - 3.0;
    Ok(PsiLawReport {
        sigma2,
        sample_mean: mean,
        sample_var: m2,
        m,
        mean_z: (mean + 0.5 * sigma2) / (sd / n.sqrt()),
        var_z: (m2 - sigma2) / (sigma2 * (2.0 / n).sqrt()),
        skew_z: skew / (6.0 / n).sqrt(),
        kurt_z: kurt_excess / (24.0 / n).sqrt(),
    })
}

/// `q`-th moment by the intersection-local-time route:
/// `E^B[prod_i u0(B_t^{(i)}) exp(sum_{i<j} sum_{k<=K} c_k^{(i)} c_k^{(j)})]`
/// over `cfg.n_paths` independent `q`-tuples of paths.
pub fn moment_fk(q: u32, cfg: &SolverConfig) -> Result<FieldEstimate> {
    cfg.validate()?;
    if q < 2 {
        return Err(Error::Config("moment_fk needs q >= 2".into()));
    }
    let grid = cfg.grid()?;
    let q = q as usize;
    let acc = chunked_reduce(
        cfg.n_paths,
        |range| {
            let mut acc = MeanAcc::default();
            let mut tuple: Vec<Vec<f64>> = Vec::with_capacity(q);
            for i in range {
                tuple.clear();
                let mut u0_prod = 1.0;
                for l in 0..q {
                    let path = sample_path(
                        cfg.x,
                        grid,
                        &mut stream(cfg.seed, StreamRole::Moment, (i * q + l) as u64),
                    );
                    u0_prod *= cfg.u0.eval(path.terminal());
                    tuple.push(basis_time_integrals(&path, cfg.k));
                }
                let mut exponent = 0.0;
                for a in 0..q {
                    for b in a + 1..q {
                        exponent += tuple[a].iter().zip(&tuple[b]).map(|(x, y)| x * y).sum::<f64>();
                    }
                }
                acc.push(u0_prod * exponent.exp());
            }
            acc
        },
        MeanAcc::default(),
        MeanAcc::merge,
    );
    Ok(FieldEstimate::from_acc(acc))
}

/// Direct route to the `q`-th moment: average `solve`-style estimates over
/// independent noise draws.
#[derive(Debug, Clone)]
pub struct EmpiricalMoment {
    /// bias-corrected for q = 2, raw otherwise
    pub estimate: FieldEstimate,
    pub raw_value: f64,
    /// the subtracted nested-MC bias (within-noise variance / n_paths); 0 unless q = 2
    pub bias_correction: f64,
}

pub fn empirical_moment(q: u32, cfg: &SolverConfig) -> Result<EmpiricalMoment> {
    cfg.validate()?;
    if cfg.n_noise < 100 {
        return Err(Error::Config("empirical_moment needs n_noise >= 100".into()));
    }
    let grid = cfg.grid()?;
    let acc = chunked_reduce(
        cfg.n_noise,
        |range| {
            let mut corrected = MeanAcc::default();
            let mut raw = MeanAcc::default();
            for i in range {
                let mut zrng = stream(cfg.seed, StreamRole::Noise, i as u64);
                let z: Vec<f64> =
                    (0..cfg.k).map(|_| zrng.sample(StandardNormal)).collect();
                let mut inner = MeanAcc::default();
                for p in 0..cfg.n_paths {
                    let path = sample_path(
                        cfg.x,
                        grid,
                        &mut stream(cfg.seed, StreamRole::Path, (i * cfg.n_paths + p) as u64),
                    );
                    let coeffs = basis_time_integrals(&path, cfg.k);
                    let psi = psi_sample(&coeffs, 0.0, &z);
                    inner.push(cfg.u0.eval(path.terminal()) * psi.psi_k.exp());
                }
                let u_hat = inner.mean();
                let powered = u_hat.powi(q as i32);
                raw.push(powered);
                if q == 2 {
                    // subtract the O(1/n_paths) nested-MC bias of u_hat^2
                    corrected.push(powered - inner.variance() / cfg.n_paths as f64);
                } else {
                    corrected.push(powered);
                }
            }
            (corrected, raw)
        },
        (MeanAcc::default(), MeanAcc::default()),
        |(c1, r1), (c2, r2)| (c1.merge(c2), r1.merge(r2)),
    );
    let (corrected, raw) = acc;
    Ok(EmpiricalMoment {
        estimate: FieldEstimate::from_acc(corrected),
        raw_value: raw.mean(),
        bias_correction: raw.mean() - corrected.mean(),
    })
}

/// Unbiased estimate of the mean field `E^W[u^K] = (P_t u0)(x)`: one fresh
/// noise draw and one fresh path per sample.
pub fn mean_field_estimate(cfg: &SolverConfig, n_samples: usize) -> Result<FieldEstimate> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let acc = chunked_reduce(
        n_samples,
        |range| {
            let mut acc = MeanAcc::default();
            for i in range {
                let path =
                    sample_path(cfg.x, grid, &mut stream(cfg.seed, StreamRole::Path, i as u64));
                let coeffs = basis_time_integrals(&path, cfg.k);
                let mut zrng = stream(cfg.seed, StreamRole::Noise, i as u64);
                let dot: f64 = coeffs
                    .iter()
                    .map(|c| c * zrng.sample::<f64, _>(StandardNormal))
                    .sum();
                let sigma2: f64 = coeffs.iter().map(|c| c * c).sum();
                acc.push(cfg.u0.eval(path.terminal()) * (dot - 0.5 * sigma2).exp());
            }
            acc
        },
        MeanAcc::default(),
        MeanAcc::merge,
    );
    Ok(FieldEstimate::from_acc(acc))
}

/// One truncation level of a nested convergence study.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceRow {
    pub k: usize,
    /// `u^K(z_i)` for the shared noise draws (prefix-nested in K)
    pub estimates: Vec<f64>,
    pub mean_over_noise: f64,
    pub se_over_noise: f64,
    /// median over noise draws of `|u^K - u^{K_prev}|`
    pub median_gap: Option<f64>,
}

/// Estimates `u^K` along `k_list` with shared Brownian paths and prefix-nested
/// noise (the K'-level noise is the prefix of the K-level noise).
pub fn convergence_study(
    cfg: &SolverConfig,
    k_list: &[usize],
    n_noise: usize,
) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    if k_list.is_empty() {
        return Err(Error::Config("k_list must not be empty".into()));
    }
    if k_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("k_list must be nondecreasing".into()));
    }
    let k_max = *k_list.last().unwrap();
    let grid = cfg.grid()?;
    // per-path basis integrals at k_max, plus u0(terminal)
    let paths: Vec<(Vec<f64>, f64)> = chunked_reduce(
        cfg.n_paths,
        |range| {
            range
                .map(|i| {
                    let path = sample_path(
                        cfg.x,
                        grid,
                        &mut stream(cfg.seed, StreamRole::Path, i as u64),
                    );
                    (basis_time_integrals(&path, k_max), cfg.u0.eval(path.terminal()))
                })
                .collect::<Vec<_>>()
        },
        Vec::new(),
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    let noises: Vec<Vec<f64>> = (0..n_noise)
        .map(|i| {
            let mut rng = stream(cfg.seed, StreamRole::Noise, i as u64);
            (0..k_max).map(|_| rng.sample(StandardNormal)).collect()
        })
        .collect();

    // estimates[ki][zi]
    let mut estimates = vec![vec![0.0_f64; n_noise]; k_list.len()];
    for (zi, z) in noises.iter().enumerate() {
        for (coeffs, u0t) in &paths {
            let mut dot = 0.0;
            let mut sig2 = 0.0;
            let mut j = 0;
            for (ki, &k) in k_list.iter().enumerate() {
                while j < k {
                    dot += z[j] * coeffs[j];
                    sig2 += coeffs[j] * coeffs[j];
                    j += 1;
                }
                estimates[ki][zi] += u0t * (dot - 0.5 * sig2).exp();
            }
        }
    }
    let np = cfg.n_paths as f64;
    for row in &mut estimates {
        for v in row.iter_mut() {
            *v /= np;
        }
    }

    let mut rows = Vec::with_capacity(k_list.len());
    for (ki, &k) in k_list.iter().enumerate() {
        let ests = estimates[ki].clone();
        let mean = ests.iter().sum::<f64>() / n_noise as f64;
        let var = ests.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_noise as f64;
        let median_gap = if ki > 0 {
            let mut gaps: Vec<f64> = ests
                .iter()
                .zip(&estimates[ki - 1])
                .map(|(a, b)| (a - b).abs())
                .collect();
            gaps.sort_by(f64::total_cmp);
            Some(gaps[n_noise / 2])
        } else {
            None
        };
        rows.push(ConvergenceRow {
            k,
            estimates: ests,
            mean_over_noise: mean,
            se_over_noise: (var / n_noise as f64).sqrt(),
            median_gap,
        });
    }
    Ok(rows)
}

/// `S_{t,x}(xi) = E^B[u0(B_t^x) exp(int_0^t V(B_s) ds)]`,
/// `V = sum_j xi_j e_j`, by Monte Carlo. `stream_index` keys the path stream.
pub fn s_transform_point(
    xi: &[f64],
    u0: &InitialCondition,
    t: f64,
    x: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
    stream_index: u64,
) -> Result<FieldEstimate> {
    if t == 0.0 {
        return Ok(FieldEstimate { value: u0.eval(x), std_error: 0.0, n: 1 });
    }
    let grid = TimeGrid::with_dt(t, dt)?;
    let k = xi.len();
    let steps = grid.steps();
    let sigma = grid.dt().sqrt();
    let potential = |basis: &mut Vec<f64>, y: f64| -> f64 {
        hermite_functions_upto(k, y, basis);
        basis.iter().zip(xi).map(|(e, c)| e * c).sum()
    };
    let acc = chunked_reduce(
        n_paths,
        |range| {
            let mut acc = MeanAcc::default();
            let mut basis = Vec::with_capacity(k);
            for p in range {
                let mut rng = stream(
                    seed,
                    StreamRole::STransform,
                    stream_index * n_paths as u64 + p as u64,
                );
                let mut cur = x;
                let mut vint = 0.5 * potential(&mut basis, cur);
                for m in 0..steps {
                    let g: f64 = rng.sample(StandardNormal);
                    cur += sigma * g;
                    let w = if m == steps - 1 { 0.5 } else { 1.0 };
                    vint += w * potential(&mut basis, cur);
                }
                vint *= grid.dt();
                acc.push(u0.eval(cur) * vint.exp());
            }
            acc
        },
        MeanAcc::default(),
        MeanAcc::merge,
    );
    Ok(FieldEstimate::from_acc(acc))
}

/// Per-node entry of the S-transform residual report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SResidualNode {
    pub t: f64,
    pub x: f64,
    pub s_value: f64,
    pub residual: f64,
    /// exact combined standard error of the residual (MC, independent nodes)
    pub se: f64,
    /// quadrature error estimate from grid coarsening
    pub quad_est: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SResidualReport {
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    pub mean_budget: f64,
    pub max_budget: f64,
    pub nodes: Vec<SResidualNode>,
}

/// Evaluate the S-transform on a space-time grid by MC and check the mild
/// equation
/// `S_{t,x} = (P_t u0)(x) + int_0^t int p_{t-s}(x-y) S_{s,y} V(y) dy ds`
/// by quadrature. The per-node budget is `3 * SE + quadrature estimate`.
pub fn s_transform_residual(
    xi: &[f64],
    cfg: &SolverConfig,
    nt: usize,
    nx: usize,
    x_half: f64,
) -> Result<SResidualReport> {
    cfg.validate()?;
    if nt < 2 || nx < 3 {
        return Err(Error::Config("s-transform grid too coarse".into()));
    }
    let t = cfg.t;
    let ds = t / nt as f64;
    let hx = 2.0 * x_half / (nx - 1) as f64;
    let ys: Vec<f64> = (0..nx).map(|m| -x_half + m as f64 * hx).collect();
    let kxi = xi.len();
    let mut basis = Vec::with_capacity(kxi);
    let mut potential = |y: f64| -> f64 {
        hermite_functions_upto(kxi, y, &mut basis);
        basis.iter().zip(xi).map(|(e, c)| e * c).sum()
    };
    let v_at: Vec<f64> = ys.iter().map(|&y| potential(y)).collect();

    // S and SE on the (nt+1) x nx grid; row 0 is t = 0 (exact)
    let mut s_val = vec![vec![0.0_f64; nx]; nt + 1];
    let mut s_se = vec![vec![0.0_f64; nx]; nt + 1];
    for (m, &y) in ys.iter().enumerate() {
        s_val[0][m] = cfg.u0.eval(y);
    }
    for j in 1..=nt {
        for m in 0..nx {
            let est = s_transform_point(
                xi,
                &cfg.u0,
                j as f64 * ds,
                ys[m],
                cfg.n_paths,
                cfg.dt,
                cfg.seed,
                (j * nx + m) as u64,
            )?;
            s_val[j][m] = est.value;
            s_se[j][m] = est.std_error;
        }
    }

    // Duhamel term D at node (i, l), with coefficient tracking for the SE
    // and a coarsened re-evaluation for the quadrature estimate.
    let duhamel = |i: usize, l: usize, stride: usize, fine_sub: usize| -> (f64, Vec<Vec<f64>>) {
        let ti = i as f64 * ds;
        let xl = ys[l];
        let mut coef = vec![vec![0.0_f64; nx]; nt + 1];
        // trapezoid in s over nodes j = 0, stride, 2*stride, ..., i
        let s_nodes: Vec<usize> = (0..=i).step_by(stride).collect();
        debug_assert_eq!(*s_nodes.last().unwrap(), i);
        let dsj = stride as f64 * ds;
        for (pos, &j) in s_nodes.iter().enumerate() {
            let tw = if pos == 0 || pos == s_nodes.len() - 1 { 0.5 } else { 1.0 } * dsj;
            if j == i {
                // p_{t_i - s} -> delta as s -> t_i
                coef[j][l] += tw * v_at[l];
                continue;
            }
            let tau = ti - j as f64 * ds;
            // fine spatial trapezoid; S(s_j, .) interpolated linearly
            let nfine = (nx - 1) * fine_sub;
            let hf = 2.0 * x_half / nfine as f64;
            for q in 0..=nfine {
                let y = -x_half + q as f64 * hf;
                let w = if q == 0 || q == nfine { 0.5 } else { 1.0 } * hf;
                let p = (2.0 * std::f64::consts::PI * tau).sqrt().recip()
                    * (-(xl - y) * (xl - y) / (2.0 * tau)).exp();
                // V at the fine node (exact), S interpolated
                let vv = {
                    let mut b = Vec::with_capacity(kxi);
                    hermite_functions_upto(kxi, y, &mut b);
                    b.iter().zip(xi).map(|(e, c)| e * c).sum::<f64>()
                };
                let pos_f = (y + x_half) / hx;
                let mcell = (pos_f as usize).min(nx - 2);
                let frac = pos_f - mcell as f64;
                let wgt = tw * w * p * vv;
                coef[j][mcell] += wgt * (1.0 - frac);
                coef[j][mcell + 1] += wgt * frac;
            }
        }
        let mut d = 0.0;
        for j in 0..=nt {
            for m in 0..nx {
                d += coef[j][m] * s_val[j][m];
            }
        }
        (d, coef)
    };

    let mut nodes = Vec::new();
    for i in 1..=nt {
        let ti = i as f64 * ds;
        for l in 0..nx {
            let (d, coef) = duhamel(i, l, 1, 8);
            let residual = s_val[i][l] - heat_semigroup(&cfg.u0, ti, ys[l])? - d;
            // exact SE: node MCs are independent; the (i, l) node enters with
            // coefficient (1 - its own Duhamel weight)
            let mut var = 0.0;
            for j in 1..=nt {
                for m in 0..nx {
                    let c = if (j, m) == (i, l) { 1.0 - coef[j][m] } else { -coef[j][m] };
                    var += (c * s_se[j][m]).powi(2);
                }
            }
            // quadrature estimate: coarsen time (if possible) and space
            let stride_c = if i % 2 == 0 && i >= 2 { 2 } else { 1 };
            let (d_coarse, _) = duhamel(i, l, stride_c, 4);
            let quad_est = (d - d_coarse).abs();
            nodes.push(SResidualNode {
                t: ti,
                x: ys[l],
                s_value: s_val[i][l],
                residual,
                se: var.sqrt(),
                quad_est,
            });
        }
    }
    let max_abs = nodes.iter().map(|n| n.residual.abs()).fold(0.0, f64::max);
    let mean_abs = nodes.iter().map(|n| n.residual.abs()).sum::<f64>() / nodes.len() as f64;
    let budgets: Vec<f64> = nodes.iter().map(|n| 3.0 * n.se + n.quad_est).collect();
    Ok(SResidualReport {
        max_abs_residual: max_abs,
        mean_abs_residual: mean_abs,
        mean_budget: budgets.iter().sum::<f64>() / budgets.len() as f64,
        max_budget: budgets.iter().fold(0.0_f64, |a, &b| a.max(b)),
        nodes,
    })
}
