//! Deterministic cross-check for small K: an explicit finite-difference
//! scheme for the reduced equation
//! `d_t v = 1/2 d_xx v - sum_j e_j(x) d_{z_j} v`, datum
//! `u0(x) exp(-1/2 sum z_j^2)`, checked against the Feynman-Kac form
//! `v(t,x,z) = E^B[u0(B_t^x) exp(-1/2 sum_j (z_j - c_j)^2)]`
//! and against the stochastic solver via `u = v exp(+1/2 sum z_j^2)`.

use crate::error::{Error, Result};
use crate::hermite::hermite_functions_upto;
use crate::kernels::InitialCondition;
use crate::par::{chunked_reduce, MeanAcc};
use crate::paths::{basis_time_integrals, sample_path, TimeGrid};
use crate::rng::{stream, StreamRole};
use crate::solver::FieldEstimate;
use std::io::Write;

/// Discretization box and steps for the reduced equation. K is capped at 2:
/// the grid cost grows like `nx * nz^K` per time step.
#[derive(Debug, Clone, Copy)]
pub struct PdeGrid {
    pub x_half: f64,
    pub z_half: f64,
    pub hx: f64,
    pub hz: f64,
    pub dt: f64,
    pub k: usize,
}

impl PdeGrid {
    pub fn new(x_half: f64, z_half: f64, hx: f64, hz: f64, dt: f64, k: usize) -> Result<Self> {
        let grid = Self { x_half, z_half, hx, hz, dt, k };
        grid.validate()?;
        Ok(grid)
    }

    /// Default box sized so the Gaussian z-datum is below 1e-8 at the boundary.
    pub fn standard(k: usize, h: f64, safety: f64) -> Result<Self> {
        let tmp = Self { x_half: 6.0, z_half: 6.5, hx: h, hz: h, dt: 1.0, k };
        let dt = safety * tmp.stability_bound();
        Self::new(6.0, 6.5, h, h, dt, k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > 2 {
            return Err(Error::Config("PDE grid supports K in {1, 2}".into()));
        }
        if !(self.x_half > 0.0 && self.z_half > 0.0 && self.hx > 0.0 && self.hz > 0.0) {
            return Err(Error::Config("PDE box and steps must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("PDE time step must be positive".into()));
        }
        let bound = 0.9 * self.stability_bound();
        if self.dt > bound {
            return Err(Error::Config(format!(
                "explicit scheme unstable: dt {} exceeds 0.9 * min(hx^2, hz / sup|e|) = {}",
                self.dt, bound
            )));
        }
        Ok(())
    }

    /// `min(hx^2, hz / max_j sup|e_j|)` for the explicit scheme.
    pub fn stability_bound(&self) -> f64 {
        (self.hx * self.hx).min(self.hz / basis_sup(self.k))
    }

    /// Halve the spatial steps and quarter the time step.
    pub fn refined(&self) -> Self {
        Self { hx: 0.5 * self.hx, hz: 0.5 * self.hz, dt: 0.25 * self.dt, ..*self }
    }

    pub fn nx(&self) -> usize {
        (2.0 * self.x_half / self.hx).round() as usize + 1
    }

    pub fn nz(&self) -> usize {
        (2.0 * self.z_half / self.hz).round() as usize + 1
    }

    pub fn x_at(&self, i: usize) -> f64 {
        -self.x_half + i as f64 * self.hx
    }

    pub fn z_at(&self, i: usize) -> f64 {
        -self.z_half + i as f64 * self.hz
    }

    pub fn x_index_near(&self, x: f64) -> usize {
        (((x + self.x_half) / self.hx).round().max(0.0) as usize).min(self.nx() - 1)
    }

    pub fn z_index_near(&self, z: f64) -> usize {
        (((z + self.z_half) / self.hz).round().max(0.0) as usize).min(self.nz() - 1)
    }
}

/// `max_j sup |e_j|` over `j = 1..K`, by a scan.
fn basis_sup(k: usize) -> f64 {
    let mut sup: f64 = 0.0;
    let mut basis = Vec::with_capacity(k);
    let n = 4001;
    for i in 0..n {
        let x = -10.0 + 20.0 * i as f64 / (n - 1) as f64;
        hermite_functions_upto(k, x, &mut basis);
        for b in &basis {
            sup = sup.max(b.abs());
        }
    }
    sup
}

/// The reduced field on its grid at the final time.
#[derive(Debug, Clone)]
pub struct PdeField {
    grid: PdeGrid,
    v: Vec<f64>,
}

impl PdeField {
    pub fn grid(&self) -> PdeGrid {
        self.grid
    }

    fn idx(&self, ix: usize, iz: &[usize]) -> usize {
        debug_assert_eq!(iz.len(), self.grid.k);
        let nz = self.grid.nz();
        let mut out = ix;
        for &j in iz {
            out = out * nz + j;
        }
        out
    }

    pub fn v_at(&self, ix: usize, iz: &[usize]) -> f64 {
        self.v[self.idx(ix, iz)]
    }

    /// `u = v exp(+1/2 sum z_j^2)`.
    pub fn u_at(&self, ix: usize, iz: &[usize]) -> f64 {
        let z2: f64 = iz.iter().map(|&j| self.grid.z_at(j).powi(2)).sum();
        self.v_at(ix, iz) * (0.5 * z2).exp()
    }

    pub fn v_max(&self) -> f64 {
        self.v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    pub fn v_min(&self) -> f64 {
        self.v.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Rows `x, z1[, z2], v, u`.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        match self.grid.k {
            1 => writeln!(w, "x,z1,v,u")?,
            _ => writeln!(w, "x,z1,z2,v,u")?,
        }
        let nz = self.grid.nz();
        for ix in 0..self.grid.nx() {
            if self.grid.k == 1 {
                for j in 0..nz {
                    writeln!(
                        w,
                        "{},{},{:.12e},{:.12e}",
                        self.grid.x_at(ix),
                        self.grid.z_at(j),
                        self.v_at(ix, &[j]),
                        self.u_at(ix, &[j])
                    )?;
                }
            } else {
                for j1 in 0..nz {
                    for j2 in 0..nz {
                        writeln!(
                            w,
                            "{},{},{},{:.12e},{:.12e}",
                            self.grid.x_at(ix),
                            self.grid.z_at(j1),
                            self.grid.z_at(j2),
                            self.v_at(ix, &[j1, j2]),
                            self.u_at(ix, &[j1, j2])
                        )?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Explicit step scheme: centered second difference in x, first-order upwind
/// in each z_j. Dirichlet zero beyond the z faces (the datum is Gaussian in
/// z); reflecting (zero-gradient) at the x faces, since `u0` need not decay.
pub fn solve_reduced_pde(u0: &InitialCondition, grid: &PdeGrid, t: f64) -> Result<PdeField> {
    step_scheme(u0, grid, t, true)
}

/// Same scheme with the advection terms dropped: a pure heat equation control
/// whose exact solution is `u = (P_t u0)(x)` for every z.
pub fn solve_reduced_pde_control(
    u0: &InitialCondition,
    grid: &PdeGrid,
    t: f64,
) -> Result<PdeField> {
    step_scheme(u0, grid, t, false)
}

fn step_scheme(
    u0: &InitialCondition,
    grid: &PdeGrid,
    t: f64,
    with_potential: bool,
) -> Result<PdeField> {
    grid.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Config("t must be nonnegative".into()));
    }
    let (nx, nz, k) = (grid.nx(), grid.nz(), grid.k);
    let size = nx * nz.pow(k as u32);
    let mut v = vec![0.0_f64; size];
    {
        let mut fill = |ix: usize, iz: &[usize]| {
            let z2: f64 = iz.iter().map(|&j| grid.z_at(j).powi(2)).sum();
            let idx = {
                let mut out = ix;
                for &j in iz {
                    out = out * nz + j;
                }
                out
            };
            v[idx] = u0.eval(grid.x_at(ix)) * (-0.5 * z2).exp();
        };
        for ix in 0..nx {
            if k == 1 {
                for j in 0..nz {
                    fill(ix, &[j]);
                }
            } else {
                for j1 in 0..nz {
                    for j2 in 0..nz {
                        fill(ix, &[j1, j2]);
                    }
                }
            }
        }
    }
    if t == 0.0 {
        return Ok(PdeField { grid: *grid, v });
    }

    let n_steps = (t / grid.dt).ceil().max(1.0) as usize;
    let dt = t / n_steps as f64;
    let inv_hx2 = 1.0 / (grid.hx * grid.hx);
    let inv_hz = 1.0 / grid.hz;
    let mut e_at: Vec<Vec<f64>> = Vec::with_capacity(nx);
    let mut basis = Vec::with_capacity(k);
    for ix in 0..nx {
        hermite_functions_upto(k, grid.x_at(ix), &mut basis);
        e_at.push(if with_potential { basis.clone() } else { vec![0.0; k] });
    }

    let mut next = vec![0.0_f64; size];
    let zcount = nz.pow(k as u32);
    for _ in 0..n_steps {
        for ix in 0..nx {
            let row = ix * zcount;
            let row_up = if ix + 1 < nx { ix + 1 } else { ix - 1 } * zcount;
            let row_dn = if ix > 0 { ix - 1 } else { ix + 1 } * zcount;
            let e = &e_at[ix];
            for f in 0..zcount {
                let c = v[row + f];
                let lap = 0.5 * inv_hx2 * (v[row_up + f] - 2.0 * c + v[row_dn + f]);
                let mut adv = 0.0;
                let mut stridez = zcount / nz;
                let mut rem = f;
                for a in e.iter().take(k) {
                    let j = rem / stridez;
                    rem %= stridez;
                    // advection velocity a = e_j(x): backward difference for
                    // a > 0, forward for a < 0, zero ghost past the z faces
                    let d = if *a >= 0.0 {
                        let prev = if j > 0 { v[row + f - stridez] } else { 0.0 };
                        (c - prev) * inv_hz
                    } else {
                        let nextv = if j + 1 < nz { v[row + f + stridez] } else { 0.0 };
                        (nextv - c) * inv_hz
                    };
                    adv += a * d;
                    stridez = (stridez / nz).max(1);
                }
                next[row + f] = c + dt * (lap - adv);
            }
        }
        std::mem::swap(&mut v, &mut next);
    }
    Ok(PdeField { grid: *grid, v })
}

/// MC estimate of the reduced field at a point: `v` and the derived `u`.
#[derive(Debug, Clone, Copy)]
pub struct FkPdePoint {
    pub v: FieldEstimate,
    pub u: FieldEstimate,
}

/// `v(t,x,z) = E^B[u0(B_t^x) exp(-1/2 sum_j (z_j - c_j)^2)]`.
///
/// Paths use the same `(seed, Path, index)` keying as the stochastic solver,
/// so the two routes share paths exactly.
pub fn fk_pde_point(
    t: f64,
    x: f64,
    z: &[f64],
    u0: &InitialCondition,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<FkPdePoint> {
    if z.is_empty() || z.len() > 2 {
        return Err(Error::Config("fk_pde_point supports K in {1, 2}".into()));
    }
    if t == 0.0 {
        let z2: f64 = z.iter().map(|zj| zj * zj).sum();
        let v = FieldEstimate { value: u0.eval(x) * (-0.5 * z2).exp(), std_error: 0.0, n: 1 };
        let u = FieldEstimate { value: u0.eval(x), std_error: 0.0, n: 1 };
        return Ok(FkPdePoint { v, u });
    }
    let grid = TimeGrid::with_dt(t, dt)?;
    let k = z.len();
    let acc = chunked_reduce(
        n_paths,
        |range| {
            let mut acc = MeanAcc::default();
            for i in range {
                let path = sample_path(x, grid, &mut stream(seed, StreamRole::Path, i as u64));
                let coeffs = basis_time_integrals(&path, k);
                let ex: f64 = coeffs.iter().zip(z).map(|(c, zj)| (zj - c) * (zj - c)).sum();
                acc.push(u0.eval(path.terminal()) * (-0.5 * ex).exp());
            }
            acc
        },
        MeanAcc::default(),
        MeanAcc::merge,
    );
    let z2: f64 = z.iter().map(|zj| zj * zj).sum();
    let scale = (0.5 * z2).exp();
    let v = FieldEstimate { value: acc.mean(), std_error: acc.std_error(), n: acc.n };
    let u = FieldEstimate { value: v.value * scale, std_error: v.std_error * scale, n: v.n };
    Ok(FkPdePoint { v, u })
}

/// One probe of the PDE-vs-FK consistency chain.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeComparison {
    pub x: f64,
    pub z: f64,
    pub u_pde: f64,
    pub u_fk: f64,
    pub fk_se: f64,
    pub rel_gap: f64,
}

/// Compare `u` from the scheme against `fk_pde_point` on the probe product
/// set `xs x zs` (K = 1).
pub fn pde_vs_fk_probes(
    u0: &InitialCondition,
    grid: &PdeGrid,
    t: f64,
    xs: &[f64],
    zs: &[f64],
    n_paths: usize,
    mc_dt: f64,
    seed: u64,
) -> Result<Vec<ProbeComparison>> {
    if grid.k != 1 {
        return Err(Error::Config("probe comparison is defined for K = 1".into()));
    }
    let field = solve_reduced_pde(u0, grid, t)?;
    let mut out = Vec::with_capacity(xs.len() * zs.len());
    for &x in xs {
        let ix = grid.x_index_near(x);
        for &z in zs {
            let iz = grid.z_index_near(z);
            let (xg, zg) = (grid.x_at(ix), grid.z_at(iz));
            let u_pde = field.u_at(ix, &[iz]);
            let fk = fk_pde_point(t, xg, &[zg], u0, n_paths, mc_dt, seed)?;
            let scale = u_pde.abs().max(fk.u.value.abs()).max(1e-12);
            out.push(ProbeComparison {
                x: xg,
                z: zg,
                u_pde,
                u_fk: fk.u.value,
                fk_se: fk.u.std_error,
                rel_gap: (u_pde - fk.u.value).abs() / scale,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat_semigroup;
    use crate::solver::{solve_fk_truncated, SolverConfig};

    #[test]
    fn grid_validation() {
        assert!(PdeGrid::new(6.0, 6.5, 0.1, 0.1, 0.5, 1).is_err());
        assert!(PdeGrid::new(6.0, 6.5, 0.1, 0.1, 1e-3, 3).is_err());
        assert!(PdeGrid::new(6.0, 6.5, 0.1, 0.1, -1.0, 1).is_err());
        let g = PdeGrid::standard(1, 0.1, 0.9).unwrap();
        assert!(g.dt <= 0.9 * g.stability_bound() + 1e-15);
        let r = g.refined();
        assert!(r.validate().is_ok());
        assert_eq!(r.nx(), 2 * g.nx() - 1);
    }

    #[test]
    fn t_zero_is_exact_datum() {
        let grid = PdeGrid::standard(1, 0.25, 0.9).unwrap();
        let u0 = InitialCondition::gauss_bump();
        let f = solve_reduced_pde(&u0, &grid, 0.0).unwrap();
        let ix = grid.x_index_near(0.5);
        let iz = grid.z_index_near(1.0);
        let expect = (-0.25_f64).exp();
        assert!((f.u_at(ix, &[iz]) - expect).abs() < 1e-12);
    }

    #[test]
    fn pure_heat_control_matches_semigroup() {
        let grid = PdeGrid::standard(1, 0.05, 0.9).unwrap();
        let t = 0.3;
        let u0 = InitialCondition::gauss_bump();
        let f = solve_reduced_pde_control(&u0, &grid, t).unwrap();
        for &x in &[-1.0, 0.0, 1.0] {
            let expect = heat_semigroup(&u0, t, x).unwrap();
            for &z in &[-1.0, 0.0, 1.0] {
                let got = f.u_at(grid.x_index_near(x), &[grid.z_index_near(z)]);
                assert!(
                    (got - expect).abs() < 5e-3,
                    "x {x} z {z}: {got} vs {expect}"
                );
            }
        }
        let one = InitialCondition::one();
        let g = solve_reduced_pde_control(&one, &grid, t).unwrap();
        let got = g.u_at(grid.x_index_near(0.0), &[grid.z_index_near(0.5)]);
        assert!((got - 1.0).abs() < 5e-3, "{got}");
    }

    #[test]
    fn v_bounded_by_sup_u0() {
        let grid = PdeGrid::standard(1, 0.1, 0.9).unwrap();
        let u0 = InitialCondition::one();
        let f = solve_reduced_pde(&u0, &grid, 0.5).unwrap();
        assert!(f.v_max() <= 1.0 + 1e-9, "{}", f.v_max());
        assert!(f.v_min() >= -1e-9, "{}", f.v_min());
    }

    #[test]
    fn k2_runs_and_stays_bounded() {
        let grid = PdeGrid::new(5.0, 5.0, 0.2, 0.2, 0.9 * 0.04, 2).unwrap();
        let u0 = InitialCondition::one();
        let f = solve_reduced_pde(&u0, &grid, 0.25).unwrap();
        assert!(f.v_max() <= 1.0 + 1e-9);
        assert!(f.v_at(grid.x_index_near(0.0), &[grid.z_index_near(0.0); 2]) > 0.0);
    }

    #[test]
    fn fk_pde_point_trivia() {
        let zero = InitialCondition::custom("zero", 0.0, |_| 0.0);
        let p = fk_pde_point(0.5, 0.0, &[0.3], &zero, 100, 2e-3, 1).unwrap();
        assert_eq!(p.v.value, 0.0);
        let one = InitialCondition::one();
        let q = fk_pde_point(0.5, 0.0, &[1.2, -0.4], &one, 500, 2e-3, 1).unwrap();
        assert!(q.v.value <= 1.0 && q.v.value > 0.0);
        assert!(fk_pde_point(0.5, 0.0, &[0.0; 3], &one, 10, 2e-3, 1).is_err());
    }

    #[test]
    fn z_zero_estimator_identity_with_shared_paths() {
        let mut cfg = SolverConfig::new(0.5, 0.0, 1);
        cfg.n_paths = 400;
        cfg.dt = 2e-3;
        cfg.seed = 23;
        let a = solve_fk_truncated(&cfg, &[0.0]).unwrap();
        let b = fk_pde_point(0.5, 0.0, &[0.0], &cfg.u0, 400, 2e-3, 23).unwrap();
        assert_eq!(a.value.to_bits(), b.u.value.to_bits());
    }

    #[test]
    fn substitution_identity_nonzero_noise() {
        let mut cfg = SolverConfig::new(0.5, 0.2, 2);
        cfg.n_paths = 300;
        cfg.dt = 2e-3;
        cfg.seed = 31;
        let z = [0.8, -1.1];
        let a = solve_fk_truncated(&cfg, &z).unwrap();
        let b = fk_pde_point(0.5, 0.2, &z, &cfg.u0, 300, 2e-3, 31).unwrap();
        assert!(
            (a.value - b.u.value).abs() < 1e-10 * a.value.abs().max(1.0),
            "{} vs {}",
            a.value,
            b.u.value
        );
    }

    #[test]
    fn consistency_chain_small_probe_set() {
        let grid = PdeGrid::standard(1, 0.05, 0.9).unwrap();
        let probes =
            pde_vs_fk_probes(&InitialCondition::one(), &grid, 0.5, &[-1.0, 0.0, 1.0], &[-1.0, 0.0, 1.0], 4000, 2e-3, 7)
                .unwrap();
        let ok = probes
            .iter()
            .filter(|p| (p.u_pde - p.u_fk).abs() <= 0.02 * p.u_fk.abs() + 3.0 * p.fk_se)
            .count();
        assert!(
            ok * 10 >= probes.len() * 9,
            "only {ok}/{} probes agree: {:?}",
            probes.len(),
            probes
        );
    }
}
