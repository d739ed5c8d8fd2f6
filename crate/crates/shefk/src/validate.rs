//! Self-check battery behind the `validate` subcommand: fast property checks
//! spanning every module, runnable at two scales.

use crate::hermite::{project_coefficients, HermiteBasisSpec, QuadratureSpec};
use crate::kernels::InitialCondition;
use crate::paths::{alpha, sample_path, BinSpec, TimeGrid};
use crate::pde::fk_pde_point;
use crate::rng::{stream, StreamRole};
use crate::solver::{
    mean_field_estimate, moment_fk, psi_conditional_law_check, solve_fk_truncated, SolverConfig,
};
use crate::wick::{
    multi_indices, second_quantization, wick_exponential, wick_product, ChaosExpansion,
};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Quick,
    Full,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

pub type Check = Box<dyn Fn(Scale, u64) -> CheckResult + Send + Sync>;

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// The standard battery. Tests may append injected checks to exercise the
/// failure path of the runner.
pub fn standard_checks() -> Vec<Check> {
    vec![
        Box::new(check_hermite_orthonormality),
        Box::new(check_parseval_local_time),
        Box::new(check_psi_conditional_law),
        Box::new(check_mean_field),
        Box::new(check_wick_grading),
        Box::new(check_second_quantization),
        Box::new(check_moment_lower_bound),
        Box::new(check_pde_substitution),
        Box::new(check_determinism),
    ]
}

pub fn run_checks(checks: &[Check], scale: Scale, seed: u64) -> Vec<CheckResult> {
    checks.iter().map(|c| c(scale, seed)).collect()
}

fn check_hermite_orthonormality(scale: Scale, _seed: u64) -> CheckResult {
    let k = match scale {
        Scale::Quick => 10,
        Scale::Full => 20,
    };
    let quad = QuadratureSpec::default();
    let spec = HermiteBasisSpec::new(k).unwrap();
    let mut worst: f64 = 0.0;
    for i in 1..=k {
        let coeffs =
            project_coefficients(|x| crate::hermite::hermite_function(i, x).unwrap(), spec, quad)
                .unwrap();
        for (j, c) in coeffs.iter().enumerate() {
            let expect = if j + 1 == i { 1.0 } else { 0.0 };
            worst = worst.max((c - expect).abs());
        }
    }
    CheckResult::new(
        "hermite-orthonormality",
        worst < 1e-8,
        format!("max |<e_i,e_j> - delta| = {worst:.3e}"),
    )
}

fn check_parseval_local_time(scale: Scale, seed: u64) -> CheckResult {
    let (n_paths, steps, ks) = match scale {
        Scale::Quick => (8, 20_000, vec![50usize, 200]),
        Scale::Full => (20, 100_000, vec![50, 200, 400]),
    };
    let grid = TimeGrid::new(1.0, steps).unwrap();
    let bins = BinSpec::default();
    let k_max = *ks.last().unwrap();
    let mut medians = Vec::new();
    let mut gaps_per_k = vec![Vec::new(); ks.len()];
    for i in 0..n_paths {
        let p = sample_path(0.0, grid, &mut stream(seed, StreamRole::Path, i as u64));
        let (_, hist) = alpha(&p, 1, bins).unwrap();
        let c = crate::paths::basis_time_integrals(&p, k_max);
        for (slot, &k) in gaps_per_k.iter_mut().zip(&ks) {
            let par: f64 = c[..k].iter().map(|v| v * v).sum();
            slot.push((par - hist).abs() / hist);
        }
    }
    for gaps in &mut gaps_per_k {
        gaps.sort_by(f64::total_cmp);
        medians.push(gaps[n_paths / 2]);
    }
    let decreasing = medians.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let small = *medians.last().unwrap() < 0.10;
    CheckResult::new(
        "parseval-local-time",
        decreasing && small,
        format!("median relative gaps along K {:?}: {:?}", ks, medians),
    )
}

fn check_psi_conditional_law(scale: Scale, seed: u64) -> CheckResult {
    let m = match scale {
        Scale::Quick => 5_000,
        Scale::Full => 20_000,
    };
    let mut cfg = SolverConfig::new(1.0, 0.0, 10);
    cfg.dt = 2e-3;
    cfg.seed = seed;
    let path = sample_path(0.0, cfg.grid().unwrap(), &mut stream(seed, StreamRole::Path, 0));
    let rep = psi_conditional_law_check(&cfg, &path, m).unwrap();
    let ok = rep.mean_z.abs() < 3.5 && rep.var_z.abs() < 3.5 && rep.skew_z.abs() < 3.5;
    CheckResult::new(
        "psi-conditional-law",
        ok,
        format!(
            "z-scores: mean {:.2}, var {:.2}, skew {:.2}",
            rep.mean_z, rep.var_z, rep.skew_z
        ),
    )
}

fn check_mean_field(scale: Scale, seed: u64) -> CheckResult {
    let n = match scale {
        Scale::Quick => 2_000,
        Scale::Full => 10_000,
    };
    let mut cfg = SolverConfig::new(1.0, 0.0, 20);
    cfg.dt = 4e-3;
    cfg.seed = seed;
    let est = mean_field_estimate(&cfg, n).unwrap();
    let z = (est.value - 1.0) / est.std_error;
    CheckResult::new(
        "mean-field-identity",
        z.abs() < 3.5,
        format!("z-averaged field {:.4} +- {:.4} vs 1", est.value, est.std_error),
    )
}

fn check_wick_grading(_scale: Scale, _seed: u64) -> CheckResult {
    let mut ok = true;
    let idx = multi_indices(3, 3);
    for a in &idx {
        for b in &idx {
            let mut ea = ChaosExpansion::new();
            ea.insert(a.clone(), 2.0);
            let mut eb = ChaosExpansion::new();
            eb.insert(b.clone(), -0.5);
            let p = wick_product(&ea, &eb);
            let expect = a.clone().add(b);
            ok &= p.terms().count() == 1 && (p.coefficient(&expect) + 1.0).abs() < 1e-14;
        }
    }
    CheckResult::new("wick-grading", ok, "H_a <> H_b = H_{a+b} over all pairs".into())
}

fn check_second_quantization(scale: Scale, seed: u64) -> CheckResult {
    let n_samples = match scale {
        Scale::Quick => 100_000,
        Scale::Full => 400_000,
    };
    let c = [0.6, -0.3, 0.2, 0.1];
    let we = wick_exponential(&c, 3);
    let proj = second_quantization(&we.expansion, 2);
    let mut rng = stream(seed, StreamRole::Conditional, 0);
    let z_head = [rng.sample::<f64, _>(StandardNormal), rng.sample(StandardNormal)];
    let (mc, se) = crate::wick::conditional_expectation_mc(
        |z| crate::wick::chaos_eval(&we.expansion, z).unwrap(),
        4,
        &z_head,
        n_samples,
        &mut rng,
    )
    .unwrap();
    let direct = crate::wick::chaos_eval(&proj, z_head.as_slice()).unwrap();
    let z = (mc - direct) / se;
    CheckResult::new(
        "second-quantization-conditional",
        z.abs() < 3.5,
        format!("MC {mc:.4} +- {se:.4} vs projection {direct:.4}"),
    )
}

fn check_moment_lower_bound(scale: Scale, seed: u64) -> CheckResult {
    let (n_paths, k) = match scale {
        Scale::Quick => (800, 30),
        Scale::Full => (4_000, 100),
    };
    let mut cfg = SolverConfig::new(1.0, 0.0, k);
    cfg.n_paths = n_paths;
    cfg.dt = 4e-3;
    cfg.seed = seed;
    let est = moment_fk(2, &cfg).unwrap();
    let ok = est.value >= 1.0 - 3.0 * est.std_error;
    CheckResult::new(
        "second-moment-lower-bound",
        ok,
        format!("E[u^2] = {:.4} +- {:.4} (must be >= 1)", est.value, est.std_error),
    )
}

fn check_pde_substitution(scale: Scale, seed: u64) -> CheckResult {
    let n_paths = match scale {
        Scale::Quick => 300,
        Scale::Full => 2_000,
    };
    let mut cfg = SolverConfig::new(0.5, 0.0, 1);
    cfg.n_paths = n_paths;
    cfg.dt = 2e-3;
    cfg.seed = seed;
    let a = solve_fk_truncated(&cfg, &[0.0]).unwrap();
    let b = fk_pde_point(0.5, 0.0, &[0.0], &cfg.u0, n_paths, 2e-3, seed).unwrap();
    let ok = a.value.to_bits() == b.u.value.to_bits();
    CheckResult::new(
        "pde-substitution-identity",
        ok,
        format!("solver {} vs reduced-field route {}", a.value, b.u.value),
    )
}

fn check_determinism(_scale: Scale, seed: u64) -> CheckResult {
    let mut cfg = SolverConfig::new(1.0, 0.3, 8);
    cfg.n_paths = 300;
    cfg.dt = 4e-3;
    cfg.seed = seed;
    cfg.u0 = InitialCondition::gauss_bump();
    let z = vec![0.4; 8];
    let a = solve_fk_truncated(&cfg, &z).unwrap();
    let b = solve_fk_truncated(&cfg, &z).unwrap();
    let ok = a.value.to_bits() == b.value.to_bits()
        && a.std_error.to_bits() == b.std_error.to_bits();
    CheckResult::new("determinism", ok, format!("repeated run: {} vs {}", a.value, b.value))
}
