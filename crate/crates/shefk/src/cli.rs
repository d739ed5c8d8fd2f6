//! Command-line front end: flat-JSON config files, flag overrides, seeded
//! reproducible runs, CSV/JSON output with provenance, replay, and the
//! validation battery.

use crate::error::{Error, Result};
use crate::kernels::{chaos_coefficients_mc, InitialCondition};
use crate::paths::{path_functionals, sample_path, BinSpec, TimeGrid};
use crate::pde::{pde_vs_fk_probes, PdeGrid};
use crate::rng::{stream, StreamRole};
use crate::solver::{
    convergence_study, empirical_moment, moment_fk, s_transform_residual, solve_fk_limit,
    solve_fk_truncated, SolverConfig,
};
use crate::validate::{all_passed, run_checks, standard_checks, Scale};
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "shefk", version, about = "Stochastic heat equation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Feynman-Kac estimate of the truncated field at one noise draw
    Solve(RunArgs),
    /// Same, with the drift upgraded to the local-time histogram
    SolveLimit(RunArgs),
    /// Nested convergence study along a list of truncation levels
    ConvergeK(RunArgs),
    /// Chaos-expansion coefficients by Monte Carlo projection
    Chaos(RunArgs),
    /// Second-moment duality: intersection-local-time route vs direct average
    Moments(RunArgs),
    /// Reduced-PDE vs Feynman-Kac probe comparison (K = 1)
    PdeCheck(RunArgs),
    /// S-transform mild-equation residual on a space-time grid
    Stransform(RunArgs),
    /// Per-path local-time functionals and the Parseval gap
    Localtime(RunArgs),
    /// Run the self-check battery; exits nonzero on any failure
    Validate(RunArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Solve(_) => "solve",
            Cmd::SolveLimit(_) => "solve-limit",
            Cmd::ConvergeK(_) => "converge-k",
            Cmd::Chaos(_) => "chaos",
            Cmd::Moments(_) => "moments",
            Cmd::PdeCheck(_) => "pde-check",
            Cmd::Stransform(_) => "stransform",
            Cmd::Localtime(_) => "localtime",
            Cmd::Validate(_) => "validate",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Cmd::Solve(a)
            | Cmd::SolveLimit(a)
            | Cmd::ConvergeK(a)
            | Cmd::Chaos(a)
            | Cmd::Moments(a)
            | Cmd::PdeCheck(a)
            | Cmd::Stransform(a)
            | Cmd::Localtime(a)
            | Cmd::Validate(a) => a,
        }
    }
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Time horizon
    #[arg(long)]
    t: Option<f64>,
    /// Spatial point
    #[arg(long)]
    x: Option<f64>,
    /// Truncation level K
    #[arg(long)]
    k: Option<usize>,
    /// Brownian paths per estimate
    #[arg(long)]
    paths: Option<usize>,
    /// Outer sample count (noise draws, probe paths, ...)
    #[arg(long)]
    samples: Option<usize>,
    /// Path time step
    #[arg(long)]
    dt: Option<f64>,
    /// Local-time histogram bin width
    #[arg(long)]
    bins: Option<f64>,
    /// Chaos degree bound N
    #[arg(long)]
    degree: Option<u32>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (does not affect results)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
    /// Flat-JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated truncation levels for converge-k
    #[arg(long)]
    k_list: Option<String>,
    /// Moment order
    #[arg(long)]
    q: Option<u32>,
    /// Reduced scale for the validate battery
    #[arg(long)]
    quick: bool,
    /// Re-run from the config embedded in a JSON output file and compare
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Initial condition name: one, indicator:a,b, gauss-bump, cosine-bounded
    #[arg(long)]
    u0: Option<String>,
}

/// Fully resolved run configuration; this (plus the subcommand) is what the
/// config hash covers. Thread count is deliberately excluded: it must not
/// affect results.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub t: f64,
    pub x: f64,
    pub k: usize,
    pub paths: usize,
    pub samples: usize,
    pub dt: f64,
    pub bins: f64,
    pub degree: u32,
    pub seed: u64,
    pub format: String,
    pub k_list: Vec<usize>,
    pub q: u32,
    pub u0: String,
    pub quick: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            subcommand: String::new(),
            t: 1.0,
            x: 0.0,
            k: 50,
            paths: 4000,
            samples: 200,
            dt: 2e-3,
            bins: 0.02,
            degree: 4,
            seed: 0,
            format: "csv".into(),
            k_list: vec![25, 50, 100, 200],
            q: 2,
            u0: "one".into(),
            quick: false,
        }
    }
}

const CONFIG_KEYS: &[&str] = &[
    "t", "x", "k", "paths", "samples", "dt", "bins", "degree", "seed", "format", "k_list", "q",
    "u0", "quick",
];

fn parse_k_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad k-list entry: {p:?}")))
        })
        .collect()
}

impl RunConfig {
    fn apply_file(&mut self, path: &PathBuf) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("config file must be a JSON object".into()))?;
        for (key, v) in obj {
            match key.as_str() {
                "t" => self.t = as_f64(key, v)?,
                "x" => self.x = as_f64(key, v)?,
                "k" => self.k = as_u64(key, v)? as usize,
                "paths" => self.paths = as_u64(key, v)? as usize,
                "samples" => self.samples = as_u64(key, v)? as usize,
                "dt" => self.dt = as_f64(key, v)?,
                "bins" => self.bins = as_f64(key, v)?,
                "degree" => self.degree = as_u64(key, v)? as u32,
                "seed" => self.seed = as_u64(key, v)?,
                "format" => self.format = as_str(key, v)?,
                "k_list" => self.k_list = parse_k_list(&as_str(key, v)?)?,
                "q" => self.q = as_u64(key, v)? as u32,
                "u0" => self.u0 = as_str(key, v)?,
                "quick" => {
                    self.quick = v
                        .as_bool()
                        .ok_or_else(|| Error::Config("key quick must be a bool".into()))?
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown config key {other:?}; known keys: {}",
                        CONFIG_KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, a: &RunArgs) -> Result<()> {
        if let Some(v) = a.t {
            self.t = v;
        }
        if let Some(v) = a.x {
            self.x = v;
        }
        if let Some(v) = a.k {
            self.k = v;
        }
        if let Some(v) = a.paths {
            self.paths = v;
        }
        if let Some(v) = a.samples {
            self.samples = v;
        }
        if let Some(v) = a.dt {
            self.dt = v;
        }
        if let Some(v) = a.bins {
            self.bins = v;
        }
        if let Some(v) = a.degree {
            self.degree = v;
        }
        if let Some(v) = a.seed {
            self.seed = v;
        }
        if let Some(v) = &a.format {
            self.format = v.clone();
        }
        if let Some(v) = &a.k_list {
            self.k_list = parse_k_list(v)?;
        }
        if let Some(v) = a.q {
            self.q = v;
        }
        if let Some(v) = &a.u0 {
            self.u0 = v.clone();
        }
        if a.quick {
            self.quick = true;
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.format != "csv" && self.format != "json" {
            return Err(Error::Config(format!(
                "format must be csv or json, got {:?}",
                self.format
            )));
        }
        InitialCondition::from_name(&self.u0)?;
        Ok(())
    }

    fn resolve(cmd_name: &str, a: &RunArgs) -> Result<Self> {
        let mut cfg = RunConfig { subcommand: cmd_name.into(), ..Default::default() };
        if let Some(path) = &a.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(a)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn solver(&self) -> Result<SolverConfig> {
        let mut s = SolverConfig::new(self.t, self.x, self.k);
        s.n_paths = self.paths;
        s.n_noise = self.samples;
        s.dt = self.dt;
        s.bins = BinSpec { width: self.bins };
        s.degree = self.degree;
        s.seed = self.seed;
        s.u0 = InitialCondition::from_name(&self.u0)?;
        Ok(s)
    }

    pub fn hash(&self) -> String {
        // FNV-1a over the canonical JSON encoding
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Config(format!("key {key:?} must be a number")))
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    v.as_u64().ok_or_else(|| Error::Config(format!("key {key:?} must be a nonnegative integer")))
}

fn as_str(key: &str, v: &Value) -> Result<String> {
    Ok(v.as_str()
        .ok_or_else(|| Error::Config(format!("key {key:?} must be a string")))?
        .to_string())
}

/// One output row: ordered columns shared by the CSV and JSON writers.
type Row = Vec<(&'static str, Value)>;

struct RunOutput {
    rows: Vec<Row>,
    diagnostics: Map<String, Value>,
}

fn f(v: f64) -> Value {
    json!(v)
}

fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let mut diagnostics = Map::new();
    let rows = match cfg.subcommand.as_str() {
        "solve" | "solve-limit" => {
            let s = cfg.solver()?;
            let mut zrng = stream(cfg.seed, StreamRole::Noise, 0);
            let z: Vec<f64> = (0..cfg.k).map(|_| zrng.sample(StandardNormal)).collect();
            let est = if cfg.subcommand == "solve" {
                solve_fk_truncated(&s, &z)?
            } else {
                solve_fk_limit(&s, &z)?
            };
            diagnostics.insert("z".into(), json!(z));
            vec![vec![
                ("t", f(cfg.t)),
                ("x", f(cfg.x)),
                ("k", json!(cfg.k)),
                ("estimate", f(est.value)),
                ("std_error", f(est.std_error)),
                ("n", json!(est.n)),
            ]]
        }
        "converge-k" => {
            let s = cfg.solver()?;
            let rows = convergence_study(&s, &cfg.k_list, cfg.samples)?;
            rows.iter()
                .map(|r| {
                    vec![
                        ("k", json!(r.k)),
                        ("estimate", f(r.mean_over_noise)),
                        ("std_error", f(r.se_over_noise)),
                        ("n", json!(cfg.samples)),
                        ("gap", r.median_gap.map(f).unwrap_or(Value::Null)),
                    ]
                })
                .collect()
        }
        "chaos" => {
            let u0 = InitialCondition::from_name(&cfg.u0)?;
            let kc = chaos_coefficients_mc(
                cfg.t, cfg.x, cfg.k, cfg.degree, &u0, cfg.paths, cfg.dt, cfg.seed,
            )?;
            diagnostics.insert("sidecar".into(), kc.sidecar_json());
            kc.std_errors
                .iter()
                .map(|(alpha, se)| {
                    vec![
                        ("alpha", json!(alpha.to_string())),
                        ("coefficient", f(kc.expansion.coefficient(alpha))),
                        ("std_error", f(*se)),
                    ]
                })
                .collect()
        }
        "moments" => {
            let s = cfg.solver()?;
            let fk = moment_fk(cfg.q, &s)?;
            let emp = empirical_moment(cfg.q, &s)?;
            diagnostics.insert("bias_correction".into(), f(emp.bias_correction));
            diagnostics.insert("raw_empirical".into(), f(emp.raw_value));
            vec![
                vec![
                    ("route", json!("fk")),
                    ("q", json!(cfg.q)),
                    ("value", f(fk.value)),
                    ("std_error", f(fk.std_error)),
                    ("n", json!(fk.n)),
                ],
                vec![
                    ("route", json!("empirical")),
                    ("q", json!(cfg.q)),
                    ("value", f(emp.estimate.value)),
                    ("std_error", f(emp.estimate.std_error)),
                    ("n", json!(emp.estimate.n)),
                ],
            ]
        }
        "pde-check" => {
            let u0 = InitialCondition::from_name(&cfg.u0)?;
            let grid = PdeGrid::standard(1, 0.05, 0.9)?;
            let probes = [-1.0, -0.5, 0.0, 0.5, 1.0];
            let comps =
                pde_vs_fk_probes(&u0, &grid, cfg.t, &probes, &probes, cfg.paths, cfg.dt, cfg.seed)?;
            comps
                .iter()
                .map(|p| {
                    vec![
                        ("x", f(p.x)),
                        ("z", f(p.z)),
                        ("u_pde", f(p.u_pde)),
                        ("u_fk", f(p.u_fk)),
                        ("fk_se", f(p.fk_se)),
                        ("rel_gap", f(p.rel_gap)),
                    ]
                })
                .collect()
        }
        "stransform" => {
            let s = cfg.solver()?;
            let (nt, nx) = if cfg.quick { (4, 11) } else { (12, 41) };
            let xi = vec![0.5];
            let rep = s_transform_residual(&xi, &s, nt, nx, 4.0)?;
            diagnostics.insert("max_abs_residual".into(), f(rep.max_abs_residual));
            diagnostics.insert("mean_abs_residual".into(), f(rep.mean_abs_residual));
            diagnostics.insert("mean_budget".into(), f(rep.mean_budget));
            rep.nodes
                .iter()
                .map(|n| {
                    vec![
                        ("t", f(n.t)),
                        ("x", f(n.x)),
                        ("s_value", f(n.s_value)),
                        ("residual", f(n.residual)),
                        ("se", f(n.se)),
                        ("quad_est", f(n.quad_est)),
                    ]
                })
                .collect()
        }
        "localtime" => {
            let u0_check = InitialCondition::from_name(&cfg.u0)?;
            let _ = u0_check;
            let grid = TimeGrid::with_dt(cfg.t, cfg.dt)?;
            let bins = BinSpec { width: cfg.bins };
            (0..cfg.samples)
                .map(|i| {
                    let p = sample_path(cfg.x, grid, &mut stream(cfg.seed, StreamRole::Path, i as u64));
                    let pf = path_functionals(&p, cfg.k, bins)?;
                    let gap = (pf.alpha_parseval - pf.alpha_hist).abs() / pf.alpha_hist;
                    Ok(vec![
                        ("path", json!(i)),
                        ("alpha_parseval", f(pf.alpha_parseval)),
                        ("alpha_hist", f(pf.alpha_hist)),
                        ("rel_gap", f(gap)),
                    ])
                })
                .collect::<Result<Vec<_>>>()?
        }
        "validate" => {
            let scale = if cfg.quick { Scale::Quick } else { Scale::Full };
            let results = run_checks(&standard_checks(), scale, cfg.seed);
            let ok = all_passed(&results);
            diagnostics.insert("all_passed".into(), json!(ok));
            results
                .iter()
                .map(|r| {
                    vec![
                        ("name", json!(r.name)),
                        ("passed", json!(r.passed)),
                        ("detail", json!(r.detail)),
                    ]
                })
                .collect()
        }
        other => return Err(Error::Config(format!("unknown subcommand {other:?}"))),
    };
    Ok(RunOutput { rows, diagnostics })
}

fn render(cfg: &RunConfig, out: &RunOutput) -> String {
    if cfg.format == "json" {
        let results: Vec<Value> = out
            .rows
            .iter()
            .map(|row| Value::Object(row.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()))
            .collect();
        let doc = json!({
            "config": cfg,
            "results": results,
            "diagnostics": Value::Object(out.diagnostics.clone()),
            "provenance": {
                "config_hash": cfg.hash(),
                "seed": cfg.seed,
                "version": env!("CARGO_PKG_VERSION"),
            },
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    } else {
        let mut s = String::from("config_hash");
        if let Some(first) = out.rows.first() {
            for (k, _) in first {
                s.push(',');
                s.push_str(k);
            }
        }
        s.push('\n');
        let hash = cfg.hash();
        for row in &out.rows {
            s.push_str(&hash);
            for (_, v) in row {
                s.push(',');
                match v {
                    Value::Null => {}
                    Value::String(t) => s.push_str(&t.replace(',', ";")),
                    other => s.push_str(&other.to_string()),
                }
            }
            s.push('\n');
        }
        s
    }
}

fn emit(a: &RunArgs, text: &str) -> Result<()> {
    match &a.out {
        Some(path) => {
            let mut fh = std::fs::File::create(path)?;
            fh.write_all(text.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn replay(path: &PathBuf) -> Result<i32> {
    let text = std::fs::read_to_string(path)?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("replay file {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_value(
        doc.get("config")
            .cloned()
            .ok_or_else(|| Error::Config("replay file has no config field".into()))?,
    )
    .map_err(|e| Error::Config(format!("replay config: {e}")))?;
    let out = execute(&cfg)?;
    let fresh: Vec<Value> = out
        .rows
        .iter()
        .map(|row| Value::Object(row.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()))
        .collect();
    let recorded = doc.get("results").cloned().unwrap_or(Value::Null);
    if Value::Array(fresh) == recorded {
        eprintln!("replay: results reproduced");
        Ok(0)
    } else {
        eprintln!("replay: results differ from the recorded run");
        Ok(1)
    }
}

fn run_parsed(cli: Cli) -> Result<i32> {
    let a = cli.cmd.args();
    if let Some(n) = a.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    if let Some(path) = &a.replay {
        return replay(path);
    }
    let cfg = RunConfig::resolve(cli.cmd.name(), a)?;
    let out = execute(&cfg)?;
    let failed_validation = cfg.subcommand == "validate"
        && out.diagnostics.get("all_passed") == Some(&json!(false));
    emit(a, &render(&cfg, &out))?;
    if cfg.subcommand == "validate" {
        for row in &out.rows {
            let name = row[0].1.as_str().unwrap_or("?");
            let passed = row[1].1.as_bool().unwrap_or(false);
            eprintln!("{}: {}", name, if passed { "pass" } else { "FAIL" });
        }
    }
    Ok(if failed_validation { 1 } else { 0 })
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_parsed(cli) {
        Ok(code) => code,
        Err(e @ (Error::Config(_) | Error::Parse(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
