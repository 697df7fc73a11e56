//! Command-line front end.
//!
//! Exit codes: 0 when everything ran and every check passed, 1 when a check
//! failed or a computation did not converge, 2 for usage and configuration
//! errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::contours::{deformed_heat_contour, heat_contour, kdv_contour, real_line};
use crate::counterexamples::{hypothesis_violation_report, recipe_generate, CounterexampleField};
use crate::error::Error;
use crate::profiles::{DataProfile, Pde, ProblemSpec};
use crate::quadrature::QuadConfig;
use crate::reductions::{oblique_phi_check, phi_sweep, robin_phi_check, robin_uniqueness_demo, RobinSpec};
use crate::solvers::{solve_grid, SolverConfig};
use crate::transforms::half_line_fourier;
use crate::verification::{run_checks, CHECKS};

#[derive(Parser, Debug)]
#[command(name = "utm-qp", version, about = "Transform-method solvers for heat and linear KdV on the quarter-plane")]
struct Cli {
    /// Worker threads for grid evaluation (default: available parallelism).
    #[arg(long, global = true, env = "UTM_QP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the solution (or a derivative) on a grid and write CSV.
    Solve(SolveArgs),
    /// Run verification checks for a problem and write a JSON report.
    Verify(VerifyArgs),
    /// Evaluate a non-uniqueness field, its limit probes and energy growth.
    Counterexample(CounterexampleArgs),
    /// Check the Robin or oblique reduction ODE.
    Reduce(ReduceArgs),
    /// Run both reduction checks over seeded random positive parameters.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct Tolerances {
    /// Quadrature tolerance for each contour term.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Number of terms in the large-lambda boundary expansions.
    #[arg(long, default_value_t = 12)]
    expansion_order: usize,
    /// Radius separating the central piece from the expanded tails.
    #[arg(long, default_value_t = 2.0)]
    rho: f64,
    /// Rotation of infinite rays towards the real axis, in radians.
    #[arg(long, default_value_t = std::f64::consts::PI / 12.0)]
    tilt: f64,
}

impl Tolerances {
    fn config(&self) -> Result<SolverConfig, Failure> {
        if !(self.tol > 0.0 && self.rho > 0.0 && self.tilt >= 0.0 && self.expansion_order >= 1) {
            return Err(Failure::Usage("tolerances must be positive".into()));
        }
        Ok(SolverConfig {
            expansion_order: self.expansion_order,
            rho: self.rho,
            tilt: self.tilt,
            ..SolverConfig::default().with_tol(self.tol)
        })
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    pde: Pde,
    /// JSON problem file.
    #[arg(long)]
    problem: PathBuf,
    /// `x0:x1:nx,t0:t1:nt`, all bounds strictly positive.
    #[arg(long)]
    grid: String,
    #[arg(long, default_value = "field.csv")]
    out: PathBuf,
    /// Order of the x-derivative.
    #[arg(long, default_value_t = 0)]
    dx: usize,
    /// Order of the t-derivative.
    #[arg(long, default_value_t = 0)]
    dt: usize,
    /// Write the contours used for this equation as JSON.
    #[arg(long)]
    dump_contour: Option<PathBuf>,
    /// Tabulate the initial-datum transform on `a:b:n` (real) or
    /// `a:b:n,c:d:m` (real x imaginary parts).
    #[arg(long, allow_hyphen_values = true)]
    dump_transform: Option<String>,
    /// Destination of the transform table.
    #[arg(long, default_value = "transform.csv")]
    transform_out: PathBuf,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    pde: Pde,
    #[arg(long)]
    problem: PathBuf,
    /// Comma-separated subset of decay, energy, oracle, recovery, residual.
    #[arg(long, value_delimiter = ',', default_values_t = CHECKS.map(String::from))]
    checks: Vec<String>,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    #[arg(long)]
    pde: Pde,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value = "0.1:3:10,0.1:2:8")]
    grid: String,
    #[arg(long, default_value = "ce.csv")]
    out: PathBuf,
    #[arg(long, default_value = "violations.json")]
    report: PathBuf,
    /// Upper end of the time window for the energy fit.
    #[arg(long = "T", default_value_t = 1.0)]
    t_max: f64,
    /// Threshold for the zero-limit and nonvanishing probes.
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
    /// Build the field by differentiating the unit-step solution instead of
    /// the explicit formula.
    #[arg(long)]
    recipe: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Robin,
    Oblique,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long = "A", allow_negative_numbers = true)]
    a: f64,
    #[arg(long = "B", allow_negative_numbers = true)]
    b: f64,
    #[arg(long = "C", default_value_t = 0.0, allow_negative_numbers = true)]
    c: f64,
    /// Also compare Robin images of two independent solutions of this heat problem.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, default_value = "reduce.json")]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sweep.json")]
    report: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownProfile(_) | Error::InvalidParameter(_) | Error::OutsideProblemClass(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool, Failure> {
    match cmd {
        Command::Solve(a) => solve_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Counterexample(a) => counterexample_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
    }
}

fn parse_axis(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::Usage(format!("axis `{spec}` is not of the form start:end:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn parse_grid(spec: &str) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let (xs, ts) = spec
        .split_once(',')
        .ok_or_else(|| Failure::Usage(format!("grid `{spec}` is not of the form x0:x1:nx,t0:t1:nt")))?;
    let (xs, ts) = (parse_axis(xs)?, parse_axis(ts)?);
    if xs.iter().chain(&ts).any(|v| *v <= 0.0) {
        return Err(Failure::Usage(format!("grid `{spec}` must lie strictly inside x > 0, t > 0")));
    }
    Ok((xs, ts))
}

fn load_problem(path: &Path, pde: Pde) -> Result<ProblemSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let p = ProblemSpec::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if p.pde != pde {
        return Err(Failure::Usage(format!(
            "{} poses a {} problem but --pde is {pde}",
            path.display(),
            p.pde
        )));
    }
    Ok(p)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Runtime(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    write_file(path, &bytes)
}

fn solve_cmd(a: SolveArgs) -> Result<bool, Failure> {
    let p = load_problem(&a.problem, a.pde)?;
    let (xs, ts) = parse_grid(&a.grid)?;
    let cfg = a.tol.config()?;
    if let Some(path) = &a.dump_contour {
        let doc = match a.pde {
            Pde::Kdv => json!({ "real_line": real_line(), "contour": kdv_contour() }),
            Pde::Heat => json!({
                "real_line": real_line(),
                "contour": heat_contour(),
                "deformed": deformed_heat_contour(),
            }),
        };
        write_json(path, &doc)?;
    }
    if let Some(spec) = &a.dump_transform {
        dump_transform(&p.u0, spec, &a.transform_out, &cfg.quad)?;
    }
    let samples = solve_grid(&p, a.dx, a.dt, &xs, &ts, &cfg);
    let mut rows = Vec::with_capacity(samples.len());
    for s in samples {
        let s = s?;
        let mut row = vec![s.x, s.t, s.value, s.error_estimate];
        row.extend(s.term_breakdown.iter().map(|z| z.norm()));
        rows.push(row);
    }
    write_csv(
        &a.out,
        &["x", "t", "U", "err", "I_R", "I_contour", "I_g", "Phi_R", "Phi_contour"],
        &rows,
    )?;
    Ok(true)
}

fn dump_transform(u0: &DataProfile, spec: &str, out: &Path, cfg: &QuadConfig) -> Result<(), Failure> {
    let (re, im) = match spec.split_once(',') {
        Some((r, i)) => (parse_axis(r)?, parse_axis(i)?),
        None => (parse_axis(spec)?, vec![0.0]),
    };
    let mut rows = Vec::new();
    for &x in &re {
        for &y in &im {
            let v = half_line_fourier(u0, Complex64::new(x, y), cfg)?;
            rows.push(vec![x, y, v.re, v.im]);
        }
    }
    write_csv(out, &["re_lambda", "im_lambda", "re_u0_hat", "im_u0_hat"], &rows)
}

fn verify_cmd(a: VerifyArgs) -> Result<bool, Failure> {
    let p = load_problem(&a.problem, a.pde)?;
    let cfg = a.tol.config()?;
    let reports = run_checks(&p, &a.checks, &cfg)?;
    let pass = reports.iter().all(|r| r.pass);
    let doc = json!({
        "problem": p.to_file(),
        "reports": reports,
        "pass": pass,
    });
    write_json(&a.out, &doc)?;
    for r in &reports {
        eprintln!("{:<10} {}", r.check, if r.pass { "pass" } else { "FAIL" });
    }
    Ok(pass)
}

fn counterexample_cmd(a: CounterexampleArgs) -> Result<bool, Failure> {
    if a.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let (xs, ts) = parse_grid(&a.grid)?;
    let field = if a.recipe {
        recipe_generate(a.pde, &DataProfile::constant(1.0), a.n, &SolverConfig::default())?
    } else {
        match a.pde {
            Pde::Heat => CounterexampleField::heat(a.n)?,
            Pde::Kdv => CounterexampleField::kdv(a.n)?,
        }
    };
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ts.iter().map(move |&t| (x, t))).collect();
    let values = {
        use rayon::prelude::*;
        points
            .par_iter()
            .map(|&(x, t)| field.eval(x, t).map(|u| vec![x, t, u]))
            .collect::<Result<Vec<Vec<f64>>, Error>>()?
    };
    write_csv(&a.out, &["x", "t", "u"], &values)?;
    let probes = field.probe_report(a.threshold)?;
    let violation = hypothesis_violation_report(&field, a.t_max)?;
    let pass = probes.nonzero && probes.vanishes_at_t0 && probes.vanishes_at_x0;
    let doc = json!({
        "pde": a.pde,
        "n": a.n,
        "source": if a.recipe { "recipe" } else { "explicit" },
        "closed_form": field.closed_form(),
        "probes": probes,
        "violation": violation,
    });
    write_json(&a.report, &doc)?;
    Ok(pass)
}

fn reduce_cmd(a: ReduceArgs) -> Result<bool, Failure> {
    let outcome = match a.mode {
        Mode::Robin => robin_phi_check(a.a, a.b),
        Mode::Oblique => oblique_phi_check(a.a, a.b, a.c),
    };
    let mode = match a.mode {
        Mode::Robin => "robin",
        Mode::Oblique => "oblique",
    };
    let (phi, mut pass) = match outcome {
        Ok(r) => {
            let ok = r.phi_vanishes;
            (json!(r), ok)
        }
        Err(Error::CoveredByDirichlet) => (json!({ "branch": "covered-by-dirichlet" }), true),
        Err(e) => return Err(e.into()),
    };
    let demo = match &a.problem {
        Some(path) => {
            let p = load_problem(path, Pde::Heat)?;
            let r = robin_uniqueness_demo(&p, &RobinSpec::new(a.a, a.b, a.c)?, 0.0, &SolverConfig::default())?;
            pass &= r.pass;
            Some(r)
        }
        None => None,
    };
    let doc = json!({
        "mode": mode,
        "A": a.a,
        "B": a.b,
        "C": a.c,
        "phi": phi,
        "demo": demo,
        "pass": pass,
    });
    write_json(&a.report, &doc)?;
    Ok(pass)
}

fn sweep_cmd(a: SweepArgs) -> Result<bool, Failure> {
    let r = phi_sweep(a.samples, a.seed)?;
    write_json(&a.report, &r)?;
    Ok(r.pass)
}
