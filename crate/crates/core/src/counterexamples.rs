//! Nonzero solutions of the homogeneous quarter-plane problems.
//!
//! Differentiating in `t` the solution with a unit boundary step (and zero
//! initial data) gives a field that solves the equation, vanishes in both
//! boundary limits, and is nevertheless not identically zero. For the heat
//! equation the fields are explicit:
//! `u_1 = x t^{-3/2} e^{-x^2/4t} / (2 sqrt pi)` and `u_n = d^{n-1} u_1 / dt^{n-1}`.
//! For KdV,
//! `u_n = -(3 / 2 pi) int_{Im lambda = eps} (i lambda^3)^{n-1} e^{i lambda x + i lambda^3 t} lambda^2 d lambda`,
//! which also equals `(-d^3/dx^3)^{n-1}` applied to `z Ai(z) / t`, `z = x (3t)^{-1/3}`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::airy::airy_ai;
use crate::contours::indented_line;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::profiles::{DataProfile, ForcingProfile, Pde, ProblemSpec, COMPAT_TOL};
use crate::quadrature::{integrate, integrate_real, Integrand, QuadConfig};
use crate::solvers::{solve_derivative, SolverConfig};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn check(n: usize, x: f64, t: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("counterexample order n must be >= 1".into()));
    }
    if !(x > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "counterexamples are evaluated for x > 0, t > 0; got ({x}, {t})"
        )));
    }
    Ok(())
}

/// Coefficients `Q[i][j]` of `s^i q^j` with
/// `u_n = x s^{3/2} Q(s, q) e^{-q s} / (2 sqrt pi)`, `s = 1/t`, `q = x^2/4`.
fn heat_polynomial(n: usize) -> Vec<Vec<f64>> {
    let mut q = vec![vec![1.0]];
    for _ in 1..n {
        // d/dt = -s^2 d/ds applied to s^{3/2} Q e^{-qs}
        let rows = q.len() + 2;
        let cols = q.iter().map(|r| r.len()).max().unwrap_or(1) + 1;
        let mut next = vec![vec![0.0; cols]; rows];
        for (i, row) in q.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                next[i + 1][j] -= (1.5 + i as f64) * c;
                next[i + 2][j + 1] += c;
            }
        }
        q = next;
    }
    q
}

/// `u_n` as a Taylor jet in `x` of length `len`.
pub fn heat_counterexample_jet(n: usize, x: f64, t: f64, len: usize) -> Result<Jet> {
    check(n, x, t)?;
    let s = 1.0 / t;
    let xv = Jet::variable(x, len);
    let q = (xv.clone() * xv.clone()).scale(0.25);
    let mut poly = Jet::constant(0.0, len);
    let mut s_pow = 1.0;
    for row in heat_polynomial(n) {
        let mut q_pow = Jet::constant(1.0, len);
        let mut inner = Jet::constant(0.0, len);
        for c in row {
            inner = inner + q_pow.scale(c);
            q_pow = q_pow * q.clone();
        }
        poly = poly + inner.scale(s_pow);
        s_pow *= s;
    }
    let gauss = q.scale(-s).exp();
    Ok((xv * poly * gauss).scale(s.powf(1.5) / (2.0 * PI.sqrt())))
}

/// The explicit heat counterexample `u_n(x, t)`.
pub fn heat_counterexample(n: usize, x: f64, t: f64) -> Result<f64> {
    Ok(heat_counterexample_jet(n, x, t, 1)?.value())
}

/// Saddle-point height `sqrt(x / 3t)` for the line `Im lambda = eps`.
pub fn default_eps(x: f64, t: f64) -> f64 {
    (x / (3.0 * t)).sqrt().clamp(0.05, 50.0)
}

/// `d^k/dx^k u_n` for KdV by quadrature along `Im lambda = eps`.
pub fn kdv_counterexample_quadrature(
    n: usize,
    k: usize,
    x: f64,
    t: f64,
    eps: Option<f64>,
    cfg: &QuadConfig,
) -> Result<f64> {
    check(n, x, t)?;
    let eps = eps.unwrap_or_else(|| default_eps(x, t));
    let line = indented_line(eps)?;
    let g = Integrand::new(move |l: Complex64| {
        let l3 = l * l * l;
        (I * l3).powu(n as u32 - 1) * (I * l).powu(k as u32) * (I * l * x + I * l3 * t).exp() * l * l
    })
    .with_phase_rate(move |l| (x + 3.0 * l * l * t).norm());
    let r = integrate(&g, &line, cfg)?;
    Ok(-3.0 / (2.0 * PI) * r.value.re)
}

/// `u_n` for KdV through the Airy function.
pub fn kdv_counterexample_airy(n: usize, x: f64, t: f64) -> Result<f64> {
    check(n, x, t)?;
    let c = (3.0 * t).powf(-1.0 / 3.0);
    let z = x * c;
    // f = P(z) Ai + Q(z) Ai', differentiated with Ai'' = z Ai.
    let mut p = vec![0.0, 1.0];
    let mut q = vec![0.0];
    for _ in 0..3 * (n - 1) {
        let dp = derivative(&p);
        let dq = derivative(&q);
        let mut np = add(&dp, &shift(&q));
        let mut nq = add(&p, &dq);
        trim(&mut np);
        trim(&mut nq);
        p = np;
        q = nq;
    }
    let (ai, aip) = airy_ai(z)?;
    let f = horner(&p, z) * ai + horner(&q, z) * aip;
    Ok(f * (-c * c * c).powi(n as i32 - 1) / t)
}

fn derivative(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
}

fn shift(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend_from_slice(p);
    out
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len().max(b.len()))
        .map(|i| a.get(i).unwrap_or(&0.0) + b.get(i).unwrap_or(&0.0))
        .collect()
}

fn trim(p: &mut Vec<f64>) {
    while p.len() > 1 && *p.last().unwrap() == 0.0 {
        p.pop();
    }
}

fn horner(p: &[f64], z: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// Compares the Airy route against quadrature at five points; the Airy route
/// is used only if all agree to `1e-8`.
pub fn airy_self_test() -> bool {
    static PASSED: OnceLock<bool> = OnceLock::new();
    *PASSED.get_or_init(|| {
        let cfg = QuadConfig::default().with_tol(1e-11);
        [(0.5, 0.5), (1.0, 1.0), (2.0, 0.5), (0.3, 2.0), (3.0, 0.2)]
            .iter()
            .all(|&(x, t)| {
                match (
                    kdv_counterexample_airy(1, x, t),
                    kdv_counterexample_quadrature(1, 0, x, t, None, &cfg),
                ) {
                    (Ok(a), Ok(b)) => (a - b).abs() <= 1e-8,
                    _ => false,
                }
            })
    })
}

/// The KdV counterexample `u_n(x, t)`, by the Airy route when its self-test
/// passes and by quadrature otherwise.
pub fn kdv_counterexample(n: usize, x: f64, t: f64) -> Result<f64> {
    if airy_self_test() {
        kdv_counterexample_airy(n, x, t)
    } else {
        kdv_counterexample_quadrature(n, 0, x, t, None, &QuadConfig::default().with_tol(1e-11))
    }
}

#[derive(Clone, Debug)]
enum Source {
    Explicit,
    Recipe {
        problem: ProblemSpec,
        cfg: SolverConfig,
    },
}

/// A member of a non-uniqueness family.
#[derive(Clone, Debug)]
pub struct CounterexampleField {
    pub pde: Pde,
    pub n: usize,
    source: Source,
}

/// Limit probes and the nonvanishing witness for a field.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    /// `(t, u(1, t))` for decreasing `t`.
    pub t_probes: Vec<(f64, f64)>,
    /// `(x, u(x, 1))` for decreasing `x`.
    pub x_probes: Vec<(f64, f64)>,
    pub grid_max: f64,
    pub threshold: f64,
    pub vanishes_at_t0: bool,
    pub vanishes_at_x0: bool,
    pub nonzero: bool,
}

impl CounterexampleField {
    pub fn heat(n: usize) -> Result<Self> {
        Self::explicit(Pde::Heat, n)
    }

    pub fn kdv(n: usize) -> Result<Self> {
        Self::explicit(Pde::Kdv, n)
    }

    fn explicit(pde: Pde, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("counterexample order n must be >= 1".into()));
        }
        Ok(CounterexampleField {
            pde,
            n,
            source: Source::Explicit,
        })
    }

    pub fn is_recipe(&self) -> bool {
        matches!(self.source, Source::Recipe { .. })
    }

    /// A readable formula for the explicit members.
    pub fn closed_form(&self) -> Option<String> {
        match (&self.source, self.pde, self.n) {
            (Source::Explicit, Pde::Heat, 1) => Some("x t^(-3/2) exp(-x^2/(4t)) / (2 sqrt(pi))".into()),
            (Source::Explicit, Pde::Heat, n) => Some(format!(
                "d^{}/dt^{} [x t^(-3/2) exp(-x^2/(4t)) / (2 sqrt(pi))]",
                n - 1,
                n - 1
            )),
            (Source::Explicit, Pde::Kdv, 1) => Some("z Ai(z) / t, z = x (3t)^(-1/3)".into()),
            (Source::Explicit, Pde::Kdv, n) => Some(format!("(-d^3/dx^3)^{} [z Ai(z) / t]", n - 1)),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        self.derivative(0, x, t)
    }

    /// `d^k/dx^k` of the field.
    pub fn derivative(&self, k: usize, x: f64, t: f64) -> Result<f64> {
        match (&self.source, self.pde) {
            (Source::Explicit, Pde::Heat) => Ok(heat_counterexample_jet(self.n, x, t, k + 1)?.derivative(k)),
            (Source::Explicit, Pde::Kdv) if k == 0 => kdv_counterexample(self.n, x, t),
            (Source::Explicit, Pde::Kdv) => {
                kdv_counterexample_quadrature(self.n, k, x, t, None, &QuadConfig::default().with_tol(1e-11))
            }
            (Source::Recipe { problem, cfg }, _) => Ok(solve_derivative(problem, k, self.n, x, t, cfg)?.value),
        }
    }

    /// `d^m/dt^m` of the field, which is the member `n + m` of the family.
    pub fn time_derivative(&self, m: usize) -> Self {
        CounterexampleField {
            n: self.n + m,
            source: match &self.source {
                Source::Recipe { problem, cfg } => Source::Recipe {
                    problem: problem.clone(),
                    cfg: SolverConfig {
                        max_order: cfg.max_order + m * self.pde.order(),
                        ..*cfg
                    },
                },
                s => s.clone(),
            },
            ..self.clone()
        }
    }

    /// `u_t - u_xx` (heat) or `u_t + u_xxx` (KdV), with `u_t` taken as the
    /// next member of the family.
    pub fn residual(&self, x: f64, t: f64) -> Result<f64> {
        let next = self.time_derivative(1);
        let ut = next.eval(x, t)?;
        Ok(match self.pde {
            Pde::Heat => ut - self.derivative(2, x, t)?,
            Pde::Kdv => ut + self.derivative(3, x, t)?,
        })
    }

    /// The zero-limit probes at `x = 1` and `t = 1` and the maximum over the
    /// grid `{0.5, 1, 2} x {0.5, 1}`.
    pub fn probe_report(&self, threshold: f64) -> Result<ProbeReport> {
        let levels = [1e-2, 1e-3, 1e-4];
        let mut t_probes = Vec::new();
        let mut x_probes = Vec::new();
        for &h in &levels {
            t_probes.push((h, self.eval(1.0, h)?));
            x_probes.push((h, self.eval(h, 1.0)?));
        }
        let mut grid_max: f64 = 0.0;
        for x in [0.5, 1.0, 2.0] {
            for t in [0.5, 1.0] {
                grid_max = grid_max.max(self.eval(x, t)?.abs());
            }
        }
        let last = |v: &[(f64, f64)]| v.last().map(|p| p.1.abs()).unwrap_or(0.0);
        Ok(ProbeReport {
            vanishes_at_t0: last(&t_probes) <= threshold,
            vanishes_at_x0: last(&x_probes) <= threshold,
            nonzero: grid_max > threshold,
            t_probes,
            x_probes,
            grid_max,
            threshold,
        })
    }
}

/// `d^n/dt^n` of the solution with zero initial data, zero forcing and
/// boundary datum `g0`, evaluated through the differentiated representation.
pub fn recipe_generate(pde: Pde, g0: &DataProfile, n: usize, cfg: &SolverConfig) -> Result<CounterexampleField> {
    if n == 0 {
        return Err(Error::InvalidParameter("counterexample order n must be >= 1".into()));
    }
    let corner = g0.eval(0.0);
    if corner.abs() <= COMPAT_TOL {
        return Err(Error::RecipeDegenerate(corner));
    }
    let problem = ProblemSpec::new(pde, DataProfile::zero(), g0.clone(), ForcingProfile::zero());
    let cfg = SolverConfig {
        max_order: cfg.max_order.max(pde.order() * n + pde.order()),
        ..*cfg
    };
    Ok(CounterexampleField {
        pde,
        n,
        source: Source::Recipe { problem, cfg },
    })
}

/// Growth of `E(t) = int_0^inf u(x, t)^2 dx` as `t -> 0`.
#[derive(Clone, Debug, Serialize)]
pub struct ViolationReport {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// Least-squares slope of `log E` against `log t`.
    pub exponent: Option<f64>,
    pub violation: bool,
    pub message: String,
}

/// `int_0^inf u(x, t)^2 dx` for a field.
pub fn field_energy(c: &CounterexampleField, t: f64) -> Result<f64> {
    let failure = RefCell::new(None);
    let f = |x: f64| match c.eval(x, t) {
        Ok(v) => v * v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let cfg = QuadConfig::default().with_tol(1e-14);
    let width = 2.0 * t.powf(1.0 / c.pde.order() as f64).max(1e-3);
    let (mut lo, mut hi) = (0.0, width);
    let mut total = 0.0f64;
    for _ in 0..60 {
        let (chunk, _) = integrate_real(f, lo, hi, &cfg.with_tol(1e-14 * total.max(1e-300)))
            .or_else(|_| integrate_real(f, lo, hi, &cfg.with_tol(1e-12 * total.max(1e-300))))?;
        total += chunk;
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        if chunk <= 1e-15 * total || (total == 0.0 && hi > 50.0 * width) {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    Ok(total)
}

/// Fits the energy growth exponent on a log grid of `t` in `[1e-3, t_max]`.
pub fn hypothesis_violation_report(c: &CounterexampleField, t_max: f64) -> Result<ViolationReport> {
    if !(t_max > 1e-3) {
        return Err(Error::InvalidParameter(format!("T must exceed 1e-3, got {t_max}")));
    }
    let count = 13;
    let (a, b) = (1e-3f64.ln(), t_max.ln());
    let times: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    let energies = times
        .iter()
        .map(|&t| field_energy(c, t))
        .collect::<Result<Vec<f64>>>()?;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&energies)
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(ViolationReport {
            times,
            energies,
            exponent: None,
            violation: false,
            message: "no violation detected".into(),
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let violation = slope < -0.05;
    let message = if violation {
        format!("E(t) grows like t^({slope:.3}) as t -> 0: no integrable bound uniform in t")
    } else {
        "no violation detected".into()
    };
    Ok(ViolationReport {
        times,
        energies,
        exponent: Some(slope),
        violation,
        message,
    })
}
