//! Numerical checks of solver output: PDE residuals, boundary and initial
//! recovery, uniform spatial decay, energy identities, and comparison with
//! two independent oracles (an image-kernel formula for heat and a
//! finite-difference solution for either equation).

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::counterexamples::CounterexampleField;
use crate::error::{Error, Result};
use crate::fdm::{fd_solve, fd_weights, FdSolution};
use crate::profiles::{DataProfile, ForcingProfile, Pde, ProblemSpec};
use crate::quadrature::{integrate_real, QuadConfig};
use crate::solvers::{solve_derivative, SolverConfig};

/// A scalar field on the open quarter-plane.
pub trait Field: Sync {
    /// `d^{k+m} u / dx^k dt^m`. Fields without analytic derivatives return
    /// `UnsupportedOrder` for anything but `(0, 0)`.
    fn derivative(&self, k: usize, m: usize, x: f64, t: f64) -> Result<f64>;

    fn value(&self, x: f64, t: f64) -> Result<f64> {
        self.derivative(0, 0, x, t)
    }
}

/// The transform-method solution of a problem.
#[derive(Clone, Debug)]
pub struct UtmField {
    pub problem: ProblemSpec,
    pub cfg: SolverConfig,
}

impl UtmField {
    pub fn new(problem: ProblemSpec) -> Self {
        UtmField {
            problem,
            cfg: SolverConfig::default(),
        }
    }
}

impl Field for UtmField {
    fn derivative(&self, k: usize, m: usize, x: f64, t: f64) -> Result<f64> {
        Ok(solve_derivative(&self.problem, k, m, x, t, &self.cfg)?.value)
    }
}

impl Field for CounterexampleField {
    fn derivative(&self, k: usize, m: usize, x: f64, t: f64) -> Result<f64> {
        if m == 0 {
            CounterexampleField::derivative(self, k, x, t)
        } else {
            CounterexampleField::derivative(&self.time_derivative(m), k, x, t)
        }
    }
}

/// The image-kernel solution of a heat problem.
#[derive(Clone, Debug)]
pub struct HeatOracle {
    pub problem: ProblemSpec,
    pub cfg: QuadConfig,
}

impl HeatOracle {
    pub fn new(problem: ProblemSpec) -> Self {
        HeatOracle {
            problem,
            cfg: QuadConfig::default().with_tol(1e-12),
        }
    }
}

impl Field for HeatOracle {
    fn derivative(&self, k: usize, m: usize, x: f64, t: f64) -> Result<f64> {
        if (k, m) != (0, 0) {
            return Err(Error::UnsupportedOrder(format!("heat oracle provides values only, asked for ({k}, {m})")));
        }
        heat_oracle(&self.problem, x, t, &self.cfg)
    }
}

/// A field given by a closure, with values only.
pub struct FnField<F>(pub F);

impl<F: Fn(f64, f64) -> Result<f64> + Sync> Field for FnField<F> {
    fn derivative(&self, k: usize, m: usize, x: f64, t: f64) -> Result<f64> {
        if (k, m) != (0, 0) {
            return Err(Error::UnsupportedOrder(format!("closure field provides values only, asked for ({k}, {m})")));
        }
        (self.0)(x, t)
    }
}

/// `d^k u / dx^k`, analytic when the field provides it and by 4th-order
/// central differences with step `h` otherwise.
pub fn x_derivative(field: &dyn Field, k: usize, x: f64, t: f64, h: f64) -> Result<f64> {
    match field.derivative(k, 0, x, t) {
        Err(Error::UnsupportedOrder(_)) if k > 0 => {
            let offsets = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
            let radius = if k <= 2 { 2 } else { 3 };
            let used = &offsets[3 - radius..=3 + radius];
            if x - radius as f64 * h <= 0.0 {
                return Err(Error::StencilOutOfDomain { x: x - radius as f64 * h, t });
            }
            let w = fd_weights(used, k);
            let mut acc = 0.0;
            for (s, c) in used.iter().zip(w) {
                acc += c * field.value(x + s * h, t)?;
            }
            Ok(acc / h.powi(k as i32))
        }
        other => other,
    }
}

/// `d u / dt` with the same fallback as [`x_derivative`].
pub fn t_derivative(field: &dyn Field, x: f64, t: f64, h: f64) -> Result<f64> {
    match field.derivative(0, 1, x, t) {
        Err(Error::UnsupportedOrder(_)) => {
            if t - 2.0 * h <= 0.0 {
                return Err(Error::StencilOutOfDomain { x, t: t - 2.0 * h });
            }
            let v = |s: f64| field.value(x, t + s * h);
            Ok((v(-2.0)? - 8.0 * v(-1.0)? + 8.0 * v(1.0)? - v(2.0)?) / (12.0 * h))
        }
        other => other,
    }
}

/// One measured quantity. `threshold = None` marks an informational value.
#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub threshold: Option<f64>,
}

impl Measurement {
    pub fn new(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Measurement {
            name: name.into(),
            value,
            threshold: Some(threshold),
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Measurement {
            name: name.into(),
            value,
            threshold: None,
        }
    }

    pub fn passes(&self) -> bool {
        match self.threshold {
            Some(th) => self.value <= th,
            None => true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub grid: String,
    pub measurements: Vec<Measurement>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, grid: impl Into<String>, measurements: Vec<Measurement>) -> Self {
        let pass = measurements.iter().all(Measurement::passes);
        VerificationReport {
            check: check.into(),
            grid: grid.into(),
            measurements,
            pass,
        }
    }

    /// A report for a check that could not be carried out.
    pub fn failed(check: impl Into<String>, err: &Error) -> Self {
        VerificationReport {
            check: check.into(),
            grid: format!("error: {err}"),
            measurements: vec![],
            pass: false,
        }
    }
}

/// Central-difference residual `u_t - u_xx - f` (heat) or `u_t + u_xxx - f`
/// (KdV) with step `h` in both variables.
pub fn pde_residual(field: &dyn Field, pde: Pde, f: &ForcingProfile, x: f64, t: f64, h: f64) -> Result<f64> {
    let reach = match pde {
        Pde::Heat => h,
        Pde::Kdv => 2.0 * h,
    };
    if x - reach <= 0.0 || t - h <= 0.0 {
        return Err(Error::StencilOutOfDomain {
            x: x - reach,
            t: t - h,
        });
    }
    let u = |dx: f64, dt: f64| field.value(x + dx * h, t + dt * h);
    let ut = (u(0.0, 1.0)? - u(0.0, -1.0)?) / (2.0 * h);
    let spatial = match pde {
        Pde::Heat => -(u(1.0, 0.0)? - 2.0 * u(0.0, 0.0)? + u(-1.0, 0.0)?) / (h * h),
        Pde::Kdv => (u(2.0, 0.0)? - 2.0 * u(1.0, 0.0)? + 2.0 * u(-1.0, 0.0)? - u(-2.0, 0.0)?) / (2.0 * h * h * h),
    };
    Ok(ut + spatial - f.eval(x, t))
}

/// The same residual from analytic derivatives.
pub fn analytic_residual(field: &dyn Field, pde: Pde, f: &ForcingProfile, x: f64, t: f64) -> Result<f64> {
    let ut = field.derivative(0, 1, x, t)?;
    Ok(match pde {
        Pde::Heat => ut - field.derivative(2, 0, x, t)?,
        Pde::Kdv => ut + field.derivative(3, 0, x, t)?,
    } - f.eval(x, t))
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualConvergence {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `log2(r(h) / r(h/2))` for the pairs above the noise floor.
    pub orders: Vec<f64>,
    pub noise_floor: f64,
}

impl ResidualConvergence {
    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().copied().reduce(f64::min)
    }
}

/// Residuals for `h0, h0/2, ...` (`levels` values) and the observed order
/// between consecutive levels while both stay above `noise_floor`, taken as
/// `value_noise / h^p` with `p` the order of the PDE.
pub fn residual_convergence(
    field: &dyn Field,
    pde: Pde,
    f: &ForcingProfile,
    x: f64,
    t: f64,
    h0: f64,
    levels: usize,
    value_noise: f64,
) -> Result<ResidualConvergence> {
    let steps: Vec<f64> = (0..levels).map(|i| h0 / 2f64.powi(i as i32)).collect();
    let residuals = steps
        .iter()
        .map(|&h| pde_residual(field, pde, f, x, t, h).map(f64::abs))
        .collect::<Result<Vec<f64>>>()?;
    let floor_at = |h: f64| value_noise / h.powi(pde.order() as i32);
    let mut orders = Vec::new();
    for i in 0..levels.saturating_sub(1) {
        if residuals[i + 1] > 10.0 * floor_at(steps[i + 1]) {
            orders.push((residuals[i] / residuals[i + 1]).log2());
        }
    }
    Ok(ResidualConvergence {
        noise_floor: floor_at(*steps.last().unwrap_or(&h0)),
        steps,
        residuals,
        orders,
    })
}

fn max_ratio(errors: &[f64]) -> f64 {
    errors
        .windows(2)
        .map(|w| if w[1] <= 1e-14 { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max)
}

/// Boundary and initial recovery along decreasing probe sequences.
///
/// For each probe `s`, measures `max_t |u(s, t) - g0(t)|` over `t_grid` and
/// `max_x |u(x, s) - u0(x)|` over `x_grid`. Passes when both sequences
/// decrease and their last entries are at most `threshold`.
pub fn boundary_recovery(
    field: &dyn Field,
    p: &ProblemSpec,
    probes: &[f64],
    x_grid: &[f64],
    t_grid: &[f64],
    threshold: f64,
) -> Result<VerificationReport> {
    if probes.windows(2).any(|w| w[1] >= w[0]) || probes.iter().any(|&s| s <= 0.0) {
        return Err(Error::InvalidParameter("probe sequences must be positive and decreasing".into()));
    }
    let mut boundary = Vec::new();
    let mut initial = Vec::new();
    for &s in probes {
        let mut b: f64 = 0.0;
        for &t in t_grid {
            b = b.max((field.value(s, t)? - p.g0.eval(t)).abs());
        }
        let mut i: f64 = 0.0;
        for &x in x_grid {
            i = i.max((field.value(x, s)? - p.u0.eval(x)).abs());
        }
        boundary.push(b);
        initial.push(i);
    }
    let mut m = Vec::new();
    for (k, &s) in probes.iter().enumerate() {
        m.push(Measurement::info(format!("boundary error at x = {s:e}"), boundary[k]));
        m.push(Measurement::info(format!("initial error at t = {s:e}"), initial[k]));
    }
    m.push(Measurement::new("boundary error at finest probe", *boundary.last().unwrap_or(&0.0), threshold));
    m.push(Measurement::new("initial error at finest probe", *initial.last().unwrap_or(&0.0), threshold));
    m.push(Measurement::new("boundary error growth ratio", max_ratio(&boundary), 1.0));
    m.push(Measurement::new("initial error growth ratio", max_ratio(&initial), 1.0));
    Ok(VerificationReport::new(
        "recovery",
        format!("probes {probes:?}, x grid {x_grid:?}, t grid {t_grid:?}"),
        m,
    ))
}

/// Suprema of `|x^l d^{k+m}u/dx^k dt^m|` over a log-spaced `t` grid.
#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub k: usize,
    pub m: usize,
    pub l: i32,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// One supremum over `t_grid` per entry of `x_grid`.
    pub sup_per_x: Vec<f64>,
    pub sup: f64,
}

impl DecayProfile {
    pub fn is_decreasing(&self) -> bool {
        self.sup_per_x.windows(2).all(|w| w[1] < w[0])
    }
}

/// Log-spaced grid from `lo` to `hi` with `n` points.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Decay suprema with `t` from `1e-3` to `t_max` on 13 log-spaced points.
pub fn decay_sup(field: &dyn Field, k: usize, m: usize, l: i32, t_max: f64, x_grid: &[f64]) -> Result<DecayProfile> {
    let t_grid = log_grid(1e-3, t_max, 13);
    let pts: Vec<(usize, f64, f64)> = x_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| t_grid.iter().map(move |&t| (i, x, t)))
        .collect();
    let values = pts
        .par_iter()
        .map(|&(_, x, t)| field.derivative(k, m, x, t).map(|v| (x.powi(l) * v).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let mut sup_per_x = vec![0.0f64; x_grid.len()];
    for ((i, _, _), v) in pts.iter().zip(values) {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite derivative value in decay check at x = {}", x_grid[*i])));
        }
        sup_per_x[*i] = sup_per_x[*i].max(v);
    }
    Ok(DecayProfile {
        k,
        m,
        l,
        x_grid: x_grid.to_vec(),
        sup: sup_per_x.iter().copied().fold(0.0, f64::max),
        t_grid,
        sup_per_x,
    })
}

/// `E(t) = int W^2`, its time derivative, and the boundary dissipation term
/// (`W_x(0, t)^2` for KdV, `2 int W_x^2` for heat).
#[derive(Clone, Debug, Serialize)]
pub struct EnergyTrace {
    pub pde: Pde,
    pub length: f64,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub energy_rate: Vec<f64>,
    pub dissipation: Vec<f64>,
}

impl EnergyTrace {
    /// `max_t |dE/dt + D| / max(|dE/dt|, 1)`.
    pub fn identity_defect(&self) -> f64 {
        self.energy_rate
            .iter()
            .zip(&self.dissipation)
            .map(|(r, d)| (r + d).abs() / r.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
            && self.energy_rate.iter().all(|r| *r <= 1e-12)
    }

    pub fn report(&self, tolerance: f64) -> VerificationReport {
        let worst_rise = self
            .energy
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        VerificationReport::new(
            "energy",
            format!("{} times in [{}, {}], L = {}", self.times.len(), self.times[0], self.times[self.times.len() - 1], self.length),
            vec![
                Measurement::new("energy identity defect", self.identity_defect(), tolerance),
                Measurement::new("largest energy increase between samples", worst_rise.max(0.0), 0.0),
            ],
        )
    }

    /// Trace computed on the nodes of a finite-difference solution with
    /// times in `[t_lo, t_hi]`.
    pub fn from_fd(sol: &FdSolution, pde: Pde, t_lo: f64, t_hi: f64) -> Result<Self> {
        let h = sol.xs[1] - sol.xs[0];
        let k = sol.ts[1] - sol.ts[0];
        let energy_at = |u: &[f64]| simpson(u.iter().map(|v| v * v).collect::<Vec<f64>>().as_slice(), h);
        let flux_w = fd_weights(&[0.0, 1.0, 2.0, 3.0], 1);
        let mut out = EnergyTrace {
            pde,
            length: *sol.xs.last().unwrap_or(&0.0),
            times: vec![],
            energy: vec![],
            energy_rate: vec![],
            dissipation: vec![],
        };
        for n in 1..sol.ts.len() - 1 {
            let t = sol.ts[n];
            if t < t_lo - 1e-12 || t > t_hi + 1e-12 {
                continue;
            }
            let u = &sol.values[n];
            let rate = (energy_at(&sol.values[n + 1]) - energy_at(&sol.values[n - 1])) / (2.0 * k);
            let d = match pde {
                Pde::Kdv => {
                    let wx: f64 = flux_w.iter().zip(u).map(|(c, v)| c * v).sum::<f64>() / h;
                    wx * wx
                }
                Pde::Heat => {
                    let grad: Vec<f64> = (0..u.len())
                        .map(|i| {
                            if i == 0 {
                                (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
                            } else if i == u.len() - 1 {
                                (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * h)
                            } else {
                                (u[i + 1] - u[i - 1]) / (2.0 * h)
                            }
                        })
                        .map(|g| g * g)
                        .collect();
                    2.0 * simpson(&grad, h)
                }
            };
            out.times.push(t);
            out.energy.push(energy_at(u));
            out.energy_rate.push(rate);
            out.dissipation.push(d);
        }
        if out.times.is_empty() {
            return Err(Error::InvalidParameter(format!("no grid times in [{t_lo}, {t_hi}]")));
        }
        Ok(out)
    }
}

/// Composite Simpson rule on equally spaced samples, with a trapezoid panel
/// when the number of intervals is odd.
fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    let even = n - n % 2;
    let mut s = 0.0;
    for i in (0..even).step_by(2) {
        s += v[i] + 4.0 * v[i + 1] + v[i + 2];
    }
    s *= h / 3.0;
    if n % 2 == 1 {
        s += 0.5 * h * (v[n - 1] + v[n]);
    }
    s
}

fn field_integral(g: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let failure = RefCell::new(None);
    let f = |x: f64| match g(x) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let (v, _) = integrate_real(f, a, b, &QuadConfig::default().with_tol(1e-13))?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Energy trace of a field with homogeneous Dirichlet data and no forcing,
/// integrating `x` over `[0, L]` by quadrature.
pub fn energy_trace(field: &dyn Field, pde: Pde, times: &[f64], length: f64) -> Result<EnergyTrace> {
    const X0: f64 = 1e-9;
    const TAIL: f64 = 1e-10;
    let h_x = 1e-3;
    let energy = |t: f64| field_integral(|x| field.value(x, t).map(|v| v * v), X0, length);
    let mut out = EnergyTrace {
        pde,
        length,
        times: times.to_vec(),
        energy: vec![],
        energy_rate: vec![],
        dissipation: vec![],
    };
    for &t in times {
        let tail = field_integral(|x| field.value(x, t).map(|v| v * v), length, 2.0 * length)?;
        if tail > TAIL {
            return Err(Error::EnlargeDomain(length));
        }
        let dt = (t / 8.0).min(1e-2);
        let e = |s: f64| energy(t + s * dt);
        let rate = (e(-2.0)? - 8.0 * e(-1.0)? + 8.0 * e(1.0)? - e(2.0)?) / (12.0 * dt);
        let d = match pde {
            Pde::Kdv => {
                // W(0, t) = 0, so the 4-point one-sided stencil needs three values.
                let w = fd_weights(&[0.0, 1.0, 2.0, 3.0], 1);
                let mut wx = 0.0;
                for j in 1..4 {
                    wx += w[j] * field.value(j as f64 * h_x, t)?;
                }
                let wx = wx / h_x;
                wx * wx
            }
            Pde::Heat => {
                let grad = |x: f64| -> Result<f64> {
                    let h = (1e-4f64).min(x / 3.0);
                    match field.derivative(1, 0, x, t) {
                        Err(Error::UnsupportedOrder(_)) => {
                            Ok((field.value(x + h, t)? - field.value(x - h, t)?) / (2.0 * h))
                        }
                        other => other,
                    }
                };
                2.0 * field_integral(|x| grad(x).map(|g| g * g), 1e-6, length)?
            }
        };
        out.energy.push(energy(t)?);
        out.energy_rate.push(rate);
        out.dissipation.push(d);
    }
    Ok(out)
}

/// Half-line heat kernel average `int_0^inf [K(x-y, s) - K(x+y, s)] a(y) dy`
/// written with `y = x + 2 sqrt(s) z` and `y = 2 sqrt(s) z - x`.
fn image_average(a: &DataProfile, x: f64, s: f64, cfg: &QuadConfig) -> Result<f64> {
    const Z_MAX: f64 = 8.0;
    let r = 2.0 * s.sqrt();
    let lo = (-x / r).max(-Z_MAX);
    let direct = if lo < Z_MAX {
        integrate_real(|z| (-z * z).exp() * a.eval(x + r * z), lo, Z_MAX, cfg)?.0
    } else {
        0.0
    };
    let lo = x / r;
    let image = if lo < Z_MAX {
        integrate_real(|z| (-z * z).exp() * a.eval(r * z - x), lo, Z_MAX, cfg)?.0
    } else {
        0.0
    };
    Ok((direct - image) / PI.sqrt())
}

/// Classical image-method solution of the heat problem: the odd extension of
/// `u0` against the Gauss kernel, the boundary kernel
/// `x / sqrt(4 pi s^3) e^{-x^2/4s}` against `g0`, and the Duhamel integral
/// of the forcing with the half-line kernel.
pub fn heat_oracle(p: &ProblemSpec, x: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    if p.pde != Pde::Heat {
        return Err(Error::InvalidParameter(format!("heat oracle called for {}", p.pde)));
    }
    if !(x > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter(format!("heat oracle needs x > 0, t > 0; got ({x}, {t})")));
    }
    let mut u = 0.0;
    if !p.u0.is_zero() {
        u += image_average(&p.u0, x, t, cfg)?;
    }
    if !p.g0.is_zero() {
        // sigma = x / (2 sqrt(t - s)) turns the boundary kernel into 2/sqrt(pi) e^{-sigma^2}.
        let lo = x / (2.0 * t.sqrt());
        let hi = lo.max(0.0) + 8.0;
        let (v, _) = integrate_real(
            |sig: f64| (-sig * sig).exp() * p.g0.eval(t - x * x / (4.0 * sig * sig)),
            lo,
            hi,
            cfg,
        )?;
        u += 2.0 / PI.sqrt() * v;
    }
    for (space, time) in p.f.terms() {
        let failure = RefCell::new(None);
        let g = |s: f64| match image_average(space, x, t - s, cfg) {
            Ok(v) => v * time.eval(s),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let (v, _) = integrate_real(g, 0.0, t, &cfg.with_tol(cfg.tol * 10.0))?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        u += v;
    }
    Ok(u)
}

/// Finite-difference KdV solution on `[0, L] x [0, T]` with a Richardson
/// error estimate from a run with both steps halved.
pub fn kdv_fd_oracle(p: &ProblemSpec, length: f64, nx: usize, nt: usize, t_end: f64) -> Result<FdSolution> {
    fd_oracle(p, Pde::Kdv, length, nx, nt, t_end)
}

/// The heat variant of the finite-difference oracle.
pub fn heat_fd_oracle(p: &ProblemSpec, length: f64, nx: usize, nt: usize, t_end: f64) -> Result<FdSolution> {
    fd_oracle(p, Pde::Heat, length, nx, nt, t_end)
}

fn fd_oracle(p: &ProblemSpec, pde: Pde, length: f64, nx: usize, nt: usize, t_end: f64) -> Result<FdSolution> {
    if p.pde != pde {
        return Err(Error::InvalidParameter(format!("{pde} oracle called for {}", p.pde)));
    }
    match p.u0.support_bound(1e-6) {
        Some(b) if b <= 0.5 * length => {}
        _ => {
            return Err(Error::InvalidParameter(format!(
                "initial datum is not negligible beyond L/2 = {}",
                0.5 * length
            )))
        }
    }
    fd_solve(p, length, nx, nt, t_end)
}

/// Maximum discrepancy between the solver and the heat oracles on a grid.
pub fn heat_oracle_comparison(p: &ProblemSpec, xs: &[f64], ts: &[f64], cfg: &SolverConfig) -> Result<VerificationReport> {
    let oracle = HeatOracle::new(p.clone());
    let utm = UtmField {
        problem: p.clone(),
        cfg: *cfg,
    };
    let pts: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ts.iter().map(move |&t| (x, t))).collect();
    let diffs = pts
        .par_iter()
        .map(|&(x, t)| Ok((utm.value(x, t)? - oracle.value(x, t)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let t_end = ts.iter().copied().fold(0.0, f64::max);
    let length = 30.0f64.max(2.0 * xs.iter().copied().fold(0.0, f64::max));
    let fd = heat_fd_oracle(p, length, (length * 100.0) as usize, (t_end * 1000.0).ceil() as usize, t_end)?;
    let mut fd_diff: f64 = 0.0;
    for &(x, t) in &pts {
        fd_diff = fd_diff.max((utm.value(x, t)? - fd.at(x, t).0).abs());
    }
    Ok(VerificationReport::new(
        "oracle",
        format!("x {xs:?} x t {ts:?}"),
        vec![
            Measurement::new("max |UTM - image oracle|", diffs.iter().copied().fold(0.0, f64::max), 1e-6),
            Measurement::new("max |UTM - finite differences|", fd_diff, 1e-3),
            Measurement::info("finite-difference Richardson estimate", fd.max_error_estimate()),
        ],
    ))
}

/// Relative discrepancy between the KdV solver and the finite-difference
/// oracle at the given points. The grid is `L = 30`, `h = 0.01`, `k = 1e-3`.
pub fn kdv_oracle_comparison(p: &ProblemSpec, points: &[(f64, f64)], cfg: &SolverConfig) -> Result<VerificationReport> {
    let t_end = points.iter().map(|pt| pt.1).fold(0.0, f64::max);
    let fd = kdv_fd_oracle(p, 30.0, 3000, (t_end * 1000.0).ceil() as usize, t_end)?;
    let mut m = Vec::new();
    let mut worst_rel: f64 = 0.0;
    let mut fd_est: f64 = 0.0;
    let mut utm_est: f64 = 0.0;
    for &(x, t) in points {
        let s = solve_derivative(p, 0, 0, x, t, cfg)?;
        let (v, e) = fd.at(x, t);
        let rel = (s.value - v).abs() / s.value.abs().max(1e-12);
        m.push(Measurement::info(format!("relative discrepancy at ({x}, {t})"), rel));
        worst_rel = worst_rel.max(rel);
        fd_est = fd_est.max(e);
        utm_est = utm_est.max(s.error_estimate);
    }
    m.push(Measurement::new("max relative discrepancy", worst_rel, 1e-2));
    m.push(Measurement::info("finite-difference Richardson estimate", fd_est));
    // The oracle dominates when the solver's own estimate is far below it.
    m.push(Measurement::new("solver estimate / oracle estimate", utm_est / fd_est.max(1e-300), 1e-2));
    Ok(VerificationReport::new("oracle", format!("points {points:?}"), m))
}

/// Names accepted by [`run_checks`].
pub const CHECKS: [&str; 5] = ["decay", "energy", "oracle", "recovery", "residual"];

/// Run the named checks for a problem in parallel; reports come back sorted
/// by check name.
pub fn run_checks(p: &ProblemSpec, checks: &[String], cfg: &SolverConfig) -> Result<Vec<VerificationReport>> {
    for c in checks {
        if !CHECKS.contains(&c.as_str()) {
            return Err(Error::Config(format!("unknown check `{c}`; expected one of {CHECKS:?}")));
        }
    }
    let mut names: Vec<&str> = checks.iter().map(String::as_str).collect();
    names.sort_unstable();
    names.dedup();
    let reports = names
        .par_iter()
        .map(|&name| run_check(p, name, cfg).unwrap_or_else(|e| VerificationReport::failed(name, &e)))
        .collect();
    Ok(reports)
}

fn run_check(p: &ProblemSpec, name: &str, cfg: &SolverConfig) -> Result<VerificationReport> {
    let field = UtmField {
        problem: p.clone(),
        cfg: *cfg,
    };
    match name {
        "residual" => {
            let grid = [0.5, 1.0, 1.5, 2.0];
            let mut worst: f64 = 0.0;
            for &x in &grid {
                for &t in &grid {
                    worst = worst.max(analytic_residual(&field, p.pde, &p.f, x, t)?.abs());
                }
            }
            let conv = residual_convergence(&field, p.pde, &p.f, 1.0, 1.0, 0.1, 4, 1e-13)?;
            let mut m = vec![Measurement::new("max analytic residual", worst, 1e-6)];
            if let Some(order) = conv.min_order() {
                m.push(Measurement::new("finite-difference order deficit", 1.8 - order, 0.0));
            }
            Ok(VerificationReport::new("residual", format!("{grid:?} squared"), m))
        }
        "recovery" => boundary_recovery(&field, p, &[1e-1, 1e-2, 1e-3], &[0.5, 1.0, 2.0], &[0.25, 0.5, 1.0], 1e-2),
        "decay" => {
            let mut m = Vec::new();
            for (k, mm, l) in [(0, 0, 0), (0, 0, 2), (1, 0, 1), (0, 1, 0)] {
                let d = decay_sup(&field, k, mm, l, 1.0, &[5.0, 10.0, 20.0])?;
                m.push(Measurement::info(format!("sup (k, m, l) = ({k}, {mm}, {l})"), d.sup));
                m.push(Measurement::new(
                    format!("growth along x for (k, m, l) = ({k}, {mm}, {l})"),
                    max_ratio(&d.sup_per_x),
                    1.0,
                ));
            }
            Ok(VerificationReport::new("decay", "x in {5, 10, 20}, t in [1e-3, 1]", m))
        }
        "energy" => {
            let w = ProblemSpec::new(p.pde, p.u0.clone(), DataProfile::zero(), ForcingProfile::zero());
            let trace = match p.pde {
                Pde::Kdv => EnergyTrace::from_fd(&kdv_fd_oracle(&w, 30.0, 3000, 1000, 1.0)?, Pde::Kdv, 0.2, 1.0)?,
                Pde::Heat => energy_trace(&HeatOracle::new(w), Pde::Heat, &[0.2, 0.4, 0.6, 0.8, 1.0], 30.0)?,
            };
            let mut r = trace.report(1e-3);
            r.grid = format!("homogeneous-Dirichlet part, {}", r.grid);
            Ok(r)
        }
        "oracle" => match p.pde {
            Pde::Heat => heat_oracle_comparison(p, &[0.1, 0.5, 1.0, 2.0, 3.0], &[0.1, 0.5, 1.0, 1.5, 2.0], cfg),
            Pde::Kdv => kdv_oracle_comparison(p, &[(0.5, 0.5), (1.0, 0.5), (2.0, 1.0)], cfg),
        },
        _ => Err(Error::Config(format!("unknown check `{name}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use errorfunctions::RealErrorFunctions;

    fn step() -> ProblemSpec {
        ProblemSpec::new(Pde::Heat, DataProfile::zero(), DataProfile::constant(1.0), ForcingProfile::zero())
    }

    fn exp_decay_heat() -> ProblemSpec {
        ProblemSpec::new(Pde::Heat, DataProfile::exp_decay(1.0), DataProfile::exp_of_t(-1.0), ForcingProfile::zero())
    }

    #[test]
    fn oracle_step_datum_is_erfc() {
        let cfg = QuadConfig::default().with_tol(1e-12);
        for (x, t) in [(0.3, 0.2), (1.0, 1.0), (2.5, 0.7)] {
            let v = heat_oracle(&step(), x, t, &cfg).unwrap();
            assert!((v - RealErrorFunctions::erfc(x / (2.0 * t.sqrt()))).abs() < 1e-11);
        }
        assert_eq!(heat_oracle(&ProblemSpec::zero(Pde::Heat), 1.0, 1.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn boundary_kernel_is_first_counterexample() {
        // d/dt erfc(x / 2 sqrt t) is the boundary kernel.
        let h = 1e-5;
        let cfg = QuadConfig::default().with_tol(1e-13);
        let d = (heat_oracle(&step(), 1.0, 1.0 + h, &cfg).unwrap() - heat_oracle(&step(), 1.0, 1.0 - h, &cfg).unwrap())
            / (2.0 * h);
        let u1 = crate::counterexamples::heat_counterexample(1, 1.0, 1.0).unwrap();
        assert!((d - u1).abs() < 1e-7);
    }

    #[test]
    fn oracle_matches_solver_with_forcing() {
        let f = ForcingProfile::separable(DataProfile::gaussian(1.0), DataProfile::sin_of_t(2.0));
        let p = ProblemSpec::new(Pde::Heat, DataProfile::exp_decay(1.0), DataProfile::exp_of_t(-1.0), f);
        let cfg = QuadConfig::default().with_tol(1e-12);
        for (x, t) in [(0.4, 0.3), (1.5, 1.2)] {
            let a = heat_oracle(&p, x, t, &cfg).unwrap();
            let b = solve_derivative(&p, 0, 0, x, t, &SolverConfig::default()).unwrap().value;
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn residuals() {
        let field = UtmField::new(exp_decay_heat());
        let r = pde_residual(&field, Pde::Heat, &ForcingProfile::zero(), 1.0, 1.0, 1e-3).unwrap();
        assert!(r.abs() <= 1e-5);
        let zero = FnField(|_, _| Ok(0.0));
        assert_eq!(pde_residual(&zero, Pde::Kdv, &ForcingProfile::zero(), 1.0, 1.0, 1e-3).unwrap(), 0.0);
        let ce = CounterexampleField::kdv(1).unwrap();
        assert!(pde_residual(&ce, Pde::Kdv, &ForcingProfile::zero(), 1.0, 0.5, 1e-3).unwrap().abs() <= 1e-4);
        assert!(matches!(
            pde_residual(&zero, Pde::Kdv, &ForcingProfile::zero(), 1e-3, 1.0, 1e-3),
            Err(Error::StencilOutOfDomain { .. })
        ));
        let conv = residual_convergence(&ce, Pde::Kdv, &ForcingProfile::zero(), 1.0, 0.5, 0.1, 4, 1e-14).unwrap();
        assert!(conv.min_order().unwrap() >= 1.8, "{conv:?}");
    }

    #[test]
    fn recovery_of_step_datum() {
        let field = UtmField::new(step());
        let v = field.value(1e-3, 1.0).unwrap();
        assert!((v - 1.0).abs() <= 1e-3);
        let zero = FnField(|_, _| Ok(0.0));
        let r = boundary_recovery(&zero, &ProblemSpec::zero(Pde::Kdv), &[1e-1, 1e-2, 1e-3], &[1.0], &[1.0], 1e-2).unwrap();
        assert!(r.pass);
        assert!(r.measurements.iter().all(|m| m.value == 0.0));
    }

    #[test]
    fn decay_of_zero_field() {
        let zero = FnField(|_, _| Ok(0.0));
        let d = decay_sup(&zero, 0, 0, 2, 1.0, &[5.0, 10.0]).unwrap();
        assert_eq!(d.sup, 0.0);
    }

    #[test]
    fn heat_energy_is_dissipated() {
        let w = ProblemSpec::new(Pde::Heat, DataProfile::bump(0.5, 2.5), DataProfile::zero(), ForcingProfile::zero());
        let trace = energy_trace(&HeatOracle::new(w), Pde::Heat, &[0.2, 0.5, 1.0], 30.0).unwrap();
        assert!(trace.is_nonincreasing());
        assert!(trace.identity_defect() < 1e-3, "{trace:?}");
        let zero = energy_trace(&FnField(|_, _| Ok(0.0)), Pde::Kdv, &[0.5], 10.0).unwrap();
        assert_eq!(zero.energy, vec![0.0]);
        assert_eq!(zero.dissipation, vec![0.0]);
    }

    #[test]
    fn kdv_energy_identity_on_fd_grid() {
        let w = ProblemSpec::new(Pde::Kdv, DataProfile::bump(1.0, 3.0), DataProfile::zero(), ForcingProfile::zero());
        let sol = kdv_fd_oracle(&w, 30.0, 3000, 1000, 1.0).unwrap();
        let trace = EnergyTrace::from_fd(&sol, Pde::Kdv, 0.2, 1.0).unwrap();
        assert!(trace.identity_defect() < 1e-3, "{}", trace.identity_defect());
        assert!(trace.energy.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn kdv_solver_agrees_with_fd() {
        let p = ProblemSpec::new(Pde::Kdv, DataProfile::exp_decay(1.0), DataProfile::zero(), ForcingProfile::zero());
        let r = kdv_oracle_comparison(&p, &[(1.0, 0.5)], &SolverConfig::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn unknown_check_is_rejected() {
        assert!(matches!(
            run_checks(&step(), &["bogus".into()], &SolverConfig::default()),
            Err(Error::Config(_))
        ));
    }
}
