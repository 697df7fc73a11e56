//! Contour-integral representations of the quarter-plane solutions.
//!
//! Every term of the representation has the shape
//!
//! ```text
//! int_C e^{i lambda x} (i lambda)^k A(lambda) B(lambda, t) d lambda
//! ```
//!
//! where `A` is a combination of half-line transforms of spatial data and `B`
//! carries the time dependence. Terms on the real line are split into a
//! central piece, a remainder with the large-`lambda` expansion of `A`
//! subtracted, and the expansion itself on a path lifted into the upper
//! half-plane. Terms on the boundary contour are rotated towards the real
//! axis where the integrand is analytic; for the KdV transforms at rotated
//! arguments the same three-way split is used instead.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::contours::{Contour, Segment};
use crate::error::{Error, Result};
use crate::profiles::{DataProfile, Pde, ProblemSpec};
use crate::quadrature::{integrate, Integrand, QuadConfig, QuadratureResult};
use crate::transforms::{damped_time_transform, damped_time_transform_dt, half_line_fourier, Dispersion};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The primitive cube roots of unity used by the KdV representation.
#[derive(Clone, Copy, Debug)]
pub struct CubeRoots;

impl CubeRoots {
    pub const ALPHA: Complex64 = Complex64 {
        re: -0.5,
        im: 0.866_025_403_784_438_6,
    };
    pub const ALPHA2: Complex64 = Complex64 {
        re: -0.5,
        im: -0.866_025_403_784_438_6,
    };
}

/// One evaluated point of the field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub x: f64,
    pub t: f64,
    pub value: f64,
    pub error_estimate: f64,
    /// Signed contributions to `2 pi U`, in the order real-line data term,
    /// contour data term, boundary term, real-line forcing term, contour
    /// forcing term.
    pub term_breakdown: [Complex64; 5],
}

impl FieldSample {
    pub fn total(&self) -> Complex64 {
        self.term_breakdown.iter().sum()
    }

    /// `|Im(2 pi U)|`, which vanishes for real data up to quadrature error.
    pub fn imaginary_residue(&self) -> f64 {
        self.total().im.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub quad: QuadConfig,
    /// Number of terms `M` in the boundary-value expansions.
    pub expansion_order: usize,
    /// Radius separating the central piece from the expanded tails.
    pub rho: f64,
    /// Rotation applied to infinite rays towards the real axis.
    pub tilt: f64,
    /// Largest admissible spatial-equivalent derivative order.
    pub max_order: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            quad: QuadConfig::default().with_tol(1e-10),
            expansion_order: 12,
            rho: 2.0,
            tilt: PI / 12.0,
            max_order: 6,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(self, tol: f64) -> Self {
        SolverConfig {
            quad: self.quad.with_tol(tol),
            ..self
        }
    }
}

/// Spatial factor `A(lambda) = sum_p w_p X_hat(s_p lambda)`.
struct Spatial<'a> {
    profile: &'a DataProfile,
    parts: Vec<(Complex64, Complex64)>,
}

impl<'a> Spatial<'a> {
    fn plain(profile: &'a DataProfile) -> Self {
        Spatial {
            profile,
            parts: vec![(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))],
        }
    }

    fn reflected(profile: &'a DataProfile) -> Self {
        Spatial {
            profile,
            parts: vec![(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))],
        }
    }

    fn rotated(profile: &'a DataProfile) -> Self {
        Spatial {
            profile,
            parts: vec![
                (CubeRoots::ALPHA, CubeRoots::ALPHA),
                (CubeRoots::ALPHA2, CubeRoots::ALPHA2),
            ],
        }
    }

    /// Coefficients `e_j` with `sum_p w_p S(s_p lambda) = sum_j e_j / (i lambda)^j`.
    fn expansion(&self, m: usize) -> Vec<Complex64> {
        let c = self.profile.derivatives(0.0, m);
        (1..=m)
            .map(|j| {
                let d: Complex64 = self
                    .parts
                    .iter()
                    .map(|(w, s)| w * s.powi(-(j as i32)))
                    .sum();
                d * c[j - 1]
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Time<'a> {
    /// `(-omega)^m e^{-omega t}`
    Free,
    /// `d^m/dt^m` of the damped transform of a forcing time factor.
    Forcing(&'a DataProfile),
    /// `c(lambda) (-omega)^m e^{-omega t} g0_tilde(omega, t)`.
    Boundary(&'a DataProfile),
}

struct Ctx<'a> {
    disp: Dispersion,
    x: f64,
    t: f64,
    k: usize,
    m: usize,
    cfg: &'a SolverConfig,
    failure: Mutex<Option<Error>>,
}

/// Extra expansion terms used to evaluate the remainder far out.
const TAIL_TERMS: usize = 10;

/// A truncated expansion `S(lambda) = sum_{j<=m} e_j / (i lambda)^j` together
/// with further terms that replace `A - S` beyond `switch`, where forming the
/// difference directly would only return roundoff.
struct Expansion {
    e: Vec<Complex64>,
    m: usize,
    switch: f64,
}

impl Expansion {
    fn new(sp: &Spatial<'_>, m: usize) -> Self {
        let e = sp.expansion(m + TAIL_TERMS);
        let n = e.len();
        let scale = e.iter().map(|c| c.norm()).find(|v| *v > 0.0).unwrap_or(0.0);
        let next = e[n - 3..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let switch = if scale == 0.0 {
            f64::INFINITY
        } else if next == 0.0 {
            0.0
        } else {
            // |e_n| / L^n <= eps |e_first| / L
            (next / (f64::EPSILON * scale)).powf(1.0 / (n as f64 - 1.0))
        };
        Expansion { e, m, switch }
    }

    fn is_zero(&self) -> bool {
        self.e[..self.m].iter().all(|c| c.norm() == 0.0)
    }

    fn head(&self, l: Complex64) -> Complex64 {
        eval_expansion(&self.e[..self.m], l)
    }

    fn remainder(&self, full: impl Fn() -> Complex64, l: Complex64) -> Complex64 {
        if l.norm() >= self.switch {
            (1.0 / (I * l)).powu(self.m as u32) * eval_expansion(&self.e[self.m..], l)
        } else {
            full() - self.head(l)
        }
    }
}

fn eval_expansion(e: &[Complex64], lambda: Complex64) -> Complex64 {
    let inv = 1.0 / (I * lambda);
    let mut acc = Complex64::new(0.0, 0.0);
    for c in e.iter().rev() {
        acc = (acc + c) * inv;
    }
    acc
}

impl<'a> Ctx<'a> {
    fn pde(&self) -> Pde {
        self.disp.pde
    }

    fn degree(&self) -> usize {
        self.k + self.pde().order() * self.m
    }

    fn m_eff(&self) -> usize {
        self.cfg.expansion_order + self.degree()
    }

    fn record(&self, e: Error) {
        let mut slot = self.failure.lock().unwrap_or_else(|p| p.into_inner());
        if slot.is_none() {
            *slot = Some(e);
        }
    }

    fn take_failure(&self) -> Option<Error> {
        self.failure
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .take()
    }

    fn kernel(&self, l: Complex64) -> Complex64 {
        (I * l * self.x).exp() * (I * l).powu(self.k as u32)
    }

    fn phase_rate(&self, l: Complex64) -> f64 {
        // Once e^{-omega t} is negligible only e^{i lambda x} oscillates.
        if self.disp.omega(l).re * self.t > 40.0 {
            return self.x;
        }
        match self.pde() {
            Pde::Kdv => (self.x + 3.0 * l * l * self.t).norm(),
            Pde::Heat => (I * self.x - 2.0 * l * self.t).norm(),
        }
    }

    fn transform(&self, sp: &Spatial<'_>, l: Complex64) -> Complex64 {
        let mut cfg = self.cfg.quad;
        cfg.tol *= 1e-2 / (1.0 + l.norm()).powi(self.degree() as i32 + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, s) in &sp.parts {
            let mut mu = s * l;
            if mu.im > 0.0 && mu.im < 1e-12 * (1.0 + mu.norm()) {
                mu.im = 0.0;
            }
            match half_line_fourier(sp.profile, mu, &cfg) {
                Ok(v) => acc += w * v,
                Err(e) => self.record(e),
            }
        }
        acc
    }

    fn time(&self, time: Time<'_>, l: Complex64) -> Complex64 {
        let w = self.disp.omega(l);
        let mw = (-w).powu(self.m as u32);
        let out = match time {
            Time::Free => Ok(mw * (-w * self.t).exp()),
            Time::Forcing(tp) => damped_time_transform_dt(tp, w, self.t, self.m, &self.cfg.quad),
            Time::Boundary(g0) => {
                let coef = match self.pde() {
                    Pde::Kdv => 3.0 * l * l,
                    Pde::Heat => 2.0 * I * l,
                };
                damped_time_transform(g0, w, self.t, &self.cfg.quad).map(|d| coef * mw * d)
            }
        };
        out.unwrap_or_else(|e| {
            self.record(e);
            Complex64::new(0.0, 0.0)
        })
    }

    fn run(&self, f: impl Fn(Complex64) -> Complex64 + Sync, c: &Contour, tol: f64) -> Result<QuadratureResult> {
        let g = Integrand::new(f).with_phase_rate(|l| self.phase_rate(l));
        let r = integrate(&g, c, &self.cfg.quad.with_tol(tol));
        if let Some(e) = self.take_failure() {
            return Err(e);
        }
        r
    }

    /// Boundary angles of the sector where `e^{-omega t}` grows.
    fn sector(&self) -> (f64, f64) {
        match self.pde() {
            Pde::Kdv => (PI / 3.0, 2.0 * PI / 3.0),
            Pde::Heat => (PI / 4.0, 3.0 * PI / 4.0),
        }
    }

    fn real_line(&self, sp: &Spatial<'_>, time: Time<'_>) -> Result<QuadratureResult> {
        let tol = self.cfg.quad.tol / 3.0;
        let rho = self.cfg.rho;
        let e = Expansion::new(sp, self.m_eff());
        let full = |l: Complex64| self.kernel(l) * self.transform(sp, l) * self.time(time, l);
        let near = Contour::new(vec![Segment::segment(
            Complex64::new(-rho, 0.0),
            Complex64::new(rho, 0.0),
        )]);
        let tails = Contour::new(vec![
            Segment::ray(Complex64::new(-rho, 0.0), PI, false),
            Segment::ray(Complex64::new(rho, 0.0), 0.0, true),
        ]);
        let mut out = self.run(full, &near, tol)?;
        if e.is_zero() {
            return Ok(out + self.run(full, &tails, tol)?);
        }
        let rem = |l: Complex64| {
            self.kernel(l) * e.remainder(|| self.transform(sp, l), l) * self.time(time, l)
        };
        out = out + self.run(rem, &tails, tol)?;
        let (theta, _) = self.sector();
        let lift = rho * theta.tan();
        let p_right = Complex64::new(rho, lift);
        let p_left = Complex64::new(-rho, lift);
        let far = Contour::new(vec![
            Segment::ray(p_left, PI - theta + self.cfg.tilt, false),
            Segment::segment(p_left, Complex64::new(-rho, 0.0)),
            Segment::segment(Complex64::new(rho, 0.0), p_right),
            Segment::ray(p_right, theta - self.cfg.tilt, true),
        ]);
        let expanded = |l: Complex64| self.kernel(l) * e.head(l) * self.time(time, l);
        Ok(out + self.run(expanded, &far, tol)?)
    }

    fn rotated_boundary(&self) -> Contour {
        let (right, left) = self.sector();
        let d = self.cfg.tilt;
        let o = Complex64::new(0.0, 0.0);
        Contour::new(vec![
            Segment::ray(o, left + d, false),
            Segment::ray(o, right - d, true),
        ])
    }

    fn boundary(&self, sp: Option<&Spatial<'_>>, time: Time<'_>) -> Result<QuadratureResult> {
        let tol = self.cfg.quad.tol;
        let Some(sp) = sp else {
            let f = |l: Complex64| self.kernel(l) * self.time(time, l);
            return self.run(f, &self.rotated_boundary(), tol);
        };
        let full = |l: Complex64| self.kernel(l) * self.transform(sp, l) * self.time(time, l);
        if self.pde() == Pde::Heat {
            return self.run(full, &self.rotated_boundary(), tol);
        }
        let tol = tol / 3.0;
        let (right, left) = self.sector();
        let rho = self.cfg.rho;
        let d = self.cfg.tilt;
        let o = Complex64::new(0.0, 0.0);
        let a = Complex64::from_polar(rho, left);
        let b = Complex64::from_polar(rho, right);
        let near = Contour::new(vec![Segment::segment(a, o), Segment::segment(o, b)]);
        let mut out = self.run(full, &near, tol)?;
        let e = Expansion::new(sp, self.m_eff());
        let tails = Contour::new(vec![Segment::ray(a, left, false), Segment::ray(b, right, true)]);
        if e.is_zero() {
            return Ok(out + self.run(full, &tails, tol)?);
        }
        let rem = |l: Complex64| {
            self.kernel(l) * e.remainder(|| self.transform(sp, l), l) * self.time(time, l)
        };
        out = out + self.run(rem, &tails, tol)?;
        let far = Contour::new(vec![
            Segment::ray(Complex64::from_polar(rho, left + d), left + d, false),
            Segment::arc(o, rho, left + d, left)?,
            Segment::arc(o, rho, right, right - d)?,
            Segment::ray(Complex64::from_polar(rho, right - d), right - d, true),
        ]);
        let expanded = |l: Complex64| self.kernel(l) * e.head(l) * self.time(time, l);
        Ok(out + self.run(expanded, &far, tol)?)
    }
}

fn check_point(x: f64, t: f64) -> Result<()> {
    if x > 0.0 && t > 0.0 && x.is_finite() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "the representation is defined for x > 0, t > 0; got ({x}, {t})"
        )))
    }
}

fn context<'a>(pde: Pde, k: usize, m: usize, x: f64, t: f64, cfg: &'a SolverConfig) -> Result<Ctx<'a>> {
    check_point(x, t)?;
    let order = k + pde.order() * m;
    if order > cfg.max_order {
        return Err(Error::UnsupportedOrder(format!(
            "k = {k}, m = {m} gives order {order} > {}",
            cfg.max_order
        )));
    }
    Ok(Ctx {
        disp: Dispersion::new(pde),
        x,
        t,
        k,
        m,
        cfg,
        failure: Mutex::new(None),
    })
}

fn tagged(r: Result<QuadratureResult>, term: &'static str) -> Result<QuadratureResult> {
    r.map_err(|e| e.in_term(term))
}

/// The five unsigned terms of the representation, differentiated `k` times
/// in `x` and `m` times in `t`, in the order real-line data, contour data,
/// boundary, real-line forcing, contour forcing.
fn raw_terms(p: &ProblemSpec, k: usize, m: usize, x: f64, t: f64, cfg: &SolverConfig) -> Result<[QuadratureResult; 5]> {
    let ctx = context(p.pde, k, m, x, t, cfg)?;
    let zero = QuadratureResult::zero();
    let contour_spatial = |prof| match p.pde {
        Pde::Kdv => Spatial::rotated(prof),
        Pde::Heat => Spatial::reflected(prof),
    };
    let mut out = [zero; 5];
    if !p.u0.is_zero() {
        out[0] = tagged(ctx.real_line(&Spatial::plain(&p.u0), Time::Free), "I_R")?;
        out[1] = tagged(ctx.boundary(Some(&contour_spatial(&p.u0)), Time::Free), "I_Gamma")?;
    }
    if !p.g0.is_zero() {
        out[2] = tagged(ctx.boundary(None, Time::Boundary(&p.g0)), "I_g")?;
    }
    for (space, time) in p.f.terms() {
        if space.is_zero() || time.is_zero() {
            continue;
        }
        out[3] = out[3] + tagged(ctx.real_line(&Spatial::plain(space), Time::Forcing(time)), "Phi_R")?;
        out[4] = out[4]
            + tagged(
                ctx.boundary(Some(&contour_spatial(space)), Time::Forcing(time)),
                "Phi_Gamma",
            )?;
    }
    Ok(out)
}

fn signs(pde: Pde) -> [f64; 5] {
    match pde {
        Pde::Kdv => [1.0, 1.0, -1.0, 1.0, 1.0],
        Pde::Heat => [1.0, -1.0, -1.0, 1.0, -1.0],
    }
}

/// `d^{k+m} U / dx^k dt^m` at `(x, t)`.
pub fn solve_derivative(p: &ProblemSpec, k: usize, m: usize, x: f64, t: f64, cfg: &SolverConfig) -> Result<FieldSample> {
    let raw = raw_terms(p, k, m, x, t, cfg)?;
    let s = signs(p.pde);
    let mut terms = [Complex64::new(0.0, 0.0); 5];
    let mut err = 0.0;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..5 {
        terms[i] = raw[i].value * s[i];
        err += raw[i].error_estimate;
        total += terms[i];
    }
    Ok(FieldSample {
        x,
        t,
        value: total.re / (2.0 * PI),
        error_estimate: err / (2.0 * PI),
        term_breakdown: terms,
    })
}

/// `U(x, t)` for either equation.
pub fn solve(p: &ProblemSpec, x: f64, t: f64, cfg: &SolverConfig) -> Result<FieldSample> {
    solve_derivative(p, 0, 0, x, t, cfg)
}

fn require(p: &ProblemSpec, pde: Pde) -> Result<()> {
    if p.pde == pde {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "problem is posed for {}, not {pde}",
            p.pde
        )))
    }
}

/// `(I_R, I_Gamma, I_g, Phi_R, Phi_Gamma)` of the KdV representation.
pub fn kdv_terms(p: &ProblemSpec, x: f64, t: f64, cfg: &SolverConfig) -> Result<[Complex64; 5]> {
    require(p, Pde::Kdv)?;
    let raw = raw_terms(p, 0, 0, x, t, cfg)?;
    Ok(raw.map(|r| r.value))
}

pub fn kdv_solve(p: &ProblemSpec, x: f64, t: f64, cfg: &SolverConfig) -> Result<FieldSample> {
    require(p, Pde::Kdv)?;
    solve(p, x, t, cfg)
}

/// The five unsigned integrals of the heat representation, with the
/// contour terms taken over the boundary of the sector `pi/4 < arg < 3pi/4`.
pub fn heat_terms(p: &ProblemSpec, x: f64, t: f64, cfg: &SolverConfig) -> Result<[Complex64; 5]> {
    require(p, Pde::Heat)?;
    let raw = raw_terms(p, 0, 0, x, t, cfg)?;
    Ok(raw.map(|r| r.value))
}

pub fn heat_solve(p: &ProblemSpec, x: f64, t: f64, cfg: &SolverConfig) -> Result<FieldSample> {
    require(p, Pde::Heat)?;
    solve(p, x, t, cfg)
}

/// Real-line data and forcing terms (`I_R + Phi_R`) evaluated with the
/// expansion-subtracted decomposition.
pub fn stabilized_real_line_term(p: &ProblemSpec, k: usize, m: usize, x: f64, t: f64, cfg: &SolverConfig) -> Result<Complex64> {
    let ctx = context(p.pde, k, m, x, t, cfg)?;
    let mut acc = Complex64::new(0.0, 0.0);
    if !p.u0.is_zero() {
        acc += tagged(ctx.real_line(&Spatial::plain(&p.u0), Time::Free), "I_R")?.value;
    }
    for (space, time) in p.f.terms() {
        if !space.is_zero() && !time.is_zero() {
            acc += tagged(ctx.real_line(&Spatial::plain(space), Time::Forcing(time)), "Phi_R")?.value;
        }
    }
    Ok(acc)
}

/// `I_R + Phi_R` integrated directly along the real axis. Only the heat
/// equation's Gaussian time factor makes this absolutely convergent.
pub fn direct_real_line_term(p: &ProblemSpec, k: usize, m: usize, x: f64, t: f64, cfg: &SolverConfig) -> Result<Complex64> {
    if p.pde != Pde::Heat {
        return Err(Error::InvalidParameter(
            "the KdV real-line integrals converge only conditionally; use the stabilized form".into(),
        ));
    }
    let ctx = context(p.pde, k, m, x, t, cfg)?;
    let line = crate::contours::real_line();
    let mut acc = Complex64::new(0.0, 0.0);
    if !p.u0.is_zero() {
        let sp = Spatial::plain(&p.u0);
        let f = |l: Complex64| ctx.kernel(l) * ctx.transform(&sp, l) * ctx.time(Time::Free, l);
        acc += ctx.run(f, &line, cfg.quad.tol)?.value;
    }
    for (space, time) in p.f.terms() {
        let sp = Spatial::plain(space);
        let f = |l: Complex64| ctx.kernel(l) * ctx.transform(&sp, l) * ctx.time(Time::Forcing(time), l);
        acc += ctx.run(f, &line, cfg.quad.tol)?.value;
    }
    Ok(acc)
}

/// Evaluate `d^{k+m}U` on the tensor grid `xs x ts` in parallel. Results are
/// returned in row-major order (`x` outer, `t` inner).
pub fn solve_grid(
    p: &ProblemSpec,
    k: usize,
    m: usize,
    xs: &[f64],
    ts: &[f64],
    cfg: &SolverConfig,
) -> Vec<Result<FieldSample>> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ts.iter().map(move |&t| (x, t)))
        .collect();
    points
        .par_iter()
        .map(|&(x, t)| solve_derivative(p, k, m, x, t, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ForcingProfile;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn exact_problem(pde: Pde) -> ProblemSpec {
        // U = e^{t - x} solves both equations with this data.
        ProblemSpec::new(
            pde,
            DataProfile::exp_decay(1.0),
            DataProfile::exp_of_t(1.0),
            ForcingProfile::zero(),
        )
    }

    #[test]
    fn cube_roots() {
        let a = CubeRoots::ALPHA;
        let a2 = CubeRoots::ALPHA2;
        assert!((a * a * a - 1.0).norm() < 1e-15);
        assert!((a * a - a2).norm() < 1e-15);
        assert!((1.0 + a + a2).norm() < 1e-15);
        let l = Complex64::from_polar(1.0, PI / 3.0);
        assert!((a * l).im <= 1e-15);
    }

    #[test]
    fn zero_data_gives_zero() {
        for pde in [Pde::Heat, Pde::Kdv] {
            let s = solve(&ProblemSpec::zero(pde), 0.7, 0.3, &cfg()).unwrap();
            assert_eq!(s.value, 0.0);
            assert!(s.term_breakdown.iter().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn heat_step_datum_is_erfc() {
        let p = ProblemSpec::new(
            Pde::Heat,
            DataProfile::zero(),
            DataProfile::constant(1.0),
            ForcingProfile::zero(),
        );
        for (x, t) in [(0.5, 1.0), (1.0, 1.0), (2.0, 0.5)] {
            let u = heat_solve(&p, x, t, &cfg()).unwrap();
            let e = errorfunctions::RealErrorFunctions::erfc(x / (2.0 * f64::sqrt(t)));
            assert!((u.value - e).abs() < 1e-6, "({x}, {t}): {} vs {e}", u.value);
        }
    }

    #[test]
    fn exponential_exact_solution() {
        for pde in [Pde::Heat, Pde::Kdv] {
            let p = exact_problem(pde);
            for (x, t) in [(0.5, 0.5), (1.0, 0.5), (2.0, 1.0), (0.1, 0.1)] {
                let u = solve(&p, x, t, &cfg()).unwrap();
                assert!((u.value - (t - x).exp()).abs() < 1e-9, "{pde} ({x}, {t})");
                assert!(u.imaginary_residue() <= 100.0 * u.error_estimate.max(1e-14));
            }
        }
    }

    #[test]
    fn term_breakdown_sums_to_value() {
        let p = exact_problem(Pde::Kdv);
        let u = kdv_solve(&p, 1.0, 0.5, &cfg()).unwrap();
        assert_eq!(u.total().re / (2.0 * PI), u.value);
        let raw = kdv_terms(&p, 1.0, 0.5, &cfg()).unwrap();
        assert!((raw[0] + raw[1] - raw[2] + raw[3] + raw[4] - u.total()).norm() < 1e-15);
        assert!(raw[3].norm() == 0.0 && raw[4].norm() == 0.0);
    }

    #[test]
    fn pde_mismatch_and_domain_errors() {
        let p = exact_problem(Pde::Heat);
        assert!(kdv_solve(&p, 1.0, 1.0, &cfg()).is_err());
        assert!(matches!(
            heat_solve(&p, 0.0, 1.0, &cfg()),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            solve_derivative(&p, 3, 2, 1.0, 1.0, &cfg()),
            Err(Error::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn derivatives_satisfy_the_equations() {
        let f = ForcingProfile::separable(DataProfile::gaussian(1.0), DataProfile::sin_of_t(2.0));
        for pde in [Pde::Heat, Pde::Kdv] {
            let p = ProblemSpec::new(pde, DataProfile::gaussian(1.0), DataProfile::exp_of_t(-1.0), f.clone());
            let (x, t) = (1.0, 0.5);
            let ut = solve_derivative(&p, 0, 1, x, t, &cfg()).unwrap().value;
            let res = match pde {
                Pde::Heat => ut - solve_derivative(&p, 2, 0, x, t, &cfg()).unwrap().value,
                Pde::Kdv => ut + solve_derivative(&p, 3, 0, x, t, &cfg()).unwrap().value,
            } - f.eval(x, t);
            assert!(res.abs() < 1e-6, "{pde}: {res}");
        }
    }

    #[test]
    fn time_derivative_matches_difference_quotient() {
        let p = ProblemSpec::new(
            Pde::Heat,
            DataProfile::zero(),
            DataProfile::constant(1.0),
            ForcingProfile::zero(),
        );
        let h = 1e-3;
        let ut = solve_derivative(&p, 0, 1, 1.0, 1.0, &cfg()).unwrap().value;
        let fd = (heat_solve(&p, 1.0, 1.0 + h, &cfg()).unwrap().value
            - heat_solve(&p, 1.0, 1.0 - h, &cfg()).unwrap().value)
            / (2.0 * h);
        assert!((ut - fd).abs() < 1e-5);
        let u = solve_derivative(&p, 0, 0, 1.0, 1.0, &cfg()).unwrap();
        assert_eq!(u, heat_solve(&p, 1.0, 1.0, &cfg()).unwrap());
    }

    #[test]
    fn linearity() {
        let a = exact_problem(Pde::Kdv);
        let b = ProblemSpec::new(
            Pde::Kdv,
            DataProfile::gaussian(2.0),
            DataProfile::sin_of_t(1.0),
            ForcingProfile::separable(DataProfile::exp_decay(2.0), DataProfile::constant(1.0)),
        );
        let ab = a.combine(0.7, &b, -1.3);
        let (x, t) = (0.8, 0.4);
        let ua = solve(&a, x, t, &cfg()).unwrap().value;
        let ub = solve(&b, x, t, &cfg()).unwrap().value;
        let uab = solve(&ab, x, t, &cfg()).unwrap().value;
        assert!((uab - (0.7 * ua - 1.3 * ub)).abs() < 1e-9);
    }

    #[test]
    fn stabilized_matches_direct_and_decays() {
        let heat = ProblemSpec::new(
            Pde::Heat,
            DataProfile::exp_decay(1.0),
            DataProfile::zero(),
            ForcingProfile::zero(),
        );
        let s = stabilized_real_line_term(&heat, 0, 0, 2.0, 1.0, &cfg()).unwrap();
        let d = direct_real_line_term(&heat, 0, 0, 2.0, 1.0, &cfg()).unwrap();
        assert!((s - d).norm() < 1e-8);

        let kdv = ProblemSpec::new(
            Pde::Kdv,
            DataProfile::exp_decay(1.0),
            DataProfile::zero(),
            ForcingProfile::zero(),
        );
        assert!(direct_real_line_term(&kdv, 0, 0, 2.0, 1.0, &cfg()).is_err());
        let other = SolverConfig {
            rho: 1.0,
            tilt: PI / 10.0,
            ..cfg()
        };
        let s1 = stabilized_real_line_term(&kdv, 0, 0, 2.0, 1.0, &cfg()).unwrap();
        let s2 = stabilized_real_line_term(&kdv, 0, 0, 2.0, 1.0, &other).unwrap();
        assert!((s1 - s2).norm() < 1e-8);

        let gauss = ProblemSpec::new(
            Pde::Kdv,
            DataProfile::gaussian(1.0),
            DataProfile::zero(),
            ForcingProfile::zero(),
        );
        let near = stabilized_real_line_term(&gauss, 0, 0, 2.0, 1.0, &cfg()).unwrap();
        let far = stabilized_real_line_term(&gauss, 0, 0, 20.0, 1.0, &cfg()).unwrap();
        assert!(far.norm() <= 1e-6 * near.norm());
        let zero = ProblemSpec::zero(Pde::Kdv);
        assert_eq!(
            stabilized_real_line_term(&zero, 0, 0, 2.0, 1.0, &cfg()).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn grid_is_ordered_and_deterministic() {
        let p = exact_problem(Pde::Heat);
        let xs = [0.5, 1.0];
        let ts = [0.2, 0.4, 0.6];
        let a = solve_grid(&p, 0, 0, &xs, &ts, &cfg());
        let b = solve_grid(&p, 0, 0, &xs, &ts, &cfg());
        assert_eq!(a.len(), 6);
        for (i, (ra, rb)) in a.iter().zip(&b).enumerate() {
            let (sa, sb) = (ra.as_ref().unwrap(), rb.as_ref().unwrap());
            assert_eq!(sa, sb);
            assert_eq!((sa.x, sa.t), (xs[i / 3], ts[i % 3]));
        }
    }
}
