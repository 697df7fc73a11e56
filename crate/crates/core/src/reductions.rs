//! Robin and oblique-Robin boundary conditions reduced to the Dirichlet case.
//!
//! For a constant-coefficient linear equation, `w = A u + B u_x + C u_t`
//! solves the same equation as `u`, and the Robin condition on `u` becomes a
//! Dirichlet condition on `w`. Uniqueness for the Robin problem then rests on
//! showing that the only field with `w = 0` and zero data is zero, which
//! comes down to a linear ODE for a profile `phi` with zero initial data.
//!
//! The oblique problem is read with `C u_t(0, t)` in its boundary condition,
//! acting on the problem's own unknown.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::{Pde, ProblemSpec};
use crate::solvers::SolverConfig;
use crate::verification::{t_derivative, x_derivative, Field, HeatOracle, Measurement, UtmField, VerificationReport};

/// Equations for which the reduction algebra is provided. BBM is covered by
/// the phi checks only; no BBM solver is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionPde {
    Heat,
    Bbm,
}

/// Coefficients of `A u(0, t) + B u_x(0, t) + C u_t(0, t) = g0(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RobinSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub pde: ReductionPde,
}

impl RobinSpec {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a == 0.0 && b == 0.0 && c == 0.0 {
            return Err(Error::InvalidParameter("A, B and C cannot all vanish".into()));
        }
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("Robin coefficients must be finite".into()));
        }
        Ok(RobinSpec {
            a,
            b,
            c,
            pde: ReductionPde::Heat,
        })
    }

    /// `B = 0` leaves a Dirichlet-type condition, handled without reduction.
    pub fn is_dirichlet_case(&self) -> bool {
        self.b == 0.0
    }
}

/// Step for finite-difference derivatives of fields without analytic ones.
const FD_STEP: f64 = 1e-4;

/// `A u + B u_x + C u_t` at `(x, t)`.
pub fn robin_map(field: &dyn Field, r: &RobinSpec, x: f64, t: f64) -> Result<f64> {
    let mut w = 0.0;
    if r.a != 0.0 {
        w += r.a * field.value(x, t)?;
    }
    if r.b != 0.0 {
        w += r.b * x_derivative(field, 1, x, t, FD_STEP.min(x / 3.0))?;
    }
    if r.c != 0.0 {
        w += r.c * t_derivative(field, x, t, FD_STEP.min(t / 3.0))?;
    }
    Ok(w)
}

/// The image of a field under [`robin_map`], itself a field.
pub struct RobinImage<'a> {
    pub field: &'a dyn Field,
    pub spec: RobinSpec,
}

impl Field for RobinImage<'_> {
    fn derivative(&self, k: usize, m: usize, x: f64, t: f64) -> Result<f64> {
        if (k, m) != (0, 0) {
            return Err(Error::UnsupportedOrder(format!("Robin image provides values only, asked for ({k}, {m})")));
        }
        robin_map(self.field, &self.spec, x, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiBranch {
    /// The ODE has a nonvanishing leading coefficient.
    Regular,
    /// The leading coefficient vanishes and the equation is algebraic.
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    pub branch: PhiBranch,
    /// Largest `|phi|` on the integration interval.
    pub max_phi: f64,
    /// Roots of the characteristic polynomial, as `(re, im)` pairs.
    pub characteristic_roots: Vec<(f64, f64)>,
    pub phi_vanishes: bool,
}

const PHI_TOL: f64 = 1e-12;

/// Classical RK4 for `y' = f(y)` on a uniform grid, returning `max |y_0|`.
fn rk4_max(f: impl Fn(&[f64]) -> Vec<f64>, y0: &[f64], h: f64, steps: usize) -> f64 {
    let mut y = y0.to_vec();
    let mut peak = y[0].abs();
    let axpy = |y: &[f64], k: &[f64], s: f64| y.iter().zip(k).map(|(a, b)| a + s * b).collect::<Vec<f64>>();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        peak = peak.max(y[0].abs());
    }
    peak
}

/// The plain Robin reduction: `(1 - A^2/B^2) phi' - (A/B) phi = 0` with
/// `phi(0) = 0`, integrated over `[0, 10]`.
pub fn robin_phi_check(a: f64, b: f64) -> Result<PhiReport> {
    if b == 0.0 {
        return Err(Error::CoveredByDirichlet);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("Robin coefficients must be finite".into()));
    }
    let lead = 1.0 - (a / b).powi(2);
    let ratio = a / b;
    if lead.abs() <= 1e-12 {
        // -(A/B) phi = 0 with A = +-B forces phi = 0 pointwise.
        return Ok(PhiReport {
            branch: PhiBranch::Degenerate,
            max_phi: 0.0,
            characteristic_roots: vec![],
            phi_vanishes: true,
        });
    }
    let rate = ratio / lead;
    let max_phi = rk4_max(|y| vec![rate * y[0]], &[0.0], 1e-2, 1000);
    Ok(PhiReport {
        branch: PhiBranch::Regular,
        max_phi,
        characteristic_roots: vec![(rate, 0.0)],
        phi_vanishes: max_phi <= PHI_TOL,
    })
}

/// The oblique reduction. Fields with `A z + B z_x + C z_t = 0` have the form
/// `z = e^{-Ax/B} phi(x/B - t/C)`; for a heat solution this requires
/// `phi''/B^2 + (1/C - 2A/B^2) phi' + (A^2/B^2) phi = 0` and
/// `phi(0) = phi'(0) = 0`, integrated over `[-10, 10]`.
pub fn oblique_phi_check(a: f64, b: f64, c: f64) -> Result<PhiReport> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) || ![a, b, c].iter().all(|v| v.is_finite()) {
        return Err(Error::OutsideProblemClass(format!(
            "oblique reduction needs A, B, C > 0; got ({a}, {b}, {c})"
        )));
    }
    // Monic form phi'' + p phi' + q phi = 0.
    let p = b * b * (1.0 / c - 2.0 * a / (b * b));
    let q = a * a;
    let disc = p * p - 4.0 * q;
    let roots = if disc >= 0.0 {
        let s = disc.sqrt();
        vec![((-p + s) / 2.0, 0.0), ((-p - s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt();
        vec![(-p / 2.0, s / 2.0), (-p / 2.0, -s / 2.0)]
    };
    let rhs = |dir: f64| move |y: &[f64]| vec![dir * y[1], dir * (-p * y[1] - q * y[0])];
    let forward = rk4_max(rhs(1.0), &[0.0, 0.0], 1e-2, 1000);
    let backward = rk4_max(rhs(-1.0), &[0.0, 0.0], 1e-2, 1000);
    let max_phi = forward.max(backward);
    Ok(PhiReport {
        branch: PhiBranch::Regular,
        max_phi,
        characteristic_roots: roots,
        phi_vanishes: max_phi <= PHI_TOL,
    })
}

/// Two independent heat solutions mapped through the Robin operator and
/// compared on the grid `[0.1, 3] x [0.1, 2]` (5 x 5).
///
/// `perturbation` is added to the oracle, so a nonzero value exercises the
/// failure path.
pub fn robin_uniqueness_demo(p: &ProblemSpec, r: &RobinSpec, perturbation: f64, cfg: &SolverConfig) -> Result<VerificationReport> {
    if p.pde != Pde::Heat {
        return Err(Error::InvalidParameter(format!("the Robin demo uses heat solutions, got {}", p.pde)));
    }
    let utm = UtmField {
        problem: p.clone(),
        cfg: *cfg,
    };
    let oracle = HeatOracle::new(p.clone());
    let shifted = crate::verification::FnField(|x, t| Ok(oracle.value(x, t)? + perturbation));
    robin_difference_report(&utm, &shifted, r)
}

/// Compares the Robin images of two fields that should coincide.
pub fn robin_difference_report(u: &dyn Field, v: &dyn Field, r: &RobinSpec) -> Result<VerificationReport> {
    let xs = [0.1, 0.825, 1.55, 2.275, 3.0];
    let ts = [0.1, 0.575, 1.05, 1.525, 2.0];
    let pts: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ts.iter().map(move |&t| (x, t))).collect();
    let dw = pts
        .par_iter()
        .map(|&(x, t)| Ok((robin_map(u, r, x, t)? - robin_map(v, r, x, t)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let mut boundary: f64 = 0.0;
    let mut initial: f64 = 0.0;
    for &t in &ts {
        boundary = boundary.max((u.value(1e-3, t)? - v.value(1e-3, t)?).abs());
    }
    for &x in &xs {
        initial = initial.max((u.value(x, 1e-3)? - v.value(x, 1e-3)?).abs());
    }
    Ok(VerificationReport::new(
        "robin-uniqueness",
        format!("x {xs:?} x t {ts:?}, A = {}, B = {}, C = {}", r.a, r.b, r.c),
        vec![
            Measurement::new("max |w(u) - w(v)|", dw.iter().copied().fold(0.0, f64::max), 2e-6),
            Measurement::new("difference at x = 1e-3", boundary, 1e-5),
            Measurement::new("difference at t = 1e-3", initial, 1e-5),
        ],
    ))
}

/// Outcome of a random sweep over positive parameters.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub samples: usize,
    pub robin_failures: Vec<(f64, f64)>,
    pub oblique_failures: Vec<(f64, f64, f64)>,
    pub max_phi: f64,
    pub pass: bool,
}

/// Both phi checks for `samples` parameter triples drawn uniformly from
/// `(0, 10]^3` with a seeded generator.
pub fn phi_sweep(samples: usize, seed: u64) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<(f64, f64, f64)> = (0..samples)
        .map(|_| {
            let mut draw = || 10.0 - rng.gen_range(0.0..10.0);
            (draw(), draw(), draw())
        })
        .collect();
    let results = params
        .par_iter()
        .map(|&(a, b, c)| Ok((robin_phi_check(a, b)?, oblique_phi_check(a, b, c)?)))
        .collect::<Result<Vec<(PhiReport, PhiReport)>>>()?;
    let mut out = SweepReport {
        seed,
        samples,
        robin_failures: vec![],
        oblique_failures: vec![],
        max_phi: 0.0,
        pass: true,
    };
    for (&(a, b, c), (r, o)) in params.iter().zip(&results) {
        out.max_phi = out.max_phi.max(r.max_phi).max(o.max_phi);
        if !r.phi_vanishes {
            out.robin_failures.push((a, b));
        }
        if !o.phi_vanishes {
            out.oblique_failures.push((a, b, c));
        }
    }
    out.pass = out.robin_failures.is_empty() && out.oblique_failures.is_empty();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{DataProfile, ForcingProfile};
    use crate::verification::{pde_residual, FnField};
    use std::f64::consts::PI;

    fn erfc_field() -> UtmField {
        UtmField::new(ProblemSpec::new(
            Pde::Heat,
            DataProfile::zero(),
            DataProfile::constant(1.0),
            ForcingProfile::zero(),
        ))
    }

    #[test]
    fn identity_map() {
        let f = erfc_field();
        let r = RobinSpec::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(robin_map(&f, &r, 1.0, 1.0).unwrap(), f.value(1.0, 1.0).unwrap());
    }

    #[test]
    fn derivative_of_erfc_solution() {
        let r = RobinSpec::new(0.0, 1.0, 0.0).unwrap();
        let w = robin_map(&erfc_field(), &r, 1.0, 1.0).unwrap();
        let exact = -(-0.25f64).exp() / PI.sqrt();
        assert!((w - exact).abs() < 1e-8);
        assert!((w + 0.4394).abs() < 1e-4);
        // The same through finite differences of a value-only field.
        let erfc = FnField(|x: f64, t: f64| Ok(errorfunctions::RealErrorFunctions::erfc(x / (2.0 * t.sqrt()))));
        assert!((robin_map(&erfc, &r, 1.0, 1.0).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn image_solves_heat_equation() {
        let f = erfc_field();
        let img = RobinImage {
            field: &f,
            spec: RobinSpec::new(1.0, 1.0, 0.0).unwrap(),
        };
        let r = pde_residual(&img, Pde::Heat, &ForcingProfile::zero(), 1.0, 0.5, 1e-3).unwrap();
        assert!(r.abs() <= 1e-5, "{r}");
    }

    #[test]
    fn map_is_linear() {
        let u = FnField(|x: f64, t: f64| Ok((-x).exp() * t.sin()));
        let v = FnField(|x: f64, t: f64| Ok(x * x * (-t).exp()));
        let sum = FnField(|x: f64, t: f64| Ok(2.0 * (-x).exp() * t.sin() - 3.0 * x * x * (-t).exp()));
        let r = RobinSpec::new(1.5, -0.5, 2.0).unwrap();
        let (x, t) = (0.7, 0.9);
        let lhs = robin_map(&sum, &r, x, t).unwrap();
        let rhs = 2.0 * robin_map(&u, &r, x, t).unwrap() - 3.0 * robin_map(&v, &r, x, t).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn robin_branches() {
        let r = robin_phi_check(1.0, 2.0).unwrap();
        assert_eq!(r.branch, PhiBranch::Regular);
        assert!(r.phi_vanishes);
        let d = robin_phi_check(1.0, 1.0).unwrap();
        assert_eq!(d.branch, PhiBranch::Degenerate);
        assert!(d.phi_vanishes);
        assert_eq!(robin_phi_check(1.0, 0.0).unwrap_err(), Error::CoveredByDirichlet);
    }

    #[test]
    fn oblique_cases() {
        assert!(oblique_phi_check(1.0, 1.0, 1.0).unwrap().phi_vanishes);
        assert!(oblique_phi_check(2.0, 1.0, 3.0).unwrap().phi_vanishes);
        assert!(matches!(oblique_phi_check(1.0, 0.0, 1.0), Err(Error::OutsideProblemClass(_))));
    }

    #[test]
    fn oblique_profile_maps_to_zero() {
        // With phi = e^{r Xi} for a characteristic root r, the field
        // zeta = e^{-Ax/B} phi(x/B - t/C) solves the heat equation and has a
        // vanishing oblique image.
        let (a, b, c) = (0.5, 2.0, 1.0);
        let rep = oblique_phi_check(a, b, c).unwrap();
        let (re, im) = rep.characteristic_roots[0];
        assert_eq!(im, 0.0);
        let zeta = FnField(move |x: f64, t: f64| Ok((-a * x / b + re * (x / b - t / c)).exp()));
        let r = pde_residual(&zeta, Pde::Heat, &ForcingProfile::zero(), 1.0, 1.0, 1e-3).unwrap();
        let scale = zeta.value(1.0, 1.0).unwrap();
        assert!(r.abs() < 1e-5 * scale.max(1.0), "{r}");
        let w = robin_map(&zeta, &RobinSpec::new(a, b, c).unwrap(), 1.0, 1.0).unwrap();
        assert!(w.abs() < 1e-7 * scale.max(1.0), "{w}");
    }

    #[test]
    fn uniqueness_demo_and_fault_injection() {
        let p = ProblemSpec::new(Pde::Heat, DataProfile::exp_decay(1.0), DataProfile::exp_of_t(-1.0), ForcingProfile::zero());
        let r = RobinSpec::new(1.0, 1.0, 0.0).unwrap();
        let cfg = SolverConfig::default();
        let ok = robin_uniqueness_demo(&p, &r, 0.0, &cfg).unwrap();
        assert!(ok.pass, "{ok:?}");
        let bad = robin_uniqueness_demo(&p, &r, 1e-3, &cfg).unwrap();
        assert!(!bad.pass);
        assert!((bad.measurements[0].value - 1e-3).abs() < 1e-5);
        let u = erfc_field();
        let same = robin_difference_report(&u, &u, &r).unwrap();
        assert!(same.measurements.iter().all(|m| m.value == 0.0));
    }

    #[test]
    fn seeded_sweep_is_reproducible() {
        let a = phi_sweep(100, 7).unwrap();
        let b = phi_sweep(100, 7).unwrap();
        assert!(a.pass);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
