//! Spectral transforms of the data and their large-`lambda` expansions.
//!
//! Time transforms take an explicit exponent `w`: for the heat equation the
//! solver passes `w = lambda^2` and for KdV `w = omega(lambda) = -i lambda^3`.
//! Wherever possible the damped form `e^{-w t} int_0^t e^{w tau} g(tau) d tau`
//! is used, which never builds `e^{w tau}` on its own.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profiles::{DataProfile, ForcingProfile, Pde};
use crate::quadrature::{integrate_complex_interval, QuadConfig};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The dispersion relation of the equation being solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dispersion {
    pub pde: Pde,
}

impl Dispersion {
    pub fn new(pde: Pde) -> Self {
        Dispersion { pde }
    }

    /// `omega(lambda)`, so that the time factor of a mode is `e^{-omega t}`.
    pub fn omega(&self, lambda: Complex64) -> Complex64 {
        match self.pde {
            Pde::Heat => lambda * lambda,
            Pde::Kdv => -I * lambda * lambda * lambda,
        }
    }

    pub fn time_factor(&self, lambda: Complex64, t: f64) -> Complex64 {
        (-self.omega(lambda) * t).exp()
    }
}

/// `(e^z - 1) / z`, accurate near zero.
pub fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..=24 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `int_0^inf e^{-i lambda y} u0(y) dy` by quadrature only.
pub fn half_line_fourier_quadrature(
    u0: &DataProfile,
    lambda: Complex64,
    cfg: &QuadConfig,
) -> Result<(Complex64, f64)> {
    if u0.is_zero() {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    if lambda.im > 0.0 {
        return Err(Error::OutOfDomain {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let x_max = u0.support_bound(cfg.tol / 10.0).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "profile {} does not decay, its half-line transform is undefined",
            u0.name()
        ))
    })?;
    let x_min = u0.lower_support().max(0.0);
    if x_max <= x_min {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let r = integrate_complex_interval(
        |y| (-I * lambda * y).exp() * u0.eval(y),
        x_min,
        x_max,
        lambda.re.abs(),
        cfg,
    )?;
    Ok((r.value, r.error_estimate))
}

/// `u0_hat(lambda)`, using the profile's closed form when it has one.
///
/// Without a closed form the transform is defined only for `Im lambda <= 0`.
pub fn half_line_fourier(u0: &DataProfile, lambda: Complex64, cfg: &QuadConfig) -> Result<Complex64> {
    if let Some(v) = u0.closed_form_transform(lambda) {
        return Ok(v);
    }
    half_line_fourier_quadrature(u0, lambda, cfg).map(|(v, _)| v)
}

/// The truncated expansion `sum_{j=1}^{M} c_j / (i lambda)^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryExpansion {
    /// `coeffs[j-1] = c_j`.
    pub coeffs: Vec<f64>,
}

impl BoundaryExpansion {
    /// Expansion of `u0_hat` built from `u0^{(j-1)}(0)`.
    pub fn of_profile(u0: &DataProfile, m: usize) -> Self {
        BoundaryExpansion {
            coeffs: u0.derivatives(0.0, m),
        }
    }

    /// Expansion of `f_hat(., t)` built from `d^{j-1}f/dx^{j-1}(0, t)`.
    pub fn of_forcing(f: &ForcingProfile, m: usize, t: f64) -> Self {
        BoundaryExpansion {
            coeffs: (0..m).map(|k| f.x_derivative(k, 0.0, t)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn eval(&self, lambda: Complex64) -> Result<Complex64> {
        if lambda.norm() == 0.0 {
            return Err(Error::SingularArgument(
                "boundary expansion evaluated at lambda = 0".into(),
            ));
        }
        let inv = 1.0 / (I * lambda);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * inv;
        }
        Ok(acc)
    }
}

/// `sigma_M(lambda) = sum_{j=1}^{M} u0^{(j-1)}(0) / (i lambda)^j`.
pub fn sigma_m(u0: &DataProfile, m: usize, lambda: Complex64) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    BoundaryExpansion::of_profile(u0, m).eval(lambda)
}

/// `int_0^t e^{w tau} g0(tau) d tau`.
pub fn time_transform(g0: &DataProfile, w: Complex64, t: f64, cfg: &QuadConfig) -> Result<Complex64> {
    check_time(t)?;
    if g0.is_zero() || t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if let Some(sum) = g0.exp_sum() {
        return Ok(sum
            .iter()
            .map(|(c, b)| c * t * exprel((w + b) * t))
            .sum());
    }
    let r = integrate_complex_interval(
        |tau| (w * tau).exp() * g0.eval(tau),
        0.0,
        t,
        w.im.abs(),
        cfg,
    )?;
    Ok(r.value)
}

/// `e^{-w t} int_0^t e^{w tau} g0(tau) d tau = int_0^t e^{-w (t - tau)} g0(tau) d tau`.
pub fn damped_time_transform(
    g0: &DataProfile,
    w: Complex64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    check_time(t)?;
    if g0.is_zero() || t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if let Some(sum) = g0.exp_sum() {
        return Ok(sum
            .iter()
            .map(|(c, b)| c * (b * t).exp() * t * exprel(-(w + b) * t))
            .sum());
    }
    // Beyond 40 / Re w the kernel is below e^{-40}.
    let lo = if w.re > 0.0 {
        (t - 40.0 / w.re).max(0.0)
    } else {
        0.0
    };
    let r = integrate_complex_interval(
        |tau| (-w * (t - tau)).exp() * g0.eval(tau),
        lo,
        t,
        w.im.abs(),
        cfg,
    )?;
    Ok(r.value)
}

/// `d^m/dt^m` of the damped transform:
/// `(-w)^m D + sum_{j<m} (-w)^{m-1-j} g0^{(j)}(t)`.
pub fn damped_time_transform_dt(
    g0: &DataProfile,
    w: Complex64,
    t: f64,
    m: usize,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let d = damped_time_transform(g0, w, t, cfg)?;
    Ok((-w).powu(m as u32) * d + boundary_polynomial(g0, w, t, m))
}

/// The polynomial part `sum_{j<m} (-w)^{m-1-j} g0^{(j)}(t)` of the `m`-th
/// time derivative of the damped transform.
pub fn boundary_polynomial(g0: &DataProfile, w: Complex64, t: f64, m: usize) -> Complex64 {
    if m == 0 || g0.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let d = g0.derivatives(t, m);
    (0..m)
        .map(|j| (-w).powu((m - 1 - j) as u32) * d[j])
        .sum()
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")))
    }
}

/// `(f_hat(lambda, t), f_tilde(lambda, w, t))` with
/// `f_tilde = int_0^t e^{w tau} f_hat(lambda, tau) d tau`.
pub fn forcing_transforms(
    f: &ForcingProfile,
    lambda: Complex64,
    w: Complex64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<(Complex64, Complex64)> {
    check_time(t)?;
    let mut fhat = Complex64::new(0.0, 0.0);
    let mut ftil = Complex64::new(0.0, 0.0);
    for (space, time) in f.terms() {
        let xh = half_line_fourier(space, lambda, cfg)?;
        fhat += xh * time.eval(t);
        ftil += xh * time_transform(time, w, t, cfg)?;
    }
    Ok((fhat, ftil))
}

/// `e^{-w t} f_tilde(lambda, w, t)`, differentiated `m` times in `t`.
pub fn damped_forcing_transform(
    f: &ForcingProfile,
    lambda: Complex64,
    w: Complex64,
    t: f64,
    m: usize,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (space, time) in f.terms() {
        let xh = half_line_fourier(space, lambda, cfg)?;
        acc += xh * damped_time_transform_dt(time, w, t, m, cfg)?;
    }
    Ok(acc)
}

/// `h_M(lambda, t) = sum_{j=1}^{M} d^{j-1}f/dx^{j-1}(0, t) / (i lambda)^j`.
pub fn h_m(f: &ForcingProfile, m: usize, lambda: Complex64, t: f64) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    BoundaryExpansion::of_forcing(f, m, t).eval(lambda)
}

/// `h_tilde_M(lambda, w, t) = int_0^t e^{w tau} h_M(lambda, tau) d tau`.
pub fn h_m_tilde(
    f: &ForcingProfile,
    m: usize,
    lambda: Complex64,
    w: Complex64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (space, time) in f.terms() {
        let s = BoundaryExpansion::of_profile(space, m).eval(lambda)?;
        acc += s * time_transform(time, w, t, cfg)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> QuadConfig {
        QuadConfig::default().with_tol(1e-12)
    }

    #[test]
    fn kdv_dispersion_real_part() {
        let d = Dispersion::new(Pde::Kdv);
        let (xi, eta) = (0.7, -1.3);
        let w = d.omega(c(xi, eta));
        assert!((w.re - (3.0 * xi * xi * eta - eta.powi(3))).abs() < 1e-13);
        assert!((w.im - (-xi.powi(3) + 3.0 * xi * eta * eta)).abs() < 1e-13);
    }

    #[test]
    fn exp_decay_transform() {
        let u0 = DataProfile::exp_decay(1.0);
        for lam in [-3.0, -0.5, 0.0, 1.2, 7.0] {
            let l = c(lam, 0.0);
            let expect = 1.0 / (1.0 + I * l);
            assert!((half_line_fourier(&u0, l, &cfg()).unwrap() - expect).norm() < 1e-15);
            let (q, _) = half_line_fourier_quadrature(&u0, l, &cfg()).unwrap();
            assert!((q - expect).norm() < 1e-10);
        }
        assert!((half_line_fourier(&u0, c(0.0, 0.0), &cfg()).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(
            half_line_fourier(&DataProfile::zero(), c(2.0, 5.0), &cfg()).unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn upper_half_plane_without_closed_form() {
        let u0 = DataProfile::bump(0.5, 2.0);
        assert!(matches!(
            half_line_fourier(&u0, c(0.3, 0.2), &cfg()),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn closed_forms_match_quadrature_on_grid() {
        let profiles = [
            DataProfile::exp_decay(1.0),
            DataProfile::exp_decay(2.5),
            DataProfile::gaussian(1.0),
            DataProfile::from_shape(crate::profiles::Shape::XTimesGaussian { a: 0.7 }),
        ];
        for u0 in &profiles {
            assert!(u0.has_closed_form_transform());
            for j in 0..50 {
                let l = c(-6.0 + 12.0 * j as f64 / 49.0, -0.1 * (j % 7) as f64);
                let closed = u0.closed_form_transform(l).unwrap();
                let (quad, _) = half_line_fourier_quadrature(u0, l, &cfg()).unwrap();
                assert!((closed - quad).norm() < 1e-10, "{} at {l}", u0.name());
            }
        }
    }

    #[test]
    fn sigma_one_example() {
        let u0 = DataProfile::exp_decay(1.0);
        let lam = c(0.0, -10.0);
        let s = sigma_m(&u0, 1, lam).unwrap();
        assert!((s - 0.1).norm() < 1e-15);
        let rem = half_line_fourier(&u0, lam, &cfg()).unwrap() - s;
        assert!(rem.norm() < 2e-2);
        assert!(matches!(
            sigma_m(&u0, 3, c(0.0, 0.0)),
            Err(Error::SingularArgument(_))
        ));
        assert_eq!(sigma_m(&DataProfile::zero(), 4, lam).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn sigma_remainder_decay_order() {
        let u0 = DataProfile::exp_decay(1.0);
        let m = 4;
        let mut bounds = Vec::new();
        for r in [10.0, 20.0, 40.0] {
            let mut worst: f64 = 0.0;
            for l in [c(r, 0.0), c(-r, 0.0)] {
                let rem = half_line_fourier(&u0, l, &cfg()).unwrap() - sigma_m(&u0, m, l).unwrap();
                worst = worst.max((rem * l.powu(m as u32 + 1)).norm());
            }
            bounds.push(worst);
        }
        assert!(bounds.iter().all(|b| *b < 2.0), "{bounds:?}");
    }

    #[test]
    fn time_transform_examples() {
        let one = DataProfile::constant(1.0);
        let w = c(0.4, -1.7);
        let t = 1.3;
        let expect = ((w * t).exp() - 1.0) / w;
        assert!((time_transform(&one, w, t, &cfg()).unwrap() - expect).norm() < 1e-14);
        assert!((time_transform(&one, c(0.0, 0.0), t, &cfg()).unwrap() - t).norm() < 1e-15);
        let damped = damped_time_transform(&one, w, t, &cfg()).unwrap();
        assert!((damped - (-w * t).exp() * expect).norm() < 1e-14);
    }

    #[test]
    fn damped_transform_bound_on_kdv_contour() {
        let d = Dispersion::new(Pde::Kdv);
        let g0 = DataProfile::sin_of_t(2.0);
        let t = 1.0;
        let bound = 2.0 * (1.0 - (2.0f64).cos()) / 2.0;
        for r in [0.5, 1.0, 3.0, 10.0] {
            for theta in [std::f64::consts::PI / 3.0, 2.0 * std::f64::consts::PI / 3.0] {
                let lam = Complex64::from_polar(r, theta);
                let w = d.omega(lam);
                assert!(w.re >= -1e-12);
                let v = damped_time_transform(&g0, w, t, &cfg()).unwrap();
                assert!(v.norm() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_and_numeric_time_transforms_agree() {
        let g0 = DataProfile::exp_of_t(-0.7);
        let gauss = DataProfile::gaussian(2.0);
        for w in [c(3.0, 1.0), c(0.1, -4.0), c(-0.5, 0.5)] {
            let a = damped_time_transform(&g0, w, 0.9, &cfg()).unwrap();
            let b = integrate_complex_interval(
                |tau| (-w * (0.9 - tau)).exp() * g0.eval(tau),
                0.0,
                0.9,
                w.im.abs(),
                &cfg(),
            )
            .unwrap()
            .value;
            assert!((a - b).norm() < 1e-11);
            let raw = time_transform(&gauss, w, 0.9, &cfg()).unwrap();
            let damped = damped_time_transform(&gauss, w, 0.9, &cfg()).unwrap();
            assert!((raw * (-w * 0.9).exp() - damped).norm() < 1e-10);
        }
    }

    #[test]
    fn damped_derivative_matches_difference_quotient() {
        let g0 = DataProfile::sin_of_t(1.5);
        let w = c(0.8, 2.0);
        let (t, h) = (0.7, 1e-4);
        let d1 = damped_time_transform_dt(&g0, w, t, 1, &cfg()).unwrap();
        let fd = (damped_time_transform(&g0, w, t + h, &cfg()).unwrap()
            - damped_time_transform(&g0, w, t - h, &cfg()).unwrap())
            / (2.0 * h);
        assert!((d1 - fd).norm() < 1e-6);
    }

    #[test]
    fn forcing_examples() {
        let lam = c(0.6, -0.2);
        let w = c(1.1, 0.3);
        let (a, b) = forcing_transforms(&ForcingProfile::zero(), lam, w, 1.0, &cfg()).unwrap();
        assert_eq!((a, b), (c(0.0, 0.0), c(0.0, 0.0)));
        let f = ForcingProfile::separable(DataProfile::exp_decay(1.0), DataProfile::constant(1.0));
        let t = 0.8;
        let (fh, ft) = forcing_transforms(&f, lam, w, t, &cfg()).unwrap();
        let xh = 1.0 / (1.0 + I * lam);
        assert!((fh - xh).norm() < 1e-14);
        assert!((ft - xh * ((w * t).exp() - 1.0) / w).norm() < 1e-14);
        let (_, zero) = forcing_transforms(&f, lam, w, 0.0, &cfg()).unwrap();
        assert_eq!(zero, c(0.0, 0.0));
        let h1 = h_m(&f, 1, lam, t).unwrap();
        assert!((h1 - 1.0 / (I * lam)).norm() < 1e-15);
        assert_eq!(h_m(&ForcingProfile::zero(), 3, lam, t).unwrap(), c(0.0, 0.0));
        let ht = h_m_tilde(&f, 1, lam, w, t, &cfg()).unwrap();
        assert!((ht - h1 * ((w * t).exp() - 1.0) / w).norm() < 1e-14);
    }

    #[test]
    fn forcing_remainder_decay() {
        let f = ForcingProfile::separable(DataProfile::exp_decay(2.0), DataProfile::sin_of_t(1.0));
        let m = 3;
        for r in [10.0, 20.0, 40.0] {
            let l = c(r, 0.0);
            let (fh, _) = forcing_transforms(&f, l, c(0.0, 0.0), 0.5, &cfg()).unwrap();
            let rem = fh - h_m(&f, m, l, 0.5).unwrap();
            assert!((rem * l.powu(m as u32 + 1)).norm() < 10.0);
        }
    }
}
