//! The Airy function `Ai` and its derivative on the non-negative axis.
//!
//! Three regimes: the Maclaurin series for `z <= 2`, the integral
//! `Ai(z) = e^{-zeta}/pi int_0^inf exp(-s^2 sqrt z) cos(s^3/3) ds` for
//! `2 < z <= 10`, and the large-argument expansion beyond.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, QuadConfig};

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = 0.258_819_403_792_806_8;

fn series(z: f64) -> (f64, f64) {
    let z3 = z * z * z;
    let (mut a, mut b) = (1.0, z);
    let (mut f, mut g) = (a, b);
    let (mut fp, mut gp) = (0.0, 1.0);
    for k in 0..80 {
        let kf = k as f64;
        let ra = z3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        let rb = z3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        // Derivatives of the next terms, formed before the update.
        let da = a * z * z / (3.0 * kf + 2.0);
        let db = b * z * z / (3.0 * kf + 3.0);
        a *= ra;
        b *= rb;
        f += a;
        g += b;
        fp += da;
        gp += db;
        if a.abs() < 1e-18 * f.abs() && b.abs() < 1e-18 * g.abs().max(1e-300) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

fn asymptotic(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let mut u = 1.0;
    let mut su = 1.0;
    let mut sv = 1.0;
    for k in 1..=14 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let p = (-zeta).powi(-(k as i32));
        su += u * p;
        sv += v * p;
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    (e * su / z.powf(0.25), -e * sv * z.powf(0.25))
}

fn integral(z: f64) -> Result<(f64, f64)> {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let rz = z.sqrt();
    let top = (45.0 / rz).sqrt();
    let cfg = QuadConfig::default().with_tol(1e-15);
    let (i0, _) = integrate_real(|s| (-s * s * rz).exp() * (s * s * s / 3.0).cos(), 0.0, top, &cfg)?;
    let (i2, _) = integrate_real(|s| s * s * (-s * s * rz).exp() * (s * s * s / 3.0).cos(), 0.0, top, &cfg)?;
    let e = (-zeta).exp() / PI;
    let ai = e * i0;
    Ok((ai, -rz * ai - e * i2 / (2.0 * rz)))
}

/// `(Ai(z), Ai'(z))` for `z >= 0`.
pub fn airy_ai(z: f64) -> Result<(f64, f64)> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Airy evaluation is implemented for z >= 0, got {z}"
        )));
    }
    if z <= 2.0 {
        Ok(series(z))
    } else if z <= 10.0 {
        integral(z)
    } else {
        Ok(asymptotic(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        let table = [
            (0.0, 0.355_028_053_887_817_2, -0.258_819_403_792_806_8),
            (1.0, 0.135_292_416_312_881_4, -0.159_147_441_296_793_2),
            (2.0, 0.034_924_130_423_274_4, -0.053_090_384_433_653_6),
            (5.0, 1.083_444_281_360_744e-4, -2.474_138_908_684_625e-4),
            (10.0, 1.104_753_255_289_869e-10, -3.520_633_676_738_613e-10),
        ];
        for (z, ai, aip) in table {
            let (a, ap) = airy_ai(z).unwrap();
            assert!((a - ai).abs() <= 1e-12 * ai.abs().max(1e-300) + 1e-15, "Ai({z}) = {a}");
            assert!((ap - aip).abs() <= 1e-11 * aip.abs(), "Ai'({z}) = {ap}");
        }
    }

    #[test]
    fn regimes_agree_at_the_joins() {
        let (a, b) = (series(2.0), integral(2.0).unwrap());
        assert!((a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-13);
        let (a, b) = (integral(10.0).unwrap(), asymptotic(10.0));
        assert!((a.0 - b.0).abs() < 1e-12 * a.0 && (a.1 - b.1).abs() < 1e-12 * a.1.abs());
    }

    #[test]
    fn satisfies_airy_equation() {
        let h = 1e-4;
        for z in [0.5, 3.0, 7.0, 12.0] {
            let (_, p1) = airy_ai(z + h).unwrap();
            let (_, p0) = airy_ai(z - h).unwrap();
            let (a, _) = airy_ai(z).unwrap();
            let second = (p1 - p0) / (2.0 * h);
            assert!((second - z * a).abs() < 1e-7 * (z * a).abs().max(1e-12));
        }
    }
}
