//! Oriented, explicitly parameterized contours in the spectral plane.
//!
//! A [`Contour`] is an ordered list of [`Segment`]s. Every segment knows its
//! parameter domain, the point `lambda(s)` and the derivative `lambda'(s)`;
//! `orientation = -1` means the segment is traversed against its parameter.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Segment {
    /// `lambda(s) = start + s e^{i(angle + tilt)}`, `s >= 0`.
    Ray {
        start: Complex64,
        angle: f64,
        /// Accumulated rotation; kept apart from `angle` so that opposite
        /// rotations cancel exactly.
        #[serde(default)]
        tilt: f64,
        orientation: f64,
    },
    /// `lambda(s) = start + s (end - start)`, `0 <= s <= 1`.
    LineSegment {
        start: Complex64,
        end: Complex64,
        orientation: f64,
    },
    /// `lambda(s) = center + radius e^{i(theta0 + s (theta1 - theta0))}`, `0 <= s <= 1`.
    Arc {
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
        orientation: f64,
    },
    /// `lambda(s) = origin + s e^{i angle}`, `s` real.
    Line {
        origin: Complex64,
        angle: f64,
        orientation: f64,
    },
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

impl Segment {
    pub fn ray(start: Complex64, angle: f64, outbound: bool) -> Self {
        Segment::Ray {
            start,
            angle,
            tilt: 0.0,
            orientation: if outbound { 1.0 } else { -1.0 },
        }
    }

    pub fn segment(start: Complex64, end: Complex64) -> Self {
        Segment::LineSegment {
            start,
            end,
            orientation: 1.0,
        }
    }

    /// Arc from angle `theta0` to `theta1` (either sense).
    pub fn arc(center: Complex64, radius: f64, theta0: f64, theta1: f64) -> Result<Self> {
        if !(radius > 0.0) || theta0 == theta1 {
            return Err(Error::InvalidParameter(format!(
                "arc needs radius > 0 and a nonempty angle range (r = {radius}, [{theta0}, {theta1}])"
            )));
        }
        Ok(Segment::Arc {
            center,
            radius,
            theta0,
            theta1,
            orientation: 1.0,
        })
    }

    pub fn orientation(&self) -> f64 {
        match *self {
            Segment::Ray { orientation, .. }
            | Segment::LineSegment { orientation, .. }
            | Segment::Arc { orientation, .. }
            | Segment::Line { orientation, .. } => orientation,
        }
    }

    /// Parameter domain; `None` marks an infinite end.
    pub fn domain(&self) -> (Option<f64>, Option<f64>) {
        match self {
            Segment::Ray { .. } => (Some(0.0), None),
            Segment::LineSegment { .. } | Segment::Arc { .. } => (Some(0.0), Some(1.0)),
            Segment::Line { .. } => (None, None),
        }
    }

    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Ray {
                start, angle, tilt, ..
            } => start + cis(angle + tilt) * s,
            Segment::LineSegment { start, end, .. } => start + (end - start) * s,
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
                ..
            } => center + cis(theta0 + s * (theta1 - theta0)) * radius,
            Segment::Line { origin, angle, .. } => origin + cis(angle) * s,
        }
    }

    /// `d lambda / ds` (parameter direction, ignoring orientation).
    pub fn derivative(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Ray { angle, tilt, .. } => cis(angle + tilt),
            Segment::LineSegment { start, end, .. } => end - start,
            Segment::Arc {
                radius,
                theta0,
                theta1,
                ..
            } => {
                let th = theta0 + s * (theta1 - theta0);
                Complex64::i() * cis(th) * radius * (theta1 - theta0)
            }
            Segment::Line { angle, .. } => cis(angle),
        }
    }

    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        match &mut out {
            Segment::Ray { orientation, .. }
            | Segment::LineSegment { orientation, .. }
            | Segment::Arc { orientation, .. }
            | Segment::Line { orientation, .. } => *orientation = -*orientation,
        }
        out
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Segment::Ray { .. } | Segment::Line { .. })
    }

    /// Distance-based membership test.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        match *self {
            Segment::Ray {
                start, angle, tilt, ..
            } => {
                let d = cis(angle + tilt);
                let s = ((z - start) * d.conj()).re.max(0.0);
                (start + d * s - z).norm() <= tol
            }
            Segment::LineSegment { start, end, .. } => {
                let d = end - start;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (z - start).norm() <= tol;
                }
                let s = (((z - start) * d.conj()).re / len2).clamp(0.0, 1.0);
                (start + d * s - z).norm() <= tol
            }
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
                ..
            } => {
                let w = z - center;
                if (w.norm() - radius).abs() > tol {
                    return false;
                }
                let (lo, hi) = if theta0 < theta1 {
                    (theta0, theta1)
                } else {
                    (theta1, theta0)
                };
                let mut th = w.arg();
                while th < lo - 1e-12 {
                    th += 2.0 * PI;
                }
                while th > hi + 1e-12 && th - 2.0 * PI >= lo - 1e-12 {
                    th -= 2.0 * PI;
                }
                let ang_tol = tol / radius;
                th >= lo - ang_tol && th <= hi + ang_tol
            }
            Segment::Line { origin, angle, .. } => {
                let d = cis(angle);
                let s = ((z - origin) * d.conj()).re;
                (origin + d * s - z).norm() <= tol
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub segments: Vec<Segment>,
}

impl Contour {
    pub fn new(segments: Vec<Segment>) -> Self {
        Contour { segments }
    }

    pub fn reversed(&self) -> Self {
        Contour {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.segments.iter().any(|s| s.contains(z, tol))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("contour serializes")
    }
}

/// The real axis traversed left to right, split at the origin.
pub fn real_line() -> Contour {
    Contour::new(vec![
        Segment::ray(Complex64::new(0.0, 0.0), PI, false),
        Segment::ray(Complex64::new(0.0, 0.0), 0.0, true),
    ])
}

/// Boundary of `{Im lambda >= sqrt(3)|Re lambda|}`: the ray at `2pi/3` inbound to
/// the origin followed by the ray at `pi/3` outbound, so the sector lies on the left.
pub fn kdv_contour() -> Contour {
    let o = Complex64::new(0.0, 0.0);
    Contour::new(vec![
        Segment::ray(o, 2.0 * FRAC_PI_3, false),
        Segment::ray(o, FRAC_PI_3, true),
    ])
}

/// Boundary of `{Im lambda >= 0, Re lambda^2 <= 0}`: rays at `3pi/4` (inbound)
/// and `pi/4` (outbound).
pub fn heat_contour() -> Contour {
    let o = Complex64::new(0.0, 0.0);
    Contour::new(vec![
        Segment::ray(o, 3.0 * FRAC_PI_4, false),
        Segment::ray(o, FRAC_PI_4, true),
    ])
}

/// The heat contour with its part inside the unit disk replaced by a unit arc,
/// so that `1/lambda` integrands are finite along it.
///
/// The arc runs clockwise from `e^{3i pi/4}` to `e^{i pi/4}` through `i`. That is
/// the only unit-circle connection between the two rays for which the deformation
/// from the real line leaves the pole at the origin outside the swept region.
pub fn deformed_heat_contour() -> Contour {
    let o = Complex64::new(0.0, 0.0);
    Contour::new(vec![
        Segment::ray(cis(3.0 * FRAC_PI_4), 3.0 * FRAC_PI_4, false),
        Segment::Arc {
            center: o,
            radius: 1.0,
            theta0: 3.0 * FRAC_PI_4,
            theta1: FRAC_PI_4,
            orientation: 1.0,
        },
        Segment::ray(cis(FRAC_PI_4), FRAC_PI_4, true),
    ])
}

/// The horizontal line `Im lambda = eps`, left to right.
pub fn indented_line(eps: f64) -> Result<Contour> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "indented line needs eps > 0, got {eps}"
        )));
    }
    Ok(Contour::new(vec![Segment::Line {
        origin: Complex64::new(0.0, eps),
        angle: 0.0,
        orientation: 1.0,
    }]))
}

/// Rotate every infinite ray by `delta` toward the real axis (a positive
/// `delta` lowers rays in the first quadrant and raises rays in the second).
/// `max_delta` is the half-width of the sector in which the caller's
/// integrand stays analytic and decaying.
pub fn rotate_rays(c: &Contour, delta: f64, max_delta: f64) -> Result<Contour> {
    if delta.abs() > max_delta {
        return Err(Error::InvalidDeformation(format!(
            "rotation {delta} exceeds the analyticity sector (|delta| <= {max_delta})"
        )));
    }
    let mut out = c.clone();
    for seg in &mut out.segments {
        if let Segment::Ray { angle, tilt, .. } = seg {
            let a = *angle + *tilt;
            let sign = if a > 0.0 && a < FRAC_PI_2 {
                -1.0
            } else if a > FRAC_PI_2 && a < PI {
                1.0
            } else {
                return Err(Error::InvalidDeformation(format!(
                    "ray at angle {a} has no well-defined direction toward the real axis"
                )));
            };
            let new_tilt = *tilt + sign * delta;
            let new_angle = *angle + new_tilt;
            if !(new_angle > 0.0 && new_angle < PI) {
                return Err(Error::InvalidDeformation(format!(
                    "rotated ray at angle {new_angle} leaves the upper half-plane"
                )));
            }
            *tilt = new_tilt;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn on_kdv_set(z: Complex64) -> bool {
        (z.im - 3f64.sqrt() * z.re.abs()).abs() <= 1e-12 * (1.0 + z.norm())
    }

    #[test]
    fn kdv_contour_points() {
        let g = kdv_contour();
        let right = &g.segments[1];
        assert!((right.point(1.0) - cis(FRAC_PI_3)).norm() < EPS);
        assert_eq!(right.point(0.0), Complex64::new(0.0, 0.0));
        assert_eq!(g.segments[0].point(0.0), Complex64::new(0.0, 0.0));
        assert!(!g.contains(Complex64::i(), 1e-9));
        for seg in &g.segments {
            for k in 0..100 {
                let s = 0.37 * k as f64;
                assert!(on_kdv_set(seg.point(s)));
            }
        }
    }

    #[test]
    fn kdv_contour_keeps_sector_on_the_left() {
        let g = kdv_contour();
        for seg in &g.segments {
            for s in [0.5, 1.0, 4.0] {
                let tangent = seg.derivative(s) * seg.orientation();
                let probe = seg.point(s) + Complex64::i() * tangent * 1e-3;
                assert!(probe.im >= 3f64.sqrt() * probe.re.abs(), "{seg:?} at {s}");
            }
        }
    }

    #[test]
    fn heat_contour_membership() {
        let g = heat_contour();
        assert!(g.contains(cis(FRAC_PI_4), 1e-12));
        assert!(!g.contains(Complex64::i(), 1e-6));
        assert!(!g.contains(Complex64::new(1.0, 0.0), 1e-6));
        for seg in &g.segments {
            for k in 0..100 {
                let z = seg.point(0.21 * k as f64);
                assert!((z * z).re.abs() < 1e-12 * (1.0 + z.norm_sqr()));
            }
        }
    }

    #[test]
    fn deformed_contour_avoids_origin() {
        let g = deformed_heat_contour();
        let mut min_r = f64::INFINITY;
        for seg in &g.segments {
            let (_, hi) = seg.domain();
            let hi = hi.unwrap_or(10.0);
            for k in 0..=100 {
                min_r = min_r.min(seg.point(hi * k as f64 / 100.0).norm());
            }
        }
        assert!((min_r - 1.0).abs() < 1e-12);
        assert!(!g.contains(Complex64::new(0.0, 0.0), 0.5));
        // arc samples lie on the unit circle
        let arc = &g.segments[1];
        for k in 0..100 {
            assert!((arc.point(k as f64 / 99.0).norm() - 1.0).abs() < 1e-12);
        }
        // consecutive finite endpoints coincide
        assert!((g.segments[0].point(0.0) - arc.point(0.0)).norm() < 1e-15);
        assert!((arc.point(1.0) - g.segments[2].point(0.0)).norm() < 1e-15);
    }

    #[test]
    fn indented_line_checks() {
        let l = indented_line(1.0).unwrap();
        assert_eq!(l.segments[0].point(0.0), Complex64::i());
        assert!(matches!(
            indented_line(-0.1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn rotation_round_trip_and_angles() {
        let g = heat_contour();
        assert_eq!(rotate_rays(&g, 0.0, 0.1).unwrap(), g);
        let r = rotate_rays(&g, PI / 8.0, FRAC_PI_4).unwrap();
        let angles: Vec<f64> = r
            .segments
            .iter()
            .map(|s| s.derivative(0.0).arg())
            .collect();
        assert!((angles[0] - 7.0 * PI / 8.0).abs() < 1e-15);
        assert!((angles[1] - PI / 8.0).abs() < 1e-15);
        let back = rotate_rays(&r, -PI / 8.0, FRAC_PI_4).unwrap();
        assert_eq!(back, g);
        assert!(matches!(
            rotate_rays(&g, 0.3, 0.2),
            Err(Error::InvalidDeformation(_))
        ));
    }

    #[test]
    fn json_dump() {
        let text = kdv_contour().to_json();
        assert!(text.contains("\"kind\": \"ray\""));
        let back: Contour = serde_json::from_str(&text).unwrap();
        assert_eq!(back, kdv_contour());
    }
}
