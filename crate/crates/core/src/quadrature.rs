//! Adaptive Gauss-Kronrod quadrature of complex integrands along contours.
//!
//! Each finite piece of a contour is covered by G7/K15 panels; the panel with
//! the largest `|K15 - G7|` is bisected until the summed estimate drops below
//! the requested tolerance. Infinite rays are first cut at a radius chosen by
//! [`ray_truncation`]. Panels are summed in fixed segment-then-parameter order
//! so results do not depend on refinement history.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contours::{Contour, Segment};
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tuning knobs shared by every integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    /// Absolute tolerance on the whole integral.
    pub tol: f64,
    pub max_subdivisions: usize,
    /// Largest admissible ray cutoff (in the ray parameter).
    pub r_max: f64,
    /// Maximum phase advance across one initial panel.
    pub phase_cap: f64,
    /// First probe radius for ray truncation.
    pub r_start: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-9,
            max_subdivisions: 200_000,
            r_max: 1e5,
            phase_cap: 8.0 * PI,
            r_start: 1.0,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(self, tol: f64) -> Self {
        QuadConfig { tol, ..self }
    }
}

type ComplexFn<'a> = dyn Fn(Complex64) -> Complex64 + Sync + 'a;
type RealFn<'a> = dyn Fn(f64) -> f64 + Sync + 'a;
type RateFn<'a> = dyn Fn(Complex64) -> f64 + Sync + 'a;

/// A complex integrand together with the metadata quadrature can exploit.
pub struct Integrand<'a> {
    eval: Box<ComplexFn<'a>>,
    /// Upper bound on `|g(lambda)|` as a function of `|lambda|`.
    envelope: Option<Box<RealFn<'a>>>,
    singular_points: Vec<Complex64>,
    /// `|d(phase)/d lambda|`, used to size the initial panels.
    phase_rate: Option<Box<RateFn<'a>>>,
}

impl<'a> Integrand<'a> {
    pub fn new(f: impl Fn(Complex64) -> Complex64 + Sync + 'a) -> Self {
        Integrand {
            eval: Box::new(f),
            envelope: None,
            singular_points: Vec::new(),
            phase_rate: None,
        }
    }

    pub fn with_envelope(mut self, env: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        self.envelope = Some(Box::new(env));
        self
    }

    pub fn with_singular_points(mut self, pts: Vec<Complex64>) -> Self {
        self.singular_points = pts;
        self
    }

    pub fn with_phase_rate(mut self, rate: impl Fn(Complex64) -> f64 + Sync + 'a) -> Self {
        self.phase_rate = Some(Box::new(rate));
        self
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn zero() -> Self {
        QuadratureResult {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            evaluations: 0,
        }
    }
}

impl std::ops::Add for QuadratureResult {
    type Output = QuadratureResult;
    fn add(self, rhs: Self) -> Self {
        QuadratureResult {
            value: self.value + rhs.value,
            error_estimate: self.error_estimate + rhs.error_estimate,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    resabs: f64,
}

#[derive(PartialEq)]
struct ByErr(f64, usize);

impl Eq for ByErr {}

impl PartialOrd for ByErr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByErr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        k += s * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    ((k), (k - g).norm(), resabs * h.abs())
}

/// A parameter interval of one contour piece.
pub(crate) struct Piece<'f> {
    pub f: &'f dyn Fn(f64) -> Complex64,
    pub breaks: Vec<f64>,
    pub sign: f64,
}

/// Globally adaptive integration over several parameter pieces.
pub(crate) fn adaptive(pieces: &[Piece<'_>], cfg: &QuadConfig) -> Result<QuadratureResult> {
    let mut panels: Vec<Panel> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    let mut total_err = 0.0;

    let push = |panels: &mut Vec<Panel>,
                heap: &mut BinaryHeap<ByErr>,
                evals: &mut usize,
                piece: usize,
                a: f64,
                b: f64|
     -> f64 {
        let (value, err, resabs) = gk15(pieces[piece].f, a, b);
        *evals += 15;
        let idx = panels.len();
        panels.push(Panel {
            piece,
            a,
            b,
            value,
            err,
            resabs,
        });
        heap.push(ByErr(err, idx));
        err
    };

    for (i, p) in pieces.iter().enumerate() {
        for w in p.breaks.windows(2) {
            if w[1] > w[0] {
                total_err += push(&mut panels, &mut heap, &mut evaluations, i, w[0], w[1]);
            }
        }
    }

    let mut subdivisions = 0usize;
    let mut retired: Vec<usize> = Vec::new();
    while total_err > cfg.tol && subdivisions < cfg.max_subdivisions {
        let Some(ByErr(err, idx)) = heap.pop() else {
            break;
        };
        let (piece, a, b, resabs) = {
            let p = &panels[idx];
            (p.piece, p.a, p.b, p.resabs)
        };
        let tiny = (b - a).abs() <= 1e-13 * (a.abs() + b.abs() + 1.0);
        if tiny || err <= 50.0 * f64::EPSILON * resabs {
            retired.push(idx);
            continue;
        }
        let m = 0.5 * (a + b);
        total_err -= err;
        panels[idx].err = -1.0;
        total_err += push(&mut panels, &mut heap, &mut evaluations, piece, a, m);
        total_err += push(&mut panels, &mut heap, &mut evaluations, piece, m, b);
        subdivisions += 1;
    }

    let mut live: Vec<&Panel> = panels.iter().filter(|p| p.err >= 0.0).collect();
    live.sort_by(|x, y| x.piece.cmp(&y.piece).then(x.a.total_cmp(&y.a)));
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut floor = 0.0;
    for p in &live {
        value += p.value * pieces[p.piece].sign;
        err += p.err;
        floor += 50.0 * f64::EPSILON * p.resabs;
    }
    if err > cfg.tol && err > floor {
        return Err(Error::AccuracyFailure {
            estimate: err,
            tol: cfg.tol,
            best_re: value.re,
            best_im: value.im,
        });
    }
    Ok(QuadratureResult {
        value,
        error_estimate: err.min(cfg.tol.max(floor)),
        evaluations,
    })
}

/// Breakpoints on `[a, b]` such that each panel advances the integrand's phase
/// by at most `cap`.
fn phase_breaks(
    seg: &Segment,
    a: f64,
    b: f64,
    rate: Option<&RateFn<'_>>,
    cap: f64,
    min_panels: usize,
) -> Result<Vec<f64>> {
    let mut out = vec![a];
    let n0 = min_panels.max(1);
    let h0 = (b - a) / n0 as f64;
    let Some(rate) = rate else {
        for k in 1..=n0 {
            out.push(if k == n0 { b } else { a + h0 * k as f64 });
        }
        return Ok(out);
    };
    let speed = |s: f64| rate(seg.point(s)) * seg.derivative(s).norm();
    let mut s = a;
    while s < b {
        let mut h = (b - s).min(h0);
        for _ in 0..3 {
            let r = speed(s).max(speed(s + h));
            if r > 0.0 && r.is_finite() {
                h = h.min(cap / r).max((b - a) * 1e-9);
            }
        }
        s = if b - (s + h) < 1e-12 * (b - a) { b } else { s + h };
        out.push(s);
        if out.len() > 2_000_000 {
            return Err(Error::AccuracyFailure {
                estimate: f64::INFINITY,
                tol: 0.0,
                best_re: f64::NAN,
                best_im: f64::NAN,
            });
        }
    }
    Ok(out)
}

fn tail_integral(env: &RealFn<'_>, seg: &Segment, s0: f64, r_max: f64) -> f64 {
    let f = |s: f64| Complex64::new(env(seg.point(s).norm()), 0.0);
    let mut total = 0.0;
    let mut lo = s0;
    let mut width = s0.max(1.0);
    loop {
        let hi = lo + width;
        let mut chunk = 0.0;
        let n = 16;
        for k in 0..n {
            let a = lo + width * k as f64 / n as f64;
            let b = lo + width * (k + 1) as f64 / n as f64;
            chunk += gk15(&f, a, b).0.re;
        }
        total += chunk;
        if chunk <= 1e-6 * total || chunk < 1e-300 || hi > 4.0 * r_max {
            break;
        }
        lo = hi;
        width *= 2.0;
    }
    total
}

/// Cutoff `R` (in the ray parameter) beyond which the integrand contributes
/// less than `tol / 10`.
///
/// With an envelope the tail integral of the envelope is driven below
/// `tol / 10` by doubling then bisection. Without one, `R` doubles until
/// `|g lambda'| < tol / (10 R)` at `R`, `1.5 R` and `2 R`.
pub fn ray_truncation(g: &Integrand<'_>, ray: &Segment, tol: f64, cfg: &QuadConfig) -> Result<f64> {
    if !ray.is_infinite() {
        return Err(Error::InvalidParameter(
            "ray truncation applies to infinite segments only".into(),
        ));
    }
    let target = tol / 10.0;
    if let Some(env) = &g.envelope {
        let mut hi = cfg.r_start;
        while tail_integral(env.as_ref(), ray, hi, cfg.r_max) >= target {
            hi *= 2.0;
            if hi > cfg.r_max {
                return Err(Error::TruncationFailure(hi));
            }
        }
        let mut lo = if hi > cfg.r_start { hi / 2.0 } else { 0.0 };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if tail_integral(env.as_ref(), ray, mid, cfg.r_max) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok(hi);
    }
    let mut r = cfg.r_start;
    loop {
        let thresh = target / r;
        let quiet = [r, 1.5 * r, 2.0 * r].iter().all(|&s| {
            let v = (g.eval)(ray.point(s)) * ray.derivative(s);
            v.norm() < thresh
        });
        if quiet {
            return Ok(r);
        }
        r *= 2.0;
        if r > cfg.r_max {
            return Err(Error::TruncationFailure(r));
        }
    }
}

/// Parameter intervals `[a, b]` covering a segment, with rays truncated.
fn finite_ranges(
    g: &Integrand<'_>,
    seg: &Segment,
    tol: f64,
    cfg: &QuadConfig,
) -> Result<Vec<(Segment, f64, f64, f64)>> {
    let sign = seg.orientation();
    Ok(match seg {
        Segment::Ray { .. } => {
            let r = ray_truncation(g, seg, tol, cfg)?;
            vec![(seg.clone(), 0.0, r, sign)]
        }
        Segment::LineSegment { .. } | Segment::Arc { .. } => vec![(seg.clone(), 0.0, 1.0, sign)],
        Segment::Line { origin, angle, .. } => {
            let left = Segment::ray(*origin, angle + PI, true);
            let right = Segment::ray(*origin, *angle, true);
            let rl = ray_truncation(g, &left, tol, cfg)?;
            let rr = ray_truncation(g, &right, tol, cfg)?;
            vec![(left, 0.0, rl, -sign), (right, 0.0, rr, sign)]
        }
    })
}

/// `int_c g(lambda) d lambda` to absolute tolerance `cfg.tol`.
pub fn integrate(g: &Integrand<'_>, c: &Contour, cfg: &QuadConfig) -> Result<QuadratureResult> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    for p in &g.singular_points {
        if c.contains(*p, 1e-12 * p.norm().max(1.0)) {
            return Err(Error::InvalidContour(format!("{p} lies on the contour")));
        }
    }
    let mut ranges = Vec::new();
    for seg in &c.segments {
        ranges.extend(finite_ranges(g, seg, cfg.tol, cfg)?);
    }
    let funcs: Vec<Box<dyn Fn(f64) -> Complex64 + '_>> = ranges
        .iter()
        .map(|(seg, _, _, _)| {
            let seg = seg.clone();
            Box::new(move |s: f64| (g.eval)(seg.point(s)) * seg.derivative(s))
                as Box<dyn Fn(f64) -> Complex64>
        })
        .collect();
    let mut pieces = Vec::with_capacity(ranges.len());
    for ((seg, a, b, sign), f) in ranges.iter().zip(&funcs) {
        if seg.derivative(0.5).norm() == 0.0 || b <= a {
            continue;
        }
        let min_panels = if seg.is_infinite() { 4 } else { 1 };
        let breaks = phase_breaks(
            seg,
            *a,
            *b,
            g.phase_rate.as_deref(),
            cfg.phase_cap,
            min_panels,
        )?;
        pieces.push(Piece {
            f: f.as_ref(),
            breaks,
            sign: *sign,
        });
    }
    if pieces.is_empty() {
        return Ok(QuadratureResult::zero());
    }
    adaptive(&pieces, cfg)
}

/// Adaptive integral of a real function on `[a, b]`.
pub fn integrate_real(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    if b == a {
        return Ok((0.0, 0.0));
    }
    let (lo, hi, sign) = if b > a { (a, b, 1.0) } else { (b, a, -1.0) };
    let g = |s: f64| Complex64::new(f(s), 0.0);
    let n = 8;
    let breaks = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let r = adaptive(
        &[Piece {
            f: &g,
            breaks,
            sign,
        }],
        cfg,
    )?;
    Ok((r.value.re, r.error_estimate))
}

/// Adaptive integral of a complex function of a real variable on `[a, b]`,
/// with an optional phase speed for the initial panels.
pub fn integrate_complex_interval(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    phase_speed: f64,
    cfg: &QuadConfig,
) -> Result<QuadratureResult> {
    if b == a {
        return Ok(QuadratureResult::zero());
    }
    let (lo, hi, sign) = if b > a { (a, b, 1.0) } else { (b, a, -1.0) };
    let n = if phase_speed > 0.0 {
        ((hi - lo) * phase_speed / cfg.phase_cap).ceil().max(1.0) as usize
    } else {
        1
    }
    .max(2);
    let breaks = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    adaptive(
        &[Piece {
            f: &f,
            breaks,
            sign,
        }],
        cfg,
    )
}
