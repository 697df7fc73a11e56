//! Closed-form initial, boundary and forcing data.
//!
//! Every profile is a finite linear combination of built-in shapes, each of which
//! can produce a Taylor jet at any point. Exact derivatives feed the boundary
//! expansions used by the transforms and the corner compatibility flags.

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pde {
    Heat,
    Kdv,
}

impl Pde {
    /// Spatial order of the evolution operator (2 for heat, 3 for KdV).
    pub fn order(self) -> usize {
        match self {
            Pde::Heat => 2,
            Pde::Kdv => 3,
        }
    }
}

impl std::fmt::Display for Pde {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pde::Heat => write!(f, "heat"),
            Pde::Kdv => write!(f, "kdv"),
        }
    }
}

impl std::str::FromStr for Pde {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Pde::Heat),
            "kdv" => Ok(Pde::Kdv),
            other => Err(Error::Config(format!("unknown pde `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    Schwartz,
    SmoothBounded,
}

/// One built-in shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `e^{-a x}`
    ExpDecay { a: f64 },
    /// `e^{-a x^2}`
    Gaussian { a: f64 },
    /// `x e^{-a x^2}`
    XTimesGaussian { a: f64 },
    /// Smooth bump supported on `(a, b)` with peak value 1 at the midpoint.
    Bump { a: f64, b: f64 },
    Constant { c: f64 },
    /// `e^{a t}`
    ExpOfT { a: f64 },
    /// `sin(omega t)`
    SinOfT { omega: f64 },
    Zero,
}

impl Shape {
    fn jet(&self, x: f64, len: usize) -> Jet {
        let v = Jet::variable(x, len);
        match *self {
            Shape::ExpDecay { a } => v.scale(-a).exp(),
            Shape::Gaussian { a } => (v.clone() * v).scale(-a).exp(),
            Shape::XTimesGaussian { a } => v.clone() * (v.clone() * v).scale(-a).exp(),
            Shape::Bump { a, b } => {
                if x <= a || x >= b {
                    return Jet::constant(0.0, len);
                }
                let s = v.add_scalar(-(a + b) / 2.0).scale(2.0 / (b - a));
                let one_minus = (s.clone() * s).scale(-1.0).add_scalar(1.0);
                (one_minus.recip().scale(-1.0).add_scalar(1.0)).exp()
            }
            Shape::Constant { c } => Jet::constant(c, len),
            Shape::ExpOfT { a } => v.scale(a).exp(),
            Shape::SinOfT { omega } => v.scale(omega).sin_cos().0,
            Shape::Zero => Jet::constant(0.0, len),
        }
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            Shape::ExpDecay { a } => (-a * x).exp(),
            Shape::Gaussian { a } => (-a * x * x).exp(),
            Shape::XTimesGaussian { a } => x * (-a * x * x).exp(),
            Shape::Bump { a, b } => {
                if x <= a || x >= b {
                    0.0
                } else {
                    let s = (2.0 * x - a - b) / (b - a);
                    (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
            Shape::Constant { c } => c,
            Shape::ExpOfT { a } => (a * x).exp(),
            Shape::SinOfT { omega } => (omega * x).sin(),
            Shape::Zero => 0.0,
        }
    }

    /// Representation as `sum c_k e^{beta_k x}` when one exists.
    fn exp_sum(&self) -> Option<Vec<(Complex64, Complex64)>> {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Shape::ExpDecay { a } => Some(vec![(one, Complex64::new(-a, 0.0))]),
            Shape::Constant { c } => Some(vec![(Complex64::new(c, 0.0), Complex64::new(0.0, 0.0))]),
            Shape::ExpOfT { a } => Some(vec![(one, Complex64::new(a, 0.0))]),
            Shape::SinOfT { omega } => {
                let half = Complex64::new(0.0, -0.5);
                Some(vec![
                    (half, Complex64::new(0.0, omega)),
                    (-half, Complex64::new(0.0, -omega)),
                ])
            }
            Shape::Zero => Some(vec![]),
            _ => None,
        }
    }

    /// Half-line Fourier transform in closed form, where one is known.
    fn closed_form_transform(&self, lambda: Complex64) -> Option<Complex64> {
        let i = Complex64::i();
        match *self {
            Shape::ExpDecay { a } => Some(1.0 / (i * lambda + a)),
            Shape::Gaussian { a } => Some(gaussian_transform(a, lambda)),
            Shape::XTimesGaussian { a } => {
                Some((1.0 - i * lambda * gaussian_transform(a, lambda)) / (2.0 * a))
            }
            Shape::Zero => Some(Complex64::new(0.0, 0.0)),
            _ => None,
        }
    }

    fn decay_class(&self) -> DecayClass {
        match self {
            Shape::ExpDecay { .. }
            | Shape::Gaussian { .. }
            | Shape::XTimesGaussian { .. }
            | Shape::Bump { .. }
            | Shape::Zero => DecayClass::Schwartz,
            _ => DecayClass::SmoothBounded,
        }
    }

    fn support_bound(&self, tol: f64) -> Option<f64> {
        let log = (1.0 / tol).ln().max(1.0);
        match *self {
            Shape::ExpDecay { a } => Some((log + 10.0 * a.max(1.0).ln()) / a),
            Shape::Gaussian { a } => Some(((log + 10.0) / a).sqrt()),
            Shape::XTimesGaussian { a } => Some(((log + 15.0) / a).sqrt() + 1.0),
            Shape::Bump { b, .. } => Some(b),
            Shape::Zero => Some(0.0),
            _ => None,
        }
    }

    fn lower_support(&self) -> f64 {
        match *self {
            Shape::Bump { a, .. } => a.max(0.0),
            _ => 0.0,
        }
    }

    fn name(&self) -> String {
        match *self {
            Shape::ExpDecay { a } => format!("exp_decay({a})"),
            Shape::Gaussian { a } => format!("gaussian({a})"),
            Shape::XTimesGaussian { a } => format!("x_times_gaussian({a})"),
            Shape::Bump { a, b } => format!("bump({a},{b})"),
            Shape::Constant { c } => format!("constant({c})"),
            Shape::ExpOfT { a } => format!("exp_of_t({a})"),
            Shape::SinOfT { omega } => format!("sin_of_t({omega})"),
            Shape::Zero => "zero".to_string(),
        }
    }

    fn to_spec(self) -> ProfileSpec {
        let mut spec = ProfileSpec::named("zero");
        match self {
            Shape::ExpDecay { a } => {
                spec.name = "exp_decay".into();
                spec.a = Some(a);
            }
            Shape::Gaussian { a } => {
                spec.name = "gaussian".into();
                spec.a = Some(a);
            }
            Shape::XTimesGaussian { a } => {
                spec.name = "x_times_gaussian".into();
                spec.a = Some(a);
            }
            Shape::Bump { a, b } => {
                spec.name = "bump".into();
                spec.a = Some(a);
                spec.b = Some(b);
            }
            Shape::Constant { c } => {
                spec.name = "constant".into();
                spec.c = Some(c);
            }
            Shape::ExpOfT { a } => {
                spec.name = "exp_of_t".into();
                spec.a = Some(a);
            }
            Shape::SinOfT { omega } => {
                spec.name = "sin_of_t".into();
                spec.omega = Some(omega);
            }
            Shape::Zero => {}
        }
        spec
    }
}

/// A closed-form datum on `[0, inf)`: a linear combination of [`Shape`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct DataProfile {
    terms: Vec<(f64, Shape)>,
}

impl DataProfile {
    pub fn zero() -> Self {
        DataProfile { terms: vec![] }
    }

    pub fn from_shape(shape: Shape) -> Self {
        match shape {
            Shape::Zero => Self::zero(),
            s => DataProfile {
                terms: vec![(1.0, s)],
            },
        }
    }

    pub fn exp_decay(a: f64) -> Self {
        Self::from_shape(Shape::ExpDecay { a })
    }

    pub fn gaussian(a: f64) -> Self {
        Self::from_shape(Shape::Gaussian { a })
    }

    pub fn bump(a: f64, b: f64) -> Self {
        Self::from_shape(Shape::Bump { a, b })
    }

    pub fn constant(c: f64) -> Self {
        Self::from_shape(Shape::Constant { c })
    }

    pub fn exp_of_t(a: f64) -> Self {
        Self::from_shape(Shape::ExpOfT { a })
    }

    pub fn sin_of_t(omega: f64) -> Self {
        Self::from_shape(Shape::SinOfT { omega })
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &DataProfile, b: f64) -> Self {
        let mut terms: Vec<_> = self.terms.iter().map(|(c, s)| (a * c, *s)).collect();
        terms.extend(other.terms.iter().map(|(c, s)| (b * c, *s)));
        terms.retain(|(c, _)| *c != 0.0);
        DataProfile { terms }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.combine(a, &DataProfile::zero(), 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(f64, Shape)] {
        &self.terms
    }

    pub fn name(&self) -> String {
        if self.terms.is_empty() {
            return "zero".into();
        }
        self.terms
            .iter()
            .map(|(c, s)| {
                if *c == 1.0 {
                    s.name()
                } else {
                    format!("{c}*{}", s.name())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(c, s)| c * s.value(x)).sum()
    }

    /// Taylor jet with `len` coefficients at `x`.
    pub fn jet(&self, x: f64, len: usize) -> Jet {
        self.terms
            .iter()
            .fold(Jet::constant(0.0, len), |acc, (c, s)| acc + s.jet(x, len).scale(*c))
    }

    /// `d^k/dx^k` at `x`, exact up to rounding.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.eval(x);
        }
        self.jet(x, k + 1).derivative(k)
    }

    /// Derivatives `0..n` at `x`.
    pub fn derivatives(&self, x: f64, n: usize) -> Vec<f64> {
        let j = self.jet(x, n);
        (0..n).map(|k| j.derivative(k)).collect()
    }

    pub fn decay_class(&self) -> DecayClass {
        if self
            .terms
            .iter()
            .all(|(_, s)| s.decay_class() == DecayClass::Schwartz)
        {
            DecayClass::Schwartz
        } else {
            DecayClass::SmoothBounded
        }
    }

    /// Point beyond which the profile and its low derivatives are below `tol`.
    pub fn support_bound(&self, tol: f64) -> Option<f64> {
        let mut bound: f64 = 0.0;
        for (c, s) in &self.terms {
            let scaled_tol = tol / c.abs().max(1e-300);
            bound = bound.max(s.support_bound(scaled_tol.min(1.0))?);
        }
        Some(bound)
    }

    /// Left end of the support (nonzero only for bumps away from the origin).
    pub fn lower_support(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, s)| s.lower_support())
            .fold(f64::INFINITY, f64::min)
            .min(if self.terms.is_empty() { 0.0 } else { f64::INFINITY })
    }

    /// `sum c_k e^{beta_k x}` if every term admits such a form.
    pub fn exp_sum(&self) -> Option<Vec<(Complex64, Complex64)>> {
        let mut out = Vec::new();
        for (c, s) in &self.terms {
            for (ck, bk) in s.exp_sum()? {
                out.push((ck * *c, bk));
            }
        }
        Some(out)
    }

    /// Analytic half-line Fourier transform `int_0^inf e^{-i lambda y} u(y) dy`
    /// when every term has one. Exponentials are valid away from their poles
    /// and Gaussians everywhere.
    pub fn closed_form_transform(&self, lambda: Complex64) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, s) in &self.terms {
            acc += *c * s.closed_form_transform(lambda)?;
        }
        Some(acc)
    }

    pub fn has_closed_form_transform(&self) -> bool {
        self.closed_form_transform(Complex64::new(0.0, -1.0)).is_some()
    }

    pub fn to_spec(&self) -> ProfileSpec {
        match self.terms.as_slice() {
            [] => ProfileSpec::named("zero"),
            [(c, s)] if *c == 1.0 => s.to_spec(),
            terms => {
                let mut spec = ProfileSpec::named("sum");
                spec.terms = Some(
                    terms
                        .iter()
                        .map(|(c, s)| WeightedSpec {
                            coef: *c,
                            profile: s.to_spec(),
                        })
                        .collect(),
                );
                spec
            }
        }
    }
}

/// `int_0^inf e^{-a y^2 - i lambda y} dy = sqrt(pi) / (2 sqrt a) w(-lambda / (2 sqrt a))`
/// with `w` the Faddeeva function.
fn gaussian_transform(a: f64, lambda: Complex64) -> Complex64 {
    let sa = a.sqrt();
    (-lambda / (2.0 * sa)).w() * (std::f64::consts::PI.sqrt() / (2.0 * sa))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} requires a positive decay parameter, got {v}"
        )))
    }
}

/// Look up a built-in profile by name; `params` are positional
/// (`a`, `(a, b)`, `c`, or `omega` depending on the shape).
pub fn builtin_profile(name: &str, params: &[f64]) -> Result<DataProfile> {
    let p = |i: usize| -> Result<f64> {
        params.get(i).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("{name} expects at least {} parameter(s)", i + 1))
        })
    };
    let shape = match name {
        "exp_decay" => Shape::ExpDecay {
            a: positive(name, p(0)?)?,
        },
        "gaussian" => Shape::Gaussian {
            a: positive(name, p(0)?)?,
        },
        "x_times_gaussian" => Shape::XTimesGaussian {
            a: positive(name, p(0)?)?,
        },
        "bump" => {
            let (a, b) = (p(0)?, p(1)?);
            if !(b > a) || a < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "bump needs 0 <= a < b, got ({a}, {b})"
                )));
            }
            Shape::Bump { a, b }
        }
        "constant" => Shape::Constant { c: p(0)? },
        "exp_of_t" => Shape::ExpOfT { a: p(0)? },
        "sin_of_t" => Shape::SinOfT { omega: p(0)? },
        "zero" => Shape::Zero,
        other => return Err(Error::UnknownProfile(other.to_string())),
    };
    Ok(DataProfile::from_shape(shape))
}

/// JSON form of a profile: `{"name": "exp_decay", "a": 1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<WeightedSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedSpec {
    pub coef: f64,
    pub profile: ProfileSpec,
}

impl ProfileSpec {
    pub fn named(name: &str) -> Self {
        ProfileSpec {
            name: name.to_string(),
            a: None,
            b: None,
            c: None,
            omega: None,
            terms: None,
        }
    }

    pub fn build(&self) -> Result<DataProfile> {
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| {
                Error::Config(format!("profile `{}` is missing field `{field}`", self.name))
            })
        };
        match self.name.as_str() {
            "exp_decay" | "gaussian" | "x_times_gaussian" | "exp_of_t" => {
                builtin_profile(&self.name, &[need(self.a, "a")?])
            }
            "bump" => builtin_profile("bump", &[need(self.a, "a")?, need(self.b, "b")?]),
            "constant" => builtin_profile("constant", &[need(self.c, "c")?]),
            "sin_of_t" => builtin_profile("sin_of_t", &[need(self.omega, "omega")?]),
            "zero" => Ok(DataProfile::zero()),
            "sum" => {
                let terms = self
                    .terms
                    .as_ref()
                    .ok_or_else(|| Error::Config("profile `sum` is missing `terms`".into()))?;
                terms.iter().try_fold(DataProfile::zero(), |acc, t| {
                    Ok(acc.combine(1.0, &t.profile.build()?, t.coef))
                })
            }
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }
}

/// Forcing `f(x, t) = sum_k X_k(x) T_k(t)`, a finite sum of separable products.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcingProfile {
    terms: Vec<(DataProfile, DataProfile)>,
}

impl ForcingProfile {
    pub fn zero() -> Self {
        ForcingProfile { terms: vec![] }
    }

    pub fn separable(space: DataProfile, time: DataProfile) -> Self {
        if space.is_zero() || time.is_zero() {
            return Self::zero();
        }
        ForcingProfile {
            terms: vec![(space, time)],
        }
    }

    pub fn combine(&self, a: f64, other: &ForcingProfile, b: f64) -> Self {
        let mut terms: Vec<_> = self
            .terms
            .iter()
            .map(|(x, t)| (x.scaled(a), t.clone()))
            .collect();
        terms.extend(other.terms.iter().map(|(x, t)| (x.scaled(b), t.clone())));
        terms.retain(|(x, t)| !x.is_zero() && !t.is_zero());
        ForcingProfile { terms }
    }

    pub fn terms(&self) -> &[(DataProfile, DataProfile)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.terms.iter().map(|(p, q)| p.eval(x) * q.eval(t)).sum()
    }

    /// `d^k f / dx^k` at `(x, t)`.
    pub fn x_derivative(&self, k: usize, x: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(p, q)| p.derivative(k, x) * q.eval(t))
            .sum()
    }

    /// `d^m f / dt^m` at `(x, t)`.
    pub fn t_derivative(&self, m: usize, x: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(p, q)| p.eval(x) * q.derivative(m, t))
            .sum()
    }

    pub fn decay_class(&self) -> DecayClass {
        if self
            .terms
            .iter()
            .all(|(p, _)| p.decay_class() == DecayClass::Schwartz)
        {
            DecayClass::Schwartz
        } else {
            DecayClass::SmoothBounded
        }
    }

    pub fn to_spec(&self) -> ForcingSpec {
        match self.terms.as_slice() {
            [] => ForcingSpec {
                name: "zero".into(),
                x: None,
                t: None,
                terms: None,
            },
            terms => ForcingSpec {
                name: "sum".into(),
                x: None,
                t: None,
                terms: Some(
                    terms
                        .iter()
                        .map(|(p, q)| SeparableSpec {
                            x: p.to_spec(),
                            t: q.to_spec(),
                        })
                        .collect(),
                ),
            },
        }
    }
}

/// JSON form of a forcing term:
/// `{"name": "zero"}`, `{"name": "separable", "x": {...}, "t": {...}}` or
/// `{"name": "sum", "terms": [{"x": {...}, "t": {...}}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<SeparableSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableSpec {
    pub x: ProfileSpec,
    pub t: ProfileSpec,
}

impl ForcingSpec {
    pub fn build(&self) -> Result<ForcingProfile> {
        match self.name.as_str() {
            "zero" => Ok(ForcingProfile::zero()),
            "separable" => {
                let x = self
                    .x
                    .as_ref()
                    .ok_or_else(|| Error::Config("separable forcing needs `x`".into()))?;
                let t = self
                    .t
                    .as_ref()
                    .ok_or_else(|| Error::Config("separable forcing needs `t`".into()))?;
                Ok(ForcingProfile::separable(x.build()?, t.build()?))
            }
            "sum" => {
                let terms = self
                    .terms
                    .as_ref()
                    .ok_or_else(|| Error::Config("forcing `sum` needs `terms`".into()))?;
                let mut out = ForcingProfile::zero();
                for s in terms {
                    let next = ForcingProfile::separable(s.x.build()?, s.t.build()?);
                    out = out.combine(1.0, &next, 1.0);
                }
                Ok(out)
            }
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }
}

/// Corner compatibility between initial and boundary data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Compatibility {
    /// `u0(0) = g0(0)`
    pub zeroth: bool,
    /// heat: `u0''(0) + f(0,0) = g0'(0)`; kdv: `g0'(0) = -u0'''(0) + f(0,0)`
    pub first: bool,
}

pub const COMPAT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub pde: Pde,
    pub u0: DataProfile,
    pub g0: DataProfile,
    pub f: ForcingProfile,
}

impl ProblemSpec {
    pub fn new(pde: Pde, u0: DataProfile, g0: DataProfile, f: ForcingProfile) -> Self {
        ProblemSpec { pde, u0, g0, f }
    }

    pub fn zero(pde: Pde) -> Self {
        Self::new(pde, DataProfile::zero(), DataProfile::zero(), ForcingProfile::zero())
    }

    pub fn compatibility(&self) -> Compatibility {
        check_compatibility(self)
    }

    /// `a * self + b * other` over the data triple (same PDE).
    pub fn combine(&self, a: f64, other: &ProblemSpec, b: f64) -> Self {
        ProblemSpec {
            pde: self.pde,
            u0: self.u0.combine(a, &other.u0, b),
            g0: self.g0.combine(a, &other.g0, b),
            f: self.f.combine(a, &other.f, b),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        file.build()
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            pde: self.pde,
            u0: self.u0.to_spec(),
            g0: self.g0.to_spec(),
            f: self.f.to_spec(),
        }
    }
}

/// Never rejects: incompatible corners are exactly what the non-uniqueness
/// construction feeds on.
pub fn check_compatibility(p: &ProblemSpec) -> Compatibility {
    let zeroth = (p.u0.eval(0.0) - p.g0.eval(0.0)).abs() <= COMPAT_TOL;
    let f00 = p.f.eval(0.0, 0.0);
    let g1 = p.g0.derivative(1, 0.0);
    let first = match p.pde {
        Pde::Heat => (p.u0.derivative(2, 0.0) + f00 - g1).abs() <= COMPAT_TOL,
        Pde::Kdv => (g1 + p.u0.derivative(3, 0.0) - f00).abs() <= COMPAT_TOL,
    };
    Compatibility { zeroth, first }
}

/// On-disk problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub pde: Pde,
    pub u0: ProfileSpec,
    pub g0: ProfileSpec,
    #[serde(default = "zero_forcing")]
    pub f: ForcingSpec,
}

fn zero_forcing() -> ForcingSpec {
    ForcingSpec {
        name: "zero".into(),
        x: None,
        t: None,
        terms: None,
    }
}

impl ProblemFile {
    pub fn build(&self) -> Result<ProblemSpec> {
        Ok(ProblemSpec::new(
            self.pde,
            self.u0.build()?,
            self.g0.build()?,
            self.f.build()?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_decay_values_and_derivatives() {
        let p = builtin_profile("exp_decay", &[1.0]).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert!((p.derivative(3, 0.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_profile_vanishes() {
        let z = builtin_profile("zero", &[]).unwrap();
        for x in [0.0, 0.5, 3.0] {
            assert_eq!(z.eval(x), 0.0);
            assert_eq!(z.derivative(4, x), 0.0);
        }
    }

    #[test]
    fn gaussian_second_derivative_matches_finite_difference() {
        let p = builtin_profile("gaussian", &[1.0]).unwrap();
        let h = 1e-4;
        let fd = (p.eval(h) - 2.0 * p.eval(0.0) + p.eval(-h)) / (h * h);
        assert!((fd + 2.0).abs() < 1e-6);
        assert!((p.derivative(2, 0.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            builtin_profile("exp_decay", &[0.0]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            builtin_profile("gaussian", &[-1.0]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            builtin_profile("wobble", &[1.0]),
            Err(Error::UnknownProfile(_))
        ));
    }

    #[test]
    fn compatibility_flags() {
        let p = ProblemSpec::new(
            Pde::Heat,
            DataProfile::exp_decay(1.0),
            DataProfile::exp_of_t(-1.0),
            ForcingProfile::zero(),
        );
        let c = check_compatibility(&p);
        assert!(c.zeroth);
        assert!(!c.first);

        let step = ProblemSpec::new(
            Pde::Heat,
            DataProfile::zero(),
            DataProfile::constant(1.0),
            ForcingProfile::zero(),
        );
        assert!(!check_compatibility(&step).zeroth);

        let z = check_compatibility(&ProblemSpec::zero(Pde::Kdv));
        assert!(z.zeroth && z.first);

        // e^{t-x} solves both equations, so it is compatible to first order
        for pde in [Pde::Heat, Pde::Kdv] {
            let p = ProblemSpec::new(
                pde,
                DataProfile::exp_decay(1.0),
                DataProfile::exp_of_t(1.0),
                ForcingProfile::zero(),
            );
            let c = check_compatibility(&p);
            assert!(c.zeroth && c.first, "{pde}");
        }
    }

    #[test]
    fn bump_is_flat_at_the_edges() {
        let b = DataProfile::bump(1.0, 3.0);
        assert!((b.eval(2.0) - 1.0).abs() < 1e-15);
        assert_eq!(b.derivative(5, 0.5), 0.0);
        assert!(b.eval(1.01).abs() < 1e-10);
    }

    #[test]
    fn closed_form_transform_for_exponentials() {
        let p = DataProfile::exp_decay(2.0);
        let l = Complex64::new(0.7, -0.3);
        let expect = 1.0 / (Complex64::new(2.0, 0.0) + Complex64::i() * l);
        assert!((p.closed_form_transform(l).unwrap() - expect).norm() < 1e-15);
        assert!(DataProfile::bump(0.5, 2.0).closed_form_transform(l).is_none());
        assert!(DataProfile::constant(1.0).closed_form_transform(l).is_none());
    }

    #[test]
    fn json_problem_file() {
        let text = r#"{ "pde": "kdv", "u0": {"name": "exp_decay", "a": 1.0},
                        "g0": {"name": "exp_of_t", "a": 1.0},
                        "f": {"name": "separable", "x": {"name": "gaussian", "a": 2.0},
                              "t": {"name": "constant", "c": 0.5}} }"#;
        let p = ProblemSpec::from_json(text).unwrap();
        assert_eq!(p.pde, Pde::Kdv);
        assert!((p.f.eval(0.0, 3.0) - 0.5).abs() < 1e-15);
        let back = serde_json::to_string(&p.to_file()).unwrap();
        assert_eq!(ProblemSpec::from_json(&back).unwrap(), p);

        let err = ProblemSpec::from_json("{ \"pde\": \"kdv\",\n \"u0\": 3 }").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("line 2")), "{err}");
    }
}
