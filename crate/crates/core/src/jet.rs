//! Truncated Taylor series arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients `c[k] = f^(k)(x0) / k!` of a function
//! around a base point. Composing jets through the arithmetic below propagates
//! exact derivatives of all orders up to the truncation length, which is how the
//! data profiles expose `d^k u / dx^k` without finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    /// The identity map `x0 + h` truncated to `len` coefficients.
    pub fn variable(x0: f64, len: usize) -> Self {
        let mut c = vec![0.0; len.max(1)];
        c[0] = x0;
        if len > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn constant(v: f64, len: usize) -> Self {
        let mut c = vec![0.0; len.max(1)];
        c[0] = v;
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// `k`-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> f64 {
        if k >= self.c.len() {
            return f64::NAN;
        }
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.c[k] * fact
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn exp(&self) -> Self {
        // e' = a' e  =>  k e_k = sum_{j=1..k} j a_j e_{k-j}
        let n = self.c.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut co = vec![0.0; n];
        s[0] = self.c[0].sin();
        co[0] = self.c[0].cos();
        for k in 1..n {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                ss += ja * co[k - j];
                cc -= ja * s[k - j];
            }
            s[k] = ss / k as f64;
            co[k] = cc / k as f64;
        }
        (Jet { c: s }, Jet { c: co })
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0, self.c.len()) / self.clone()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..=k {
                s += self.c[j] * rhs.c[k - j];
            }
            out[k] = s;
        }
        Jet { c: out }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= rhs.c[j] * q[k - j];
            }
            q[k] = s / rhs.c[0];
        }
        Jet { c: q }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_negative_variable() {
        let x = Jet::variable(0.0, 6);
        let e = (-x).exp();
        for k in 0..6 {
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((e.derivative(k) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_second_derivative() {
        let x = Jet::variable(0.0, 5);
        let g = (-(x.clone() * x)).exp();
        assert!((g.derivative(2) + 2.0).abs() < 1e-14);
        assert!((g.derivative(4) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn sin_cos_and_division() {
        let x = Jet::variable(0.3, 8);
        let (s, c) = x.sin_cos();
        let t = s / c;
        // d/dx tan = sec^2
        let sec2 = 1.0 / 0.3f64.cos().powi(2);
        assert!((t.derivative(1) - sec2).abs() < 1e-13);
        let r = Jet::variable(2.0, 4).recip();
        assert!((r.derivative(3) + 6.0 / 16.0).abs() < 1e-14);
    }
}
