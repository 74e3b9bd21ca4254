//! Second-order forward-mode differentiation in three variables.
//!
//! Zoo metrics and (optionally) parsed chart expressions are written once,
//! generically over [`Real`], and evaluated on [`Jet2`] seeds to obtain the
//! metric together with its exact first and second partial derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and [`Jet2`].
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, e: Self) -> Self;

    fn powi(self, n: i32) -> Self {
        let mut acc = Self::cst(1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc * self;
        }
        if n < 0 {
            Self::cst(1.0) / acc
        } else {
            acc
        }
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

/// Value, gradient and Hessian of a scalar with respect to three seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            d: [0.0; 3],
            h: [[0.0; 3]; 3],
        }
    }

    /// The coordinate function `x_axis` evaluated at `v`.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut j = Self::constant(v);
        j.d[axis] = 1.0;
        j
    }

    pub fn seed(p: &[f64; 3]) -> [Self; 3] {
        [
            Self::variable(p[0], 0),
            Self::variable(p[1], 1),
            Self::variable(p[2], 2),
        ]
    }

    /// Chain rule for a unary function with value `f`, slope `f1`, curvature `f2`.
    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f);
        for a in 0..3 {
            out.d[a] = f1 * self.d[a];
            for b in 0..3 {
                out.h[a][b] = f1 * self.h[a][b] + f2 * self.d[a] * self.d[b];
            }
        }
        out
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out.v += o.v;
        for a in 0..3 {
            out.d[a] += o.d[a];
            for b in 0..3 {
                out.h[a][b] += o.h[a][b];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        out.v = -out.v;
        for a in 0..3 {
            out.d[a] = -out.d[a];
            for b in 0..3 {
                out.h[a][b] = -out.h[a][b];
            }
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for a in 0..3 {
            out.d[a] = self.v * o.d[a] + o.v * self.d[a];
            for b in 0..3 {
                out.h[a][b] = self.v * o.h[a][b]
                    + o.v * self.h[a][b]
                    + self.d[a] * o.d[b]
                    + o.d[a] * self.d[b];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Real for Jet2 {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn tan(self) -> Self {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        let s2 = 1.0 - t * t;
        self.chain(t, s2, -2.0 * t * s2)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
    fn powf(self, e: Self) -> Self {
        // constant integer exponents keep negative bases usable
        let const_exp = e.d.iter().all(|&x| x == 0.0) && e.h.iter().flatten().all(|&x| x == 0.0);
        if const_exp && e.v.fract() == 0.0 && e.v.abs() <= 64.0 {
            return self.powi(e.v as i32);
        }
        if const_exp {
            let p = e.v;
            let f = self.v.powf(p);
            return self.chain(f, p * self.v.powf(p - 1.0), p * (p - 1.0) * self.v.powf(p - 2.0));
        }
        (e * self.ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn([Jet2; 3]) -> Jet2, g: impl Fn([f64; 3]) -> f64, p: [f64; 3]) {
        let j = f(Jet2::seed(&p));
        assert!((j.v - g(p)).abs() < 1e-14);
        let h = 1e-5;
        for a in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[a] += h;
            pm[a] -= h;
            let fd = (g(pp) - g(pm)) / (2.0 * h);
            assert!((fd - j.d[a]).abs() < 1e-8, "d{a}: {fd} vs {}", j.d[a]);
            for b in 0..3 {
                let e = 1e-4;
                let at = |da: f64, db: f64| {
                    let mut q = p;
                    q[a] += da;
                    q[b] += db;
                    g(q)
                };
                let fd2 = (at(e, e) - at(e, -e) - at(-e, e) + at(-e, -e)) / (4.0 * e * e);
                assert!((fd2 - j.h[a][b]).abs() < 1e-5, "h{a}{b}: {fd2} vs {}", j.h[a][b]);
            }
        }
    }

    #[test]
    fn products_and_quotients_match_finite_differences() {
        fd_check(
            |[x, y, z]| x * y / (Jet2::cst(1.0) + z * z),
            |[x, y, z]| x * y / (1.0 + z * z),
            [0.3, -1.2, 0.7],
        );
    }

    #[test]
    fn transcendental_functions_match_finite_differences() {
        fd_check(
            |[x, y, z]| x.sin() * y.cosh() + z.exp().sqrt() - (x * z).tanh() + y.tan().ln().abs(),
            |[x, y, z]| x.sin() * y.cosh() + z.exp().sqrt() - (x * z).tanh() + y.tan().ln().abs(),
            [0.4, 0.9, -0.3],
        );
        fd_check(
            |[x, y, _]| x.powf(Jet2::cst(2.5)) + y.powf(x) + x.cos() * y.sinh(),
            |[x, y, _]| x.powf(2.5) + y.powf(x) + x.cos() * y.sinh(),
            [1.3, 0.8, 0.0],
        );
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        let j = Jet2::variable(-2.0, 0).powf(Jet2::cst(3.0));
        assert_eq!(j.v, -8.0);
        assert_eq!(j.d[0], 12.0);
        assert_eq!(j.h[0][0], -12.0);
    }
}
