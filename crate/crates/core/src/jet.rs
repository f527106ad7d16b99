//! Forward-mode differentiation in three variables.
//!
//! [`Jet`] is a multivariate Taylor polynomial truncated at total degree 3,
//! so a single evaluation of a smooth expression yields its value, gradient,
//! Hessian and third-derivative tensor exactly (to rounding). [`Dual`] is the
//! first-order version for the hot gradient-only paths. Field formulas are
//! written once against [`Scalar`] and instantiated for `f64`, `Dual` and
//! `Jet`.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};

pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn add_const(self, k: f64) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn add_const(self, k: f64) -> Self {
        self + k
    }
}

/// Value plus gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual {
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut d = [0.0; 3];
        d[axis] = 1.0;
        Self { v, d }
    }

    pub fn gradient(&self) -> Vector3<f64> {
        Vector3::new(self.d[0], self.d[1], self.d[2])
    }

    fn chain(self, f: f64, df: f64) -> Self {
        Self {
            v: f,
            d: [df * self.d[0], df * self.d[1], df * self.d[2]],
        }
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]],
        }
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
                self.d[2] * o.v + self.v * o.d[2],
            ],
        }
    }
}

impl Div for Dual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        Self {
            v,
            d: [
                (self.d[0] - v * o.d[0]) * inv,
                (self.d[1] - v * o.d[1]) * inv,
                (self.d[2] - v * o.d[2]) * inv,
            ],
        }
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            v: -self.v,
            d: [-self.d[0], -self.d[1], -self.d[2]],
        }
    }
}

impl Scalar for Dual {
    fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 3] }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn atan(self) -> Self {
        self.chain(self.v.atan(), 1.0 / (1.0 + self.v * self.v))
    }
    fn scale(self, k: f64) -> Self {
        Self {
            v: self.v * k,
            d: [self.d[0] * k, self.d[1] * k, self.d[2] * k],
        }
    }
    fn add_const(self, k: f64) -> Self {
        Self { v: self.v + k, ..self }
    }
}

const N: usize = 20;

/// Exponents of the monomials, graded by total degree.
const MONOMIALS: [[u8; 3]; N] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [1, 1, 0],
    [1, 0, 1],
    [0, 2, 0],
    [0, 1, 1],
    [0, 0, 2],
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

fn monomial_index(e: [u8; 3]) -> Option<usize> {
    MONOMIALS.iter().position(|m| *m == e)
}

/// (i, j, k): coefficient i times coefficient j lands in k.
fn product_table() -> &'static [(u8, u8, u8)] {
    static TABLE: OnceLock<Vec<(u8, u8, u8)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(84);
        for (i, a) in MONOMIALS.iter().enumerate() {
            for (j, b) in MONOMIALS.iter().enumerate() {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if let Some(k) = monomial_index(e) {
                    t.push((i as u8, j as u8, k as u8));
                }
            }
        }
        t
    })
}

/// Taylor coefficients up to total degree 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; N],
}

impl Jet {
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        c[1 + axis] = 1.0;
        Self { c }
    }

    fn coeff(&self, e: [u8; 3]) -> f64 {
        self.c[monomial_index(e).expect("degree <= 3")]
    }

    pub fn gradient(&self) -> Vector3<f64> {
        Vector3::new(self.c[1], self.c[2], self.c[3])
    }

    pub fn hessian(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| {
            let mut e = [0u8; 3];
            e[i] += 1;
            e[j] += 1;
            let factor = if i == j { 2.0 } else { 1.0 };
            factor * self.coeff(e)
        })
    }

    /// `third()[k]` is the derivative of the Hessian along axis `k`.
    pub fn third(&self) -> [Matrix3<f64>; 3] {
        std::array::from_fn(|k| {
            Matrix3::from_fn(|i, j| {
                let mut e = [0u8; 3];
                e[i] += 1;
                e[j] += 1;
                e[k] += 1;
                let factor: f64 = e.iter().map(|&p| [1.0, 1.0, 2.0, 6.0][p as usize]).product();
                factor * self.coeff(e)
            })
        })
    }

    /// `f(a0 + δ)` from `f(a0)` and its first three derivatives.
    fn compose(self, f: [f64; 4]) -> Self {
        let mut delta = self;
        delta.c[0] = 0.0;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let mut c = [0.0; N];
        c[0] = f[0];
        for k in 1..N {
            c[k] = f[1] * delta.c[k] + 0.5 * f[2] * d2.c[k] + f[3] / 6.0 * d3.c[k];
        }
        Self { c }
    }

    fn recip(self) -> Self {
        let u = 1.0 / self.c[0];
        let u2 = u * u;
        self.compose([u, -u2, 2.0 * u2 * u, -6.0 * u2 * u2])
    }
}

impl Add for Jet {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for &(i, j, k) in product_table() {
            c[k as usize] += self.c[i as usize] * o.c[j as usize];
        }
        Self { c }
    }
}

impl Div for Jet {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Scalar for Jet {
    fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Self { c }
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn sqrt(self) -> Self {
        let u = self.c[0];
        let s = u.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (u * s), 0.375 / (u * u * s)])
    }
    fn atan(self) -> Self {
        let u = self.c[0];
        let w = 1.0 / (1.0 + u * u);
        self.compose([u.atan(), w, -2.0 * u * w * w, (6.0 * u * u - 2.0) * w * w * w])
    }
    fn scale(mut self, k: f64) -> Self {
        for a in self.c.iter_mut() {
            *a *= k;
        }
        self
    }
    fn add_const(mut self, k: f64) -> Self {
        self.c[0] += k;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<S: Scalar>(x: S, y: S, z: S) -> S {
        ((x * y + z * z).add_const(2.0)).sqrt().atan() / (y.add_const(3.0))
    }

    fn f64_f(p: [f64; 3]) -> f64 {
        f(p[0], p[1], p[2])
    }

    #[test]
    fn product_table_size() {
        assert_eq!(product_table().len(), 84);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let p = [0.7, -0.4, 1.3];
        let jet = f(Jet::variable(p[0], 0), Jet::variable(p[1], 1), Jet::variable(p[2], 2));
        let dual = f(Dual::variable(p[0], 0), Dual::variable(p[1], 1), Dual::variable(p[2], 2));
        assert!((jet.value() - f64_f(p)).abs() < 1e-15);
        let h = 1e-4;
        let shift = |q: [f64; 3], k: usize, s: f64| {
            let mut q = q;
            q[k] += s;
            q
        };
        for k in 0..3 {
            let fd = (f64_f(shift(p, k, h)) - f64_f(shift(p, k, -h))) / (2.0 * h);
            assert!((jet.gradient()[k] - fd).abs() < 1e-8);
            assert!((dual.gradient()[k] - jet.gradient()[k]).abs() < 1e-14);
        }
        let grad = |q: [f64; 3]| f(Jet::variable(q[0], 0), Jet::variable(q[1], 1), Jet::variable(q[2], 2)).gradient();
        let hess = |q: [f64; 3]| f(Jet::variable(q[0], 0), Jet::variable(q[1], 1), Jet::variable(q[2], 2)).hessian();
        let hs = jet.hessian();
        let t = jet.third();
        for k in 0..3 {
            let fd = (grad(shift(p, k, h)) - grad(shift(p, k, -h))) / (2.0 * h);
            for i in 0..3 {
                assert!((hs[(i, k)] - fd[i]).abs() < 1e-8, "hessian {i}{k}");
            }
            let fd3 = (hess(shift(p, k, h)) - hess(shift(p, k, -h))) / (2.0 * h);
            assert!((t[k] - fd3).abs().max() < 1e-7, "third along {k}");
        }
        assert!((hs - hs.transpose()).abs().max() == 0.0);
    }
}
