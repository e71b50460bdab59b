//! Second-order forward-mode automatic differentiation.
//!
//! A [`Dual2`] carries a value together with its gradient and Hessian with
//! respect to `m` seed variables. Metric exponents are written once as
//! functions of `&[Dual2]` and evaluated either with `m = 0` (value only) or
//! with chart coordinates as seeds (exact first and second derivatives).

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    value: f64,
    grad: Vec<f64>,
    // row-major m x m, kept symmetric
    hess: Vec<f64>,
}

impl Dual2 {
    /// A constant with `m` derivative slots.
    pub fn constant(value: f64, m: usize) -> Self {
        Dual2 {
            value,
            grad: vec![0.0; m],
            hess: vec![0.0; m * m],
        }
    }

    /// The `index`-th of `m` seed variables, evaluated at `value`.
    pub fn variable(value: f64, index: usize, m: usize) -> Self {
        let mut d = Dual2::constant(value, m);
        d.grad[index] = 1.0;
        d
    }

    /// Seeds every entry of `values` as an independent variable.
    pub fn variables(values: &[f64]) -> Vec<Dual2> {
        let m = values.len();
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual2::variable(v, i, m))
            .collect()
    }

    /// Value-only inputs (no derivative slots).
    pub fn plain(values: &[f64]) -> Vec<Dual2> {
        values.iter().map(|&v| Dual2::constant(v, 0)).collect()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.grad.len() + j]
    }

    pub fn hess_flat(&self) -> &[f64] {
        &self.hess
    }

    /// Same derivative dimension as `self`, constant value.
    pub fn lift(&self, value: f64) -> Dual2 {
        Dual2::constant(value, self.dim())
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value()`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Dual2 {
        let m = self.dim();
        let mut out = Dual2 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
            hess: self.hess.iter().map(|h| f1 * h).collect(),
        };
        if f2 != 0.0 {
            for i in 0..m {
                for j in 0..m {
                    out.hess[i * m + j] += f2 * self.grad[i] * self.grad[j];
                }
            }
        }
        out
    }

    pub fn exp(&self) -> Dual2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Dual2 {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(&self) -> Dual2 {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn recip(&self) -> Dual2 {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn powi(&self, p: i32) -> Dual2 {
        let v = self.value;
        let pf = p as f64;
        let f1 = if p == 0 { 0.0 } else { pf * v.powi(p - 1) };
        let f2 = if p == 0 || p == 1 {
            0.0
        } else {
            pf * (pf - 1.0) * v.powi(p - 2)
        };
        self.chain(v.powi(p), f1, f2)
    }

    pub fn powf(&self, p: f64) -> Dual2 {
        if p == p.trunc() && p.abs() < 64.0 {
            return self.powi(p as i32);
        }
        let v = self.value;
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    pub fn sin(&self) -> Dual2 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Dual2 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Dual2 {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn sinh(&self) -> Dual2 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(&self) -> Dual2 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(&self) -> Dual2 {
        let t = self.value.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }

    /// Sum of squares of a slice of jets.
    pub fn norm_sq(xs: &[Dual2]) -> Dual2 {
        let mut acc = xs
            .first()
            .map(|x| x.lift(0.0))
            .unwrap_or_else(|| Dual2::constant(0.0, 0));
        for x in xs {
            acc = &acc + &(x * x);
        }
        acc
    }

    fn check_dims(&self, other: &Dual2) {
        debug_assert_eq!(self.dim(), other.dim(), "Dual2 dimension mismatch");
    }
}

impl Add<&Dual2> for &Dual2 {
    type Output = Dual2;
    fn add(self, rhs: &Dual2) -> Dual2 {
        self.check_dims(rhs);
        Dual2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&Dual2> for &Dual2 {
    type Output = Dual2;
    fn sub(self, rhs: &Dual2) -> Dual2 {
        self.check_dims(rhs);
        Dual2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&Dual2> for &Dual2 {
    type Output = Dual2;
    fn mul(self, rhs: &Dual2) -> Dual2 {
        self.check_dims(rhs);
        let m = self.dim();
        let (a, b) = (self.value, rhs.value);
        let mut hess = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                hess[k] = a * rhs.hess[k]
                    + b * self.hess[k]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        Dual2 {
            value: a * b,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(ga, gb)| a * gb + b * ga)
                .collect(),
            hess,
        }
    }
}

impl Div<&Dual2> for &Dual2 {
    type Output = Dual2;
    fn div(self, rhs: &Dual2) -> Dual2 {
        self * &rhs.recip()
    }
}

impl Neg for &Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        Dual2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        -&self
    }
}

impl Add<f64> for &Dual2 {
    type Output = Dual2;
    fn add(self, rhs: f64) -> Dual2 {
        let mut out = self.clone();
        out.value += rhs;
        out
    }
}

impl Mul<f64> for &Dual2 {
    type Output = Dual2;
    fn mul(self, rhs: f64) -> Dual2 {
        Dual2 {
            value: self.value * rhs,
            grad: self.grad.iter().map(|g| g * rhs).collect(),
            hess: self.hess.iter().map(|h| h * rhs).collect(),
        }
    }
}

impl Sub<f64> for &Dual2 {
    type Output = Dual2;
    fn sub(self, rhs: f64) -> Dual2 {
        self + (-rhs)
    }
}

impl Div<f64> for &Dual2 {
    type Output = Dual2;
    fn div(self, rhs: f64) -> Dual2 {
        self * (1.0 / rhs)
    }
}

impl Add<&Dual2> for f64 {
    type Output = Dual2;
    fn add(self, rhs: &Dual2) -> Dual2 {
        rhs + self
    }
}

impl Sub<&Dual2> for f64 {
    type Output = Dual2;
    fn sub(self, rhs: &Dual2) -> Dual2 {
        &(-rhs) + self
    }
}

impl Mul<&Dual2> for f64 {
    type Output = Dual2;
    fn mul(self, rhs: &Dual2) -> Dual2 {
        rhs * self
    }
}

impl Div<&Dual2> for f64 {
    type Output = Dual2;
    fn div(self, rhs: &Dual2) -> Dual2 {
        &rhs.recip() * self
    }
}

// Owned-operand forwarding so expressions can be written without `&` noise.
macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Dual2> for Dual2 {
            type Output = Dual2;
            fn $m(self, rhs: Dual2) -> Dual2 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Dual2> for Dual2 {
            type Output = Dual2;
            fn $m(self, rhs: &Dual2) -> Dual2 {
                (&self).$m(rhs)
            }
        }
        impl $tr<Dual2> for &Dual2 {
            type Output = Dual2;
            fn $m(self, rhs: Dual2) -> Dual2 {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for Dual2 {
            type Output = Dual2;
            fn $m(self, rhs: f64) -> Dual2 {
                (&self).$m(rhs)
            }
        }
        impl $tr<Dual2> for f64 {
            type Output = Dual2;
            fn $m(self, rhs: Dual2) -> Dual2 {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(&[Dual2]) -> Dual2, at: &[f64]) {
        let jet = f(&Dual2::variables(at));
        let m = at.len();
        let h = 1e-4;
        let val = |p: &[f64]| f(&Dual2::plain(p)).value();
        assert!((jet.value() - val(at)).abs() < 1e-14);
        for i in 0..m {
            let mut p = at.to_vec();
            p[i] += h;
            let fp = val(&p);
            p[i] -= 2.0 * h;
            let fm = val(&p);
            let g = (fp - fm) / (2.0 * h);
            assert!((jet.grad()[i] - g).abs() < 1e-6, "grad {i}");
            for j in 0..m {
                let mut q = at.to_vec();
                let mut e = |di: f64, dj: f64| {
                    q.copy_from_slice(at);
                    q[i] += di;
                    q[j] += dj;
                    val(&q)
                };
                let hij = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
                assert!((jet.hess(i, j) - hij).abs() < 1e-5, "hess {i}{j}");
            }
        }
    }

    #[test]
    fn products_and_quotients_match_finite_differences() {
        fd_check(|x| &(&x[0] * &x[1]) / &(&x[2] + 3.0), &[0.3, -1.2, 0.7]);
    }

    #[test]
    fn transcendental_functions_match_finite_differences() {
        fd_check(
            |x| {
                let a = (&x[0] * &x[1]).exp();
                let b = (&x[1] + 2.0).ln().sqrt();
                let c = x[2].sin() * x[0].cos() + x[2].tanh();
                a + b + c + x[0].powf(2.5)
            },
            &[0.4, 0.9, -0.3],
        );
    }

    #[test]
    fn hyperbolic_and_powers_match_finite_differences() {
        fd_check(
            |x| x[0].sinh() * x[1].cosh() + x[0].powi(3) - 2.0 / &x[1] + x[1].tan(),
            &[0.2, 0.6],
        );
    }

    #[test]
    fn plain_inputs_carry_no_derivatives() {
        let x = Dual2::plain(&[1.0, 2.0]);
        let y = &x[0] * &x[1];
        assert_eq!(y.dim(), 0);
        assert_eq!(y.value(), 2.0);
    }
}
