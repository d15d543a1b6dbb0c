//! Truncated Taylor (jet) arithmetic in one variable.
//!
//! A [`Jet`] stores the coefficients `c_k = f^{(k)}(x0)/k!` of a function at
//! a base point, up to a fixed order. Sums, Cauchy products, quotients and
//! the elementary compositions used by the kernel evaluators (`exp`, `sinh`,
//! `cosh`) follow the exact truncated-series algebra; `deriv` shifts down one
//! order. The scalar type is generic so the same code runs on `f64` and on
//! `Complex64` for contour-shifted evaluation.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar admissible as a jet coefficient.
pub trait JetScalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialEq
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn s_exp(self) -> Self;
    fn s_sinh(self) -> Self;
    fn s_cosh(self) -> Self;
}

impl JetScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn s_exp(self) -> Self {
        self.exp()
    }
    fn s_sinh(self) -> Self {
        self.sinh()
    }
    fn s_cosh(self) -> Self {
        self.cosh()
    }
}

impl JetScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn s_exp(self) -> Self {
        self.exp()
    }
    fn s_sinh(self) -> Self {
        self.sinh()
    }
    fn s_cosh(self) -> Self {
        self.cosh()
    }
}

/// Taylor coefficients of a scalar function at a fixed base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T: JetScalar> {
    /// `c[k]` is the k-th Taylor coefficient; `order = c.len() - 1`.
    pub c: Vec<T>,
}

impl<T: JetScalar> Jet<T> {
    pub fn constant(value: T, order: usize) -> Self {
        let mut c = vec![T::zero(); order + 1];
        c[0] = value;
        Jet { c }
    }

    /// The identity function `x` expanded at `x0`.
    pub fn variable(x0: T, order: usize) -> Self {
        let mut c = vec![T::zero(); order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = T::one();
        }
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// k-th derivative value `f^{(k)}(x0) = k! * c_k`.
    pub fn derivative(&self, k: usize) -> T {
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.c[k] * T::from_f64(fact)
    }

    /// Derivative as a jet, one order lower.
    pub fn deriv(&self) -> Self {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let c = (1..self.c.len())
            .map(|k| self.c[k] * T::from_f64(k as f64))
            .collect();
        Jet { c }
    }

    pub fn scale(&self, s: T) -> Self {
        Jet {
            c: self.c.iter().map(|&x| x * s).collect(),
        }
    }

    fn common_order(&self, rhs: &Self) -> usize {
        self.order().min(rhs.order())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let m = self.common_order(rhs);
        Jet {
            c: (0..=m).map(|k| self.c[k] + rhs.c[k]).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let m = self.common_order(rhs);
        Jet {
            c: (0..=m).map(|k| self.c[k] - rhs.c[k]).collect(),
        }
    }

    /// Cauchy product truncated at the shorter operand's order.
    pub fn mul(&self, rhs: &Self) -> Self {
        let m = self.common_order(rhs);
        let mut c = vec![T::zero(); m + 1];
        for k in 0..=m {
            let mut acc = T::zero();
            for j in 0..=k {
                acc = acc + self.c[j] * rhs.c[k - j];
            }
            c[k] = acc;
        }
        Jet { c }
    }

    /// Quotient by a jet with nonzero value, by the standard recursion.
    pub fn div(&self, rhs: &Self) -> Self {
        let m = self.common_order(rhs);
        let inv0 = T::one() / rhs.c[0];
        let mut c = vec![T::zero(); m + 1];
        for k in 0..=m {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc = acc - rhs.c[j] * c[k - j];
            }
            c[k] = acc * inv0;
        }
        Jet { c }
    }

    /// `exp` of the jet via `w' = u' w`.
    pub fn exp(&self) -> Self {
        let m = self.order();
        let mut w = vec![T::zero(); m + 1];
        w[0] = self.c[0].s_exp();
        for k in 1..=m {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + self.c[j] * w[k - j] * T::from_f64(j as f64);
            }
            w[k] = acc * T::from_f64(1.0 / k as f64);
        }
        Jet { c: w }
    }

    /// `sinh` and `cosh` of the jet via the coupled recurrences
    /// `s' = u' c`, `c' = u' s`.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let m = self.order();
        let mut s = vec![T::zero(); m + 1];
        let mut c = vec![T::zero(); m + 1];
        s[0] = self.c[0].s_sinh();
        c[0] = self.c[0].s_cosh();
        for k in 1..=m {
            let mut acc_s = T::zero();
            let mut acc_c = T::zero();
            for j in 1..=k {
                let du = self.c[j] * T::from_f64(j as f64);
                acc_s = acc_s + du * c[k - j];
                acc_c = acc_c + du * s[k - j];
            }
            s[k] = acc_s * T::from_f64(1.0 / k as f64);
            c[k] = acc_c * T::from_f64(1.0 / k as f64);
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sinh(&self) -> Self {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Self {
        self.sinh_cosh().1
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Jet::constant(T::one(), self.order());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_series_at_zero() {
        let x = Jet::<f64>::variable(0.0, 5);
        let e = x.exp();
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0];
        for (k, &c) in expect.iter().enumerate() {
            assert_relative_eq!(e.c[k], c, epsilon = 1e-14);
        }
    }

    #[test]
    fn sinh_cosh_series_at_zero() {
        let x = Jet::<f64>::variable(0.0, 4);
        let (s, c) = x.sinh_cosh();
        assert_relative_eq!(s.c[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.c[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.c[3], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(c.c[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.c[2], 0.5, epsilon = 1e-15);
        assert_relative_eq!(c.c[4], 1.0 / 24.0, epsilon = 1e-15);
    }

    #[test]
    fn product_and_quotient_of_polynomials() {
        // (1 + x)² = 1 + 2x + x²; back-division recovers 1 + x.
        let p = Jet::<f64> {
            c: vec![1.0, 1.0, 0.0],
        };
        let sq = p.mul(&p);
        assert_eq!(sq.c, vec![1.0, 2.0, 1.0]);
        let q = sq.div(&p);
        assert_eq!(q.c, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn deriv_shifts_and_scales() {
        let x = Jet::<f64>::variable(0.7, 4);
        let f = x.exp().mul(&x.sinh());
        let d = f.deriv();
        // d/dx (e^x sinh x) = e^x (sinh x + cosh x)
        let expect = 0.7f64.exp() * (0.7f64.sinh() + 0.7f64.cosh());
        assert_relative_eq!(d.value(), expect, max_relative = 1e-14);
    }

    #[test]
    fn derivative_matches_central_differences() {
        // f(x) = exp(sinh x) / cosh x at scattered base points; first and
        // second derivatives against central differences of step 1e-5.
        let f = |x: f64| x.sinh().exp() / x.cosh();
        for &x0 in &[0.3, 0.9, 1.7, -0.6] {
            let x = Jet::<f64>::variable(x0, 3);
            let j = x.sinh().exp().div(&x.cosh());
            let h = 1e-5;
            let d1 = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
            let d2 = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
            assert_relative_eq!(j.derivative(1), d1, max_relative = 1e-6);
            assert_relative_eq!(j.derivative(2), d2, max_relative = 1e-4);
        }
    }

    #[test]
    fn complex_agrees_with_real_on_real_input() {
        let xr = Jet::<f64>::variable(0.8, 4);
        let xc = Jet::<Complex64>::variable(Complex64::new(0.8, 0.0), 4);
        let fr = xr.sinh().exp().div(&xr.cosh());
        let fc = xc.sinh().exp().div(&xc.cosh());
        for k in 0..=4 {
            assert_relative_eq!(fr.c[k], fc.c[k].re, max_relative = 1e-14);
            assert!(fc.c[k].im.abs() < 1e-15);
        }
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let x = Jet::<f64>::variable(0.4, 5);
        let f = x.sinh();
        let a = f.powi(3);
        let b = f.mul(&f).mul(&f);
        for k in 0..=5 {
            assert_relative_eq!(a.c[k], b.c[k], max_relative = 1e-13);
        }
    }
}
