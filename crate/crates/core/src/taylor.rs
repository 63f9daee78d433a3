//! Truncated Taylor arithmetic.
//!
//! A [`TaylorJet`] of order `K` stores the normalized coefficients
//! `f(t0), f'(t0), f''(t0)/2!, ..., f^(K)(t0)/K!` of a univariate function at an
//! expansion point. Every derivative used by the toolkit (curvature, contact
//! orders, closedness checks) is read off these coefficients, so they are
//! exact up to floating-point rounding.
//!
//! [`BiJet2`] is the bivariate counterpart truncated at order two; it carries
//! the value, gradient and Hessian needed by the target-diffeomorphism law.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;
use thiserror::Error;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 12;
/// Relative threshold below which a coefficient counts as vanishing.
pub const VANISH_REL: f64 = 1e-9;
/// Absolute floor of the vanishing threshold.
pub const VANISH_ABS: f64 = 1e-12;
/// Allowed weight of the highest coefficients, see [`TaylorJet::natural_scale`].
pub const TAIL_REL: f64 = 1e-3;

type Coeffs = SmallVec<[f64; 16]>;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JetError {
    #[error("jet division by zero at expansion point")]
    DivisionByZero,
    #[error("sqrt domain error: argument {0} is not positive")]
    SqrtDomain(f64),
    #[error("jet order exceeded: requested {requested}, available {available}")]
    OrderExceeded { requested: usize, available: usize },
}

/// Normalized Taylor coefficients of a function at an expansion point.
#[derive(Clone, PartialEq)]
pub struct TaylorJet {
    coeffs: Coeffs,
}

impl fmt::Debug for TaylorJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("TaylorJet").field(&self.coeffs.as_slice()).finish()
    }
}

impl TaylorJet {
    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs: Coeffs = SmallVec::from_elem(0.0, order + 1);
        coeffs[0] = c;
        TaylorJet { coeffs }
    }

    /// Jet of the identity function `t ↦ t` expanded at `t0`.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut jet = Self::constant(t0, order);
        if order >= 1 {
            jet.coeffs[1] = 1.0;
        }
        jet
    }

    /// Builds a jet from raw normalized coefficients. Panics on an empty slice.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        TaylorJet {
            coeffs: SmallVec::from_slice(coeffs),
        }
    }

    fn zeros(order: usize) -> Self {
        TaylorJet {
            coeffs: SmallVec::from_elem(0.0, order + 1),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// The `i`-th derivative at the expansion point, `i! * coeffs[i]`.
    pub fn derivative(&self, i: usize) -> Result<f64, JetError> {
        let c = self.coeffs.get(i).ok_or(JetError::OrderExceeded {
            requested: i,
            available: self.order(),
        })?;
        Ok(c * factorial(i))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = (order + 1).min(self.coeffs.len());
        TaylorJet {
            coeffs: SmallVec::from_slice(&self.coeffs[..n]),
        }
    }

    /// Jet of the derivative; loses one order. An order-0 jet yields the zero jet.
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::zeros(0);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|j| j as f64 * self.coeffs[j])
            .collect();
        TaylorJet { coeffs }
    }

    /// Antiderivative with constant term `c0`; gains one order.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut coeffs: Coeffs = SmallVec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c0);
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (j + 1) as f64);
        }
        TaylorJet { coeffs }
    }

    pub fn scale(&self, s: f64) -> Self {
        TaylorJet {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        TaylorJet {
            coeffs: (0..n).map(|i| op(self.coeffs[i], other.coeffs[i])).collect(),
        }
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn mul_jet(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let a = &self.coeffs;
        let b = &other.coeffs;
        TaylorJet {
            coeffs: (0..n)
                .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
                .collect(),
        }
    }

    pub fn div_jet(&self, other: &Self) -> Result<Self, JetError> {
        let b = &other.coeffs;
        if b[0] == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let n = self.coeffs.len().min(b.len());
        let mut q = Self::zeros(n - 1);
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= b[j] * q.coeffs[k - j];
            }
            q.coeffs[k] = acc / b[0];
        }
        Ok(q)
    }

    pub fn powi(&self, exponent: u32) -> Self {
        let mut result = Self::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        result
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.coeffs;
        let n = a.len();
        let mut s = Self::zeros(n - 1);
        let mut c = Self::zeros(n - 1);
        let (s0, c0) = a[0].sin_cos();
        s.coeffs[0] = s0;
        c.coeffs[0] = c0;
        for k in 1..n {
            let mut sk = 0.0;
            let mut ck = 0.0;
            for j in 1..=k {
                let w = j as f64 * a[j];
                sk += w * c.coeffs[k - j];
                ck -= w * s.coeffs[k - j];
            }
            s.coeffs[k] = sk / k as f64;
            c.coeffs[k] = ck / k as f64;
        }
        (s, c)
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let n = a.len();
        let mut e = Self::zeros(n - 1);
        e.coeffs[0] = a[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * a[j] * e.coeffs[k - j];
            }
            e.coeffs[k] = acc / k as f64;
        }
        e
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let a = &self.coeffs;
        if a[0].is_nan() || a[0] <= 0.0 {
            return Err(JetError::SqrtDomain(a[0]));
        }
        let n = a.len();
        let mut r = Self::zeros(n - 1);
        r.coeffs[0] = a[0].sqrt();
        let two_r0 = 2.0 * r.coeffs[0];
        for k in 1..n {
            let mut acc = a[k];
            for j in 1..k {
                acc -= r.coeffs[j] * r.coeffs[k - j];
            }
            r.coeffs[k] = acc / two_r0;
        }
        Ok(r)
    }

    /// `atan(a)` via the antiderivative of `a' / (1 + a^2)`.
    pub fn atan(&self) -> Self {
        let u0 = self.coeffs[0].atan();
        if self.order() == 0 {
            return Self::constant(u0, 0);
        }
        let slope = self.differentiate();
        let denom = self.mul_jet(self).add_scalar(1.0).truncate(slope.order());
        let ratio = slope
            .div_jet(&denom)
            .expect("1 + a^2 has a positive constant term");
        ratio.integrate(u0)
    }

    /// Jet of `self ∘ inner`, where `self` is expanded at `inner.value()`.
    pub fn compose(&self, inner: &Self) -> Self {
        let order = inner.order().min(self.order());
        let mut shift = inner.truncate(order);
        shift.coeffs[0] = 0.0;
        let mut acc = Self::constant(self.coeffs[order], order);
        for k in (0..order).rev() {
            acc = acc.mul_jet(&shift).add_scalar(self.coeffs[k]);
        }
        acc
    }

    /// Jet of `s ↦ f(t0 + h s)`: coefficient `j` times `h^j`.
    pub fn rescaled(&self, h: f64) -> Self {
        let mut p = 1.0;
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= p;
            p *= h;
        }
        out
    }

    /// Largest `ρ <= cap` at which the last two coefficients, weighted by
    /// `ρ^j`, stay below `TAIL_REL` times the largest earlier one. Rescaling the
    /// jet by this `ρ` makes vanishing tests independent of the parameter scale
    /// and robust to a small radius of convergence.
    pub fn natural_scale(&self, cap: f64) -> f64 {
        let k = self.order();
        if k < 3 {
            return cap;
        }
        let weighted = |rho: f64, range: std::ops::Range<usize>| {
            range.fold(0.0_f64, |m, j| m.max(self.coeffs[j].abs() * rho.powi(j as i32)))
        };
        let tail_ok = |rho: f64| weighted(rho, k - 1..k + 1) <= TAIL_REL * weighted(rho, 0..k - 1);
        if tail_ok(cap) {
            return cap;
        }
        let (mut lo, mut hi) = ((cap * 1e-12).ln(), cap.ln());
        if !tail_ok(lo.exp()) {
            return cap;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if tail_ok(mid.exp()) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo.exp()
    }

    /// Scale-free vanishing threshold `max(VANISH_ABS, VANISH_REL * max_j |c_j|)`.
    pub fn vanishing_threshold(&self) -> f64 {
        let max = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        (VANISH_REL * max).max(VANISH_ABS)
    }

    pub fn is_vanishing(&self, i: usize) -> bool {
        self.coeffs[i].abs() <= self.vanishing_threshold()
    }

    /// Smallest index `>= from` whose coefficient does not vanish.
    pub fn leading_index(&self, from: usize) -> Option<usize> {
        let threshold = self.vanishing_threshold();
        (from..self.coeffs.len()).find(|&i| self.coeffs[i].abs() > threshold)
    }
}

fn factorial(i: usize) -> f64 {
    (1..=i).fold(1.0, |acc, k| acc * k as f64)
}

impl Add for &TaylorJet {
    type Output = TaylorJet;
    fn add(self, rhs: &TaylorJet) -> TaylorJet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TaylorJet {
    type Output = TaylorJet;
    fn sub(self, rhs: &TaylorJet) -> TaylorJet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &TaylorJet {
    type Output = TaylorJet;
    fn mul(self, rhs: &TaylorJet) -> TaylorJet {
        self.mul_jet(rhs)
    }
}

impl Neg for &TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for TaylorJet {
            type Output = TaylorJet;
            fn $method(self, rhs: TaylorJet) -> TaylorJet {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        -&self
    }
}

/// Second-order jet of a function of two variables `(x, y)`.
///
/// `hess` stores `[∂xx, ∂xy, ∂yy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiJet2 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl BiJet2 {
    pub fn constant(c: f64) -> Self {
        BiJet2 {
            value: c,
            grad: [0.0; 2],
            hess: [0.0; 3],
        }
    }

    pub fn var_x(x0: f64) -> Self {
        BiJet2 {
            value: x0,
            grad: [1.0, 0.0],
            hess: [0.0; 3],
        }
    }

    pub fn var_y(y0: f64) -> Self {
        BiJet2 {
            value: y0,
            grad: [0.0, 1.0],
            hess: [0.0; 3],
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        BiJet2 {
            value: self.value + o.value,
            grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]],
            hess: [
                self.hess[0] + o.hess[0],
                self.hess[1] + o.hess[1],
                self.hess[2] + o.hess[2],
            ],
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: f64) -> Self {
        BiJet2 {
            value: self.value * s,
            grad: [self.grad[0] * s, self.grad[1] * s],
            hess: [self.hess[0] * s, self.hess[1] * s, self.hess[2] * s],
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (f, g) = (self, o);
        BiJet2 {
            value: f.value * g.value,
            grad: [
                f.grad[0] * g.value + f.value * g.grad[0],
                f.grad[1] * g.value + f.value * g.grad[1],
            ],
            hess: [
                f.hess[0] * g.value + 2.0 * f.grad[0] * g.grad[0] + f.value * g.hess[0],
                f.hess[1] * g.value
                    + f.grad[0] * g.grad[1]
                    + f.grad[1] * g.grad[0]
                    + f.value * g.hess[1],
                f.hess[2] * g.value + 2.0 * f.grad[1] * g.grad[1] + f.value * g.hess[2],
            ],
        }
    }

    /// Chain rule for `F ∘ self` given `F`, `F'`, `F''` at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let [gx, gy] = self.grad;
        BiJet2 {
            value: f0,
            grad: [f1 * gx, f1 * gy],
            hess: [
                f2 * gx * gx + f1 * self.hess[0],
                f2 * gx * gy + f1 * self.hess[1],
                f2 * gy * gy + f1 * self.hess[2],
            ],
        }
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let v = self.value;
        if v == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
    }

    pub fn div(&self, o: &Self) -> Result<Self, JetError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn powi(&self, n: u32) -> Self {
        let v = self.value;
        let nf = n as f64;
        let f0 = v.powi(n as i32);
        let f1 = if n >= 1 { nf * v.powi(n as i32 - 1) } else { 0.0 };
        let f2 = if n >= 2 {
            nf * (nf - 1.0) * v.powi(n as i32 - 2)
        } else {
            0.0
        };
        self.chain(f0, f1, f2)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let v = self.value;
        if v.is_nan() || v <= 0.0 {
            return Err(JetError::SqrtDomain(v));
        }
        let r = v.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * v)))
    }

    pub fn atan(&self) -> Self {
        let v = self.value;
        let d = 1.0 + v * v;
        self.chain(v.atan(), 1.0 / d, -2.0 * v / (d * d))
    }
}
