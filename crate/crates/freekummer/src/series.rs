//! Truncated power series in one variable (`Series1`) and two variables
//! with total-degree truncation (`Series2`).
//!
//! Coefficients are generic over [`Coef`]. `Complex64` is the default;
//! `f64` is used by most numerical pipelines and `BigRational` gives an
//! exact mode for order-by-order identity checks.

use crate::error::{domain, usage, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Num;
use std::fmt::Debug;
use std::ops::Neg;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 12;

/// Scalar usable as a series coefficient.
pub trait Coef: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    /// Absolute value as a float, used for tolerances.
    fn magnitude(&self) -> f64;
    /// Real part as a float.
    fn real(&self) -> f64;
}

impl Coef for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn real(&self) -> f64 {
        *self
    }
}

impl Coef for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn real(&self) -> f64 {
        self.re
    }
}

impl Coef for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn magnitude(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
    fn real(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact rational from a numerator/denominator pair.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Truncated series c₀ + c₁z + … + c_N z^N.
#[derive(Clone, Debug, PartialEq)]
pub struct Series1<T: Coef = Complex64> {
    coeffs: Vec<T>,
}

impl<T: Coef> Series1<T> {
    /// Pads with zeros or truncates so that exactly `order + 1` coefficients are kept.
    pub fn new(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.resize(order + 1, T::zero());
        Series1 { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(T::one(), order)
    }

    pub fn constant(c: T, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The series `z`.
    pub fn var(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn from_fn(order: usize, f: impl Fn(usize) -> T) -> Self {
        Series1 { coeffs: (0..=order).map(f).collect() }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of z^i; zero beyond the truncation order.
    pub fn coefficient(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, i: usize, c: T) {
        if i < self.coeffs.len() {
            self.coeffs[i] = c;
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs[..=order.min(self.order())].to_vec(), order)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return usage(format!("series order mismatch: {} vs {}", self.order(), other.order()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Series1 {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Series1 {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Series1 { coeffs: self.coeffs.iter().map(|a| -a.clone()).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        Series1 { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Series1 { coeffs: out }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.order());
        for _ in 0..k {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0.is_zero() {
            return domain("reciprocal of a series with zero constant term");
        }
        let n = self.order();
        let mut r = vec![T::zero(); n + 1];
        r[0] = T::one() / c0.clone();
        for k in 1..=n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * r[k - j].clone();
            }
            r[k] = -acc / c0.clone();
        }
        Ok(Series1 { coeffs: r })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.reciprocal()?)
    }

    /// `outer ∘ inner`; `inner` must vanish at zero.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check(inner)?;
        if !inner.coeffs[0].is_zero() {
            return domain("composition needs an inner series with zero constant term");
        }
        let n = self.order();
        let mut acc = Self::constant(self.coeffs[n].clone(), n);
        for k in (0..n).rev() {
            acc = acc.mul_unchecked(inner);
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeffs[k].clone();
        }
        Ok(acc)
    }

    /// Compositional inverse `t` with `self ∘ t = z`.
    pub fn revert(&self) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return domain("reversion needs order at least 1");
        }
        if !self.coeffs[0].is_zero() {
            return domain("reversion needs zero constant term");
        }
        let s1 = self.coeffs[1].clone();
        if s1.is_zero() {
            return domain("reversion needs a nonzero linear coefficient");
        }
        let mut t = Self::zero(n);
        t.coeffs[1] = T::one() / s1.clone();
        for k in 2..=n {
            // Coefficient k of self∘t with t_k = 0; solving s1·t_k + rest = 0.
            let rest = self.truncate(k).compose(&t.truncate(k))?.coeffs[k].clone();
            t.coeffs[k] = -rest / s1.clone();
        }
        Ok(t)
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        for i in 1..=n {
            out[i - 1] = self.coeffs[i].clone() * T::from_f64(i as f64);
        }
        Series1 { coeffs: out }
    }

    /// `self / z`, losing one order. Requires a zero constant term.
    pub fn div_z(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return domain("division by z needs zero constant term");
        }
        let n = self.order();
        if n == 0 {
            return domain("division by z of an order-0 series");
        }
        Ok(Series1 { coeffs: self.coeffs[1..].to_vec() })
    }

    /// `z · self` at the same order (top coefficient dropped).
    pub fn mul_z(&self) -> Self {
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        out[1..].clone_from_slice(&self.coeffs[..n]);
        Series1 { coeffs: out }
    }

    pub fn eval(&self, z: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.order().max(other.order());
        (0..=n)
            .map(|i| (self.coefficient(i) - other.coefficient(i)).magnitude())
            .fold(0.0, f64::max)
    }

    pub fn map<U: Coef>(&self, f: impl Fn(&T) -> U) -> Series1<U> {
        Series1 { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl Series1<f64> {
    pub fn to_complex(&self) -> Series1<Complex64> {
        self.map(|c| Complex64::new(*c, 0.0))
    }
}

/// Truncated bivariate series Σ c(i,j) z^i w^j over i + j ≤ N.
#[derive(Clone, Debug, PartialEq)]
pub struct Series2<T: Coef = Complex64> {
    order: usize,
    coeffs: Vec<T>,
}

fn tri(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

impl<T: Coef> Series2<T> {
    pub fn zero(order: usize) -> Self {
        Series2 { order, coeffs: vec![T::zero(); (order + 1) * (order + 2) / 2] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = T::one();
        s
    }

    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut s = Self::zero(order);
        for d in 0..=order {
            for j in 0..=d {
                s.coeffs[tri(d - j, j)] = f(d - j, j);
            }
        }
        s
    }

    /// f(z) viewed as a bivariate series.
    pub fn from_z(f: &Series1<T>, order: usize) -> Self {
        Self::from_fn(order, |i, j| if j == 0 { f.coefficient(i) } else { T::zero() })
    }

    /// f(w) viewed as a bivariate series.
    pub fn from_w(f: &Series1<T>, order: usize) -> Self {
        Self::from_fn(order, |i, j| if i == 0 { f.coefficient(j) } else { T::zero() })
    }

    /// Divided difference (f(z) − f(w))/(z − w); coefficient (i,j) is f_{i+j+1}.
    pub fn divided_difference(f: &Series1<T>) -> Self {
        let order = f.order().saturating_sub(1);
        Self::from_fn(order, |i, j| f.coefficient(i + j + 1))
    }

    /// (w f(z) − z f(w))/(z − w) for f with f(0) = 0, at the order of `f`.
    pub fn cross_divided_difference(f: &Series1<T>) -> Self {
        let order = f.order();
        // equals z·w·Σ f_{i+j+2} z^i w^j
        Self::from_fn(order, |i, j| {
            if i >= 1 && j >= 1 {
                f.coefficient(i + j)
            } else {
                T::zero()
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficient2(&self, i: usize, j: usize) -> T {
        if i + j > self.order {
            T::zero()
        } else {
            self.coeffs[tri(i, j)].clone()
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: T) {
        if i + j <= self.order {
            self.coeffs[tri(i, j)] = c;
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::from_fn(order, |i, j| self.coefficient2(i, j))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return usage(format!("series order mismatch: {} vs {}", self.order, other.order));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Series2 {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Series2 {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect(),
        })
    }

    pub fn scale(&self, c: &T) -> Self {
        Series2 { order: self.order, coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.order;
        let mut out = Self::zero(n);
        for d1 in 0..=n {
            for j1 in 0..=d1 {
                let a = &self.coeffs[tri(d1 - j1, j1)];
                if a.is_zero() {
                    continue;
                }
                for d2 in 0..=(n - d1) {
                    for j2 in 0..=d2 {
                        let b = &other.coeffs[tri(d2 - j2, j2)];
                        let k = tri(d1 - j1 + d2 - j2, j1 + j2);
                        out.coeffs[k] = out.coeffs[k].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0.is_zero() {
            return domain("reciprocal of a bivariate series with zero constant term");
        }
        let n = self.order;
        let mut r = Self::zero(n);
        r.coeffs[0] = T::one() / c0.clone();
        for d in 1..=n {
            for j in 0..=d {
                let i = d - j;
                let mut acc = T::zero();
                for k in 0..=i {
                    for l in 0..=j {
                        if k == 0 && l == 0 {
                            continue;
                        }
                        acc = acc + self.coefficient2(k, l) * r.coefficient2(i - k, j - l);
                    }
                }
                r.coeffs[tri(i, j)] = -acc / c0.clone();
            }
        }
        Ok(r)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.reciprocal()?)
    }

    /// Σ F(i,j) p(z)^i q(w)^j for inner series vanishing at zero.
    pub fn compose(&self, p: &Series1<T>, q: &Series1<T>) -> Result<Self> {
        if !p.coefficient(0).is_zero() || !q.coefficient(0).is_zero() {
            return domain("bivariate composition needs inner series with zero constant term");
        }
        let n = self.order;
        if p.order() < n || q.order() < n {
            return usage("inner series order below the bivariate order");
        }
        let p = p.truncate(n);
        let q = q.truncate(n);
        let pp: Vec<Series1<T>> = (0..=n).map(|k| p.pow(k)).collect();
        let qq: Vec<Series1<T>> = (0..=n).map(|k| q.pow(k)).collect();
        let mut out = Self::zero(n);
        for d in 0..=n {
            for j in 0..=d {
                let i = d - j;
                let f = self.coefficient2(i, j);
                if f.is_zero() {
                    continue;
                }
                // p^i starts at z^i, q^j at w^j
                for a in i..=n {
                    let pa = pp[i].coefficient(a);
                    if pa.is_zero() {
                        continue;
                    }
                    for b in j..=(n - a) {
                        let k = tri(a, b);
                        out.coeffs[k] = out.coeffs[k].clone() + f.clone() * pa.clone() * qq[j].coefficient(b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// z·w·self at the same order.
    pub fn mul_zw(&self) -> Self {
        Self::from_fn(self.order, |i, j| {
            if i >= 1 && j >= 1 {
                self.coefficient2(i - 1, j - 1)
            } else {
                T::zero()
            }
        })
    }

    /// (z − w)·self at the same order.
    pub fn mul_z_minus_w(&self) -> Self {
        Self::from_fn(self.order, |i, j| {
            let a = if i >= 1 { self.coefficient2(i - 1, j) } else { T::zero() };
            let b = if j >= 1 { self.coefficient2(i, j - 1) } else { T::zero() };
            a - b
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, |i, j| self.coefficient2(j, i))
    }

    pub fn eval(&self, z: &T, w: &T) -> T {
        let mut acc = T::zero();
        for d in 0..=self.order {
            for j in 0..=d {
                let i = d - j;
                let mut term = self.coefficient2(i, j);
                for _ in 0..i {
                    term = term * z.clone();
                }
                for _ in 0..j {
                    term = term * w.clone();
                }
                acc = acc + term;
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.order.min(other.order);
        let mut m: f64 = 0.0;
        for d in 0..=n {
            for j in 0..=d {
                m = m.max((self.coefficient2(d - j, j) - other.coefficient2(d - j, j)).magnitude());
            }
        }
        m
    }

    pub fn asymmetry(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }

    /// Restriction w = 0.
    pub fn column_z(&self) -> Series1<T> {
        Series1::from_fn(self.order, |i| self.coefficient2(i, 0))
    }
}

/// Real series from a coefficient slice, padded to `order`.
pub fn series1_real(c: &[f64], order: usize) -> Series1<f64> {
    Series1::new(c.to_vec(), order)
}
