//! Truncated power series in one variable, plus a log-sector wrapper.
//!
//! Coefficients are generic: exact rationals for bookkeeping that must be
//! exact, double-double reals for everything evaluated numerically.
//! Binary operations truncate to the smaller order of their operands.

use crate::dd::{rational_to_dd, Dd};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt::Debug;

/// Default truncation order for period series.
pub const DEFAULT_ORDER: usize = 60;

/// Coefficient field for [`TruncatedSeries`].
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_int(n: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coeff for Dd {
    fn from_int(n: i64) -> Self {
        Dd::from_i64(n)
    }
    fn to_f64(&self) -> f64 {
        Dd::to_f64(*self)
    }
}

impl Coeff for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        rational_to_dd(self).to_f64()
    }
}

impl Coeff for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<T>,
    var: String,
}

impl<T: Coeff> TruncatedSeries<T> {
    /// Series with the given coefficients c_0..c_J (order J = len - 1).
    pub fn new(var: &str, coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least c_0");
        TruncatedSeries {
            coeffs,
            var: var.to_string(),
        }
    }

    pub fn zero(var: &str, order: usize) -> Self {
        Self::new(var, vec![T::zero(); order + 1])
    }

    pub fn one(var: &str, order: usize) -> Self {
        let mut s = Self::zero(var, order);
        s.coeffs[0] = T::one();
        s
    }

    /// The series of the variable itself.
    pub fn var(var: &str, order: usize) -> Self {
        let mut s = Self::zero(var, order);
        if order >= 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn label(&self) -> &str {
        &self.var
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self::new(&self.var, self.coeffs[..=n].to_vec())
    }

    fn check_var(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(Error::Invalid(format!(
                "series in different variables: {} vs {}",
                self.var, other.var
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_var(other)?;
        let n = self.order().min(other.order());
        let c = (0..=n)
            .map(|k| self.coeffs[k].clone() + other.coeffs[k].clone())
            .collect();
        Ok(Self::new(&self.var, c))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_var(other)?;
        let n = self.order().min(other.order());
        let c = (0..=n)
            .map(|k| self.coeffs[k].clone() - other.coeffs[k].clone())
            .collect();
        Ok(Self::new(&self.var, c))
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(&self.var, self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// z d/dz.
    pub fn theta(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.clone() * T::from_int(k as i64))
            .collect();
        Self::new(&self.var, c)
    }

    /// d/dz; the order drops by one.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(&self.var, 0);
        }
        let c = (1..=self.order())
            .map(|k| self.coeffs[k].clone() * T::from_int(k as i64))
            .collect();
        Self::new(&self.var, c)
    }

    /// Multiply by z^k, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.order();
        let c = (0..=n)
            .map(|i| if i >= k { self.coeffs[i - k].clone() } else { T::zero() })
            .collect();
        Self::new(&self.var, c)
    }

    /// Horner evaluation at a coefficient-field point.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// Horner evaluation at a complex double point.
    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64();
        }
        acc
    }

    /// Multiplicative inverse; requires c_0 != 0.
    pub fn recip(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::Domain("reciprocal of a series with zero constant term".into()));
        }
        let n = self.order();
        let inv0 = T::one() / self.coeffs[0].clone();
        let mut b = vec![T::zero(); n + 1];
        b[0] = inv0.clone();
        for k in 1..=n {
            let mut s = T::zero();
            for i in 1..=k {
                s = s + self.coeffs[i].clone() * b[k - i].clone();
            }
            b[k] = -(s * inv0.clone());
        }
        Ok(Self::new(&self.var, b))
    }

    pub fn powi(&self, p: usize) -> Self {
        let mut acc = Self::one(&self.var, self.order());
        for _ in 0..p {
            acc = ps_mul(&acc, self).expect("same variable");
        }
        acc
    }

    /// self(inner(x)) where inner has zero constant term; result is in inner's variable.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::Domain(
                "composition needs an inner series without constant term".into(),
            ));
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        let mut acc = TruncatedSeries::new(&inner.var, vec![T::zero(); n + 1]);
        for k in (0..=n).rev() {
            acc = ps_mul(&acc, &inner)?;
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeffs[k].clone();
        }
        Ok(acc)
    }

    pub fn relabel(&self, var: &str) -> Self {
        Self::new(var, self.coeffs.clone())
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> TruncatedSeries<U> {
        TruncatedSeries::new(&self.var, self.coeffs.iter().map(f).collect())
    }
}

/// Cauchy product truncated to the smaller order.
pub fn ps_mul<T: Coeff>(a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    a.check_var(b)?;
    let n = a.order().min(b.order());
    let mut c = vec![T::zero(); n + 1];
    for (i, ai) in a.coeffs.iter().enumerate().take(n + 1) {
        if ai.is_zero() {
            continue;
        }
        for j in 0..=(n - i) {
            c[i + j] = c[i + j].clone() + ai.clone() * b.coeffs[j].clone();
        }
    }
    Ok(TruncatedSeries::new(&a.var, c))
}

/// exp of a series with zero constant term, from (exp a)' = a' exp a.
pub fn ps_exp<T: Coeff>(a: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    if !a.coeffs[0].is_zero() {
        return Err(Error::Invalid("ps_exp needs a zero constant term".into()));
    }
    let n = a.order();
    let mut e = vec![T::zero(); n + 1];
    e[0] = T::one();
    for k in 1..=n {
        let mut s = T::zero();
        for j in 1..=k {
            s = s + T::from_int(j as i64) * a.coeffs[j].clone() * e[k - j].clone();
        }
        e[k] = s / T::from_int(k as i64);
    }
    Ok(TruncatedSeries::new(&a.var, e))
}

/// log of a series with constant term 1, from (log a)' = a'/a.
pub fn ps_log<T: Coeff>(a: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    if a.coeffs[0] != T::one() {
        return Err(Error::Invalid("ps_log needs constant term 1".into()));
    }
    let n = a.order();
    let mut l = vec![T::zero(); n + 1];
    // k a_k = Σ_{j=1..k} j l_j a_{k−j}
    for k in 1..=n {
        let mut s = T::from_int(k as i64) * a.coeffs[k].clone();
        for j in 1..k {
            s = s - T::from_int(j as i64) * l[j].clone() * a.coeffs[k - j].clone();
        }
        l[k] = s / T::from_int(k as i64);
    }
    Ok(TruncatedSeries::new(&a.var, l))
}

/// Compositional inverse by Lagrange inversion: [Q^n] b = (1/n) [z^{n-1}] (z/a)^n.
pub fn ps_revert<T: Coeff>(a: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    if !a.coeffs[0].is_zero() {
        return Err(Error::Invalid("ps_revert needs a(0) = 0".into()));
    }
    let n = a.order();
    if n == 0 {
        return Ok(a.clone());
    }
    if a.coeffs[1].is_zero() {
        return Err(Error::Domain("singular reversion: a'(0) = 0".into()));
    }
    // a(z)/z, order n-1
    let quot = TruncatedSeries::new(&a.var, a.coeffs[1..].to_vec());
    let phi = quot.recip()?;
    let mut b = vec![T::zero(); n + 1];
    let mut pw = TruncatedSeries::one(&a.var, n - 1);
    for k in 1..=n {
        pw = ps_mul(&pw, &phi)?;
        b[k] = pw.coeff(k - 1) / T::from_int(k as i64);
    }
    Ok(TruncatedSeries::new(&a.var, b))
}

/// Σ_k s_k(z) (log z)^k with k ≤ 2.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSeries<T> {
    pub sectors: [TruncatedSeries<T>; 3],
}

impl<T: Coeff> LogSeries<T> {
    pub fn new(s0: TruncatedSeries<T>, s1: TruncatedSeries<T>, s2: TruncatedSeries<T>) -> Self {
        LogSeries { sectors: [s0, s1, s2] }
    }

    pub fn order(&self) -> usize {
        self.sectors.iter().map(|s| s.order()).min().unwrap()
    }

    /// theta = z d/dz acting on both the power and the log parts.
    pub fn theta(&self) -> Self {
        let [s0, s1, s2] = &self.sectors;
        let k1 = s1.clone();
        let k2 = s2.scale(&T::from_int(2));
        LogSeries::new(
            s0.theta().add(&k1).expect("same var"),
            s1.theta().add(&k2).expect("same var"),
            s2.theta(),
        )
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(LogSeries::new(
            self.sectors[0].add(&o.sectors[0])?,
            self.sectors[1].add(&o.sectors[1])?,
            self.sectors[2].add(&o.sectors[2])?,
        ))
    }

    /// Multiply by a plain power series.
    pub fn mul_series(&self, p: &TruncatedSeries<T>) -> Result<Self> {
        Ok(LogSeries::new(
            ps_mul(&self.sectors[0], p)?,
            ps_mul(&self.sectors[1], p)?,
            ps_mul(&self.sectors[2], p)?,
        ))
    }

    pub fn is_zero_through(&self, order: usize, tol: f64) -> bool {
        self.sectors
            .iter()
            .all(|s| (0..=order.min(s.order())).all(|k| s.coeff(k).to_f64().abs() <= tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn rs(c: &[(i64, i64)]) -> TruncatedSeries<BigRational> {
        TruncatedSeries::new("z", c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn log_inverts_exp() {
        let a = rs(&[(0, 1), (-6, 1), (45, 1), (-560, 1), (17325, 2)]);
        assert_eq!(ps_log(&ps_exp(&a).unwrap()).unwrap(), a);
        assert!(ps_log(&a).is_err());
    }

    #[test]
    fn difference_of_squares() {
        let a = rs(&[(1, 1), (1, 1), (0, 1)]);
        let b = rs(&[(1, 1), (-1, 1), (0, 1)]);
        assert_eq!(ps_mul(&a, &b).unwrap(), rs(&[(1, 1), (0, 1), (-1, 1)]));
    }

    #[test]
    fn square_truncates_to_order_three() {
        let a = rs(&[(0, 1), (-6, 1), (45, 1), (0, 1)]);
        let p = ps_mul(&a, &a).unwrap();
        assert_eq!(p, rs(&[(0, 1), (0, 1), (36, 1), (-540, 1)]));
    }

    #[test]
    fn mixed_orders_take_the_minimum() {
        let a = rs(&[(1, 1), (2, 1), (3, 1)]);
        let b = rs(&[(1, 1), (0, 1)]);
        assert_eq!(ps_mul(&a, &b).unwrap().order(), 1);
    }

    #[test]
    fn mismatched_labels_are_rejected() {
        let a = rs(&[(1, 1), (1, 1)]);
        let b = a.relabel("Q");
        assert!(ps_mul(&a, &b).is_err());
    }

    #[test]
    fn exp_examples() {
        assert_eq!(ps_exp(&rs(&[(0, 1)])).unwrap(), rs(&[(1, 1)]));
        assert_eq!(
            ps_exp(&rs(&[(0, 1), (1, 1), (0, 1), (0, 1)])).unwrap(),
            rs(&[(1, 1), (1, 1), (1, 2), (1, 6)])
        );
        assert_eq!(
            ps_exp(&rs(&[(0, 1), (-6, 1), (0, 1)])).unwrap(),
            rs(&[(1, 1), (-6, 1), (18, 1)])
        );
        assert!(ps_exp(&rs(&[(1, 1), (1, 1)])).is_err());
    }

    #[test]
    fn revert_examples() {
        let id = rs(&[(0, 1), (1, 1), (0, 1), (0, 1)]);
        assert_eq!(ps_revert(&id).unwrap(), id);
        let a = rs(&[(0, 1), (1, 1), (-1, 1)]);
        assert_eq!(ps_revert(&a).unwrap(), rs(&[(0, 1), (1, 1), (1, 1)]));
        let sing = rs(&[(0, 1), (0, 1), (1, 1)]);
        assert!(ps_revert(&sing).is_err());
    }

    #[test]
    fn compose_with_revert_is_identity() {
        let a = rs(&[(0, 1), (1, 1), (3, 2), (-2, 7), (5, 1)]);
        let b = ps_revert(&a).unwrap();
        let c = a.compose(&b).unwrap();
        assert_eq!(c, rs(&[(0, 1), (1, 1), (0, 1), (0, 1), (0, 1)]));
    }
}
