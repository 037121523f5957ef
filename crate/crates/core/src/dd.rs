//! Double-double arithmetic (about 32 significant digits).
//!
//! Error-free transformations in the usual Dekker/Knuth style. Used for the
//! oscillator-basis matrix, its eigensolver, and the period series.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

pub type Cdd = Complex<Dd>;

pub const PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.2246467991473532e-16,
};
pub const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Already-normalized (hi, lo) pair.
    pub const fn from_parts_const(hi: f64, lo: f64) -> Dd {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn from_i64(n: i64) -> Dd {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Dd::from_parts(hi, lo)
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let y = self.hi.sqrt();
        let (p, e) = two_prod(y, y);
        // y + (x - y^2) / (2y)
        let r = ((self.hi - p) - e + self.lo) / (2.0 * y);
        Dd::from_parts(y, r)
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn powi(self, n: i32) -> Dd {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// exp by ln 2 reduction, 2^-8 scaling, Taylor series and repeated squaring.
    pub fn exp(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = (self - LN_2 * k).ldexp(-8);
        // s = expm1(r); squaring in expm1 form keeps the low bits
        let mut term = r;
        let mut s = r;
        for n in 2..=16 {
            term = term * r / (n as f64);
            s += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..8 {
            s = s * 2.0 + s * s;
        }
        let sum = s + 1.0;
        sum.ldexp(k as i32)
    }

    /// Natural logarithm by Newton iteration on `exp`.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self / y.exp() - 1.0;
        }
        y
    }

    pub fn ldexp(self, e: i32) -> Dd {
        let mut v = self;
        let mut e = e;
        while e > 1000 {
            v = Dd {
                hi: v.hi * 2f64.powi(1000),
                lo: v.lo * 2f64.powi(1000),
            };
            e -= 1000;
        }
        while e < -1000 {
            v = Dd {
                hi: v.hi * 2f64.powi(-1000),
                lo: v.lo * 2f64.powi(-1000),
            };
            e += 1000;
        }
        let s = 2f64.powi(e);
        Dd {
            hi: v.hi * s,
            lo: v.lo * s,
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl From<i64> for Dd {
    fn from(n: i64) -> Dd {
        Dd::from_i64(n)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (h, l) = quick_two_sum(s1, s2 + t2);
        Dd { hi: h, lo: l }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        let (h, l) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p1, p2);
        Dd { hi: h, lo: l }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (h, l) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi: h, lo: l }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::from_f64(b)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = (self / b).hi.trunc();
        self - b * q
    }
}

macro_rules! assign_ops {
    ($($tr:ident $f:ident $op:tt),*) => {$(
        impl $tr for Dd {
            #[inline]
            fn $f(&mut self, b: Dd) { *self = *self $op b; }
        }
        impl $tr<f64> for Dd {
            #[inline]
            fn $f(&mut self, b: f64) { *self = *self $op b; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Zero for Dd {
    fn zero() -> Dd {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Dd {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Dd, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Dd::from_f64)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

#[inline]
pub fn dd(x: f64) -> Dd {
    Dd::from_f64(x)
}

pub fn cdd(re: Dd, im: Dd) -> Cdd {
    Complex::new(re, im)
}

#[inline]
pub fn cdd_conj(z: Cdd) -> Cdd {
    Complex::new(z.re, -z.im)
}

#[inline]
pub fn cdd_norm_sqr(z: Cdd) -> Dd {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn cdd_scale(z: Cdd, s: Dd) -> Cdd {
    Complex::new(z.re * s, z.im * s)
}

/// Nearest double-double to a rational, via a scaled integer quotient.
pub fn rational_to_dd(q: &BigRational) -> Dd {
    if q.is_zero() {
        return Dd::ZERO;
    }
    let neg = q.is_negative();
    let num = q.numer().abs();
    let den = q.denom().clone();
    let shift = 130i64 - (num.bits() as i64 - den.bits() as i64);
    let quo: BigInt = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let drop = (quo.bits() as i64 - 53).max(0) as usize;
    let top = &quo >> drop;
    let rest = &quo - (&top << drop);
    let drop2 = (rest.bits() as i64 - 53).max(0) as usize;
    let mid = (&rest >> drop2).to_f64().unwrap();
    let v = Dd::from_parts(
        top.to_f64().unwrap() * 2f64.powi(drop as i32),
        mid * 2f64.powi(drop2 as i32),
    );
    let v = v.ldexp(-shift as i32);
    if neg {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        (a - b).abs().hi() <= tol * b.abs().hi().max(1e-300)
    }

    #[test]
    fn division_is_double_double_accurate() {
        let x = Dd::ONE / dd(3.0);
        assert!((x * 3.0 - 1.0).abs().hi() < 1e-32);
        let y = dd(2.0) / dd(2f64.sqrt());
        assert!(y.lo() != 0.0);
    }

    #[test]
    fn sqrt_two() {
        let s = dd(2.0).sqrt();
        assert!((s * s - 2.0).abs().hi() < 1e-31);
    }

    #[test]
    fn exp_ln_roundtrip() {
        for x in [0.3, 1.0, 3.7, -2.5, 40.0] {
            let y = dd(x).exp();
            assert!(close(y.ln(), dd(x), 1e-30));
        }
    }

    #[test]
    fn exp_one() {
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let e = Dd::from_parts(std::f64::consts::E, 1.4456468917292502e-16);
        assert!(close(dd(1.0).exp(), e, 1e-31));
    }

    #[test]
    fn ln_two() {
        assert!(close(dd(2.0).ln(), LN_2, 1e-31));
    }

    #[test]
    fn rational_conversion() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!((rational_to_dd(&q) * 3.0 - 1.0).abs().hi() < 1e-31);
        let q = BigRational::new(BigInt::from(-244), BigInt::from(9));
        assert!((rational_to_dd(&q) * 9.0 + 244.0).abs().hi() < 1e-28);
    }

    #[test]
    fn complex_product() {
        let a = cdd(dd(1.0), dd(2.0));
        let b = cdd(dd(3.0), dd(-1.0));
        let c = a * b;
        assert_eq!(c.re.to_f64(), 5.0);
        assert_eq!(c.im.to_f64(), 5.0);
    }
}
