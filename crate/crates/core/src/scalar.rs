//! Exact scalars: arbitrary-precision rationals and Gaussian rationals.
//!
//! `Rational` is kept reduced with a positive denominator by the
//! underlying implementation, and `Scalar` is the quadratic extension by
//! the imaginary unit. Every identity downstream is an equality of these
//! values.

use alloc::string::String;
use alloc::{format, string::ToString};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ring::{Conjugate, Ring};

pub type Int = BigInt;
pub type Rational = BigRational;

/// Gaussian rational: `re + im*i` with exact rational parts.
pub type Scalar = Complex<BigRational>;

pub fn int(n: i64) -> Int {
    BigInt::from(n)
}

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(int(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(int(num), int(den))
}

pub fn s_zero() -> Scalar {
    Complex::new(rat(0), rat(0))
}

pub fn s_one() -> Scalar {
    Complex::new(rat(1), rat(0))
}

/// The imaginary unit.
pub fn s_i() -> Scalar {
    Complex::new(rat(0), rat(1))
}

pub fn s_int(n: i64) -> Scalar {
    Complex::new(rat(n), rat(0))
}

pub fn s_ratio(num: i64, den: i64) -> Scalar {
    Complex::new(ratio(num, den), rat(0))
}

pub fn s_real(r: Rational) -> Scalar {
    Complex::new(r, rat(0))
}

pub fn s_imag(r: Rational) -> Scalar {
    Complex::new(rat(0), r)
}

pub fn s_is_real(s: &Scalar) -> bool {
    num_traits::Zero::is_zero(&s.im)
}

/// Multiplicative inverse, `None` for zero.
pub fn s_inv(s: &Scalar) -> Option<Scalar> {
    if num_traits::Zero::is_zero(s) {
        return None;
    }
    let norm = &s.re * &s.re + &s.im * &s.im;
    Some(Complex::new(&s.re / &norm, -(&s.im / &norm)))
}

pub fn s_pow(s: &Scalar, n: u32) -> Scalar {
    let mut acc = s_one();
    for _ in 0..n {
        acc *= s.clone();
    }
    acc
}

/// Canonical text form of a rational, `p` or `p/q`.
pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text form of a scalar, e.g. `3/2`, `i`, `-2*i`, `1 + i`.
pub fn scalar_string(s: &Scalar) -> String {
    let re = &s.re;
    let im = &s.im;
    if num_traits::Zero::is_zero(im) {
        return rational_string(re);
    }
    let im_part = if im.is_one() {
        "i".to_string()
    } else if (-im).is_one() {
        "-i".to_string()
    } else {
        format!("{}*i", rational_string(im))
    };
    if num_traits::Zero::is_zero(re) {
        return im_part;
    }
    if im.is_positive() {
        format!("{} + {}", rational_string(re), im_part)
    } else {
        format!("{} - {}", rational_string(re), im_part.trim_start_matches('-'))
    }
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        rat(0)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

impl Ring for Scalar {
    fn zero_like(&self) -> Self {
        s_zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

impl Conjugate for Scalar {
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

impl Conjugate for Rational {
    fn conj(&self) -> Self {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_is_an_involutive_automorphism() {
        let z = Complex::new(ratio(3, 4), ratio(-2, 5));
        let w = Complex::new(rat(7), ratio(1, 3));
        assert_eq!(z.conj().conj(), z);
        assert_eq!((z.clone() * w.clone()).conj(), z.conj() * w.conj());
        assert_eq!((z.clone() + w.clone()).conj(), z.conj() + w.conj());
    }

    #[test]
    fn inverse_and_powers() {
        let z = Complex::new(ratio(1, 2), ratio(-1, 3));
        let inv = s_inv(&z).unwrap();
        assert_eq!(z * inv, s_one());
        assert!(s_inv(&s_zero()).is_none());
        assert_eq!(s_pow(&s_i(), 4), s_one());
        assert_eq!(s_pow(&s_i(), 2), -s_one());
    }

    #[test]
    fn canonical_strings() {
        assert_eq!(rational_string(&ratio(-3, 6)), "-1/2");
        assert_eq!(scalar_string(&s_ratio(1, 2)), "1/2");
        assert_eq!(scalar_string(&s_i()), "i");
        assert_eq!(scalar_string(&s_imag(ratio(1, 2))), "1/2*i");
        assert_eq!(
            scalar_string(&Complex::new(rat(1), ratio(-1, 2))),
            "1 - 1/2*i"
        );
    }
}
