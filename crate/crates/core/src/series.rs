//! Truncated formal power series in the deformation parameter.
//!
//! A series stores all coefficients `0..=N` explicitly; `N` is fixed at
//! construction and mixing truncation orders is an error rather than a
//! silent re-truncation, so order-counting bugs surface immediately.
//! On real (rational) series the ordered-ring structure decides signs by
//! the lowest stored nonvanishing coefficient; a verdict is always
//! "modulo the truncation order".

use alloc::vec::Vec;
use alloc::{format, string::String, vec};

use crate::matrix::Matrix;
use crate::poly::Polynomial;
use crate::ring::{Conjugate, Ring};
use crate::scalar::{Rational, Scalar};
use crate::DiffOp;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeriesError {
    /// Operands carry different truncation orders.
    OrderMismatch { left: usize, right: usize },
    /// The order-zero coefficient is not invertible.
    NotInvertible,
}

impl core::fmt::Display for SeriesError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SeriesError::OrderMismatch { left, right } => {
                write!(f, "truncation order mismatch: {left} vs {right}")
            }
            SeriesError::NotInvertible => write!(f, "order-zero coefficient is not invertible"),
        }
    }
}

/// Sign of a real series in the ordered ring of truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

/// A sign verdict is only meaningful modulo `lam^(order+1)`; the order it
/// was decided at travels with it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignVerdict {
    pub sign: Sign,
    pub truncation_order: usize,
}

/// Truncated formal power series with coefficients in `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries<T> {
    coeffs: Vec<T>,
}

pub type PolySeries = FormalSeries<Polynomial>;
pub type OpSeries = FormalSeries<DiffOp>;
pub type MatrixSeries = FormalSeries<Matrix<Polynomial>>;
pub type ScalarSeries = FormalSeries<Scalar>;

impl<T> FormalSeries<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series stores at least order zero");
        FormalSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, r: usize) -> &T {
        &self.coeffs[r]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> FormalSeries<U> {
        FormalSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl<T: Ring> FormalSeries<T> {
    /// `t + 0*lam + ... + 0*lam^order`.
    pub fn constant(t: T, order: usize) -> Self {
        let zero = t.zero_like();
        let mut coeffs = vec![t];
        coeffs.resize(order + 1, zero);
        FormalSeries { coeffs }
    }

    /// All-zero series shaped like the given prototype coefficient.
    pub fn zero_like_coeff(proto: &T, order: usize) -> Self {
        FormalSeries { coeffs: vec![proto.zero_like(); order + 1] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(T::is_zero)
    }

    pub fn lowest_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check_orders(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order() != other.order() {
            return Err(SeriesError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_orders(other)?;
        Ok(FormalSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_orders(other)?;
        Ok(FormalSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub_ref(b))
                .collect(),
        })
    }

    /// Cauchy product modulo `lam^(N+1)` using the coefficient product.
    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_orders(other)?;
        let n = self.order();
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc: Option<T> = None;
            for a in 0..=k {
                let prod = self.coeffs[a].mul_ref(&other.coeffs[k - a]);
                acc = Some(match acc {
                    None => prod,
                    Some(s) => s.add_ref(&prod),
                });
            }
            coeffs.push(acc.expect("k+1 >= 1 summands"));
        }
        Ok(FormalSeries { coeffs })
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("series order mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("series order mismatch")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("series order mismatch")
    }

    pub fn neg(&self) -> Self {
        FormalSeries { coeffs: self.coeffs.iter().map(T::neg_ref).collect() }
    }

    /// Multiplication by `lam^k`: shifts coefficients up, truncating.
    pub fn shift(&self, k: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let n = self.order();
        let mut coeffs = vec![zero; n + 1];
        for r in 0..=n {
            if r + k <= n {
                coeffs[r + k] = self.coeffs[r].clone();
            }
        }
        FormalSeries { coeffs }
    }

    /// Re-truncates to a lower order or pads with zeros to a higher one.
    pub fn with_order(&self, order: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, zero);
        FormalSeries { coeffs }
    }

    pub fn set_coeff(&mut self, r: usize, value: T) {
        self.coeffs[r] = value;
    }
}

impl<T: Ring> Ring for FormalSeries<T> {
    fn zero_like(&self) -> Self {
        Self::zero_like_coeff(&self.coeffs[0], self.order())
    }
    fn is_zero(&self) -> bool {
        FormalSeries::is_zero(self)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
}

impl<T: Conjugate> Conjugate for FormalSeries<T> {
    fn conj(&self) -> Self {
        FormalSeries { coeffs: self.coeffs.iter().map(Conjugate::conj).collect() }
    }
}

/// Coefficients that can be inverted when nonzero (or, for polynomials,
/// when constant): exactly what series inversion needs at order zero.
pub trait InvertibleCoeff: Ring {
    fn try_inv(&self) -> Option<Self>;
}

impl InvertibleCoeff for Scalar {
    fn try_inv(&self) -> Option<Self> {
        crate::scalar::s_inv(self)
    }
}

impl InvertibleCoeff for Rational {
    fn try_inv(&self) -> Option<Self> {
        if Ring::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl InvertibleCoeff for Polynomial {
    fn try_inv(&self) -> Option<Self> {
        if self.terms().len() != 1 {
            return None;
        }
        let (m, c) = self.terms().iter().next().unwrap();
        if !crate::poly::mono_is_zero(m) {
            return None;
        }
        let inv = crate::scalar::s_inv(c)?;
        Some(Polynomial::constant(self.base(), self.fiber(), inv))
    }
}

impl<T: InvertibleCoeff> FormalSeries<T> {
    /// Inverse in the truncated ring; requires an invertible order-zero
    /// coefficient. Satisfies `a * a.invert() = 1` modulo `lam^(N+1)`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let inv0 = self.coeffs[0].try_inv().ok_or(SeriesError::NotInvertible)?;
        let n = self.order();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(inv0.clone());
        for k in 1..=n {
            // b_k = -a_0^{-1} * sum_{j=1..k} a_j b_{k-j}
            let mut acc: Option<T> = None;
            for j in 1..=k {
                let prod = self.coeffs[j].mul_ref(&out[k - j]);
                acc = Some(match acc {
                    None => prod,
                    Some(s) => s.add_ref(&prod),
                });
            }
            let s = acc.expect("k >= 1 summands");
            out.push(inv0.mul_ref(&s).neg_ref());
        }
        Ok(FormalSeries { coeffs: out })
    }
}

/// Inverse of a series whose order-zero coefficient is the given unit
/// (identity operator, identity matrix, one). Pure recursion in the
/// truncated ring: `b_0 = 1`, `b_k = -sum_{j=1..k} a_j b_{k-j}`.
pub fn invert_unit_series<T: Ring>(a: &FormalSeries<T>, one: &T) -> FormalSeries<T> {
    assert!(a.coeff(0) == one, "order-zero coefficient must be the unit");
    let n = a.order();
    let mut out: Vec<T> = Vec::with_capacity(n + 1);
    out.push(one.clone());
    for k in 1..=n {
        let mut acc = one.zero_like();
        for j in 1..=k {
            acc = acc.add_ref(&a.coeff(j).mul_ref(&out[k - j]));
        }
        out.push(acc.neg_ref());
    }
    FormalSeries { coeffs: out }
}

/// Ordered-ring sign of a real series: the sign of the lowest stored
/// nonvanishing coefficient, reported together with the truncation order.
pub fn series_sign(s: &FormalSeries<Rational>) -> SignVerdict {
    use num_traits::Signed;
    let sign = match s.lowest_nonzero() {
        None => Sign::Zero,
        Some(r) => {
            if s.coeff(r).is_positive() {
                Sign::Positive
            } else {
                Sign::Negative
            }
        }
    };
    SignVerdict { sign, truncation_order: s.order() }
}

/// Restriction of a scalar series to a real one; `None` if any stored
/// coefficient has a nonvanishing imaginary part.
pub fn real_series(s: &ScalarSeries) -> Option<FormalSeries<Rational>> {
    let mut coeffs = Vec::with_capacity(s.order() + 1);
    for c in s.coeffs() {
        if !crate::scalar::s_is_real(c) {
            return None;
        }
        coeffs.push(c.re.clone());
    }
    Some(FormalSeries::from_coeffs(coeffs))
}

/// Evaluates a polynomial series at a rational point, coefficient-wise.
pub fn eval_series(s: &PolySeries, point: &[Rational]) -> ScalarSeries {
    s.map(|p| p.eval(point))
}

/// Canonical multi-line-free display `p0 + (p1)*lam + ...` used by tests.
pub fn series_display(s: &PolySeries, names: &[&str]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (r, c) in s.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let body = c.display_with(names);
        let wrapped = if body.contains(" + ") || body.contains(" - ") {
            format!("({body})")
        } else {
            body
        };
        let part = match r {
            0 => wrapped,
            1 => format!("{wrapped}*lam"),
            _ => format!("{wrapped}*lam^{r}"),
        };
        parts.push(part);
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio, s_i, s_int, s_one, s_zero};

    fn sc(vals: &[Scalar]) -> ScalarSeries {
        FormalSeries::from_coeffs(vals.to_vec())
    }

    #[test]
    fn truncated_product() {
        // (1 + lam)(1 - lam) = 1 - lam^2 at N = 2
        let a = sc(&[s_one(), s_one(), s_zero()]);
        let b = sc(&[s_one(), -s_one(), s_zero()]);
        assert_eq!(a.mul(&b), sc(&[s_one(), s_zero(), -s_one()]));
    }

    #[test]
    fn geometric_inverse() {
        // invert(1 - lam) = 1 + lam + lam^2 + lam^3 at N = 3
        let a = sc(&[s_one(), -s_one(), s_zero(), s_zero()]);
        let inv = a.invert().unwrap();
        assert_eq!(inv, sc(&[s_one(), s_one(), s_one(), s_one()]));
        let prod = a.mul(&inv);
        assert_eq!(prod, FormalSeries::constant(s_one(), 3));
    }

    #[test]
    fn conjugation_flips_the_imaginary_unit() {
        let a = sc(&[s_zero(), s_i()]);
        assert_eq!(a.conj(), sc(&[s_zero(), -s_i()]));
        assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = sc(&[s_one(), s_one()]);
        let b = sc(&[s_one(), s_one(), s_one()]);
        assert!(matches!(
            a.try_add(&b),
            Err(SeriesError::OrderMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(a.try_mul(&b), Err(SeriesError::OrderMismatch { .. })));
    }

    #[test]
    fn zero_order_zero_is_not_invertible() {
        let a = sc(&[s_zero(), s_one()]);
        assert_eq!(a.invert(), Err(SeriesError::NotInvertible));
    }

    #[test]
    fn sign_of_lowest_nonvanishing_coefficient() {
        // 3 lam^2 + 5 lam^3 > 0
        let a = FormalSeries::from_coeffs(vec![rat(0), rat(0), rat(3), rat(5)]);
        assert_eq!(series_sign(&a).sign, Sign::Positive);
        // -lam + 2 lam^2 < 0
        let b = FormalSeries::from_coeffs(vec![rat(0), rat(-1), rat(2), rat(0)]);
        assert_eq!(series_sign(&b).sign, Sign::Negative);
        let z = FormalSeries::from_coeffs(vec![rat(0); 4]);
        let v = series_sign(&z);
        assert_eq!(v.sign, Sign::Zero);
        assert_eq!(v.truncation_order, 3);
    }

    #[test]
    fn shift_truncates() {
        let a = sc(&[s_one(), s_int(2), s_int(3)]);
        assert_eq!(a.shift(1), sc(&[s_zero(), s_one(), s_int(2)]));
        assert_eq!(a.shift(3), sc(&[s_zero(), s_zero(), s_zero()]));
    }

    #[test]
    fn polynomial_series_inversion_needs_constant_lead() {
        let x = Polynomial::var(1, 0, 0);
        let half = Polynomial::constant(1, 0, crate::scalar::s_ratio(1, 2));
        let a: PolySeries = FormalSeries::from_coeffs(vec![half, x.clone()]);
        let inv = a.invert().unwrap();
        assert_eq!(a.mul(&inv), FormalSeries::constant(Polynomial::one(1, 0), 1));
        let bad: PolySeries = FormalSeries::from_coeffs(vec![x.clone(), x]);
        assert_eq!(bad.invert(), Err(SeriesError::NotInvertible));
        let _ = ratio(1, 2);
    }
}
