//! Dense matrices over any of the engine's rings (polynomials, series,
//! operators). Row-major, sized at construction.

use alloc::vec::Vec;

use crate::ring::{Conjugate, Ring};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        assert!(r > 0);
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c));
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|t| f(t)).collect(),
        }
    }

    pub fn transpose(&self) -> Self
    where
        T: Clone,
    {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zero_like_entry(proto: &T, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| proto.zero_like())
    }

    /// Identity with the given diagonal unit (zero shape inferred from it).
    pub fn identity(n: usize, one: T) -> Self {
        let zero = one.zero_like();
        Matrix::from_fn(n, n, |i, j| if i == j { one.clone() } else { zero.clone() })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(T::neg_ref).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc: Option<T> = None;
            for k in 0..self.cols {
                let p = self.get(i, k).mul_ref(other.get(k, j));
                acc = Some(match acc {
                    None => p,
                    Some(s) => s.add_ref(&p),
                });
            }
            acc.expect("inner dimension >= 1")
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_zero)
    }
}

impl<T: Ring> Ring for Matrix<T> {
    fn zero_like(&self) -> Self {
        self.map(|t| t.zero_like())
    }
    fn is_zero(&self) -> bool {
        Matrix::is_zero(self)
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

impl<T: Conjugate + Clone> Matrix<T> {
    pub fn conj_transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }
}

impl<T: Conjugate> Conjugate for Matrix<T> {
    fn conj(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Conjugate::conj).collect(),
        }
    }
}

/// Scalar multiple of every entry; separate from `Ring` because the
/// scalar ring differs from the entry ring.
pub trait ScalarScale {
    fn scale_scalar(&self, c: &Scalar) -> Self;
}

impl ScalarScale for crate::poly::Polynomial {
    fn scale_scalar(&self, c: &Scalar) -> Self {
        self.scale(c)
    }
}

impl ScalarScale for crate::diffop::DiffOp {
    fn scale_scalar(&self, c: &Scalar) -> Self {
        self.scale(c)
    }
}

impl<T: ScalarScale> ScalarScale for Matrix<T> {
    fn scale_scalar(&self, c: &Scalar) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|t| t.scale_scalar(c)).collect(),
        }
    }
}

impl<T: ScalarScale> ScalarScale for crate::series::FormalSeries<T> {
    fn scale_scalar(&self, c: &Scalar) -> Self {
        self.map(|t| t.scale_scalar(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use crate::scalar::s_int;

    #[test]
    fn polynomial_matrix_arithmetic() {
        let x = Polynomial::var(1, 0, 0);
        let one = Polynomial::one(1, 0);
        let a = Matrix::from_rows(vec![
            vec![one.clone(), x.clone()],
            vec![Polynomial::zero(1, 0), one.clone()],
        ]);
        let b = a.mul(&a);
        assert_eq!(b.get(0, 1), &x.scale(&s_int(2)));
        let id = Matrix::identity(2, one.clone());
        assert_eq!(a.mul(&id), a);
        assert!(a.sub(&a).is_zero());
    }
}
