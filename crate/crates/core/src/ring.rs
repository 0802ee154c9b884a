//! Minimal ring abstraction shared by series, matrices and operators.
//!
//! Zero elements carry context (a zero polynomial remembers its variable
//! split), so the trait hands out zeros from a prototype instead of a
//! nullary constructor.

/// Reference-based ring operations over owned, comparable values.
pub trait Ring: Clone + PartialEq {
    /// A zero of the same shape (variable split, dimensions) as `self`.
    fn zero_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;

    fn sub_ref(&self, rhs: &Self) -> Self {
        self.add_ref(&rhs.neg_ref())
    }
}

/// Coefficient-wise complex conjugation. All formal variables are real,
/// so conjugation is an involution fixing them.
pub trait Conjugate {
    fn conj(&self) -> Self;
}
