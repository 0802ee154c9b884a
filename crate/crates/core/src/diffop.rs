//! Differential operators with polynomial coefficients, and their
//! multilinear (bidifferential) cousins.
//!
//! An operator is a finite sum `sum_a c_a(x,t) d^a`; composition expands
//! by the multi-index Leibniz rule and is associative. Operators whose
//! derivative indices avoid the base directions are the vertical ones:
//! exactly the operators commuting with multiplication by pulled-back
//! base functions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::poly::{
    bigint_scalar, mono_add, mono_deg, mono_is_zero, mono_sub, mono_zero, multi_binom,
    splits3, sub_indices, Mono, Polynomial,
};
use crate::ring::{Conjugate, Ring};
use crate::scalar::{Rational, Scalar};
use crate::series::{OpSeries, PolySeries};

/// Finite-order differential operator on the split variable space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffOp {
    base: usize,
    fiber: usize,
    terms: BTreeMap<Mono, Polynomial>,
}

impl DiffOp {
    pub fn zero(base: usize, fiber: usize) -> Self {
        DiffOp { base, fiber, terms: BTreeMap::new() }
    }

    pub fn identity(base: usize, fiber: usize) -> Self {
        Self::mult(&Polynomial::one(base, fiber))
    }

    /// Multiplication operator by a polynomial.
    pub fn mult(p: &Polynomial) -> Self {
        let mut op = Self::zero(p.base(), p.fiber());
        op.add_term(mono_zero(p.nvars()), p.clone());
        op
    }

    /// The partial derivative in variable `v`.
    pub fn partial(base: usize, fiber: usize, v: usize) -> Self {
        assert!(v < base + fiber);
        let mut m = mono_zero(base + fiber);
        m[v] = 1;
        let mut op = Self::zero(base, fiber);
        op.add_term(m, Polynomial::one(base, fiber));
        op
    }

    /// `c(x,t) d^a` for a single derivative index.
    pub fn term(a: Mono, c: Polynomial) -> Self {
        let mut op = Self::zero(c.base(), c.fiber());
        op.add_term(a, c);
        op
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn nvars(&self) -> usize {
        self.base + self.fiber
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Polynomial> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&mono_zero(self.nvars()))
                .map(|c| *c == Polynomial::one(self.base, self.fiber))
                .unwrap_or(false)
    }

    /// Highest derivative order among stored terms.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(mono_deg).max().unwrap_or(0)
    }

    pub fn max_coeff_degree(&self) -> u32 {
        self.terms.values().map(|c| c.total_degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, a: Mono, c: Polynomial) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(a.len(), self.nvars());
        match self.terms.entry(a) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.base, self.fiber);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.scale(s));
        }
        out
    }

    /// Application to a polynomial: `sum_a c_a * d^a F`.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.base, self.fiber);
        for (a, c) in &self.terms {
            let d = f.deriv_multi(a);
            if !d.is_zero() {
                out = out.add(&c.mul(&d));
            }
        }
        out
    }

    pub fn apply_series(&self, f: &PolySeries) -> PolySeries {
        f.map(|p| self.apply(p))
    }

    /// Operator composition: `(self . other)(F) = self(other(F))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!((self.base, self.fiber), (other.base, other.fiber));
        let mut out = Self::zero(self.base, self.fiber);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                // d^a (d_b(x) d^b) = sum_{g<=a} binom(a,g) (d^g d_b) d^{a-g+b}
                for g in sub_indices(a) {
                    let dg = d.deriv_multi(&g);
                    if dg.is_zero() {
                        continue;
                    }
                    let coeff = c.mul(&dg).scale(&bigint_scalar(&multi_binom(a, &g)));
                    let idx = mono_add(&mono_sub(a, &g).unwrap(), b);
                    out.add_term(idx, coeff);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// Vertical means: no derivative in a base direction. Multiplication
    /// operators count as vertical.
    pub fn is_vertical(&self) -> bool {
        self.terms
            .keys()
            .all(|a| a[..self.base].iter().all(|&e| e == 0))
    }

    /// The terms with purely-fiber derivative index.
    pub fn vertical_part(&self) -> Self {
        let mut out = Self::zero(self.base, self.fiber);
        for (a, c) in &self.terms {
            if a[..self.base].iter().all(|&e| e == 0) {
                out.add_term(a.clone(), c.clone());
            }
        }
        out
    }

    pub fn non_vertical_part(&self) -> Self {
        self.sub(&self.vertical_part())
    }

    /// True when no coefficient involves a fiber variable.
    pub fn coeffs_fiber_free(&self) -> bool {
        self.terms.values().all(|c| c.is_base())
    }

    /// Conjugation of the operator by the fiber translation `t -> t + c`:
    /// derivative indices are untouched, coefficients get substituted.
    pub fn translate_fiber(&self, shift: &[Rational]) -> Self {
        let mut out = Self::zero(self.base, self.fiber);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.translate_fiber(shift));
        }
        out
    }

    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names: Vec<String> = (0..self.base)
            .map(|i| format!("x{i}"))
            .chain((0..self.fiber).map(|i| format!("t{i}")))
            .collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut parts = Vec::new();
        for (a, c) in &self.terms {
            let coeff = c.display_with(&refs);
            if mono_is_zero(a) {
                parts.push(format!("({coeff})"));
            } else {
                let mut d = String::from("d[");
                let mut first = true;
                for (v, &e) in a.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if !first {
                        d.push(' ');
                    }
                    first = false;
                    if e == 1 {
                        d.push_str(refs[v]);
                    } else {
                        d.push_str(&format!("{}^{}", refs[v], e));
                    }
                }
                d.push(']');
                parts.push(format!("({coeff})*{d}"));
            }
        }
        parts.join(" + ")
    }
}

impl Ring for DiffOp {
    fn zero_like(&self) -> Self {
        DiffOp::zero(self.base, self.fiber)
    }
    fn is_zero(&self) -> bool {
        DiffOp::is_zero(self)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.compose(rhs)
    }
}

impl Conjugate for DiffOp {
    fn conj(&self) -> Self {
        let mut out = DiffOp::zero(self.base, self.fiber);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.conj());
        }
        out
    }
}

/// Composition of truncated operator series.
pub fn op_series_compose(a: &OpSeries, b: &OpSeries) -> OpSeries {
    a.mul(b)
}

/// Application of an operator series to a polynomial series.
pub fn op_series_apply(a: &OpSeries, f: &PolySeries) -> PolySeries {
    assert_eq!(a.order(), f.order(), "series order mismatch");
    let n = a.order();
    let zero = Polynomial::zero(a.coeff(0).base(), a.coeff(0).fiber());
    let mut coeffs = vec![zero; n + 1];
    for r in 0..=n {
        for s in 0..=(n - r) {
            let v = a.coeff(r).apply(f.coeff(s));
            coeffs[r + s] = coeffs[r + s].add(&v);
        }
    }
    PolySeries::from_coeffs(coeffs)
}

/// Inverse of an operator series whose order-zero part is the identity.
pub fn op_series_invert(a: &OpSeries) -> OpSeries {
    let one = DiffOp::identity(a.coeff(0).base(), a.coeff(0).fiber());
    crate::series::invert_unit_series(a, &one)
}

/// Identity as an operator series.
pub fn op_series_identity(base: usize, fiber: usize, order: usize) -> OpSeries {
    OpSeries::constant(DiffOp::identity(base, fiber), order)
}

/// `k`-linear differential operator: a finite sum of terms
/// `c(x) * (d^{b_1} . slot_1) ... (d^{b_k} . slot_k)` on a single
/// variable space. Arity two carries the star-product cochains.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiDiffOp {
    arity: usize,
    base: usize,
    fiber: usize,
    terms: BTreeMap<Vec<Mono>, Polynomial>,
}

impl MultiDiffOp {
    pub fn zero(arity: usize, base: usize, fiber: usize) -> Self {
        MultiDiffOp { arity, base, fiber, terms: BTreeMap::new() }
    }

    /// The pointwise product as an arity-2 operator.
    pub fn product(base: usize, fiber: usize) -> Self {
        let mut op = Self::zero(2, base, fiber);
        let z = mono_zero(base + fiber);
        op.add_term(vec![z.clone(), z], Polynomial::one(base, fiber));
        op
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn nvars(&self) -> usize {
        self.base + self.fiber
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Mono>, Polynomial> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, slots: Vec<Mono>, c: Polynomial) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(slots.len(), self.arity);
        match self.terms.entry(slots) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.arity, self.base, self.fiber);
        for (slots, c) in &self.terms {
            out.add_term(slots.clone(), c.scale(s));
        }
        out
    }

    pub fn apply(&self, args: &[&Polynomial]) -> Polynomial {
        assert_eq!(args.len(), self.arity);
        let mut out = Polynomial::zero(self.base, self.fiber);
        for (slots, c) in &self.terms {
            let mut term = c.clone();
            let mut dead = false;
            for (i, b) in slots.iter().enumerate() {
                let d = args[i].deriv_multi(b);
                if d.is_zero() {
                    dead = true;
                    break;
                }
                term = term.mul(&d);
            }
            if !dead {
                out = out.add(&term);
            }
        }
        out
    }

    pub fn apply2(&self, f: &Polynomial, g: &Polynomial) -> Polynomial {
        self.apply(&[f, g])
    }

    /// Swaps the two argument slots of an arity-2 operator.
    pub fn swap2(&self) -> Self {
        assert_eq!(self.arity, 2);
        let mut out = Self::zero(2, self.base, self.fiber);
        for (slots, c) in &self.terms {
            out.add_term(vec![slots[1].clone(), slots[0].clone()], c.clone());
        }
        out
    }

    /// Post-composition `D . self` with a differential operator on the
    /// same space.
    pub fn post_compose(&self, d: &DiffOp) -> Self {
        assert_eq!((self.base, self.fiber), (d.base(), d.fiber()));
        assert_eq!(self.arity, 2);
        let mut out = Self::zero(self.arity, self.base, self.fiber);
        for (k, w) in d.terms() {
            for (slots, c) in &self.terms {
                // d^k (c * d^{b1} f * d^{b2} g) by the trinomial Leibniz rule
                for (g0, g1, g2, m) in splits3(k) {
                    let dc = c.deriv_multi(&g0);
                    if dc.is_zero() {
                        continue;
                    }
                    let coeff = w.mul(&dc).scale(&bigint_scalar(&m));
                    let s1 = mono_add(&slots[0], &g1);
                    let s2 = mono_add(&slots[1], &g2);
                    out.add_term(vec![s1, s2], coeff);
                }
            }
        }
        out
    }

    /// Pre-composition of argument slot `i` with a differential operator:
    /// `(f_1, .., f_k) -> self(.., d(f_i), ..)`.
    pub fn slot_compose(&self, slot: usize, d: &DiffOp) -> Self {
        assert!(slot < self.arity);
        assert_eq!((self.base, self.fiber), (d.base(), d.fiber()));
        let mut out = Self::zero(self.arity, self.base, self.fiber);
        for (slots, c) in &self.terms {
            for (k, w) in d.terms() {
                // d^{b} (w d^k f) = sum_{g<=b} binom(b,g) (d^g w) d^{b-g+k} f
                let b = &slots[slot];
                for g in sub_indices(b) {
                    let dw = w.deriv_multi(&g);
                    if dw.is_zero() {
                        continue;
                    }
                    let coeff = c.mul(&dw).scale(&bigint_scalar(&multi_binom(b, &g)));
                    let mut ns = slots.clone();
                    ns[slot] = mono_add(&mono_sub(b, &g).unwrap(), k);
                    out.add_term(ns, coeff);
                }
            }
        }
        out
    }

    /// Fixes the first slot of an arity-2 operator at a polynomial,
    /// producing the operator `g -> self(p, g)`.
    pub fn curry_left(&self, p: &Polynomial) -> DiffOp {
        assert_eq!(self.arity, 2);
        let mut out = DiffOp::zero(self.base, self.fiber);
        for (slots, c) in &self.terms {
            let dp = p.deriv_multi(&slots[0]);
            if dp.is_zero() {
                continue;
            }
            out.add_term(slots[1].clone(), c.mul(&dp));
        }
        out
    }

    /// Fixes the second slot: the operator `f -> self(f, p)`.
    pub fn curry_right(&self, p: &Polynomial) -> DiffOp {
        assert_eq!(self.arity, 2);
        let mut out = DiffOp::zero(self.base, self.fiber);
        for (slots, c) in &self.terms {
            let dp = p.deriv_multi(&slots[1]);
            if dp.is_zero() {
                continue;
            }
            out.add_term(slots[0].clone(), c.mul(&dp));
        }
        out
    }

    /// True when every stored term differentiates each argument slot at
    /// least once — i.e. the operator kills constants in every slot.
    pub fn annihilates_constants(&self) -> bool {
        self.terms
            .keys()
            .all(|slots| slots.iter().all(|b| !mono_is_zero(b)))
    }

    pub fn max_slot_order(&self, slot: usize) -> u32 {
        self.terms
            .keys()
            .map(|slots| mono_deg(&slots[slot]))
            .max()
            .unwrap_or(0)
    }

    pub fn max_coeff_degree(&self) -> u32 {
        self.terms.values().map(|c| c.total_degree()).max().unwrap_or(0)
    }
}

impl Conjugate for MultiDiffOp {
    fn conj(&self) -> Self {
        let mut out = Self::zero(self.arity, self.base, self.fiber);
        for (slots, c) in &self.terms {
            out.add_term(slots.clone(), c.conj());
        }
        out
    }
}
