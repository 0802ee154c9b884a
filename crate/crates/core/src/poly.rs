//! Multivariate polynomials over Gaussian rationals on a split variable
//! set: `base` variables model functions on the base, `base + fiber`
//! variables model functions on the total space. The embedding of base
//! functions into total-space functions is exponent padding.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::ring::{Conjugate, Ring};
use crate::scalar::{int, s_pow, s_real, s_zero, scalar_string, Rational, Scalar};

/// Exponent multi-index over all variables of a space.
pub type Mono = Vec<u32>;

pub fn mono_zero(nvars: usize) -> Mono {
    vec![0; nvars]
}

pub fn mono_deg(m: &Mono) -> u32 {
    m.iter().sum()
}

pub fn mono_add(a: &Mono, b: &Mono) -> Mono {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Componentwise difference, `None` when any component would go negative.
pub fn mono_sub(a: &Mono, b: &Mono) -> Option<Mono> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
}

pub fn mono_le(a: &Mono, b: &Mono) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn mono_is_zero(m: &Mono) -> bool {
    m.iter().all(|&e| e == 0)
}

fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * int((n - j) as i64) / int((j + 1) as i64);
    }
    acc
}

/// `prod_i binom(a_i, g_i)`.
pub fn multi_binom(a: &Mono, g: &Mono) -> BigInt {
    a.iter().zip(g).fold(BigInt::one(), |acc, (&n, &k)| acc * binom(n, k))
}

/// All multi-indices `g <= a` (componentwise), in lexicographic order.
pub fn sub_indices(a: &Mono) -> Vec<Mono> {
    let mut out = vec![Vec::with_capacity(a.len())];
    for &e in a {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for prefix in &out {
            for k in 0..=e {
                let mut m = prefix.clone();
                m.push(k);
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// All ordered splits `d = g0 + g1 + g2` with the trinomial coefficient
/// `prod_i d_i! / (g0_i! g1_i! g2_i!)`.
pub fn splits3(d: &Mono) -> Vec<(Mono, Mono, Mono, BigInt)> {
    let mut out = Vec::new();
    for g0 in sub_indices(d) {
        let rest = mono_sub(d, &g0).unwrap();
        let c0 = multi_binom(d, &g0);
        for g1 in sub_indices(&rest) {
            let g2 = mono_sub(&rest, &g1).unwrap();
            let c = &c0 * multi_binom(&rest, &g1);
            out.push((g0.clone(), g1, g2, c));
        }
    }
    out
}

/// `prod_i b_i (b_i - 1) ... (b_i - a_i + 1)`; the scalar produced by
/// `d^a x^b` (zero when some `a_i > b_i`).
pub fn falling_product(b: &Mono, a: &Mono) -> BigInt {
    let mut acc = BigInt::one();
    for (&bi, &ai) in b.iter().zip(a) {
        if ai > bi {
            return BigInt::zero();
        }
        for j in 0..ai {
            acc *= int((bi - j) as i64);
        }
    }
    acc
}

/// All monomials in `nvars` variables of total degree `<= max_deg`,
/// ordered by (degree, lexicographic index).
pub fn monomials_up_to(nvars: usize, max_deg: u32) -> Vec<Mono> {
    let mut out: Vec<Mono> = Vec::new();
    let mut current = vec![mono_zero(nvars)];
    out.extend(current.iter().cloned());
    for _ in 0..max_deg {
        let mut next: Vec<Mono> = Vec::new();
        for m in &current {
            // Raise only at or after the last raised position to avoid duplicates.
            let start = m
                .iter()
                .rposition(|&e| e > 0)
                .unwrap_or(0);
            for v in start..nvars {
                let mut n = m.clone();
                n[v] += 1;
                next.push(n);
            }
        }
        out.extend(next.iter().cloned());
        current = next;
    }
    out
}

pub fn bigint_scalar(n: &BigInt) -> Scalar {
    s_real(Rational::from_integer(n.clone()))
}

/// Polynomial on a split variable set. Exponent vectors have length
/// `base + fiber`; base variables come first. No zero coefficients are
/// stored, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    base: usize,
    fiber: usize,
    terms: BTreeMap<Mono, Scalar>,
}

impl Polynomial {
    pub fn zero(base: usize, fiber: usize) -> Self {
        Polynomial { base, fiber, terms: BTreeMap::new() }
    }

    pub fn constant(base: usize, fiber: usize, c: Scalar) -> Self {
        let mut p = Self::zero(base, fiber);
        p.add_term(mono_zero(base + fiber), c);
        p
    }

    pub fn one(base: usize, fiber: usize) -> Self {
        Self::constant(base, fiber, crate::scalar::s_one())
    }

    /// The coordinate function of variable `v` (global index).
    pub fn var(base: usize, fiber: usize, v: usize) -> Self {
        assert!(v < base + fiber);
        let mut m = mono_zero(base + fiber);
        m[v] = 1;
        Self::monomial(base, fiber, m, crate::scalar::s_one())
    }

    pub fn monomial(base: usize, fiber: usize, m: Mono, c: Scalar) -> Self {
        assert_eq!(m.len(), base + fiber);
        let mut p = Self::zero(base, fiber);
        p.add_term(m, c);
        p
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

    pub fn terms(&self) -> &BTreeMap<Mono, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * x^m`, pruning a resulting zero.
    pub fn add_term(&mut self, m: Mono, c: Scalar) {
        if num_traits::Zero::is_zero(&c) {
            return;
        }
        debug_assert_eq!(m.len(), self.nvars());
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if num_traits::Zero::is_zero(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn assert_same_space(&self, other: &Self) {
        assert_eq!(
            (self.base, self.fiber),
            (other.base, other.fiber),
            "variable split mismatch"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_space(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if num_traits::Zero::is_zero(c) {
            return Self::zero(self.base, self.fiber);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.clone() * c.clone();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_space(other);
        let mut out = Self::zero(self.base, self.fiber);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_add(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.base, self.fiber);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative in variable `v`.
    pub fn deriv(&self, v: usize) -> Self {
        assert!(v < self.nvars());
        let mut out = Self::zero(self.base, self.fiber);
        for (m, c) in &self.terms {
            if m[v] == 0 {
                continue;
            }
            let mut n = m.clone();
            n[v] -= 1;
            out.add_term(n, c * crate::scalar::s_int(m[v] as i64));
        }
        out
    }

    /// Iterated partial derivative `d^a`.
    pub fn deriv_multi(&self, a: &Mono) -> Self {
        assert_eq!(a.len(), self.nvars());
        let mut out = Self::zero(self.base, self.fiber);
        for (m, c) in &self.terms {
            match mono_sub(m, a) {
                None => continue,
                Some(n) => {
                    let f = falling_product(m, a);
                    out.add_term(n, c * bigint_scalar(&f));
                }
            }
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(mono_deg).max().unwrap_or(0)
    }

    /// True when no fiber variable occurs.
    pub fn is_base(&self) -> bool {
        self.terms
            .keys()
            .all(|m| m[self.base..].iter().all(|&e| e == 0))
    }

    /// Embeds a pure base polynomial into a space with `fiber` fiber
    /// variables (pull-back along the projection).
    pub fn pr_star(&self, fiber: usize) -> Self {
        assert_eq!(self.fiber, 0, "pull-back argument must be a base polynomial");
        let mut out = Self::zero(self.base, fiber);
        for (m, c) in &self.terms {
            let mut n = m.clone();
            n.extend(core::iter::repeat(0).take(fiber));
            out.add_term(n, c.clone());
        }
        out
    }

    /// Inverse of [`Self::pr_star`]: drops fiber slots if unused.
    pub fn as_base(&self) -> Option<Self> {
        if !self.is_base() {
            return None;
        }
        let mut out = Self::zero(self.base, 0);
        for (m, c) in &self.terms {
            out.add_term(m[..self.base].to_vec(), c.clone());
        }
        Some(out)
    }

    /// Exact evaluation at a rational point (all variables).
    pub fn eval(&self, point: &[Rational]) -> Scalar {
        assert_eq!(point.len(), self.nvars());
        let mut acc = s_zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    term *= s_pow(&s_real(point[v].clone()), e);
                }
            }
            acc += term;
        }
        acc
    }

    /// Substitution `t_j -> t_j + c_j` on the fiber variables.
    pub fn translate_fiber(&self, shift: &[Rational]) -> Self {
        assert_eq!(shift.len(), self.fiber);
        let mut out = Self::zero(self.base, self.fiber);
        for (m, c) in &self.terms {
            // Expand each fiber power by the binomial theorem.
            let mut partial: Vec<(Mono, Scalar)> = vec![(m.clone(), c.clone())];
            for j in 0..self.fiber {
                let v = self.base + j;
                if num_traits::Zero::is_zero(&shift[j]) {
                    continue;
                }
                let mut next = Vec::new();
                for (mm, cc) in &partial {
                    let e = mm[v];
                    for k in 0..=e {
                        let mut nm = mm.clone();
                        nm[v] = k;
                        let coeff = cc
                            * bigint_scalar(&binom(e, k))
                            * s_pow(&s_real(shift[j].clone()), e - k);
                        next.push((nm, coeff));
                    }
                }
                partial = next;
            }
            for (nm, cc) in partial {
                out.add_term(nm, cc);
            }
        }
        out
    }

    /// Substitution of a base variable by a base polynomial
    /// (used for change of coordinates in tests).
    pub fn max_fiber_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m[self.base..].iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Canonical display with `x0..` base and `t0..` fiber variables.
    pub fn display(&self) -> String {
        let base_names: Vec<String> = (0..self.base).map(|i| format!("x{i}")).collect();
        let fiber_names: Vec<String> = (0..self.fiber).map(|i| format!("t{i}")).collect();
        let names: Vec<&str> = base_names
            .iter()
            .chain(fiber_names.iter())
            .map(|s| s.as_str())
            .collect();
        self.display_with(&names)
    }

    /// Canonical display with caller-supplied variable names, ordered by
    /// (degree, reverse-lex) so constants print first.
    pub fn display_with(&self, names: &[&str]) -> String {
        assert_eq!(names.len(), self.nvars());
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Mono> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            mono_deg(a)
                .cmp(&mono_deg(b))
                .then_with(|| b.cmp(a))
        });
        let mut out = String::new();
        for (idx, m) in keys.iter().enumerate() {
            let c = &self.terms[*m];
            let cs = scalar_string(c);
            let mono = mono_string(m, names);
            let (sign, body) = if let Some(stripped) = cs.strip_prefix('-') {
                if stripped.contains(" + ") || stripped.contains(" - ") {
                    ("+", format!("({cs})"))
                } else {
                    ("-", stripped.into())
                }
            } else if cs.contains(" + ") || cs.contains(" - ") {
                ("+", format!("({cs})"))
            } else {
                ("+", cs)
            };
            let piece = match (&mono, body.as_str()) {
                (None, _) => body.clone(),
                (Some(ms), "1") => ms.clone(),
                (Some(ms), _) => format!("{body}*{ms}"),
            };
            if idx == 0 {
                if sign == "-" {
                    out.push('-');
                }
                out.push_str(&piece);
            } else {
                out.push_str(if sign == "-" { " - " } else { " + " });
                out.push_str(&piece);
            }
        }
        out
    }

    /// The coefficient of `x^m` (zero when absent).
    pub fn coeff(&self, m: &Mono) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(s_zero)
    }
}

fn mono_string(m: &Mono, names: &[&str]) -> Option<String> {
    let mut parts = Vec::new();
    for (v, &e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[v].into()),
            _ => parts.push(format!("{}^{}", names[v], e)),
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join("*"))
    }
}

impl Ring for Polynomial {
    fn zero_like(&self) -> Self {
        Polynomial::zero(self.base, self.fiber)
    }
    fn is_zero(&self) -> bool {
        Polynomial::is_zero(self)
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

impl Conjugate for Polynomial {
    fn conj(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = Conjugate::conj(c);
        }
        out
    }
}

/// Exact rational sample points for evaluation-based checks,
/// deterministic from an integer seed.
pub fn sample_point(nvars: usize, seed: u64) -> Vec<Rational> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut out = Vec::with_capacity(nvars);
    for _ in 0..nvars {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let num = ((state >> 33) % 17) as i64 - 8;
        let den = (((state >> 20) % 7) + 1) as i64;
        out.push(crate::scalar::ratio(num, den));
    }
    out
}

pub fn u32_of(n: &BigInt) -> u32 {
    n.to_u32().expect("index arithmetic stays small")
}
