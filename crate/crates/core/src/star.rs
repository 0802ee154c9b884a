//! Star products on the base variables: the exponential product of a
//! constant antisymmetric tensor, user-supplied cochain products, exact
//! associativity and Hermitian checks, Poisson-limit extraction, the
//! Schouten square of a tensor, and equivalence transformations.
//!
//! All checks are exhaustive over a monomial degree bound. A violated
//! multidifferential identity of bounded slot order is always witnessed
//! on a monomial tuple within that order, so the reports carry the bound
//! at which the scan is complete.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use alloc::{format, string::String, vec};

use num_bigint::BigInt;
use num_traits::One;

use crate::diffop::{op_series_apply, op_series_invert, DiffOp, MultiDiffOp};
use crate::matrix::Matrix;
use crate::poly::{bigint_scalar, mono_zero, monomials_up_to, Mono, Polynomial};
use crate::ring::Conjugate;
use crate::scalar::{int, s_i, s_inv, s_one, Scalar};
use crate::series::{MatrixSeries, OpSeries, PolySeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StarError {
    /// The exponential formula needs a constant tensor.
    NonConstantTheta,
    NotAntisymmetric,
    /// Tensor entries must have real coefficients.
    NotRealTensor,
    /// A supplied cochain list is structurally unusable.
    BadCochain(String),
    /// Some equivalence stage does not annihilate constants.
    UnitalityViolation { stage: usize },
}

impl core::fmt::Display for StarError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StarError::NonConstantTheta => write!(f, "tensor must be constant"),
            StarError::NotAntisymmetric => write!(f, "tensor must be antisymmetric"),
            StarError::NotRealTensor => write!(f, "tensor must have real coefficients"),
            StarError::BadCochain(msg) => write!(f, "bad cochain data: {msg}"),
            StarError::UnitalityViolation { stage } => {
                write!(f, "equivalence stage {stage} does not annihilate constants")
            }
        }
    }
}

/// Antisymmetric bivector with polynomial (possibly constant) entries on
/// the base variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonTensor {
    dim: usize,
    entries: Matrix<Polynomial>,
}

impl PoissonTensor {
    /// Builds from a full matrix of base polynomials, checking
    /// antisymmetry and realness.
    pub fn new(entries: Matrix<Polynomial>) -> Result<Self, StarError> {
        let dim = entries.rows();
        if entries.cols() != dim {
            return Err(StarError::NotAntisymmetric);
        }
        for i in 0..dim {
            for j in 0..dim {
                let e = entries.get(i, j);
                if e.fiber() != 0 || e.base() != dim {
                    return Err(StarError::BadCochain("tensor entries must live on the base".into()));
                }
                if *e != entries.get(j, i).neg() {
                    return Err(StarError::NotAntisymmetric);
                }
                if e.terms().values().any(|c| !crate::scalar::s_is_real(c)) {
                    return Err(StarError::NotRealTensor);
                }
            }
        }
        Ok(PoissonTensor { dim, entries })
    }

    /// Constant tensor from rational upper-triangle data `(i, j, value)`.
    pub fn constant(dim: usize, upper: &[(usize, usize, crate::scalar::Rational)]) -> Result<Self, StarError> {
        let mut entries = Matrix::from_fn(dim, dim, |_, _| Polynomial::zero(dim, 0));
        for (i, j, v) in upper {
            assert!(i < j && *j < dim);
            entries.set(*i, *j, Polynomial::constant(dim, 0, crate::scalar::s_real(v.clone())));
            entries.set(*j, *i, Polynomial::constant(dim, 0, crate::scalar::s_real(-v.clone())));
        }
        PoissonTensor::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        self.entries.get(i, j)
    }

    pub fn is_constant(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let e = self.entry(i, j);
                e.is_zero() || (e.terms().len() == 1 && e.terms().keys().all(crate::poly::mono_is_zero))
            })
        })
    }
}

fn factorial(r: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=r {
        acc *= int(k as i64);
    }
    acc
}

/// The order-`r` cochain of the exponential star product of a constant
/// tensor: `(1/r!) (i/2)^r theta^{m1 n1} ... theta^{mr nr}
/// (d_{m1..mr} f)(d_{n1..nr} g)`, assembled as the `r`-th power of the
/// quadratic generator in doubled variables.
pub fn moyal_cochain(theta: &PoissonTensor, r: usize) -> Result<MultiDiffOp, StarError> {
    let m = theta.dim();
    if !theta.is_constant() {
        return Err(StarError::NonConstantTheta);
    }
    // Generator sum_{mu,nu} (i/2) theta^{mu nu} xi_mu eta_nu in 2m variables.
    let half_i = s_i() * crate::scalar::s_ratio(1, 2);
    let mut generator = Polynomial::zero(2 * m, 0);
    for mu in 0..m {
        for nu in 0..m {
            let c = theta.entry(mu, nu).coeff(&mono_zero(m));
            if crate::ring::Ring::is_zero(&c) {
                continue;
            }
            let mut mono = mono_zero(2 * m);
            mono[mu] += 1;
            mono[m + nu] += 1;
            generator.add_term(mono, c * half_i.clone());
        }
    }
    let power = generator.pow(r as u32);
    let inv_fact = s_inv(&bigint_scalar(&factorial(r))).unwrap();
    let mut out = MultiDiffOp::zero(2, m, 0);
    for (mono, c) in power.terms() {
        let left = mono[..m].to_vec();
        let right = mono[m..].to_vec();
        out.add_term(vec![left, right], Polynomial::constant(m, 0, c * inv_fact.clone()));
    }
    Ok(out)
}

/// A truncation-order-indexed family of arity-2 cochains with the
/// pointwise product at order zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarProduct {
    cochains: Vec<MultiDiffOp>,
    hermitian_claimed: bool,
}

impl StarProduct {
    /// The exponential star product of a constant antisymmetric tensor,
    /// truncated at `order`.
    pub fn moyal(theta: &PoissonTensor, order: usize) -> Result<Self, StarError> {
        let mut cochains = Vec::with_capacity(order + 1);
        for r in 0..=order {
            cochains.push(moyal_cochain(theta, r)?);
        }
        Ok(StarProduct { cochains, hermitian_claimed: true })
    }

    /// The undeformed product: all higher cochains vanish.
    pub fn undeformed(base: usize, order: usize) -> Self {
        let mut cochains = vec![MultiDiffOp::product(base, 0)];
        cochains.resize(order + 1, MultiDiffOp::zero(2, base, 0));
        StarProduct { cochains, hermitian_claimed: true }
    }

    /// Wraps a user-supplied cochain list. Validates arity, the variable
    /// space and that order zero is the pointwise product; unitality of
    /// the higher cochains is checked separately (`is_unital`) so that
    /// deliberately broken products can still be fed to the checkers.
    pub fn from_cochains(cochains: Vec<MultiDiffOp>, hermitian_claimed: bool) -> Result<Self, StarError> {
        if cochains.is_empty() {
            return Err(StarError::BadCochain("at least order zero is required".into()));
        }
        let base = cochains[0].base();
        for (r, c) in cochains.iter().enumerate() {
            if c.arity() != 2 {
                return Err(StarError::BadCochain(format!("cochain {r} has arity {}", c.arity())));
            }
            if c.base() != base || c.fiber() != 0 {
                return Err(StarError::BadCochain(format!("cochain {r} lives on the wrong space")));
            }
        }
        if cochains[0] != MultiDiffOp::product(base, 0) {
            return Err(StarError::BadCochain("order zero must be the pointwise product".into()));
        }
        Ok(StarProduct { cochains, hermitian_claimed })
    }

    pub fn order(&self) -> usize {
        self.cochains.len() - 1
    }

    pub fn base(&self) -> usize {
        self.cochains[0].base()
    }

    pub fn cochain(&self, r: usize) -> &MultiDiffOp {
        &self.cochains[r]
    }

    pub fn hermitian_claimed(&self) -> bool {
        self.hermitian_claimed
    }

    /// Whether every cochain of order >= 1 annihilates constants in both
    /// slots, so that `1` is a two-sided unit.
    pub fn is_unital(&self) -> bool {
        self.cochains[1..].iter().all(MultiDiffOp::annihilates_constants)
    }

    /// Largest derivative order any cochain applies to one slot; the
    /// completeness bound for monomial scans.
    pub fn max_slot_order(&self) -> u32 {
        self.cochains
            .iter()
            .map(|c| c.max_slot_order(0).max(c.max_slot_order(1)))
            .max()
            .unwrap_or(0)
    }

    /// Star product of two truncated series, `pre`: both at this order.
    pub fn multiply(&self, f: &PolySeries, g: &PolySeries) -> PolySeries {
        let n = self.order();
        assert_eq!(f.order(), n, "operand truncated at the wrong order");
        assert_eq!(g.order(), n, "operand truncated at the wrong order");
        let mut coeffs = vec![Polynomial::zero(self.base(), 0); n + 1];
        for r in 0..=n {
            let c = &self.cochains[r];
            if c.is_zero() {
                continue;
            }
            for a in 0..=(n - r) {
                if f.coeff(a).is_zero() {
                    continue;
                }
                for b in 0..=(n - r - a) {
                    if g.coeff(b).is_zero() {
                        continue;
                    }
                    let v = c.apply2(f.coeff(a), g.coeff(b));
                    coeffs[r + a + b] = coeffs[r + a + b].add(&v);
                }
            }
        }
        PolySeries::from_coeffs(coeffs)
    }

    /// Star product of two plain polynomials as a truncated series.
    pub fn multiply_poly(&self, f: &Polynomial, g: &Polynomial) -> PolySeries {
        let coeffs = (0..=self.order())
            .map(|r| self.cochains[r].apply2(f, g))
            .collect();
        PolySeries::from_coeffs(coeffs)
    }

    pub fn commutator(&self, f: &PolySeries, g: &PolySeries) -> PolySeries {
        self.multiply(f, g).sub(&self.multiply(g, f))
    }

    /// Lifts a polynomial to a constant series at this star's order.
    pub fn series(&self, p: Polynomial) -> PolySeries {
        PolySeries::constant(p, self.order())
    }

    pub fn one_series(&self) -> PolySeries {
        self.series(Polynomial::one(self.base(), 0))
    }
}

/// Star product on matrices of truncated series (entrywise cochains over
/// the matrix product pattern).
pub fn star_matrix_mul(s: &StarProduct, a: &MatrixSeries, b: &MatrixSeries) -> MatrixSeries {
    let n = s.order();
    assert_eq!(a.order(), n);
    assert_eq!(b.order(), n);
    let rows = a.coeff(0).rows();
    let inner = a.coeff(0).cols();
    let cols = b.coeff(0).cols();
    assert_eq!(inner, b.coeff(0).rows());
    let zero = Matrix::from_fn(rows, cols, |_, _| Polynomial::zero(s.base(), 0));
    let mut coeffs = vec![zero; n + 1];
    for r in 0..=n {
        let c = &s.cochain(r);
        if c.is_zero() {
            continue;
        }
        for p in 0..=(n - r) {
            for q in 0..=(n - r - p) {
                let (ap, bq) = (a.coeff(p), b.coeff(q));
                let target = r + p + q;
                for i in 0..rows {
                    for j in 0..cols {
                        let mut acc = coeffs[target].get(i, j).clone();
                        for k in 0..inner {
                            let v = c.apply2(ap.get(i, k), bq.get(k, j));
                            acc = acc.add(&v);
                        }
                        coeffs[target].set(i, j, acc);
                    }
                }
            }
        }
    }
    MatrixSeries::from_coeffs(coeffs)
}

/// Left star multiplication by a series, as an operator series:
/// stage `m` is `sum_{r+a=m} C_r(f_a, .)`.
pub fn left_mult_operator(s: &StarProduct, f: &PolySeries) -> OpSeries {
    let n = s.order();
    assert_eq!(f.order(), n);
    let mut coeffs = vec![DiffOp::zero(s.base(), 0); n + 1];
    for r in 0..=n {
        for a in 0..=(n - r) {
            let op = s.cochain(r).curry_left(f.coeff(a));
            coeffs[r + a] = coeffs[r + a].add(&op);
        }
    }
    OpSeries::from_coeffs(coeffs)
}

/// Right star multiplication by a series, as an operator series:
/// stage `m` is `sum_{r+b=m} C_r(., f_b)`.
pub fn right_mult_operator(s: &StarProduct, f: &PolySeries) -> OpSeries {
    let n = s.order();
    assert_eq!(f.order(), n);
    let mut coeffs = vec![DiffOp::zero(s.base(), 0); n + 1];
    for r in 0..=n {
        for b in 0..=(n - r) {
            let op = s.cochain(r).curry_right(f.coeff(b));
            coeffs[r + b] = coeffs[r + b].add(&op);
        }
    }
    OpSeries::from_coeffs(coeffs)
}

/// Star-inverse of a matrix series whose order-zero part is the identity
/// matrix: solves `w * v = 1` order by order.
pub fn star_matrix_inverse(s: &StarProduct, w: &MatrixSeries) -> MatrixSeries {
    let n = s.order();
    assert_eq!(w.order(), n);
    let size = w.coeff(0).rows();
    let id = Matrix::identity(size, Polynomial::one(s.base(), 0));
    assert_eq!(w.coeff(0), &id, "order-zero part must be the identity");
    let mut v = MatrixSeries::constant(id, n);
    for order in 1..=n {
        // defect of the current partial inverse at this order
        let defect = star_matrix_mul(s, w, &v);
        let correction = defect.coeff(order).neg();
        v.set_coeff(order, v.coeff(order).add(&correction));
    }
    debug_assert!({
        let prod = star_matrix_mul(s, w, &v);
        let id = Matrix::identity(size, Polynomial::one(s.base(), 0));
        prod == MatrixSeries::constant(id, n)
    });
    v
}

/// Memo of `C_r(x^a, x^b)` values for the exhaustive scans.
pub struct CochainCache {
    map: BTreeMap<(usize, Mono, Mono), Polynomial>,
}

impl CochainCache {
    pub fn new() -> Self {
        CochainCache { map: BTreeMap::new() }
    }

    fn get(&mut self, s: &StarProduct, r: usize, a: &Mono, b: &Mono) -> &Polynomial {
        let key = (r, a.clone(), b.clone());
        if !self.map.contains_key(&key) {
            let fa = Polynomial::monomial(s.base(), 0, a.clone(), s_one());
            let fb = Polynomial::monomial(s.base(), 0, b.clone(), s_one());
            let v = s.cochain(r).apply2(&fa, &fb);
            self.map.insert(key.clone(), v);
        }
        &self.map[&key]
    }

    /// `sum_{terms} c * C_r(mono, b)` for a polynomial left factor.
    fn apply_left(&mut self, s: &StarProduct, r: usize, p: &Polynomial, b: &Mono) -> Polynomial {
        let mut out = Polynomial::zero(s.base(), 0);
        let terms: Vec<(Mono, Scalar)> = p.terms().iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        for (m, c) in terms {
            let v = self.get(s, r, &m, b).scale(&c);
            out = out.add(&v);
        }
        out
    }

    fn apply_right(&mut self, s: &StarProduct, r: usize, a: &Mono, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(s.base(), 0);
        let terms: Vec<(Mono, Scalar)> = p.terms().iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        for (m, c) in terms {
            let v = self.get(s, r, a, &m).scale(&c);
            out = out.add(&v);
        }
        out
    }
}

impl Default for CochainCache {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssocFailure {
    /// Lowest deformation order at which the associator fails.
    pub order: usize,
    pub witness: (Mono, Mono, Mono),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssocReport {
    pub pass: bool,
    pub failure: Option<AssocFailure>,
    pub degree_bound: u32,
    /// The scan is complete (witnesses any violation) once the degree
    /// bound reaches this value.
    pub complete_at: u32,
    pub triples_checked: usize,
}

/// First failing order of the associator on one monomial triple, or
/// `None` when `(f*g)*h = f*(g*h)` holds exactly modulo the truncation.
pub fn assoc_defect_triple(
    s: &StarProduct,
    cache: &mut CochainCache,
    f: &Mono,
    g: &Mono,
    h: &Mono,
) -> Option<usize> {
    let n = s.order();
    // fg[a] = C_a(f, g), gh[b] = C_b(g, h)
    let fg: Vec<Polynomial> = (0..=n).map(|a| cache.get(s, a, f, g).clone()).collect();
    let gh: Vec<Polynomial> = (0..=n).map(|b| cache.get(s, b, g, h).clone()).collect();
    for order in 0..=n {
        let mut lhs = Polynomial::zero(s.base(), 0);
        let mut rhs = Polynomial::zero(s.base(), 0);
        for r in 0..=order {
            let a = order - r;
            if !fg[a].is_zero() {
                lhs = lhs.add(&cache.apply_left(s, r, &fg[a], h));
            }
            if !gh[a].is_zero() {
                rhs = rhs.add(&cache.apply_right(s, r, f, &gh[a]));
            }
        }
        if lhs != rhs {
            return Some(order);
        }
    }
    None
}

/// Exhaustive associativity scan over all monomial triples of total
/// degree `<= degree_bound`, exact modulo the truncation order.
pub fn check_associativity(s: &StarProduct, degree_bound: u32) -> AssocReport {
    let monos = monomials_up_to(s.base(), degree_bound);
    let mut cache = CochainCache::new();
    let mut checked = 0usize;
    let mut failure: Option<AssocFailure> = None;
    'outer: for f in &monos {
        for g in &monos {
            for h in &monos {
                checked += 1;
                if let Some(order) = assoc_defect_triple(s, &mut cache, f, g, h) {
                    failure = Some(AssocFailure {
                        order,
                        witness: (f.clone(), g.clone(), h.clone()),
                    });
                    break 'outer;
                }
            }
        }
    }
    AssocReport {
        pass: failure.is_none(),
        failure,
        degree_bound,
        complete_at: s.max_slot_order(),
        triples_checked: checked,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitianFailure {
    pub order: usize,
    pub witness: (Mono, Mono),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitianReport {
    pub pass: bool,
    pub failure: Option<HermitianFailure>,
    pub degree_bound: u32,
    pub complete_at: u32,
    pub pairs_checked: usize,
}

/// Checks `conj(f * g) = conj(g) * conj(f)` on all monomial pairs of
/// degree `<= degree_bound`.
pub fn check_hermitian(s: &StarProduct, degree_bound: u32) -> HermitianReport {
    let monos = monomials_up_to(s.base(), degree_bound);
    let mut checked = 0usize;
    let mut failure = None;
    'outer: for f in &monos {
        for g in &monos {
            checked += 1;
            let pf = Polynomial::monomial(s.base(), 0, f.clone(), s_one());
            let pg = Polynomial::monomial(s.base(), 0, g.clone(), s_one());
            // real monomials are conjugation-fixed
            let lhs = s.multiply_poly(&pf, &pg).conj();
            let rhs = s.multiply_poly(&pg, &pf);
            if lhs != rhs {
                let order = (0..=s.order())
                    .find(|&r| lhs.coeff(r) != rhs.coeff(r))
                    .unwrap();
                failure = Some(HermitianFailure { order, witness: (f.clone(), g.clone()) });
                break 'outer;
            }
        }
    }
    HermitianReport {
        pass: failure.is_none(),
        failure,
        degree_bound,
        complete_at: s.max_slot_order(),
        pairs_checked: checked,
    }
}

/// The antisymmetrized first-order part `(1/i)(C_1(f,g) - C_1(g,f))`.
pub fn extract_poisson(s: &StarProduct) -> MultiDiffOp {
    assert!(s.order() >= 1);
    let c1 = s.cochain(1);
    c1.sub(&c1.swap2()).scale(&-s_i())
}

/// The coordinate bracket `sum theta^{mu nu} d_mu f d_nu g` of a tensor.
pub fn tensor_bracket(theta: &PoissonTensor) -> MultiDiffOp {
    let m = theta.dim();
    let mut out = MultiDiffOp::zero(2, m, 0);
    for mu in 0..m {
        for nu in 0..m {
            let c = theta.entry(mu, nu);
            if c.is_zero() {
                continue;
            }
            let mut a = mono_zero(m);
            a[mu] = 1;
            let mut b = mono_zero(m);
            b[nu] = 1;
            out.add_term(vec![a, b], c.clone());
        }
    }
    out
}

/// The cyclic obstruction to the Jacobi identity: components
/// `J^{mnk} = sum_l theta^{lm} d_l theta^{nk} + theta^{ln} d_l theta^{km}
/// + theta^{lk} d_l theta^{mn}` for `m < n < k`. The tensor is a Poisson
/// tensor iff all components vanish.
pub fn schouten_square(theta: &PoissonTensor) -> Vec<((usize, usize, usize), Polynomial)> {
    let m = theta.dim();
    let mut out = Vec::new();
    for mu in 0..m {
        for nu in (mu + 1)..m {
            for ka in (nu + 1)..m {
                let mut j = Polynomial::zero(m, 0);
                for la in 0..m {
                    let t1 = theta.entry(la, mu).mul(&theta.entry(nu, ka).deriv(la));
                    let t2 = theta.entry(la, nu).mul(&theta.entry(ka, mu).deriv(la));
                    let t3 = theta.entry(la, ka).mul(&theta.entry(mu, nu).deriv(la));
                    j = j.add(&t1).add(&t2).add(&t3);
                }
                out.push(((mu, nu, ka), j));
            }
        }
    }
    out
}

/// Formal series of base differential operators starting at the
/// identity; stage `r` is the coefficient of the `r`-th power of the
/// deformation parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceTransform {
    base: usize,
    stages: Vec<DiffOp>, // stages[i] = T_{i+1}
}

impl EquivalenceTransform {
    pub fn new(base: usize, stages: Vec<DiffOp>) -> Self {
        for t in &stages {
            assert_eq!((t.base(), t.fiber()), (base, 0), "stages live on the base");
        }
        EquivalenceTransform { base, stages }
    }

    pub fn identity(base: usize) -> Self {
        EquivalenceTransform { base, stages: Vec::new() }
    }

    /// Stages of `exp(lam * d)`: `T_r = d^r / r!`.
    pub fn exponential(d: &DiffOp, order: usize) -> Self {
        let mut stages = Vec::with_capacity(order);
        let mut power = d.clone();
        for r in 1..=order {
            let c = s_inv(&bigint_scalar(&factorial(r))).unwrap();
            stages.push(power.scale(&c));
            power = power.compose(d);
        }
        EquivalenceTransform::new(d.base(), stages)
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn stage(&self, r: usize) -> DiffOp {
        assert!(r >= 1);
        self.stages
            .get(r - 1)
            .cloned()
            .unwrap_or_else(|| DiffOp::zero(self.base, 0))
    }

    pub fn stages(&self) -> &[DiffOp] {
        &self.stages
    }

    pub fn as_series(&self, order: usize) -> OpSeries {
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(DiffOp::identity(self.base, 0));
        for r in 1..=order {
            coeffs.push(self.stage(r));
        }
        OpSeries::from_coeffs(coeffs)
    }

    pub fn inverse_series(&self, order: usize) -> OpSeries {
        op_series_invert(&self.as_series(order))
    }

    /// The inverse transformation, truncated at `order`.
    pub fn inverse(&self, order: usize) -> EquivalenceTransform {
        let inv = self.inverse_series(order);
        let stages = (1..=order).map(|r| inv.coeff(r).clone()).collect();
        EquivalenceTransform::new(self.base, stages)
    }

    pub fn apply(&self, f: &PolySeries) -> PolySeries {
        op_series_apply(&self.as_series(f.order()), f)
    }

    /// All stage coefficients real (commutes with conjugation).
    pub fn is_real(&self) -> bool {
        self.stages.iter().all(|t| *t == t.conj())
    }

    /// Every stage annihilates constants, so transformed products stay
    /// unital.
    pub fn preserves_unit(&self) -> bool {
        self.stages
            .iter()
            .all(|t| t.apply(&Polynomial::one(self.base, 0)).is_zero())
    }
}

/// The transformed product `f *' g = T^{-1}(T(f) * T(g))`, returned as a
/// cochain family. Errors when some stage moves the constant function.
pub fn apply_equivalence(t: &EquivalenceTransform, s: &StarProduct) -> Result<StarProduct, StarError> {
    assert_eq!(t.base(), s.base());
    let n = s.order();
    for r in 1..=n {
        if !t.stage(r).apply(&Polynomial::one(t.base(), 0)).is_zero() {
            return Err(StarError::UnitalityViolation { stage: r });
        }
    }
    let fwd = t.as_series(n);
    let inv = op_series_invert(&fwd);
    let mut cochains = vec![MultiDiffOp::zero(2, s.base(), 0); n + 1];
    for r in 0..=n {
        let c = s.cochain(r);
        if c.is_zero() {
            continue;
        }
        for b in 0..=(n - r) {
            let left = c.slot_compose(0, fwd.coeff(b));
            if left.is_zero() {
                continue;
            }
            for cc in 0..=(n - r - b) {
                let both = left.slot_compose(1, fwd.coeff(cc));
                if both.is_zero() {
                    continue;
                }
                for a in 0..=(n - r - b - cc) {
                    let full = both.post_compose(inv.coeff(a));
                    cochains[r + a + b + cc] = cochains[r + a + b + cc].add(&full);
                }
            }
        }
    }
    let hermitian = s.hermitian_claimed() && t.is_real();
    StarProduct::from_cochains(cochains, hermitian)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::monomials_up_to;
    use crate::scalar::{rat, ratio, s_int, s_ratio, s_zero};

    fn theta12(m: usize) -> PoissonTensor {
        PoissonTensor::constant(m, &[(0, 1, rat(1))]).unwrap()
    }

    fn xvar(m: usize, v: usize) -> Polynomial {
        Polynomial::var(m, 0, v)
    }

    /// Brute-force oracle for the exponential cochain: the bare index
    /// summation over all `r`-tuples of tensor slots.
    fn moyal_oracle(theta: &PoissonTensor, r: usize, f: &Polynomial, g: &Polynomial) -> Polynomial {
        let m = theta.dim();
        let mut tuples: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for _ in 0..r {
            let mut next = Vec::new();
            for t in &tuples {
                for mu in 0..m {
                    for nu in 0..m {
                        let mut tt = t.clone();
                        tt.push((mu, nu));
                        next.push(tt);
                    }
                }
            }
            tuples = next;
        }
        let mut acc = Polynomial::zero(m, 0);
        for t in &tuples {
            let mut coeff = s_one();
            let mut df = f.clone();
            let mut dg = g.clone();
            for &(mu, nu) in t {
                coeff = coeff * theta.entry(mu, nu).coeff(&mono_zero(m));
                df = df.deriv(mu);
                dg = dg.deriv(nu);
            }
            if crate::ring::Ring::is_zero(&coeff) || df.is_zero() || dg.is_zero() {
                continue;
            }
            acc = acc.add(&df.mul(&dg).scale(&coeff));
        }
        let norm = s_inv(&bigint_scalar(&factorial(r))).unwrap()
            * crate::scalar::s_pow(&(s_i() * s_ratio(1, 2)), r as u32);
        acc.scale(&norm)
    }

    #[test]
    fn moyal_cochain_matches_brute_force_index_summation() {
        let th = theta12(2);
        // frozen values: C_1(x, y) = i/2 and C_2(x^2, y^2) = -1/2
        let c1 = moyal_cochain(&th, 1).unwrap();
        let v1 = c1.apply2(&xvar(2, 0), &xvar(2, 1));
        assert_eq!(v1, Polynomial::constant(2, 0, s_i() * s_ratio(1, 2)));
        assert_eq!(v1, moyal_oracle(&th, 1, &xvar(2, 0), &xvar(2, 1)));

        let c2 = moyal_cochain(&th, 2).unwrap();
        let v2 = c2.apply2(&xvar(2, 0).pow(2), &xvar(2, 1).pow(2));
        assert_eq!(v2, Polynomial::constant(2, 0, s_ratio(-1, 2)));
        assert_eq!(v2, moyal_oracle(&th, 2, &xvar(2, 0).pow(2), &xvar(2, 1).pow(2)));

        // cross-check on random-ish polynomials at orders 1..3
        let th3 = PoissonTensor::constant(3, &[(0, 1, rat(2)), (0, 2, ratio(-1, 3)), (1, 2, ratio(1, 2))]).unwrap();
        let f = xvar(3, 0).pow(2).mul(&xvar(3, 2)).add(&xvar(3, 1));
        let g = xvar(3, 1).mul(&xvar(3, 2)).sub(&Polynomial::one(3, 0));
        for r in 0..=3 {
            let c = moyal_cochain(&th3, r).unwrap();
            assert_eq!(c.apply2(&f, &g), moyal_oracle(&th3, r, &f, &g), "order {r}");
        }
        // derivative of a constant kills any order >= 1
        for r in 1..=4 {
            let c = moyal_cochain(&th, r).unwrap();
            assert!(c.apply2(&Polynomial::one(2, 0), &xvar(2, 1).pow(4)).is_zero());
            assert!(c.apply2(&xvar(2, 0).pow(4), &Polynomial::one(2, 0)).is_zero());
        }
    }

    #[test]
    fn non_constant_tensor_is_rejected() {
        let x2 = Polynomial::var(3, 0, 2);
        let mut entries = Matrix::from_fn(3, 3, |_, _| Polynomial::zero(3, 0));
        entries.set(0, 1, x2.clone());
        entries.set(1, 0, x2.neg());
        let th = PoissonTensor::new(entries).unwrap();
        assert_eq!(moyal_cochain(&th, 1), Err(StarError::NonConstantTheta));
        assert_eq!(StarProduct::moyal(&th, 2), Err(StarError::NonConstantTheta));
    }

    #[test]
    fn star_products_of_coordinates() {
        let s = StarProduct::moyal(&theta12(2), 4).unwrap();
        let x = s.series(xvar(2, 0));
        let y = s.series(xvar(2, 1));
        // x*y = xy + (i/2) lam
        let xy = s.multiply(&x, &y);
        assert_eq!(xy.coeff(0), &xvar(2, 0).mul(&xvar(2, 1)));
        assert_eq!(xy.coeff(1), &Polynomial::constant(2, 0, s_i() * s_ratio(1, 2)));
        assert!(xy.coeff(2).is_zero());
        // commutation relation: x*y - y*x = i lam
        let comm = s.commutator(&x, &y);
        let mut expect = PolySeries::constant(Polynomial::zero(2, 0), 4);
        expect.set_coeff(1, Polynomial::constant(2, 0, s_i()));
        assert_eq!(comm, expect);
        // unitality
        let f = s.series(xvar(2, 0).pow(2).mul(&xvar(2, 1)));
        assert_eq!(s.multiply(&s.one_series(), &f), f);
        assert_eq!(s.multiply(&f, &s.one_series()), f);
    }

    #[test]
    fn moyal_is_associative_and_a_broken_product_is_not() {
        let s = StarProduct::moyal(&theta12(2), 4).unwrap();
        let report = check_associativity(&s, 3);
        assert!(report.pass, "{report:?}");
        assert_eq!(report.triples_checked, 10 * 10 * 10);

        // C_1(f,g) = f dg/dx is not even a cocycle: the linear term of the
        // associator is already nonzero (oracle: direct expansion gives
        // fg dh/dx at order one), so the first failing order is 1.
        let mut c1 = MultiDiffOp::zero(2, 1, 0);
        c1.add_term(vec![vec![0], vec![1]], Polynomial::one(1, 0));
        let cochains = vec![MultiDiffOp::product(1, 0), c1, MultiDiffOp::zero(2, 1, 0)];
        let broken = StarProduct::from_cochains(cochains, false).unwrap();
        let report = check_associativity(&broken, 2);
        assert!(!report.pass);
        let failure = report.failure.unwrap();
        assert_eq!(failure.order, 1);
        assert_eq!(failure.witness, (vec![0], vec![0], vec![1]));

        // C_1(f,g) = df dg is a cocycle, so order one passes and the
        // quadratic term C_1(C_1(f,g),h) - C_1(f,C_1(g,h)) obstructs:
        // it equals d2f dg dh - df dg d2h, first seen on (x, x, x^2).
        let mut sym = MultiDiffOp::zero(2, 1, 0);
        sym.add_term(vec![vec![1], vec![1]], Polynomial::one(1, 0));
        let cochains = vec![MultiDiffOp::product(1, 0), sym, MultiDiffOp::zero(2, 1, 0)];
        let broken2 = StarProduct::from_cochains(cochains, false).unwrap();
        let report = check_associativity(&broken2, 2);
        assert!(!report.pass);
        let failure = report.failure.unwrap();
        assert_eq!(failure.order, 2);
        assert_eq!(failure.witness, (vec![1], vec![1], vec![2]));

        // order-zero-only product is associative
        let s0 = StarProduct::undeformed(2, 3);
        assert!(check_associativity(&s0, 3).pass);
    }

    #[test]
    fn hermitian_check_and_its_violation() {
        let s = StarProduct::moyal(&theta12(2), 4).unwrap();
        let report = check_hermitian(&s, 3);
        assert!(report.pass);
        // witness identity: conj(x*y) = xy - (i/2) lam = y*x
        let x = xvar(2, 0);
        let y = xvar(2, 1);
        assert_eq!(s.multiply_poly(&x, &y).conj(), s.multiply_poly(&y, &x));

        // C_1(f,g) = i f g violates the reality condition
        let mut c1 = MultiDiffOp::zero(2, 1, 0);
        c1.add_term(vec![vec![0], vec![0]], Polynomial::constant(1, 0, s_i()));
        let broken =
            StarProduct::from_cochains(vec![MultiDiffOp::product(1, 0), c1], true).unwrap();
        let report = check_hermitian(&broken, 2);
        assert!(!report.pass);
        let failure = report.failure.unwrap();
        assert_eq!(failure.order, 1);
    }

    #[test]
    fn poisson_limit_of_the_exponential_product() {
        let th = theta12(2);
        let s = StarProduct::moyal(&th, 3).unwrap();
        let bracket = extract_poisson(&s);
        // {x, y} = 1
        assert_eq!(bracket.apply2(&xvar(2, 0), &xvar(2, 1)), Polynomial::one(2, 0));
        // {f, f} = 0
        let f = xvar(2, 0).pow(2).add(&xvar(2, 1));
        assert!(bracket.apply2(&f, &f).is_zero());
        // {x, y^2} = 2y
        assert_eq!(
            bracket.apply2(&xvar(2, 0), &xvar(2, 1).pow(2)),
            xvar(2, 1).scale(&s_int(2))
        );
        // the bracket equals the coordinate bracket of the tensor, as operators
        assert_eq!(bracket, tensor_bracket(&th));
    }

    #[test]
    fn schouten_square_detects_jacobi_failures() {
        // constant tensor: flat
        let th = theta12(3);
        assert!(schouten_square(&th).iter().all(|(_, j)| j.is_zero()));

        // linear so(3)-type tensor: x3, x1, x2 placements
        let m = 3;
        let mut entries = Matrix::from_fn(m, m, |_, _| Polynomial::zero(m, 0));
        let put = |e: &mut Matrix<Polynomial>, i: usize, j: usize, p: Polynomial| {
            e.set(i, j, p.clone());
            e.set(j, i, p.neg());
        };
        put(&mut entries, 0, 1, xvar(3, 2));
        put(&mut entries, 1, 2, xvar(3, 0));
        put(&mut entries, 2, 0, xvar(3, 1));
        let so3 = PoissonTensor::new(entries).unwrap();
        assert!(schouten_square(&so3).iter().all(|(_, j)| j.is_zero()));

        // quadratic counterexample: theta^{12} = x1^2, theta^{13} = x2^2
        let mut entries = Matrix::from_fn(m, m, |_, _| Polynomial::zero(m, 0));
        put(&mut entries, 0, 1, xvar(3, 0).pow(2));
        put(&mut entries, 0, 2, xvar(3, 1).pow(2));
        let bad = PoissonTensor::new(entries).unwrap();
        let sq = schouten_square(&bad);
        assert_eq!(sq.len(), 1);
        // frozen from the cyclic sum: J^{123} = 2 x1 x2^2
        let expect = xvar(3, 0).mul(&xvar(3, 1).pow(2)).scale(&s_int(2));
        assert_eq!(sq[0].1, expect);

        // oracle: the Jacobi defect of the coordinate bracket on (x1,x2,x3)
        let br = tensor_bracket(&bad);
        let jac = |f: &Polynomial, g: &Polynomial, h: &Polynomial| {
            br.apply2(&br.apply2(f, g), h)
                .add(&br.apply2(&br.apply2(g, h), f))
                .add(&br.apply2(&br.apply2(h, f), g))
        };
        assert_eq!(jac(&xvar(3, 0), &xvar(3, 1), &xvar(3, 2)), expect);
    }

    #[test]
    fn equivalence_to_the_standard_ordered_product() {
        // T = exp(-(i lam / 2) dx dy) carries the symmetric product to the
        // standard-ordered one with C'_1(f,g) = i dx f dy g.
        let n = 4;
        let s = StarProduct::moyal(&theta12(2), n).unwrap();
        let dxdy = DiffOp::term(vec![1, 1], Polynomial::one(2, 0));
        let t = EquivalenceTransform::exponential(&dxdy.scale(&(-s_i() * s_ratio(1, 2))), n);
        let sp = apply_equivalence(&t, &s).unwrap();

        let mut expect_c1 = MultiDiffOp::zero(2, 2, 0);
        expect_c1.add_term(vec![vec![1, 0], vec![0, 1]], Polynomial::constant(2, 0, s_i()));
        assert_eq!(sp.cochain(1), &expect_c1);

        // homomorphism identity T(f *' g) = T(f) * T(g) on monomials
        for fm in monomials_up_to(2, 2) {
            for gm in monomials_up_to(2, 2) {
                let f = s.series(Polynomial::monomial(2, 0, fm.clone(), s_one()));
                let g = s.series(Polynomial::monomial(2, 0, gm.clone(), s_one()));
                let lhs = t.apply(&sp.multiply(&f, &g));
                let rhs = s.multiply(&t.apply(&f), &t.apply(&g));
                assert_eq!(lhs, rhs);
            }
        }

        // transformed product is associative and has the same first-order bracket
        assert!(check_associativity(&sp, 3).pass);
        assert_eq!(extract_poisson(&sp), extract_poisson(&s));

        // identity transform fixes the product; round trip restores it
        let id = EquivalenceTransform::identity(2);
        assert_eq!(apply_equivalence(&id, &s).unwrap(), s);
        // (the complex transform does not claim Hermitian-ness, so compare
        // the cochains themselves)
        let back = apply_equivalence(&t.inverse(n), &sp).unwrap();
        for r in 0..=n {
            assert_eq!(back.cochain(r), s.cochain(r), "order {r}");
        }

        // a stage moving constants is rejected
        let bad = EquivalenceTransform::new(2, vec![DiffOp::identity(2, 0)]);
        assert_eq!(
            apply_equivalence(&bad, &s),
            Err(StarError::UnitalityViolation { stage: 1 })
        );
        let _ = s_zero();
    }
}
